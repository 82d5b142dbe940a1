"""Cycle-safe relations over rational terms.

All traversals remember the pairs of compound cells they have already
co-visited, so they terminate on cyclic inputs.  No occurs check is ever
performed: unifying ``X`` with ``[1|X]`` simply produces the infinite list of
ones.
"""

from __future__ import annotations

from .errors import InstantiationError
from .terms import ATOM, INT, PAIR, STRUCT, VAR, CellStore, Trail


def unify(store: CellStore, trail: Trail, a: int, b: int) -> bool:
    """Unify without occurs check.  On failure every binding made is undone."""
    tags, vals = store.tags, store.vals
    entries = trail.entries
    while tags[a] == VAR and vals[a] is not None:
        a = vals[a]
    while tags[b] == VAR and vals[b] is not None:
        b = vals[b]
    if a == b:
        return True
    ta = tags[a]
    if ta == VAR:
        if tags[b] == VAR and b > a:
            a, b = b, a
        vals[a] = b
        entries.append(a)
        return True
    if tags[b] == VAR:
        vals[b] = a
        entries.append(b)
        return True
    if ta == ATOM or ta == INT:
        return tags[b] == ta and vals[a] == vals[b]
    tmark = len(entries)
    visited = set()
    stack = [a, b]
    while stack:
        b = stack.pop()
        a = stack.pop()
        while tags[a] == VAR and vals[a] is not None:
            a = vals[a]
        while tags[b] == VAR and vals[b] is not None:
            b = vals[b]
        if a == b:
            continue
        ta = tags[a]
        tb = tags[b]
        if ta == VAR:
            if tb == VAR and b > a:
                vals[b] = a
                entries.append(b)
            else:
                vals[a] = b
                entries.append(a)
            continue
        if tb == VAR:
            vals[b] = a
            entries.append(b)
            continue
        if ta != tb:
            break
        if ta == PAIR:
            key = (a, b)
            if key in visited:
                continue
            visited.add(key)
            va, vb = vals[a], vals[b]
            stack += (va[1], vb[1], va[0], vb[0])
        elif ta == STRUCT:
            fa, aa = vals[a]
            fb, ab = vals[b]
            if fa != fb or len(aa) != len(ab):
                break
            key = (a, b)
            if key in visited:
                continue
            visited.add(key)
            for x, y in zip(reversed(aa), reversed(ab)):
                stack.append(x)
                stack.append(y)
        elif vals[a] != vals[b]:
            break
    else:
        return True
    for i in range(len(entries) - 1, tmark - 1, -1):
        vals[entries[i]] = None
    del entries[tmark:]
    return False


def struct_equal(store: CellStore, a: int, b: int) -> bool:
    """``==`` on rational terms; unbound variables equal only themselves."""
    tags, vals = store.tags, store.vals
    while tags[a] == VAR and vals[a] is not None:
        a = vals[a]
    while tags[b] == VAR and vals[b] is not None:
        b = vals[b]
    if a == b:
        return True
    ta = tags[a]
    if ta != tags[b] or ta == VAR:
        return False
    if ta == ATOM or ta == INT:
        return vals[a] == vals[b]
    deref = store.deref
    visited = set()
    stack = [(a, b)]
    while stack:
        a, b = stack.pop()
        a = deref(a)
        b = deref(b)
        if a == b:
            continue
        ta = tags[a]
        if ta != tags[b] or ta == VAR:
            return False
        if ta == PAIR:
            if (a, b) in visited:
                continue
            visited.add((a, b))
            va, vb = vals[a], vals[b]
            stack.append((va[1], vb[1]))
            stack.append((va[0], vb[0]))
        elif ta == STRUCT:
            fa, aa = vals[a]
            fb, ab = vals[b]
            if fa != fb or len(aa) != len(ab):
                return False
            if (a, b) in visited:
                continue
            visited.add((a, b))
            stack.extend(zip(reversed(aa), reversed(ab)))
        elif vals[a] != vals[b]:
            return False
    return True


def variant(store: CellStore, a: int, b: int) -> bool:
    """Equal up to a bijective renaming of unbound variables."""
    tags, vals = store.tags, store.vals
    deref = store.deref
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    visited = set()
    stack = [(a, b)]
    while stack:
        a, b = stack.pop()
        a = deref(a)
        b = deref(b)
        ta = tags[a]
        if ta != tags[b]:
            return False
        if ta == VAR:
            if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
                return False
        elif ta == PAIR:
            if (a, b) in visited:
                continue
            visited.add((a, b))
            va, vb = vals[a], vals[b]
            stack.append((va[1], vb[1]))
            stack.append((va[0], vb[0]))
        elif ta == STRUCT:
            fa, aa = vals[a]
            fb, ab = vals[b]
            if fa != fb or len(aa) != len(ab):
                return False
            if (a, b) in visited:
                continue
            visited.add((a, b))
            stack.extend(zip(reversed(aa), reversed(ab)))
        elif vals[a] != vals[b]:
            return False
    return True


def is_acyclic(store: CellStore, a: int) -> bool:
    """True iff no dereference path from ``a`` revisits a compound cell."""
    tags = store.tags
    deref = store.deref
    on_path = set()
    done = set()
    root = deref(a)
    if tags[root] not in (PAIR, STRUCT):
        return True
    # each frame: (cell, its children, next child index)
    on_path.add(root)
    frames = [(root, store.args(root), 0)]
    while frames:
        cell, kids, i = frames[-1]
        if i == len(kids):
            frames.pop()
            on_path.discard(cell)
            done.add(cell)
            continue
        frames[-1] = (cell, kids, i + 1)
        c = deref(kids[i])
        if tags[c] not in (PAIR, STRUCT) or c in done:
            continue
        if c in on_path:
            return False
        on_path.add(c)
        frames.append((c, store.args(c), 0))
    return True


def univ(store: CellStore, a: int) -> list[int]:
    """``T =.. L``: top-level decomposition, never unfolding cycles."""
    a = store.deref(a)
    tag = store.tags[a]
    if tag == VAR:
        raise InstantiationError("=.. needs a bound left-hand side")
    if tag == PAIR:
        h, t = store.vals[a]
        return [store.atom("."), h, t]
    if tag == STRUCT:
        sid, args = store.vals[a]
        return [store.atom_id(sid), *args]
    return [a]


def univ_inverse(store: CellStore, parts: list[int]) -> int:
    from .errors import PrologTypeError

    if not parts:
        raise PrologTypeError("=.. needs a non-empty list")
    head = store.deref(parts[0])
    if len(parts) == 1:
        return head
    tag = store.tags[head]
    if tag == VAR:
        raise InstantiationError("=.. needs a bound functor")
    if tag != ATOM:
        raise PrologTypeError("=.. functor must be an atom", head)
    sid = store.vals[head]
    if store.names[sid] == "." and len(parts) == 3:
        return store.pair(parts[1], parts[2])
    return store.struct(sid, parts[1:])


def bisimilar(store: CellStore, a: int, b: int) -> bool:
    """Reference oracle: compare unfoldings of ``a`` and ``b`` to a bounded depth.

    Two rational trees that differ do so within ``|cells(a)| * |cells(b)|``
    steps (a path in their product automaton), so unfolding one level further
    decides equality.  Unbound variables are equal only to themselves.
    """
    depth = len(store.reachable(a)) * len(store.reachable(b)) + 1
    deref = store.deref
    tags, vals = store.tags, store.vals
    seen = set()
    todo = [(deref(a), deref(b), depth)]
    while todo:
        state = todo.pop()
        if state in seen:
            continue
        seen.add(state)
        x, y, d = state
        tx, ty = tags[x], tags[y]
        if tx != ty:
            return False
        if tx == VAR:
            if x != y:
                return False
            continue
        if tx in (ATOM, INT):
            if vals[x] != vals[y]:
                return False
            continue
        if tx == STRUCT and (vals[x][0] != vals[y][0] or len(vals[x][1]) != len(vals[y][1])):
            return False
        if d == 0:
            continue
        for cx, cy in zip(store.args(x), store.args(y)):
            todo.append((deref(cx), deref(cy), d - 1))
    return True
