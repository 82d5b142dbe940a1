"""Builtin predicates.

Every handler takes ``(args, cut_barrier, ancestors, next, choicepoints)`` and
returns the continuation to run next, or ``None`` to fail.
"""

from __future__ import annotations

import operator
import sys

from .canonical import canonical_term
from .errors import EvaluationError, InstantiationError, PermissionError_, PrologTypeError
from .printer import format_term
from .rational import is_acyclic, struct_equal, unify, univ, univ_inverse
from .terms import ATOM, INT, PAIR, STRUCT, VAR, undo_to
from .transform import MEMBER


def table(engine) -> dict:
    from .engine import CUTTO, FAIL_NODE, GOAL, SOFT, AltCP, SoftCP

    store = engine.store
    trail = engine.trail
    tags, vals = store.tags, store.vals
    deref = store.deref
    sym = store.symbol

    def mark():
        return trail.mark(store)

    def det(fn, arity):
        if arity == 1:
            return lambda args, cutb, anc, nxt, cps: nxt if fn(args[0]) else None
        if arity == 2:
            return lambda args, cutb, anc, nxt, cps: nxt if fn(args[0], args[1]) else None
        return lambda args, cutb, anc, nxt, cps: nxt if fn(*args) else None

    # -- control ---------------------------------------------------------------

    def conj(args, cutb, anc, nxt, cps):
        return (GOAL, args[0], cutb, anc, (GOAL, args[1], cutb, anc, nxt))

    def true(args, cutb, anc, nxt, cps):
        return nxt

    def fail(args, cutb, anc, nxt, cps):
        return None

    def cut(args, cutb, anc, nxt, cps):
        del cps[cutb:]
        return nxt

    arrow_key = (sym("->"), 2)
    soft_key = (sym("*->"), 2)

    def disj(args, cutb, anc, nxt, cps):
        lhs = deref(args[0])
        else_cont = (GOAL, args[1], cutb, anc, nxt)
        if tags[lhs] == STRUCT:
            fid, cargs = vals[lhs]
            key = (fid, len(cargs))
            if key == arrow_key:
                h = len(cps)
                cps.append(AltCP(mark(), else_cont))
                then = (GOAL, cargs[1], cutb, anc, nxt)
                return (GOAL, cargs[0], h + 1, anc, (CUTTO, h, 0, anc, then))
            if key == soft_key:
                h = len(cps)
                scp = SoftCP(mark(), else_cont)
                cps.append(scp)
                then = (GOAL, cargs[1], cutb, anc, nxt)
                return (GOAL, cargs[0], h + 1, anc, (SOFT, scp, 0, anc, then))
        cps.append(AltCP(mark(), else_cont))
        return (GOAL, lhs, cutb, anc, nxt)

    def ite(args, cutb, anc, nxt, cps):
        # if-then-else prepared by the clause compiler: branches are ready
        # continuations, the condition is a tuple of (procedure, args) calls
        conds, then, els, soft = args
        h = len(cps)
        if soft and len(conds) == 1 and conds[0][0] is member:
            # the co-SLD hypothesis check: run the test here rather than
            # through the machine; on failure nothing is left to undo
            if member(conds[0][1], h, anc, then, cps) is None:
                return els
            return then
        if soft:
            scp = SoftCP(mark(), els)
            cps.append(scp)
            cont = (SOFT, scp, 0, anc, then)
        else:
            cps.append(AltCP(mark(), els))
            cont = (CUTTO, h, 0, anc, then)
        for proc, a in reversed(conds):
            cont = (proc, a, h + 1, anc, cont)
        return cont

    engine.ite = ite

    def if_then(args, cutb, anc, nxt, cps):
        h = len(cps)
        then = (GOAL, args[1], cutb, anc, nxt)
        return (GOAL, args[0], h, anc, (CUTTO, h, 0, anc, then))

    def soft_then(args, cutb, anc, nxt, cps):
        return (GOAL, args[0], len(cps), anc, (GOAL, args[1], cutb, anc, nxt))

    def naf(args, cutb, anc, nxt, cps):
        g = deref(args[0])
        key = None
        if tags[g] == STRUCT:
            key = (vals[g][0], len(vals[g][1]))
        elif tags[g] == ATOM:
            key = (vals[g], 0)
        pred = engine.predicates.get(key) if key else None
        if pred is not None and pred.tabled:
            raise PermissionError_(f"negation of tabled predicate {pred.name}/{pred.arity}")
        h = len(cps)
        cps.append(AltCP(mark(), nxt))
        return (GOAL, g, h + 1, anc, (CUTTO, h, 0, anc, FAIL_NODE))

    def call(args, cutb, anc, nxt, cps):
        return (GOAL, args[0], len(cps), anc, nxt)

    # -- term comparison -------------------------------------------------------

    def eq(a, b):
        return unify(store, trail, a, b)

    def neq(a, b):
        m = mark()
        ok = unify(store, trail, a, b)
        if ok:
            undo_to(store, trail, m)
        return not ok

    def univ_(args, cutb, anc, nxt, cps):
        t, lst = args
        t = deref(t)
        if tags[t] != VAR:
            parts = univ(store, t)
            return nxt if unify(store, trail, store.list_cells(parts), lst) else None
        items = []
        c = deref(lst)
        seen = set()
        while tags[c] == PAIR:
            if c in seen:
                raise PrologTypeError("=.. needs a proper list")
            seen.add(c)
            items.append(vals[c][0])
            c = deref(vals[c][1])
        if tags[c] == VAR:
            raise InstantiationError("=.. needs a proper list")
        if not (tags[c] == ATOM and store.names[vals[c]] == "[]"):
            raise PrologTypeError("=.. needs a proper list")
        return nxt if unify(store, trail, t, univ_inverse(store, items)) else None

    def member(args, cutb, anc, nxt, cps):
        # the membership test used by the co-SLD hypothesis check; a choice
        # point is left only if a later element might match as well
        x = args[0]
        functor, atomic = _member_key(store, x)
        c = _next_candidate(tags, vals, args[1], functor, atomic)
        while c is not None:
            m = mark()
            head, tail = vals[c]
            c = _next_candidate(tags, vals, tail, functor, atomic)
            if unify(store, trail, x, head):
                if c is not None:
                    cps.append(MemberCP(m, x, c, nxt, functor, atomic))
                return nxt
        return None

    def canonical(args, cutb, anc, nxt, cps):
        c = canonical_term(store, trail, args[0])
        return nxt if unify(store, trail, c, args[1]) else None

    # -- arithmetic ------------------------------------------------------------

    ops2 = {
        sym("+"): operator.add,
        sym("-"): operator.sub,
        sym("*"): operator.mul,
        sym("//"): _intdiv,
        sym("mod"): _mod,
        sym("min"): min,
        sym("max"): max,
    }
    ops1 = {sym("-"): operator.neg, sym("+"): operator.pos, sym("abs"): abs}

    def evaluate(c, depth=0):
        c = deref(c)
        tag = tags[c]
        if tag == INT:
            return vals[c]
        if tag == VAR:
            raise InstantiationError("arithmetic on an unbound variable")
        if depth > 10000:
            raise PrologTypeError("arithmetic expression too deep or cyclic", c)
        if tag == STRUCT:
            sid, args = vals[c]
            if len(args) == 2:
                op = ops2.get(sid)
                if op is not None:
                    x, y = args
                    while tags[x] == VAR and vals[x] is not None:
                        x = vals[x]
                    while tags[y] == VAR and vals[y] is not None:
                        y = vals[y]
                    x = vals[x] if tags[x] == INT else evaluate(x, depth + 1)
                    y = vals[y] if tags[y] == INT else evaluate(y, depth + 1)
                    return op(x, y)
            elif len(args) == 1:
                op = ops1.get(sid)
                if op is not None:
                    return op(evaluate(args[0], depth + 1))
        raise PrologTypeError("not an integer expression", c)

    def value(c):
        while tags[c] == VAR and vals[c] is not None:
            c = vals[c]
        return vals[c] if tags[c] == INT else evaluate(c)

    def is_test(a, b):
        n = value(b)
        while tags[a] == VAR:
            nxt = vals[a]
            if nxt is None:
                vals[a] = store.int(n)
                trail.entries.append(a)
                return True
            a = nxt
        if tags[a] == INT:
            return vals[a] == n
        return False

    # compiled clauses evaluate simple sums inline and fall back on this
    is_test.value = value

    def is_(args, cutb, anc, nxt, cps):
        r = store.int(value(args[1]))
        return nxt if unify(store, trail, args[0], r) else None

    def cmp(op):
        def handler(args, cutb, anc, nxt, cps):
            return nxt if op(value(args[0]), value(args[1])) else None

        return handler

    def type_check(*wanted):
        return lambda a: tags[deref(a)] in wanted

    def write(a):
        sys.stdout.write(format_term(store, a))
        return True

    def nl():
        sys.stdout.write("\n")
        return True

    entries = {
        (",", 2): conj,
        ("true", 0): true,
        ("otherwise", 0): true,
        ("fail", 0): fail,
        ("false", 0): fail,
        ("!", 0): cut,
        (";", 2): disj,
        ("->", 2): if_then,
        ("*->", 2): soft_then,
        ("\\+", 1): naf,
        ("call", 1): call,
        ("=..", 2): univ_,
        ("canonical_term", 2): canonical,
        (MEMBER, 2): member,
        ("is", 2): is_,
    }
    compare = {
        "<": operator.lt,
        ">": operator.gt,
        "=<": operator.le,
        ">=": operator.ge,
        "=:=": operator.eq,
        "=\\=": operator.ne,
    }
    entries.update({(name, 2): cmp(op) for name, op in compare.items()})
    dets = {
        ("=", 2): eq,
        ("\\=", 2): neq,
        ("==", 2): lambda a, b: struct_equal(store, a, b),
        ("\\==", 2): lambda a, b: not struct_equal(store, a, b),
        ("acyclic_term", 1): lambda a: is_acyclic(store, a),
        ("cyclic_term", 1): lambda a: not is_acyclic(store, a),
        ("var", 1): type_check(VAR),
        ("nonvar", 1): type_check(ATOM, INT, PAIR, STRUCT),
        ("integer", 1): type_check(INT),
        ("atom", 1): type_check(ATOM),
        ("write", 1): write,
        ("nl", 0): nl,
    }
    out = {(sym(n), a): h for (n, a), h in entries.items()}
    out.update({(sym(n), a): det(fn, a) for (n, a), fn in dets.items()})
    # deterministic tests a compiled clause may run right after head unification
    tests = dict(dets)
    tests[("is", 2)] = is_test
    for name, op in compare.items():
        tests[(name, 2)] = lambda a, b, op=op: op(value(a), value(b))
    del tests[("write", 1)], tests[("nl", 0)]
    engine.inline_tests = {(sym(n), a): fn for (n, a), fn in tests.items()}
    return out


def _member_key(store, x):
    """Principal functor and atomic arguments of ``x``, used to reject list
    elements that cannot unify with it without trying."""
    tags, vals = store.tags, store.vals
    x = store.deref(x)
    if tags[x] != STRUCT:
        return None, ()
    sid, xs = vals[x]
    atomic = []
    for i, a in enumerate(xs):
        a = store.deref(a)
        if tags[a] == ATOM or tags[a] == INT:
            atomic.append((i, tags[a], vals[a]))
    return (sid, len(xs)), tuple(atomic)


def _next_candidate(tags, vals, c, functor, atomic):
    """First list cell from ``c`` on whose element passes the quick reject,
    or None at the end of the list."""
    while True:
        while tags[c] == VAR and vals[c] is not None:
            c = vals[c]
        if tags[c] != PAIR:
            return None
        if functor is None:
            return c
        head = vals[c][0]
        while tags[head] == VAR and vals[head] is not None:
            head = vals[head]
        if tags[head] == STRUCT:
            sid, ys = vals[head]
            if sid == functor[0] and len(ys) == functor[1]:
                for i, tag, val in atomic:
                    y = ys[i]
                    while tags[y] == VAR and vals[y] is not None:
                        y = vals[y]
                    if tags[y] != VAR and (tags[y] != tag or vals[y] != val):
                        break
                else:
                    return c
        elif tags[head] == VAR:
            return c
        c = vals[c][1]


class MemberCP:
    """Walks a list, succeeding once for each element that unifies with ``x``.
    ``rest`` is the next candidate list cell."""

    __slots__ = ("mark", "x", "rest", "nxt", "functor", "atomic")

    def __init__(self, mark, x, rest, nxt, functor, atomic):
        self.mark = mark
        self.x = x
        self.rest = rest
        self.nxt = nxt
        self.functor = functor
        self.atomic = atomic

    def resume(self, m, cps):
        store, trail = m.store, m.trail
        tags, vals = store.tags, store.vals
        c = self.rest
        while c is not None:
            head, tail = vals[c]
            c = _next_candidate(tags, vals, tail, self.functor, self.atomic)
            # a failed unify undoes its own bindings
            if unify(store, trail, self.x, head):
                if c is None:
                    cps.pop()
                else:
                    self.rest = c
                return self.nxt
        cps.pop()
        return None


def _intdiv(x, y):
    if y == 0:
        raise EvaluationError("zero_divisor")
    q = abs(x) // abs(y)
    return q if (x >= 0) == (y >= 0) else -q


def _mod(x, y):
    if y == 0:
        raise EvaluationError("zero_divisor")
    return x % y
