"""Arena storage for possibly-cyclic terms, plus the trail used for backtracking.

Every term lives in a single :class:`CellStore` and is referred to by its
integer index.  A cycle is simply a variable cell bound to a pair or compound
cell that encloses it, so ``L = [1|L]`` is two cells: a pair whose tail is a
variable bound back to the pair.
"""

from __future__ import annotations

VAR = 0
ATOM = 1
INT = 2
PAIR = 3
STRUCT = 4

TAG_NAMES = {VAR: "var", ATOM: "atom", INT: "int", PAIR: "pair", STRUCT: "struct"}

NIL = "[]"
DOT = "."


class CellStore:
    """Append-only cell arena with an atom intern table.

    ``tags[i]`` holds the cell kind and ``vals[i]`` its payload:

    * VAR: index of the binding, or ``None`` when unbound
    * ATOM: interned symbol id
    * INT: the Python int
    * PAIR: ``[head, tail]``
    * STRUCT: ``(symbol id, [arg, ...])``
    """

    __slots__ = ("tags", "vals", "symbols", "names")

    def __init__(self):
        self.tags: list[int] = []
        self.vals: list = []
        self.symbols: dict[str, int] = {}
        self.names: list[str] = []

    def __len__(self):
        return len(self.tags)

    def symbol(self, name: str) -> int:
        sid = self.symbols.get(name)
        if sid is None:
            sid = len(self.names)
            self.symbols[name] = sid
            self.names.append(name)
        return sid

    def new_var(self) -> int:
        self.tags.append(VAR)
        self.vals.append(None)
        return len(self.tags) - 1

    def atom(self, name: str) -> int:
        self.tags.append(ATOM)
        self.vals.append(self.symbol(name))
        return len(self.tags) - 1

    def atom_id(self, sid: int) -> int:
        self.tags.append(ATOM)
        self.vals.append(sid)
        return len(self.tags) - 1

    def int(self, value: int) -> int:
        self.tags.append(INT)
        self.vals.append(value)
        return len(self.tags) - 1

    def pair(self, head: int, tail: int) -> int:
        self.tags.append(PAIR)
        self.vals.append([head, tail])
        return len(self.tags) - 1

    def struct(self, name, args) -> int:
        sid = name if isinstance(name, int) else self.symbol(name)
        if not args:
            return self.atom_id(sid)
        self.tags.append(STRUCT)
        self.vals.append((sid, list(args)))
        return len(self.tags) - 1

    def deref(self, r: int) -> int:
        tags, vals = self.tags, self.vals
        while tags[r] == VAR:
            nxt = vals[r]
            if nxt is None:
                return r
            r = nxt
        return r

    def args(self, r: int) -> list[int]:
        """Argument cells of a pair or compound (``r`` must be dereferenced)."""
        tag = self.tags[r]
        if tag == PAIR:
            return self.vals[r]
        if tag == STRUCT:
            return self.vals[r][1]
        return []

    def functor(self, r: int) -> tuple[str, int]:
        tag = self.tags[r]
        if tag == PAIR:
            return DOT, 2
        if tag == STRUCT:
            sid, args = self.vals[r]
            return self.names[sid], len(args)
        if tag == ATOM:
            return self.names[self.vals[r]], 0
        raise ValueError(f"cell {r} has no functor")

    def is_var(self, r: int) -> bool:
        return self.tags[self.deref(r)] == VAR

    def list_cells(self, items, tail=None) -> int:
        """Build a proper (or partial, if ``tail`` is given) list from cells."""
        out = self.atom(NIL) if tail is None else tail
        for item in reversed(list(items)):
            out = self.pair(item, out)
        return out

    def reachable(self, r: int) -> set[int]:
        """Dereferenced cells reachable from ``r``."""
        seen = set()
        todo = [r]
        while todo:
            c = self.deref(todo.pop())
            if c in seen:
                continue
            seen.add(c)
            todo.extend(self.args(c))
        return seen


class Trail:
    """Bound variables in binding order.  A mark is ``(trail length, cell count)``."""

    __slots__ = ("entries",)

    def __init__(self):
        self.entries: list[int] = []

    def mark(self, store: CellStore) -> tuple[int, int]:
        return len(self.entries), len(store.tags)


def new_var(store: CellStore) -> int:
    return store.new_var()


def deref(store: CellStore, r: int) -> int:
    return store.deref(r)


def bind(store: CellStore, trail: Trail, v: int, t: int) -> None:
    if store.tags[v] != VAR or store.vals[v] is not None:
        raise ValueError(f"cell {v} is not an unbound variable")
    if v == t:
        raise ValueError("a variable cannot be bound to itself")
    store.vals[v] = t
    trail.entries.append(v)


def undo_to(store: CellStore, trail: Trail, mark: tuple[int, int]) -> None:
    """Unbind everything bound after ``mark`` and drop cells allocated since."""
    tpos, cpos = mark
    entries = trail.entries
    tags = store.tags
    if tpos > len(entries) or cpos > len(tags):
        raise ValueError("stale trail mark")
    if len(entries) > tpos:
        vals = store.vals
        # variables newer than the mark are reset too; they are dropped below
        for v in entries[tpos:]:
            vals[v] = None
        del entries[tpos:]
    if len(tags) > cpos:
        del tags[cpos:]
        del store.vals[cpos:]


def build(store: CellStore, literal: str, *, allow_free: bool = False) -> int:
    """Build a term from text such as ``"f(a,b)"`` or ``"L=[1,2,3|L]"``.

    ``Name = Term`` equations introduce cycle labels: occurrences of ``Name``
    become a variable cell bound to the labelled term.  The root of the first
    equation (or the bare term) is returned.  Variables that are not labels are
    rejected unless they start with ``_`` or ``allow_free`` is set.
    """
    roots = build_bindings(store, literal, allow_free=allow_free)
    return roots["$root"]


def build_bindings(store: CellStore, literal: str, *, allow_free: bool = False) -> dict:
    """Like :func:`build` but returns every label's cell, keyed by name.

    The returned dict also carries the entry ``"$root"``.
    """
    from .errors import BuildError
    from .reader import parse_term_sequence, Var as AstVar, Struct as AstStruct

    items = parse_term_sequence(literal)
    equations = []
    bare = []
    for item in items:
        if (
            isinstance(item, AstStruct)
            and item.name == "="
            and len(item.args) == 2
            and isinstance(item.args[0], AstVar)
            and not item.args[0].name.startswith("_")
        ):
            equations.append((item.args[0].name, item.args[1]))
        else:
            bare.append(item)
    if len(bare) > 1:
        raise BuildError("at most one unlabelled term may appear in a literal")

    labels = {}
    for name, _ in equations:
        if name in labels:
            raise BuildError(f"cycle label {name} defined twice")
        labels[name] = store.new_var()

    varmap = dict(labels)

    def mk(node):
        return materialize(store, node, varmap)

    trail = Trail()
    for name, rhs in equations:
        if isinstance(rhs, AstVar) and rhs.name in labels:
            raise BuildError(f"label {name} is bound to a bare label")
        bind(store, trail, labels[name], mk(rhs))
    root = mk(bare[0]) if bare else store.deref(labels[equations[0][0]])

    for name in varmap:
        if name not in labels and not name.startswith("_") and not allow_free:
            raise BuildError(f"undefined cycle label {name}")
    out = {name: store.deref(cell) for name, cell in varmap.items()}
    out["$root"] = root
    return out


def materialize(store: CellStore, node, varmap: dict) -> int:
    """Allocate cells for a reader AST node, sharing variables through ``varmap``."""
    from .reader import Var as AstVar, Atom as AstAtom, Int as AstInt, Struct as AstStruct

    if isinstance(node, AstVar):
        if node.name == "_":
            return store.new_var()
        cell = varmap.get(node.name)
        if cell is None:
            cell = varmap[node.name] = store.new_var()
        return cell
    if isinstance(node, AstInt):
        return store.int(node.value)
    if isinstance(node, AstAtom):
        return store.atom(node.name)
    if isinstance(node, AstStruct):
        if node.name == DOT and len(node.args) == 2:
            # iterate down list spines to keep recursion shallow
            heads = []
            while isinstance(node, AstStruct) and node.name == DOT and len(node.args) == 2:
                heads.append(materialize(store, node.args[0], varmap))
                node = node.args[1]
            out = materialize(store, node, varmap)
            for h in reversed(heads):
                out = store.pair(h, out)
            return out
        return store.struct(node.name, [materialize(store, a, varmap) for a in node.args])
    raise TypeError(f"not a term node: {node!r}")
