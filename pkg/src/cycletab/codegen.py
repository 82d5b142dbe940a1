"""Compile clause templates into Python functions.

A compiled clause is called as ``fn(args, height, anc, nxt)``.  It unifies the
head with the argument cells (binding and trailing as it goes) and returns the
continuation that runs the body, or ``False`` when the head does not match.
Body goals whose predicate is known are continuation nodes of the form
``(procedure, argument tuple, ...)``; others are ``(GOAL, goal cell, ...)``.
Bindings made before a mismatch are left for the caller to undo.

Templates are tuples: ``(0, i)`` variable ``i``, ``(1, cell)`` a prebuilt
ground cell, ``(3, head, tail)`` a list pair and ``(4, sid, args)`` a compound.
"""

from __future__ import annotations

from .rational import unify
from .terms import ATOM, INT, PAIR, STRUCT, VAR

T_VAR = 0
T_CONST = 1
T_PAIR = 3
T_STRUCT = 4

GOAL = 0


class _Emitter:
    def __init__(self, store):
        self.store = store
        self.lines: list[str] = []
        self.seen: set[int] = set()
        self.alias: dict[int, str] = {}
        self.tmp = 0
        self.begin()

    def fresh(self, prefix="x"):
        self.tmp += 1
        return f"{prefix}{self.tmp}"

    def emit(self, depth, line):
        self.lines.append("    " * depth + line)

    # -- write mode: build the template as new cells ----------------------------
    #
    # New cells are collected in a batch and allocated together by flush():
    # inside a batch a cell is named by its offset from the batch's base index.

    def begin(self):
        self.tmp += 1
        self.base = f"b{self.tmp}"
        self.batch: list[tuple[int, str]] = []
        self.batch_vars: list[int] = []

    def build(self, t) -> str:
        """Queue the cells of ``t``; return the expression naming its cell."""
        kind = t[0]
        if kind == T_CONST:
            return str(t[1])
        if kind == T_VAR:
            if t[1] not in self.seen:
                self.seen.add(t[1])
                self.alias[t[1]] = self._cell(VAR, "None")
                self.batch_vars.append(t[1])
            return self.alias.get(t[1]) or f"v{t[1]}"
        if kind == T_PAIR:
            h = self.build(t[1])
            tl = self.build(t[2])
            return self._cell(PAIR, f"[{h}, {tl}]")
        parts = [self.build(a) for a in t[2]]
        return self._cell(STRUCT, f"({t[1]}, [{', '.join(parts)}])")

    def _cell(self, tag, val):
        k = len(self.batch)
        self.batch.append((tag, val))
        return f"{self.base}+{k}" if k else self.base

    def flush(self, depth):
        if self.batch:
            tags = ", ".join(str(t) for t, _ in self.batch)
            vals = ", ".join(v for _, v in self.batch)
            self.emit(depth, f"{self.base} = len(tags)")
            self.emit(depth, f"tags_extend(({tags},))")
            self.emit(depth, f"vals_extend(({vals},))")
        for i in self.batch_vars:
            self.emit(depth, f"v{i} = {self.alias.pop(i)}")
        self.batch = []
        self.batch_vars = []

    # -- read mode: match the template against an existing cell -----------------

    def match(self, t, cell, depth):
        kind = t[0]
        if kind == T_VAR:
            name = f"v{t[1]}"
            if t[1] not in self.seen:
                self.seen.add(t[1])
                self.emit(depth, f"{name} = {cell}")
            else:
                x, y = self.fresh(), self.fresh()
                self.emit(depth, f"{x} = {name}")
                self.emit(depth, f"while tags[{x}] == 0 and vals[{x}] is not None: {x} = vals[{x}]")
                self.emit(depth, f"{y} = {cell}")
                self.emit(depth, f"while tags[{y}] == 0 and vals[{y}] is not None: {y} = vals[{y}]")
                self.emit(depth, f"if {x} != {y}:")
                self.emit(depth + 1, f"tx = tags[{x}]; ty = tags[{y}]")
                self.emit(depth + 1, f"if tx == 0 and (ty != 0 or {x} > {y}): vals[{x}] = {y}; trail_append({x})")
                self.emit(depth + 1, f"elif ty == 0: vals[{y}] = {x}; trail_append({y})")
                self.emit(depth + 1, "elif tx != ty: return False")
                self.emit(depth + 1, "elif tx < 3:")
                self.emit(depth + 2, f"if vals[{x}] != vals[{y}]: return False")
                self.emit(depth + 1, f"elif not unify(store, trail, {x}, {y}): return False")
            return
        store = self.store
        x = self.fresh()
        self.emit(depth, f"{x} = {cell}")
        self.emit(depth, f"while tags[{x}] == 0 and vals[{x}] is not None: {x} = vals[{x}]")
        if kind == T_CONST:
            c = t[1]
            ct = store.tags[c]
            if ct in (ATOM, INT):
                self.emit(depth, f"tx = tags[{x}]")
                self.emit(depth, f"if tx == 0: vals[{x}] = {c}; trail_append({x})")
                self.emit(depth, f"elif tx != {ct} or vals[{x}] != {store.vals[c]!r}: return False")
            else:
                self.emit(depth, f"if not unify(store, trail, {c}, {x}): return False")
            return
        want = PAIR if kind == T_PAIR else STRUCT
        self.emit(depth, f"tx = tags[{x}]")
        self.emit(depth, "if tx == 0:")
        before = set(self.seen)
        self.begin()
        built = self.build(t)
        self.flush(depth + 1)
        self.emit(depth + 1, f"vals[{x}] = {built}; trail_append({x})")
        after_write = self.seen
        self.seen = before
        self.emit(depth, f"elif tx == {want}:")
        if kind == T_PAIR:
            h, tl = self.fresh(), self.fresh()
            self.emit(depth + 1, f"{h}, {tl} = vals[{x}]")
            self.match(t[1], h, depth + 1)
            self.match(t[2], tl, depth + 1)
        else:
            args = self.fresh("a")
            self.emit(depth + 1, f"sid, {args} = vals[{x}]")
            self.emit(depth + 1, f"if sid != {t[1]} or len({args}) != {len(t[2])}: return False")
            for i, sub in enumerate(t[2]):
                self.match(sub, f"{args}[{i}]", depth + 1)
        self.emit(depth, "else: return False")
        assert self.seen == after_write
        self.seen = after_write


def compile_clause(store, head, body, resolve=None, inline=None, ite=None):
    """Return ``(source, namespace)`` for one clause (see the module docstring).

    ``resolve(sid, arity)`` maps a body goal's functor to the procedure that
    runs it; such goals are emitted as direct calls with their argument tuple
    instead of as goal cells.  ``inline`` maps functors of deterministic tests
    to plain functions; tests at the start of the body run inside the clause
    function itself.
    """
    em = _Emitter(store)
    env = {
        "tags": store.tags,
        "vals": store.vals,
        "tags_extend": store.tags.extend,
        "vals_extend": store.vals.extend,
        "unify": unify,
        "store": store,
        "ite": ite,
    }
    arity = len(head)
    em.emit(0, "def _clause(args, height, anc, nxt):")
    if arity == 1:
        em.emit(1, "arg0, = args")
    elif arity:
        em.emit(1, f"{', '.join(f'arg{i}' for i in range(arity))} = args")
    for i, t in enumerate(head):
        em.match(t, f"arg{i}", 1)
    rest = list(body)
    counter = [0]
    while rest:
        g = rest[0]
        key = _key(store, g)
        if key is None:
            break
        test = inline.get(key) if inline else None
        if test is not None and (_inline_sum(store, em, env, g, test)
                                 or _inline_compare(store, em, env, g, test)
                                 or _inline_identity(store, em, env, g, test)):
            rest.pop(0)
            continue
        if test is not None:
            name = f"t{len(env)}"
            env[name] = test
            em.begin()
            parts = [em.build(a) for a in _args(store, g)]
            em.flush(1)
            em.emit(1, f"if not {name}({', '.join(parts)}): return False")
            rest.pop(0)
            continue
        proc = resolve(*key) if resolve else None
        if getattr(proc, "inline_fn", False) is False:
            break
        # a call to a predicate that is currently one plain fact is unified
        # in place; otherwise the rest of the body runs as usual
        name = f"p{len(env)}"
        env[name] = proc
        em.begin()
        parts = [em.build(a) for a in _args(store, g)]
        em.flush(1)
        args = f"({', '.join(parts)},)" if parts else "()"
        em.emit(1, f"f = {name}.inline_fn")
        em.emit(1, "if f is None:")
        seen = set(em.seen)
        em.begin()
        specs = [("call", name, args)] + _Body(store, em, env, resolve).nodes(rest[1:])
        em.flush(2)
        em.emit(2, f"return {_emit_chain(em, specs, 'nxt', counter, 2)}")
        em.seen = seen
        em.emit(1, f"if f({args}, 0, anc, True) is False: return False")
        rest.pop(0)
    em.begin()
    specs = _Body(store, em, env, resolve).nodes(rest)
    em.flush(1)
    em.emit(1, f"return {_emit_chain(em, specs, 'nxt', counter, 1)}")
    return "\n".join(em.lines), env


_SUMS = {"+": "+", "-": "-", "*": "*"}
_COMPARE = {"<": "<", ">": ">", "=<": "<=", ">=": ">=", "=:=": "==", "=\\=": "!="}


def _int_operands(store, em, terms):
    """Deref code for integer operands; None unless each is a bound variable or an integer."""
    operands = []
    for t in terms:
        if t[0] == T_VAR and t[1] in em.seen:
            operands.append(t)
        elif not (t[0] == T_CONST and store.tags[t[1]] == INT):
            return None
    out = []
    for t in terms:
        if t[0] == T_VAR:
            x = em.fresh()
            em.emit(1, f"{x} = v{t[1]}")
            em.emit(1, f"while tags[{x}] == 0 and vals[{x}] is not None: {x} = vals[{x}]")
            out.append((x, f"vals[{x}]"))
        else:
            out.append((None, repr(store.vals[t[1]])))
    return out


def _inline_compare(store, em, env, g, test) -> bool:
    """Emit ``A op B`` on bound integers as a Python comparison, falling
    back on ``test`` for anything else."""
    if g[0] != T_STRUCT or len(g[2]) != 2 or store.names[g[1]] not in _COMPARE:
        return False
    operands = _int_operands(store, em, g[2])
    if operands is None:
        return False
    name = f"t{len(env)}"
    env[name] = test
    checks = [f"tags[{x}] == {INT}" for x, _ in operands if x is not None]
    expr = f"{operands[0][1]} {_COMPARE[store.names[g[1]]]} {operands[1][1]}"
    args = ", ".join(f"v{t[1]}" if t[0] == T_VAR else str(t[1]) for t in g[2])
    if checks:
        em.emit(1, f"if {' and '.join(checks)}:")
        em.emit(2, f"if not ({expr}): return False")
        em.emit(1, f"elif not {name}({args}): return False")
    else:
        em.emit(1, f"if not ({expr}): return False")
    return True


def _inline_identity(store, em, env, g, test) -> bool:
    """Emit ``A == B`` / ``A \\== B`` directly when both sides turn out to be
    atomic or unbound; compound operands go through ``test``."""
    if g[0] != T_STRUCT or len(g[2]) != 2 or store.names[g[1]] not in ("==", "\\=="):
        return False
    cells = []
    for t in g[2]:
        if t[0] == T_VAR and t[1] in em.seen:
            x = em.fresh()
            em.emit(1, f"{x} = v{t[1]}")
            em.emit(1, f"while tags[{x}] == 0 and vals[{x}] is not None: {x} = vals[{x}]")
            cells.append(x)
        elif t[0] == T_CONST and store.tags[t[1]] in (ATOM, INT):
            cells.append(str(t[1]))
        else:
            return False
    name = f"t{len(env)}"
    env[name] = test
    x, y = cells
    same = f"{x} == {y} or (tags[{x}] == tags[{y}] != 0 and vals[{x}] == vals[{y}])"
    args = ", ".join(f"v{t[1]}" if t[0] == T_VAR else str(t[1]) for t in g[2])
    em.emit(1, f"if tags[{x}] < 3 and tags[{y}] < 3:")
    if store.names[g[1]] == "==":
        em.emit(2, f"if not ({same}): return False")
    else:
        em.emit(2, f"if {same}: return False")
    em.emit(1, f"elif not {name}({args}): return False")
    return True


def _inline_sum(store, em, env, g, test) -> bool:
    """Emit ``X is A op B`` (op one of + - *, A and B bound variables or
    integers) as integer arithmetic; other operands go through the general
    evaluator.  Returns False when the goal does not have that shape."""
    if g[0] != T_STRUCT or store.names[g[1]] != "is" or len(g[2]) != 2:
        return False
    lhs, rhs = g[2]
    if rhs[0] != T_STRUCT or len(rhs[2]) != 2 or store.names[rhs[1]] not in _SUMS:
        return False
    operands = _int_operands(store, em, rhs[2])
    if operands is None:
        return False
    if "value" not in env:
        env["value"] = test.value
    checks = [f"tags[{x}] == {INT}" for x, _ in operands if x is not None]
    op = _SUMS[store.names[rhs[1]]]
    n = em.fresh("n")
    expr = f"{operands[0][1]} {op} {operands[1][1]}"
    if checks:
        em.emit(1, f"if {' and '.join(checks)}: {n} = {expr}")
        em.emit(1, "else:")
        em.begin()
        cell = em.build(rhs)
        em.flush(2)
        em.emit(2, f"{n} = value({cell})")
    else:
        em.emit(1, f"{n} = {expr}")
    if lhs[0] == T_VAR and lhs[1] not in em.seen:
        em.seen.add(lhs[1])
        em.emit(1, f"v{lhs[1]} = len(tags); tags_extend(({INT},)); vals_extend(({n},))")
    elif lhs[0] == T_VAR:
        y = em.fresh()
        em.emit(1, f"{y} = v{lhs[1]}")
        em.emit(1, f"while tags[{y}] == 0 and vals[{y}] is not None: {y} = vals[{y}]")
        em.emit(1, f"if tags[{y}] == 0:")
        em.emit(2, f"vals[{y}] = len(tags); tags_extend(({INT},)); vals_extend(({n},)); trail_append({y})")
        em.emit(1, f"elif tags[{y}] != {INT} or vals[{y}] != {n}: return False")
    elif lhs[0] == T_CONST and store.tags[lhs[1]] == INT:
        em.emit(1, f"if {n} != {store.vals[lhs[1]]!r}: return False")
    else:
        em.emit(1, "return False")
    return True


class _Body:
    """Turns body goal templates into node specs.

    A spec is ``("call", kind, data)`` or ``("ite", conditions, then, else,
    soft)``; conditions are ``(kind, data)`` pairs and the branches are spec
    lists.  If-then-else is compiled only when its condition is a plain
    conjunction without cuts or control constructs, since the condition's
    cut barrier is only known when it runs.
    """

    def __init__(self, store, em, env, resolve):
        self.store, self.em, self.env, self.resolve = store, em, env, resolve
        sym = store.symbol
        self.conj, self.disj = sym(","), sym(";")
        self.arrow, self.soft = sym("->"), sym("*->")
        self.control = {sym(n) for n in (",", ";", "->", "*->", "!", "\\+", "call")}
        self.true = sym("true")

    def flatten(self, t):
        if t[0] == T_STRUCT and t[1] == self.conj and len(t[2]) == 2:
            return self.flatten(t[2][0]) + self.flatten(t[2][1])
        if t[0] == T_CONST and self.store.tags[t[1]] == ATOM and self.store.vals[t[1]] == self.true:
            return []
        return [t]

    def plain(self, t):
        key = _key(self.store, t)
        return key is not None and key[0] not in self.control

    def nodes(self, goals):
        out = []
        for g in goals:
            ite = self.ite(g)
            out.append(ite if ite is not None else ("call",) + self.call(g))
        return out

    def ite(self, g):
        if self.resolve is None or g[0] != T_STRUCT or g[1] != self.disj or len(g[2]) != 2:
            return None
        lhs, rhs = g[2]
        if lhs[0] != T_STRUCT or lhs[1] not in (self.arrow, self.soft) or len(lhs[2]) != 2:
            return None
        cond = self.flatten(lhs[2][0])
        if not all(self.plain(c) for c in cond):
            return None
        conds = [self.call(c) for c in cond]
        then = self.nodes(self.flatten(lhs[2][1]))
        els = self.nodes(self.flatten(rhs))
        return ("ite", conds, then, els, lhs[1] == self.soft)

    def call(self, g):
        em, env = self.em, self.env
        proc_args = _direct(self.store, g, self.resolve)
        if proc_args is None:
            return str(GOAL), em.build(g)
        proc, args = proc_args
        name = f"p{len(env)}"
        env[name] = proc
        parts = [em.build(a) for a in args]
        return name, f"({', '.join(parts)},)" if parts else "()"


def _emit_chain(em, specs, tail, counter, depth) -> str:
    """Return an expression for the continuation running ``specs`` and then
    ``tail``.  A tail shared by both branches of an if-then-else is first
    stored in a local."""
    for spec in reversed(specs):
        if spec[0] == "call":
            tail = f"({spec[1]}, {spec[2]}, height, anc, {tail})"
            continue
        _, conds, then, els, soft = spec
        if not tail.isidentifier():
            counter[0] += 1
            em.emit(depth, f"k{counter[0]} = {tail}")
            tail = f"k{counter[0]}"
        t = _emit_chain(em, then, tail, counter, depth)
        e = _emit_chain(em, els, tail, counter, depth)
        cs = "".join(f"({kind}, {data}), " for kind, data in conds)
        tail = f"(ite, (({cs}), {t}, {e}, {soft}), height, anc, {tail})"
    return tail


def _key(store, g):
    if g[0] == T_STRUCT:
        return g[1], len(g[2])
    if g[0] == T_CONST:
        c = g[1]
        if store.tags[c] == ATOM:
            return store.vals[c], 0
        if store.tags[c] == STRUCT:
            return store.vals[c][0], len(store.vals[c][1])
    return None


def _args(store, g):
    if g[0] == T_STRUCT:
        return g[2]
    if store.tags[g[1]] == STRUCT:
        return tuple((T_CONST, a) for a in store.vals[g[1]][1])
    return ()


def _direct(store, g, resolve):
    """``(procedure, argument templates)`` for a goal with a known functor."""
    if resolve is None:
        return None
    if g[0] == T_STRUCT:
        return resolve(g[1], len(g[2])), g[2]
    if g[0] == T_CONST:
        c = g[1]
        tag = store.tags[c]
        if tag == ATOM:
            return resolve(store.vals[c], 0), ()
        if tag == STRUCT:
            sid, args = store.vals[c]
            return resolve(sid, len(args)), tuple((T_CONST, a) for a in args)
    return None


def make_clause_fn(store, trail, head, body, resolve=None, inline=None, ite=None):
    src, env = compile_clause(store, head, body, resolve, inline, ite)
    env["trail"] = trail
    env["trail_append"] = trail.entries.append
    exec(compile(src, "<clause>", "exec"), env)
    fn = env["_clause"]
    fn.source = src
    return fn
