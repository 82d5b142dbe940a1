"""Resolution engine with tabling over rational terms.

The machine is iterative: a continuation is a linked tuple
``(kind, data, cut_barrier, ancestors, next)`` and backtracking pops choice
points from an explicit list, so deep (even unbounded) derivations never touch
the Python stack.

Tabled predicates come in two flavours.  Inductive tables compute least fixed
points; a repeated call consumes stored answers.  Coinductive tables compute
greatest fixed points: a repeated call to a subgoal that is still an ancestor
in the current derivation unifies its substitution factor with the
ancestor's and succeeds.

Scheduling is fixpoint-by-restart.  A tabled call made outside any tabled
derivation evaluates its subgoal in a nested run, repeating whole passes
until a pass adds no answer anywhere; then every subgoal touched by the run
is marked complete and the caller replays the stored answers.  Inside a run,
a subgoal is re-evaluated once per pass and returns its answers directly to
its caller.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import builtins as _builtins
from .canonical import canonical_term
from .codegen import make_clause_fn
from .errors import (
    ExistenceError,
    PrologError,
    PrologTypeError,
    InstantiationError,
    ResolutionLimitExceeded,
    SolveTimeout,
    DirectiveError,
)
from .printer import answer_json, print_answer
from .rational import unify
from .reader import Atom, Int, Struct, Var, conjuncts, parse_program, parse_query
from .terms import ATOM, STRUCT, VAR, CellStore, Trail, materialize, undo_to
from .transform import transform_coinductive
from .tries import COMPLETE, EVALUATING, TableSpace

PLAIN = "plain"
INDUCTIVE = "tabled_inductive"
COINDUCTIVE = "tabled_coinductive"

# continuation kinds
GOAL = 0
ANSWER = 1
CUTTO = 2
SOFT = 3
HALT = 4
FAIL = 5

HALT_NODE = (HALT, None, 0, None, None)
FAIL_NODE = (FAIL, None, 0, None, None)

# clause template node kinds
T_VAR = 0
T_CONST = 1
T_PAIR = 3
T_STRUCT = 4


@dataclass(slots=True)
class Predicate:
    name: str
    arity: int
    clauses: list = field(default_factory=list)
    fns: list = field(default_factory=list)
    mode: str = PLAIN
    entry: object = None
    called: bool = False
    # clause function of a plain predicate made of a single fact, else None
    inline_fn: object = None

    def refresh(self):
        single = self.mode == PLAIN and len(self.clauses) == 1 and not self.clauses[0].body
        self.inline_fn = self.fns[0] if single else None

    @property
    def tabled(self):
        return self.mode != PLAIN


class CompiledClause:
    __slots__ = ("head", "body", "nvars", "line", "fn")

    def __init__(self, head, body, nvars, line, fn=None):
        self.head = head
        self.body = body
        self.nvars = nvars
        self.line = line
        self.fn = fn


@dataclass
class Options:
    max_depth: int = 1_000_000
    max_answers: int | None = None
    canonical_subgoals: bool = False
    timeout: float | None = None


class _Compiler:
    """Turns reader AST into templates; ground subterms become shared cells."""

    def __init__(self, store: CellStore):
        self.store = store
        self.vars: dict[str, int] = {}
        self.count = 0

    def template(self, node):
        store = self.store
        if isinstance(node, Var):
            if node.name == "_":
                self.count += 1
                return (T_VAR, self.count - 1)
            i = self.vars.get(node.name)
            if i is None:
                i = self.vars[node.name] = self.count
                self.count += 1
            return (T_VAR, i)
        if isinstance(node, Int):
            return (T_CONST, store.int(node.value))
        if isinstance(node, Atom):
            return (T_CONST, store.atom(node.name))
        if node.name == "." and len(node.args) == 2:
            t = (T_PAIR, self.template(node.args[0]), self.template(node.args[1]))
        else:
            t = (T_STRUCT, store.symbol(node.name), tuple(self.template(a) for a in node.args))
        return self._fold(t)

    def _fold(self, t):
        store = self.store
        if t[0] == T_PAIR:
            if t[1][0] == T_CONST and t[2][0] == T_CONST:
                return (T_CONST, store.pair(t[1][1], t[2][1]))
        elif all(a[0] == T_CONST for a in t[2]):
            return (T_CONST, store.struct(t[1], [a[1] for a in t[2]]))
        return t


class Answer:
    """Bindings of one solution; cells are valid until the next answer is pulled."""

    def __init__(self, engine: "Engine", bindings: dict):
        self.engine = engine
        self.bindings = bindings

    def text(self) -> str:
        return print_answer(self.engine.store, self.bindings)

    def json(self) -> dict:
        return answer_json(self.engine.store, self.bindings)

    def __getitem__(self, name):
        return self.engine.store.deref(self.bindings[name])


class ClauseCP:
    """Remaining alternative clauses of a call, starting at index ``i``."""

    __slots__ = ("mark", "args", "fns", "i", "height", "anc", "nxt")

    def __init__(self, mark, args, fns, height, anc, nxt, i=0):
        self.mark = mark
        self.args = args
        self.fns = fns
        self.i = i
        self.height = height
        self.anc = anc
        self.nxt = nxt

    def resume(self, m: "Engine", cps):
        fns = self.fns
        n = len(fns)
        args, height, anc, nxt = self.args, self.height, self.anc, self.nxt
        tpos, cpos = self.mark
        entries = m.trail.entries
        tags, vals = m.store.tags, m.store.vals
        i = self.i
        while i < n:
            cont = fns[i](args, height, anc, nxt)
            i += 1
            if cont is not False:
                if i == n:
                    cps.pop()
                else:
                    self.i = i
                return cont
            if len(entries) > tpos:
                for v in entries[tpos:]:
                    vals[v] = None
                del entries[tpos:]
            if len(tags) > cpos:
                del tags[cpos:]
                del vals[cpos:]
        cps.pop()
        return None


class AltCP:
    __slots__ = ("mark", "cont")

    def __init__(self, mark, cont):
        self.mark = mark
        self.cont = cont

    def resume(self, m, cps):
        cps.pop()
        return self.cont


class SoftCP:
    __slots__ = ("mark", "cont", "taken")

    def __init__(self, mark, cont):
        self.mark = mark
        self.cont = cont
        self.taken = False

    def resume(self, m, cps):
        cps.pop()
        return None if self.taken else self.cont


class AnswerCP:
    """Replays a table's answers (in insertion order) into a call's variables."""

    __slots__ = ("mark", "frame", "sf", "i", "nxt")

    def __init__(self, mark, frame, sf, nxt):
        self.mark = mark
        self.frame = frame
        self.sf = sf
        self.i = 0
        self.nxt = nxt

    def resume(self, m, cps):
        leaves = self.frame.answer_leaves
        store, trail = m.store, m.trail
        root = self.frame.answers
        while self.i < len(leaves):
            leaf = leaves[self.i]
            self.i += 1
            terms = m.tables_reconstruct(leaf, root)
            ok = True
            for a, b in zip(self.sf, terms):
                if not unify(store, trail, a, b):
                    ok = False
                    break
            if ok:
                return self.nxt
            undo_to(store, trail, self.mark)
        cps.pop()
        return None


class Engine:
    """One engine instance: cell store, trail, program and table space."""

    def __init__(self, text: str | None = None, **options):
        self.store = CellStore()
        self.trail = Trail()
        self.tables = TableSpace()
        self.options = Options(**options)
        self.predicates: dict[tuple[int, int], Predicate] = {}
        self.steps = 0
        self.pass_id = 0
        self._run_frames: list = []
        self.coinductive_hits = 0
        self._deadline = None
        self.builtins = _builtins.table(self)
        # builtin handlers and user predicates share one dispatch table
        self.procs: dict = dict(self.builtins)
        self.true_cell = self.store.atom("true")
        if text is not None:
            self.consult(text)

    # -- program ---------------------------------------------------------------

    def predicate(self, name: str, arity: int, create=True) -> Predicate | None:
        key = (self.store.symbol(name), arity)
        pred = self.predicates.get(key)
        if pred is None and create:
            pred = self.predicates[key] = Predicate(name, arity)
            if key not in self.builtins:
                self.procs[key] = pred
        return pred

    def consult(self, text: str) -> "Engine":
        """Load clauses and directives.  Supported directives: ``table(p/n)``,
        ``tabling_mode(p/n, coinductive)`` and ``coinductive(p/n)`` (co-SLD
        transformation)."""
        src = parse_program(text)
        cosld = set()
        for d in src.directives:
            self._directive(d.goal, d.line, cosld)
        clauses = transform_coinductive(src.clauses, cosld)
        for cl in clauses:
            self.add_clause(cl.head, cl.body, cl.line)
        return self

    def _specs(self, spec, line):
        if isinstance(spec, Struct) and spec.name in (",", ".") and len(spec.args) == 2:
            return self._specs(spec.args[0], line) + self._specs(spec.args[1], line)
        if spec == Atom("[]"):
            return []
        if (
            isinstance(spec, Struct)
            and spec.name == "/"
            and isinstance(spec.args[0], Atom)
            and isinstance(spec.args[1], Int)
        ):
            return [(spec.args[0].name, spec.args[1].value)]
        raise DirectiveError("bad predicate indicator in directive", line)

    def _set_mode(self, name, arity, mode, line):
        pred = self.predicate(name, arity)
        if pred.called and pred.mode != mode:
            raise DirectiveError(f"{name}/{arity} was already called; its mode is fixed", line)
        pred.mode = mode
        pred.refresh()
        if pred.entry is None and mode != PLAIN:
            pred.entry = self.tables.entry((name, arity))

    def _directive(self, goal, line, cosld):
        if isinstance(goal, Struct) and goal.name == "table" and len(goal.args) == 1:
            for name, arity in self._specs(goal.args[0], line):
                pred = self.predicate(name, arity)
                if pred.mode != COINDUCTIVE:
                    self._set_mode(name, arity, INDUCTIVE, line)
            return
        if isinstance(goal, Struct) and goal.name == "tabling_mode" and len(goal.args) == 2:
            mode = goal.args[1]
            modes = {"coinductive": COINDUCTIVE, "inductive": INDUCTIVE}
            if not isinstance(mode, Atom) or mode.name not in modes:
                raise DirectiveError(f"unknown tabling mode {mode}", line)
            for name, arity in self._specs(goal.args[0], line):
                self._set_mode(name, arity, modes[mode.name], line)
            return
        if isinstance(goal, Struct) and goal.name == "coinductive" and len(goal.args) == 1:
            cosld.update(self._specs(goal.args[0], line))
            return
        raise DirectiveError(f"unknown directive {goal}", line)

    def add_clause(self, head, body, line=0):
        comp = _Compiler(self.store)
        if isinstance(head, Atom):
            name, args = head.name, ()
        elif isinstance(head, Struct):
            name, args = head.name, head.args
        else:
            raise PrologTypeError("clause head must be callable")
        head_t = [comp.template(a) for a in args]
        body_t = [] if body is None else [comp.template(g) for g in conjuncts(body)]
        body_t = [g for g in body_t if not self._is_true(g)]
        if (self.store.symbol(name), len(args)) in self.builtins:
            raise PrologError(f"cannot redefine builtin {name}/{len(args)}")
        pred = self.predicate(name, len(args))
        fn = make_clause_fn(
            self.store, self.trail, head_t, body_t, self._resolve, self.inline_tests, self.ite
        )
        pred.clauses.append(CompiledClause(head_t, body_t, comp.count, line, fn))
        pred.fns.append(fn)
        pred.refresh()
        self.procs[(self.store.symbol(name), len(args))] = pred

    def _resolve(self, sid, arity):
        """The procedure a body goal with this functor calls (created on demand)."""
        key = (sid, arity)
        proc = self.procs.get(key)
        if proc is None:
            proc = self.predicate(self.store.names[sid], arity)
        return proc

    def _is_true(self, g):
        store = self.store
        return g[0] == T_CONST and store.tags[g[1]] == ATOM and store.names[store.vals[g[1]]] == "true"

    def tables_reconstruct(self, leaf, root):
        from .tries import reconstruct_term

        return reconstruct_term(leaf, self.store, root)

    # -- solving ---------------------------------------------------------------

    def solve(self, query, *, max_answers=None):
        """Lazily enumerate answers of ``query`` (text, or a goal list as
        returned by :func:`parse_query` together with names).

        Raises :class:`ResolutionLimitExceeded` when the step budget runs out.
        """
        if isinstance(query, str):
            goals, names = parse_query(query)
        else:
            goals, names = query
        if max_answers is None:
            max_answers = self.options.max_answers
        store = self.store
        mark = self.trail.mark(store)
        varmap: dict = {}
        cells = [materialize(store, g, varmap) for g in goals]
        bindings = {n: varmap[n] for n in names}
        cont = HALT_NODE
        for g in reversed(cells):
            cont = (GOAL, g, 0, None, cont)
        self.steps = 0
        self._deadline = None if self.options.timeout is None else time.monotonic() + self.options.timeout
        count = 0
        try:
            if max_answers is not None and max_answers <= 0:
                return
            for _ in self._run(cont, []):
                count += 1
                yield Answer(self, bindings)
                if max_answers is not None and count >= max_answers:
                    break
        except BaseException:
            # an aborted fixpoint leaves incomplete tables behind
            self._abandon_tables()
            raise
        finally:
            undo_to(store, self.trail, mark)

    def query(self, text: str, *, max_answers=None) -> list[str]:
        """All answers as printed text (``"true"`` for a binding-free success)."""
        return [a.text() for a in self.solve(text, max_answers=max_answers)]

    def _abandon_tables(self):
        for frame in self.tables.frames:
            if frame.status != COMPLETE:
                frame.leaf.frame = None
        self.tables.frames = [f for f in self.tables.frames if f.status == COMPLETE]
        self._run_frames = []

    def _check_limits(self):
        if self.steps > self.options.max_depth:
            raise ResolutionLimitExceeded(self.options.max_depth)
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise SolveTimeout(self.options.timeout)

    def _run(self, cont, cps):
        store = self.store
        trail = self.trail
        tags, vals = store.tags, store.vals
        entries = trail.entries
        procs = self.procs
        limit = self.options.max_depth
        steps = self.steps
        # the deadline is only looked at every 4096 steps
        check_at = min(limit + 1, steps + 4096)
        try:
            while True:
                if cont is None:
                    while cps:
                        cp = cps[-1]
                        tpos, cpos = cp.mark
                        # undo_to, inlined for the hot path
                        if len(entries) > tpos:
                            for v in entries[tpos:]:
                                vals[v] = None
                            del entries[tpos:]
                        if len(tags) > cpos:
                            del tags[cpos:]
                            del vals[cpos:]
                        cont = cp.resume(self, cps)
                        if cont is not None:
                            break
                    else:
                        return
                proc, args, cutb, anc, nxt = cont
                if proc.__class__ is int:
                    if proc == GOAL:
                        g = args
                        while tags[g] == VAR and vals[g] is not None:
                            g = vals[g]
                        tag = tags[g]
                        if tag == STRUCT:
                            sid, args = vals[g]
                            proc = procs.get((sid, len(args)))
                        elif tag == ATOM:
                            args = ()
                            proc = procs.get((vals[g], 0))
                        elif tag == VAR:
                            raise InstantiationError("goal is unbound")
                        else:
                            raise PrologTypeError("goal is not callable", g)
                        if proc is None:
                            self._unknown(g)
                    elif proc == ANSWER:
                        # an answer return is a step too: a table fed only by its
                        # own answers never makes a call.  Answers can grow without
                        # bound, so limits are checked on each one
                        steps += 1
                        self.steps = steps
                        self._check_limits()
                        frame, sf, returned = args
                        leaf, _ = self.tables.answer_check_insert(frame, sf, store)
                        if leaf.id in returned:
                            cont = None
                        else:
                            returned.add(leaf.id)
                            cont = nxt
                        continue
                    elif proc == HALT:
                        self.steps = steps
                        yield
                        steps = self.steps
                        cont = None
                        continue
                    elif proc == CUTTO:
                        del cps[args:]
                        cont = nxt
                        continue
                    elif proc == SOFT:
                        args.taken = True
                        cont = nxt
                        continue
                    else:
                        cont = None
                        continue
                steps += 1
                if steps >= check_at:
                    self.steps = steps
                    self._check_limits()
                    check_at = min(limit + 1, steps + 4096)
                if proc.__class__ is not Predicate:
                    cont = proc(args, cutb, anc, nxt, cps)
                    continue
                proc.called = True
                if proc.mode == PLAIN:
                    # try clauses in place; a choice point is only needed
                    # when untried clauses remain after the first match
                    fns = proc.fns
                    n = len(fns)
                    if not n:
                        self._unknown_pred(proc, args)
                    tpos, cpos = len(entries), len(tags)
                    height = len(cps)
                    i = 0
                    cont = False
                    while i < n:
                        cont = fns[i](args, height, anc, nxt)
                        i += 1
                        if cont is not False:
                            break
                        if len(entries) > tpos:
                            for v in entries[tpos:]:
                                vals[v] = None
                            del entries[tpos:]
                        if len(tags) > cpos:
                            del tags[cpos:]
                            del vals[cpos:]
                    if cont is False:
                        cont = None
                    elif i < n:
                        cps.append(ClauseCP((tpos, cpos), args, fns, height, anc, nxt, i))
                else:
                    self.steps = steps
                    cont = self._call_tabled(proc, args, anc, nxt, cps)
                    steps = self.steps
                    check_at = min(limit + 1, steps + 4096)
        finally:
            self.steps = steps

    def _unknown_pred(self, pred, args):
        goal = self.store.struct(pred.name, list(args))
        raise ExistenceError(f"unknown procedure {pred.name}/{pred.arity}", goal)

    def _unknown(self, g):
        store = self.store
        g = store.deref(g)
        name, arity = store.functor(g)
        raise ExistenceError(f"unknown procedure {name}/{arity}", g)

    # -- tabling ---------------------------------------------------------------

    def _call_tabled(self, pred, args, anc, nxt, cps):
        store = self.store
        if self.options.canonical_subgoals:
            args = [canonical_term(store, self.trail, a) for a in args]
        frame, sf, _ = self.tables.subgoal_check_insert(pred.entry, args, store)
        if frame.status == COMPLETE:
            return self._consume(frame, sf, nxt, cps)
        if anc is None:
            self._fixpoint(pred, frame, args, sf)
            return self._consume(frame, sf, nxt, cps)
        if frame.pass_id != self.pass_id:
            # generator for this pass: answers flow straight back to the caller
            frame.pass_id = self.pass_id
            self._run_frames.append(frame)
            answer = (ANSWER, (frame, sf, set()), 0, anc, nxt)
            cp = ClauseCP(self.trail.mark(store), args, pred.fns, len(cps), (frame, sf, anc), answer)
            cps.append(cp)
            return cp.resume(self, cps)
        if pred.mode == COINDUCTIVE:
            node = anc
            while node is not None and node[0] is not frame:
                node = node[2]
            if node is not None:
                trail = self.trail
                mark = trail.mark(store)
                for mine, theirs in zip(sf, node[1]):
                    if not unify(store, trail, mine, theirs):
                        undo_to(store, trail, mark)
                        return None
                self.coinductive_hits += 1
                return nxt
        return self._consume(frame, sf, nxt, cps)

    def _consume(self, frame, sf, nxt, cps):
        cp = AnswerCP(self.trail.mark(self.store), frame, sf, nxt)
        cps.append(cp)
        return cp.resume(self, cps)

    def _fixpoint(self, pred, frame, args, sf):
        store, trail = self.store, self.trail
        saved = self._run_frames
        self._run_frames = [frame]
        frame.status = EVALUATING
        hits = self.coinductive_hits
        try:
            while True:
                self.pass_id += 1
                frame.pass_id = self.pass_id
                before = self.tables.answer_count
                mark = trail.mark(store)
                answer = (ANSWER, (frame, sf, set()), 0, None, HALT_NODE)
                cps = [ClauseCP(mark, args, pred.fns, 0, (frame, sf, None), answer)]
                for _ in self._run(None, cps):
                    pass
                undo_to(store, trail, mark)
                if self.tables.answer_count == before:
                    break
            if self.coinductive_hits == hits:
                for f in self._run_frames:
                    f.status = COMPLETE
            else:
                # answers of inner calls leaned on hypotheses about their
                # ancestors, so only the leader's table is context free
                frame.status = COMPLETE
                dropped = {id(f) for f in self._run_frames if f is not frame}
                for f in self._run_frames:
                    if f is not frame:
                        f.leaf.frame = None
                self.tables.frames = [f for f in self.tables.frames if id(f) not in dropped]
        finally:
            self._run_frames = saved


def consult(text: str, **options) -> Engine:
    return Engine(text, **options)
