"""Stack-based coinduction by program transformation (co-SLD).

Each transformed predicate ``p/n`` gets

* an entry clause ``p(A1..An) :- p(A1..An, [])``;
* worker clauses ``p(..., S)``: the original clauses with an extra stack
  argument, where every call to a transformed predicate goes through its
  hypothesis check;
* the hypothesis check ``p_coinduction_preflight(A1..An, S)``, which succeeds
  once per ancestor in ``S`` that unifies with the call and otherwise
  recurses with the call pushed on ``S``.
"""

from __future__ import annotations

from .reader import Atom, Clause, Struct, Var, make_list, NIL

MEMBER = "$cosld_member"
STACK_VAR = "_CoSLD_Stack"


def preflight_name(name: str) -> str:
    return f"{name}_coinduction_preflight"


def _call(name, args):
    return Struct(name, tuple(args)) if args else Atom(name)


def _head_parts(head):
    if isinstance(head, Struct):
        return head.name, list(head.args)
    return head.name, []


def _rewrite(goal, targets, stack):
    """Replace calls to transformed predicates inside a body, through control constructs."""
    if isinstance(goal, Struct):
        if goal.name in (",", ";", "->", "*->") and len(goal.args) == 2:
            return Struct(goal.name, tuple(_rewrite(g, targets, stack) for g in goal.args))
        if goal.name in ("\\+", "call") and len(goal.args) == 1:
            return Struct(goal.name, (_rewrite(goal.args[0], targets, stack),))
        if (goal.name, len(goal.args)) in targets:
            return Struct(preflight_name(goal.name), (*goal.args, stack))
        return goal
    if isinstance(goal, Atom) and (goal.name, 0) in targets:
        return Struct(preflight_name(goal.name), (stack,))
    return goal


def transform_coinductive(clauses: list[Clause], targets: set[tuple[str, int]]) -> list[Clause]:
    """Return the clause list with every predicate in ``targets`` transformed.

    Clauses of other predicates pass through unchanged.  The membership test
    ``MEMBER/2`` is a builtin of the engine.
    """
    if not targets:
        return list(clauses)
    out = []
    stack = Var(STACK_VAR)
    for cl in clauses:
        name, args = _head_parts(cl.head)
        if (name, len(args)) not in targets:
            out.append(cl)
            continue
        head = Struct(name, (*args, stack))
        body = None if cl.body is None else _rewrite(cl.body, targets, stack)
        out.append(Clause(head, body, cl.line))
    for name, arity in sorted(targets):
        params = tuple(Var(f"A{i}") for i in range(1, arity + 1))
        goal = _call(name, params)
        out.append(Clause(goal, Struct(name, (*params, NIL)), 0))
        check = Struct(
            ";",
            (
                Struct("*->", (Struct(MEMBER, (goal, stack)), Atom("true"))),
                Struct(name, (*params, make_list([goal], stack))),
            ),
        )
        out.append(Clause(Struct(preflight_name(name), (*params, stack)), check, 0))
    return out
