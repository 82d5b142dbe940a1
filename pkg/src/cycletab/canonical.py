"""Canonical representation of rational terms.

The term is cut into its cyclic subterms, each fragment is rebuilt acyclically
with an open end standing in for the back reference, and the cycle is closed
again at the innermost fragment for which closing it reproduces the original
term.  Failed trial closures hand their open end up to the enclosing fragment.
"""

from __future__ import annotations

from .rational import is_acyclic, struct_equal, unify, univ, univ_inverse
from .terms import PAIR, STRUCT, CellStore, Trail, undo_to


def canonical_term(store: CellStore, trail: Trail, term: int) -> int:
    """Canonical representation of ``term``; acyclic input comes back as is.

    The result is always bisimilar to ``term``.  Terms whose cycles the
    decomposition cannot rebuild faithfully are returned unchanged.
    """
    term = store.deref(term)
    if store.tags[term] not in (PAIR, STRUCT):
        return term
    open_end = store.new_var()
    out = decompose_cyclic_term(store, trail, term, univ(store, term), open_end, [term])
    canonical = univ_inverse(store, out)
    unify(store, trail, canonical, open_end)
    canonical = store.deref(canonical)
    # A subterm that points back at an ancestor other than its parent is
    # closed onto the wrong fragment by the stack rule, e.g.
    # X = g(1,[S|b]), S = g(X,S).  Keep the input in that case.
    if not struct_equal(store, canonical, term):
        return term
    return canonical


def _in_stack(store, term, stack):
    return any(struct_equal(store, term, s) for s in stack)


def decompose_cyclic_term(store: CellStore, trail: Trail, cyclic: int, parts: list[int],
                          open_end: int, stack: list[int]) -> list[int]:
    """Rebuild the components ``parts`` of ``cyclic``; the clauses are tried in order
    and the first that applies commits."""
    out = []
    for part in parts:
        if is_acyclic(store, part):
            out.append(part)
        elif struct_equal(store, cyclic, part):
            # direct self reference
            out.append(open_end)
        elif not _in_stack(store, part, stack):
            inner_end = store.new_var()
            inner = decompose_cyclic_term(store, trail, part, univ(store, part), inner_end,
                                          [part, *stack])
            canonical = univ_inverse(store, inner)
            mark = trail.mark(store)
            if not (unify(store, trail, canonical, inner_end) and struct_equal(store, canonical, part)):
                undo_to(store, trail, mark)
                unify(store, trail, inner_end, open_end)
            out.append(canonical)
        else:
            out.append(open_end)
    return out
