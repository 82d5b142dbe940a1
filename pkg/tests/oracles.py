"""Reference implementations used by the tests.

None of these call into the engine's relations: they work on plain Python
data (graphs of cells copied out of a store, adjacency lists) so they can
serve as independent checks.
"""

from __future__ import annotations

import itertools

from cycletab.terms import ATOM, INT, PAIR, VAR


def snapshot(store, root):
    """Copy the cell graph reachable from ``root`` into a dict
    ``cell -> (label, children)``; bound variables are skipped."""
    tags, vals = store.tags, store.vals

    def deref(c):
        while tags[c] == VAR and vals[c] is not None:
            c = vals[c]
        return c

    graph = {}
    todo = [deref(root)]
    while todo:
        c = todo.pop()
        if c in graph:
            continue
        tag = tags[c]
        if tag == VAR:
            graph[c] = (("var", c), ())
        elif tag == ATOM:
            graph[c] = (("atom", store.names[vals[c]]), ())
        elif tag == INT:
            graph[c] = (("int", vals[c]), ())
        elif tag == PAIR:
            kids = tuple(deref(x) for x in vals[c])
            graph[c] = (("pair",), kids)
            todo.extend(kids)
        else:
            sid, args = vals[c]
            kids = tuple(deref(x) for x in args)
            graph[c] = (("f", store.names[sid], len(args)), kids)
            todo.extend(kids)
    return graph, deref(root)


def equivalent(store, a, b) -> bool:
    """Bisimilarity by partition refinement over the union of both cell graphs.

    Cells start out grouped by label; a block is split while two of its cells
    disagree on the blocks of their children.  The result is the coarsest
    stable partition, i.e. the largest bisimulation.
    """
    ga, ra = snapshot(store, a)
    gb, rb = snapshot(store, b)
    graph = {**ga, **gb}
    block = {}
    ids = {}
    for c, (label, _) in graph.items():
        block[c] = ids.setdefault(label, len(ids))
    while True:
        sigs = {}
        new = {}
        for c, (_, kids) in graph.items():
            sig = (block[c], tuple(block[k] for k in kids))
            new[c] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == len(set(block.values())):
            return new[ra] == new[rb]
        block = new


def unfold(store, root, depth):
    """Nested-tuple unfolding of ``root`` cut at ``depth`` (``...`` below)."""
    graph, r = snapshot(store, root)

    def go(c, d):
        label, kids = graph[c]
        if d == 0:
            return "..."
        return (label, tuple(go(k, d - 1) for k in kids))

    return go(r, depth)


def list_shape(store, root):
    """Spine of a rational list as ``(elements, back)`` where the last tail
    points back at position ``back`` (None for a proper or partial list)."""
    tags, vals = store.tags, store.vals
    seen = {}
    elems = []
    c = store.deref(root)
    while tags[c] == PAIR:
        if c in seen:
            return tuple(elems), seen[c]
        seen[c] = len(elems)
        h, c = vals[c]
        h = store.deref(h)
        elems.append(vals[h] if tags[h] in (INT, ATOM) else h)
        c = store.deref(c)
    return tuple(elems), None


# -- graphs ----------------------------------------------------------------------


def reachability(nodes, edges):
    """Least fixed point of reach(X,Y) :- edge(X,Y) ; edge(X,Z), reach(Z,Y)
    by naive iteration."""
    reach = set(edges)
    while True:
        new = {(x, y) for (x, z) in edges for (z2, y) in reach if z == z2} | reach
        if new == reach:
            return reach
        reach = new


def full_graph(n):
    """Successor lists of the complete digraph on ``0..n`` in edge/2 order."""
    nodes = range(n + 1)
    return {x: [y for y in nodes if y != x] for x in nodes}


def coslg_paths(adj, start):
    """Answers of the tabled coinductive path/2 query for ``start``.

    Depth-first simulation: a node's table is built at its first call; a call
    to a node on the current stack succeeds coinductively by closing the list
    onto that ancestor's own list cell; a call to a node evaluated earlier
    reuses (copies of) that node's answers.  Answers are list shapes
    ``(elements, back)`` as built by :func:`list_shape`; tables keep distinct
    shapes in order.

    While answers travel up the stack they still share the list cells of the
    calls they pass through, so their shape depends on where the cycle closes.
    A live answer is ``(path, end)``: seen from stack position ``q`` it spans
    the cells of ``path[q:]`` followed by either ``("ref", i)`` (back to the cell of position ``i``) or
    ``("copy", shape)``.
    """
    tables: dict = {}

    def shape_at(q, path, end):
        elems = tuple(path[q:])
        if end[0] == "copy":
            sub, back = end[1]
            return elems + sub, len(elems) + back
        i = end[1]
        if i >= q:
            return elems, i - q
        return elems + tuple(path[i:q]), 0

    def gen(stack):
        q = len(stack) - 1
        k = stack[q]
        table = tables[k] = []
        live = []
        for m in adj[k]:
            if m in stack:
                found = [(stack, ("ref", stack.index(m)))]
            elif m in tables:
                found = [(stack, ("copy", s)) for s in list(tables[m])]
            else:
                found = gen(stack + [m])
            for path, end in found:
                shape = shape_at(q, path, end)
                if shape not in table:
                    table.append(shape)
                    live.append((path, end))
        return live

    gen([start])
    return tables[start]


def lasso_ok(adj, shape) -> bool:
    """Consecutive elements of the unfolded list (one full period past the
    prefix) are edges of the graph."""
    elems, back = shape
    seq = list(elems) + list(elems[back:]) + [elems[back]]
    return all(b in adj[a] for a, b in zip(seq, seq[1:]))


def random_rational_list(rng, alphabet, max_cells):
    """A random lasso ``(elements, back)`` with 1..max_cells cells."""
    n = rng.randint(1, max_cells)
    return tuple(rng.choice(alphabet) for _ in range(n)), rng.randrange(n)


def lasso_sequence(shape, length):
    elems, back = shape
    out = list(elems)
    period = elems[back:]
    for x in itertools.cycle(period):
        if len(out) >= length:
            break
        out.append(x)
    return out[:length]


def random_term(store, rng, max_cells=8, leaves=("a", "b", 1, 2), var_pool=None):
    """Build a random, possibly cyclic term of at most ``max_cells`` compound
    cells.  Children of compound node ``i`` may point at any node (so back
    edges make cycles) or at a fresh leaf.  ``var_pool`` is a list of variable
    cells leaves may also be drawn from."""
    n = rng.randint(1, max_cells)
    slots = [store.new_var() for _ in range(n)]
    kinds = [rng.choice(("pair", "f1", "f2", "g2")) for _ in range(n)]

    def child():
        r = rng.random()
        if r < 0.45:
            return rng.choice(slots)
        if var_pool and r < 0.55:
            return rng.choice(var_pool)
        leaf = rng.choice(leaves)
        return store.int(leaf) if isinstance(leaf, int) else store.atom(leaf)

    for slot, kind in zip(slots, kinds):
        if kind == "pair":
            cell = store.pair(child(), child())
        elif kind == "f1":
            cell = store.struct("f", [child()])
        else:
            cell = store.struct(kind[0], [child(), child()])
        store.vals[slot] = cell
    return store.deref(slots[0])


def has_cycle(store, root) -> bool:
    graph, r = snapshot(store, root)
    state = {}

    def visit(c):
        state[c] = 1
        for k in graph[c][1]:
            s = state.get(k)
            if s == 1 or (s is None and visit(k)):
                return True
        state[c] = 2
        return False

    return visit(r)
