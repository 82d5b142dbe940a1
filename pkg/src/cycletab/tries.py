"""Two-level trie table space with support for rational terms.

Terms are stored as pre-order token paths.  When insertion reaches a pair or
compound cell that is already open on the current traversal path, it emits a
reference token pointing at the trie node that holds that cell's token instead
of descending again.  Reconstruction creates a placeholder variable for each
reference and binds it once the whole path has been rebuilt.
"""

from __future__ import annotations

import itertools

from .errors import TrieCorruption
from .terms import ATOM, INT, PAIR, VAR, CellStore

# token kinds (first tuple element)
T_VAR = 0
T_ATOM = 1
T_INT = 2
T_PAIR = 3
T_FUNCTOR = 4
T_REF = 5

PAIR_TOKEN = (T_PAIR,)

_loose_ids = itertools.count(1_000_000_000)

EVALUATING = "evaluating"
COMPLETE = "complete"


class TrieNode:
    __slots__ = ("token", "parent", "children", "id", "depth", "target", "frame", "is_answer")

    def __init__(self, token, parent, node_id):
        self.token = token
        self.parent = parent
        self.children: dict = {}
        self.id = node_id
        self.depth = 0 if parent is None else parent.depth + 1
        self.target = None
        self.frame = None
        self.is_answer = False

    def path(self) -> list["TrieNode"]:
        """Nodes from just below the root down to this node."""
        out = []
        node = self
        while node.parent is not None:
            out.append(node)
            node = node.parent
        out.reverse()
        return out

    def __repr__(self):
        return f"TrieNode(#{self.id} {self.token})"


class SubgoalFrame:
    """Per-call tabling state: status, answer trie and answer replay order."""

    __slots__ = ("status", "answers", "answer_leaves", "subst_arity", "leaf", "pass_id", "entry")

    def __init__(self, leaf, subst_arity, answer_root, entry=None):
        self.status = EVALUATING
        self.answers = answer_root
        self.answer_leaves: list[TrieNode] = []
        self.subst_arity = subst_arity
        self.leaf = leaf
        self.pass_id = -1
        self.entry = entry

    def __repr__(self):
        return f"SubgoalFrame({self.status}, {len(self.answer_leaves)} answers)"


class TableEntry:
    __slots__ = ("key", "root")

    def __init__(self, key, root):
        self.key = key
        self.root = root


class TableSpace:
    def __init__(self):
        self.entries: dict = {}
        self.node_count = 0
        self.answer_count = 0
        self.frames: list[SubgoalFrame] = []

    def new_root(self) -> TrieNode:
        self.node_count += 1
        return TrieNode(None, None, self.node_count)

    def entry(self, key) -> TableEntry:
        e = self.entries.get(key)
        if e is None:
            e = self.entries[key] = TableEntry(key, self.new_root())
        return e

    def clear(self):
        self.entries.clear()
        self.frames.clear()
        self.node_count = 0
        self.answer_count = 0

    def insert_term(self, store: CellStore, root: TrieNode, t: int, varmap: dict):
        return trie_check_insert_term(store, root, t, varmap, self)

    def subgoal_check_insert(self, entry: TableEntry, args, store: CellStore):
        """Look up (or add) the call whose arguments are ``args``.

        Returns ``(frame, substitution factor, is_new)``; the substitution
        factor lists the call's unbound variables in first-occurrence order.
        """
        varmap: dict[int, int] = {}
        node = entry.root
        for a in args:
            node, _ = trie_check_insert_term(store, node, a, varmap, self)
        sf = list(varmap)
        frame = node.frame
        if frame is None:
            frame = node.frame = SubgoalFrame(node, len(sf), self.new_root(), entry)
            self.frames.append(frame)
            return frame, sf, True
        return frame, sf, False

    def answer_check_insert(self, frame: SubgoalFrame, subst, store: CellStore):
        if len(subst) != frame.subst_arity:
            raise ValueError("substitution does not match the frame's arity")
        varmap: dict[int, int] = {}
        node = frame.answers
        for t in subst:
            node, _ = trie_check_insert_term(store, node, t, varmap, self)
        if node.is_answer:
            return node, False
        node.is_answer = True
        frame.answer_leaves.append(node)
        self.answer_count += 1
        return node, True


def trie_check_insert_term(store: CellStore, root: TrieNode, t: int, varmap: dict, space=None):
    """Insert ``t`` below ``root``.  ``varmap`` maps unbound variable cells to
    their ordinal and is shared across the terms of one call or answer.

    Returns ``(leaf, created)`` where ``created`` tells whether any node was added.
    """
    tags, vals = store.tags, store.vals
    node = root
    created = False
    open_cells: dict[int, TrieNode] = {}
    stack = [t]
    while stack:
        c = stack.pop()
        if c < 0:
            del open_cells[~c]
            continue
        while tags[c] == VAR and vals[c] is not None:
            c = vals[c]
        tag = tags[c]
        compound = False
        if tag == VAR:
            i = varmap.get(c)
            if i is None:
                i = varmap[c] = len(varmap)
            tok = (T_VAR, i)
        elif tag == ATOM:
            tok = (T_ATOM, vals[c])
        elif tag == INT:
            tok = (T_INT, vals[c])
        else:
            target = open_cells.get(c)
            if target is not None:
                tok = (T_REF, target.id)
            else:
                compound = True
                if tag == PAIR:
                    tok = PAIR_TOKEN
                else:
                    tok = (T_FUNCTOR, vals[c][0], len(vals[c][1]))
        child = node.children.get(tok)
        if child is None:
            if space is not None:
                space.node_count += 1
                nid = space.node_count
            else:
                nid = next(_loose_ids)
            child = TrieNode(tok, node, nid)
            if tok[0] == T_REF:
                child.target = target
            node.children[tok] = child
            created = True
        node = child
        if compound:
            open_cells[c] = node
            stack.append(~c)
            if tag == PAIR:
                h, tl = vals[c]
                stack.append(tl)
                stack.append(h)
            else:
                stack.extend(reversed(vals[c][1]))
    return node, created


def reconstruct_term(leaf: TrieNode, store: CellStore, root: TrieNode = None) -> list[int]:
    """Rebuild the terms spelled by the path ending at ``leaf``.

    The path starts below ``root`` (by default the trie root).  Variable tokens
    with the same ordinal share one fresh variable.
    """
    if leaf is root:
        return []
    path = leaf.path()
    if root is not None and root.parent is not None:
        cut = next((i for i, n in enumerate(path) if n.parent is root), None)
        if cut is None:
            raise TrieCorruption("leaf is not below the given root")
        path = path[cut:]
    vals = store.vals
    results = []
    pending = []  # [slot list, next index]
    built: dict[int, int] = {}
    refs = []
    fresh: dict[int, int] = {}
    for node in path:
        tok = node.token
        kind = tok[0]
        slots = None
        if kind == T_VAR:
            c = fresh.get(tok[1])
            if c is None:
                c = fresh[tok[1]] = store.new_var()
        elif kind == T_ATOM:
            c = store.atom_id(tok[1])
        elif kind == T_INT:
            c = store.int(tok[1])
        elif kind == T_PAIR:
            c = store.pair(-1, -1)
            slots = vals[c]
        elif kind == T_FUNCTOR:
            c = store.struct(tok[1], [-1] * tok[2])
            slots = vals[c][1]
        else:
            c = store.new_var()
            refs.append((c, node.target))
        if kind in (T_PAIR, T_FUNCTOR):
            built[node.id] = c
        if pending:
            top = pending[-1]
            top[0][top[1]] = c
            top[1] += 1
            if top[1] == len(top[0]):
                pending.pop()
        else:
            results.append(c)
        if slots is not None:
            pending.append([slots, 0])
    if pending:
        raise TrieCorruption("path ends inside an unfinished term")
    for var, target in refs:
        cell = built.get(target.id) if target is not None else None
        if cell is None:
            raise TrieCorruption("rational reference target is not on the path")
        vals[var] = cell
    return results


def check_ref_invariants(leaf: TrieNode) -> None:
    """Raise if a reference token on this path breaks the ancestry rules:
    its target must hold a pair or functor token and lie above it."""
    path = leaf.path()
    for i, node in enumerate(path):
        if node.token[0] != T_REF:
            continue
        tgt = node.target
        if tgt is None or tgt.token[0] not in (T_PAIR, T_FUNCTOR):
            raise TrieCorruption(f"reference at depth {node.depth} targets a non-compound node")
        if not any(tgt is anc for anc in path[:i]):
            raise TrieCorruption(f"reference at depth {node.depth} targets a node off its path")


def token_text(tok, store: CellStore | None = None) -> str:
    kind = tok[0]
    if kind == T_VAR:
        return f"VAR{tok[1]}"
    if kind == T_ATOM:
        return store.names[tok[1]] if store else f"atom#{tok[1]}"
    if kind == T_INT:
        return str(tok[1])
    if kind == T_PAIR:
        return "PAIR"
    if kind == T_FUNCTOR:
        name = store.names[tok[1]] if store else f"atom#{tok[1]}"
        return f"{name}/{tok[2]}"
    return "RT_PTR"


def dump_trie(root: TrieNode, store: CellStore | None = None) -> str:
    """One line per node in pre-order: ``depth token [->target line]``.

    Reference targets are given as the 0-based line number of the target node.
    """
    lines = []
    index = {}
    todo = [c for c in reversed(list(root.children.values()))]
    order = []
    while todo:
        n = todo.pop()
        index[n.id] = len(order)
        order.append(n)
        todo.extend(reversed(list(n.children.values())))
    for n in order:
        text = f"{n.depth} {token_text(n.token, store)}"
        if n.token[0] == T_REF:
            text += f" ->{index[n.target.id]}"
        lines.append(text)
    return "\n".join(lines)
