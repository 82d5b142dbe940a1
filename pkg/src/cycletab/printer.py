"""Rendering of possibly-rational bindings as ``Name = Term`` equations."""

from __future__ import annotations

import re
import sys

from .rational import is_acyclic
from .terms import ATOM, INT, PAIR, STRUCT, VAR, CellStore

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

_PLAIN_ATOM = re.compile(r"^(?:[a-z][A-Za-z0-9_]*|[+\-*/\\^<>=~:.?@#&$]+|\[\]|!|;|\{\}|,)$")


def quote_atom(name: str) -> str:
    if _PLAIN_ATOM.match(name) and name != ",":
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


class _Renderer:
    def __init__(self, store: CellStore, roots: dict, var_names: dict):
        self.store = store
        self.roots = roots  # cyclic compound cell -> query variable name
        self.var_names = var_names  # unbound var cell -> printed name
        self.interior: dict[int, str] = {}
        self.on_path: set[int] = set()
        self.targets: set[int] = set()
        self.extra: list[str] = []
        self.eq_root = None

    def var_name(self, c):
        name = self.var_names.get(c)
        if name is None:
            name = self.var_names[c] = f"_{sum(1 for n in self.var_names.values() if n.startswith('_')) + 1}"
        return name

    def label(self, c):
        name = self.roots.get(c) or self.interior.get(c)
        if name is None:
            name = self.interior[c] = f"_S{len(self.interior) + 1}"
        return name

    def equation(self, name, c):
        self.eq_root = c
        text = f"{name} = {self.render(c)}"
        self.eq_root = None
        return text

    def render(self, c):
        store = self.store
        c = store.deref(c)
        tag = store.tags[c]
        if tag == VAR:
            return self.var_name(c)
        if tag == INT:
            return str(store.vals[c])
        if tag == ATOM:
            return quote_atom(store.names[store.vals[c]])
        if c in self.on_path:
            self.targets.add(c)
            return self.label(c)
        if c != self.eq_root and c in self.roots:
            return self.roots[c]
        self.on_path.add(c)
        if tag == PAIR:
            text = "[" + self.list_body(c) + "]"
        else:
            sid, args = store.vals[c]
            text = quote_atom(store.names[sid]) + "(" + ",".join(self.render(a) for a in args) + ")"
        self.on_path.discard(c)
        if c in self.targets and c != self.eq_root:
            return self._lift(c, text)
        return text

    def _lift(self, c, text):
        name = self.label(c)
        if c not in self.roots:
            self.extra.append(f"{name} = {text}")
        return name

    def list_body(self, c):
        store = self.store
        head, tail = store.vals[c]
        out = self.render(head)
        t = store.deref(tail)
        tag = store.tags[t]
        if tag == ATOM and store.names[store.vals[t]] == "[]":
            return out
        if tag == PAIR and t not in self.on_path and (t == self.eq_root or t not in self.roots):
            self.on_path.add(t)
            body = self.list_body(t)
            self.on_path.discard(t)
            if t in self.targets and t != self.eq_root:
                return out + "|" + self._lift(t, "[" + body + "]")
            return out + "," + body
        return out + "|" + self.render(t)


def _prepare(store: CellStore, names: dict):
    roots = {}
    var_names = {}
    for name, cell in names.items():
        r = store.deref(cell)
        tag = store.tags[r]
        if tag == VAR:
            var_names.setdefault(r, name)
        elif tag in (PAIR, STRUCT) and r not in roots and not is_acyclic(store, r):
            roots[r] = name
    return roots, var_names


def format_term(store: CellStore, cell: int, name: str | None = None) -> str:
    """Render one term.  With ``name`` the result is an equation set whose
    cycles back to the root use ``name``."""
    if name is not None:
        return print_answer(store, {name: cell})
    r = _Renderer(store, {}, {})
    text = r.render(cell)
    return ", ".join([text, *r.extra])


def print_answer(store: CellStore, names: dict) -> str:
    """Render the bindings of the named query variables of one answer.

    Variables whose names start with ``_`` are not shown.  Returns ``"true"``
    when nothing is left to print.
    """
    shown = {n: c for n, c in names.items() if not n.startswith("_")}
    roots, var_names = _prepare(store, shown)
    # hidden variables may still be referenced by printed terms; they get _k names
    r = _Renderer(store, roots, var_names)
    eqs = []
    done_roots = {}
    for name, cell in shown.items():
        c = store.deref(cell)
        tag = store.tags[c]
        if tag == VAR:
            owner = var_names[c]
            if owner != name:
                eqs.append(f"{name} = {owner}")
            continue
        if c in done_roots:
            eqs.append(f"{name} = {done_roots[c]}")
            continue
        if roots.get(c) == name:
            done_roots[c] = name
        start = len(r.extra)
        eqs.append(r.equation(name, c))
        eqs.extend(r.extra[start:])
    return ", ".join(eqs) if eqs else "true"


def answer_json(store: CellStore, names: dict) -> dict:
    """``{"bindings": [{"var", "term", "cycles"}]}``: terms as token trees,
    cycles as ``{"from": path, "to": path}`` argument-index paths."""
    var_names: dict[int, str] = {}
    out = []
    for name, cell in names.items():
        if name.startswith("_"):
            continue
        cycles = []
        term = _json_term(store, cell, [], {}, cycles, var_names)
        out.append({"var": name, "term": term, "cycles": cycles})
    return {"bindings": out}


def _json_term(store, c, path, open_cells, cycles, var_names):
    c = store.deref(c)
    tag = store.tags[c]
    if tag == VAR:
        name = var_names.setdefault(c, f"_{len(var_names) + 1}")
        return {"var": name}
    if tag == INT:
        return {"int": store.vals[c]}
    if tag == ATOM:
        return {"atom": store.names[store.vals[c]]}
    if c in open_cells:
        cycles.append({"from": list(path), "to": list(open_cells[c])})
        return {"ref": list(open_cells[c])}
    open_cells[c] = list(path)
    if tag == PAIR:
        functor, args = ".", store.vals[c]
    else:
        sid, args = store.vals[c]
        functor = store.names[sid]
    kids = [_json_term(store, a, path + [i], open_cells, cycles, var_names) for i, a in enumerate(args)]
    del open_cells[c]
    return {"functor": functor, "args": kids}
