"""Cyclic path enumeration on a fully connected graph.

The graph has nodes ``0..n`` (``posint`` counts from 0 up to
``full_edge_size``) and an edge for every ordered pair of distinct nodes.
"""

from __future__ import annotations

import gc
import time

from .engine import Engine
from .errors import SolveTimeout

MODES = ("coslg", "cosld", "tabled-cosld")

_PATH = """\
path(F, [F|P]) :-
  edge(F, N),
  path(N, P).
"""

_GRAPH = """\
full_edge_size({n}).

edge(X, Y) :-
  posint(X),
  posint(Y),
  X \\== Y.

posint(N) :-
  posint(N, 0).
posint(_, I) :-
  full_edge_size(N),
  I > N, !,
  fail.
posint(I, I).
posint(X, I) :-
  NI is I + 1,
  posint(X, NI).
"""

_HEADERS = {
    "coslg": ":- table(path/2).\n:- tabling_mode(path/2, coinductive).\n",
    "cosld": ":- coinductive(path/2).\n",
    # the worker produced by the transformation carries the stack as a third argument
    "tabled-cosld": ":- coinductive(path/2).\n:- table(path/3).\n",
}


def program(mode: str, n: int) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown bench mode {mode!r}")
    if n < 2:
        raise ValueError("graph size must be at least 2")
    return _HEADERS[mode] + "\n" + _PATH + "\n" + _GRAPH.format(n=n)


def run(mode: str, n: int, timeout: float | None = None, max_depth: int = 10**12) -> dict:
    """Run ``path(1,P)`` to exhaustion and report a result row.

    ``answers`` counts the solutions seen before the timeout, if any.
    """
    engine = Engine(program(mode, n), timeout=timeout, max_depth=max_depth)
    answers = 0
    timed_out = False
    # the engine allocates many short-lived acyclic tuples; frequent young
    # generation collections only cost time here
    threshold = gc.get_threshold()
    gc.set_threshold(200_000, *threshold[1:])
    start = time.perf_counter()
    try:
        for _ in engine.solve("path(1, P)."):
            answers += 1
    except SolveTimeout:
        timed_out = True
    finally:
        gc.set_threshold(*threshold)
    seconds = time.perf_counter() - start
    return {
        "mode": mode,
        "n": n,
        "seconds": round(seconds, 4),
        "answers": answers,
        "timeout": timed_out,
        "table_nodes": engine.tables.node_count,
    }
