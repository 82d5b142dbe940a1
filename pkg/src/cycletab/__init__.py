"""cycletab: a small tabled logic-programming engine for rational terms.

Typical use::

    from cycletab import Engine
    e = Engine(open("bin.pl").read())
    for answer in e.solve("bin(L)."):
        print(answer.text())
"""

from .engine import Answer, Engine, consult
from .errors import (
    BuildError,
    CycletabError,
    DirectiveError,
    PrologError,
    PrologSyntaxError,
    ResolutionLimitExceeded,
    SolveTimeout,
    TrieCorruption,
)

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "BuildError",
    "CycletabError",
    "DirectiveError",
    "Engine",
    "PrologError",
    "PrologSyntaxError",
    "ResolutionLimitExceeded",
    "SolveTimeout",
    "TrieCorruption",
    "consult",
]
