"""Exception types raised by the engine and its helpers."""


class CycletabError(Exception):
    pass


class BuildError(CycletabError):
    """Malformed term literal handed to ``build`` (bad or duplicate cycle label)."""


class PrologSyntaxError(CycletabError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"syntax error{where}: {message}")


class PrologError(CycletabError):
    """A runtime error thrown by a builtin or by the resolution machinery."""

    kind = "error"

    def __init__(self, message, culprit=None):
        self.culprit = culprit
        super().__init__(f"{self.kind}: {message}")


class InstantiationError(PrologError):
    kind = "instantiation_error"


class PrologTypeError(PrologError):
    kind = "type_error"


class ExistenceError(PrologError):
    kind = "existence_error"


class PermissionError_(PrologError):
    kind = "permission_error"


class EvaluationError(PrologError):
    kind = "evaluation_error"


class TrieCorruption(CycletabError):
    """A rational-reference token points outside the path it lives on."""


class ResolutionLimitExceeded(CycletabError):
    """The resolution step budget ran out. This is truncation, not failure."""

    def __init__(self, steps):
        self.steps = steps
        super().__init__(f"resolution limit of {steps} steps exceeded")


class SolveTimeout(CycletabError):
    def __init__(self, seconds):
        self.seconds = seconds
        super().__init__(f"timed out after {seconds} s")


class DirectiveError(CycletabError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line else ""
        super().__init__(f"directive error{where}: {message}")
