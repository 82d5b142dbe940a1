"""Tokenizer and operator-precedence parser for the supported Prolog subset."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PrologSyntaxError


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Struct:
    name: str
    args: tuple


NIL = Atom("[]")


def make_list(items, tail=NIL):
    out = tail
    for item in reversed(items):
        out = Struct(".", (item, out))
    return out


@dataclass
class Clause:
    head: object
    body: object  # None for facts
    line: int


@dataclass
class Directive:
    goal: object
    line: int


@dataclass
class SourceProgram:
    items: list = field(default_factory=list)

    @property
    def clauses(self):
        return [i for i in self.items if isinstance(i, Clause)]

    @property
    def directives(self):
        return [i for i in self.items if isinstance(i, Directive)]


# priority, type
PREFIX_OPS = {
    ":-": (1200, "fx"),
    "?-": (1200, "fx"),
    "table": (1150, "fx"),
    "\\+": (900, "fy"),
    "-": (200, "fy"),
}
INFIX_OPS = {
    ":-": (1200, "xfx"),
    ";": (1100, "xfy"),
    "->": (1050, "xfy"),
    "*->": (1050, "xfy"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "\\=": (700, "xfx"),
    "==": (700, "xfx"),
    "\\==": (700, "xfx"),
    "=..": (700, "xfx"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "//": (400, "yfx"),
    "mod": (400, "yfx"),
}

SYMBOL_CHARS = "+-*/\\^<>=~:.?@#&$"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<qatom>'(?:[^'\\]|\\.|'')*')
  | (?P<punct>[()\[\]{},|])
  | (?P<bang>!)
  | (?P<semi>;)
  | (?P<sym>[+\-*/\\^<>=~:.?@\#&$]+)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # int var name punct end eof
    text: str
    line: int
    col: int
    layout_before: bool = False


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    layout = True
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PrologSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - line_start + 1
        if kind in ("ws", "comment", "block"):
            layout = True
        else:
            if kind == "sym" and s == "." and (m.end() >= n or text[m.end()] in " \t\r\n%"):
                tokens.append(Token("end", s, line, col, layout))
            elif (kind == "sym" and s.endswith(".") and len(s) > 1 and s not in INFIX_OPS
                  and (m.end() >= n or text[m.end()] in " \t\r\n%")):
                # "X=a." style: symbol run swallowing the clause terminator
                tokens.append(Token("name", s[:-1], line, col, layout))
                tokens.append(Token("end", ".", line, col + len(s) - 1, False))
            elif kind == "qatom":
                body = s[1:-1].replace("''", "'")
                body = re.sub(r"\\(.)", lambda mm: {"n": "\n", "t": "\t"}.get(mm.group(1), mm.group(1)), body)
                tokens.append(Token("qname", body, line, col, layout))
            elif kind in ("sym", "bang", "semi"):
                tokens.append(Token("name", s, line, col, layout))
            else:
                tokens.append(Token(kind, s, line, col, layout))
            layout = False
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, True))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, k=0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if self.i < len(self.tokens) - 1:
            self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return PrologSyntaxError(message, tok.line, tok.col)

    def expect(self, text):
        tok = self.next()
        if tok.text != text or tok.kind not in ("punct", "name"):
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def at_term_end(self):
        return self.peek().kind in ("end", "eof")

    # -- terms -----------------------------------------------------------------

    def parse(self, maxp=1200):
        left, leftp = self.parse_primary(maxp)
        return self.parse_infix(left, leftp, maxp)

    def _infix_op(self, tok):
        if tok.kind == "punct" and tok.text == ",":
            return ",", INFIX_OPS[","]
        if tok.kind == "punct" and tok.text == "|":
            return ";", INFIX_OPS[";"]
        if tok.kind == "name" and tok.text in INFIX_OPS:
            return tok.text, INFIX_OPS[tok.text]
        return None, None

    def parse_infix(self, left, leftp, maxp):
        while True:
            tok = self.peek()
            name, op = self._infix_op(tok)
            if op is None:
                if tok.kind == "name" and tok.text not in PREFIX_OPS and not tok.text[0].isalpha():
                    raise self.error(f"unknown operator {tok.text!r}", tok)
                if tok.kind in ("int", "var", "qname") or (tok.kind == "name" and tok.text[0].isalpha()):
                    raise self.error(f"operator expected before {tok.text!r}", tok)
                return left
            p, typ = op
            left_max = p if typ == "yfx" else p - 1
            right_max = p if typ == "xfy" else p - 1
            if p > maxp or leftp > left_max:
                return left
            self.next()
            right = self.parse(right_max)
            left = Struct(name, (left, right))
            leftp = p

    def _starts_term(self, tok):
        if tok.kind in ("int", "var", "qname"):
            return True
        if tok.kind == "punct":
            return tok.text in "([{"
        if tok.kind == "name":
            return tok.text not in INFIX_OPS or tok.text in PREFIX_OPS
        return False

    def parse_primary(self, maxp):
        tok = self.next()
        if tok.kind == "int":
            return Int(int(tok.text)), 0
        if tok.kind == "var":
            return Var(tok.text), 0
        if tok.kind == "punct":
            if tok.text == "(":
                t = self.parse(1200)
                self.expect(")")
                return t, 0
            if tok.text == "[":
                return self.parse_list(), 0
            if tok.text == "{":
                if self.peek().text == "}":
                    self.next()
                    return Atom("{}"), 0
                t = self.parse(1200)
                self.expect("}")
                return Struct("{}", (t,)), 0
            raise self.error(f"unexpected {tok.text!r}", tok)
        if tok.kind in ("name", "qname"):
            name = tok.text
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.text == "(" and not nxt.layout_before:
                self.next()
                args = [self.parse(999)]
                while self.peek().kind == "punct" and self.peek().text == ",":
                    self.next()
                    args.append(self.parse(999))
                self.expect(")")
                return Struct(name, tuple(args)), 0
            if tok.kind == "name" and name == "-" and nxt.kind == "int" and not nxt.layout_before:
                self.next()
                return Int(-int(nxt.text)), 0
            if tok.kind == "name" and name in PREFIX_OPS and self._starts_term(nxt):
                p, typ = PREFIX_OPS[name]
                if p > maxp:
                    p = 999
                argmax = p if typ == "fy" else p - 1
                arg = self.parse(argmax)
                return Struct(name, (arg,)), p
            return Atom(name), 0
        if tok.kind == "end":
            raise self.error("unexpected end of clause", tok)
        raise self.error("unexpected end of input", tok)

    def parse_list(self):
        if self.peek().kind == "punct" and self.peek().text == "]":
            self.next()
            return NIL
        items = [self.parse(999)]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.next()
            items.append(self.parse(999))
        tail = NIL
        if self.peek().kind == "punct" and self.peek().text == "|":
            self.next()
            tail = self.parse(999)
        self.expect("]")
        return make_list(items, tail)

    def parse_clause_term(self):
        t = self.parse(1200)
        tok = self.next()
        if tok.kind != "end":
            raise self.error(f"expected end of clause, found {tok.text or 'end of input'!r}", tok)
        return t


def parse_program(text: str) -> SourceProgram:
    parser = Parser(text)
    prog = SourceProgram()
    while parser.peek().kind != "eof":
        line = parser.peek().line
        t = parser.parse_clause_term()
        if isinstance(t, Struct) and t.name == ":-" and len(t.args) == 1:
            prog.items.append(Directive(t.args[0], line))
        elif isinstance(t, Struct) and t.name == ":-" and len(t.args) == 2:
            _check_head(parser, t.args[0], line)
            prog.items.append(Clause(t.args[0], t.args[1], line))
        else:
            _check_head(parser, t, line)
            prog.items.append(Clause(t, None, line))
    return prog


def _check_head(parser, head, line):
    if isinstance(head, (Var, Int)):
        raise PrologSyntaxError("clause head must be callable", line, 1)


def conjuncts(t) -> list:
    out = []
    while isinstance(t, Struct) and t.name == "," and len(t.args) == 2:
        out.append(t.args[0])
        t = t.args[1]
    out.append(t)
    return out


def parse_query(text: str):
    """Parse ``"G1, G2."`` into ``(goals, names)``; ``names`` lists named
    variables in first-occurrence order."""
    src = text.strip()
    if not src:
        raise PrologSyntaxError("empty query", 1, 1)
    if src.startswith("?-"):
        src = src[2:]
    if not src.rstrip().endswith("."):
        src = src + " ."
    parser = Parser(src)
    if parser.peek().kind in ("eof", "end"):
        raise PrologSyntaxError("empty query", 1, 1)
    t = parser.parse_clause_term()
    if parser.peek().kind != "eof":
        raise parser.error("only one query expected")
    return conjuncts(t), variable_names(t)


def parse_term_sequence(text: str) -> list:
    """Parse a comma-separated run of terms, optionally ending with ``.``."""
    _goals, _ = parse_query(text)
    return _goals


def variable_names(t) -> list[str]:
    seen = []
    todo = [t]
    while todo:
        n = todo.pop()
        if isinstance(n, Var):
            if n.name != "_" and n.name not in seen:
                seen.append(n.name)
        elif isinstance(n, Struct):
            todo.extend(reversed(n.args))
    return seen
