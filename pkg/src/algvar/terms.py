"""Terms and laws over a sorted signature, with a formal omega power.

Syntax (one law per line)::

    x:m * y = y * x
    x^w * x = x^w
    (s * t)^# * s <= s * (t * s)^#
    x * x = x => x^w = x
    s*t*s*t = s*t & t*s*t*s = t*s => (s * t)^# * s = s * (t * s)^#

``*`` is the binary operation named ``*`` (resolved by argument sorts, so the
same symbol covers a mixed product), ``^w`` is the formal idempotent power,
``^#`` applies a unary operation written as a symbol, ``f(a, b)`` applies a
named operation, and a bare name that is a nullary operation of the target
signature (e.g. ``1``) is a constant.  Variables may carry a sort annotation
``x:s``; unannotated variables take the annotated sort found elsewhere in
the law, else the first sort of the signature.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

OMEGA = "w"


class TermSyntaxError(ValueError):
    def __init__(self, message, text="", column=None):
        self.text = text
        self.column = column
        where = f" at column {column + 1}" if column is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)


@dataclass(frozen=True)
class Var:
    name: str
    sort: str | None = None


@dataclass(frozen=True)
class App:
    op: str
    args: tuple = ()
    style: str = "call"  # "call" | "infix" | "postfix" | "const"


@dataclass(frozen=True)
class Power:
    """Formal idempotent power ``t^w``."""

    arg: object


Term = Var | App | Power


@dataclass(frozen=True)
class Law:
    """``lhs rel rhs``, optionally guarded by equational premises."""

    lhs: Term
    rhs: Term
    relation: str = "="
    premises: tuple = field(default=())  # tuple of (lhs, rhs) equations

    def __post_init__(self):
        if self.relation not in ("=", "<="):
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def kind(self):
        if self.premises:
            return "quasi-equation"
        return "equation" if self.relation == "=" else "inequation"

    def variables(self):
        out = []
        for lhs, rhs in self.premises:
            _collect(lhs, out)
            _collect(rhs, out)
        _collect(self.lhs, out)
        _collect(self.rhs, out)
        return out

    def __str__(self):
        return format_law(self)


def _collect(term, out):
    if isinstance(term, Var):
        if term.name not in out:
            out.append(term.name)
    elif isinstance(term, App):
        for a in term.args:
            _collect(a, out)
    else:
        _collect(term.arg, out)


def depth(term):
    if isinstance(term, Var):
        return 0
    if isinstance(term, App):
        return 1 + max((depth(a) for a in term.args), default=0)
    return 1 + depth(term.arg)


def declared_sorts(law):
    """Map variable name -> annotated sort (``None`` when never annotated)."""
    sorts = {}

    def walk(t):
        if isinstance(t, Var):
            if t.sort is not None:
                prev = sorts.get(t.name)
                if prev is not None and prev != t.sort:
                    raise TermSyntaxError(f"variable {t.name} annotated with both {prev} and {t.sort}")
                sorts[t.name] = t.sort
            else:
                sorts.setdefault(t.name, None)
        elif isinstance(t, App):
            for a in t.args:
                walk(a)
        else:
            walk(t.arg)

    for lhs, rhs in law.premises:
        walk(lhs)
        walk(rhs)
    walk(law.lhs)
    walk(law.rhs)
    return sorts


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<rel><=|=>|=|&)|(?P<name>[A-Za-z_][A-Za-z0-9_]*|[0-9]+)"
    r"|(?P<punct>[()*,:^])|(?P<sym>[#!~%@$?+]))"
)


def _tokenize(text):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermSyntaxError("unexpected character", text, pos + (len(text[pos:]) - len(text[pos:].lstrip())))
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, constants=("1",)):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.constants = set(constants)

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            raise TermSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", self.text, tok[2])
        self.i += 1
        return tok

    def law(self):
        sides = [self.term()]
        relations = []
        premises = []
        while self.peek()[0] == "rel":
            rel = self.take()[1]
            if rel == "&":
                if not relations or relations[-1] != "=":
                    raise TermSyntaxError("premises must be equations", self.text, self.tokens[self.i - 1][2])
                premises.append((sides[-2], sides[-1]))
                sides = [self.term()]
                relations = []
                continue
            if rel == "=>":
                if len(sides) != 2 or relations != ["="]:
                    raise TermSyntaxError("premise before '=>' must be an equation", self.text, self.tokens[self.i - 1][2])
                premises.append((sides[0], sides[1]))
                sides = [self.term()]
                relations = []
                continue
            relations.append(rel)
            sides.append(self.term())
            if len(relations) > 1:
                raise TermSyntaxError("chained relations are not supported", self.text, self.tokens[self.i - 1][2])
        tok = self.peek()
        if tok[0] != "end":
            raise TermSyntaxError(f"unexpected {tok[1]!r}", self.text, tok[2])
        if len(sides) != 2:
            raise TermSyntaxError("a law needs a relation", self.text, tok[2])
        return Law(sides[0], sides[1], relations[0], tuple(premises))

    def term(self):
        left = self.postfix()
        while self.peek()[1] == "*":
            self.take()
            right = self.postfix()
            left = App("*", (left, right), "infix")
        return left

    def postfix(self):
        t = self.atom()
        while self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[1] == OMEGA:
                t = Power(t)
            elif tok[0] == "sym":
                t = App(tok[1], (t,), "postfix")
            else:
                raise TermSyntaxError("expected 'w' or an operation symbol after '^'", self.text, tok[2])
        return t

    def atom(self):
        tok = self.peek()
        if tok[1] == "(":
            self.take()
            t = self.term()
            self.take(")")
            return t
        if tok[0] != "name":
            raise TermSyntaxError(f"unexpected {tok[1] or 'end of input'!r}", self.text, tok[2])
        self.take()
        name = tok[1]
        if self.peek()[1] == "(":
            self.take()
            args = []
            if self.peek()[1] != ")":
                args.append(self.term())
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.term())
            self.take(")")
            return App(name, tuple(args), "call")
        if name in self.constants:
            return App(name, (), "const")
        if name[0].isdigit():
            raise TermSyntaxError(f"unknown constant {name!r}", self.text, tok[2])
        if self.peek()[1] == ":":
            self.take()
            sort = self.take()
            if sort[0] not in ("name", "sym"):
                raise TermSyntaxError("expected a sort name", self.text, sort[2])
            return Var(name, sort[1])
        return Var(name)


def parse_term(text, constants=("1",)):
    p = _Parser(text, constants)
    t = p.term()
    tok = p.peek()
    if tok[0] != "end":
        raise TermSyntaxError(f"unexpected {tok[1]!r}", text, tok[2])
    return t


def parse_law(text, constants=("1",)):
    """Parse one law; ``constants`` lists the nullary operation names."""
    return _Parser(text, constants).law()


# ---------------------------------------------------------------------------
# printing


def format_term(term):
    if isinstance(term, Var):
        return term.name if term.sort is None else f"{term.name}:{term.sort}"
    if isinstance(term, Power):
        return f"{_format_operand(term.arg)}^{OMEGA}"
    if term.style == "const":
        return term.op
    if term.style == "infix":
        left, right = term.args
        rtxt = format_term(right)
        if isinstance(right, App) and right.style == "infix":
            rtxt = f"({rtxt})"
        return f"{format_term(left)} {term.op} {rtxt}"
    if term.style == "postfix":
        return f"{_format_operand(term.args[0])}^{term.op}"
    return f"{term.op}({', '.join(format_term(a) for a in term.args)})"


def _format_operand(term):
    txt = format_term(term)
    if isinstance(term, App) and term.style == "infix":
        return f"({txt})"
    return txt


def format_law(law):
    body = f"{format_term(law.lhs)} {law.relation} {format_term(law.rhs)}"
    if not law.premises:
        return body
    prem = " & ".join(f"{format_term(a)} = {format_term(b)}" for a, b in law.premises)
    return f"{prem} => {body}"
