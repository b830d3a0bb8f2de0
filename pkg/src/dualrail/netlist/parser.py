"""Line-oriented ``.qnl`` circuit format: lexer and recursive-descent parser.

Grammar (keywords case-insensitive, ``#`` starts a comment, one statement
per line, ``;`` may also separate statements)::

    program   := stmt*
    stmt      := 'modes' INT | 'cutoff' INT
               | 'state' 'fock' INT+ | 'state' 'coherent' MODE arg [arg]
               | 'bs' MODE MODE [arg [arg]] | 'phase' MODE arg
               | 'kerr' MODE MODE arg | 'fredkin' MODE MODE MODE [arg]
               | 'swap' MODE MODE | 'damp' MODE arg
               | 'adjoint' '{' stmt* '}' | 'measure'
    arg       := product                       # whitespace separates args
    product   := unary (('*' | '/') unary)*
    unary     := ('-' | '+') unary | atom
    atom      := NUMBER | 'pi' | '(' sum ')'
    sum       := product (('+' | '-') product)*

Modes are single letters, ``a`` being mode 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .program import Adjoint, Expr, Gate, Program

KEYWORDS = {
    "modes", "cutoff", "state", "fock", "coherent", "bs", "phase", "kerr",
    "fredkin", "swap", "damp", "adjoint", "measure", "pi",
}

# kind -> (number of modes, minimum args, maximum args)
GATES = {
    "bs": (2, 0, 2),
    "phase": (1, 1, 1),
    "kerr": (2, 1, 1),
    "fredkin": (3, 0, 1),
    "swap": (2, 0, 0),
    "damp": (1, 1, 1),
}

MAX_MODES = 26


class NetlistError(ValueError):
    """A diagnostic positioned at ``line``/``col`` (1-based)."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        where = f"line {line}, col {col}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, WORD, OP, NL, EOF
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<comment>\#[^\n]*)"
    r"|(?P<nl>[\n;])"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/(){}])"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise NetlistError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            tokens.append(Token("NL", m.group(), line, col))
            if m.group() == "\n":
                line, line_start = line + 1, m.end()
        elif kind == "num":
            tokens.append(Token("NUM", m.group(), line, col))
        elif kind == "word":
            tokens.append(Token("WORD", m.group(), line, col))
        elif kind == "op":
            tokens.append(Token("OP", m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.modes: int | None = None
        self.cutoff: int | None = None
        self.fock: tuple[int, ...] | None = None
        self.coherent: dict[int, tuple[Expr, Expr]] = {}
        self.measure = False

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at_end_of_stmt(self) -> bool:
        t = self.tok
        return t.kind in ("NL", "EOF") or (t.kind == "OP" and t.text == "}")

    def error(self, message: str, tok: Token | None = None) -> NetlistError:
        tok = tok or self.tok
        return NetlistError(message, tok.line, tok.col)

    def skip_newlines(self):
        while self.tok.kind == "NL":
            self.advance()

    # grammar
    def parse(self) -> Program:
        body = self.statements(top=True)
        if self.modes is None:
            raise NetlistError("missing 'modes' declaration", 1, 1)
        return Program(
            modes=self.modes,
            cutoff=self.cutoff if self.cutoff is not None else 2,
            fock=self.fock,
            coherent=tuple(sorted((m, re_, im) for m, (re_, im) in self.coherent.items())),
            body=tuple(body),
            measure=self.measure,
        )

    def statements(self, top: bool, in_adjoint: bool = False) -> list:
        body = []
        while True:
            self.skip_newlines()
            t = self.tok
            if t.kind == "EOF":
                if not top:
                    raise self.error("unterminated 'adjoint' block: missing '}'")
                return body
            if t.kind == "OP" and t.text == "}":
                if top:
                    raise self.error("unmatched '}'")
                return body
            stmt = self.statement(in_adjoint)
            if stmt is not None:
                body.append(stmt)
            if not self.at_end_of_stmt():
                raise self.error(f"unexpected {self.describe(self.tok)} after statement")

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "EOF" else f"{t.text!r}"

    def keyword(self) -> tuple[str, Token]:
        t = self.advance()
        if t.kind != "WORD":
            raise self.error(f"expected a keyword, found {self.describe(t)}", t)
        word = t.text.lower()
        if word not in KEYWORDS or word in ("fock", "coherent", "pi"):
            raise self.error(f"unknown keyword {t.text!r}", t)
        return word, t

    def statement(self, in_adjoint: bool):
        word, kw = self.keyword()
        if word in ("modes", "cutoff", "state", "measure") and in_adjoint:
            raise self.error(f"'{word}' is not allowed inside an adjoint block", kw)
        if word == "modes":
            if self.modes is not None:
                raise self.error("duplicate 'modes' declaration", kw)
            n = self.integer("mode count")
            if not 1 <= n <= MAX_MODES:
                raise self.error(f"mode count must be in 1..{MAX_MODES}, got {n}", kw)
            self.modes = n
            return None
        if word == "cutoff":
            if self.cutoff is not None:
                raise self.error("duplicate 'cutoff' declaration", kw)
            d = self.integer("cutoff")
            if d < 1:
                raise self.error("cutoff must be positive", kw)
            self.cutoff = d
            return None
        if word == "state":
            self.state(kw)
            return None
        if word == "measure":
            if self.measure:
                raise self.error("duplicate 'measure' directive", kw)
            self.measure = True
            return None
        if word == "adjoint":
            return self.adjoint(kw)
        if word == "damp" and in_adjoint:
            raise self.error("'damp' inside an adjoint block: channels have no adjoint", kw)
        return self.gate(word, kw)

    def integer(self, what: str) -> int:
        t = self.tok
        if t.kind != "NUM" or not t.text.isdigit():
            raise self.error(f"expected an integer {what}, found {self.describe(t)}")
        self.advance()
        return int(t.text)

    def require_modes(self, kw: Token) -> int:
        if self.modes is None:
            raise self.error("'modes' must be declared before this statement", kw)
        return self.modes

    def mode(self) -> int:
        t = self.tok
        if t.kind != "WORD" or len(t.text) != 1 or not t.text.isalpha():
            raise self.error(f"expected a mode letter, found {self.describe(t)}")
        idx = ord(t.text.lower()) - ord("a")
        if idx >= self.modes:
            raise self.error(f"mode {t.text!r} out of range for {self.modes} modes")
        self.advance()
        return idx

    def state(self, kw: Token):
        m = self.require_modes(kw)
        t = self.advance()
        sub = t.text.lower() if t.kind == "WORD" else ""
        if sub == "fock":
            if self.fock is not None:
                raise self.error("duplicate 'state fock' directive", kw)
            occ = []
            while not self.at_end_of_stmt():
                occ.append(self.integer("occupation number"))
            if len(occ) != m:
                raise self.error(f"'state fock' needs {m} occupation numbers, got {len(occ)}", kw)
            self.fock = tuple(occ)
        elif sub == "coherent":
            mode_tok = self.tok
            mode = self.mode()
            if mode in self.coherent:
                raise self.error(f"duplicate coherent amplitude for mode {mode_tok.text!r}", mode_tok)
            args = self.args()
            if not 1 <= len(args) <= 2:
                raise self.error(f"'state coherent' takes a mode and 1 or 2 amplitude values, got {len(args)}", kw)
            im = args[1] if len(args) > 1 else Expr(0.0, "0")
            self.coherent[mode] = (args[0], im)
        else:
            raise self.error(f"expected 'fock' or 'coherent' after 'state', found {self.describe(t)}", t)

    def adjoint(self, kw: Token) -> Adjoint:
        self.require_modes(kw)
        t = self.tok
        if not (t.kind == "OP" and t.text == "{"):
            raise self.error(f"expected '{{' after 'adjoint', found {self.describe(t)}")
        self.advance()
        body = self.statements(top=False, in_adjoint=True)
        self.advance()  # '}'
        return Adjoint(tuple(body), kw.line)

    def gate(self, kind: str, kw: Token) -> Gate:
        self.require_modes(kw)
        n_modes, lo, hi = GATES[kind]
        modes = []
        for _ in range(n_modes):
            if self.at_end_of_stmt():
                raise self.error(f"'{kind}' needs {n_modes} mode(s), got {len(modes)}", kw)
            modes.append(self.mode())
        if len(set(modes)) != len(modes):
            raise self.error(f"'{kind}' uses the same mode twice", kw)
        args = self.args()
        if not lo <= len(args) <= hi:
            want = str(lo) if lo == hi else f"{lo} to {hi}"
            raise self.error(f"'{kind}' takes {want} parameter(s), got {len(args)}", kw)
        if kind == "damp" and args[0].value < 0:
            raise self.error("gamma must be nonnegative", kw)
        return Gate(kind, tuple(modes), tuple(args), kw.line)

    # expressions
    def args(self) -> list[Expr]:
        out = []
        while not self.at_end_of_stmt():
            start = self.i
            value = self.product()
            text = "".join(t.text for t in self.tokens[start:self.i])
            if not math.isfinite(value):
                raise self.error(f"parameter {text!r} is not finite", self.tokens[start])
            out.append(Expr(value, text))
        return out

    def product(self) -> float:
        value = self.unary()
        while self.tok.kind == "OP" and self.tok.text in "*/":
            op = self.advance()
            rhs = self.unary()
            if op.text == "*":
                value *= rhs
            elif rhs == 0:
                raise self.error("division by zero", op)
            else:
                value /= rhs
        return value

    def unary(self) -> float:
        t = self.tok
        if t.kind == "OP" and t.text in "+-":
            self.advance()
            v = self.unary()
            return -v if t.text == "-" else v
        return self.atom()

    def atom(self) -> float:
        t = self.advance()
        if t.kind == "NUM":
            return float(t.text)
        if t.kind == "WORD" and t.text.lower() == "pi":
            return math.pi
        if t.kind == "OP" and t.text == "(":
            value = self.sum()
            close = self.advance()
            if not (close.kind == "OP" and close.text == ")"):
                raise self.error(f"expected ')', found {self.describe(close)}", close)
            return value
        raise self.error(f"expected a number, 'pi' or '(', found {self.describe(t)}", t)

    def sum(self) -> float:
        value = self.product()
        while self.tok.kind == "OP" and self.tok.text in "+-":
            op = self.advance()
            rhs = self.product()
            value = value + rhs if op.text == "+" else value - rhs
        return value


def parse(text: str) -> Program:
    """Parse ``.qnl`` source; every failure is a positioned :class:`NetlistError`."""
    parser = Parser(text)
    try:
        return parser.parse()
    except NetlistError:
        raise
    except RecursionError:
        raise parser.error("expression nested too deeply") from None
    except (ValueError, OverflowError) as exc:
        raise parser.error(f"invalid input: {exc}") from None
