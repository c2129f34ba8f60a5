"""Text syntax for BDF trees.

    expr   = leaf | node
    leaf   = "x", digits
    node   = ("min" | "max"), "(", expr, {",", expr}, ")"
    digits = nonzero digit, {digit}

Whitespace between tokens is ignored. n-ary min/max nest to the left.
Offsets in errors are byte offsets into the UTF-8 encoded source.
"""
import logging
from dataclasses import dataclass
from typing import List

from app.bdf_core import BdfExpr, Leaf, Max, Min, _fold, coordinates
from app.errors import BdfSyntaxError, BdfValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Token:
    kind: str   # "leaf", "min", "max", "(", ")", ",", "end"
    value: int
    offset: int


def tokenize(text: str) -> List[Token]:
    try:
        src = text.encode("utf-8")
    except UnicodeEncodeError as e:
        raise BdfSyntaxError(f"source is not valid UTF-8: {e.reason}", e.start)

    tokens: List[Token] = []
    i = 0
    while i < len(src):
        ch = src[i:i + 1]
        if ch.isspace():
            i += 1
            continue
        if ch in (b"(", b")", b","):
            tokens.append(Token(ch.decode(), 0, i))
            i += 1
            continue
        if src.startswith(b"min", i) or src.startswith(b"max", i):
            tokens.append(Token(src[i:i + 3].decode(), 0, i))
            i += 3
            continue
        if ch == b"x":
            start = i
            i += 1
            j = i
            while j < len(src) and src[j:j + 1].isdigit():
                j += 1
            digits = src[i:j]
            if not digits:
                raise BdfSyntaxError("expected coordinate digits after 'x'", i)
            if digits[:1] == b"0":
                raise BdfSyntaxError("coordinate index must not start with 0", i)
            tokens.append(Token("leaf", int(digits), start))
            i = j
            continue
        raise BdfSyntaxError(f"unexpected character {src[i:i + 1]!r}", i)

    tokens.append(Token("end", 0, len(src)))
    return tokens


class Parser:
    def __init__(self, tokens: List[Token]):
        self._tokens = tokens
        self._index = 0

    @property
    def token(self) -> Token:
        return self._tokens[self._index]

    def advance(self) -> Token:
        tok = self.token
        if tok.kind != "end":
            self._index += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.token
        if tok.kind != kind:
            found = "end of input" if tok.kind == "end" else repr(tok.kind)
            raise BdfSyntaxError(f"expected {kind!r}, found {found}", tok.offset)
        return self.advance()

    def parse(self) -> BdfExpr:
        expr = self.expr()
        if self.token.kind != "end":
            raise BdfSyntaxError("unexpected trailing input", self.token.offset)
        return expr

    def expr(self) -> BdfExpr:
        tok = self.token
        if tok.kind == "leaf":
            self.advance()
            return Leaf(tok.value)
        if tok.kind in ("min", "max"):
            return self.node()
        found = "end of input" if tok.kind == "end" else repr(tok.kind)
        raise BdfSyntaxError(f"expected 'x<digits>', 'min' or 'max', found {found}", tok.offset)

    def node(self) -> BdfExpr:
        head = self.advance()
        self.expect("(")
        args = [self.expr()]
        while self.token.kind == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) < 2:
            raise BdfSyntaxError(f"{head.kind} needs at least 2 arguments", head.offset)
        build = Min if head.kind == "min" else Max
        out = args[0]
        for arg in args[1:]:
            out = build(out, arg)
        return out


def _leaf_offsets(tokens: List[Token]) -> dict:
    offsets: dict = {}
    for tok in tokens:
        if tok.kind == "leaf":
            offsets.setdefault(tok.value, []).append(tok.offset)
    return offsets


def parse(text: str) -> BdfExpr:
    tokens = tokenize(text)
    try:
        expr = Parser(tokens).parse()
    except RecursionError:
        raise BdfSyntaxError("expression nested too deeply", 0)

    coords = coordinates(expr)
    d = len(coords)
    offsets = _leaf_offsets(tokens)
    for k, where in sorted(offsets.items()):
        if len(where) > 1:
            raise BdfValidationError(f"duplicate coordinate x{k}", where[1])
    missing = sorted(set(range(1, d + 1)) - set(coords))
    if missing:
        raise BdfValidationError(f"coordinate x{missing[0]} missing (need exactly x1..x{d})", 0)
    logger.debug("parsed BDF of dimension %d", d)
    return expr


def format(expr: BdfExpr) -> str:  # noqa: A001
    return _fold(
        expr,
        lambda e: f"x{e.coord}",
        lambda e, left, right: f"{'max' if isinstance(e, Max) else 'min'}({left},{right})",
    )
