"""Classify source text into the token stream consumed by the cascade.

The tokenizer never rewrites text: concatenating token surfaces gives back the
input byte for byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import Source, Span, Token, TokenKind

OPENERS = "«([“‹"
CLOSERS = "»)]”›"
PAIRS = {"«": "»", "(": ")", "[": "]", "“": "”", "‹": "›", '"': '"'}
QUOTE_CHARS = set('«»“”‹›"')

_APOS = "'’"
_DASHES = "-‐‑‒–—―"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<markup><[^<>]*>)
  | (?P<number>\d+(?:[.,/\-]\d+)*[^\W\d_]*)
  | (?P<word>[^\W\d_](?:\w|[{apos}](?=[^\W\d_])|-(?=\w))*)
  | (?P<term>[.!?…]+)
  | (?P<colon>:)
  | (?P<dash>[{dashes}]+)
  | (?P<open>[{openers}])
  | (?P<close>[{closers}])
  | (?P<quote>")
  | (?P<punct>.)
    """.format(apos=_APOS, dashes=_DASHES, openers=re.escape(OPENERS), closers=re.escape(CLOSERS)),
    re.VERBOSE | re.DOTALL,
)

_KINDS = {
    "ws": TokenKind.WHITESPACE,
    "markup": TokenKind.MARKUP,
    "number": TokenKind.NUMBER,
    "word": TokenKind.WORD,
    "term": TokenKind.TERMINATOR,
    "colon": TokenKind.COLON,
    "dash": TokenKind.DASH,
    "open": TokenKind.OPEN_DELIM,
    "close": TokenKind.CLOSE_DELIM,
    "quote": TokenKind.AMBIGUOUS_QUOTE,
    "punct": TokenKind.PUNCT,
}


class EncodingError(ValueError):
    """Raised for input bytes that are not valid UTF-8."""

    def __init__(self, offset: int, reason: str):
        super().__init__("invalid UTF-8 at byte %d: %s" % (offset, reason))
        self.offset = offset


@dataclass(frozen=True)
class TokenizerConfig:
    treat_markup: bool = False
    ellipsis_as_terminator: bool = True


def decode(source: Source) -> str:
    if isinstance(source, str):
        return source
    try:
        return source.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(exc.start, exc.reason) from None


def tokenize(source: Source, config: TokenizerConfig = TokenizerConfig()) -> list[Token]:
    text = decode(source)
    tokens = []
    offset = 0
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        group = match.lastgroup
        surface = match.group()
        if group == "markup" and not config.treat_markup:
            surface = "<"
            group = "punct"
        kind = _KINDS[group]
        if kind is TokenKind.TERMINATOR and not config.ellipsis_as_terminator:
            if "…" in surface or ".." in surface:
                kind = TokenKind.PUNCT
        size = len(surface.encode("utf-8"))
        tokens.append(Token(kind, surface, Span(offset, offset + size)))
        offset += size
        pos += len(surface)
    return tokens


def _spacing_guess(tokens: list[Token], i: int) -> TokenKind:
    j = i - 1
    while j >= 0 and tokens[j].kind is TokenKind.MARKUP:
        j -= 1
    if j < 0 or tokens[j].kind in (TokenKind.WHITESPACE, TokenKind.OPEN_DELIM):
        return TokenKind.OPEN_DELIM
    return TokenKind.CLOSE_DELIM


def resolve_ambiguous_quotes(tokens: list[Token]) -> list[Token]:
    """Reclassify straight double quotes as opening or closing delimiters.

    Each quote is first guessed from its left context (space, start of text
    or an opening delimiter means opening).  Straight quotes cannot nest, so
    when the document holds an even number of them they are forced to
    alternate open/close; an odd count keeps the spacing guesses.
    """
    positions = [i for i, tok in enumerate(tokens) if tok.kind is TokenKind.AMBIGUOUS_QUOTE]
    if not positions:
        return list(tokens)
    if len(positions) % 2 == 0:
        kinds = [TokenKind.OPEN_DELIM if n % 2 == 0 else TokenKind.CLOSE_DELIM
                 for n in range(len(positions))]
    else:
        kinds = [_spacing_guess(tokens, i) for i in positions]
    resolved = list(tokens)
    for i, kind in zip(positions, kinds):
        resolved[i] = tokens[i].with_kind(kind)
    return resolved
