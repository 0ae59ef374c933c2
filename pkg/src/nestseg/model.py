"""Shared data model: spans, tokens, sentence trees and decision traces.

All offsets are UTF-8 byte offsets into the untouched source text.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

Source = Union[str, bytes]


def as_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    return source.encode("utf-8")


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span end %d before start %d" % (self.end, self.start))

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def text(self, source: Source) -> str:
        return as_bytes(source)[self.start:self.end].decode("utf-8")


class TokenKind(str, enum.Enum):
    WORD = "Word"
    NUMBER = "Number"
    PUNCT = "Punct"
    TERMINATOR = "Terminator"
    COLON = "Colon"
    DASH = "Dash"
    OPEN_DELIM = "OpenDelim"
    CLOSE_DELIM = "CloseDelim"
    AMBIGUOUS_QUOTE = "AmbiguousQuote"
    MARKUP = "Markup"
    WHITESPACE = "Whitespace"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    surface: str
    span: Span

    @property
    def initial_capital(self) -> bool:
        return self.surface[:1].isupper()

    @property
    def is_single_capital(self) -> bool:
        return len(self.surface) == 1 and self.surface.isalpha() and self.surface.isupper()

    @property
    def ellipsis(self) -> bool:
        return "…" in self.surface or ".." in self.surface

    @property
    def is_content(self) -> bool:
        """True for tokens that must end up inside a sentence."""
        return self.kind not in (TokenKind.WHITESPACE, TokenKind.MARKUP)

    def with_kind(self, kind: TokenKind) -> "Token":
        return Token(kind, self.surface, self.span)


class NodeKind(str, enum.Enum):
    PRINCIPAL = "Principal"
    QUOTED = "Quoted"
    PARENTHETICAL = "Parenthetical"
    DASH_REPLIQUE = "DashReplique"
    COLON_COMPLEMENT = "ColonComplement"


@dataclass(frozen=True)
class SentenceNode:
    span: Span
    kind: NodeKind = NodeKind.PRINCIPAL
    children: tuple["SentenceNode", ...] = ()

    def walk(self) -> Iterator["SentenceNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    @property
    def depth(self) -> int:
        if not self.children:
            return 1
        return 1 + max(child.depth for child in self.children)

    def shape(self) -> tuple:
        """Spans and nesting without node kinds, for structural comparison."""
        return (self.span.start, self.span.end, tuple(c.shape() for c in self.children))


@dataclass(frozen=True)
class SentenceTree:
    roots: tuple[SentenceNode, ...]
    source_span: Span

    def walk(self) -> Iterator[SentenceNode]:
        for root in self.roots:
            yield from root.walk()

    def shape(self) -> tuple:
        return tuple(root.shape() for root in self.roots)

    def same_structure(self, other: "SentenceTree") -> bool:
        return self.shape() == other.shape()

    @property
    def has_inclusion(self) -> bool:
        return any(root.children for root in self.roots)


class Decision(str, enum.Enum):
    BOUNDARY = "Boundary"
    NO_BOUNDARY = "NoBoundary"
    OPEN_NESTED = "OpenNested"
    CLOSE_NESTED = "CloseNested"
    INLINE_DELIMITER = "InlineDelimiter"


@dataclass(frozen=True)
class TraceEvent:
    pass_name: str
    trigger: Span
    rule: str
    decision: Decision
    evidence: Optional[Span] = field(default=None)

    def describe(self, source: Source) -> str:
        line = "%s\t%s\t%s\t%d-%d\t%r" % (
            self.pass_name, self.rule, self.decision.value,
            self.trigger.start, self.trigger.end, self.trigger.text(source))
        if self.evidence is not None:
            line += "\tevidence=%r" % self.evidence.text(source)
        return line


def flatten(tree: SentenceTree) -> list[int]:
    """Sorted, deduplicated end offsets of every node at every depth."""
    return sorted({node.span.end for node in tree.walk()})


def _is_char_boundary(data: bytes, offset: int) -> bool:
    return offset == len(data) or (data[offset] & 0xC0) != 0x80


def validate(tree: SentenceTree, source: Source) -> list[str]:
    """Return human-readable invariant violations; empty when the tree is sound."""
    # local import: tokenizer depends on this module
    from .tokenizer import TokenizerConfig, tokenize

    data = as_bytes(source)
    problems: list[str] = []

    def check_span(span: Span, what: str) -> None:
        if not 0 <= span.start <= span.end <= len(data):
            problems.append("%s span %d-%d out of bounds" % (what, span.start, span.end))
            return
        if not (_is_char_boundary(data, span.start) and _is_char_boundary(data, span.end)):
            problems.append("%s span %d-%d splits a character" % (what, span.start, span.end))

    def check_siblings(nodes: tuple[SentenceNode, ...], what: str) -> None:
        for left, right in zip(nodes, nodes[1:]):
            if left.span.end > right.span.start:
                problems.append("%s %d-%d and %d-%d overlap or are out of order" % (
                    what, left.span.start, left.span.end, right.span.start, right.span.end))

    def check_node(node: SentenceNode, parent: Optional[SentenceNode]) -> None:
        check_span(node.span, "node")
        if parent is None and node.kind is not NodeKind.PRINCIPAL:
            problems.append("root %d-%d has kind %s" % (node.span.start, node.span.end, node.kind.value))
        if parent is not None:
            if node.kind is NodeKind.PRINCIPAL:
                problems.append("nested node %d-%d has kind Principal" % (node.span.start, node.span.end))
            if not parent.span.contains(node.span) or parent.span == node.span:
                problems.append("child %d-%d not strictly inside parent %d-%d" % (
                    node.span.start, node.span.end, parent.span.start, parent.span.end))
        check_siblings(node.children, "siblings")
        for child in node.children:
            check_node(child, node)

    check_span(tree.source_span, "source")
    check_siblings(tree.roots, "roots")
    for root in tree.roots:
        if not tree.source_span.contains(root.span):
            problems.append("root %d-%d outside source span" % (root.span.start, root.span.end))
        check_node(root, None)

    if problems:
        return problems

    try:
        tokens = tokenize(data, TokenizerConfig(treat_markup=True))
    except UnicodeDecodeError as exc:
        return ["source is not valid UTF-8: %s" % exc]
    roots = tree.roots
    i = 0
    for token in tokens:
        if not token.is_content:
            continue
        while i < len(roots) and roots[i].span.end <= token.span.start:
            i += 1
        if i == len(roots) or not roots[i].span.contains(token.span):
            problems.append("token %r at %d-%d not covered by any sentence" % (
                token.surface, token.span.start, token.span.end))
    return problems
