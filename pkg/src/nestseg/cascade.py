"""The segmentation cascade.

Four deterministic passes annotate the token stream with boundary marks,
then a builder turns the marks into a sentence tree:

    terminators -> colon -> paired delimiters -> dashes -> build_tree

Each pass sees the marks of the previous ones and records one trace event
per rule it fires.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass, fields
from typing import Mapping, Optional

from .lexicon import Category, Lexicon, _word_matches, default_lexicon
from .model import (Decision, NodeKind, SentenceNode, SentenceTree, Source, Span,
                    Token, TokenKind, TraceEvent)
from .tokenizer import PAIRS, QUOTE_CHARS, TokenizerConfig, resolve_ambiguous_quotes, tokenize


class Mode(str, enum.Enum):
    # reproduce the published 2024 outputs, failures included
    PAPER2024 = "paper2024"
    # apply the fixes the reference segmentations call for
    EXPECTED = "expected"


@dataclass(frozen=True)
class CascadeConfig:
    colon_indicator_rule: bool = True
    nest_quotes: bool = True
    nest_parentheses: bool = True
    nest_dashes: bool = True
    nest_colon_complements: bool = True
    include_dash_in_sentence: bool = True
    known_divergences_mode: Mode = Mode.EXPECTED

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "CascadeConfig":
        """Build a config from flat key/value pairs (strings accepted)."""
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in values.items():
            name = key.strip().replace("-", "_")
            if name == "known_divergences":
                name = "known_divergences_mode"
            if name not in known:
                raise ValueError("unknown cascade option %r" % key)
            if name == "known_divergences_mode":
                kwargs[name] = Mode(str(value).strip().lower())
            elif isinstance(value, bool):
                kwargs[name] = value
            else:
                text = str(value).strip().lower()
                if text not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError("option %s expects a boolean, got %r" % (key, value))
                kwargs[name] = text in ("true", "1", "yes")
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, str]:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, Mode) else str(value).lower()
        return out

    @property
    def paper2024(self) -> bool:
        return self.known_divergences_mode is Mode.PAPER2024


class MarkKind(str, enum.Enum):
    HARD_END = "HardEnd"
    NESTED_OPEN = "NestedOpen"
    NESTED_CLOSE = "NestedClose"


# processing order of marks sharing a position
_RANK = {MarkKind.NESTED_CLOSE: 0, MarkKind.HARD_END: 1, MarkKind.NESTED_OPEN: 2}


@dataclass(frozen=True)
class BoundaryMark:
    position: int
    kind: MarkKind
    origin: str
    node_kind: Optional[NodeKind] = None


class Label(str, enum.Enum):
    SEGMENT = "Segment"
    INDICATEUR = "Indicateur"
    PONCTUATION = "Ponctuation"


@dataclass(frozen=True)
class DecompositionItem:
    span: Span
    label: Label


class CascadeError(RuntimeError):
    """Unbalanced marks reached the tree builder: a pass is broken."""


class _Nav:
    """Content-token navigation over a token list."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.content = [i for i, t in enumerate(tokens) if t.is_content]
        self._rank = {i: n for n, i in enumerate(self.content)}

    def next(self, i: int) -> Optional[int]:
        n = bisect.bisect_right(self.content, i)
        return self.content[n] if n < len(self.content) else None

    def prev(self, i: int) -> Optional[int]:
        n = bisect.bisect_left(self.content, i)
        return self.content[n - 1] if n > 0 else None

    def between(self, lo: int, hi: int) -> list[int]:
        """Content token indices strictly between lo and hi."""
        a = bisect.bisect_right(self.content, lo)
        b = bisect.bisect_left(self.content, hi)
        return self.content[a:b]


def _hard_ends(marks: list[BoundaryMark], origin: Optional[str] = None) -> list[int]:
    return sorted(m.position for m in marks
                  if m.kind is MarkKind.HARD_END and (origin is None or m.origin == origin))


def _any_in(positions: list[int], lo: int, hi: int) -> bool:
    n = bisect.bisect_left(positions, lo)
    return n < len(positions) and positions[n] <= hi


def _is_quote_open(tok: Token) -> bool:
    return tok.kind is TokenKind.OPEN_DELIM and tok.surface in QUOTE_CHARS


# ---------------------------------------------------------------------------
# pass 1: terminators

def pass_terminators(tokens: list[Token], lexicon: Lexicon) -> tuple[list[BoundaryMark], list[TraceEvent]]:
    nav = _Nav(tokens)
    marks: list[BoundaryMark] = []
    trace: list[TraceEvent] = []

    def emit(tok: Token, rule: str, boundary: bool, position: int) -> None:
        if boundary:
            marks.append(BoundaryMark(position, MarkKind.HARD_END, "terminators"))
        trace.append(TraceEvent("terminators", tok.span, rule,
                                Decision.BOUNDARY if boundary else Decision.NO_BOUNDARY))

    for i, tok in enumerate(tokens):
        if tok.kind is not TokenKind.TERMINATOR:
            continue
        before = tokens[i - 1] if i > 0 else None
        after = tokens[i + 1] if i + 1 < len(tokens) else None
        if tok.surface == ".":
            if before is not None and before.kind is TokenKind.WORD and before.is_single_capital:
                emit(tok, "initial", False, tok.span.end)
                continue
            if before is not None and _abbreviation_before(tokens, i, lexicon):
                emit(tok, "abbreviation", False, tok.span.end)
                continue
            if (before is not None and after is not None
                    and before.is_content and after.is_content
                    and after.kind in (TokenKind.WORD, TokenKind.NUMBER)
                    and TokenKind.NUMBER in (before.kind, after.kind)):
                emit(tok, "number-internal", False, tok.span.end)
                continue

        # closing delimiters right after a terminator belong to its sentence
        position = tok.span.end
        j = nav.next(i)
        while j is not None and tokens[j].kind is TokenKind.CLOSE_DELIM:
            position = tokens[j].span.end
            j = nav.next(j)
        if j is None:
            emit(tok, "end-of-text", True, position)
            continue
        nxt = tokens[j]
        if nxt.kind is TokenKind.WORD:
            if nxt.initial_capital:
                emit(tok, "capital", True, position)
            else:
                emit(tok, "lowercase-continuation", False, position)
        elif nxt.kind in (TokenKind.OPEN_DELIM, TokenKind.AMBIGUOUS_QUOTE):
            emit(tok, "open-delimiter", True, position)
        elif nxt.kind is TokenKind.DASH:
            emit(tok, "dash", True, position)
        elif nxt.kind is TokenKind.NUMBER:
            emit(tok, "number", True, position)
        else:
            emit(tok, "punctuation-follows", False, position)
    return marks, trace


def _abbreviation_before(tokens: list[Token], i: int, lexicon: Lexicon) -> bool:
    word = tokens[i - 1]
    if word.kind is TokenKind.WORD and lexicon.is_abbreviation(word.surface + "."):
        return True
    # dotted forms such as "c.-à-d." span several tokens; the period may be
    # an inner one, so try every period-final chunk that reaches it
    stops = (TokenKind.WHITESPACE, TokenKind.OPEN_DELIM, TokenKind.CLOSE_DELIM, TokenKind.MARKUP)
    j = i - 1
    while j >= 0 and tokens[j].kind not in stops:
        j -= 1
    k = i
    while k < len(tokens) and tokens[k].kind not in stops:
        if tokens[k].surface == "." and k - j > 2:
            glued = "".join(t.surface for t in tokens[j + 1:k + 1])
            if lexicon.is_abbreviation(glued):
                return True
        k += 1
    return False


# ---------------------------------------------------------------------------
# pass 2: colon

def _colon_window(tokens: list[Token], nav: _Nav, colon: int) -> Optional[Span]:
    """The run of words and numbers right before a colon."""
    first = None
    j = nav.prev(colon)
    while j is not None and tokens[j].kind in (TokenKind.WORD, TokenKind.NUMBER):
        first = j
        j = nav.prev(j)
    if first is None:
        return None
    return Span(tokens[first].span.start, tokens[colon].span.start)


def _is_echo(tokens: list[Token], nav: _Nav, word: int, colon: int, sentence_start: int) -> bool:
    """Capitalized hyphenated word repeating an earlier word of its sentence."""
    tok = tokens[word]
    if "-" not in tok.surface:
        return False
    parts = {p.casefold() for p in tok.surface.split("-") if p}
    for j in nav.content:
        if j >= colon:
            break
        prior = tokens[j]
        if prior.span.start >= sentence_start and prior.kind is TokenKind.WORD \
                and prior.surface.casefold() in parts:
            return True
    return False


def pass_colon(tokens: list[Token], lexicon: Lexicon, marks: list[BoundaryMark],
               config: CascadeConfig = CascadeConfig()) -> tuple[list[BoundaryMark], list[TraceEvent]]:
    nav = _Nav(tokens)
    hard = _hard_ends(marks)
    marks = list(marks)
    trace: list[TraceEvent] = []

    for i, colon in enumerate(tokens):
        if colon.kind is not TokenKind.COLON:
            continue

        def decide(rule, boundary, evidence=None):
            if boundary:
                marks.append(BoundaryMark(colon.span.end, MarkKind.HARD_END, "colon"))
            trace.append(TraceEvent("colon", colon.span, rule,
                                    Decision.BOUNDARY if boundary else Decision.NO_BOUNDARY,
                                    evidence))

        j = nav.next(i)
        if j is None:
            decide("colon.end-of-text", False)
            continue
        quote = j if _is_quote_open(tokens[j]) else None
        k = nav.next(j) if quote is not None else j
        first = tokens[k] if k is not None else None

        if first is not None and first.kind is TokenKind.NUMBER and quote is None:
            if config.paper2024:
                decide("colon.digit-2024", True)
            else:
                decide("colon.digit", False)
            continue
        if not config.colon_indicator_rule:
            capital = first is not None and first.kind is TokenKind.WORD and first.initial_capital
            decide("colon.capital" if capital else "colon.no-capital", capital)
            continue

        window = _colon_window(tokens, nav, i)
        match = lexicon.match_indicator(tokens, window) if window is not None else None
        evidence = match.span if match is not None else None

        if first is None or first.kind is not TokenKind.WORD:
            decide("colon.other", False)
            continue
        if quote is not None:
            if match is not None:
                decide("colon.indicator", False, evidence)
                marks.append(BoundaryMark(tokens[quote].span.end, MarkKind.NESTED_OPEN,
                                          "colon", NodeKind.QUOTED))
            elif first.initial_capital:
                decide("colon.no-indicator", True)
            else:
                decide("colon.lowercase", False)
            continue
        if not first.initial_capital:
            decide("colon.lowercase", False)
            continue
        sentence_start = 0
        n = bisect.bisect_right(hard, colon.span.start)
        if n:
            sentence_start = hard[n - 1]
        if _is_echo(tokens, nav, k, i, sentence_start):
            if config.paper2024 and config.nest_colon_complements:
                decide("colon.echo-complement-2024", False)
                marks.append(BoundaryMark(colon.span.end, MarkKind.NESTED_OPEN,
                                          "colon", NodeKind.COLON_COMPLEMENT))
            else:
                decide("colon.echo", False)
            continue
        if match is None:
            decide("colon.no-indicator", True)
        elif match.entry.category is Category.PRESENTATIVE:
            decide("colon.presentative", True, evidence)
        else:
            decide("colon.indicator", False, evidence)
    return marks, trace


# ---------------------------------------------------------------------------
# pass 3: paired delimiters

@dataclass
class _Region:
    open: int
    close: int
    kind: NodeKind
    status: str = "inline"  # inline | transparent | nested
    close_pos: int = 0


def find_regions(tokens: list[Token]) -> list[tuple[int, int]]:
    """Balanced (open, close) token index pairs, ordered by closing index.

    Unmatched delimiters are left out; they stay ordinary characters.
    """
    stack: list[int] = []
    pairs = []
    for i, tok in enumerate(tokens):
        if tok.kind is TokenKind.OPEN_DELIM:
            stack.append(i)
        elif tok.kind is TokenKind.CLOSE_DELIM:
            for depth in range(len(stack) - 1, -1, -1):
                if PAIRS.get(tokens[stack[depth]].surface) == tok.surface:
                    pairs.append((stack[depth], i))
                    del stack[depth:]
                    break
    return pairs


def _attributed(tokens: list[Token], lexicon: Optional[Lexicon], interior: list[int]) -> bool:
    """A speech verb inside the quote, past its first word."""
    if lexicon is None:
        return False
    words = [tokens[i] for i in interior if tokens[i].kind is TokenKind.WORD]
    for n in range(1, len(words)):
        entry = _word_matches(lexicon, words, n, 1)
        if entry is not None and entry.category is Category.VERB:
            return True
    return False


def _paren_initial_sentence(tokens: list[Token], interior: list[int]) -> bool:
    """'(Dominique B.)': capitalized parenthetical closed by an initial's period."""
    if len(interior) < 2:
        return False
    first, last = tokens[interior[0]], tokens[interior[-1]]
    before = tokens[interior[-1] - 1]
    return (first.kind is TokenKind.WORD and first.initial_capital
            and last.surface == "." and before.kind is TokenKind.WORD and before.is_single_capital)


def pass_paired_delimiters(tokens: list[Token], marks: list[BoundaryMark],
                           config: CascadeConfig = CascadeConfig(),
                           lexicon: Optional[Lexicon] = None) -> tuple[list[BoundaryMark], list[TraceEvent]]:
    nav = _Nav(tokens)
    hard = _hard_ends(marks)
    term_hard = _hard_ends(marks, "terminators")
    forced = {m.position for m in marks if m.origin == "colon" and m.node_kind is NodeKind.QUOTED}
    pending = [m for m in marks if m.origin == "colon" and m.node_kind is NodeKind.COLON_COMPLEMENT]
    out = [m for m in marks if m.kind is MarkKind.HARD_END]
    trace: list[TraceEvent] = []

    regions: list[_Region] = []
    for o, c in find_regions(tokens):
        opener = tokens[o].surface
        kind = NodeKind.QUOTED if opener in QUOTE_CHARS else NodeKind.PARENTHETICAL
        regions.append(_Region(o, c, kind))

    for region in regions:
        o, c = region.open, region.close
        open_tok, close_tok = tokens[o], tokens[c]
        interior = nav.between(o, c)
        allowed = config.nest_quotes if region.kind is NodeKind.QUOTED else config.nest_parentheses
        inner = [r for r in regions if o < r.open and r.close < c and r.status != "transparent"]

        def shielded(p):
            return any(tokens[r.open].span.end <= p <= tokens[r.close].span.start for r in inner)

        last_start = tokens[interior[-1]].span.start if interior else None
        breaks = [p for p in term_hard
                  if open_tok.span.end <= p and last_start is not None and p <= last_start
                  and not shielded(p)]
        prev = nav.prev(o)
        at_start = (prev is None or tokens[prev].kind is TokenKind.OPEN_DELIM
                    or _any_in(hard, tokens[prev].span.end, open_tok.span.start))
        nxt = nav.next(c)
        ends = nxt is None or _any_in(hard, close_tok.span.end, tokens[nxt].span.start)

        rule = None
        if not interior:
            rule = "empty"
        elif open_tok.span.end in forced:
            rule = "colon-reported-speech"
        elif breaks:
            if not at_start:
                rule = "interior-sentences"
            elif not ends:
                rule = "block-continues"
            elif region.kind is NodeKind.QUOTED and _attributed(tokens, lexicon, interior):
                rule = "attributed-quote-block"
            else:
                region.status = "transparent"
                trace.append(TraceEvent("paired_delimiters", open_tok.span,
                                        "transparent-dialogue", Decision.INLINE_DELIMITER))
                continue
        elif (config.paper2024 and region.kind is NodeKind.PARENTHETICAL
              and _paren_initial_sentence(tokens, interior)):
            rule = "paren-initial-2024"

        if rule is None or rule == "empty":
            trace.append(TraceEvent("paired_delimiters", open_tok.span,
                                    rule or "no-interior-sentence", Decision.INLINE_DELIMITER))
            continue
        if not allowed:
            region.status = "transparent"
            trace.append(TraceEvent("paired_delimiters", open_tok.span,
                                    rule + ".disabled", Decision.INLINE_DELIMITER))
            continue
        region.status = "nested"
        last = tokens[interior[-1]]
        region.close_pos = close_tok.span.start if last.kind is TokenKind.TERMINATOR else close_tok.span.end
        out.append(BoundaryMark(open_tok.span.end, MarkKind.NESTED_OPEN, "paired_delimiters", region.kind))
        out.append(BoundaryMark(region.close_pos, MarkKind.NESTED_CLOSE, "paired_delimiters"))
        trace.append(TraceEvent("paired_delimiters", open_tok.span, rule, Decision.OPEN_NESTED))
        trace.append(TraceEvent("paired_delimiters", close_tok.span, rule, Decision.CLOSE_NESTED))

    nested = [(tokens[r.open].span.end, r.close_pos) for r in regions if r.status == "nested"]
    end_of_text = tokens[nav.content[-1]].span.end if nav.content else 0
    for mark in pending:
        start = mark.position
        limit = min((hi for lo, hi in nested if lo <= start < hi), default=end_of_text)
        close = limit
        for h in hard:
            if h <= start:
                continue
            if h > limit:
                break
            if not any(start <= lo < h < hi for lo, hi in nested):
                close = h
                break
        out.append(BoundaryMark(start, MarkKind.NESTED_OPEN, "colon", NodeKind.COLON_COMPLEMENT))
        out.append(BoundaryMark(close, MarkKind.NESTED_CLOSE, "colon"))
        trace.append(TraceEvent("paired_delimiters", Span(start, close), "colon-complement",
                                Decision.OPEN_NESTED))
    return out, trace


# ---------------------------------------------------------------------------
# pass 4: dashes

def _frames(marks: list[BoundaryMark]) -> list[tuple[int, int]]:
    """(open, close) positions of nested frames, from balanced marks."""
    stack, frames = [], []
    for mark in sorted(marks, key=lambda m: (m.position, _RANK[m.kind])):
        if mark.kind is MarkKind.NESTED_OPEN:
            stack.append(mark.position)
        elif mark.kind is MarkKind.NESTED_CLOSE and stack:
            frames.append((stack.pop(), mark.position))
    return frames


def pass_dashes(tokens: list[Token], marks: list[BoundaryMark],
                config: CascadeConfig = CascadeConfig()) -> tuple[list[BoundaryMark], list[TraceEvent]]:
    nav = _Nav(tokens)
    marks = list(marks)
    trace: list[TraceEvent] = []
    frames = _frames(marks)

    def nested_at(p: int) -> bool:
        return any(lo < p < hi for lo, hi in frames)

    hard = _hard_ends(marks)
    dialogue: list[int] = []
    for i in nav.content:
        tok = tokens[i]
        if tok.kind is not TokenKind.DASH or nested_at(tok.span.start):
            continue
        prev = nav.prev(i)
        if prev is None or _any_in(hard, tokens[prev].span.end, tok.span.start):
            dialogue.append(i)
            continue
        gap = "".join(t.surface for t in tokens[prev + 1:i])
        if "\n" in gap:
            position = tokens[prev].span.end
            marks.append(BoundaryMark(position, MarkKind.HARD_END, "dashes"))
            bisect.insort(hard, position)
            trace.append(TraceEvent("dashes", tok.span, "line-break", Decision.BOUNDARY))
            dialogue.append(i)

    if not dialogue:
        return marks, trace

    end_of_text = tokens[nav.content[-1]].span.end
    repliques = []
    for i in dialogue:
        start = tokens[i].span.start
        end = next((h for h in hard if h > start and not nested_at(h)), end_of_text)
        repliques.append((i, end))

    blocks: list[list[tuple[int, int]]] = []
    for i, end in repliques:
        if blocks:
            last_dash, last_end = blocks[-1][-1]
            between = [j for j in nav.between(last_dash, i) if tokens[j].span.start >= last_end]
            if not between:
                blocks[-1].append((i, end))
                continue
        blocks.append([(i, end)])

    if not config.nest_dashes:
        return marks, trace
    include = config.include_dash_in_sentence
    for block in blocks:
        if len(block) < 2 and include:
            trace.append(TraceEvent("dashes", tokens[block[0][0]].span, "single-replique",
                                    Decision.NO_BOUNDARY))
            continue
        interior_ends = {end for _, end in block[:-1]}
        marks = [m for m in marks
                 if not (m.kind is MarkKind.HARD_END and m.position in interior_ends)]
        for i, end in block:
            dash = tokens[i]
            opened = dash.span.start if include else dash.span.end
            marks.append(BoundaryMark(opened, MarkKind.NESTED_OPEN, "dashes", NodeKind.DASH_REPLIQUE))
            marks.append(BoundaryMark(end, MarkKind.NESTED_CLOSE, "dashes"))
            trace.append(TraceEvent("dashes", dash.span, "dash-replique", Decision.OPEN_NESTED))
    return marks, trace


# ---------------------------------------------------------------------------
# tree building

class _Open:
    __slots__ = ("start", "end", "kind", "children")

    def __init__(self, kind: NodeKind):
        self.start: Optional[int] = None
        self.end: Optional[int] = None
        self.kind = kind
        self.children: list[SentenceNode] = []

    def node(self) -> SentenceNode:
        span = Span(self.start, self.end)
        children = tuple(self.children)
        # a lone child covering its whole parent adds nothing
        while len(children) == 1 and children[0].span == span:
            children = children[0].children
        return SentenceNode(span, self.kind, children)


class _Frame:
    __slots__ = ("kind", "done", "current")

    def __init__(self, kind: NodeKind):
        self.kind = kind
        self.done: list[SentenceNode] = []
        self.current: Optional[_Open] = None

    def close(self) -> None:
        if self.current is not None and self.current.start is not None:
            self.done.append(self.current.node())
        self.current = None


def build_tree(tokens: list[Token], marks: list[BoundaryMark]) -> SentenceTree:
    ordered = sorted(marks, key=lambda m: (m.position, _RANK[m.kind]))
    stack = [_Frame(NodeKind.PRINCIPAL)]
    pending = 0

    def apply(mark: BoundaryMark) -> None:
        top = stack[-1]
        if mark.kind is MarkKind.HARD_END:
            top.close()
        elif mark.kind is MarkKind.NESTED_OPEN:
            if top.current is None:
                top.current = _Open(top.kind)
            stack.append(_Frame(mark.node_kind or NodeKind.QUOTED))
        else:
            if len(stack) == 1:
                raise CascadeError("NestedClose without NestedOpen at byte %d" % mark.position)
            top.close()
            stack.pop()
            stack[-1].current.children.extend(top.done)

    for tok in tokens:
        while pending < len(ordered) and ordered[pending].position <= tok.span.start:
            apply(ordered[pending])
            pending += 1
        if not tok.is_content:
            continue
        top = stack[-1]
        if top.current is None:
            top.current = _Open(top.kind)
        for frame in stack:
            current = frame.current
            if current is None:
                continue
            if current.start is None:
                current.start = tok.span.start
            current.end = tok.span.end
    for mark in ordered[pending:]:
        apply(mark)
    if len(stack) != 1:
        raise CascadeError("%d NestedOpen mark(s) never closed" % (len(stack) - 1))
    stack[0].close()
    length = tokens[-1].span.end if tokens else 0
    return SentenceTree(tuple(stack[0].done), Span(0, length))


def _split_at_markup(tree: SentenceTree, tokens: list[Token], trace: list[TraceEvent]) -> SentenceTree:
    """Split sentences whose span would cross an element boundary of the source markup."""
    markup = [t for t in tokens if t.kind is TokenKind.MARKUP]
    if not markup:
        return tree
    content = [t for t in tokens if t.is_content]

    def crossing(span: Span) -> list[Token]:
        stack, bad = [], []
        for tag in markup:
            if not (span.start < tag.span.start and tag.span.end < span.end):
                continue
            body = tag.surface[1:-1].strip()
            if body.startswith(("!", "?")) or body.endswith("/"):
                continue
            if body.startswith("/"):
                if stack:
                    stack.pop()
                else:
                    bad.append(tag)
            else:
                stack.append(tag)
        return sorted(bad + stack, key=lambda t: t.span.start)

    def fix(node: SentenceNode) -> list[SentenceNode]:
        children = [piece for child in node.children for piece in fix(child)]
        cuts = crossing(node.span)
        if not cuts:
            return [SentenceNode(node.span, node.kind, tuple(children))]
        bounds = [node.span.start] + [p for tag in cuts for p in (tag.span.start, tag.span.end)] + [node.span.end]
        pieces = []
        for lo, hi in zip(bounds[::2], bounds[1::2]):
            inside = [t for t in content if lo <= t.span.start and t.span.end <= hi]
            if not inside:
                continue
            span = Span(inside[0].span.start, inside[-1].span.end)
            kids = tuple(c for c in children if span.contains(c.span))
            while len(kids) == 1 and kids[0].span == span:
                kids = kids[0].children
            pieces.append(SentenceNode(span, node.kind, kids))
        for tag in cuts:
            trace.append(TraceEvent("markup", tag.span, "markup-crossing-split", Decision.BOUNDARY))
        return pieces

    roots = tuple(piece for root in tree.roots for piece in fix(root))
    return SentenceTree(roots, tree.source_span)


# ---------------------------------------------------------------------------
# entry points

def segment(tokens: list[Token], lexicon: Lexicon,
            config: CascadeConfig = CascadeConfig()) -> tuple[SentenceTree, list[TraceEvent]]:
    tokens = resolve_ambiguous_quotes(tokens)
    marks, trace = pass_terminators(tokens, lexicon)
    marks, colon_trace = pass_colon(tokens, lexicon, marks, config)
    marks, paired_trace = pass_paired_delimiters(tokens, marks, config, lexicon)
    marks, dash_trace = pass_dashes(tokens, marks, config)
    trace = trace + colon_trace + paired_trace + dash_trace
    tree = build_tree(tokens, marks)
    tree = _split_at_markup(tree, tokens, trace)
    return tree, trace


def segment_text(source: Source, lexicon: Optional[Lexicon] = None,
                 config: CascadeConfig = CascadeConfig(),
                 tokenizer_config: TokenizerConfig = TokenizerConfig()) -> tuple[SentenceTree, list[TraceEvent]]:
    if lexicon is None:
        lexicon = default_lexicon()
    return segment(tokenize(source, tokenizer_config), lexicon, config)


def decompose(tokens: list[Token], sentence: SentenceNode, lexicon: Lexicon) -> list[DecompositionItem]:
    """Cut a sentence into text segments, indicators and punctuation."""
    inside = [t for t in tokens if t.is_content and sentence.span.contains(t.span)]
    items: list[DecompositionItem] = []
    run: list[Token] = []

    def flush_run() -> None:
        k = 0
        segment_start = None
        segment_end = None
        words = run
        while k < len(words):
            hit = 0
            if words[k].kind is TokenKind.WORD:
                for n in range(min(lexicon.max_locution_len, len(words) - k), 0, -1):
                    chunk = words[k:k + n]
                    if any(w.kind is not TokenKind.WORD for w in chunk):
                        continue
                    if _word_matches(lexicon, chunk, n - 1, n) is not None:
                        hit = n
                        break
            if hit:
                if segment_start is not None:
                    items.append(DecompositionItem(Span(segment_start, segment_end), Label.SEGMENT))
                    segment_start = None
                items.append(DecompositionItem(
                    Span(words[k].span.start, words[k + hit - 1].span.end), Label.INDICATEUR))
                k += hit
                continue
            if segment_start is None:
                segment_start = words[k].span.start
            segment_end = words[k].span.end
            k += 1
        if segment_start is not None:
            items.append(DecompositionItem(Span(segment_start, segment_end), Label.SEGMENT))
        run.clear()

    for tok in inside:
        if tok.kind in (TokenKind.WORD, TokenKind.NUMBER):
            run.append(tok)
            continue
        flush_run()
        items.append(DecompositionItem(tok.span, Label.PONCTUATION))
    flush_run()
    return items


def format_decomposition(items: list[DecompositionItem], source: Source) -> str:
    """Brace notation: {text,.Label} for segments and indicators, bare punctuation.

    Items are separated by a space only where the source has whitespace
    between them.
    """
    parts = []
    previous = None
    for item in items:
        if previous is not None and previous != item.span.start:
            parts.append(" ")
        text = item.span.text(source)
        if item.label is Label.PONCTUATION:
            parts.append(text)
        else:
            parts.append("{%s,.%s}" % (text, item.label.value))
        previous = item.span.end
    return "".join(parts)
