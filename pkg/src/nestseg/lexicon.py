"""Indicator lexicon and abbreviation list.

Indicators are the lexical cues that, found just before a colon, signal
that the sentence goes on after it.  Entries are inflected surface forms,
matched case-insensitively.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .model import Span, Token, TokenKind

PathLike = Union[str, Path]

_ELISIONS = ("qu'", "c'", "d'", "j'", "l'", "m'", "n'", "s'", "t'")


class Category(str, enum.Enum):
    VERB = "Verb"
    NOUN = "Noun"
    PRESENTATIVE = "Presentative"
    ADVERB = "Adverb"
    LOCUTION = "Locution"
    # never loaded from a file; produced by the capitalized-word fallback
    PROPER_NOUN = "ProperNoun"


FILE_CATEGORIES = {c.value: c for c in Category if c is not Category.PROPER_NOUN}


class LexiconError(ValueError):
    def __init__(self, path: PathLike, line: int, message: str):
        super().__init__("%s:%d: %s" % (path, line, message))
        self.path = str(path)
        self.line = line


@dataclass(frozen=True, order=True)
class IndicatorEntry:
    form: str
    category: Category

    def __post_init__(self):
        if not self.form.strip():
            raise ValueError("empty indicator form")
        if " " in self.form.strip() and self.category is not Category.LOCUTION:
            raise ValueError("only locutions may span several words: %r" % self.form)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(normalize(w) for w in self.form.split())


@dataclass(frozen=True)
class IndicatorMatch:
    entry: IndicatorEntry
    span: Span
    first: int  # token index of the first matched word
    last: int  # token index of the last matched word


def normalize(form: str) -> str:
    return form.replace("’", "'").casefold()


def _candidates(surface: str) -> list[str]:
    """Lookup keys for one word: full form, de-elided form, first hyphen part."""
    full = normalize(surface)
    keys = [full]
    for prefix in _ELISIONS:
        if full.startswith(prefix) and len(full) > len(prefix):
            keys.append(full[len(prefix):])
            break
    for key in list(keys):
        if "-" in key:
            keys.append(key.split("-", 1)[0])
    return keys


@dataclass(frozen=True)
class Lexicon:
    indicators: frozenset[IndicatorEntry] = frozenset()
    abbreviations: frozenset[str] = frozenset()
    _index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for entry in sorted(self.indicators):
            index.setdefault(entry.words, entry)
        self._index.update(index)
        object.__setattr__(self, "_abbrev_index", frozenset(normalize(a) for a in self.abbreviations))

    @property
    def max_locution_len(self) -> int:
        return max((len(words) for words in self._index), default=0)

    def lookup(self, words: tuple[str, ...]) -> Optional[IndicatorEntry]:
        return self._index.get(tuple(normalize(w) for w in words))

    def is_abbreviation(self, surface: str) -> bool:
        return normalize(surface) in self._abbrev_index

    def match_indicator(self, tokens: list[Token], window: Span) -> Optional[IndicatorMatch]:
        return match_indicator(self, tokens, window)


def is_abbreviation(lexicon: Lexicon, token_surface: str) -> bool:
    return lexicon.is_abbreviation(token_surface)


def _word_matches(lexicon: Lexicon, words: list[Token], i: int, n: int) -> Optional[IndicatorEntry]:
    """Entry matching the n words ending at words[i], if any."""
    if n == 1:
        for key in _candidates(words[i].surface):
            entry = lexicon._index.get((key,))
            if entry is not None:
                return entry
        return None
    seq = words[i - n + 1:i + 1]
    keys = tuple(normalize(t.surface) for t in seq[:-1])
    for last in _candidates(seq[-1].surface):
        entry = lexicon._index.get(keys + (last,))
        if entry is not None:
            return entry
    # elided first word: "l'a rendu hommage" style prefixes
    first = _candidates(seq[0].surface)
    for head in first[1:]:
        entry = lexicon._index.get((head,) + tuple(normalize(t.surface) for t in seq[1:]))
        if entry is not None:
            return entry
    return None


def match_indicator(lexicon: Lexicon, tokens: list[Token], window: Span) -> Optional[IndicatorMatch]:
    """Rightmost, longest indicator among the Word tokens inside window.

    Word sequences for locutions must be contiguous in the token stream apart
    from whitespace.  When no entry matches, a capitalized word that is not
    the first word of the window and does not follow a terminator is
    reported as a proper noun.
    """
    positions = [i for i, tok in enumerate(tokens)
                 if tok.is_content and window.contains(tok.span)]
    if not positions:
        return None
    # split window content into runs of consecutive words
    runs: list[list[int]] = []
    current: list[int] = []
    for i in positions:
        if tokens[i].kind is TokenKind.WORD:
            current.append(i)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)

    best = None
    for run in runs:
        words = [tokens[i] for i in run]
        for end in range(len(words)):
            for n in range(min(lexicon.max_locution_len, end + 1), 0, -1):
                entry = _word_matches(lexicon, words, end, n)
                if entry is None:
                    continue
                key = (run[end], n)
                if best is None or key > best[0]:
                    best = (key, entry, run[end - n + 1], run[end])
                break
    if best is not None:
        _, entry, first, last = best
        return IndicatorMatch(entry, Span(tokens[first].span.start, tokens[last].span.end), first, last)

    for i in reversed(positions[1:]):
        tok = tokens[i]
        if tok.kind is not TokenKind.WORD or not tok.initial_capital:
            continue
        prev = _previous_content(tokens, i)
        if prev is not None and tokens[prev].kind is TokenKind.TERMINATOR:
            continue
        entry = IndicatorEntry(tok.surface, Category.PROPER_NOUN)
        return IndicatorMatch(entry, tok.span, i, i)
    return None


def _previous_content(tokens: list[Token], i: int) -> Optional[int]:
    j = i - 1
    while j >= 0 and not tokens[j].is_content:
        j -= 1
    return j if j >= 0 else None


def _lines(path: PathLike) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield number, line


def load_lexicon(indicator_file: PathLike, abbreviation_file: PathLike) -> Lexicon:
    entries = set()
    for number, line in _lines(indicator_file):
        if "\t" not in line:
            raise LexiconError(indicator_file, number, "expected form<TAB>category")
        form, category = (part.strip() for part in line.split("\t", 1))
        if category not in FILE_CATEGORIES:
            raise LexiconError(indicator_file, number, "unknown category %r" % category)
        try:
            entries.add(IndicatorEntry(" ".join(form.split()), FILE_CATEGORIES[category]))
        except ValueError as exc:
            raise LexiconError(indicator_file, number, str(exc)) from None
    abbreviations = set()
    for number, line in _lines(abbreviation_file):
        form = line.strip()
        if not form.endswith(".") or " " in form:
            raise LexiconError(abbreviation_file, number, "abbreviation must be one word ending in '.'")
        abbreviations.add(form)
    return Lexicon(frozenset(entries), frozenset(abbreviations))


def save_lexicon(lexicon: Lexicon, indicator_file: PathLike, abbreviation_file: PathLike) -> None:
    with open(indicator_file, "w", encoding="utf-8") as fh:
        for entry in sorted(lexicon.indicators, key=lambda e: (e.category.value, e.form)):
            fh.write("%s\t%s\n" % (entry.form, entry.category.value))
    with open(abbreviation_file, "w", encoding="utf-8") as fh:
        for form in sorted(lexicon.abbreviations):
            fh.write(form + "\n")


@functools.lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    """The bundled lexicon, loaded once."""
    data = resources.files("nestseg") / "data"
    with resources.as_file(data / "indicators.tsv") as ind, \
            resources.as_file(data / "abbreviations.txt") as abbr:
        return load_lexicon(ind, abbr)
