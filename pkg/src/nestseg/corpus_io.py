"""Corpus reading and the inline ``<s>`` annotation format.

Annotated text is the source with ``<s>`` inserted where a sentence starts and
``</s>`` where it ends.  Stripping those tags gives the source back exactly.
"""

from __future__ import annotations

import enum
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Union

from .model import NodeKind, SentenceNode, SentenceTree, Span, as_bytes

OPEN_TAG = "<s>"
CLOSE_TAG = "</s>"
_TAG_RE = re.compile(r'<s(?:\s+kind="(\w+)")?>|</s>')


class CorpusFormat(str, enum.Enum):
    PLAIN = "plain"
    XML = "xml"


class CorpusError(ValueError):
    """Unreadable corpus or malformed annotation, with a location."""


@dataclass(frozen=True)
class CorpusDocument:
    id: str
    source: str
    format: CorpusFormat = CorpusFormat.PLAIN
    # character offsets of the source inside its file, used to stitch output back
    location: Optional[tuple[int, int]] = None


def guess_format(path: Union[str, Path]) -> CorpusFormat:
    return CorpusFormat.XML if str(path).lower().endswith(".xml") else CorpusFormat.PLAIN


def _read_text(path: Union[str, Path]) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except UnicodeDecodeError as exc:
        raise CorpusError("%s: invalid UTF-8 at byte %d" % (path, exc.start)) from None
    except OSError as exc:
        raise CorpusError("%s: %s" % (path, exc.strerror or exc)) from None


def split_blocks(text: str) -> Iterator[tuple[int, int]]:
    """Character ranges of blank-line separated blocks."""
    start = None
    end = 0
    pos = 0
    for line in text.splitlines(keepends=True):
        if line.strip():
            if start is None:
                start = pos
            end = pos + len(line.rstrip("\r\n"))
        elif start is not None:
            yield start, end
            start = None
        pos += len(line)
    if start is not None:
        yield start, end


def iter_corpus(path: Union[str, Path], format: Optional[CorpusFormat] = None,
                container: str = "citation") -> Iterator[CorpusDocument]:
    format = CorpusFormat(format) if format is not None else guess_format(path)
    text = _read_text(path)
    if format is CorpusFormat.PLAIN:
        for n, (start, end) in enumerate(split_blocks(text), 1):
            yield CorpusDocument(str(n), text[start:end], format, (start, end))
        return
    yield from _iter_xml(path, text, container)


def read_corpus(path: Union[str, Path], format: Optional[CorpusFormat] = None,
                container: str = "citation") -> list[CorpusDocument]:
    return list(iter_corpus(path, format, container))


def _iter_xml(path, text: str, container: str) -> Iterator[CorpusDocument]:
    if not text.strip():
        return
    try:
        ET.fromstring(text.encode("utf-8"))
    except ET.ParseError as exc:
        line, column = exc.position
        raise CorpusError("%s:%d:%d: malformed XML: %s" % (path, line, column, exc)) from None
    name = re.escape(container)
    pattern = re.compile(r"<%s(\s[^>]*)?(/>|>(.*?)</%s\s*>)" % (name, name), re.DOTALL)
    seen = set()
    for n, match in enumerate(pattern.finditer(text), 1):
        attrs = match.group(1) or ""
        ident = re.search(r'\b(?:xml:id|id|n)\s*=\s*"([^"]*)"', attrs)
        doc_id = ident.group(1) if ident else str(n)
        if doc_id in seen:
            raise CorpusError("%s: duplicate document id %r" % (path, doc_id))
        seen.add(doc_id)
        if match.group(3) is None:
            start = end = match.end()
            source = ""
        else:
            start, end = match.span(3)
            source = match.group(3)
        yield CorpusDocument(doc_id, source, CorpusFormat.XML, (start, end))


def emit_annotated(doc: Union[CorpusDocument, str], tree: SentenceTree, with_kinds: bool = False) -> str:
    """Insert ``<s>``/``</s>`` around every node of tree.

    With ``with_kinds`` nested nodes carry a ``kind`` attribute so that
    parse_annotated can restore them exactly.
    """
    source = doc.source if isinstance(doc, CorpusDocument) else doc
    data = as_bytes(source)
    inserts: list[tuple[int, int, int, bytes]] = []

    def visit(node: SentenceNode, depth: int) -> None:
        tag = OPEN_TAG
        if with_kinds and node.kind is not NodeKind.PRINCIPAL:
            tag = '<s kind="%s">' % node.kind.value
        # ends sort before starts at one offset; deeper ends first, outer starts first
        inserts.append((node.span.start, 1, depth, tag.encode()))
        for child in node.children:
            visit(child, depth + 1)
        inserts.append((node.span.end, 0, -depth, CLOSE_TAG.encode()))

    for root in tree.roots:
        visit(root, 0)
    inserts.sort(key=lambda item: item[:3])
    out = []
    last = 0
    for position, _, _, tag in inserts:
        out.append(data[last:position])
        out.append(tag)
        last = position
    out.append(data[last:])
    return b"".join(out).decode("utf-8")


def strip_tags(text: str) -> str:
    return _TAG_RE.sub("", text)


def parse_annotated(text: str) -> tuple[str, SentenceTree]:
    """Recover (source, tree) from annotated text.

    Nodes without a kind attribute are Principal at the root and otherwise
    get a kind guessed from the delimiter right before them.
    """
    pieces = []
    offset = 0
    last = 0
    stack: list[tuple[int, Optional[str], list[SentenceNode]]] = []
    roots: list[SentenceNode] = []
    for match in _TAG_RE.finditer(text):
        chunk = text[last:match.start()].encode("utf-8")
        pieces.append(chunk)
        offset += len(chunk)
        last = match.end()
        if match.group().startswith("<s"):
            stack.append((offset, match.group(1), []))
            continue
        if not stack:
            raise CorpusError("unbalanced </s> at character %d" % match.start())
        start, kind, children = stack.pop()
        node = (start, offset, kind, tuple(children))
        if stack:
            stack[-1][2].append(node)
        else:
            roots.append(node)
    if stack:
        raise CorpusError("unclosed <s> opened at byte %d of the source" % stack[-1][0])
    chunk = text[last:].encode("utf-8")
    pieces.append(chunk)
    data = b"".join(pieces)
    source = data.decode("utf-8")

    def build(raw, parent: bool, previous: Optional[SentenceNode] = None) -> SentenceNode:
        start, end, kind, children = raw
        if kind is not None:
            node_kind = NodeKind(kind)
        elif not parent:
            node_kind = NodeKind.PRINCIPAL
        elif previous is not None and not data[previous.span.end:start].strip():
            # a sibling right before: same delimiter block
            node_kind = previous.kind
        else:
            node_kind = _guess_kind(data, start)
        built: list[SentenceNode] = []
        for child in children:
            built.append(build(child, True, built[-1] if built else None))
        return SentenceNode(Span(start, end), node_kind, tuple(built))

    tree = SentenceTree(tuple(build(r, False) for r in roots), Span(0, len(data)))
    return source, tree


def _guess_kind(data: bytes, start: int) -> NodeKind:
    before = data[:start].decode("utf-8", errors="ignore").rstrip()
    after = data[start:start + 4].decode("utf-8", errors="ignore")
    if after[:1] in "-–—" and after[:1]:
        return NodeKind.DASH_REPLIQUE
    if not before:
        return NodeKind.QUOTED
    ch = before[-1]
    if ch in "([":
        return NodeKind.PARENTHETICAL
    if ch in "-–—":
        return NodeKind.DASH_REPLIQUE
    if ch == ":":
        return NodeKind.COLON_COMPLEMENT
    return NodeKind.QUOTED


def write_corpus(format: CorpusFormat, pairs, original_text: Optional[str] = None) -> str:
    """Assemble (document, annotated text) pairs into one output text.

    Plain corpora are re-joined with blank lines; XML corpora get each
    container's content replaced in place.
    """
    pairs = list(pairs)
    if format is CorpusFormat.PLAIN or original_text is None:
        return "".join(out + "\n\n" for _, out in pairs)[:-1]
    out = []
    last = 0
    for doc, annotated in pairs:
        start, end = doc.location
        out.append(original_text[last:start])
        out.append(annotated)
        last = end
    out.append(original_text[last:])
    return "".join(out)


def normalize_tag_spacing(text: str) -> str:
    """Drop whitespace touching an <s> or </s> tag and collapse the rest.

    Used to compare output with figures laid out over several lines.
    """
    text = re.sub(r"\s+", " ", text)
    return re.sub(r"\s*(</?s>)\s*", r"\1", text).strip()
