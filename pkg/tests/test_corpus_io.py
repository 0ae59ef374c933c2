import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings, strategies as st

from conftest import PAPER2024
from nestseg.cascade import segment_text
from nestseg.corpus_io import (CorpusError, CorpusFormat, emit_annotated, iter_corpus,
                               normalize_tag_spacing, parse_annotated, read_corpus, strip_tags,
                               write_corpus)
from nestseg.model import NodeKind
from nestseg.tokenizer import TokenizerConfig

XML = """<?xml version="1.0" encoding="UTF-8"?>
<corpus>
  <citation id="a">Il <i>pleut</i>. Il vente.</citation>
  <citation id="b">« Oui. Non. », dit-il.</citation>
  <note>ignored</note>
  <citation id="c"/>
</corpus>
"""


def test_xml_documents_match_element_count(tmp_path):
    path = tmp_path / "c.xml"
    path.write_text(XML, encoding="utf-8")
    docs = read_corpus(path)
    oracle = ET.parse(path).getroot().findall(".//citation")
    assert len(docs) == len(oracle) == 3
    assert [d.id for d in docs] == [e.get("id") for e in oracle]
    assert docs[0].source == "Il <i>pleut</i>. Il vente."
    assert docs[2].source == ""
    assert all(d.format is CorpusFormat.XML for d in docs)


def test_xml_container_option(tmp_path):
    path = tmp_path / "c.xml"
    path.write_text(XML, encoding="utf-8")
    assert [d.source for d in iter_corpus(path, container="note")] == ["ignored"]


def test_malformed_xml_location(tmp_path):
    path = tmp_path / "bad.xml"
    path.write_text("<corpus>\n<citation>x</corpus>\n", encoding="utf-8")
    with pytest.raises(CorpusError, match=r"bad\.xml:2:"):
        read_corpus(path)


def test_duplicate_ids(tmp_path):
    path = tmp_path / "dup.xml"
    path.write_text('<c><citation id="x">a</citation><citation id="x">b</citation></c>', encoding="utf-8")
    with pytest.raises(CorpusError, match="duplicate"):
        read_corpus(path)


def test_invalid_utf8(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_bytes(b"Il pleut.\xff\n")
    with pytest.raises(CorpusError, match="byte 9"):
        read_corpus(path)


def test_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="nope.txt"):
        read_corpus(tmp_path / "nope.txt")


def test_plain_blocks(tmp_path):
    path = tmp_path / "c.txt"
    path.write_bytes("Un.\r\nDeux.\r\n\r\n\r\nTrois.\n   \nQuatre.".encode())
    docs = read_corpus(path)
    assert [(d.id, d.source) for d in docs] == [("1", "Un.\r\nDeux."), ("2", "Trois."), ("3", "Quatre.")]


def test_empty_plain_corpus(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("", encoding="utf-8")
    assert read_corpus(path) == []
    assert write_corpus(CorpusFormat.PLAIN, []) == ""


def test_write_xml_in_place(tmp_path, lexicon):
    path = tmp_path / "c.xml"
    path.write_text(XML, encoding="utf-8")
    docs = read_corpus(path)
    pairs = []
    for doc in docs:
        tree, _ = segment_text(doc.source, lexicon, tokenizer_config=TokenizerConfig(treat_markup=True))
        pairs.append((doc, emit_annotated(doc, tree)))
    out = write_corpus(CorpusFormat.XML, pairs, XML)
    root = ET.fromstring(out.encode())
    assert len(root.findall(".//citation")) == 3
    assert len(root.findall(".//s")) >= 4
    assert strip_tags(out) == XML


def test_emit_tag_order(citations):
    text = citations["cylindres-quote"]
    tree, _ = segment_text(text, config=PAPER2024)
    out = emit_annotated(text, tree)
    assert out.startswith("<s>« <s>J'ai téléphoné à midi.</s> <s>Les onze")
    assert "matin »</s>, déclare-t-il" in out


def test_parse_guesses_kinds():
    source, tree = parse_annotated("<s>Il dit (<s>oui.</s> <s>Non.</s>) et « <s>Va.</s> » puis : <s>X.</s></s>")
    kinds = [c.kind for c in tree.roots[0].children]
    assert kinds == [NodeKind.PARENTHETICAL, NodeKind.PARENTHETICAL, NodeKind.QUOTED,
                     NodeKind.COLON_COMPLEMENT]
    assert source == "Il dit (oui. Non.) et « Va. » puis : X."


def test_parse_with_kinds_attribute():
    _, tree = parse_annotated('<s><s kind="DashReplique">— A.</s> <s kind="DashReplique">— B.</s></s>')
    assert [c.kind for c in tree.roots[0].children] == [NodeKind.DASH_REPLIQUE] * 2


@pytest.mark.parametrize("bad", ["<s>a</s></s>", "<s><s>a</s>", "<s>a"])
def test_parse_unbalanced(bad):
    with pytest.raises(CorpusError):
        parse_annotated(bad)


def test_round_trips_on_bundled_citations(citations):
    for text in citations.values():
        tree, _ = segment_text(text, config=PAPER2024)
        assert strip_tags(emit_annotated(text, tree)) == text
        assert parse_annotated(emit_annotated(text, tree, with_kinds=True)) == (text, tree)
        source, bare = parse_annotated(emit_annotated(text, tree))
        assert source == text and bare.same_structure(tree)


def test_normalize_tag_spacing():
    assert normalize_tag_spacing("<s> a\n b </s>\n <s>c</s>") == "<s>a b</s><s>c</s>"


_ALPHABET = st.sampled_from(list("abcÉé .!?:«»()—-\"'\n") + ["B.", "Il ", "etc.", "<i>", "</i>"])


@settings(max_examples=300)
@given(st.lists(_ALPHABET, max_size=30).map("".join))
def test_emit_parse_properties(text):
    tree, _ = segment_text(text)
    annotated = emit_annotated(text, tree, with_kinds=True)
    assert strip_tags(annotated) == text
    assert parse_annotated(annotated) == (text, tree)
