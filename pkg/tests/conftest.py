import pathlib
import re
from collections import defaultdict

import pytest

from nestseg.cascade import CascadeConfig, Mode
from nestseg.corpus_io import normalize_tag_spacing, parse_annotated, read_corpus
from nestseg.lexicon import default_lexicon

ROOT = pathlib.Path(__file__).parent
DATA = ROOT / "data"
CITATIONS = pathlib.Path(__file__).parents[1] / "src" / "nestseg" / "data" / "citations.xml"

PAPER2024 = CascadeConfig(known_divergences_mode=Mode.PAPER2024)
EXPECTED = CascadeConfig()


def read_figure(name):
    return (DATA / "figures" / (name + ".txt")).read_text(encoding="utf-8")


def project_figure(figure, source):
    """Place a figure's tags on source, matching non-whitespace characters.

    Opening tags go right before the next visible character and closing
    tags right after the previous one, which is the whitespace-insensitive
    reading of a printed figure.  Returns (source, tree).
    """
    pieces = re.split(r"(</?s>)", normalize_tag_spacing(figure))
    out = []
    pos = 0
    for piece in pieces:
        if piece in ("<s>", "</s>"):
            if piece == "<s>":
                while pos < len(source) and source[pos].isspace():
                    out.append(source[pos])
                    pos += 1
            out.append(piece)
            continue
        for ch in piece:
            if ch.isspace():
                continue
            while pos < len(source) and source[pos].isspace():
                out.append(source[pos])
                pos += 1
            if pos >= len(source) or source[pos] != ch:
                raise ValueError("figure text departs from source at %r" % source[pos:pos + 20])
            out.append(ch)
            pos += 1
    out.append(source[pos:])
    return parse_annotated("".join(out))


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def citations():
    return {doc.id: doc.source for doc in read_corpus(CITATIONS)}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


_outcomes = defaultdict(list)
_titles = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = _criterion_of.get(report.nodeid)
    if number is not None:
        _outcomes[number].append(report.outcome)


_criterion_of = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            number, title = marker.args
            _criterion_of[item.nodeid] = number
            _titles[number] = title


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        status = "PASS" if all(r == "passed" for r in results) else "FAIL"
        passed = sum(r == "passed" for r in results)
        terminalreporter.write_line("criterion %d: %s  %s (%d/%d checks)"
                                    % (number, status, _titles[number], passed, len(results)))
