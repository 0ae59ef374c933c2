"""Command-line front end: segment, eval, diff, trace, lexicon-check.

Exit codes: 0 success, 2 input error, 3 corpora that do not line up.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .cascade import CascadeConfig, CascadeError, Mode, decompose, format_decomposition, segment
from .corpus_io import (CorpusDocument, CorpusError, CorpusFormat, emit_annotated, guess_format,
                        iter_corpus, parse_annotated, write_corpus)
from .evaluator import AlignmentError, align, diff_corpus, rupture_worksheet, score_corpus
from .lexicon import Lexicon, LexiconError, default_lexicon, load_lexicon
from .model import SentenceNode
from .tokenizer import EncodingError, TokenizerConfig, tokenize

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ALIGNMENT = 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# option handling

_BOOL_FIELDS = [f.name for f in fields(CascadeConfig) if f.type in (bool, "bool")]


def read_config_file(path: str) -> dict[str, str]:
    """Flat key=value file; '#' and ';' start comments."""
    parser = configparser.ConfigParser(delimiters=("=",), interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[cascade]\n" + fh.read(), source=path)
    except OSError as exc:
        raise InputError("%s: %s" % (path, exc.strerror)) from None
    except configparser.Error as exc:
        raise InputError("%s: %s" % (path, exc)) from None
    return dict(parser["cascade"])


def build_config(args: argparse.Namespace) -> CascadeConfig:
    values: dict[str, object] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError("--set expects key=value, got %r" % item)
        values[key] = value
    for name in _BOOL_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if args.known_divergences is not None:
        values["known_divergences_mode"] = args.known_divergences
    try:
        return CascadeConfig.from_mapping(values)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def build_lexicon(args: argparse.Namespace) -> Lexicon:
    if args.indicators is None and args.abbreviations is None:
        return default_lexicon()
    from importlib import resources
    data = resources.files("nestseg") / "data"
    indicators = args.indicators or str(data / "indicators.tsv")
    abbreviations = args.abbreviations or str(data / "abbreviations.txt")
    for path in (indicators, abbreviations):
        if not Path(path).is_file():
            raise InputError("%s: lexicon file not found" % path)
    return load_lexicon(indicators, abbreviations)


def _corpus_format(args: argparse.Namespace, path: str) -> CorpusFormat:
    return CorpusFormat(args.format) if args.format else guess_format(path)


def _check_input(path: str) -> None:
    if path != "-" and not Path(path).is_file():
        raise InputError("%s: no such file" % path)


# ---------------------------------------------------------------------------
# per-document work, shared with worker processes

_worker: dict = {}


def _init_worker(lexicon: Lexicon, config: CascadeConfig, tokenizer_config: TokenizerConfig) -> None:
    _worker["lexicon"] = lexicon
    _worker["config"] = config
    _worker["tokenizer"] = tokenizer_config


def _segment_one(doc: CorpusDocument, with_kinds: bool = False) -> str:
    tokens = tokenize(doc.source, _worker["tokenizer"])
    tree, _ = segment(tokens, _worker["lexicon"], _worker["config"])
    return emit_annotated(doc, tree, with_kinds=with_kinds)


def _segment_kinds(doc: CorpusDocument) -> str:
    return _segment_one(doc, True)


def _trace_one(doc: CorpusDocument) -> str:
    tokens = tokenize(doc.source, _worker["tokenizer"])
    lexicon = _worker["lexicon"]
    tree, trace = segment(tokens, lexicon, _worker["config"])
    lines = ["# document %s" % doc.id]
    for event in trace:
        lines.append("trace\t" + event.describe(doc.source))

    def visit(node: SentenceNode, label: str) -> None:
        items = decompose(tokens, node, lexicon)
        lines.append("sentence %s\t%s\t%d-%d\t%s" % (label, node.kind.value, node.span.start,
                                                     node.span.end, format_decomposition(items, doc.source)))
        for n, child in enumerate(node.children, 1):
            visit(child, "%s.%d" % (label, n))

    for n, root in enumerate(tree.roots, 1):
        visit(root, str(n))
    return "\n".join(lines) + "\n"


def _run(func, docs: Iterable[CorpusDocument], jobs: int, init_args: tuple) -> Iterable[tuple[CorpusDocument, str]]:
    """Apply func to each document, in input order, optionally in worker processes."""
    if jobs <= 1:
        _init_worker(*init_args)
        for doc in docs:
            yield doc, func(doc)
        return
    docs = list(docs)
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=init_args) as pool:
        yield from zip(docs, pool.map(func, docs, chunksize=16))


def _tokenizer_config(args: argparse.Namespace, fmt: CorpusFormat) -> TokenizerConfig:
    markup = args.treat_markup if args.treat_markup is not None else fmt is CorpusFormat.XML
    return TokenizerConfig(treat_markup=markup)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _write(args: argparse.Namespace, text: str) -> None:
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_lines(args: argparse.Namespace, chunks: Iterable[str]) -> None:
    out = open(args.output, "w", encoding="utf-8", newline="") if args.output and args.output != "-" else sys.stdout
    try:
        for chunk in chunks:
            out.write(chunk)
    finally:
        if out is not sys.stdout:
            out.close()


# ---------------------------------------------------------------------------
# subcommands

def cmd_segment(args: argparse.Namespace) -> int:
    _check_input(args.input)
    fmt = _corpus_format(args, args.input)
    lexicon = build_lexicon(args)
    config = build_config(args)
    init = (lexicon, config, _tokenizer_config(args, fmt))
    docs = iter_corpus(args.input, fmt, args.container)
    func = _segment_kinds if args.with_kinds else _segment_one
    if fmt is CorpusFormat.XML:
        results = list(_run(func, docs, args.jobs, init))
        _write(args, write_corpus(fmt, results, _read_text(args.input)))
        return EXIT_OK

    def chunks():
        first = True
        for _, annotated in _run(func, docs, args.jobs, init):
            yield ("" if first else "\n") + annotated + "\n"
            first = False

    _write_lines(args, chunks())
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    _check_input(args.input)
    fmt = _corpus_format(args, args.input)
    init = (build_lexicon(args), build_config(args), _tokenizer_config(args, fmt))
    docs = iter_corpus(args.input, fmt, args.container)
    _write_lines(args, (text for _, text in _run(_trace_one, docs, args.jobs, init)))
    return EXIT_OK


def _load_annotated(path: str, args: argparse.Namespace) -> list[tuple]:
    _check_input(path)
    out = []
    for doc in iter_corpus(path, _corpus_format(args, path), args.container):
        try:
            source, tree = parse_annotated(doc.source)
        except CorpusError as exc:
            raise InputError("%s: document %s: %s" % (path, doc.id, exc)) from None
        out.append((doc.id, source, tree))
    return out


def cmd_eval(args: argparse.Namespace) -> int:
    gold = _load_annotated(args.gold, args)
    system = _load_annotated(args.system, args)
    rows = align(gold, system)
    report = score_corpus(rows, percent_step=args.percent_step)
    if args.worksheet:
        with open(args.worksheet, "w", encoding="utf-8", newline="") as fh:
            fh.write(rupture_worksheet(rows))
    if args.report == "tsv":
        _write(args, report.as_rows())
    else:
        _write(args, report.as_text())
    return EXIT_OK


def cmd_diff(args: argparse.Namespace) -> int:
    old = _load_annotated(args.old, args)
    new = _load_annotated(args.new, args)
    gold = _load_annotated(args.gold, args)
    report = diff_corpus(align(old, new, gold))
    if args.report == "tsv":
        _write(args, report.as_rows())
    else:
        _write(args, report.as_text(args.percent_step))
    return EXIT_OK


def cmd_lexicon_check(args: argparse.Namespace) -> int:
    lexicon = build_lexicon(args)
    counts: dict[str, int] = {}
    for entry in lexicon.indicators:
        counts[entry.category.value] = counts.get(entry.category.value, 0) + 1
    lines = ["%s\t%d" % item for item in sorted(counts.items())]
    lines.append("abbreviations\t%d" % len(lexicon.abbreviations))
    lines.append("longest locution\t%d" % lexicon.max_locution_len)
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_lexicon_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--indicators", metavar="PATH", help="indicator file (form<TAB>category)")
    p.add_argument("--abbreviations", metavar="PATH", help="abbreviation file, one per line")


def _add_corpus_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=[f.value for f in CorpusFormat],
                   help="corpus format (default: from file extension)")
    p.add_argument("--container", default="citation", help="XML element holding one document")
    p.add_argument("-o", "--output", help="output file (default: standard output)")


def _add_cascade_options(p: argparse.ArgumentParser) -> None:
    _add_lexicon_options(p)
    p.add_argument("--config", metavar="PATH", help="flat key=value cascade options")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="cascade option override")
    p.add_argument("--known-divergences", choices=[m.value for m in Mode])
    for name in _BOOL_FIELDS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None,
                       action=argparse.BooleanOptionalAction)
    p.add_argument("--treat-markup", default=None, action=argparse.BooleanOptionalAction,
                   help="read <...> as inline markup (default: on for XML)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nestseg", description="Nested sentence segmentation.")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="annotate a corpus with <s> tags")
    p.add_argument("input")
    _add_corpus_options(p)
    _add_cascade_options(p)
    p.add_argument("--with-kinds", action="store_true", help="write kind attributes on nested tags")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("trace", help="show rule decisions and sentence decompositions")
    p.add_argument("input")
    _add_corpus_options(p)
    _add_cascade_options(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("eval", help="score an annotated corpus against gold")
    p.add_argument("gold")
    p.add_argument("system")
    _add_corpus_options(p)
    p.add_argument("--report", choices=["text", "tsv"], default="text")
    p.add_argument("--percent-step", type=float, default=0.1,
                   help="round percentages to this step (0.5 gives half points)")
    p.add_argument("--worksheet", metavar="PATH", help="also write the rupture worksheet")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("diff", help="categorize differences between two system versions")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("gold")
    _add_corpus_options(p)
    p.add_argument("--report", choices=["text", "tsv"], default="text")
    p.add_argument("--percent-step", type=float, default=0.1)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("lexicon-check", help="load lexicon files and report their contents")
    _add_lexicon_options(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lexicon_check)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AlignmentError as exc:
        print("nestseg: alignment error: %s" % exc, file=sys.stderr)
        return EXIT_ALIGNMENT
    except (InputError, CorpusError, LexiconError, EncodingError) as exc:
        print("nestseg: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print("nestseg: %s: %s" % (exc.filename or "", exc.strerror or exc), file=sys.stderr)
        return EXIT_INPUT
    except CascadeError as exc:
        print("nestseg: internal segmentation error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
