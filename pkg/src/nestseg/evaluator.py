"""Scoring against gold segmentations and categorizing version differences."""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .model import SentenceTree, Source, TokenKind, flatten
from .tokenizer import TokenizerConfig, tokenize


class EvalCategory(str, enum.Enum):
    CORRECT_PLAIN = "CorrectPlain"
    CORRECT_WITH_INCLUSION = "CorrectWithInclusion"
    CORRECT_DELIMITERS_NO_INCLUSION = "CorrectDelimitersNoInclusion"
    ERROR = "Error"


class DiffCategory(str, enum.Enum):
    UNCHANGED = "Unchanged"
    TOTAL_IMPROVEMENT = "TotalImprovement"
    ALTERNATIVE_NO_GAIN_NO_LOSS = "AlternativeNoGainNoLoss"
    PARTIAL_IMPROVEMENT = "PartialImprovement"
    PERSISTENT_PROBLEM = "PersistentProblem"
    NEW_PROBLEM = "NewProblem"


EVAL_LABELS = {
    EvalCategory.ERROR: "Total erreurs",
    EvalCategory.CORRECT_PLAIN: "Correct sans particularité",
    EvalCategory.CORRECT_WITH_INCLUSION: "Correct avec inclusion",
    EvalCategory.CORRECT_DELIMITERS_NO_INCLUSION: "Correct sans inclusion mais délimiteurs",
}

DIFF_LABELS = {
    DiffCategory.UNCHANGED: "Sans changement",
    DiffCategory.TOTAL_IMPROVEMENT: "Amélioration totale",
    DiffCategory.ALTERNATIVE_NO_GAIN_NO_LOSS: "Alternative sans gain ni perte",
    DiffCategory.PARTIAL_IMPROVEMENT: "Amélioration partielle",
    DiffCategory.PERSISTENT_PROBLEM: "Problème persistant",
    DiffCategory.NEW_PROBLEM: "Nouveau problème",
}

_DELIMITER_KINDS = (TokenKind.COLON, TokenKind.DASH, TokenKind.OPEN_DELIM,
                    TokenKind.CLOSE_DELIM, TokenKind.AMBIGUOUS_QUOTE)


class AlignmentError(ValueError):
    """Corpora to compare do not hold the same documents."""


def has_delimiters(source: Source) -> bool:
    """Colon, standalone dash, parenthesis, bracket or quote anywhere in source."""
    return any(tok.kind in _DELIMITER_KINDS
               for tok in tokenize(source, TokenizerConfig(treat_markup=True)))


def categorize(gold: SentenceTree, system: SentenceTree, source: Source) -> EvalCategory:
    if not gold.same_structure(system):
        return EvalCategory.ERROR
    if gold.has_inclusion:
        return EvalCategory.CORRECT_WITH_INCLUSION
    if has_delimiters(source):
        return EvalCategory.CORRECT_DELIMITERS_NO_INCLUSION
    return EvalCategory.CORRECT_PLAIN


def relevant_inclusion(gold: SentenceTree, system: SentenceTree) -> bool:
    """The system reproduced at least one gold node that has children."""
    wanted = {node.shape() for node in gold.walk() if node.children}
    return any(node.children and node.shape() in wanted for node in system.walk())


def normalized_boundaries(tree: SentenceTree, source: Source) -> set[int]:
    """Sentence ends, each moved back over closing delimiters, dashes and spaces.

    Two segmentations that differ only in whether a closing quote or a dash
    sits inside a sentence get the same boundary set.
    """
    tokens = tokenize(source, TokenizerConfig(treat_markup=True))
    ends = {}
    starts = {}
    for i, tok in enumerate(tokens):
        ends[tok.span.end] = i
        starts[tok.span.start] = i
    skippable = (TokenKind.WHITESPACE, TokenKind.MARKUP, TokenKind.CLOSE_DELIM,
                 TokenKind.DASH, TokenKind.AMBIGUOUS_QUOTE)
    out = set()
    for end in flatten(tree):
        i = ends.get(end)
        while i is not None and i >= 0 and tokens[i].kind in skippable:
            i -= 1
        out.add(tokens[i].span.end if i is not None and i >= 0 else end)
    return out


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def prf(system: set[int], gold: set[int]) -> PRF:
    hits = len(system & gold)
    return _prf(hits, len(system), len(gold))


def _prf(hits: int, n_system: int, n_gold: int) -> PRF:
    if n_system == 0 and n_gold == 0:
        return PRF(1.0, 1.0, 1.0)
    p = hits / n_system if n_system else 0.0
    r = hits / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return PRF(p, r, f)


def categorize_diff(old: SentenceTree, new: SentenceTree, gold: SentenceTree,
                    source: Source) -> DiffCategory:
    """Place one document in the old-versus-new difference taxonomy.

    Checked in order: identical outputs (unchanged when right, persistent
    when wrong), new output right, same boundaries with a different nesting
    (alternative), old output right, boundary F1 gain, otherwise persistent.
    """
    if old.same_structure(new):
        if new.same_structure(gold):
            return DiffCategory.UNCHANGED
        return DiffCategory.PERSISTENT_PROBLEM
    if new.same_structure(gold):
        return DiffCategory.TOTAL_IMPROVEMENT
    old_b = normalized_boundaries(old, source)
    new_b = normalized_boundaries(new, source)
    if old_b == new_b:
        return DiffCategory.ALTERNATIVE_NO_GAIN_NO_LOSS
    if old.same_structure(gold):
        return DiffCategory.NEW_PROBLEM
    gold_b = normalized_boundaries(gold, source)
    if prf(new_b, gold_b).f1 > prf(old_b, gold_b).f1:
        return DiffCategory.PARTIAL_IMPROVEMENT
    return DiffCategory.PERSISTENT_PROBLEM


def round_percent(count: int, total: int, step: float = 0.1) -> float:
    if total == 0:
        return 0.0
    value = 100.0 * count / total
    return round(round(value / step) * step, 6)


@dataclass
class DocumentScore:
    doc_id: str
    category: EvalCategory
    inclusion_also: bool
    boundaries: PRF


@dataclass
class EvalReport:
    counts: dict[EvalCategory, int]
    documents: int
    rows_total: int
    percentages: dict[EvalCategory, float]
    total_correct: int
    total_correct_pct: float
    precision: float
    recall: float
    f1: float
    exact_match_rate: float
    empty: bool = False
    percent_step: float = 0.1
    details: list[DocumentScore] = field(default_factory=list)

    def as_text(self) -> str:
        lines = []
        width = max(len(label) for label in EVAL_LABELS.values())
        for category in EVAL_LABELS:
            lines.append("%-*s  %6d  %5.1f%%" % (width, EVAL_LABELS[category],
                                                 self.counts[category], self.percentages[category]))
        lines.append("%-*s  %6d  %5.1f%%" % (width, "Total correct", self.total_correct,
                                             self.total_correct_pct))
        lines.append("%-*s  %6d" % (width, "Lignes (documents)", self.rows_total))
        lines.append("%-*s  %6d" % (width, "Documents", self.documents))
        lines.append("boundary P/R/F1 = %.4f / %.4f / %.4f" % (self.precision, self.recall, self.f1))
        lines.append("structure exact match = %.4f" % self.exact_match_rate)
        if self.empty:
            lines.append("empty corpus: percentages undefined, reported as 0")
        return "\n".join(lines) + "\n"

    def as_rows(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
        writer.writerow(["record", "key", "count", "percent"])
        for category in EVAL_LABELS:
            writer.writerow(["category", category.value, self.counts[category],
                             "%.1f" % self.percentages[category]])
        writer.writerow(["category", "TotalCorrect", self.total_correct, "%.1f" % self.total_correct_pct])
        writer.writerow(["metric", "precision", "", "%.6f" % self.precision])
        writer.writerow(["metric", "recall", "", "%.6f" % self.recall])
        writer.writerow(["metric", "f1", "", "%.6f" % self.f1])
        writer.writerow(["metric", "exact_match", "", "%.6f" % self.exact_match_rate])
        for d in self.details:
            writer.writerow(["document", d.doc_id, d.category.value,
                             "inclusion" if d.inclusion_also else ""])
        return buf.getvalue()


Pair = tuple  # (doc_id, source, gold tree, system tree)


def align(*corpora: Sequence) -> list[tuple]:
    """Zip parsed corpora of (doc_id, source, tree) and check they line up.

    Returns (doc_id, source, tree_1, tree_2, ...) rows.  Raises AlignmentError
    on a length, id or source text mismatch.
    """
    sizes = {len(c) for c in corpora}
    if len(sizes) > 1:
        raise AlignmentError("corpora hold %s documents" % " vs ".join(str(len(c)) for c in corpora))
    rows = []
    for items in zip(*corpora):
        doc_id, source = items[0][0], items[0][1]
        for other in items[1:]:
            if other[0] != doc_id:
                raise AlignmentError("document id %r does not match %r" % (other[0], doc_id))
            if other[1] != source:
                raise AlignmentError("document %r: source text differs between corpora" % doc_id)
        rows.append((doc_id, source) + tuple(item[2] for item in items))
    return rows


def score_corpus(pairs: Sequence[Pair], percent_step: float = 0.1) -> EvalReport:
    """Aggregate per-document categories into a report.

    A wrong document that still reproduces a gold inclusion is counted in
    the error row and again in the inclusion row, so the row total may
    exceed the number of documents.  Percentages use the row total.
    """
    counts: Counter = Counter({c: 0 for c in EvalCategory})
    hits = n_sys = n_gold = exact = 0
    details = []
    for doc_id, source, gold, system in pairs:
        category = categorize(gold, system, source)
        counts[category] += 1
        also = category is EvalCategory.ERROR and relevant_inclusion(gold, system)
        if also:
            counts[EvalCategory.CORRECT_WITH_INCLUSION] += 1
        g = set(flatten(gold))
        s = set(flatten(system))
        hits += len(g & s)
        n_sys += len(s)
        n_gold += len(g)
        exact += category is not EvalCategory.ERROR
        details.append(DocumentScore(doc_id, category, also, prf(s, g)))
    documents = len(details)
    rows = sum(counts.values())
    correct = rows - counts[EvalCategory.ERROR]
    micro = _prf(hits, n_sys, n_gold) if documents else PRF(0.0, 0.0, 0.0)
    return EvalReport(
        counts=dict(counts),
        documents=documents,
        rows_total=rows,
        percentages={c: round_percent(counts[c], rows, percent_step) for c in EvalCategory},
        total_correct=correct,
        total_correct_pct=round_percent(correct, rows, percent_step),
        precision=micro.precision,
        recall=micro.recall,
        f1=micro.f1,
        exact_match_rate=exact / documents if documents else 0.0,
        empty=documents == 0,
        percent_step=percent_step,
        details=details,
    )


@dataclass
class DiffReport:
    counts: dict[DiffCategory, int]
    rows: list[tuple[str, DiffCategory]]

    @property
    def total(self) -> int:
        return len(self.rows)

    def as_text(self, percent_step: float = 0.1) -> str:
        width = max(len(v) for v in DIFF_LABELS.values())
        lines = ["%-*s  %6d  %5.1f%%" % (width, DIFF_LABELS[c], self.counts[c],
                                         round_percent(self.counts[c], self.total, percent_step))
                 for c in DiffCategory]
        lines.append("%-*s  %6d" % (width, "Total", self.total))
        return "\n".join(lines) + "\n"

    def as_rows(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
        writer.writerow(["record", "key", "value"])
        for c in DiffCategory:
            writer.writerow(["category", c.value, self.counts[c]])
        for doc_id, c in self.rows:
            writer.writerow(["document", doc_id, c.value])
        return buf.getvalue()


def diff_corpus(triples: Iterable[tuple]) -> DiffReport:
    """triples: (doc_id, source, old, new, gold)."""
    counts = Counter({c: 0 for c in DiffCategory})
    rows = []
    for doc_id, source, old, new, gold in triples:
        category = categorize_diff(old, new, gold, source)
        counts[category] += 1
        rows.append((doc_id, category))
    return DiffReport(dict(counts), rows)


def rupture_worksheet(pairs: Sequence[Pair], trace: Optional[dict] = None) -> str:
    """Tab-separated rows for manual rupture annotation.

    One row per wrong document and per correct document with inclusions.
    The rupture and link columns are left empty for the annotator.
    """
    from .corpus_io import emit_annotated

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(["doc_id", "category", "system", "gold", "rules_fired",
                     "rupture_syntaxique", "lien_syntaxique"])
    for doc_id, source, gold, system in pairs:
        category = categorize(gold, system, source)
        if category not in (EvalCategory.ERROR, EvalCategory.CORRECT_WITH_INCLUSION):
            continue
        rules = ""
        if trace and doc_id in trace:
            fired = sorted({event.rule for event in trace[doc_id]})
            rules = ",".join(fired)
        writer.writerow([doc_id, category.value,
                         _one_line(emit_annotated(source, system)),
                         _one_line(emit_annotated(source, gold)), rules, "", ""])
    return buf.getvalue()


def _one_line(text: str) -> str:
    return " ".join(text.split())
