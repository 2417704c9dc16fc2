"""Precision / recall / F1 against gold span annotations.

Two assessment modes over character spans: full match (a prediction must
equal a gold span exactly) and partial match (one or more overlapping
characters count as a hit). Matching is one-to-one and greedy in
prediction order, so every number here is bit-reproducible.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass

from .errors import EvaluationError
from .util import canonical_json

Span = tuple[int, int]


@dataclass
class GoldDocument:
    doc_id: str
    text: str
    gold_spans: list[Span]
    label: str = "SKILL"

    def __post_init__(self):
        self.gold_spans = [tuple(s) for s in self.gold_spans]
        last_end = -1
        for start, end in sorted(self.gold_spans):
            if not (0 <= start < end <= len(self.text)):
                raise EvaluationError(
                    f"{self.doc_id}: gold span ({start}, {end}) out of bounds "
                    f"for text of length {len(self.text)}")
            if start < last_end:
                raise EvaluationError(
                    f"{self.doc_id}: overlapping gold spans")
            last_end = end


@dataclass
class PredictionSet:
    doc_id: str
    pred_spans: list[Span]

    def __post_init__(self):
        self.pred_spans = [tuple(s) for s in self.pred_spans]
        for start, end in self.pred_spans:
            if end <= start or start < 0:
                raise EvaluationError(
                    f"{self.doc_id}: bad predicted span ({start}, {end})")


@dataclass
class EvalReport:
    full: dict[str, float]
    partial: dict[str, float]
    counts: dict[str, dict[str, int]]
    num_docs: int
    num_gold: int
    num_pred: int

    FORMAT = "skillex.eval-report"
    FORMAT_VERSION = 1

    def to_json(self) -> dict:
        return {
            "format": self.FORMAT,
            "format_version": self.FORMAT_VERSION,
            "full": self.full,
            "partial": self.partial,
            "counts": self.counts,
            "num_docs": self.num_docs,
            "num_gold": self.num_gold,
            "num_pred": self.num_pred,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "EvalReport":
        if payload.get("format") != cls.FORMAT:
            raise EvaluationError(
                f"not an evaluation report: {payload.get('format')!r}")
        if payload.get("format_version") != cls.FORMAT_VERSION:
            raise EvaluationError(f"unsupported report format version "
                                  f"{payload.get('format_version')!r}")
        return cls(full=payload["full"], partial=payload["partial"],
                   counts=payload["counts"], num_docs=payload["num_docs"],
                   num_gold=payload["num_gold"], num_pred=payload["num_pred"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(self.to_json()))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "EvalReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _overlap(a: Span, b: Span) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _prf(tp: int, num_pred: int, num_gold: int) -> dict[str, float]:
    precision = tp / num_pred if num_pred > 0 else 0.0
    recall = tp / num_gold if num_gold > 0 else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return {"precision": precision, "recall": recall, "f1": f1}


def _match_doc(gold_spans: list[Span], pred_spans: list[Span],
               exact: bool) -> int:
    """One-to-one greedy matching in prediction order; returns TP count."""
    golds = sorted(gold_spans)
    used = [False] * len(golds)
    tp = 0
    for pred in pred_spans:
        for gi, gold in enumerate(golds):
            if used[gi]:
                continue
            hit = pred == gold if exact else _overlap(pred, gold)
            if hit:
                used[gi] = True
                tp += 1
                break
    return tp


def evaluate(gold: list[GoldDocument],
             preds: list[PredictionSet]) -> EvalReport:
    """Corpus-level full and partial match scores.

    Gold documents without predictions count as all-miss; predictions for
    unknown documents are an error. Precision over an empty prediction set
    is 0 by convention.
    """
    by_id = {g.doc_id: g for g in gold}
    if len(by_id) != len(gold):
        raise EvaluationError("duplicate gold doc_id")
    pred_by_id: dict[str, PredictionSet] = {}
    for p in preds:
        if p.doc_id not in by_id:
            raise EvaluationError(f"prediction for unknown doc_id "
                                  f"{p.doc_id!r}")
        if p.doc_id in pred_by_id:
            raise EvaluationError(f"duplicate prediction set for doc_id "
                                  f"{p.doc_id!r}")
        for start, end in p.pred_spans:
            if end > len(by_id[p.doc_id].text):
                raise EvaluationError(
                    f"{p.doc_id}: predicted span ({start}, {end}) out of "
                    f"bounds for text of length {len(by_id[p.doc_id].text)}")
        pred_by_id[p.doc_id] = p
    num_gold = sum(len(g.gold_spans) for g in gold)
    num_pred = sum(len(p.pred_spans) for p in preds)
    tp_full = 0
    tp_partial = 0
    for g in gold:
        spans = pred_by_id[g.doc_id].pred_spans if g.doc_id in pred_by_id else []
        tp_full += _match_doc(g.gold_spans, spans, exact=True)
        tp_partial += _match_doc(g.gold_spans, spans, exact=False)
    counts = {
        "full": {"tp": tp_full, "fp": num_pred - tp_full,
                 "fn": num_gold - tp_full},
        "partial": {"tp": tp_partial, "fp": num_pred - tp_partial,
                    "fn": num_gold - tp_partial},
    }
    return EvalReport(full=_prf(tp_full, num_pred, num_gold),
                      partial=_prf(tp_partial, num_pred, num_gold),
                      counts=counts, num_docs=len(gold),
                      num_gold=num_gold, num_pred=num_pred)


def _phrase_pattern(phrase) -> re.Pattern:
    """Word-boundary anchored, case-insensitive pattern for a token sequence.

    Underscores inside tokens match underscore or whitespace in the text, so
    a multiword unit written ``machine_learning`` still aligns against
    ``machine learning``.
    """
    if isinstance(phrase, str):
        tokens = phrase.split()
    else:
        tokens = list(phrase)
    if not tokens:
        raise EvaluationError("cannot align an empty phrase")
    parts = [re.escape(tok).replace("_", r"[_\s]+") for tok in tokens]
    return re.compile(r"(?<!\w)" + r"\s+".join(parts) + r"(?!\w)",
                      re.IGNORECASE)


def span_align(text: str, phrase) -> list[Span]:
    """Character spans of every non-overlapping occurrence of the phrase."""
    spans = [m.span() for m in _phrase_pattern(phrase).finditer(text)]
    if not spans:
        warnings.warn(f"phrase {phrase!r} not found in text", stacklevel=2)
    return spans


def spans_from_phrases(text: str, phrases) -> list[Span]:
    """Align a phrase list to one text; deduplicated, sorted spans."""
    spans = set()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for phrase in phrases:
            spans.update(span_align(text, phrase))
    return sorted(spans)


def load_gold_jsonl(path) -> list[GoldDocument]:
    """JSONL rows ``{"doc_id", "text", "spans": [[start, end], ...]}``."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                docs.append(GoldDocument(doc_id=record["doc_id"],
                                         text=record["text"],
                                         gold_spans=[tuple(s) for s
                                                     in record["spans"]]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise EvaluationError(
                    f"{path}: malformed gold record on line {lineno}: "
                    f"{exc}") from exc
    return docs


def save_gold_jsonl(docs: list[GoldDocument], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in docs:
            record = {"doc_id": g.doc_id, "text": g.text,
                      "spans": [list(s) for s in g.gold_spans]}
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_predictions_jsonl(path) -> list[PredictionSet]:
    """JSONL rows ``{"doc_id", "spans": [[start, end], ...]}``."""
    preds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                preds.append(PredictionSet(doc_id=record["doc_id"],
                                           pred_spans=[tuple(s) for s
                                                       in record["spans"]]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise EvaluationError(
                    f"{path}: malformed prediction record on line {lineno}: "
                    f"{exc}") from exc
    return preds


def save_predictions_jsonl(preds: list[PredictionSet], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in preds:
            record = {"doc_id": p.doc_id,
                      "spans": [list(s) for s in p.pred_spans]}
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
