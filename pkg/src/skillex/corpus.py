"""Corpus ingestion, tokenization and n-gram statistics.

Job listings arrive as JSONL documents split into typed sections (title,
description, requirements, ...). This module tokenizes section text and
counts n-grams / document frequencies; every downstream layer (phrase
mining, SIF weighting) reads from the resulting :class:`CorpusStats`.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional

from .errors import CorpusFormatError

SECTION_KINDS = (
    "title",
    "description",
    "compensation",
    "requirements",
    "about_company",
    "contact",
    "other",
)

Ngram = tuple[str, ...]

# Characters stripped from token edges. Kept separately on the token so the
# original context (quotes, brackets, attached punctuation) stays available
# for the informativeness features.
_EDGE_PUNCT = "\"'“”‘’«»()[]{}<>,;:.!?…"

# Sentence boundary: sentence-final punctuation followed by whitespace or
# end of text, or any newline run. The separator is captured so it can be
# re-attached to the preceding token.
_SENT_BOUNDARY = re.compile(r"([.!?…]+(?=\s|$)|[\r\n]+)")


@dataclass
class Token:
    surface: str
    pos_tag: Optional[str] = None
    # punctuation stripped from the raw whitespace piece
    pre: str = ""
    post: str = ""


@dataclass
class TokenizedSentence:
    tokens: list[Token]

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass
class Section:
    kind: str
    text: str
    sentences: Optional[list[TokenizedSentence]] = None

    def __post_init__(self):
        if self.kind not in SECTION_KINDS:
            self.kind = "other"

    def tokens(self) -> list[Token]:
        if self.sentences is None:
            raise ValueError("section is not tokenized yet")
        return [t for sent in self.sentences for t in sent.tokens]


@dataclass
class Document:
    id: str
    sections: list[Section]


# A tokenizer maps raw section text to sentences of tokens.
Tokenizer = Callable[[str], list[TokenizedSentence]]


def _split_token(piece: str) -> Token:
    """Strip edge punctuation from a whitespace piece, keeping it on the side."""
    pre_end = 0
    while pre_end < len(piece) and piece[pre_end] in _EDGE_PUNCT:
        pre_end += 1
    post_start = len(piece)
    while post_start > pre_end and piece[post_start - 1] in _EDGE_PUNCT:
        post_start -= 1
    surface = piece[pre_end:post_start]
    if not surface:
        # pure punctuation piece: keep it verbatim as its own token
        return Token(surface=piece)
    return Token(surface=surface, pre=piece[:pre_end], post=piece[post_start:])


def default_tokenizer(text: str) -> list[TokenizedSentence]:
    """Whitespace tokenizer with sentence splitting on final punctuation/newlines.

    Pre-tokenized input passes through unchanged: tokens joined by spaces,
    multiword units joined by underscore stay single tokens. Edge punctuation
    is stripped into the token's ``pre``/``post`` fields, and the sentence
    boundary punctuation is re-attached to the last token of the sentence so
    that joining all tokens reconstructs the whitespace-normalized text.
    """
    sentences = []
    parts = _SENT_BOUNDARY.split(text)
    # parts alternate chunk, separator, chunk, separator, ...
    for i in range(0, len(parts), 2):
        chunk = parts[i]
        sep = parts[i + 1] if i + 1 < len(parts) else ""
        tokens = [_split_token(p) for p in chunk.split()]
        if tokens:
            boundary = "".join(c for c in sep if c not in "\r\n")
            tokens[-1].post += boundary
            sentences.append(TokenizedSentence(tokens))
    return sentences


def tokenize(section: Section, tokenizer: Tokenizer | None = None) -> Section:
    """Populate ``section.sentences`` in place and return the section."""
    tok = tokenizer or default_tokenizer
    section.sentences = tok(section.text)
    return section


def tokenize_corpus(docs: Iterable[Document],
                    tokenizer: Tokenizer | None = None) -> list[Document]:
    docs = list(docs)
    for doc in docs:
        for section in doc.sections:
            tokenize(section, tokenizer)
    return docs


def load_corpus(path, format: str = "jsonl") -> list[Document]:
    """Load documents from a JSONL file: one ``{"id", "sections"}`` per line."""
    if format != "jsonl":
        raise CorpusFormatError(f"unsupported corpus format: {format!r}")
    docs = []
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                doc_id = record["id"]
                raw_sections = record["sections"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusFormatError(
                    f"{path}: malformed record on line {lineno}: {exc}"
                ) from exc
            if not isinstance(doc_id, str) or not doc_id:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: document id must be a non-empty string")
            if doc_id in seen_ids:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: duplicate document id {doc_id!r}")
            seen_ids.add(doc_id)
            sections = []
            for s in raw_sections:
                try:
                    sections.append(Section(kind=s.get("kind", "other"),
                                            text=s["text"]))
                except (KeyError, TypeError, AttributeError) as exc:
                    raise CorpusFormatError(
                        f"{path}: line {lineno}: bad section: {exc}") from exc
            if not sections:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: document {doc_id!r} has no sections")
            docs.append(Document(id=doc_id, sections=sections))
    return docs


def save_corpus(docs: Iterable[Document], path) -> None:
    """Write documents back out as canonical JSONL (UTF-8, stable key order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record = {
                "id": doc.id,
                "sections": [{"kind": s.kind, "text": s.text} for s in doc.sections],
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


@dataclass
class CorpusStats:
    """Raw n-gram counts over a tokenized corpus.

    Keys are tuples of lowercased token surfaces; n-grams never cross
    sentence boundaries. ``order_totals[n]`` is the total count mass of
    n-grams of length ``n`` and is the popularity denominator for that order.
    """

    max_n: int
    num_docs: int
    total_token_occurrences: int
    ngram_counts: dict[Ngram, int]
    doc_freq: dict[Ngram, int]
    order_totals: dict[int, int] = field(default_factory=dict)

    FORMAT = "skillex.corpus-stats"
    FORMAT_VERSION = 1

    def __post_init__(self):
        if not self.order_totals:
            totals: dict[int, int] = {}
            for gram, count in self.ngram_counts.items():
                totals[len(gram)] = totals.get(len(gram), 0) + count
            self.order_totals = totals

    @cached_property
    def word_counts(self) -> dict[str, int]:
        return {g[0]: c for g, c in self.ngram_counts.items() if len(g) == 1}

    def count(self, gram: Ngram) -> int:
        return self.ngram_counts.get(gram, 0)

    def popularity(self, u: Ngram) -> float:
        count = self.ngram_counts.get(tuple(u), 0)
        if count == 0:
            return 0.0
        return count / self.order_totals[len(u)]

    def merge(self, other: "CorpusStats") -> "CorpusStats":
        """Combine stats of two disjoint corpora (supports sharded counting)."""
        if self.max_n != other.max_n:
            raise ValueError("cannot merge stats built with different max_n")
        counts = Counter(self.ngram_counts)
        counts.update(other.ngram_counts)
        df = Counter(self.doc_freq)
        df.update(other.doc_freq)
        return CorpusStats(
            max_n=self.max_n,
            num_docs=self.num_docs + other.num_docs,
            total_token_occurrences=(self.total_token_occurrences
                                     + other.total_token_occurrences),
            ngram_counts=dict(counts),
            doc_freq=dict(df),
        )

    def to_json(self) -> dict:
        return {
            "format": self.FORMAT,
            "format_version": self.FORMAT_VERSION,
            "max_n": self.max_n,
            "num_docs": self.num_docs,
            "total_token_occurrences": self.total_token_occurrences,
            "ngram_counts": {" ".join(g): c
                             for g, c in sorted(self.ngram_counts.items())},
            "doc_freq": {" ".join(g): c for g, c in sorted(self.doc_freq.items())},
        }

    @classmethod
    def from_json(cls, payload: dict) -> "CorpusStats":
        if payload.get("format") != cls.FORMAT:
            raise CorpusFormatError(f"not a corpus stats artifact: "
                                    f"{payload.get('format')!r}")
        if payload.get("format_version") != cls.FORMAT_VERSION:
            raise CorpusFormatError(
                f"unsupported stats format version {payload.get('format_version')!r}")
        return cls(
            max_n=payload["max_n"],
            num_docs=payload["num_docs"],
            total_token_occurrences=payload["total_token_occurrences"],
            ngram_counts={tuple(k.split(" ")): v
                          for k, v in payload["ngram_counts"].items()},
            doc_freq={tuple(k.split(" ")): v
                      for k, v in payload["doc_freq"].items()},
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, sort_keys=True,
                      indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CorpusStats":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def count_ngrams(docs: Iterable[Document], max_n: int = 6) -> CorpusStats:
    """Count every contiguous token sequence of length 1..max_n per sentence.

    Counting is case-insensitive (keys are lowercased); the original casing
    remains available on the tokens for the occurrence-context features.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    docs = list(docs)
    counts: Counter = Counter()
    doc_freq: Counter = Counter()
    total_tokens = 0
    for doc in docs:
        doc_grams = set()
        for section in doc.sections:
            if section.sentences is None:
                raise ValueError(
                    f"document {doc.id!r} has untokenized sections; "
                    f"run tokenize_corpus first")
            for sentence in section.sentences:
                words = [t.surface.lower() for t in sentence.tokens]
                total_tokens += len(words)
                for n in range(1, max_n + 1):
                    for i in range(len(words) - n + 1):
                        gram = tuple(words[i:i + n])
                        counts[gram] += 1
                        doc_grams.add(gram)
        doc_freq.update(doc_grams)
    return CorpusStats(
        max_n=max_n,
        num_docs=len(docs),
        total_token_occurrences=total_tokens,
        ngram_counts=dict(counts),
        doc_freq=dict(doc_freq),
    )


def popularity(stats, u: Ngram) -> float:
    """Probability of occurrence of ``u``, normalized within its n-gram order.

    ``stats`` is usually a :class:`CorpusStats`; any object exposing a
    compatible ``popularity`` method works (the miner substitutes a
    rectified-count view during quality re-estimation).
    """
    return stats.popularity(tuple(u))
