"""Candidate extraction and the popularity / concordance / informativeness features."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from ..corpus import CorpusStats, Document, Ngram, popularity

# Fixed feature ordering used by the quality model.
FEATURE_NAMES = (
    "popularity",
    "pmi",
    "pkl",
    "has_inner_stopword",
    "avg_idf",
    "quote_prob",
    "bracket_prob",
    "capitalized_prob",
)

_OPEN_QUOTES = set("\"'“‘«")
_CLOSE_QUOTES = set("\"'”’»")
_OPEN_BRACKETS = set("([{<")
_CLOSE_BRACKETS = set(")]}>")


@dataclass
class PhraseCandidate:
    tokens: Ngram
    frequency: int
    rectified_frequency: int = -1

    def __post_init__(self):
        if self.rectified_frequency < 0:
            self.rectified_frequency = self.frequency


@dataclass
class PhraseFeatures:
    popularity: float
    pmi: float
    pkl: float
    has_inner_stopword: float
    avg_idf: float
    quote_prob: float
    bracket_prob: float
    capitalized_prob: float

    def vector(self) -> list[float]:
        return [getattr(self, name) for name in FEATURE_NAMES]


@dataclass
class OccurrenceContext:
    """Surface context counters aggregated over all occurrences of one n-gram."""

    total: int = 0
    quoted: int = 0
    bracketed: int = 0
    capitalized: int = 0


def extract_candidates(stats: CorpusStats, min_support: int,
                       max_n: int) -> list[PhraseCandidate]:
    """All stored n-grams (single words included) with frequency >= min_support."""
    if min_support < 1:
        raise ValueError(f"min_support must be >= 1, got {min_support}")
    picked = [(gram, count) for gram, count in stats.ngram_counts.items()
              if count >= min_support and len(gram) <= max_n]
    # deterministic order: most frequent first, ties lexicographic
    picked.sort(key=lambda item: (-item[1], item[0]))
    return [PhraseCandidate(tokens=gram, frequency=count)
            for gram, count in picked]


def pmi(stats: CorpusStats, u_l: Ngram, u_r: Ngram) -> float:
    """Pointwise mutual information of the two parts, natural log.

    ``log(p(v) / (p(u_l) p(u_r)))`` with ``v`` the concatenation. A part
    with zero probability yields ``+inf`` so such splits never minimize.
    """
    v = tuple(u_l) + tuple(u_r)
    p_v = popularity(stats, v)
    p_l = popularity(stats, u_l)
    p_r = popularity(stats, u_r)
    if p_l == 0.0 or p_r == 0.0:
        return math.inf
    if p_v == 0.0:
        return -math.inf
    return math.log(p_v / (p_l * p_r))


def best_split(stats: CorpusStats, v: Ngram) -> tuple[Ngram, Ngram]:
    """The left/right split of ``v`` minimizing PMI; ties go to the leftmost."""
    v = tuple(v)
    if len(v) < 2:
        raise ValueError("best_split requires a multi-word sequence")
    best = None
    best_score = math.inf
    for i in range(1, len(v)):
        u_l, u_r = v[:i], v[i:]
        score = pmi(stats, u_l, u_r)
        if best is None or score < best_score:
            best = (u_l, u_r)
            best_score = score
    return best


def pkl(stats: CorpusStats, v: Ngram, u_l: Ngram, u_r: Ngram) -> float:
    """Pointwise KL divergence: p(v) * PMI(u_l, u_r); 0 when v is unseen."""
    p_v = popularity(stats, v)
    if p_v == 0.0:
        return 0.0
    p_l = popularity(stats, u_l)
    p_r = popularity(stats, u_r)
    if p_l == 0.0 or p_r == 0.0:
        raise ValueError(f"unseen split part for {v!r}")
    return p_v * math.log(p_v / (p_l * p_r))


def collect_occurrence_contexts(
        docs: Iterable[Document], candidates: Iterable[Ngram],
        max_n: int) -> dict[Ngram, OccurrenceContext]:
    """One pass over the corpus counting quote/bracket/capital contexts.

    An occurrence counts as quoted (bracketed) when an opening mark is
    attached before its first token and a closing mark after its last.
    """
    wanted = {tuple(c) for c in candidates}
    contexts: dict[Ngram, OccurrenceContext] = {c: OccurrenceContext()
                                                for c in wanted}
    for doc in docs:
        for section in doc.sections:
            if section.sentences is None:
                continue
            for sentence in section.sentences:
                tokens = sentence.tokens
                lowered = [t.surface.lower() for t in tokens]
                for n in range(1, max_n + 1):
                    for i in range(len(tokens) - n + 1):
                        gram = tuple(lowered[i:i + n])
                        ctx = contexts.get(gram)
                        if ctx is None:
                            continue
                        first, last = tokens[i], tokens[i + n - 1]
                        ctx.total += 1
                        if (any(c in _OPEN_QUOTES for c in first.pre)
                                and any(c in _CLOSE_QUOTES for c in last.post)):
                            ctx.quoted += 1
                        if (any(c in _OPEN_BRACKETS for c in first.pre)
                                and any(c in _CLOSE_BRACKETS for c in last.post)):
                            ctx.bracketed += 1
                        if first.surface[:1].isupper():
                            ctx.capitalized += 1
    return contexts


def compute_features(stats: CorpusStats, candidate: PhraseCandidate,
                     occurrence_contexts: dict[Ngram, OccurrenceContext],
                     stopwords: set[str]) -> PhraseFeatures:
    """Full feature vector for one candidate.

    Unigrams get pmi = pkl = 0 and the stopword flag checks the word itself.
    A stopword anywhere in the candidate (edge or inner) sets the flag.
    """
    gram = candidate.tokens
    pop = popularity(stats, gram)
    if len(gram) >= 2:
        u_l, u_r = best_split(stats, gram)
        pmi_score = pmi(stats, u_l, u_r)
        pkl_score = pkl(stats, gram, u_l, u_r)
    else:
        pmi_score = 0.0
        pkl_score = 0.0
    has_stopword = float(any(w in stopwords for w in gram))
    idf_sum = 0.0
    for word in gram:
        df = max(stats.doc_freq.get((word,), 1), 1)
        idf_sum += math.log(stats.num_docs / df)
    avg_idf = idf_sum / len(gram)
    ctx = occurrence_contexts.get(gram, OccurrenceContext())
    denom = ctx.total if ctx.total > 0 else 1
    return PhraseFeatures(
        popularity=pop,
        pmi=pmi_score,
        pkl=pkl_score,
        has_inner_stopword=has_stopword,
        avg_idf=avg_idf,
        quote_prob=ctx.quoted / denom,
        bracket_prob=ctx.bracketed / denom,
        capitalized_prob=ctx.capitalized / denom,
    )


def load_phrase_list(path) -> set[Ngram]:
    """Phrase list file: one phrase per line, tokens space-separated, lowercased."""
    phrases = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = tuple(line.strip().lower().split())
            if tokens:
                phrases.add(tokens)
    return phrases


def load_stopwords(path) -> set[str]:
    """Stopword file: one word per line."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word:
                words.add(word)
    return words
