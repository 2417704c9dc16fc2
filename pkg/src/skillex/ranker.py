"""Rank candidate phrases against their containing section by cosine.

A phrase that genuinely belongs to a requirements section should point in
roughly the same direction as the whole section's embedding; phrases below
a similarity threshold are discarded as irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document, Ngram, Section
from .embedding import EmbeddingError, SifEmbedder, cosine

DEFAULT_THRESHOLD = 0.5

# section kinds a phrase is ranked against by default
RANKED_KINDS = ("requirements",)


@dataclass
class RankedPhrase:
    phrase: Ngram
    score: float
    section_ref: tuple[str, int]  # (document id, section index)
    embeddable: bool = True


def rank_phrases(embedder: SifEmbedder, phrases: list[Ngram],
                 section: Section, section_ref: tuple[str, int] = ("", 0),
                 ) -> list[RankedPhrase]:
    """Score each phrase by cosine against the whole-section embedding.

    Returns one entry per input phrase in stable descending score order.
    Phrases that cannot be embedded score 0 and are flagged, not dropped.
    """
    section_tokens = [t.surface for t in section.tokens()]
    section_vec = embedder.embed(section_tokens)
    ranked = []
    for phrase in phrases:
        try:
            vec = embedder.embed(list(phrase))
        except EmbeddingError:
            ranked.append(RankedPhrase(phrase=tuple(phrase), score=0.0,
                                       section_ref=section_ref,
                                       embeddable=False))
            continue
        ranked.append(RankedPhrase(phrase=tuple(phrase),
                                   score=cosine(vec, section_vec),
                                   section_ref=section_ref))
    ranked.sort(key=lambda r: -r.score)
    return ranked


def rank_document(embedder: SifEmbedder, phrases: list[Ngram], doc: Document,
                  kinds: tuple[str, ...] = RANKED_KINDS) -> list[RankedPhrase]:
    """Rank phrases against every section of the given kinds in a document.

    Sections whose text is entirely out of vocabulary are skipped: nothing
    can be scored against them.
    """
    out: list[RankedPhrase] = []
    for index, section in enumerate(doc.sections):
        if kinds and section.kind not in kinds:
            continue
        try:
            out.extend(rank_phrases(embedder, phrases, section,
                                    section_ref=(doc.id, index)))
        except EmbeddingError:
            continue
    return out


def filter_by_threshold(ranked: list[RankedPhrase],
                        threshold: float = DEFAULT_THRESHOLD,
                        ) -> list[RankedPhrase]:
    """Keep phrases scoring >= threshold, order preserved.

    Equality survives: only strictly lower scores are discarded.
    """
    return [r for r in ranked if r.score >= threshold]


def write_ranked_tsv(ranked: list[RankedPhrase], path) -> None:
    """``doc_id<TAB>section_index<TAB>phrase<TAB>score`` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in ranked:
            doc_id, section_index = r.section_ref
            fh.write(f"{doc_id}\t{section_index}\t"
                     f"{' '.join(r.phrase)}\t{r.score!r}\n")


def read_ranked_tsv(path) -> list[RankedPhrase]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            doc_id, section_index, phrase, score = line.split("\t")
            rows.append(RankedPhrase(phrase=tuple(phrase.split(" ")),
                                     score=float(score),
                                     section_ref=(doc_id, int(section_index))))
    return rows
