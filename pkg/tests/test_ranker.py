"""Phrase-versus-section cosine ranking and threshold filtering."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillex.embedding import SifConfig, SifEmbedder, VectorStore, cosine
from skillex.ranker import (DEFAULT_THRESHOLD, RankedPhrase,
                            filter_by_threshold, rank_document, rank_phrases,
                            read_ranked_tsv, write_ranked_tsv)
from skillex.corpus import Document, Section, tokenize_corpus


def make_embedder(**word_vecs):
    vectors = {w: np.asarray(v, dtype=np.float64)
               for w, v in word_vecs.items()}
    dim = len(next(iter(vectors.values())))
    store = VectorStore(dimension=dim, vectors=vectors)
    return SifEmbedder(store, SifConfig())


def make_section(text, kind="requirements"):
    doc = Document(id="d0", sections=[Section(kind=kind, text=text)])
    return tokenize_corpus([doc])[0].sections[0]


@pytest.fixture()
def embedder():
    return make_embedder(python=[1.0, 0.0, 0.0, 0.0],
                         sql=[0.0, 1.0, 0.0, 0.0],
                         dancing=[0.0, 0.0, 0.0, 1.0],
                         know=[0.1, 0.1, 0.0, 0.0])


class TestRankPhrases:
    def test_aligned_phrase_scores_one(self, embedder):
        section = make_section("python python")
        ranked = rank_phrases(embedder, [("python",)], section)
        assert ranked[0].score == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal_phrase_scores_zero(self, embedder):
        section = make_section("python python")
        ranked = rank_phrases(embedder, [("dancing",)], section)
        assert ranked[0].score == pytest.approx(0.0, abs=1e-15)

    def test_descending_order_matches_recomputed_scores(self, embedder):
        section = make_section("know python and sql")
        phrases = [("dancing",), ("python",), ("sql", "python"), ("sql",)]
        ranked = rank_phrases(embedder, phrases, section)
        section_vec = embedder.embed(
            [t.surface for t in section.tokens()])
        expected = {p: cosine(embedder.embed(list(p)), section_vec)
                    for p in phrases}
        assert [r.score for r in ranked] == \
            sorted(expected.values(), reverse=True)
        for r in ranked:
            assert r.score == expected[r.phrase]

    def test_equal_scores_keep_input_order(self, embedder):
        section = make_section("python sql")
        # both single words have the same angle to the symmetric section
        ranked = rank_phrases(embedder, [("sql",), ("python",)], section)
        assert ranked[0].score == ranked[1].score
        assert [r.phrase for r in ranked] == [("sql",), ("python",)]

    def test_unembeddable_phrase_flagged_not_dropped(self, embedder):
        section = make_section("python sql")
        ranked = rank_phrases(embedder, [("python",), ("qqq",)], section)
        flags = {r.phrase: r.embeddable for r in ranked}
        assert flags[("python",)] is True
        assert flags[("qqq",)] is False
        scores = {r.phrase: r.score for r in ranked}
        assert scores[("qqq",)] == 0.0

    def test_section_ref_attached(self, embedder):
        section = make_section("python")
        ranked = rank_phrases(embedder, [("python",)], section,
                              section_ref=("doc9", 3))
        assert ranked[0].section_ref == ("doc9", 3)


class TestRankDocument:
    def make_doc(self):
        doc = Document(id="j1", sections=[
            Section(kind="title", text="python dancing"),
            Section(kind="requirements", text="know python"),
            Section(kind="requirements", text="know sql"),
        ])
        return tokenize_corpus([doc])[0]

    def test_default_scope_is_requirements(self, embedder):
        ranked = rank_document(embedder, [("python",)], self.make_doc())
        assert {r.section_ref for r in ranked} == {("j1", 1), ("j1", 2)}

    def test_explicit_kinds_widen_scope(self, embedder):
        ranked = rank_document(embedder, [("python",)], self.make_doc(),
                               kinds=("title", "requirements"))
        assert {r.section_ref for r in ranked} == \
            {("j1", 0), ("j1", 1), ("j1", 2)}

    def test_empty_kinds_means_all(self, embedder):
        ranked = rank_document(embedder, [("python",)], self.make_doc(),
                               kinds=())
        assert len(ranked) == 3

    def test_unembeddable_section_skipped(self, embedder):
        doc = Document(id="j2", sections=[
            Section(kind="requirements", text="qqq zzz"),
            Section(kind="requirements", text="know python"),
        ])
        doc = tokenize_corpus([doc])[0]
        ranked = rank_document(embedder, [("python",)], doc)
        assert {r.section_ref for r in ranked} == {("j2", 1)}


class TestFilterByThreshold:
    def entry(self, score):
        return RankedPhrase(phrase=("p",), score=score, section_ref=("d", 0))

    def test_keeps_at_or_above(self):
        ranked = [self.entry(s) for s in [0.9, 0.5, 0.49999]]
        kept = filter_by_threshold(ranked, 0.5)
        assert [r.score for r in kept] == [0.9, 0.5]

    def test_exact_equality_survives(self):
        assert filter_by_threshold([self.entry(0.5)], 0.5) != []

    def test_default_threshold(self):
        assert DEFAULT_THRESHOLD == 0.5
        assert filter_by_threshold([self.entry(0.5)]) != []

    def test_preserves_order_and_objects(self):
        ranked = [self.entry(s) for s in [0.7, 0.6, 0.9]]
        kept = filter_by_threshold(ranked, 0.65)
        assert kept == [ranked[0], ranked[2]]
        assert kept[0] is ranked[0]

    @given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False),
                    max_size=20),
           st.floats(min_value=-1, max_value=1, allow_nan=False),
           st.floats(min_value=-1, max_value=1, allow_nan=False))
    @settings(max_examples=60)
    def test_monotonic_in_threshold(self, scores, t1, t2):
        lo, hi = min(t1, t2), max(t1, t2)
        ranked = [self.entry(s) for s in scores]
        kept_hi = {id(r) for r in filter_by_threshold(ranked, hi)}
        kept_lo = {id(r) for r in filter_by_threshold(ranked, lo)}
        assert kept_hi <= kept_lo

    @given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False),
                    max_size=20))
    @settings(max_examples=30)
    def test_scores_unchanged_by_filter(self, scores):
        ranked = [self.entry(s) for s in scores]
        kept = filter_by_threshold(ranked, 0.25)
        assert all(r.score >= 0.25 for r in kept)
        assert [r.score for r in kept] == [s for s in scores if s >= 0.25]

    def test_commutes_with_sorting(self, embedder):
        section = make_section("know python and sql")
        phrases = [("dancing",), ("python",), ("sql",), ("know",)]
        ranked = rank_phrases(embedder, phrases, section)
        threshold = 0.3
        filtered_then_sorted = sorted(filter_by_threshold(ranked, threshold),
                                      key=lambda r: -r.score)
        sorted_then_filtered = filter_by_threshold(
            sorted(ranked, key=lambda r: -r.score), threshold)
        assert filtered_then_sorted == sorted_then_filtered


class TestRankedTsv:
    def test_round_trip(self, tmp_path, embedder):
        section = make_section("know python and sql")
        ranked = rank_phrases(embedder, [("python",), ("sql", "python")],
                              section, section_ref=("j7", 2))
        path = tmp_path / "ranked.tsv"
        write_ranked_tsv(ranked, path)
        assert read_ranked_tsv(path) == ranked

    def test_write_read_write_byte_identical(self, tmp_path, embedder):
        section = make_section("know python and sql")
        ranked = rank_phrases(embedder, [("python",), ("know", "sql")],
                              section)
        first = tmp_path / "r1.tsv"
        second = tmp_path / "r2.tsv"
        write_ranked_tsv(ranked, first)
        write_ranked_tsv(read_ranked_tsv(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_row_format(self, tmp_path):
        ranked = [RankedPhrase(phrase=("machine", "learning"), score=0.75,
                               section_ref=("doc1", 2))]
        path = tmp_path / "r.tsv"
        write_ranked_tsv(ranked, path)
        assert path.read_text(encoding="utf-8") == \
            "doc1\t2\tmachine learning\t0.75\n"
