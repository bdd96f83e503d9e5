import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from commentscope.similarity import (
    EmbeddingError,
    HashedNgramEmbedder,
    cosine,
    keyword_overlap,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, width=64)
vec5 = arrays(np.float64, 5, elements=finite_floats)


def oracle_cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


class TestCosine:
    def test_identity(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_antisymmetry(self):
        v = np.array([1.0, -2.0, 0.5])
        assert cosine(v, -v) == pytest.approx(-1.0)

    def test_zero_norm_convention(self):
        z = np.zeros(3)
        assert cosine(z, np.array([1.0, 0.0, 0.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(EmbeddingError):
            cosine(np.zeros(3), np.zeros(4))

    @given(vec5, vec5)
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle(self, a, b):
        assert cosine(a, b) == pytest.approx(oracle_cosine(list(a), list(b)), abs=1e-12)

    @given(vec5, vec5)
    @settings(max_examples=100, deadline=None)
    def test_symmetry(self, a, b):
        assert cosine(a, b) == cosine(b, a)

    @given(vec5, vec5, st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=100, deadline=None)
    def test_scale_invariance(self, a, b, k):
        assert cosine(k * a, b) == pytest.approx(cosine(a, b), abs=1e-9)


class TestKeywordOverlap:
    def test_identical(self):
        assert keyword_overlap({"a", "b"}, {"a", "b"}) == 1.0

    def test_disjoint(self):
        assert keyword_overlap({"a"}, {"b"}) == 0.0

    def test_candidate_denominator(self):
        a = {"court", "confirmed", "case"}
        b = {"court", "case", "ruling", "final"}
        assert keyword_overlap(a, b) == pytest.approx(2 / 3)

    def test_empty_candidate(self):
        assert keyword_overlap(set(), {"x"}) == 0.0

    @given(st.sets(st.text(min_size=1, max_size=4), min_size=1, max_size=8))
    @settings(max_examples=50, deadline=None)
    def test_self_overlap_is_one(self, tokens):
        assert keyword_overlap(tokens, tokens) == 1.0

    @given(
        st.sets(st.text(min_size=1, max_size=4), min_size=1, max_size=8),
        st.sets(st.text(min_size=1, max_size=4), max_size=8),
        st.sets(st.text(min_size=1, max_size=4), max_size=4),
    )
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_intersection(self, a, b, extra):
        assert keyword_overlap(a, b | a) >= keyword_overlap(a, b)
        assert keyword_overlap(a, b | extra) >= keyword_overlap(a, b)


class TestHashedNgramEmbedder:
    def test_determinism(self, embedder):
        v1 = embedder.embed("x")
        v2 = embedder.embed("x")
        assert np.array_equal(v1, v2)

    def test_fresh_instances_agree(self):
        a = HashedNgramEmbedder().embed("the verdict")
        b = HashedNgramEmbedder().embed("the verdict")
        assert np.array_equal(a, b)

    def test_empty_input_zero_vector(self, embedder):
        v = embedder.embed("")
        assert float(np.linalg.norm(v)) == 0.0
        assert cosine(v, embedder.embed("anything")) == 0.0

    def test_unit_norm_for_nonempty(self, embedder):
        assert float(np.linalg.norm(embedder.embed("hello world"))) == pytest.approx(1.0)

    def test_near_duplicate_similarity(self, embedder):
        # Frozen regression: 0.9648 with the shipped hashed n-gram embedder.
        sim = cosine(embedder.embed("traffic jam"), embedder.embed("traffic jams"))
        assert sim >= 0.5
        assert sim == pytest.approx(0.9648028571908223, abs=1e-9)

    def test_dimension(self, embedder):
        assert embedder.embed("abc").shape == (256,)

    def test_whitespace_case_normalization(self, embedder):
        assert np.array_equal(embedder.embed("A  B"), embedder.embed("a b"))
