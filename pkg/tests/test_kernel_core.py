import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmelab.errors import DimensionMismatch, InvalidSample
from qmelab.kernel_core import (
    KernelSpec,
    embedding_norm,
    eval_kernel,
    gram,
    mean_inner,
    mmd_biased_sq,
)
from qmelab.ledger import CostLedger

# mpmath, 60 digits
E_HALF = 0.606530659712633423603799534991
E_TWO = 0.135335283236612691893999494972
K_01_0 = 0.803265329856316711801899767496  # (1 + e^-1/2) / 2
N_01 = 0.896250707032533789008682656508  # sqrt of the above
MMD_0_1 = 0.786938680574733152792400930018  # 2 - 2 e^-1/2

G = KernelSpec("gaussian", 1.0)
L = KernelSpec("laplacian", 1.0)

finite = st.floats(-5, 5, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=16)


class TestKernelSpec:
    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            KernelSpec("gaussian", 0.0)
        with pytest.raises(ValueError):
            KernelSpec("laplacian", -1.0)

    def test_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            KernelSpec("polynomial", 1.0)

    def test_linear_has_no_unit_diagonal(self):
        assert not KernelSpec("linear").unit_diagonal
        assert G.unit_diagonal and L.unit_diagonal


class TestEvalKernel:
    def test_diagonal_is_one(self):
        assert eval_kernel(G, 0.7, 0.7) == 1.0

    def test_gaussian_closed_form(self):
        assert eval_kernel(G, 0.0, 1.0) == pytest.approx(E_HALF, rel=1e-15)

    def test_laplacian_closed_form(self):
        assert eval_kernel(L, 0.0, 2.0) == pytest.approx(E_TWO, rel=1e-15)

    def test_linear(self):
        assert eval_kernel(KernelSpec("linear"), [1.0, 2.0], [3.0, -1.0]) == 1.0

    def test_bandwidth_scales_distance(self):
        assert eval_kernel(KernelSpec("gaussian", 2.0), 0.0, 2.0) == pytest.approx(E_HALF, rel=1e-15)

    def test_vector_points(self):
        # ||(0,0) - (1,1)||^2 = 2
        assert eval_kernel(G, [0, 0], [1, 1]) == pytest.approx(math.exp(-1.0), rel=1e-15)
        assert eval_kernel(L, [0, 0], [1, 1]) == pytest.approx(E_TWO, rel=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_kernel(G, [0.0, 1.0], [0.0])

    def test_non_finite(self):
        with pytest.raises(InvalidSample):
            eval_kernel(G, math.nan, 0.0)

    @given(finite, finite)
    def test_symmetric_and_bounded(self, x, y):
        for spec in (G, L):
            k = eval_kernel(spec, x, y)
            assert k == eval_kernel(spec, y, x)
            assert 0.0 < k <= 1.0


class TestMeanInner:
    def test_identical_singletons(self):
        assert mean_inner(G, [0.0], [0.0]) == 1.0

    def test_single_term(self):
        assert mean_inner(G, [0.0], [1.0]) == pytest.approx(E_HALF, rel=1e-15)

    def test_two_terms(self):
        assert mean_inner(G, [0.0, 1.0], [0.0]) == pytest.approx(K_01_0, rel=1e-15)

    def test_matches_brute_force_double_loop(self):
        rng = np.random.default_rng(7)
        X, Y = rng.normal(size=(9, 3)), rng.normal(size=(5, 3))
        brute = sum(
            math.exp(-sum((a - b) ** 2 for a, b in zip(x, y)) / 2) for x in X for y in Y
        ) / 45
        assert mean_inner(G, X, Y) == pytest.approx(brute, rel=1e-13)

    def test_unequal_sizes_use_product_normalization(self):
        assert mean_inner(G, [0.0, 0.0, 0.0], [0.0, 1.0]) == pytest.approx(K_01_0, rel=1e-15)

    def test_ledger_counts_all_pairs(self):
        ledger = CostLedger()
        mean_inner(G, np.zeros(7), np.zeros(3), ledger)
        assert ledger.kernel_evals == 21

    def test_empty_sample(self):
        with pytest.raises(InvalidSample):
            mean_inner(G, [], [1.0])

    @settings(max_examples=60)
    @given(samples, samples)
    def test_exactly_symmetric(self, X, Y):
        for spec in (G, L):
            assert mean_inner(spec, X, Y) == mean_inner(spec, Y, X)

    @settings(max_examples=60)
    @given(samples, samples)
    def test_bounded_for_unit_diagonal(self, X, Y):
        assert 0.0 < mean_inner(G, X, Y) <= 1.0

    def test_large_blocks_are_deterministic(self):
        rng = np.random.default_rng(1)
        X, Y = rng.normal(size=3000), rng.normal(size=2500)
        assert mean_inner(G, X, Y) == mean_inner(G, X, Y) == mean_inner(G, Y, X)


class TestGram:
    @settings(max_examples=50)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=16), st.sampled_from([G, L]))
    def test_positive_semidefinite(self, X, spec):
        assert np.linalg.eigvalsh(gram(spec, X)).min() >= -1e-10

    def test_block_shape_and_symmetry(self):
        X = np.linspace(-1, 1, 5)
        K = gram(G, X)
        assert K.shape == (5, 5)
        np.testing.assert_array_equal(K, K.T)
        np.testing.assert_array_equal(np.diag(K), 1.0)


class TestMMD:
    def test_self_is_zero(self):
        assert mmd_biased_sq(G, [0.3, 1.2], [0.3, 1.2]) == 0.0

    def test_two_singletons(self):
        assert mmd_biased_sq(G, [0.0], [1.0]) == pytest.approx(MMD_0_1, rel=1e-14)

    def test_order_invariant(self):
        assert mmd_biased_sq(G, [0.0, 1.0], [1.0, 0.0]) == pytest.approx(0.0, abs=1e-15)

    def test_raw_value_kept(self):
        value, raw = mmd_biased_sq(G, [0.3, 1.2], [1.2, 0.3], return_raw=True)
        assert value >= 0.0
        assert value == max(raw, 0.0)
        assert abs(raw) < 1e-15

    def test_ledger(self):
        ledger = CostLedger()
        mmd_biased_sq(G, np.zeros(3), np.zeros(2), ledger)
        assert ledger.kernel_evals == 9 + 6 + 4

    @settings(max_examples=60)
    @given(samples, samples, st.randoms(use_true_random=False))
    def test_metric_axioms(self, X, Y, rnd):
        for spec in (G, L):
            assert mmd_biased_sq(spec, X, X) == pytest.approx(0.0, abs=1e-12)
            _, raw = mmd_biased_sq(spec, X, Y, return_raw=True)
            assert raw >= -1e-12
            Xp, Yp = list(X), list(Y)
            rnd.shuffle(Xp)
            rnd.shuffle(Yp)
            assert mmd_biased_sq(spec, Xp, Yp) == pytest.approx(mmd_biased_sq(spec, X, Y), abs=1e-12)


class TestEmbeddingNorm:
    def test_singleton(self):
        assert embedding_norm(G, [5.0]) == 1.0

    def test_pair(self):
        assert embedding_norm(G, [0.0, 1.0]) == pytest.approx(N_01, rel=1e-15)

    def test_repeated_point(self):
        assert embedding_norm(G, [0.0, 0.0, 0.0]) == 1.0

    def test_linear_refused(self):
        with pytest.raises(ValueError):
            embedding_norm(KernelSpec("linear"), [1.0])

    @settings(max_examples=60)
    @given(samples, st.sampled_from([G, L]))
    def test_bounds(self, X, spec):
        n = len(X)
        norm = embedding_norm(spec, X)
        assert 1 / math.sqrt(n) - 1e-12 <= norm <= 1.0 + 1e-12
