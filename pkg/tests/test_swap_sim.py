import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmelab.cost_model import log_slope
from qmelab.fock_sim import PureState, TruncationPolicy, basis_state, coherent_feature, inner, qme_state
from qmelab.ledger import CostLedger
from qmelab.swap_sim import (
    ShotEstimate,
    count_zeros,
    recover_inner_positive,
    run_swap_shots,
    swap_probabilities,
)

K_01_0 = 0.803265329856316711801899767496
N_01 = 0.896250707032533789008682656508
POLICY = TruncationPolicy(1e-12, 3.0)


@pytest.fixture(scope="module")
def cat_pair():
    """States with |<a|b>| = N_01, i.e. |<a|b>|^2 = K_01_0."""
    return qme_state([0.0, 1.0], 1.0, POLICY), qme_state([0.0], 1.0, POLICY)


def random_state(rng, d=6):
    return PureState.normalized(rng.normal(size=d) + 1j * rng.normal(size=d))


class TestProbabilities:
    def test_identical(self):
        s = coherent_feature(0.2, 1.0, 30)
        assert swap_probabilities(s, s) == (1.0, 0.0)

    def test_orthogonal(self):
        assert swap_probabilities(basis_state(0, 3), basis_state(2, 3)) == (0.5, 0.5)

    def test_cat_pair(self, cat_pair):
        p0, p1 = swap_probabilities(*cat_pair)
        assert p0 == pytest.approx((1 + K_01_0) / 2, abs=1e-12)
        assert p0 == pytest.approx(0.9016327, abs=1e-7)

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def test_law(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_state(rng), random_state(rng)
        p0, p1 = swap_probabilities(a, b)
        assert p0 + p1 == 1.0
        assert 0.0 <= p1 <= 0.5 <= p0 <= 1.0
        assert p0 - p1 == pytest.approx(abs(inner(a, b)) ** 2, abs=1e-14)


class TestRunShots:
    def test_identical_states_exact(self):
        s = coherent_feature(1.0, 1.0, 30)
        for seed in (0, 1, 99):
            est = run_swap_shots(s, s, 1234, seed)
            assert est.value == 1.0 and est.stderr == 0.0

    def test_orthogonal_concentrates_at_zero(self):
        est = run_swap_shots(basis_state(0, 2), basis_state(1, 2), 10**6, 5)
        assert abs(est.value) < 5 * est.stderr
        assert est.stderr == pytest.approx(2 * math.sqrt(0.25 / 1e6), rel=1e-3)

    def test_coverage_at_one_million_shots(self, cat_pair):
        hits = 0
        for seed in range(200):
            est = run_swap_shots(*cat_pair, 10**6, seed)
            hits += abs(est.value - K_01_0) <= 3 * est.stderr
        assert hits >= 0.99 * 200

    def test_deterministic(self, cat_pair):
        a = run_swap_shots(*cat_pair, 100_000, 42)
        b = run_swap_shots(*cat_pair, 100_000, 42)
        assert a == b
        assert run_swap_shots(*cat_pair, 100_000, 43) != a

    def test_ledger_and_fields(self, cat_pair):
        ledger = CostLedger()
        est = run_swap_shots(*cat_pair, 777, 3, ledger)
        assert ledger.swap_shots == 777
        assert est.shots == 777 and est.seed == 3 and not est.clamped

    def test_rejects_bad_shots(self, cat_pair):
        with pytest.raises(ValueError):
            run_swap_shots(*cat_pair, 0, 1)

    def test_unbiased(self, cat_pair):
        vals = np.array([run_swap_shots(*cat_pair, 1000, s).value for s in range(1000)])
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - K_01_0) <= 3 * se

    def test_stderr_scaling(self, cat_pair):
        grid = [10**2, 10**3, 10**4, 10**5, 10**6]
        spread = []
        for shots in grid:
            vals = [run_swap_shots(*cat_pair, shots, 10_000 + s).value for s in range(100)]
            spread.append(np.std(vals, ddof=1))
        assert log_slope(grid, spread) == pytest.approx(-0.5, abs=0.1)

    def test_batches_are_independent_substreams(self):
        # the first batch of a long run is the whole of a one-batch run
        from qmelab.swap_sim import BATCH

        whole = count_zeros(0.7, 2 * BATCH, 9)
        first = count_zeros(0.7, BATCH, 9)
        assert 0 < first < whole


class TestRecover:
    def test_exact_one(self):
        r = recover_inner_positive(ShotEstimate(1.0, 10, 0.0, 0))
        assert r.value == 1.0 and r.stderr == 0.0 and not r.clamped

    def test_square_root(self):
        r = recover_inner_positive(ShotEstimate(K_01_0, 10**6, 1e-4, 0))
        assert r.value == pytest.approx(N_01, abs=1e-12)
        assert r.stderr == pytest.approx(1e-4 / (2 * N_01), rel=1e-12)

    def test_clamp_negative(self):
        r = recover_inner_positive(ShotEstimate(-0.002, 10**5, 0.003, 0))
        assert r.value == 0.0 and r.clamped
        assert r.stderr == pytest.approx(math.sqrt(0.003))

    def test_exact_estimate(self):
        assert recover_inner_positive(ShotEstimate.exact(0.25)).value == 0.5

    def test_json_fields(self):
        d = ShotEstimate(0.5, 10, 0.1, 7, True).to_dict()
        assert d == {"value": 0.5, "shots": 10, "stderr": 0.1, "seed": 7, "clamped": True}
