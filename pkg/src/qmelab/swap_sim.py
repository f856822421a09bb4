"""Simulated swap test.

The ancilla of a swap test on |a>|b> reads 0 with probability
p0 = (1 + |<a|b>|^2) / 2. Outcomes are sampled straight from that law; the
controlled-swap circuit itself is never built.

Shots are drawn in batches of ``BATCH`` from the substreams
``(seed, TAG_SWAP_BATCH, batch_index)``. A shot reads 0 when its uniform draw
is below p0. Batches are independent, and the merged count is a plain sum.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .fock_sim import PureState, inner
from .ledger import CostLedger
from .rng import TAG_SWAP_BATCH, substream

BATCH = 1 << 16


@dataclass(frozen=True)
class ShotEstimate:
    """Monte-Carlo estimate of a scalar.

    ``shots`` and ``seed`` are None for exact (noise-free) values. ``clamped``
    is set when a physical constraint had to be enforced on the raw estimate.
    """

    value: float
    shots: int | None
    stderr: float
    seed: int | None
    clamped: bool = False

    @classmethod
    def exact(cls, value: float) -> ShotEstimate:
        return cls(float(value), None, 0.0, None)

    def to_dict(self) -> dict:
        return asdict(self)


def swap_probabilities(a: PureState, b: PureState) -> tuple[float, float]:
    """Ancilla outcome probabilities (p0, p1); p0 + p1 == 1 exactly."""
    fidelity = abs(inner(a, b)) ** 2
    p1 = min(0.5, max(0.0, (1.0 - fidelity) / 2.0))
    return 1.0 - p1, p1


def count_zeros(p0: float, shots: int, seed: int) -> int:
    """Number of 0-outcomes among ``shots`` Bernoulli(p0) draws."""
    zeros = 0
    for index, start in enumerate(range(0, shots, BATCH)):
        size = min(BATCH, shots - start)
        rng = substream(seed, TAG_SWAP_BATCH, index)
        zeros += int(np.count_nonzero(rng.random(size) < p0))
    return zeros


def run_swap_shots(
    a: PureState, b: PureState, shots: int, seed: int, ledger: CostLedger | None = None
) -> ShotEstimate:
    """Estimate |<a|b>|^2 = 2 p0 - 1 from ``shots`` simulated swap tests.

    The value is left unclamped and may come out negative.
    """
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots}")
    shots = int(shots)
    p0, _ = swap_probabilities(a, b)
    zeros = count_zeros(p0, shots, seed)
    if ledger is not None:
        ledger.swap_shots += shots
    p_hat = zeros / shots
    stderr = 2.0 * math.sqrt(p_hat * (1.0 - p_hat) / shots)
    return ShotEstimate(2.0 * p_hat - 1.0, shots, stderr, int(seed))


def recover_inner_positive(est: ShotEstimate) -> ShotEstimate:
    """<a|b> = sqrt(|<a|b>|^2), valid only when the overlap is known to be positive.

    Coherent-state superpositions with positive weights have positive overlaps.
    Negative estimates are clamped to 0 and flagged. The error is the delta-method
    value s / (2 sqrt(v)) when v > s; closer to zero that diverges, so the
    half-width sqrt(max(v, 0) + s) - sqrt(max(v, 0)) of the mapped interval is
    reported instead.
    """
    v, s = est.value, est.stderr
    clamped = est.clamped or v < 0.0
    root = math.sqrt(max(v, 0.0))
    if v > s and v > 0.0:
        err = s / (2.0 * root)
    else:
        err = math.sqrt(max(v, 0.0) + s) - root
    return ShotEstimate(root, est.shots, err, est.seed, clamped)
