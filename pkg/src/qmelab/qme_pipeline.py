"""Quantum-path estimation of K(X, Y) and the biased MMD.

The normalizations never come from the O(n^2) Gram sum. For a reference point
x_ref the classical O(n) sum c = (1/n) sum_i k(x_ref, x_i) equals
N_X <phi(x_ref)|nu_X>, so N_X = c / <phi(x_ref)|nu_X> with the overlap taken
from a swap test. Then

    K(X, Y) = N_X N_Y <nu_X|nu_Y>,
    MMD_b^2 = N_X^2 + N_Y^2 - 2 K(X, Y),

using three swap-test overlaps in total. Every operation has an exact variant
(overlaps computed from the state vectors) and a sampled one (shots).

Seeds: a norm estimate with seed s draws its shots from
``derive_seed(s, TAG_PIPELINE, 0)``. ``estimate_K`` with seed s hands
``derive_seed(s, TAG_PIPELINE, 1)`` and ``(..., 2)`` to the X and Y norm
estimates and samples the X-Y overlap from ``derive_seed(s, TAG_PIPELINE, 3)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .errors import InvalidSample, OverlapTooSmall, TruncationError
from .fock_sim import PureState, TruncationPolicy, as_scalar_sample, coherent_feature, inner, qme_state
from .kernel_core import KernelSpec, mean_inner
from .ledger import CostLedger
from .rng import TAG_PIPELINE, derive_seed
from .swap_sim import ShotEstimate, recover_inner_positive, run_swap_shots

MAX_DIM = 4096


@dataclass(frozen=True)
class Reference:
    """How x_ref is chosen: sample mean, sample median, or a fixed point."""

    kind: Literal["mean", "median", "point"] = "mean"
    point: float | None = None

    def __post_init__(self):
        if self.kind not in ("mean", "median", "point"):
            raise ValueError(f"unknown reference rule {self.kind!r}")
        if self.kind == "point" and (self.point is None or not math.isfinite(self.point)):
            raise ValueError("an explicit reference needs a finite point")

    @classmethod
    def parse(cls, text: str) -> Reference:
        """``mean``, ``median`` or ``point=<x>``."""
        text = text.strip()
        if text in ("mean", "median"):
            return cls(text)
        if text.startswith("point="):
            try:
                return cls("point", float(text[len("point="):]))
            except ValueError:
                pass
        raise ValueError(f"bad reference {text!r}; expected mean, median or point=<x>")

    def choose(self, X: np.ndarray) -> float:
        if self.kind == "mean":
            return float(np.mean(X))
        if self.kind == "median":
            return float(np.median(X))
        return float(self.point)

    def __str__(self):
        return self.kind if self.kind != "point" else f"point={self.point!r}"


@dataclass(frozen=True)
class QmePipelineConfig:
    sigma: float = 1.0
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    shots_per_inner: int = 100_000
    reference: Reference = field(default_factory=Reference)
    overlap_floor: float = 0.05

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive")
        if int(self.shots_per_inner) != self.shots_per_inner or self.shots_per_inner < 1:
            raise ValueError("shots_per_inner must be a positive integer")
        if not 0.0 < self.overlap_floor < 1.0:
            raise ValueError("overlap_floor must lie in (0, 1)")

    @property
    def kernel(self) -> KernelSpec:
        return KernelSpec("gaussian", self.sigma)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "truncation": {"tol": self.truncation.tol,
                           "x_abs_max_over_sigma": self.truncation.x_abs_max_over_sigma},
            "shots_per_inner": self.shots_per_inner,
            "reference": str(self.reference),
            "overlap_floor": self.overlap_floor,
        }


@dataclass(frozen=True)
class NormEstimate:
    """N_X with everything that went into it."""

    norm: ShotEstimate
    c: float
    x_ref: float
    overlap: ShotEstimate
    ledger: CostLedger

    @property
    def value(self) -> float:
        return self.norm.value

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KXYEstimate:
    value: float
    stderr: float
    c_x: float
    c_y: float
    x_ref: float
    y_ref: float
    overlap_ref_x: ShotEstimate
    overlap_ref_y: ShotEstimate
    overlap_xy: ShotEstimate
    norm_x: ShotEstimate
    norm_y: ShotEstimate
    ledger: CostLedger
    seed: int | None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MMDEstimate(ShotEstimate):
    """Squared-MMD estimate; ``shots`` is the total over all swap tests."""

    kxy: KXYEstimate | None = None


def _check_range(X: np.ndarray, cfg: QmePipelineConfig, name: str) -> None:
    u = float(np.max(np.abs(X))) / cfg.sigma
    if u > cfg.truncation.x_abs_max_over_sigma:
        raise InvalidSample(
            f"{name}: max |x|/sigma = {u:.6g} exceeds the truncation policy range "
            f"{cfg.truncation.x_abs_max_over_sigma:.6g}"
        )


def _run_policy(cfg: QmePipelineConfig, *refs: float) -> TruncationPolicy:
    # the reference may sit outside the data range; widen the cutoff for it
    policy = cfg.truncation.covering(max(abs(r) for r in refs) / cfg.sigma)
    if policy.dim > MAX_DIM:
        raise TruncationError(
            f"reference needs Fock dimension {policy.dim} > {MAX_DIM}; choose x_ref nearer the data"
        )
    return policy


def _overlap(a: PureState, b: PureState, cfg, seed, exact, ledger) -> tuple[ShotEstimate, ShotEstimate]:
    """(recovered <a|b>, raw |<a|b>|^2 estimate)."""
    if exact:
        # positive by construction; the real part drops the ~1e-17 imaginary noise
        o = inner(a, b).real
        return ShotEstimate.exact(o), ShotEstimate.exact(o * o)
    raw = run_swap_shots(a, b, cfg.shots_per_inner, seed, ledger)
    return recover_inner_positive(raw), raw


def _norm(X, nu_X, policy, cfg, seed, exact) -> NormEstimate:
    ledger = CostLedger()
    x_ref = cfg.reference.choose(X)
    c = mean_inner(cfg.kernel, [x_ref], X, ledger)
    psi_ref = coherent_feature(x_ref, cfg.sigma, policy.dim, policy.tol)
    ledger.state_preps += X.size + 1
    swap_seed = None if exact else derive_seed(seed, TAG_PIPELINE, 0)
    overlap, raw = _overlap(psi_ref, nu_X, cfg, swap_seed, exact, ledger)
    o = overlap.value
    if o < cfg.overlap_floor or raw.value <= 3.0 * raw.stderr:
        raise OverlapTooSmall(o, cfg.overlap_floor, x_ref)
    norm = ShotEstimate(c / o, overlap.shots, c * overlap.stderr / (o * o), overlap.seed, overlap.clamped)
    return NormEstimate(norm, c, x_ref, overlap, ledger)


def estimate_norm_via_reference(
    X, cfg: QmePipelineConfig, seed: int | None = None, *, exact: bool = False,
    ledger: CostLedger | None = None,
) -> NormEstimate:
    """Estimate N_X = ||mu_X|| from one reference overlap and an O(n) kernel sum.

    Raises OverlapTooSmall when the recovered overlap falls below
    ``cfg.overlap_floor`` or, on the sampled path, is not resolved from zero
    at three standard errors.
    """
    X = as_scalar_sample(X)
    _check_range(X, cfg, "X")
    if not exact and seed is None:
        raise ValueError("the sampled path needs a seed")
    policy = _run_policy(cfg, cfg.reference.choose(X))
    nu_X = qme_state(X, cfg.sigma, policy)
    est = _norm(X, nu_X, policy, cfg, seed, exact)
    if ledger is not None:
        ledger.absorb(est.ledger)
    return est


def estimate_K(
    X, Y, cfg: QmePipelineConfig, seed: int | None = None, *, exact: bool = False,
    ledger: CostLedger | None = None,
) -> KXYEstimate:
    """K(X, Y) = N_X N_Y <nu_X|nu_Y> on the quantum path.

    Costs |X| + |Y| kernel evaluations, 2(|X| + |Y|) + 2 state preparations
    and 3 * shots_per_inner swap shots, independent of the data values.
    """
    X = as_scalar_sample(X, "X")
    Y = as_scalar_sample(Y, "Y")
    _check_range(X, cfg, "X")
    _check_range(Y, cfg, "Y")
    if not exact and seed is None:
        raise ValueError("the sampled path needs a seed")
    policy = _run_policy(cfg, cfg.reference.choose(X), cfg.reference.choose(Y))
    nu_X = qme_state(X, cfg.sigma, policy)
    nu_Y = qme_state(Y, cfg.sigma, policy)

    def sub(i):
        return None if exact else derive_seed(seed, TAG_PIPELINE, i)

    nx = _norm(X, nu_X, policy, cfg, sub(1), exact)
    ny = _norm(Y, nu_Y, policy, cfg, sub(2), exact)
    xy_ledger = CostLedger(state_preps=X.size + Y.size)
    o, _ = _overlap(nu_X, nu_Y, cfg, None if exact else derive_seed(seed, TAG_PIPELINE, 3), exact, xy_ledger)

    total = nx.ledger + ny.ledger + xy_ledger
    value = nx.norm.value * ny.norm.value * o.value
    rel2 = (nx.overlap.stderr / nx.overlap.value) ** 2 + (ny.overlap.stderr / ny.overlap.value) ** 2
    if o.value > 0:
        rel2 += (o.stderr / o.value) ** 2
        stderr = abs(value) * math.sqrt(rel2)
    else:
        stderr = nx.norm.value * ny.norm.value * o.stderr
    if ledger is not None:
        ledger.absorb(total)
    return KXYEstimate(
        value, stderr, nx.c, ny.c, nx.x_ref, ny.x_ref, nx.overlap, ny.overlap, o,
        nx.norm, ny.norm, total, seed,
    )


def estimate_mmd_sq(
    X, Y, cfg: QmePipelineConfig, seed: int | None = None, *, exact: bool = False,
    ledger: CostLedger | None = None,
) -> MMDEstimate:
    """MMD_b^2 = N_X^2 + N_Y^2 - 2 K(X, Y) on the quantum path.

    The self terms use <nu_X|nu_X> = 1, so no shots are spent on them. The
    sampled value is not clamped and can be slightly negative.
    """
    k = estimate_K(X, Y, cfg, seed, exact=exact, ledger=ledger)
    a, b, o = k.norm_x.value, k.norm_y.value, k.overlap_xy.value
    value = a * a + b * b - 2.0 * k.value
    # first-order propagation through f(a, b, o) = a^2 + b^2 - 2abo
    var = (
        ((2 * a - 2 * b * o) * k.norm_x.stderr) ** 2
        + ((2 * b - 2 * a * o) * k.norm_y.stderr) ** 2
        + ((2 * a * b) * k.overlap_xy.stderr) ** 2
    )
    shots = None if exact else 3 * cfg.shots_per_inner
    clamped = k.overlap_xy.clamped or k.overlap_ref_x.clamped or k.overlap_ref_y.clamped
    return MMDEstimate(value, shots, math.sqrt(var), seed, clamped, k)
