"""Pure states on a truncated Fock space.

A data point x is mapped to the coherent state with real amplitude u = x/sigma,

    |phi(x)> = exp(-u^2/2) sum_n u^n / sqrt(n!) |n>,

whose overlaps reproduce the Gaussian kernel exp(-(x - x')^2 / (2 sigma^2)).
The empirical embedding of a sample is the normalized equal-weight
superposition of its coherent states (a cat state).

The Fock basis is cut at dimension d. The squared amplitude on |n> is the
Poisson(u^2) weight of n, so the mass lost by truncation is a Poisson tail;
``min_truncation_dim`` picks d from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidSample, TruncationError
from .ledger import CostLedger

DEFAULT_TOL = 1e-12
# above this |u| the multiplicative recurrence would start from a denormal
_LOG_DOMAIN_U = 26.0


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm complex amplitude vector over |0>, ..., |d-1>.

    ``lost_tail_mass`` is the probability the untruncated state had on |n>=d,
    removed before renormalization.
    """

    amplitudes: np.ndarray
    lost_tail_mass: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size == 0:
            raise ValueError("a state needs at least one amplitude")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes have norm {norm!r}; use PureState.normalized()")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, vector, lost_tail_mass: float = 0.0) -> PureState:
        vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(vec)
        if not norm > 1e-300:
            raise ValueError("cannot normalize a zero vector")
        return cls(vec / norm, lost_tail_mass)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "lost_tail_mass": float(self.lost_tail_mass),
        }

    @classmethod
    def from_dict(cls, data: dict) -> PureState:
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        if len(amps) != int(data["dim"]):
            raise ValueError("dim does not match the number of amplitudes")
        return cls.normalized(amps, float(data.get("lost_tail_mass", 0.0)))


def basis_state(n: int, d: int) -> PureState:
    vec = np.zeros(d, dtype=np.complex128)
    vec[n] = 1.0
    return PureState(vec)


@dataclass(frozen=True)
class TruncationPolicy:
    """Tolerated tail mass and the largest |x|/sigma the cutoff must cover."""

    tol: float = DEFAULT_TOL
    x_abs_max_over_sigma: float = 3.0
    dim: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tol}")
        if not (self.x_abs_max_over_sigma >= 0 and math.isfinite(self.x_abs_max_over_sigma)):
            raise ValueError("x_abs_max_over_sigma must be finite and non-negative")
        object.__setattr__(self, "dim", min_truncation_dim(self.x_abs_max_over_sigma, self.tol))

    def covering(self, u_abs: float) -> TruncationPolicy:
        """Same tolerance, range widened to include ``u_abs`` if needed."""
        if u_abs <= self.x_abs_max_over_sigma:
            return self
        return TruncationPolicy(self.tol, float(u_abs))


def _poisson_log_pmf(lam: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=np.float64)
    if lam == 0.0:
        out = np.full(n.shape, -np.inf)
        out[0] = 0.0
        return out
    # log n! accumulated by summing logs, no factorials
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(n[1:]))))
    return -lam + n * math.log(lam) - log_fact


def _tail_cutoff(lam: float) -> int:
    # far enough past the mean that the remaining weights are below 1e-300
    return int(lam + 40.0 * math.sqrt(lam) + 200)


def poisson_tails(lam: float) -> np.ndarray:
    """tails[d] = sum_{n>=d} e^-lam lam^n / n!, by direct summation from the top."""
    pmf = np.exp(_poisson_log_pmf(lam, _tail_cutoff(lam)))
    return np.cumsum(pmf[::-1])[::-1]


def lost_mass(u: float, d: int) -> float:
    """Tail mass of the coherent state with amplitude ``u`` beyond cutoff ``d``."""
    tails = poisson_tails(u * u)
    return float(tails[d]) if d < len(tails) else 0.0


def min_truncation_dim(u_max: float, tol: float = DEFAULT_TOL) -> int:
    """Smallest d whose Poisson(u^2) tail beyond d is <= tol for every |u| <= u_max.

    The tail at fixed d grows with u, so the worst case is u = u_max.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tolerance must lie in (0, 1), got {tol}")
    u_max = abs(float(u_max))
    tails = poisson_tails(u_max * u_max)
    ok = np.nonzero(tails <= tol)[0]
    return max(1, int(ok[0]))


def coherent_amplitudes(u: np.ndarray, d: int) -> np.ndarray:
    """Untruncated-normalization amplitudes e^{-u^2/2} u^n / sqrt(n!) for n < d.

    Rows are points, columns Fock indices. Built by the recurrence
    a_{n+1} = a_n u / sqrt(n+1).
    """
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    out = np.empty((u.size, d), dtype=np.float64)
    out[:, 0] = np.exp(-0.5 * u * u)
    if d > 1:
        steps = u[:, None] / np.sqrt(np.arange(1, d, dtype=np.float64))[None, :]
        small = np.abs(u) <= _LOG_DOMAIN_U
        out[small, 1:] = out[small, :1] * np.cumprod(steps[small], axis=1)
        big = ~small
        if np.any(big):
            # same recurrence on log|a_n|, the sign alternates with u
            ub = u[big]
            log_steps = np.log(np.abs(steps[big]))
            log_a = -0.5 * ub[:, None] ** 2 + np.concatenate(
                (np.zeros((ub.size, 1)), np.cumsum(log_steps, axis=1)), axis=1
            )
            sign = np.where(ub[:, None] < 0, (-1.0) ** np.arange(d)[None, :], 1.0)
            out[big] = sign * np.exp(log_a)
    return out


def coherent_feature(x: float, sigma: float, d: int, tol: float | None = DEFAULT_TOL) -> PureState:
    """Coherent feature state of ``x`` at bandwidth ``sigma`` in dimension ``d``.

    Raises TruncationError when the discarded tail mass exceeds ``tol``.
    ``tol=None`` skips the check; only truncation studies should do that.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not math.isfinite(x):
        raise InvalidSample("x must be finite")
    if d < 1:
        raise TruncationError("dimension must be at least 1")
    u = float(x) / sigma
    lost = lost_mass(u, d)
    if tol is not None and lost > tol:
        raise TruncationError(
            f"d={d} loses tail mass {lost:.3g} > tol {tol:.3g} for |x|/sigma={abs(u):.6g}; "
            f"need d >= {min_truncation_dim(u, tol)}"
        )
    return PureState.normalized(coherent_amplitudes(np.array([u]), d)[0], lost)


def superpose(states: Sequence[PureState], weights: Sequence[float]) -> PureState:
    """Normalized sum_i w_i |state_i>, accumulated in the given order."""
    if len(states) == 0:
        raise InvalidSample("nothing to superpose")
    if len(states) != len(weights):
        raise ValueError("need one weight per state")
    d = states[0].dim
    if any(s.dim != d for s in states):
        raise DimensionMismatch("states have different dimensions")
    w = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    acc = np.zeros(d, dtype=np.complex128)
    for wi, s in zip(w, states):
        acc += wi * s.amplitudes
    norm = np.linalg.norm(acc)
    if not norm > 1e-300:
        raise ValueError("superposition cancels to zero")
    lost = max(s.lost_tail_mass for s in states)
    return PureState(acc / norm, lost)


def as_scalar_sample(X, name: str = "X") -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidSample(f"{name}: the coherent feature map takes scalar data only")
    if arr.size == 0:
        raise InvalidSample(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidSample(f"{name} contains non-finite values")
    return arr


def qme_state(
    X, sigma: float, policy: TruncationPolicy | None = None, ledger: CostLedger | None = None
) -> PureState:
    """Empirical quantum mean embedding |nu_X> of a scalar sample.

    Points are superposed in sorted order, so permutations of X give
    bit-identical states. One preparation is logged per point.
    """
    policy = policy or TruncationPolicy()
    X = as_scalar_sample(X)
    u_abs = float(np.max(np.abs(X))) / sigma
    if u_abs > policy.x_abs_max_over_sigma:
        raise InvalidSample(
            f"max |x|/sigma = {u_abs:.6g} exceeds the truncation policy range "
            f"{policy.x_abs_max_over_sigma:.6g}"
        )
    states = [coherent_feature(x, sigma, policy.dim, policy.tol) for x in np.sort(X)]
    if ledger is not None:
        ledger.state_preps += X.size
    return superpose(states, np.ones(X.size))


def inner(a: PureState, b: PureState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
