"""Resource accounting for the classical and quantum evaluation of K(X, Y).

Scaling is judged on the abstract counters in ``CostLedger``, never on wall
time: the simulator's state vectors make quantum-path wall time grow with the
Fock cutoff, which says nothing about a physical device.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .kernel_core import mean_inner
from .ledger import CostLedger
from .qme_pipeline import QmePipelineConfig, estimate_K
from .rng import TAG_DATA, derive_seed, substream

__all__ = ["CostLedger", "ScalingReport", "compare_paths", "scaling_fit"]


def scaling_fit(points) -> tuple[float, float]:
    """Least-squares slope of log(count) against log(n), with its r^2.

    A perfectly flat series has no variance to explain; r^2 is 1 then.
    """
    pts = [(float(n), float(c)) for n, c in points]
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points for a scaling fit, got {len(pts)}")
    ns = [n for n, _ in pts]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("sizes must be strictly increasing")
    if any(n <= 0 or c <= 0 for n, c in pts):
        raise ValueError("sizes and counts must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([c for _, c in pts])
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    ss_tot = float(yc @ yc)
    resid = yc - slope * xc
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    return slope, r2


@dataclass
class ScalingReport:
    sizes: list[int]
    classical: dict[int, CostLedger] = field(default_factory=dict)
    quantum: dict[int, CostLedger] = field(default_factory=dict)
    exponents: dict[str, tuple[float, float]] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    seed: int = 0

    def rows(self) -> list[tuple]:
        """(n, path, kernel_evals, state_preps, swap_shots, wall_time_ns) rows."""
        out = []
        for n in self.sizes:
            for path, ledgers in (("classical", self.classical), ("quantum", self.quantum)):
                L = ledgers[n]
                out.append((n, path, L.kernel_evals, L.state_preps, L.swap_shots, L.wall_time_ns))
        return out

    def to_dict(self, include_wall_time: bool = True) -> dict:
        def ledger(L):
            d = L.to_dict()
            if not include_wall_time:
                d.pop("wall_time_ns")
            return d

        return {
            "sizes": list(self.sizes),
            "seed": self.seed,
            "ledgers": [
                {"n": n, "classical": ledger(self.classical[n]), "quantum": ledger(self.quantum[n])}
                for n in self.sizes
            ],
            "exponents": {k: {"exponent": e, "r_squared": r} for k, (e, r) in self.exponents.items()},
            "checks": dict(self.checks),
        }


def compare_paths(
    sizes, cfg: QmePipelineConfig | None = None, seed: int = 0, data: Distribution | None = None
) -> ScalingReport:
    """Evaluate K(X, Y) classically and on the sampled quantum path for each size.

    X and Y are drawn from ``data`` (default uniform on [-2 sigma, 2 sigma]) with
    streams ``(seed, TAG_DATA, n, 0|1)``. The report holds both ledgers per size,
    the fitted exponents and the exact-count checks.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 4:
        raise ValueError(f"need at least 4 sizes, got {len(sizes)}")
    if any(n < 1 for n in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be positive and strictly increasing")
    cfg = cfg or QmePipelineConfig()
    data = data or Distribution("uniform", (-2.0 * cfg.sigma, 2.0 * cfg.sigma))
    report = ScalingReport(sizes, seed=seed)

    for n in sizes:
        X = data.sample(substream(seed, TAG_DATA, n, 0), n)
        Y = data.sample(substream(seed, TAG_DATA, n, 1), n)

        classical = CostLedger()
        t0 = time.perf_counter_ns()
        mean_inner(cfg.kernel, X, Y, classical)
        classical.wall_time_ns = time.perf_counter_ns() - t0

        quantum = CostLedger()
        t0 = time.perf_counter_ns()
        estimate_K(X, Y, cfg, derive_seed(seed, TAG_DATA, n), ledger=quantum)
        quantum.wall_time_ns = time.perf_counter_ns() - t0

        report.classical[n] = classical
        report.quantum[n] = quantum

    def fit(ledgers, attr):
        return scaling_fit([(n, getattr(ledgers[n], attr)) for n in sizes])

    report.exponents = {
        "classical_kernel_evals": fit(report.classical, "kernel_evals"),
        "quantum_kernel_evals": fit(report.quantum, "kernel_evals"),
        "quantum_state_preps": fit(report.quantum, "state_preps"),
        "quantum_swap_shots": fit(report.quantum, "swap_shots"),
    }
    shots = {report.quantum[n].swap_shots for n in sizes}
    report.checks = {
        "classical_kernel_evals_eq_n2": all(report.classical[n].kernel_evals == n * n for n in sizes),
        "quantum_kernel_evals_eq_2n": all(report.quantum[n].kernel_evals == 2 * n for n in sizes),
        "quantum_swap_shots_constant": shots == {3 * cfg.shots_per_inner},
    }
    return report


def log_slope(ns, values) -> float:
    """Slope of log(value) against log(n); no point-count minimum."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(ns <= 0) or np.any(values <= 0):
        raise ValueError("sizes and values must be positive")
    x, y = np.log(ns), np.log(values)
    return float(np.polyfit(x, y, 1)[0])
