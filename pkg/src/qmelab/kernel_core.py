"""Exact classical kernel mean embeddings.

This is the oracle path: kernels, the empirical mean-embedding inner product
K(X, Y) = (1/|X||Y|) sum_ij k(x_i, y_j), embedding norms and the biased MMD
estimator. Everything is computed by brute force over the Gram block.

Summation order is fixed so results are bit-stable: Gram blocks are produced
in row chunks of at most ``_BLOCK`` entries, each chunk is reduced with numpy's
pairwise sum, and the chunk sums are combined with ``math.fsum``. The two
arguments of ``mean_inner`` are put in a canonical order first, which makes
the result exactly symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, InvalidSample
from .ledger import CostLedger

Family = Literal["gaussian", "laplacian", "linear"]
FAMILIES: tuple[str, ...] = ("gaussian", "laplacian", "linear")

_BLOCK = 1 << 21


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and bandwidth.

    Gaussian: exp(-||x - y||^2 / (2 sigma^2)). Laplacian: exp(-||x - y||_1 / sigma).
    Linear: <x, y>; sigma is ignored and the kernel has no unit diagonal, so the
    quantum path refuses it.
    """

    family: Family = "gaussian"
    sigma: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.family != "linear" and not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"bandwidth sigma must be positive and finite, got {self.sigma}")

    @property
    def unit_diagonal(self) -> bool:
        """True when k(x, x) = 1 for every x."""
        return self.family != "linear"


def as_points(data, name: str = "sample") -> np.ndarray:
    """Validate a sample and return it as a float array of shape (n, D).

    A 1-D input is read as n scalar points.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise InvalidSample(f"{name} must be a list of points, got array of shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InvalidSample(f"{name} is empty")
    if arr.shape[1] == 0:
        raise InvalidSample(f"{name} has zero-dimensional points")
    if not np.all(np.isfinite(arr)):
        raise InvalidSample(f"{name} contains non-finite values")
    return arr


def _pair(X, Y) -> tuple[np.ndarray, np.ndarray]:
    X = as_points(X, "X")
    Y = as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"X has dimension {X.shape[1]} but Y has {Y.shape[1]}")
    return X, Y


def _block(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if spec.family == "linear":
        return X @ Y.T
    # direct differences; the |x|^2 + |y|^2 - 2<x,y> expansion cancels badly
    if X.shape[1] == 1:
        diff = X[:, 0, None] - Y[None, :, 0]
        if spec.family == "gaussian":
            dist = diff * diff
        else:
            dist = np.abs(diff)
    else:
        diff = X[:, None, :] - Y[None, :, :]
        if spec.family == "gaussian":
            dist = np.einsum("ijk,ijk->ij", diff, diff)
        else:
            dist = np.abs(diff).sum(axis=-1)
    if spec.family == "gaussian":
        dist /= -2.0 * spec.sigma * spec.sigma
    else:
        dist /= -spec.sigma
    return np.exp(dist, out=dist)


def _row_chunks(n_rows: int, n_cols: int, dim: int):
    step = max(1, _BLOCK // max(1, n_cols * dim))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def gram(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Dense Gram block [k(x_i, y_j)]; ``Y`` defaults to ``X``."""
    X, Y = _pair(X, X if Y is None else Y)
    out = np.empty((X.shape[0], Y.shape[0]))
    for rows in _row_chunks(X.shape[0], Y.shape[0], X.shape[1]):
        out[rows] = _block(spec, X[rows], Y)
    return out


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """k(x, y) for two single points (scalars or equal-length vectors)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.ndim != 1 or y.ndim != 1:
        raise InvalidSample("eval_kernel takes single points")
    X, Y = _pair(x[None, :], y[None, :])
    return float(_block(spec, X, Y)[0, 0])


def _canonical(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    kx = (X.shape[0], X.tobytes())
    ky = (Y.shape[0], Y.tobytes())
    return (Y, X) if ky < kx else (X, Y)


def kernel_sum(spec: KernelSpec, X, Y) -> float:
    """sum_ij k(x_i, y_j) in the module's fixed summation order."""
    X, Y = _canonical(*_pair(X, Y))
    partial = []
    for rows in _row_chunks(X.shape[0], Y.shape[0], X.shape[1]):
        partial.append(float(_block(spec, X[rows], Y).sum()))
    return math.fsum(partial)


def mean_inner(spec: KernelSpec, X, Y, ledger: CostLedger | None = None) -> float:
    """K(X, Y) = <mu_X, mu_Y>, the mean of the Gram block.

    Sample sizes may differ; the normalization is 1/(|X| |Y|).
    """
    X, Y = _pair(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if ledger is not None:
        ledger.kernel_evals += n * m
    return kernel_sum(spec, X, Y) / (n * m)


def mmd_biased_sq(
    spec: KernelSpec, X, Y, ledger: CostLedger | None = None, return_raw: bool = False
):
    """Biased estimator K(X,X) - 2 K(X,Y) + K(Y,Y) of the squared MMD.

    Rounding can push the raw value slightly below zero; the returned value is
    clamped at 0. With ``return_raw=True`` the pair ``(clamped, raw)`` is
    returned instead.
    """
    X, Y = _pair(X, Y)
    raw = mean_inner(spec, X, X, ledger) - 2.0 * mean_inner(spec, X, Y, ledger) + mean_inner(
        spec, Y, Y, ledger
    )
    value = max(raw, 0.0)
    return (value, raw) if return_raw else value


def embedding_norm(spec: KernelSpec, X, ledger: CostLedger | None = None) -> float:
    """||mu_X|| = sqrt(K(X, X)).

    For unit-diagonal kernels this lies in [1/sqrt(n), 1] and is exactly 1 for a
    sample with a single distinct point.
    """
    if not spec.unit_diagonal:
        raise ValueError("embedding_norm needs a kernel with k(x, x) = 1")
    return math.sqrt(mean_inner(spec, X, X, ledger))
