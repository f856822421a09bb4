"""Synthetic data samplers.

All samplers consume only ``Generator.random()`` uniforms, so a stream is fixed
by the RNG stream and the algorithm below:

* uniform(a, b): a + (b - a) * U.
* gaussian(m, s): Marsaglia polar method. Pairs (V1, V2) = 2U - 1 are drawn in
  blocks; a pair is kept when 0 < S = V1^2 + V2^2 < 1 and yields
  V1 * f, V2 * f with f = sqrt(-2 ln S / S), in that order.
* mixture(w, m1, s1, m2, s2): for each point one uniform U picks component 1
  when U < w; then all component-1 normals are drawn from the polar stream,
  followed by the component-2 normals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def polar_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    out = np.empty(n)
    filled = 0
    while filled < n:
        pairs = max(8, (n - filled) // 2 + 8)
        v = 2.0 * rng.random((pairs, 2)) - 1.0
        s = v[:, 0] ** 2 + v[:, 1] ** 2
        keep = (s > 0) & (s < 1)
        v, s = v[keep], s[keep]
        z = (v * np.sqrt(-2.0 * np.log(s) / s)[:, None]).reshape(-1)
        take = min(n - filled, z.size)
        out[filled:filled + take] = z[:take]
        filled += take
    return out


@dataclass(frozen=True)
class Distribution:
    """``kind`` is gaussian, uniform or mixture; ``params`` as in the module docs."""

    kind: str
    params: tuple[float, ...]

    _ARITY = {"gaussian": 2, "uniform": 2, "mixture": 5}

    def __post_init__(self):
        if self.kind not in self._ARITY:
            raise ValueError(f"unknown distribution {self.kind!r}")
        if len(self.params) != self._ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {self._ARITY[self.kind]} parameters")
        p = self.params
        if self.kind == "gaussian" and p[1] <= 0:
            raise ValueError("gaussian scale must be positive")
        if self.kind == "uniform" and not p[0] < p[1]:
            raise ValueError("uniform needs a < b")
        if self.kind == "mixture" and not (0 <= p[0] <= 1 and p[2] > 0 and p[4] > 0):
            raise ValueError("mixture needs 0 <= w <= 1 and positive scales")

    @classmethod
    def parse(cls, text: str) -> Distribution:
        """``gaussian:m,s``, ``uniform:a,b`` or ``mixture:w,m1,s1,m2,s2``."""
        kind, _, rest = text.partition(":")
        try:
            params = tuple(float(v) for v in rest.split(",")) if rest else ()
        except ValueError as exc:
            raise ValueError(f"bad distribution parameters in {text!r}") from exc
        return cls(kind.strip().lower(), params)

    def __str__(self):
        return f"{self.kind}:" + ",".join(repr(p) for p in self.params)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p = self.params
        if self.kind == "uniform":
            return p[0] + (p[1] - p[0]) * rng.random(n)
        if self.kind == "gaussian":
            return p[0] + p[1] * polar_normals(rng, n)
        first = rng.random(n) < p[0]
        out = np.empty(n)
        k = int(first.sum())
        out[first] = p[1] + p[2] * polar_normals(rng, k)
        out[~first] = p[3] + p[4] * polar_normals(rng, n - k)
        return out
