"""Seeded substreams and chunked Monte Carlo averaging.

Every random draw in the package comes from a generator built by
:func:`substream`. A stream is identified by a root seed plus an arbitrary
tuple of non-negative integer keys (trial index, chunk index, ...), so that
work can be split across workers without changing the numbers produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

Seed = Union[int, Sequence[int]]

#: Draws per chunk for chunked Monte Carlo means.
CHUNK = 1 << 16


def _split(seed: Seed) -> tuple[int, tuple[int, ...]]:
    if isinstance(seed, (int, np.integer)):
        root, keys = int(seed), ()
    else:
        seq = [int(s) for s in seed]
        if not seq:
            raise ValueError("empty seed sequence")
        root, keys = seq[0], tuple(seq[1:])
    if root < 0 or any(k < 0 for k in keys):
        raise ValueError("seeds and stream keys must be non-negative")
    return root, keys


def substream(seed: Seed, *keys: int) -> np.random.Generator:
    """Return the generator for stream ``(seed, *keys)``.

    ``substream(s, 3)`` and ``substream((s, 3))`` denote the same stream.
    """
    root, base = _split(seed)
    ss = np.random.SeedSequence(root, spawn_key=base + tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    se: float
    n: int
    m2: float = 0.0  # sum of squared deviations, kept for merging

    def __float__(self) -> float:
        return float(self.mean)

    @classmethod
    def from_values(cls, values: np.ndarray) -> "MCEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            return cls(math.nan, math.nan, 0, 0.0)
        mean = float(values.mean())
        m2 = float(((values - mean) ** 2).sum())
        return cls(mean, _se(m2, n), n, m2)

    def merge(self, other: "MCEstimate") -> "MCEstimate":
        """Pooled estimate (Chan et al. pairwise update)."""
        if self.n == 0:
            return other
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return MCEstimate(mean, _se(m2, n), n, m2)

    def within(self, target: float, nse: float = 3.0) -> bool:
        return abs(self.mean - target) <= nse * self.se

    def __repr__(self) -> str:
        return f"MCEstimate(mean={self.mean:.6g}, se={self.se:.3g}, n={self.n})"


def _se(m2: float, n: int) -> float:
    if n < 2:
        return math.inf
    return math.sqrt(m2 / (n - 1) / n)


def chunked_mean(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    trials: int,
    seed: Seed,
    chunk: int = CHUNK,
) -> MCEstimate:
    """Mean of ``trials`` scalar draws, chunk ``c`` using ``substream(seed, c)``.

    ``draw(rng, m)`` must return ``m`` values (NaNs are discarded and do not
    count towards ``n``).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    est = MCEstimate(math.nan, math.nan, 0, 0.0)
    for c, start in enumerate(range(0, trials, chunk)):
        m = min(chunk, trials - start)
        vals = np.asarray(draw(substream(seed, c), m), dtype=float)
        est = est.merge(MCEstimate.from_values(vals[~np.isnan(vals)]))
    return est
