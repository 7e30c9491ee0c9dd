"""Haar-random pure states and Monte Carlo averaging.

Sampling draws 2d independent standard normals, forms d complex amplitudes,
and normalizes; the resulting distribution on the unit sphere is exactly the
Haar measure. Samplers are deterministic given (seed, dim), and parallel
workers must use independently derived child samplers rather than sharing
one stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .densmat import DensityMatrix, PureState
from .errors import DimensionMismatch

_U64 = 2 ** 64


@dataclass
class SeededSampler:
    """Stateful Haar sampler; identical (seed, dim) gives identical streams."""

    seed: int
    dim: int
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= int(self.seed) < _U64):
            raise DimensionMismatch("seed must fit in an unsigned 64-bit integer")
        if self.dim < 1:
            raise DimensionMismatch("dimension must be at least 1")
        self._rng = np.random.default_rng(int(self.seed))

    def child(self, k: int) -> "SeededSampler":
        """Independently seeded sampler derived from (seed, k).

        Worker k of a parallel sweep gets child(k); streams never overlap.
        """
        derived = int(np.random.SeedSequence([int(self.seed), int(k)]).generate_state(1, np.uint64)[0])
        return SeededSampler(seed=derived, dim=self.dim)

    def sample_amplitudes(self, n: int) -> np.ndarray:
        """n Haar-random unit vectors as rows of an (n, dim) complex array."""
        z = self._rng.standard_normal((n, 2 * self.dim))
        v = z[:, : self.dim] + 1j * z[:, self.dim:]
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return v


def sample_pure(sampler: SeededSampler) -> PureState:
    """One Haar-random pure state."""
    return PureState(sampler.sample_amplitudes(1)[0])


def random_density_matrix(rng: np.random.Generator, dim: int) -> DensityMatrix:
    """Full-rank random state G G^dag / tr(G G^dag) with Ginibre G."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix((m + m.conj().T) / 2)


def mc_average(
    f: Callable[[PureState], float], sampler: SeededSampler, n_samples: int
) -> tuple[float, float]:
    """Monte Carlo Haar average of f with its standard error.

    Returns (mean, stderr) where stderr uses the unbiased variance
    estimator. Needs n_samples >= 2 for the variance to exist.
    """
    if n_samples < 2:
        raise DimensionMismatch("need at least 2 samples for a standard error")
    amps = sampler.sample_amplitudes(n_samples)
    vals = np.array([f(PureState(a)) for a in amps], dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_samples))
