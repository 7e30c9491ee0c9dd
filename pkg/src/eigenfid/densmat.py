"""Density-matrix diagnostics: spectra, fidelities, and eigenfidelity bounds.

The central quantity is the eigenfidelity r(rho), the largest eigenvalue of a
density matrix. It equals the best fidelity achievable between rho and any
pure target state, so 1 - r(rho) is the intrinsic error floor of whatever
dynamics produced rho. Everything else here (Schatten norms, purity, the
purity bracket gamma <= r <= (1+gamma)/2, passive states, effective
temperature) supports or consumes that number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDimension,
    InvalidOrder,
    NonHermitianInput,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
ORTHO_TOL = 1e-10


def _as_complex_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """Positive-semidefinite, unit-trace complex matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        a = _as_complex_matrix(self.matrix)
        if np.abs(a - a.conj().T).max() > HERMITIAN_TOL:
            raise NonHermitianInput(
                f"matrix deviates from Hermiticity by {np.abs(a - a.conj().T).max():.3e}"
            )
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise NonHermitianInput(f"trace is {tr!r}, expected 1")
        w = np.linalg.eigvalsh((a + a.conj().T) / 2)
        if w.min() < -PSD_TOL:
            raise NonHermitianInput(
                f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})"
            )
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, m) -> "DensityMatrix":
        return cls(_as_complex_matrix(m))

    @classmethod
    def pure(cls, state: "PureState") -> "DensityMatrix":
        v = state.amplitudes
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def diagonal(cls, populations) -> "DensityMatrix":
        p = np.asarray(populations, dtype=float)
        return cls(np.diag(p).astype(complex))


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if abs(n - 1.0) > HERMITIAN_TOL:
            raise DimensionMismatch(f"state norm is {n!r}, expected 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def from_vector(cls, v) -> "PureState":
        a = np.asarray(v, dtype=complex).reshape(-1)
        n = np.linalg.norm(a)
        if n == 0:
            raise DimensionMismatch("cannot normalize the zero vector")
        return cls(a / n)

    def density(self) -> DensityMatrix:
        return DensityMatrix.pure(self)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class EnergyBasis:
    """Strictly increasing energy levels with orthonormal basis columns."""

    levels: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.levels, dtype=float).reshape(-1)
        b = _as_complex_matrix(self.basis)
        if b.shape[0] != e.shape[0]:
            raise DimensionMismatch("levels and basis dimensions differ")
        if not np.all(np.diff(e) > 0):
            raise DimensionMismatch("energy levels must be strictly increasing")
        if np.abs(b.conj().T @ b - np.eye(b.shape[0])).max() > ORTHO_TOL:
            raise DimensionMismatch("basis columns are not orthonormal")
        object.__setattr__(self, "levels", e)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.levels.shape[0]

    @classmethod
    def computational(cls, levels) -> "EnergyBasis":
        e = np.asarray(levels, dtype=float).reshape(-1)
        return cls(e, np.eye(e.shape[0], dtype=complex))


# ---------------------------------------------------------------------------
# spectra and fidelities

def eigendecompose(rho: DensityMatrix) -> Spectrum:
    """Spectral decomposition with eigenvalues sorted descending.

    The input is symmetrized as (M + M^dag)/2 before decomposition to keep
    accumulated round-off from leaking into positivity checks downstream.
    """
    m = rho.matrix
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
        raise NonHermitianInput("input stopped being Hermitian")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(w)[::-1]
    return Spectrum(eigenvalues=w[order], eigenvectors=v[:, order])


def eigenfidelity(rho: DensityMatrix) -> float:
    """Largest eigenvalue of rho: the best fidelity to any pure target."""
    return float(eigendecompose(rho).eigenvalues[0])


def eigenerror(rho: DensityMatrix) -> float:
    """1 - eigenfidelity: the intrinsic infidelity due to mixedness."""
    return 1.0 - eigenfidelity(rho)


def closest_pure_state(rho: DensityMatrix) -> tuple[float, PureState]:
    """Eigenfidelity together with the pure state that attains it.

    When the top eigenvalue is degenerate any eigenvector of the top
    eigenspace attains the maximum; the one the decomposition yields is
    returned.
    """
    spec = eigendecompose(rho)
    return float(spec.eigenvalues[0]), PureState.from_vector(spec.eigenvectors[:, 0])


def fidelity_to_pure(rho: DensityMatrix, phi: PureState) -> float:
    """Fidelity <phi|rho|phi> between rho and a pure target."""
    if rho.dim != phi.dim:
        raise DimensionMismatch(f"state dim {phi.dim} vs matrix dim {rho.dim}")
    v = phi.amplitudes
    return float(np.real(v.conj() @ rho.matrix @ v))


def _clamped_eigenvalues(rho: DensityMatrix) -> np.ndarray:
    # PSD slack in (-1e-10, 0) is clamped to zero; anything worse was
    # rejected at construction.
    w = eigendecompose(rho).eigenvalues
    return np.clip(w, 0.0, None)


def schatten_norm(rho: DensityMatrix, p: float) -> float:
    """Schatten p-norm (sum of eigenvalues**p)**(1/p) for a density matrix."""
    if p <= 0:
        raise InvalidOrder(f"Schatten order must be positive, got {p}")
    w = _clamped_eigenvalues(rho)
    return float(np.sum(w ** p) ** (1.0 / p))


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), computed without eigendecomposition."""
    m = rho.matrix
    return float(np.real(np.trace(m @ m)))


def linear_entropy(rho: DensityMatrix) -> float:
    return 1.0 - purity(rho)


def eigenfidelity_bounds(rho: DensityMatrix) -> tuple[float, float]:
    """Purity bracket (gamma, (1+gamma)/2) around the eigenfidelity."""
    g = purity(rho)
    return g, (1.0 + g) / 2.0


# ---------------------------------------------------------------------------
# energetics

def passive_state(rho: DensityMatrix, basis: EnergyBasis) -> DensityMatrix:
    """Rearrange the spectrum of rho against the energy basis.

    Populations are sorted descending and paired with ascending energies,
    which is the unitarily reachable minimum-energy arrangement. The passive
    state shares the spectrum of rho, so its eigenfidelity is unchanged.
    """
    if rho.dim != basis.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs basis dim {basis.dim}")
    w = _clamped_eigenvalues(rho)  # already descending
    b = basis.basis
    return DensityMatrix((b * w) @ b.conj().T)


def effective_temperature(rho: DensityMatrix, basis: EnergyBasis) -> float:
    """Temperature of the two-level thermal state with the same eigenfidelity.

    Solves r = 1/(1 + exp(-gap/T)) for T, with the Boltzmann constant set to
    one. Pure states map to T = 0 and the maximally mixed state to T = +inf.
    """
    if rho.dim != 2:
        raise InvalidDimension(f"effective temperature is defined for d=2, got d={rho.dim}")
    if basis.dim != 2:
        raise InvalidDimension("energy basis must be two-level")
    gap = float(basis.levels[1] - basis.levels[0])
    r = eigenfidelity(rho)
    # top eigenvalue of a qubit state lies in [1/2, 1]
    r = min(max(r, 0.5), 1.0)
    if r >= 1.0:
        return 0.0
    if r <= 0.5:
        return math.inf
    return gap / math.log(r / (1.0 - r))
