"""Quantum-speed-limit times and the photon cost of a target rotation.

A rotation by Bures angle theta under a Hamiltonian with mean <H> and spread
dH cannot beat t >= hbar theta / dH (spread limit) nor
t >= hbar theta / <H> (mean-energy limit, measured from the ground state).
For the drive-qubit exchange interaction both scales are hbar g sqrt(nbar),
which turns the speed limits into a floor on the channel eigenerror in terms
of the drive's mean photon number alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densmat import PureState
from .errors import InvalidMean, NonpositiveMeanEnergy, UnsupportedParameters
from .jcdrive import DriveDistribution, JCConfig


@dataclass(frozen=True)
class HamiltonianMoments:
    """First two moments of the generator: mean energy and spread."""

    mean: float
    stdev: float

    def __post_init__(self):
        if self.stdev < 0:
            raise UnsupportedParameters(f"energy spread must be nonnegative, got {self.stdev}")


@dataclass(frozen=True)
class RotationTarget:
    """Bures angle between input and target states, in [0, pi/2]."""

    theta: float

    def __post_init__(self):
        if not 0 <= self.theta <= math.pi / 2 + 1e-15:
            raise UnsupportedParameters(
                f"rotation angle must lie in [0, pi/2], got {self.theta}"
            )


def mt_time(target: RotationTarget, moments: HamiltonianMoments,
            hbar: float = 1.0) -> float:
    """Spread-based minimal time hbar theta / dH.

    A vanishing spread means frozen dynamics: the time is reported as +inf
    rather than raised, except for the trivial theta = 0 target.
    """
    if target.theta == 0:
        return 0.0
    if moments.stdev == 0:
        return math.inf
    return hbar * target.theta / moments.stdev


def ml_time(target: RotationTarget, moments: HamiltonianMoments,
            hbar: float = 1.0) -> float:
    """Mean-energy minimal time hbar theta / <H>.

    The mean must be measured from the ground state and be positive; use
    jc_moments(..., measure_from_ground=True) for drive-qubit generators.
    """
    if target.theta == 0:
        return 0.0
    if moments.mean <= 0:
        raise NonpositiveMeanEnergy(
            f"mean energy above ground must be positive, got {moments.mean}"
        )
    return hbar * target.theta / moments.mean


def ground_energy(drive: DriveDistribution, cfg: JCConfig, hbar: float = 1.0) -> float:
    """Lowest eigenvalue of the truncated exchange generator.

    The invariant pairs (|m, 0>, |m-1, 1>) have eigenvalues +-hbar g sqrt(m);
    the storage window for the drive extends one level above the support.
    """
    return -hbar * cfg.coupling * math.sqrt(drive.n_max + 1)


def jc_moments(drive: DriveDistribution, qubit: PureState, cfg: JCConfig,
               hbar: float = 1.0, measure_from_ground: bool = False) -> HamiltonianMoments:
    """Exact <H> and dH of the exchange generator on the product state.

    Closed forms on the truncated window:
        <H>   = -2 hbar g Im(Z a_0 conj(a_1)),  Z = sum sqrt(n+1) conj(b_n) b_{n+1}
        <H^2> = (hbar g)^2 (nbar_realized + |a_1|^2)
    With measure_from_ground the mean is shifted above the truncated ground
    energy, the form the mean-energy time limit requires. Both scales behave
    as hbar g sqrt(nbar) for phase-aligned coherent drives; see
    asymptotic_scale and phase_aligned_qubit.
    """
    if qubit.dim != 2:
        raise UnsupportedParameters("moments are defined for a qubit logical system")
    g = cfg.coupling
    b = drive.coefficients
    z = 0.0 + 0.0j
    if len(b) > 1:
        n = drive.support[:-1]
        z = complex(np.sum(np.sqrt(n + 1) * np.conj(b[:-1]) * b[1:]))
    a0, a1 = qubit.amplitudes
    mean = -2.0 * hbar * g * float(np.imag(z * a0 * np.conj(a1)))
    second = (hbar * g) ** 2 * (drive.mean + abs(a1) ** 2)
    var = max(second - mean ** 2, 0.0)
    if measure_from_ground:
        mean = mean - ground_energy(drive, cfg, hbar)
    return HamiltonianMoments(mean=mean, stdev=math.sqrt(var))


def phase_aligned_qubit(drive: DriveDistribution) -> PureState:
    """Equal-weight qubit state whose phase maximizes |<H>| for this drive."""
    b = drive.coefficients
    z = 0.0 + 0.0j
    if len(b) > 1:
        n = drive.support[:-1]
        z = complex(np.sum(np.sqrt(n + 1) * np.conj(b[:-1]) * b[1:]))
    phase = np.exp(1j * (np.angle(z) + math.pi / 2)) if z != 0 else 1.0
    return PureState(np.array([1.0, phase]) / math.sqrt(2.0))


def asymptotic_scale(drive: DriveDistribution, cfg: JCConfig, hbar: float = 1.0) -> float:
    """Large-nbar energy scale hbar g sqrt(nbar) shared by <H> and dH."""
    return hbar * cfg.coupling * math.sqrt(drive.mean)


def bipartite_angle_check(theta_logical: float, drive_overlap: float) -> float:
    """Joint-state rotation angle when the drive also moves.

    cos(angle) = overlap * cos(theta) <= cos(theta), so the joint angle is
    never smaller than the logical one: the drive can only slow things down.
    """
    if not 0 <= theta_logical <= math.pi / 2 + 1e-15:
        raise UnsupportedParameters("logical angle must lie in [0, pi/2]")
    if not 0 <= drive_overlap <= 1 + 1e-15:
        raise UnsupportedParameters("overlap must lie in [0, 1]")
    return float(math.acos(min(drive_overlap, 1.0) * math.cos(theta_logical)))


def qsl_eigenerror_bound(theta: float, nbar: float) -> float:
    """Eigenerror floor (theta^2 + sin^2 theta) / (6 nbar) for a theta rotation.

    Since the reduced interaction time can be no smaller than the rotation
    angle, this is the coherent-drive asymptotic law evaluated at tau = theta.
    """
    if nbar <= 0:
        raise InvalidMean(f"mean photon number must be positive, got {nbar}")
    return (theta ** 2 + math.sin(theta) ** 2) / (6 * nbar)


def small_angle_eigenerror_bound(theta: float, nbar: float) -> float:
    """Leading small-angle form theta^2 / (3 nbar)."""
    if nbar <= 0:
        raise InvalidMean(f"mean photon number must be positive, got {nbar}")
    return theta ** 2 / (3 * nbar)


def required_mean_photons(theta: float, epsilon: float) -> float:
    """Photon budget needed to push the eigenerror floor below epsilon.

    Inverts qsl_eigenerror_bound: nbar = (theta^2 + sin^2 theta) / (6 eps),
    the 1/epsilon energy cost of gate accuracy.
    """
    if epsilon <= 0:
        raise UnsupportedParameters(f"target error must be positive, got {epsilon}")
    return (theta ** 2 + math.sin(theta) ** 2) / (6 * epsilon)
