"""Qubit CPTP channels stored as their four basis images E_ij = E[|i><j|].

Linearity gives the action on any state from the four images alone, and the
Haar-averaged output purity has the closed form

    gamma_bar = (1/3) tr(E00^2 + E00 E11 + E11^2 + E01 E10),

which brackets the channel eigenfidelity r_bar (the Haar average of the
output-state eigenfidelity) via gamma_bar <= r_bar <= (1 + gamma_bar)/2.
Average gate fidelity against a target unitary comes from the Choi matrix of
the gate-twisted channel traced against a fixed 4x4 averaging matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densmat import DensityMatrix, PureState
from .errors import CPViolation, DimensionMismatch, NonHermitianInput
from .haar import SeededSampler

TP_TOL = 1e-10
HERM_TOL = 1e-10
CP_TOL = 1e-8
UNITARY_TOL = 1e-12


def _as_2x2(m, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.shape != (2, 2):
        raise DimensionMismatch(f"{name} must be 2x2, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class QubitChannel:
    """CPTP qubit map; validated at construction.

    cp_slack loosens only the complete-positivity tolerance. Channels built
    from truncated sums keep the default 1e-8; series approximants carry an
    O(approximation error) Choi slack and are constructed with a documented
    looser value.
    """

    E00: np.ndarray
    E01: np.ndarray
    E10: np.ndarray
    E11: np.ndarray
    cp_slack: float = CP_TOL

    def __post_init__(self):
        e00 = _as_2x2(self.E00, "E00")
        e01 = _as_2x2(self.E01, "E01")
        e10 = _as_2x2(self.E10, "E10")
        e11 = _as_2x2(self.E11, "E11")
        for name, img, target in (("E00", e00, 1.0), ("E11", e11, 1.0),
                                  ("E01", e01, 0.0), ("E10", e10, 0.0)):
            if abs(np.trace(img) - target) > TP_TOL:
                raise NonHermitianInput(
                    f"trace preservation broken: tr {name} = {np.trace(img):.3e}, expected {target}"
                )
        if np.abs(e00 - e00.conj().T).max() > HERM_TOL:
            raise NonHermitianInput("E00 is not Hermitian")
        if np.abs(e11 - e11.conj().T).max() > HERM_TOL:
            raise NonHermitianInput("E11 is not Hermitian")
        if np.abs(e10 - e01.conj().T).max() > HERM_TOL:
            raise NonHermitianInput("E10 must equal the adjoint of E01")
        choi = np.block([[e00, e01], [e10, e11]])
        wmin = np.linalg.eigvalsh((choi + choi.conj().T) / 2).min()
        if wmin < -self.cp_slack:
            raise CPViolation(
                f"Choi matrix has eigenvalue {wmin:.3e} below -{self.cp_slack:.1e}"
            )
        for attr, a in (("E00", e00), ("E01", e01), ("E10", e10), ("E11", e11)):
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, attr, a)

    @classmethod
    def from_images(cls, e00, e01, e11, cp_slack: float = CP_TOL) -> "QubitChannel":
        e01 = _as_2x2(e01, "E01")
        return cls(e00, e01, e01.conj().T, e11, cp_slack=cp_slack)

    @classmethod
    def identity(cls) -> "QubitChannel":
        z = np.zeros((2, 2), dtype=complex)
        e00 = z.copy(); e00[0, 0] = 1
        e11 = z.copy(); e11[1, 1] = 1
        e01 = z.copy(); e01[0, 1] = 1
        return cls.from_images(e00, e01, e11)

    @classmethod
    def depolarizing(cls) -> "QubitChannel":
        half = np.eye(2, dtype=complex) / 2
        z = np.zeros((2, 2), dtype=complex)
        return cls.from_images(half, z, half)

    @classmethod
    def from_unitary(cls, u) -> "QubitChannel":
        u = _as_2x2(u, "unitary")
        if np.abs(u.conj().T @ u - np.eye(2)).max() > UNITARY_TOL:
            raise NonHermitianInput("matrix is not unitary")
        basis = [np.outer(_KET[i], _KET[j].conj()) for i in (0, 1) for j in (0, 1)]
        imgs = [u @ b @ u.conj().T for b in basis]
        return cls(imgs[0], imgs[1], imgs[2], imgs[3])

    def images(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.E00, self.E01, self.E10, self.E11


_KET = (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))


@dataclass(frozen=True)
class TargetGate:
    """2x2 unitary target."""

    unitary: np.ndarray

    def __post_init__(self):
        u = _as_2x2(self.unitary, "gate")
        if np.abs(u.conj().T @ u - np.eye(2)).max() > UNITARY_TOL:
            raise NonHermitianInput("gate matrix is not unitary")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @classmethod
    def identity(cls) -> "TargetGate":
        return cls(np.eye(2, dtype=complex))

    @classmethod
    def x(cls) -> "TargetGate":
        return cls(np.array([[0, 1], [1, 0]], dtype=complex))


@dataclass(frozen=True)
class ChoiMatrix:
    """4x4 Choi matrix; Hermitian, with output partial trace equal to identity."""

    entries: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.entries, dtype=complex)
        if s.shape != (4, 4):
            raise DimensionMismatch(f"Choi matrix must be 4x4, got {s.shape}")
        if np.abs(s - s.conj().T).max() > HERM_TOL:
            raise NonHermitianInput("Choi matrix is not Hermitian")
        # tracing out the output (second) factor must give the identity,
        # which is trace preservation seen from the Choi side
        reduced = np.array([[np.trace(s[2*i:2*i+2, 2*j:2*j+2]) for j in (0, 1)] for i in (0, 1)])
        if np.abs(reduced - np.eye(2)).max() > 1e-8:
            raise NonHermitianInput("partial trace over the output is not the identity")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "entries", s)


# ---------------------------------------------------------------------------
# action and composition

def _apply_matrix(channel: QubitChannel, rho: np.ndarray) -> np.ndarray:
    return (rho[0, 0] * channel.E00 + rho[0, 1] * channel.E01
            + rho[1, 0] * channel.E10 + rho[1, 1] * channel.E11)


def apply(channel: QubitChannel, rho: DensityMatrix) -> DensityMatrix:
    """Channel action by linearity over the four basis images."""
    if rho.dim != 2:
        raise DimensionMismatch(f"qubit channel applied to d={rho.dim} state")
    out = _apply_matrix(channel, rho.matrix)
    out = (out + out.conj().T) / 2
    w, v = np.linalg.eigh(out)
    if w.min() < -CP_TOL:
        raise CPViolation(f"output eigenvalue {w.min():.3e} below -{CP_TOL:.0e}")
    if w.min() < 0:
        # slack inside the tolerance band: project back onto valid states
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        out = (v * w) @ v.conj().T
    return DensityMatrix(out)


def compose(outer: QubitChannel, inner: QubitChannel) -> QubitChannel:
    """outer after inner, by linearity on inner's images."""
    imgs = [_apply_matrix(outer, img) for img in inner.images()]
    # composing valid channels can accumulate the factors' CP slack
    slack = max(outer.cp_slack, inner.cp_slack) * 2
    return QubitChannel(imgs[0], imgs[1], imgs[2], imgs[3], cp_slack=slack)


def concatenate(channel: QubitChannel, count: int) -> QubitChannel:
    """count successive applications of the same channel."""
    if count < 1:
        raise DimensionMismatch("count must be at least 1")
    out = channel
    for _ in range(count - 1):
        out = compose(channel, out)
    return out


# ---------------------------------------------------------------------------
# averaged diagnostics

def average_purity(channel: QubitChannel) -> float:
    """Haar-averaged output purity, in closed form."""
    e00, e01, e10, e11 = channel.images()
    g = np.trace(e00 @ e00 + e00 @ e11 + e11 @ e11 + e01 @ e10)
    return float(np.real(g)) / 3.0


def channel_eigenfidelity_bounds(channel: QubitChannel) -> tuple[float, float]:
    """Purity bracket (gamma_bar, (1+gamma_bar)/2) around the channel eigenfidelity."""
    g = average_purity(channel)
    return g, (1.0 + g) / 2.0


def channel_eigenerror_bounds(channel: QubitChannel) -> tuple[float, float]:
    """Linear-entropy bracket (S_bar/2, S_bar) around the channel eigenerror."""
    s_bar = 1.0 - average_purity(channel)
    return s_bar / 2.0, s_bar


def a_matrix() -> np.ndarray:
    """Haar average of rho^T kron rho for qubit pure states."""
    return np.array([
        [2, 0, 0, 1],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [1, 0, 0, 2],
    ], dtype=float) / 6.0


def choi_matrix(channel: QubitChannel, gate: TargetGate) -> ChoiMatrix:
    """Choi matrix of the map rho -> U^dag E[rho] U.

    Built as sum_ij |i><j| kron (U^dag E_ij U) with no 1/d factor, so that
    tr[(rho_a^T kron rho_a) S] = <a| U^dag E[rho_a] U |a> holds exactly.
    """
    u = gate.unitary
    s = np.zeros((4, 4), dtype=complex)
    imgs = {(0, 0): channel.E00, (0, 1): channel.E01,
            (1, 0): channel.E10, (1, 1): channel.E11}
    for (i, j), img in imgs.items():
        s[2*i:2*i+2, 2*j:2*j+2] = u.conj().T @ img @ u
    return ChoiMatrix(s)


def average_gate_fidelity(channel: QubitChannel, gate: TargetGate) -> float:
    """Haar-averaged fidelity between channel outputs and gate targets."""
    s = choi_matrix(channel, gate).entries
    return float(np.real(np.trace(a_matrix() @ s)))


# ---------------------------------------------------------------------------
# Monte Carlo estimators (vectorized over Haar samples)

def _output_entries(channel: QubitChannel, amps: np.ndarray):
    """Output density-matrix entries for a batch of pure inputs."""
    a0, a1 = amps[:, 0], amps[:, 1]
    r00 = np.abs(a0) ** 2
    r11 = np.abs(a1) ** 2
    r01 = a0 * np.conj(a1)
    r10 = np.conj(r01)
    e00, e01, e10, e11 = channel.images()
    out00 = (r00 * e00[0, 0] + r01 * e01[0, 0] + r10 * e10[0, 0] + r11 * e11[0, 0]).real
    out11 = (r00 * e00[1, 1] + r01 * e01[1, 1] + r10 * e10[1, 1] + r11 * e11[1, 1]).real
    out01 = r00 * e00[0, 1] + r01 * e01[0, 1] + r10 * e10[0, 1] + r11 * e11[0, 1]
    return out00, out01, out11


def _mean_stderr(vals: np.ndarray) -> tuple[float, float]:
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))


def mc_average_purity(channel: QubitChannel, sampler: SeededSampler, n_samples: int) -> tuple[float, float]:
    """Monte Carlo Haar average of the output purity."""
    amps = sampler.sample_amplitudes(n_samples)
    out00, out01, out11 = _output_entries(channel, amps)
    return _mean_stderr(out00**2 + out11**2 + 2 * np.abs(out01)**2)


def mc_channel_eigenfidelity(channel: QubitChannel, sampler: SeededSampler, n_samples: int) -> tuple[float, float]:
    """Monte Carlo Haar average of the output eigenfidelity.

    Uses the qubit closed form r = 1/2 + sqrt(1/4 - det) on the output
    entries, which avoids per-sample eigendecompositions.
    """
    amps = sampler.sample_amplitudes(n_samples)
    out00, out01, out11 = _output_entries(channel, amps)
    det = out00 * out11 - np.abs(out01) ** 2
    r = 0.5 + np.sqrt(np.clip(0.25 - det, 0.0, None))
    return _mean_stderr(r)


def mc_gate_fidelity(channel: QubitChannel, gate: TargetGate, sampler: SeededSampler,
                     n_samples: int) -> tuple[float, float]:
    """Monte Carlo Haar average of <a|U^dag E[rho_a] U|a>."""
    amps = sampler.sample_amplitudes(n_samples)
    out00, out01, out11 = _output_entries(channel, amps)
    targets = amps @ gate.unitary.T  # row k is U @ amps[k]
    b0, b1 = targets[:, 0], targets[:, 1]
    f = (np.abs(b0)**2 * out00 + np.abs(b1)**2 * out11
         + 2 * np.real(np.conj(b0) * b1 * out01))
    return _mean_stderr(f)


def tp_residual(channel: QubitChannel) -> float:
    """Largest trace-preservation defect across the four images."""
    e00, e01, e10, e11 = channel.images()
    return max(abs(np.trace(e00) - 1), abs(np.trace(e11) - 1),
               abs(np.trace(e01)), abs(np.trace(e10)))


def cp_residual(channel: QubitChannel) -> float:
    """Magnitude of the most negative Choi eigenvalue (0 if none)."""
    choi = np.block([[channel.E00, channel.E01], [channel.E10, channel.E11]])
    wmin = np.linalg.eigvalsh((choi + choi.conj().T) / 2).min()
    return float(max(0.0, -wmin))
