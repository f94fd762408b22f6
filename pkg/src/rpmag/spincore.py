"""Spin-1/2 operator algebra for radical-pair systems.

Conventions used throughout the package: hbar = 1 and the electron
gyromagnetic ratio gamma = 1, so magnetic fields carry frequency units
(divide by gamma = 2*pi*2.8e6 rad/s/G to restore Gauss). Spin operators are
s = sigma/2. A system holds two electrons (donor first, then acceptor) and
any number of spin-1/2 nuclei, ordered

    [electron_D, electron_A, donor nuclei..., acceptor nuclei...],

each particle contributing a factor 2 to the Hilbert-space dimension with
single-particle basis {up, down}. Electronic singlet/triplet states are

    |S>  = (|ud> - |du>)/sqrt(2),   |T0> = (|ud> + |du>)/sqrt(2),
    |T+> = |uu>,                    |T-> = |dd>.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpinSystem",
    "Operator",
    "StateVector",
    "DensityMatrix",
    "embed",
    "spin_ops",
    "singlet_projector",
    "triplet_projector",
    "singlet_state",
    "mixed_singlet",
    "singlet_ensemble",
    "ghz_state",
    "ghz_coherence_operator",
]

# single spin-1/2 operators, s = sigma/2
_sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
_sy = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
_sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
_id2 = np.eye(2, dtype=complex)

_HERM_TOL = 1e-12
_NORM_TOL = 1e-10
_PSD_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpinSystem:
    """Two electrons plus spin-1/2 nuclei on the donor and acceptor."""

    donor_nuclei: int = 1
    acceptor_nuclei: int = 0

    def __post_init__(self) -> None:
        if self.donor_nuclei < 0 or self.acceptor_nuclei < 0:
            raise ValueError("nucleus counts must be non-negative")

    @property
    def n_nuclei(self) -> int:
        return self.donor_nuclei + self.acceptor_nuclei

    @property
    def n_particles(self) -> int:
        return 2 + self.n_nuclei

    @property
    def dim(self) -> int:
        return 2 ** self.n_particles


@dataclass(frozen=True)
class Operator:
    """A dense operator on the full Hilbert space.

    Args:
        matrix: square complex matrix.
        hermitian: if True, Hermiticity is checked on construction
            (max-norm deviation below 1e-12) and rejected otherwise.
    """

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got {m.shape}")
        if self.hermitian and np.abs(m - m.conj().T).max() > _HERM_TOL:
            raise ValueError("matrix marked hermitian deviates from H = H^dagger")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class StateVector:
    """A pure state; unit norm within 1e-10 is enforced on construction."""

    data: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.data, dtype=complex).ravel()
        if abs(np.linalg.norm(v) - 1.0) > _NORM_TOL:
            raise ValueError("state vector is not normalized")
        object.__setattr__(self, "data", _readonly(v))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.data, self.data.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """A density operator; trace one, Hermitian and positive semidefinite
    (eigenvalues >= -1e-10) are enforced on construction."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if abs(np.trace(m) - 1.0) > _NORM_TOL:
            raise ValueError("density matrix trace differs from one")
        if np.abs(m - m.conj().T).max() > _HERM_TOL:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -_PSD_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def embed(local: np.ndarray, particle: int, system: SpinSystem) -> np.ndarray:
    """Embed a 2x2 single-particle operator at the given particle index.

    Index 0 is the donor electron, 1 the acceptor electron, then donor
    nuclei and acceptor nuclei in order.
    """
    if not 0 <= particle < system.n_particles:
        raise ValueError(f"particle index {particle} outside system of {system.n_particles}")
    out = np.array([[1.0 + 0j]])
    for i in range(system.n_particles):
        out = np.kron(out, local if i == particle else _id2)
    return out


def spin_ops(particle: int, system: SpinSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s_x, s_y, s_z) of one particle, embedded in the full space."""
    return (
        embed(_sx, particle, system),
        embed(_sy, particle, system),
        embed(_sz, particle, system),
    )


def _singlet_ket_electronic() -> np.ndarray:
    ket = np.zeros(4, dtype=complex)
    ket[1] = 1 / np.sqrt(2)   # |ud>
    ket[2] = -1 / np.sqrt(2)  # |du>
    return ket


def singlet_projector(system: SpinSystem) -> Operator:
    """Q_S = |S><S| on the electrons, identity on the nuclei."""
    s = _singlet_ket_electronic()
    qs_el = np.outer(s, s.conj())
    dim_nuc = 2 ** system.n_nuclei
    return Operator(np.kron(qs_el, np.eye(dim_nuc, dtype=complex)), hermitian=True)


def triplet_projector(system: SpinSystem) -> Operator:
    """Q_T = 1 - Q_S."""
    qs = singlet_projector(system).matrix
    return Operator(np.eye(system.dim, dtype=complex) - qs, hermitian=True)


def _nuclear_ket(config: str, n_nuclei: int) -> np.ndarray:
    if len(config) != n_nuclei or any(c not in "ud" for c in config):
        raise ValueError(
            f"nuclear config must be a string of 'u'/'d' of length {n_nuclei}, got {config!r}"
        )
    ket = np.array([1.0 + 0j])
    for c in config:
        ket = np.kron(ket, np.array([1.0, 0.0]) if c == "u" else np.array([0.0, 1.0]))
    return ket


def singlet_state(system: SpinSystem, nuclear: str = "u") -> StateVector:
    """|S> on the electrons tensored with a product nuclear state.

    Args:
        nuclear: one character per nucleus, 'u' (spin up) or 'd' (spin down),
            donor nuclei first.
    """
    ket = np.kron(_singlet_ket_electronic(), _nuclear_ket(nuclear, system.n_nuclei))
    return StateVector(ket)


def mixed_singlet(system: SpinSystem) -> DensityMatrix:
    """Electron singlet with fully mixed nuclei: Q_S / Tr{Q_S}."""
    qs = singlet_projector(system).matrix
    return DensityMatrix(qs / np.trace(qs).real)


def singlet_ensemble(system: SpinSystem) -> tuple[tuple[float, StateVector], ...]:
    """The mixed nuclear state as a classical ensemble.

    Returns equally weighted (weight, |S> x |nuclear basis state|) pairs, one
    per nuclear configuration. Pooling their density matrices reproduces
    `mixed_singlet`, but keeping the components lets yield statistics average
    each sub-ensemble's fluctuations instead of pooling the mean curves.
    """
    n = system.n_nuclei
    weight = 1.0 / 2**n
    configs = ("".join(bits) for bits in itertools.product("ud", repeat=n))
    return tuple((weight, singlet_state(system, nuclear=c)) for c in configs)


def ghz_state(system: SpinSystem, phase: float = 0.0) -> StateVector:
    """(|uu...U> + e^{i phase} |dd...D>)/sqrt(2) over all particles."""
    ket = np.zeros(system.dim, dtype=complex)
    ket[0] = 1 / np.sqrt(2)
    ket[-1] = np.exp(1j * phase) / np.sqrt(2)
    return StateVector(ket)


def ghz_coherence_operator(system: SpinSystem) -> Operator:
    """The coherence probe X = |uu...U><dd...D| + h.c. for the GHZ pair."""
    x = np.zeros((system.dim, system.dim), dtype=complex)
    x[0, -1] = 1.0
    x[-1, 0] = 1.0
    return Operator(x, hermitian=True)
