"""Radical-pair spin Hamiltonians with diagonal hyperfine tensors.

The full Hamiltonian assembled here is (gamma = 1, frequency units)

    H = -B (s_Dz + s_Az)
        + sum_j  s_D . Atilde_j . I_j      (donor nuclei)
        + sum_k  s_A . atilde_k . I_k      (acceptor nuclei)
        + J s_A . s_D
        - gamma_n B sum_j I_jz             (only when gamma_n != 0),

with every hyperfine tensor diagonal, Atilde = diag(Ax, Ay, Az). The named
single-nucleus variants used across the package:

    isotropic(A, B)           Ax = Ay = Az = A
    spheroidal(A, a, B)       Ax = Ay = A, Az = a
    ellipsoidal(Ax, Ay, a, B) Az = a
    max_anisotropic(A, B)     Ax = A, Ay = Az = 0
    cis(A, J, B)              max_anisotropic plus exchange J s_A.s_D
    trans(A, B)               alias of max_anisotropic
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .spincore import Operator, SpinSystem, embed, spin_ops

__all__ = [
    "HyperfineTensor",
    "HamiltonianSpec",
    "EigenDecomposition",
    "spin_system_for",
    "build",
    "field_derivative",
    "eigendecompose",
    "degeneracy_tolerance",
    "isotropic",
    "spheroidal",
    "ellipsoidal",
    "max_anisotropic",
    "cis",
    "trans",
]


@dataclass(frozen=True)
class HyperfineTensor:
    """Diagonal hyperfine tensor diag(ax, ay, az), frequency units."""

    ax: float
    ay: float
    az: float

    def __post_init__(self) -> None:
        for v in (self.ax, self.ay, self.az):
            if not math.isfinite(v):
                raise ConfigError("hyperfine tensor entries must be finite")

    @classmethod
    def iso(cls, a: float) -> "HyperfineTensor":
        return cls(a, a, a)

    def as_list(self) -> list[float]:
        return [self.ax, self.ay, self.az]


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters defining one radical-pair Hamiltonian."""

    b: float
    donor_tensors: tuple[HyperfineTensor, ...] = ()
    acceptor_tensors: tuple[HyperfineTensor, ...] = ()
    j: float = 0.0
    gamma_n: float = 0.0

    def __post_init__(self) -> None:
        for v in (self.b, self.j, self.gamma_n):
            if not math.isfinite(v):
                raise ConfigError("Hamiltonian parameters must be finite")
        object.__setattr__(self, "donor_tensors", tuple(self.donor_tensors))
        object.__setattr__(self, "acceptor_tensors", tuple(self.acceptor_tensors))

    def to_dict(self) -> dict:
        return {
            "B": self.b,
            "donor_tensors": [t.as_list() for t in self.donor_tensors],
            "acceptor_tensors": [t.as_list() for t in self.acceptor_tensors],
            "J": self.j,
            "gamma_n": self.gamma_n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianSpec":
        try:
            return cls(
                b=float(d["B"]),
                donor_tensors=tuple(HyperfineTensor(*map(float, t)) for t in d["donor_tensors"]),
                acceptor_tensors=tuple(
                    HyperfineTensor(*map(float, t)) for t in d["acceptor_tensors"]
                ),
                j=float(d.get("J", 0.0)),
                gamma_n=float(d.get("gamma_n", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed Hamiltonian spec: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "HamiltonianSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)


def spin_system_for(spec: HamiltonianSpec) -> SpinSystem:
    return SpinSystem(len(spec.donor_tensors), len(spec.acceptor_tensors))


def build(spec: HamiltonianSpec, system: SpinSystem | None = None) -> Operator:
    """Assemble the dense Hamiltonian matrix for a spec."""
    if system is None:
        system = spin_system_for(spec)
    elif (system.donor_nuclei, system.acceptor_nuclei) != (
        len(spec.donor_tensors),
        len(spec.acceptor_tensors),
    ):
        raise ConfigError("spin system does not match the spec's nucleus counts")

    d_ops = spin_ops(0, system)
    a_ops = spin_ops(1, system)
    h = -spec.b * (d_ops[2] + a_ops[2])

    nucleus = 2
    for electron_ops, tensors in ((d_ops, spec.donor_tensors), (a_ops, spec.acceptor_tensors)):
        for tensor in tensors:
            i_ops = spin_ops(nucleus, system)
            for coupling, s_e, i_n in zip(tensor.as_list(), electron_ops, i_ops):
                if coupling != 0.0:
                    h = h + coupling * (s_e @ i_n)
            nucleus += 1

    if spec.j != 0.0:
        h = h + spec.j * sum(sa @ sd for sa, sd in zip(a_ops, d_ops))

    if spec.gamma_n != 0.0:
        for n in range(2, system.n_particles):
            h = h - spec.gamma_n * spec.b * spin_ops(n, system)[2]

    return Operator(h, hermitian=True)


def field_derivative(spec: HamiltonianSpec, system: SpinSystem | None = None) -> Operator:
    """dH/dB = -(s_Dz + s_Az) - gamma_n sum_j I_jz, analytically."""
    if system is None:
        system = spin_system_for(spec)
    v = -(spin_ops(0, system)[2] + spin_ops(1, system)[2])
    if spec.gamma_n != 0.0:
        for n in range(2, system.n_particles):
            v = v - spec.gamma_n * spin_ops(n, system)[2]
    return Operator(v, hermitian=True)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with the matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def eigendecompose(op: Operator) -> EigenDecomposition:
    m = op.matrix
    if np.abs(m - m.conj().T).max() > 1e-12:
        raise ValueError("eigendecompose requires a Hermitian operator")
    values, vectors = np.linalg.eigh(m)
    return EigenDecomposition(values, vectors)


def degeneracy_tolerance(values: np.ndarray) -> float:
    """Eigenvalue clustering tolerance: 1e-9 * max(1, max|E|)."""
    scale = float(np.abs(values).max()) if len(values) else 0.0
    return 1e-9 * max(1.0, scale)


def _one_nucleus(tensor: HyperfineTensor, b: float, j: float = 0.0) -> HamiltonianSpec:
    return HamiltonianSpec(b=b, donor_tensors=(tensor,), j=j)


def isotropic(a: float, b: float) -> HamiltonianSpec:
    """One donor nucleus, Ax = Ay = Az = a."""
    return _one_nucleus(HyperfineTensor.iso(a), b)


def spheroidal(a_perp: float, a_z: float, b: float) -> HamiltonianSpec:
    """One donor nucleus, Ax = Ay = a_perp, Az = a_z."""
    return _one_nucleus(HyperfineTensor(a_perp, a_perp, a_z), b)


def ellipsoidal(ax: float, ay: float, a_z: float, b: float) -> HamiltonianSpec:
    """One donor nucleus, fully anisotropic diagonal tensor."""
    return _one_nucleus(HyperfineTensor(ax, ay, a_z), b)


def max_anisotropic(a: float, b: float) -> HamiltonianSpec:
    """One donor nucleus coupled along x only: A s_Dx I_x."""
    return _one_nucleus(HyperfineTensor(a, 0.0, 0.0), b)


def cis(a: float, j: float, b: float) -> HamiltonianSpec:
    """Closed-switch Hamiltonian: max_anisotropic plus exchange J s_A.s_D."""
    return _one_nucleus(HyperfineTensor(a, 0.0, 0.0), b, j=j)


def trans(a: float, b: float) -> HamiltonianSpec:
    """Open-switch Hamiltonian; identical to max_anisotropic."""
    return max_anisotropic(a, b)
