"""Quantum Fisher information limits on magnetic-field estimation.

For evolution U_B = exp(-i H_B t), the generator of field translations

    h_B = i (d U_B / dB) U_B^dagger = t * int_0^1 e^{-iutH} (dH/dB) e^{iutH} du

carries all attainable field information: the maximum quantum Fisher
information over initial states is F_B^max = (lambda_max(h_B) -
lambda_min(h_B))^2, attained by (|lambda_max> + e^{i phi} |lambda_min>)/
sqrt(2). In the eigenbasis of H the integral is exact,

    (h_B)_kl = V_kl (1 - e^{-i(E_k - E_l)t}) / (i(E_k - E_l)),

with V = dH/dB, and (h_B)_kl = t V_kl inside degenerate clusters. Since
V = -(s_Dz + s_Az) - gamma_n sum I_z has unit norm for gamma_n = 0, the
operator-norm bound ||h_B|| <= t holds for any hyperfine structure, any
exchange coupling and any nucleus count.

Folding F_B^max over the exponentially distributed recombination time
(lifetime tau = 1/k) gives the reaction-weighted Cramer-Rao bound

    deltaB = [nu0 * int_0^inf F(t) k e^{-kt} dt]^{-1/2};

for F = alpha t^2 this is 1/(sqrt(2 alpha) tau), and the best single-nucleus
radical-pair value (F = 4 t^2, spheroidal tensors) is deltaB_F =
1/(sqrt(8) tau).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import NumericalError
from .hamiltonians import (
    HamiltonianSpec,
    build,
    degeneracy_tolerance,
    eigendecompose,
    field_derivative,
    spin_system_for,
)
from .spincore import Operator, SpinSystem, StateVector

__all__ = [
    "GeneratorResult",
    "BoundResult",
    "field_generator",
    "max_qfi",
    "zeeman_chain_qfi",
    "optimal_state",
    "generator_eigs_spheroidal",
    "generator_eigs_ellipsoidal",
    "delta_b_fundamental",
    "delta_b_floor",
]


@dataclass(frozen=True)
class GeneratorResult:
    """The generator h_B at one evolution time.

    Attributes:
        operator: h_B as a Hermitian Operator.
        eigenvalues: ascending eigenvalues of h_B.
        eigenvectors: matching eigenvector columns.
        lambda_max / lambda_min: extreme eigenvalues.
        f_max: (lambda_max - lambda_min)^2, the state-optimized QFI.
        extreme_degenerate: True when either extreme eigenvalue sits in a
            degenerate cluster, in which case the optimal state is not
            unique and `optimal_state` returns one representative.
    """

    t: float
    operator: Operator
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    lambda_max: float
    lambda_min: float
    f_max: float
    extreme_degenerate: bool


def _phase_kernel(omega: np.ndarray, t: float, tol: float) -> np.ndarray:
    """(1 - exp(-i w t)) / (i w), elementwise, with the w -> 0 limit t."""
    near_zero = np.abs(omega) < tol
    safe = np.where(near_zero, 1.0, omega)
    kernel = (1.0 - np.exp(-1j * safe * t)) / (1j * safe)
    return np.where(near_zero, t + 0j, kernel)


def _spectral_generator(hamiltonian: Operator, v: np.ndarray, t: float) -> GeneratorResult:
    """h_B from dense (H, dH/dB) via the eigenbasis phase kernel."""
    dec = eigendecompose(hamiltonian)
    u = dec.vectors
    v_eig = u.conj().T @ v @ u
    omega = dec.values[:, None] - dec.values[None, :]
    hb_eig = v_eig * _phase_kernel(omega, t, degeneracy_tolerance(dec.values))
    hb = u @ hb_eig @ u.conj().T
    hb = 0.5 * (hb + hb.conj().T)
    lam, vecs = np.linalg.eigh(hb)
    tol = 1e-9 * max(1.0, float(np.abs(lam).max()))
    degenerate = bool(
        np.sum(np.abs(lam - lam[-1]) < tol) > 1 or np.sum(np.abs(lam - lam[0]) < tol) > 1
    )
    lam_max, lam_min = float(lam[-1]), float(lam[0])
    return GeneratorResult(
        t=float(t),
        operator=Operator(hb, hermitian=True),
        eigenvalues=lam,
        eigenvectors=vecs,
        lambda_max=lam_max,
        lambda_min=lam_min,
        f_max=(lam_max - lam_min) ** 2,
        extreme_degenerate=degenerate,
    )


def field_generator(
    spec: HamiltonianSpec, t: float, system: SpinSystem | None = None
) -> GeneratorResult:
    """Exact spectral evaluation of h_B = i (d_B U_B) U_B^dagger."""
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    if system is None:
        system = spin_system_for(spec)
    return _spectral_generator(
        build(spec, system), field_derivative(spec, system).matrix, t
    )


def max_qfi(spec: HamiltonianSpec, t: float, system: SpinSystem | None = None) -> float:
    """State-optimized quantum Fisher information at time t."""
    return field_generator(spec, t, system).f_max


def zeeman_chain_qfi(n: int, t: float, b: float = 1.0) -> float:
    """Max QFI for n uncoupled spin-1/2 particles in a common field.

    H = -B sum_i s_z^(i) with no hyperfine structure; the chain is the
    textbook ladder between the electron pair (n = 2, F = 4t^2) and the
    Heisenberg scaling F = n^2 t^2 reached by the GHZ preparation. Runs
    through the same spectral kernel as field_generator rather than
    asserting the closed form.
    """
    if n < 1:
        raise ValueError("chain needs at least one spin")
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    sz = np.diag([0.5, -0.5]).astype(complex)
    sz_total = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        term = np.eye(1, dtype=complex)
        for j in range(n):
            term = np.kron(term, sz if j == i else np.eye(2, dtype=complex))
        sz_total += term
    return _spectral_generator(
        Operator(-b * sz_total, hermitian=True), -sz_total, t
    ).f_max


def optimal_state(gen: GeneratorResult, phase: float = 0.0) -> StateVector:
    """(|lambda_max> + e^{i phase} |lambda_min>)/sqrt(2).

    If an extreme eigenspace is degenerate (gen.extreme_degenerate), the
    first eigenvector of that eigenspace is used; any unit vector in the
    eigenspace would reach the same Fisher information.
    """
    v_max = gen.eigenvectors[:, -1]
    v_min = gen.eigenvectors[:, 0]
    return StateVector((v_max + np.exp(1j * phase) * v_min) / np.sqrt(2))


def generator_eigs_spheroidal(a: float, b: float, t: float) -> np.ndarray:
    """Closed-form h_B spectrum for spheroidal tensors (Ax = Ay = a).

    Independent of the axial coupling Az. Returns the eight eigenvalues
    ascending: {0, 0, +-t, +-t/2 +- R} with
    R = sqrt((a^2+b^2) b^2 t^2 + 2 a^2 (1 - cos(sqrt(a^2+b^2) t))) / (2(a^2+b^2)).
    """
    alpha_sq = a * a + b * b
    if alpha_sq == 0.0:
        r = 0.5 * t
    else:
        alpha = np.sqrt(alpha_sq)
        radicand = alpha_sq * b * b * t * t + 2 * a * a * (1.0 - np.cos(alpha * t))
        r = np.sqrt(max(radicand, 0.0)) / (2 * alpha_sq)
    eigs = np.array([0.0, 0.0, t, -t, t / 2 + r, t / 2 - r, -t / 2 + r, -t / 2 - r])
    return np.sort(eigs)


def _bracket_ratio(s: float, b: float, t: float) -> float:
    """sqrt(b^2 (s^2+4b^2) t^2 + 4 s^2 sin^2(sqrt(s^2+4b^2) t/4)) / (s^2+4b^2)."""
    d = s * s + 4 * b * b
    if d == 0.0:
        return 0.5 * t
    root = np.sqrt(d)
    radicand = b * b * d * t * t + 4 * s * s * np.sin(root * t / 4) ** 2
    return float(np.sqrt(max(radicand, 0.0)) / d)


def generator_eigs_ellipsoidal(ax: float, ay: float, b: float, t: float) -> np.ndarray:
    """Closed-form h_B spectrum for a fully anisotropic tensor.

    Independent of the axial coupling Az. With G(s) defined from the
    bracket ratio at s = Ax +- Ay, the eight eigenvalues pair
    symmetrically: +-t/2 +- G(Ax + Ay) and +-t/2 +- G(Ax - Ay), all
    bounded by |lambda| <= t. Setting Ax = Ay recovers the spheroidal
    spectrum (the zero modes appear as t/2 - G = 0 and -t/2 + G = 0).
    """
    g_plus = _bracket_ratio(ax + ay, b, t)
    g_minus = _bracket_ratio(ax - ay, b, t)
    eigs = np.array(
        [
            t / 2 + g_plus,
            t / 2 - g_plus,
            t / 2 + g_minus,
            t / 2 - g_minus,
            -t / 2 + g_plus,
            -t / 2 - g_plus,
            -t / 2 + g_minus,
            -t / 2 - g_minus,
        ]
    )
    return np.sort(eigs)


@dataclass(frozen=True)
class BoundResult:
    """A reaction-weighted Cramer-Rao bound on deltaB."""

    delta_b: float
    fisher_integral: float
    k: float
    nu0: float

    @property
    def delta_b_tau(self) -> float:
        """deltaB in units of the inverse lifetime."""
        return self.delta_b / self.k


def delta_b_fundamental(
    f_of_t: Callable[[float], float], k: float, nu0: float = 1.0
) -> BoundResult:
    """deltaB = [nu0 * int_0^inf F(t) k e^{-kt} dt]^{-1/2}.

    The integral runs over [0, 50/k] with adaptive quadrature (the
    exponential weight makes the remainder negligible).
    """
    if k <= 0:
        raise ValueError("recombination rate k must be positive")
    if nu0 <= 0:
        raise ValueError("population nu0 must be positive")
    integral, _ = integrate.quad(
        lambda t: f_of_t(t) * k * np.exp(-k * t),
        0.0,
        50.0 / k,
        epsabs=1e-10,
        epsrel=1e-12,
        limit=500,
    )
    if integral <= 0:
        raise NumericalError("Fisher-information integral is not positive")
    return BoundResult(
        delta_b=1.0 / np.sqrt(nu0 * integral),
        fisher_integral=float(integral),
        k=float(k),
        nu0=float(nu0),
    )


def delta_b_floor(k: float, nu0: float = 1.0) -> float:
    """The radical-pair quantum limit deltaB_F = 1/sqrt(8 nu0) / tau."""
    if k <= 0:
        raise ValueError("recombination rate k must be positive")
    return k / np.sqrt(8.0 * nu0)
