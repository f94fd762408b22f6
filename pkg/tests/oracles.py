"""Independent numerical oracles.

Everything here deliberately avoids the package's spectral code paths:
time evolution goes through scipy.linalg.expm, the field generator is a
finite difference of the propagator in B, and reaction averages are
adaptive quadrature against dense evolution.  Agreement between these
oracles and the library is the evidence that the closed forms were
transcribed correctly.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from rpmag import (
    DensityMatrix,
    HamiltonianSpec,
    StateVector,
    build,
    singlet_projector,
    spin_system_for,
)


def propagator(spec: HamiltonianSpec, t: float, system=None) -> np.ndarray:
    """U(t) = expm(-i H t) on the dense matrix."""
    if system is None:
        system = spin_system_for(spec)
    h = build(spec, system).matrix
    return expm(-1j * h * t)


def fd_generator(spec: HamiltonianSpec, t: float, db: float = 1e-6) -> np.ndarray:
    """h_B = i (d_B U) U^dagger by central difference in the field."""
    import dataclasses

    system = spin_system_for(spec)
    up = propagator(dataclasses.replace(spec, b=spec.b + db), t, system)
    dn = propagator(dataclasses.replace(spec, b=spec.b - db), t, system)
    u = propagator(spec, t, system)
    du = (up - dn) / (2.0 * db)
    hb = 1j * du @ u.conj().T
    return 0.5 * (hb + hb.conj().T)


def _density(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.density().matrix
    if isinstance(state, DensityMatrix):
        return state.matrix
    return np.asarray(state)


def fidelity_curve(spec: HamiltonianSpec, rho0, observable=None):
    """Callable t -> Tr[rho_t Q] evaluated with dense expm evolution."""
    system = spin_system_for(spec)
    h = build(spec, system).matrix
    q = (observable.matrix if observable is not None
         else singlet_projector(system).matrix)
    rho = _density(rho0)

    def fidelity(t: float) -> float:
        u = expm(-1j * h * t)
        return float(np.real(np.trace(u @ rho @ u.conj().T @ q)))

    return fidelity


def reaction_average(f, k: float, lifetimes: float = 60.0) -> float:
    """int_0^inf f(t) k e^{-kt} dt by adaptive quadrature."""
    val, _ = integrate.quad(
        lambda t: f(t) * k * np.exp(-k * t),
        0.0,
        lifetimes / k,
        epsabs=1e-11,
        epsrel=1e-11,
        limit=2000,
    )
    return val


def integrated_yield(spec: HamiltonianSpec, rho0, k: float) -> float:
    """Y = int Tr[rho_t Q_S] k e^{-kt} dt via expm + quadrature."""
    return reaction_average(fidelity_curve(spec, rho0), k)


def conditional_variance(spec: HamiltonianSpec, components, k: float) -> float:
    """int p(1-p) k e^{-kt} dt averaged over preparation components.

    `components` is a sequence of (weight, state); each sub-ensemble keeps
    its own Bernoulli variance before the weights pool them.
    """
    total = 0.0
    for weight, state in components:
        p = fidelity_curve(spec, state)
        total += weight * reaction_average(lambda t: p(t) * (1.0 - p(t)), k)
    return total


def central_difference(f, x: float, h: float) -> float:
    """Fourth-order five-point stencil for df/dx."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
