"""Optimal preparation and readout for radical-pair magnetometry.

The extreme eigenvectors of the generator h_B in a spheroidal (or isotropic)
pair are the fully polarized levels |up,up,Up> and |down,down,Down>, so the
Fisher-optimal preparation is the GHZ-type superposition

    |psi> = (|up,up,Up> + e^{i phi} |down,down,Down>) / sqrt(2).

Under an isotropic hyperfine coupling both branches are H eigenstates with
splitting 2B, independent of A, so the coherence observable
X = |uuU><ddD| + h.c. precesses as <X>_t = cos(2Bt):

* a time-resolved +-1 record of X saturates the fundamental bound,
  1/(deltaB)_t^2 = 4 t^2 and deltaB = deltaB_F = 1/(sqrt(8) tau);

* the time-averaged X yield Y_X = k^2 / (4B^2 + k^2) gives
  deltaB = (4B^2+k^2)^2 / (sqrt(8) k^2 sqrt(16B^2+k^2)),
  which equals deltaB_F only at B -> 0.

The singlet-born chemical pair never reaches this preparation on its own:
its overlap with the evolving optimal state vanishes identically for
isotropic coupling (magnetization conservation) and stays below
A^2/(4A^2+16B^2) for the maximally anisotropic variant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import HamiltonianSpec, build, eigendecompose, spin_system_for
from .qfi import BoundResult, delta_b_fundamental
from .spincore import SpinSystem, StateVector, ghz_state, singlet_state

__all__ = [
    "OptimalYieldResult",
    "x_expectation",
    "deltaB_timeresolved",
    "deltaB_integrated_optimal",
    "overlap_with_optimal",
    "overlap_aniso_analytic",
]


def x_expectation(b: float, t: np.ndarray | float) -> np.ndarray:
    """<X>_t = cos(2Bt) for the GHZ coherence under isotropic coupling.

    Independent of the hyperfine strength: both GHZ branches carry the same
    hyperfine energy, so only the Zeeman splitting 2B beats.
    """
    return np.cos(2.0 * b * np.asarray(t, dtype=float))


def deltaB_timeresolved(k: float, nu0: float = 1.0) -> BoundResult:
    """deltaB from the time-resolved X record; saturates the quantum limit.

    The +-1 outcome at recombination time t has mean cos(2Bt), so its
    classical Fisher information is (2t sin)^2 / sin^2 = 4 t^2 at every t.
    """
    return delta_b_fundamental(lambda t: 4.0 * t * t, k, nu0)


@dataclass(frozen=True)
class OptimalYieldResult:
    """Time-averaged X readout of the GHZ preparation."""

    y_x: float
    dyx_db: float
    delta_y_x: float
    delta_b: float
    k: float
    nu0: float

    @property
    def delta_b_tau(self) -> float:
        return self.delta_b / self.k


def deltaB_integrated_optimal(b: float, k: float, nu0: float = 1.0) -> OptimalYieldResult:
    """Sensitivity when only the reaction-averaged X yield is recorded.

    Y_X = int cos(2Bt) k e^{-kt} dt = k^2/(4B^2+k^2); the per-pair outcome
    variance averages to 8B^2/(16B^2+k^2).
    """
    if k <= 0 or nu0 <= 0:
        raise ValueError("k and nu0 must be positive")
    b2, k2 = b * b, k * k
    y_x = k2 / (4 * b2 + k2)
    dyx_db = -8 * b * k2 / (4 * b2 + k2) ** 2
    delta_y_sq = 8 * b2 / (16 * b2 + k2)
    delta_y = np.sqrt(delta_y_sq)
    if dyx_db == 0.0:
        delta_b = 0.0 if delta_y == 0.0 else np.inf
        if b == 0.0:
            # B -> 0 limit of (4B^2+k^2)^2 / (sqrt8 k^2 sqrt(16B^2+k^2)).
            delta_b = k / np.sqrt(8.0)
    else:
        delta_b = delta_y / abs(dyx_db)
    return OptimalYieldResult(
        y_x=float(y_x),
        dyx_db=float(dyx_db),
        delta_y_x=float(delta_y),
        delta_b=float(delta_b) / np.sqrt(nu0),
        k=float(k),
        nu0=float(nu0),
    )


def overlap_with_optimal(
    spec: HamiltonianSpec,
    t: float,
    initial: StateVector | None = None,
    system: SpinSystem | None = None,
) -> float:
    """|<ghz(-2Bt)|psi(t)>|^2 for the evolving chemical state.

    The reference is the freely precessing optimal preparation, a GHZ state
    whose relative phase advances as -2Bt. The chemical state defaults to
    the singlet pair with all nuclei up.
    """
    if system is None:
        system = spin_system_for(spec)
    if initial is None:
        initial = singlet_state(system, nuclear="u" * system.n_nuclei)
    dec = eigendecompose(build(spec, system))
    psi_t = dec.vectors @ (
        np.exp(-1j * dec.values * t) * (dec.vectors.conj().T @ initial.data)
    )
    target = ghz_state(system, phase=-2.0 * spec.b * t)
    return float(np.abs(np.vdot(target.data, psi_t)) ** 2)


def overlap_aniso_analytic(a: float, b: float, t: np.ndarray | float) -> np.ndarray:
    """Closed-form overlap for the maximally anisotropic one-nucleus pair.

    (A^2 / (4A^2 + 16B^2)) sin^2(sqrt(A^2+4B^2) t / 4); bounded by 1/4.
    """
    t = np.asarray(t, dtype=float)
    beta_sq = a * a + 4 * b * b
    if beta_sq == 0.0:
        return np.zeros_like(t)
    return a * a / (4 * beta_sq) * np.sin(np.sqrt(beta_sq) * t / 4) ** 2
