"""Magnetic-field sensitivity of radical-pair reaction yields.

A radical pair born in the electronic singlet recombines at rate k, and the
singlet yield is the exponentially weighted time average of the singlet
fidelity p(t) = Tr[Q_S rho(t)],

    Y_S = int_0^inf p(t) k e^{-kt} dt.

In the eigenbasis of H both p(t) and its Laplace-type averages are exact
finite sums over Bohr frequencies w_kl = E_k - E_l:

    p(t)  = sum_kl M_kl e^{-i w_kl t},          M_kl = rho_kl Q_lk,
    Y_S   = sum_kl M_kl k / (k + i w_kl),
    <p^2> = sum_{kl,mn} M_kl M_mn k / (k + i(w_kl + w_mn)).

Two field-estimation strategies are bounded here, both normalized per
radical pair (multiply the Fisher integral by the pair number nu0):

* integrated yield: a shot of nu0 pairs gives a binomial-like yield
  estimate with variance <= Y_S (1 - Y_S), so
  deltaB = sqrt(Y_S - <p^2>) / (sqrt(nu0) |dY_S/dB|),
  where Y_S - <p^2> is the reaction-time average of p(1-p);

* time-resolved recombination record: each pair recombining at time t is a
  Bernoulli trial with success probability p(t), worth Fisher information
  (d_B p)^2 / [p(1-p)], so
  deltaB = [nu0 int_0^inf (d_B p)^2 / (p(1-p)) k e^{-kt} dt]^{-1/2}.

For a single spin-1/2 nucleus the isotropic (A,A,A) and maximally
anisotropic (A,0,0) hyperfine variants admit closed-form yields,
closed-form d_B p(t), and simple large-A limits of deltaB; those expressions
are provided alongside the numerically exact spectral engine.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import ConfigError, NumericalError
from .hamiltonians import (
    HamiltonianSpec,
    build,
    eigendecompose,
    isotropic,
    max_anisotropic,
    spin_system_for,
)
from .qfi import BoundResult
from .spincore import (
    DensityMatrix,
    Operator,
    SpinSystem,
    StateVector,
    singlet_ensemble,
    singlet_projector,
    singlet_state,
)

State = DensityMatrix | StateVector
#: A preparation: either one state, or a classical ensemble of weighted
#: sub-populations whose yield fluctuations are averaged component-wise.
Preparation = State | Sequence[tuple[float, State]]

__all__ = [
    "EvolutionCache",
    "YieldResult",
    "SensitivityGrid",
    "build_cache",
    "singlet_fidelity",
    "laplace_average",
    "second_moment_average",
    "dB_derivative",
    "deltaB_integrated",
    "deltaB_instantaneous",
    "yield_iso_up",
    "yield_iso_down",
    "yield_iso_mixed",
    "yield_aniso",
    "sensitivity_iso_up",
    "sensitivity_iso_down",
    "sensitivity_iso_mixed",
    "sensitivity_aniso",
    "delta_b_iso_large_a",
    "delta_b_aniso_large_a",
    "evaluate_point",
    "sweep_grid",
    "optimal_operating_point",
]

_TIME_CHUNK = 8192
_VARIANCE_CLIP = 1e-12


@dataclass(frozen=True)
class EvolutionCache:
    """Spectral data for evaluating Tr[Q rho(t)] and its Laplace averages.

    Only the (frequency, amplitude) pairs with non-negligible amplitude are
    kept, so fidelity evaluation is a short phase sum per time point.
    """

    energies: np.ndarray
    omega: np.ndarray
    amplitudes: np.ndarray

    @property
    def span(self) -> float:
        """Full spectral width of H, the fastest Bohr frequency present."""
        return float(self.energies[-1] - self.energies[0])


def build_cache(
    spec: HamiltonianSpec,
    rho0: DensityMatrix | StateVector,
    observable: Operator | None = None,
    system: SpinSystem | None = None,
) -> EvolutionCache:
    """Diagonalize H once and fold the state and observable into it."""
    if system is None:
        system = spin_system_for(spec)
    if observable is None:
        observable = singlet_projector(system)
    if isinstance(rho0, StateVector):
        rho0 = rho0.density()
    dec = eigendecompose(build(spec, system))
    u = dec.vectors
    rho_eig = u.conj().T @ rho0.matrix @ u
    q_eig = u.conj().T @ observable.matrix @ u
    m = rho_eig * q_eig.T
    omega = (dec.values[:, None] - dec.values[None, :]).ravel()
    m = m.ravel()
    keep = np.abs(m) > 1e-16
    return EvolutionCache(energies=dec.values, omega=omega[keep], amplitudes=m[keep])


def singlet_fidelity(cache: EvolutionCache, times: np.ndarray | float) -> np.ndarray:
    """p(t) = sum M e^{-i w t}, vectorized over times."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(times.size)
    for start in range(0, times.size, _TIME_CHUNK):
        ts = times[start : start + _TIME_CHUNK]
        phases = np.exp(-1j * cache.omega[:, None] * ts[None, :])
        out[start : start + ts.size] = np.real(cache.amplitudes @ phases)
    return out


def laplace_average(cache: EvolutionCache, k: float) -> float:
    """int_0^inf p(t) k e^{-kt} dt, exact."""
    if k <= 0:
        raise ValueError("recombination rate k must be positive")
    return float(np.real(np.sum(cache.amplitudes * k / (k + 1j * cache.omega))))


def second_moment_average(cache: EvolutionCache, k: float) -> float:
    """int_0^inf p(t)^2 k e^{-kt} dt, exact double sum."""
    if k <= 0:
        raise ValueError("recombination rate k must be positive")
    omega_sum = cache.omega[:, None] + cache.omega[None, :]
    kernel = k / (k + 1j * omega_sum)
    return float(np.real(cache.amplitudes @ kernel @ cache.amplitudes))


def dB_derivative(
    f: Callable[[float], float],
    b: float,
    h: float | None = None,
    scale: float = 1.0,
) -> float:
    """Fourth-order central derivative df/dB with a field-aware step."""
    if h is None:
        h = 1e-4 * max(abs(b), scale)
    if h <= 0:
        raise ValueError("derivative step must be positive")
    return (-f(b + 2 * h) + 8 * f(b + h) - 8 * f(b - h) + f(b - 2 * h)) / (12 * h)


@dataclass(frozen=True)
class YieldResult:
    """Integrated-yield estimate of the field sensitivity."""

    y_s: float
    y_t: float
    dys_db: float
    delta_b: float
    k: float
    nu0: float

    @property
    def delta_b_tau(self) -> float:
        """deltaB in units of the inverse lifetime."""
        return self.delta_b / self.k


def _caches_at(
    spec: HamiltonianSpec,
    fields: Sequence[float],
    rho0: DensityMatrix | StateVector,
    observable: Operator | None,
    system: SpinSystem,
) -> list[EvolutionCache]:
    return [
        build_cache(dataclasses.replace(spec, b=bb), rho0, observable, system)
        for bb in fields
    ]


def _as_components(rho0: Preparation) -> tuple[tuple[float, State], ...]:
    """Normalize a preparation to weighted components summing to one."""
    if isinstance(rho0, (DensityMatrix, StateVector)):
        return ((1.0, rho0),)
    components = tuple((float(w), state) for w, state in rho0)
    if not components:
        raise ConfigError("preparation must contain at least one component")
    total = sum(w for w, _ in components)
    if any(w < 0 for w, _ in components) or abs(total - 1.0) > 1e-9:
        raise ConfigError("component weights must be nonnegative and sum to 1")
    return components


def deltaB_integrated(
    spec: HamiltonianSpec,
    rho0: Preparation,
    k: float,
    nu0: float = 1.0,
    observable: Operator | None = None,
    system: SpinSystem | None = None,
    h: float | None = None,
) -> YieldResult:
    """Field sensitivity of the recombination yield itself.

    deltaB = sqrt(int p(1-p) k e^{-kt} dt) / (sqrt(nu0) |dY_S/dB|), with the
    yield derivative taken by a fourth-order stencil in B. When rho0 is a
    weighted sequence of states it is treated as a classical ensemble: the
    yield and its derivative pool linearly while the fluctuation integral
    averages each sub-ensemble's p_c(1-p_c) curve.
    """
    if k <= 0 or nu0 <= 0:
        raise ValueError("k and nu0 must be positive")
    if system is None:
        system = spin_system_for(spec)
    b = spec.b
    if h is None:
        h = 1e-4 * max(abs(b), k)
    y_s = 0.0
    var_integral = 0.0
    ys_shifted = np.zeros(4)
    for weight, state in _as_components(rho0):
        nominal = build_cache(spec, state, observable, system)
        y_c = laplace_average(nominal, k)
        y_s += weight * y_c
        var_integral += weight * (y_c - second_moment_average(nominal, k))
        stencil = _caches_at(
            spec, [b + 2 * h, b + h, b - h, b - 2 * h], state, observable, system
        )
        ys_shifted += weight * np.array([laplace_average(c, k) for c in stencil])
    dys_db = (-ys_shifted[0] + 8 * ys_shifted[1] - 8 * ys_shifted[2] + ys_shifted[3]) / (
        12 * h
    )
    if var_integral < -1e-10:
        raise NumericalError("negative yield-fluctuation integral")
    var_integral = max(var_integral, 0.0)
    if dys_db == 0.0:
        delta_b = np.inf
    else:
        delta_b = np.sqrt(var_integral) / (np.sqrt(nu0) * abs(dys_db))
    return YieldResult(
        y_s=y_s,
        y_t=1.0 - y_s,
        dys_db=float(dys_db),
        delta_b=float(delta_b),
        k=float(k),
        nu0=float(nu0),
    )


def _quadrature_nodes(span: float, k: float, t_max_lifetimes: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite 16-point Gauss-Legendre grid resolving the fastest beat."""
    t_max = t_max_lifetimes / k
    if span > 0:
        panel = min(2 * (2 * np.pi / span), t_max)
    else:
        panel = t_max
    n_panels = min(int(np.ceil(t_max / panel)), 200_000)
    edges = np.linspace(0.0, t_max, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(16)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def deltaB_instantaneous(
    spec: HamiltonianSpec,
    rho0: Preparation,
    k: float,
    nu0: float = 1.0,
    observable: Operator | None = None,
    system: SpinSystem | None = None,
    h: float | None = None,
    t_max_lifetimes: float = 40.0,
) -> BoundResult:
    """Field sensitivity of the time-resolved recombination record.

    Each recombination event at time t reveals singlet vs triplet with
    probability p(t), worth classical Fisher information
    (d_B p)^2 / [p(1-p)]. Times where p(1-p) < 1e-12 are conservatively
    dropped (the removable 0/0 limit carries finite information). Weighted
    sequences pool the signal p and its derivative linearly and average the
    sub-ensemble variances, mirroring `deltaB_integrated`.
    """
    if k <= 0 or nu0 <= 0:
        raise ValueError("k and nu0 must be positive")
    if system is None:
        system = spin_system_for(spec)
    b = spec.b
    if h is None:
        h = 1e-4 * max(abs(b), k)
    components = _as_components(rho0)
    caches = [
        (w, build_cache(spec, state, observable, system),
         _caches_at(spec, [b + 2 * h, b + h, b - h, b - 2 * h], state, observable, system))
        for w, state in components
    ]
    span = max(nominal.span for _, nominal, _ in caches)
    nodes, weights = _quadrature_nodes(span, k, t_max_lifetimes)
    p = np.zeros_like(nodes)
    var = np.zeros_like(nodes)
    p_shift = np.zeros((4, nodes.size))
    for w, nominal, stencil in caches:
        p_c = np.clip(singlet_fidelity(nominal, nodes), 0.0, 1.0)
        p += w * p_c
        var += w * p_c * (1.0 - p_c)
        p_shift += w * np.array([singlet_fidelity(c, nodes) for c in stencil])
    g = (-p_shift[0] + 8 * p_shift[1] - 8 * p_shift[2] + p_shift[3]) / (12 * h)
    fisher = np.where(var > _VARIANCE_CLIP, g * g / np.where(var > 0, var, 1.0), 0.0)
    integral = float(np.sum(weights * fisher * k * np.exp(-k * nodes)))
    if integral <= 0:
        raise NumericalError("time-resolved Fisher integral is not positive")
    return BoundResult(
        delta_b=1.0 / np.sqrt(nu0 * integral),
        fisher_integral=integral,
        k=float(k),
        nu0=float(nu0),
    )


# ---------------------------------------------------------------------------
# Closed forms for one spin-1/2 nucleus on the donor electron.
# ---------------------------------------------------------------------------


def _yield_iso(a: float, b: float, k: float, sign: float) -> float:
    if k <= 0:
        raise ValueError("recombination rate k must be positive")
    a2, b2, k2 = a * a, b * b, k * k
    if a2 + b2 == 0.0:
        return 1.0
    term1 = (3 * a2 + 4 * b2) / (a2 + b2)
    term2 = a2 * k2 / ((a2 + b2) * (a2 + b2 + k2))
    num3 = 8 * (a2 + sign * 2 * a * b + 2 * b2) * k2 + 16 * k2 * k2
    den3 = a2 * b2 + 4 * (a2 + sign * a * b + b2) * k2 + 4 * k2 * k2
    return (term1 + term2 + num3 / den3) / 8.0


def yield_iso_up(a: float, b: float, k: float) -> float:
    """Singlet yield, isotropic coupling, singlet pair with nucleus up."""
    return _yield_iso(a, b, k, +1.0)


def yield_iso_down(a: float, b: float, k: float) -> float:
    """Singlet yield, isotropic coupling, singlet pair with nucleus down."""
    return _yield_iso(a, b, k, -1.0)


def yield_iso_mixed(a: float, b: float, k: float) -> float:
    """Singlet yield, isotropic coupling, maximally mixed singlet Q_S/2."""
    return 0.5 * (yield_iso_up(a, b, k) + yield_iso_down(a, b, k))


def yield_aniso(a: float, b: float, k: float) -> float:
    """Singlet yield, maximally anisotropic coupling (A,0,0), state Q_S/2.

    At b = 0 this reduces to 1 - a^2 / (2(a^2 + 4k^2)).
    """
    if k <= 0:
        raise ValueError("recombination rate k must be positive")
    if a == 0.0:
        return 1.0
    a2, b2, k2 = a * a, b * b, k * k
    a4 = a2 * a2
    term1 = a2 * b2 / (4 * (a2 + 4 * b2) * (b2 + k2))
    term2 = (
        a4
        * (a2 + 8 * b2 + 4 * k2)
        / (4 * (a2 + 4 * b2) * (a4 + 8 * (a2 + 8 * b2) * k2 + 16 * k2 * k2))
    )
    term3 = a2 / (4 * (a2 + 4 * b2 + 4 * k2))
    return 1.0 - term1 - term2 - term3


def sensitivity_iso_up(a: float, b: float, t: np.ndarray | float) -> np.ndarray:
    """d_B p(t), isotropic coupling, nucleus up."""
    t = np.asarray(t, dtype=float)
    alpha_sq = a * a + b * b
    if alpha_sq == 0.0:
        return np.zeros_like(t)
    alpha = np.sqrt(alpha_sq)
    first = alpha * t * np.cos(alpha * t / 2) - 2 * np.sin(alpha * t / 2)
    second = alpha * np.sin((a + b) * t / 2) + b * np.sin(alpha * t / 2)
    return -a * a / (4 * alpha_sq * alpha_sq) * first * second


def sensitivity_iso_down(a: float, b: float, t: np.ndarray | float) -> np.ndarray:
    """d_B p(t), isotropic coupling, nucleus down."""
    t = np.asarray(t, dtype=float)
    alpha_sq = a * a + b * b
    if alpha_sq == 0.0:
        return np.zeros_like(t)
    alpha = np.sqrt(alpha_sq)
    first = alpha * t * np.cos(alpha * t / 2) - 2 * np.sin(alpha * t / 2)
    second = alpha * np.sin((a - b) * t / 2) - b * np.sin(alpha * t / 2)
    return a * a / (4 * alpha_sq * alpha_sq) * first * second


def sensitivity_iso_mixed(a: float, b: float, t: np.ndarray | float) -> np.ndarray:
    """d_B p(t), isotropic coupling, maximally mixed singlet Q_S/2.

    Identically the average of the nucleus-up and nucleus-down expressions.
    """
    return 0.5 * (sensitivity_iso_up(a, b, t) + sensitivity_iso_down(a, b, t))


def sensitivity_aniso(a: float, b: float, t: np.ndarray | float) -> np.ndarray:
    """d_B p(t), maximally anisotropic coupling (A,0,0), state Q_S/2."""
    t = np.asarray(t, dtype=float)
    beta_sq = a * a + 4 * b * b
    if beta_sq == 0.0:
        return np.zeros_like(t)
    beta = np.sqrt(beta_sq)
    first = beta * t * np.cos(beta * t / 4) - 4 * np.sin(beta * t / 4)
    second = beta * np.cos(b * t / 2) * np.cos(beta * t / 4) + 2 * b * np.sin(
        b * t / 2
    ) * np.sin(beta * t / 4)
    return -a * a / (beta_sq * beta_sq) * np.sin(b * t / 2) * first * second


def delta_b_iso_large_a(b: float, k: float) -> float:
    """Large-A limit of the integrated-yield deltaB, isotropic Q_S/2 pair."""
    b2, k2 = b * b, k * k
    return (
        (b2 + 4 * k2) ** 1.5
        / (16 * b * k2)
        * np.sqrt(1.5 * (7 * b2 * b2 + 39 * b2 * k2 + 28 * k2 * k2) / (b2 + k2))
    )


def delta_b_aniso_large_a(b: float, k: float) -> float:
    """Large-A limit of the integrated-yield deltaB, anisotropic Q_S/2 pair."""
    b2, k2 = b * b, k * k
    return (
        (b2 + k2) ** 1.5
        / (2 * b * k2)
        * np.sqrt((7 * b2 * b2 + 12 * b2 * k2 + 2 * k2 * k2) / (4 * b2 + k2))
    )


# ---------------------------------------------------------------------------
# Sweeps over coupling/field grids.
# ---------------------------------------------------------------------------

_VARIANTS = ("isotropic", "anisotropic")
_STATES = ("up", "down", "mixed")
_MODES = ("integrated", "instantaneous")


def _spec_for(variant: str, a: float, b: float) -> HamiltonianSpec:
    if variant == "isotropic":
        return isotropic(a, b)
    if variant == "anisotropic":
        return max_anisotropic(a, b)
    raise ConfigError(f"unknown variant {variant!r}; expected one of {_VARIANTS}")


def _state_for(state: str, system: SpinSystem) -> Preparation:
    if state == "up":
        return singlet_state(system, nuclear="u").density()
    if state == "down":
        return singlet_state(system, nuclear="d").density()
    if state == "mixed":
        return singlet_ensemble(system)
    raise ConfigError(f"unknown state {state!r}; expected one of {_STATES}")


def evaluate_point(
    variant: str,
    state: str,
    mode: str,
    a: float,
    b: float,
    k: float,
    nu0: float = 1.0,
) -> float:
    """deltaB for one (variant, state, mode, A, B, k) operating point."""
    spec = _spec_for(variant, a, b)
    system = spin_system_for(spec)
    rho0 = _state_for(state, system)
    if mode == "integrated":
        return deltaB_integrated(spec, rho0, k, nu0=nu0, system=system).delta_b
    if mode == "instantaneous":
        return deltaB_instantaneous(spec, rho0, k, nu0=nu0, system=system).delta_b
    raise ConfigError(f"unknown mode {mode!r}; expected one of {_MODES}")


@dataclass(frozen=True)
class SensitivityGrid:
    """deltaB over a hyperfine x field grid; delta_b[i, j] pairs a_values[i]
    with b_values[j]."""

    variant: str
    state: str
    mode: str
    k: float
    nu0: float
    a_values: np.ndarray
    b_values: np.ndarray
    delta_b: np.ndarray


def sweep_grid(
    variant: str,
    state: str,
    mode: str,
    a_values: Sequence[float],
    b_values: Sequence[float],
    k: float,
    nu0: float = 1.0,
) -> SensitivityGrid:
    """Evaluate deltaB over the Cartesian grid of couplings and fields."""
    a_values = np.asarray(a_values, dtype=float)
    b_values = np.asarray(b_values, dtype=float)
    delta = np.empty((a_values.size, b_values.size))
    for i, a in enumerate(a_values):
        for j, b in enumerate(b_values):
            delta[i, j] = evaluate_point(variant, state, mode, a, b, k, nu0)
    return SensitivityGrid(
        variant=variant,
        state=state,
        mode=mode,
        k=float(k),
        nu0=float(nu0),
        a_values=a_values,
        b_values=b_values,
        delta_b=delta,
    )


def optimal_operating_point(
    delta_b_of_b: Callable[[float], float], b_lo: float, b_hi: float
) -> tuple[float, float]:
    """Minimize deltaB(B) on [b_lo, b_hi]; returns (B_opt, deltaB_opt)."""
    res = optimize.minimize_scalar(
        delta_b_of_b, bounds=(b_lo, b_hi), method="bounded", options={"xatol": 1e-10}
    )
    return float(res.x), float(res.fun)
