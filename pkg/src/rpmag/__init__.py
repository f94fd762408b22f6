"""Quantum limits and reaction-control schemes for radical-pair magnetometry.

A radical pair — two unpaired electron spins plus a few nuclear spins,
born in the electronic singlet and recombining with lifetime tau = 1/k —
is a chemical magnetometer. This package computes, in hbar = 1, gamma = 1
units:

* the generator of field translations h_B and the quantum Fisher
  information it bounds, giving the fundamental limit
  deltaB_F = 1/(sqrt(8 nu0) tau) (`qfi`);
* the sensitivity actually delivered by singlet reaction yields, both
  time-integrated and time-resolved, with closed forms for one-nucleus
  isotropic and maximally anisotropic couplings (`yields`);
* the GHZ preparation/readout that saturates the fundamental bound
  (`optimal`);
* the pulsed cis/trans conformation-control protocol that approaches it
  chemically, including exchange-coupling optimization and vibrational
  averaging (`control`);
* a deterministic CLI emitting figure-ready CSV/JSON (`cli`, entry point
  ``rpmag``).
"""

from .control import (
    FIELD_SCAN_FACTORS,
    ControlConfig,
    ControlResult,
    LifetimeTradeoffReport,
    average_over_vibrations,
    exchange_coupling_gauss,
    field_sweep,
    lifetime_tradeoff_report,
    minimum_over_field,
    optimize_exchange,
    pulse_schedule,
    simulate_control,
)
from .errors import ConfigError, NumericalError
from .hamiltonians import (
    EigenDecomposition,
    HamiltonianSpec,
    HyperfineTensor,
    build,
    cis,
    degeneracy_tolerance,
    eigendecompose,
    ellipsoidal,
    field_derivative,
    isotropic,
    max_anisotropic,
    spheroidal,
    spin_system_for,
    trans,
)
from .optimal import (
    OptimalYieldResult,
    deltaB_integrated_optimal,
    deltaB_timeresolved,
    overlap_aniso_analytic,
    overlap_with_optimal,
    x_expectation,
)
from .qfi import (
    BoundResult,
    GeneratorResult,
    delta_b_floor,
    delta_b_fundamental,
    field_generator,
    generator_eigs_ellipsoidal,
    generator_eigs_spheroidal,
    max_qfi,
    zeeman_chain_qfi,
    optimal_state,
)
from .spincore import (
    DensityMatrix,
    Operator,
    SpinSystem,
    StateVector,
    embed,
    ghz_coherence_operator,
    ghz_state,
    mixed_singlet,
    singlet_ensemble,
    singlet_projector,
    singlet_state,
    spin_ops,
    triplet_projector,
)
from .yields import (
    EvolutionCache,
    SensitivityGrid,
    YieldResult,
    build_cache,
    dB_derivative,
    deltaB_instantaneous,
    deltaB_integrated,
    delta_b_aniso_large_a,
    delta_b_iso_large_a,
    evaluate_point,
    laplace_average,
    optimal_operating_point,
    second_moment_average,
    sensitivity_aniso,
    sensitivity_iso_down,
    sensitivity_iso_mixed,
    sensitivity_iso_up,
    singlet_fidelity,
    sweep_grid,
    yield_aniso,
    yield_iso_down,
    yield_iso_mixed,
    yield_iso_up,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "ConfigError",
    "NumericalError",
    # spin core
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
    # hamiltonians
    "HyperfineTensor",
    "HamiltonianSpec",
    "EigenDecomposition",
    "build",
    "field_derivative",
    "eigendecompose",
    "degeneracy_tolerance",
    "spin_system_for",
    "isotropic",
    "spheroidal",
    "ellipsoidal",
    "max_anisotropic",
    "cis",
    "trans",
    # qfi
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
    # yields
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
    # optimal measurement
    "OptimalYieldResult",
    "x_expectation",
    "deltaB_timeresolved",
    "deltaB_integrated_optimal",
    "overlap_with_optimal",
    "overlap_aniso_analytic",
    # control
    "ControlConfig",
    "ControlResult",
    "LifetimeTradeoffReport",
    "pulse_schedule",
    "simulate_control",
    "optimize_exchange",
    "field_sweep",
    "FIELD_SCAN_FACTORS",
    "minimum_over_field",
    "average_over_vibrations",
    "exchange_coupling_gauss",
    "lifetime_tradeoff_report",
]
