"""Hamiltonian assembly:

    H = -B (s_Dz + s_Az) + sum_j s_D.A_j.I_j + sum_k s_A.a_k.I_k
        + J s_A.s_D - gamma_n B sum I_z

with diagonal hyperfine tensors, and its exact field derivative."""

import dataclasses

import numpy as np
import pytest

from rpmag import (
    ConfigError,
    HamiltonianSpec,
    HyperfineTensor,
    build,
    cis,
    eigendecompose,
    ellipsoidal,
    field_derivative,
    isotropic,
    max_anisotropic,
    spheroidal,
    spin_system_for,
    trans,
)
from rpmag.spincore import spin_ops

rng = np.random.default_rng(8161123)


def test_two_electron_zeeman_spectrum():
    spec = HamiltonianSpec(b=1.7)
    h = build(spec).matrix
    vals = np.sort(np.linalg.eigvalsh(h))
    np.testing.assert_allclose(vals, [-1.7, 0.0, 0.0, 1.7], atol=1e-12)


def test_isotropic_matches_manual_kron():
    a, b = 4.0, 0.9
    spec = isotropic(a, b)
    system = spin_system_for(spec)
    sd = spin_ops(0, system)
    sa = spin_ops(1, system)
    nuc = spin_ops(2, system)
    manual = -b * (sd[2] + sa[2]) + a * sum(sd[i] @ nuc[i] for i in range(3))
    np.testing.assert_allclose(build(spec, system).matrix, manual, atol=1e-13)


def test_exchange_term_matches_manual_kron():
    a, j, b = 2.0, 5.0, 0.4
    spec = cis(a, j, b)
    system = spin_system_for(spec)
    sd = spin_ops(0, system)
    sa = spin_ops(1, system)
    nuc = spin_ops(2, system)
    manual = (
        -b * (sd[2] + sa[2])
        + a * sd[0] @ nuc[0]
        + j * sum(sa[i] @ sd[i] for i in range(3))
    )
    np.testing.assert_allclose(build(spec, system).matrix, manual, atol=1e-13)


def test_trans_is_cis_without_exchange():
    a, b = 3.0, 0.7
    np.testing.assert_allclose(
        build(trans(a, b)).matrix, build(cis(a, 0.0, b)).matrix, atol=1e-14
    )


def test_variant_constructors_are_special_cases():
    a, b = 2.5, 0.8
    np.testing.assert_allclose(
        build(spheroidal(a, a, b)).matrix, build(isotropic(a, b)).matrix, atol=1e-13
    )
    np.testing.assert_allclose(
        build(ellipsoidal(a, a, a, b)).matrix, build(isotropic(a, b)).matrix, atol=1e-13
    )
    np.testing.assert_allclose(
        build(ellipsoidal(a, 0.0, 0.0, b)).matrix,
        build(max_anisotropic(a, b)).matrix,
        atol=1e-13,
    )


def test_field_derivative_is_exact_coefficient():
    for _ in range(5):
        spec = HamiltonianSpec(
            b=rng.uniform(-2, 2),
            donor_tensors=(HyperfineTensor(*rng.uniform(-3, 3, 3)),),
            acceptor_tensors=(HyperfineTensor(*rng.uniform(-3, 3, 3)),),
            j=rng.uniform(-1, 1),
            gamma_n=rng.uniform(0, 1e-2),
        )
        db = 1e-6
        hp = build(dataclasses.replace(spec, b=spec.b + db)).matrix
        hm = build(dataclasses.replace(spec, b=spec.b - db)).matrix
        np.testing.assert_allclose(
            field_derivative(spec).matrix, (hp - hm) / (2 * db), atol=1e-8
        )


def test_field_derivative_is_field_independent():
    spec = spheroidal(1.0, 2.0, 0.3)
    np.testing.assert_allclose(
        field_derivative(spec).matrix,
        field_derivative(dataclasses.replace(spec, b=5.0)).matrix,
        atol=1e-14,
    )


def test_eigendecompose_reconstructs():
    spec = ellipsoidal(1.3, 0.4, 2.2, 0.9)
    op = build(spec)
    dec = eigendecompose(op)
    recon = dec.vectors @ np.diag(dec.values) @ dec.vectors.conj().T
    np.testing.assert_allclose(recon, op.matrix, atol=1e-12)
    assert np.all(np.diff(dec.values) >= 0)


def test_two_nucleus_system_dimension():
    spec = HamiltonianSpec(
        b=0.5,
        donor_tensors=(HyperfineTensor(1.0, 1.0, 1.0),),
        acceptor_tensors=(HyperfineTensor(0.5, 0.5, 0.5),),
    )
    assert build(spec).matrix.shape == (16, 16)


def test_non_finite_parameters_rejected():
    with pytest.raises(ConfigError):
        HamiltonianSpec(b=np.nan)
    with pytest.raises(ConfigError):
        HamiltonianSpec(b=0.0, j=np.inf)


def test_spec_json_round_trip():
    spec = ellipsoidal(1.5, 0.7, 2.0, 0.4)
    again = HamiltonianSpec.from_json(spec.to_json())
    assert again == spec
    with pytest.raises(ConfigError):
        HamiltonianSpec.from_json("{not json")
