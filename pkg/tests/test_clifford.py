"""Exact-equality tests for the gamma families and boundary projectors."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_ml import clifford
from dirac_ml.clifford import (
    DimensionError,
    NormalizationError,
    ParityError,
    boundary_matrix,
    build_gammas,
    gamma_of,
    lambda_block,
)


def anticomm(a, b):
    return a @ b + b @ a


def test_dimension_one():
    rep = build_gammas(1)
    assert rep.N == 1
    assert np.array_equal(rep.gammas[0], np.array([[1.0 + 0.0j]]))


def test_dimension_two_generators():
    rep = build_gammas(2)
    assert np.array_equal(rep.gammas[0], np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.array_equal(rep.gammas[1], np.array([[0, -1j], [1j, 0]], dtype=complex))


def test_dimension_three_product_matrix_plus_branch():
    rep = build_gammas(3)
    assert np.array_equal(rep.gammas[2], np.diag([-1.0 + 0j, 1.0 + 0j]))


def test_dimension_three_minus_branch():
    rep = build_gammas(3, sign_choice=-1)
    assert np.array_equal(rep.gammas[2], np.diag([1.0 + 0j, -1.0 + 0j]))


@pytest.mark.parametrize("n", range(1, 13))
def test_anticommutation_exact(n):
    rep = build_gammas(n)
    assert rep.N == 2 ** (n // 2)
    eye = np.eye(rep.N)
    for j, gj in enumerate(rep.gammas):
        assert np.array_equal(gj.conj().T, gj)
        for k, gk in enumerate(rep.gammas):
            expected = 2 * eye if j == k else np.zeros_like(eye)
            assert np.array_equal(anticomm(gj, gk), expected)


@pytest.mark.parametrize("n", range(1, 13))
def test_entries_stay_in_exact_set(n):
    rep = build_gammas(n)
    entries = np.concatenate([g.ravel() for g in rep.gammas])
    assert np.all(np.isin(entries, [0, 1, -1, 1j, -1j]))


def test_dimension_five_pairwise():
    rep = build_gammas(5)
    assert len(rep.gammas) == 5 and rep.N == 4
    eye4 = np.eye(4)
    for j in range(5):
        for k in range(5):
            expected = 2 * eye4 if j == k else np.zeros((4, 4))
            assert np.array_equal(anticomm(rep.gammas[j], rep.gammas[k]), expected)


def test_out_of_range_dimension():
    with pytest.raises(DimensionError):
        build_gammas(0)
    with pytest.raises(DimensionError):
        build_gammas(13)


def test_gamma_of_basis_vectors():
    rep = build_gammas(2)
    assert np.array_equal(gamma_of(rep, [1.0, 0.0]), rep.gammas[0])
    rep3 = build_gammas(3)
    assert np.array_equal(gamma_of(rep3, [0.0, 0.0, 1.0]), rep3.gammas[2])


def test_gamma_of_dimension_mismatch():
    rep = build_gammas(2)
    with pytest.raises(DimensionError):
        gamma_of(rep, [1.0, 0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=1, max_value=6),
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=6, max_size=6),
)
def test_gamma_of_square_law(n, coords):
    rep = build_gammas(n)
    x = np.array(coords[:n])
    g = gamma_of(rep, x)
    sq = g @ g
    assert np.allclose(sq, float(x @ x) * np.eye(rep.N), rtol=0, atol=1e-13)


def test_boundary_matrix_axis_normal():
    rep3 = build_gammas(3)
    data = boundary_matrix(rep3, [1.0, 0.0])
    assert np.array_equal(data.B, np.array([[0, -1j], [1j, 0]], dtype=complex))


def test_boundary_matrix_angle_formula():
    # Hand oracle: -i * G(nu) @ g3 for nu = (cos t, sin t) multiplies out to
    # [[0, -i e^{-it}], [i e^{it}, 0]].
    rep3 = build_gammas(3)
    for theta in np.linspace(0.0, 2 * np.pi, 17):
        nu = np.array([np.cos(theta), np.sin(theta)])
        nu /= np.sqrt(nu @ nu)
        B = boundary_matrix(rep3, nu).B
        expected = np.array(
            [[0, -1j * np.exp(-1j * theta)], [1j * np.exp(1j * theta), 0]]
        )
        assert np.allclose(B, expected, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_boundary_matrix_involution_and_projectors(n):
    rng = np.random.default_rng(42 + n)
    rep = build_gammas(n + 1)
    for _ in range(5):
        nu = rng.normal(size=n)
        nu /= np.sqrt(nu @ nu)
        data = boundary_matrix(rep, nu)
        B = data.B
        eye = np.eye(rep.N)
        assert np.allclose(B @ B, eye, atol=1e-14)
        assert np.allclose(B.conj().T, B, atol=1e-14)
        assert abs(np.trace(B)) < 1e-14
        vals = np.sort(np.linalg.eigvalsh(B))
        assert np.allclose(vals[: rep.N // 2], -1.0, atol=1e-12)
        assert np.allclose(vals[rep.N // 2 :], 1.0, atol=1e-12)
        assert np.allclose(data.P_plus + data.P_minus, eye, atol=1e-15)
        assert np.allclose(data.P_plus @ data.P_minus, 0 * eye, atol=1e-14)
        for P in (data.P_plus, data.P_minus):
            assert np.allclose(P @ P, P, atol=1e-14)
            assert round(float(np.trace(P).real)) == rep.N // 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_boundary_matrix_commutation_structure(n):
    # B is a product of two factors that each anticommute with tangent
    # contractions, so it commutes with G(tau) for tau _|_ nu while it
    # anticommutes with G(nu) and with the chirality factor itself.
    rng = np.random.default_rng(7 + n)
    rep = build_gammas(n + 1)
    for _ in range(5):
        nu = rng.normal(size=n)
        nu /= np.sqrt(nu @ nu)
        tau = rng.normal(size=n)
        tau -= (tau @ nu) * nu
        tau /= np.sqrt(tau @ tau)
        B = boundary_matrix(rep, nu).B
        gam_tau = sum(tau[j] * rep.gammas[j] for j in range(n))
        gam_nu = sum(nu[j] * rep.gammas[j] for j in range(n))
        assert np.allclose(B @ gam_tau - gam_tau @ B, 0, atol=1e-13)
        assert np.allclose(anticomm(B, gam_nu), 0, atol=1e-13)
        assert np.allclose(anticomm(B, rep.gammas[n]), 0, atol=1e-13)


def test_boundary_matrix_rejects_non_unit_normal():
    rep3 = build_gammas(3)
    with pytest.raises(NormalizationError):
        boundary_matrix(rep3, [1.0, 1.0])


def test_lambda_block_scalar_case():
    rep = build_gammas(2)
    lam = lambda_block(rep, [0.3, -0.7])
    assert lam.shape == (1, 1)
    assert abs(lam[0, 0] - (0.3 + 0.7j)) < 1e-15


def test_lambda_block_angle_and_unitarity():
    rep = build_gammas(2)
    for theta in np.linspace(0, 2 * np.pi, 9):
        nu = [np.cos(theta), np.sin(theta)]
        lam = lambda_block(rep, nu)
        assert abs(lam[0, 0] - np.exp(-1j * theta)) < 1e-14
        assert np.allclose(lam @ lam.conj().T, np.eye(1), atol=1e-14)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_lambda_block_reconstructs_gamma(n):
    rng = np.random.default_rng(n)
    rep = build_gammas(n)
    for _ in range(4):
        x = rng.normal(size=n)
        lam = lambda_block(rep, x)
        half = rep.N // 2
        rebuilt = np.zeros((rep.N, rep.N), dtype=complex)
        rebuilt[:half, half:] = lam
        rebuilt[half:, :half] = lam.conj().T
        assert np.array_equal(rebuilt, gamma_of(rep, x))


def test_lambda_block_odd_dimension_rejected():
    rep = build_gammas(3)
    with pytest.raises(ParityError):
        lambda_block(rep, [1.0, 0.0, 0.0])


def test_report_helper():
    rpt = clifford.anticommutation_report(6)
    assert rpt["ok"] and rpt["failures"] == [] and rpt["N"] == 8
