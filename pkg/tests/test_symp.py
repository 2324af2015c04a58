import numpy as np
import pytest

from app.core.symp import (
    SymHamiltonianParam,
    SymplecticMatrix,
    euler_decompose,
    euler_path,
    exp_param,
    is_symplectic,
    polar_decompose,
    random_symplectic,
    random_unitary_symplectic,
    symplectic_eigenvalues,
    symplectic_form,
    williamson,
    williamson_residual,
)
from app.exceptions import SpecError, SymplecticError


def test_symplectic_form_layout():
    J = symplectic_form(2)
    np.testing.assert_array_equal(J @ J, -np.eye(4))
    assert J[0, 2] == 1.0 and J[2, 0] == -1.0


def test_symplectic_matrix_rejects_non_symplectic():
    with pytest.raises(SymplecticError):
        SymplecticMatrix(np.diag([2.0, 1.0, 1.0, 1.0]))
    with pytest.raises(SpecError):
        SymplecticMatrix(np.eye(3))


def test_products_and_transposes_stay_symplectic(rng):
    P = random_symplectic(2, rng)
    Q = random_symplectic(2, rng)
    assert is_symplectic((P @ Q).entries)
    assert is_symplectic(P.T.entries)


def test_param_chart_round_trip(rng):
    vector = rng.standard_normal(SymHamiltonianParam.dimension(3))
    X = SymHamiltonianParam.from_vector(3, vector)
    np.testing.assert_allclose(X.to_vector(), vector)
    np.testing.assert_allclose(X.matrix(), X.matrix().T)
    assert len(SymHamiltonianParam.basis(2)) == 6


def test_param_rejects_asymmetric_blocks():
    with pytest.raises(SpecError):
        SymHamiltonianParam(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))


def test_exponential_is_symmetric_positive_symplectic(rng):
    X = SymHamiltonianParam.from_vector(2, rng.standard_normal(6))
    S = exp_param(X).entries
    np.testing.assert_allclose(S, S.T)
    assert np.all(np.linalg.eigvalsh(S) > 0)
    assert is_symplectic(S)


def test_off_diagonal_block_generates_a_hyperbolic_rotation():
    D = np.zeros((2, 2))
    D[0, 0] = 1.0
    S = exp_param(SymHamiltonianParam(np.zeros((2, 2)), D)).entries
    half = np.array([[np.cosh(1.0), np.sinh(1.0)], [np.sinh(1.0), np.cosh(1.0)]])
    np.testing.assert_allclose(S[np.ix_([0, 2], [0, 2])], half)


def test_polar_decomposition(rng):
    P = random_symplectic(2, rng)
    Q, S = polar_decompose(P)
    np.testing.assert_allclose(Q.entries @ Q.entries.T, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(Q.entries @ S.entries, P.entries, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(S.entries) > 0)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_euler_decomposition_reassembles(seed):
    rng = np.random.default_rng(seed)
    X = SymHamiltonianParam.from_vector(2, rng.standard_normal(6))
    S = exp_param(X)
    Q, stretches = euler_decompose(S)
    assert np.all(stretches >= 1.0 - 1e-12)
    np.testing.assert_allclose(Q.entries @ Q.entries.T, np.eye(4), atol=1e-8)
    np.testing.assert_allclose(euler_path(Q, stretches, 1.0), S.entries, atol=1e-8)
    np.testing.assert_allclose(euler_path(Q, stretches, 0.0), np.eye(4), atol=1e-8)


def test_euler_decomposition_with_neutral_pairs():
    S = SymplecticMatrix(np.diag([2.0, 1.0, 0.5, 1.0]))
    Q, stretches = euler_decompose(S)
    np.testing.assert_allclose(sorted(stretches), [1.0, 2.0])
    np.testing.assert_allclose(euler_path(Q, stretches, 1.0), S.entries, atol=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_williamson_on_diagonal_ellipsoids(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 3.0, 2)
    b = rng.uniform(0.5, 3.0, 2)
    form = np.diag(1.0 / np.concatenate([a, b]) ** 2)
    lam, P0 = williamson(form)
    np.testing.assert_allclose(lam, np.sort(np.sqrt(a * b)), atol=1e-10)
    assert williamson_residual(form, lam, P0) <= 1e-8


def test_williamson_is_invariant_under_symplectic_congruence(rng):
    form = np.diag([1.0, 0.25, 1 / 9.0, 1.0])
    P = random_symplectic(2, rng).entries
    moved = P.T @ form @ P
    np.testing.assert_allclose(symplectic_eigenvalues(moved), symplectic_eigenvalues(form), atol=1e-9)


def test_williamson_scaling_oracle():
    lam, _ = williamson(np.diag([1.0, 1 / 16.0, 1 / 16.0, 1.0]))
    np.testing.assert_allclose(lam, [2.0, 2.0], atol=1e-10)


def test_williamson_rejects_indefinite_forms():
    with pytest.raises(SpecError):
        williamson(np.diag([1.0, -1.0, 1.0, 1.0]))


def test_unitary_symplectic_is_orthogonal(rng):
    U = random_unitary_symplectic(3, rng).entries
    np.testing.assert_allclose(U @ U.T, np.eye(6), atol=1e-12)
    assert is_symplectic(U)


def test_first_chart_direction_exponentiates_to_a_coordinate_stretch():
    t = 0.8
    X = SymHamiltonianParam.from_vector(2, t * SymHamiltonianParam.basis(2)[0].to_vector())
    np.testing.assert_allclose(exp_param(X).entries, np.diag([np.exp(t), 1.0, np.exp(-t), 1.0]), atol=1e-12)


def test_exponentials_of_opposite_parameters_are_inverse(rng):
    vector = rng.standard_normal(6)
    forward = exp_param(SymHamiltonianParam.from_vector(2, vector)).entries
    backward = exp_param(SymHamiltonianParam.from_vector(2, -vector)).entries
    np.testing.assert_allclose(forward @ backward, np.eye(4), atol=1e-9)


def test_polar_factor_of_a_positive_matrix_is_the_identity(rng):
    S = exp_param(SymHamiltonianParam.from_vector(2, 0.5 * rng.standard_normal(6)))
    Q, positive = polar_decompose(S)
    np.testing.assert_allclose(Q.entries, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(positive.entries, S.entries, atol=1e-10)
