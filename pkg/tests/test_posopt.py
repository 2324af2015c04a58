import numpy as np
import pytest

from app.analysis.posopt import (
    coordinate_path_derivative,
    directional_derivative,
    geodesic_profile,
    geodesic_second_differences,
    gm_moment_matrix,
    green_moments,
    i_integral,
    i_integral_slope,
    minimize_position,
    position_objective,
    second_difference,
)
from app.core.bodies import (
    Ellipsoid,
    LagrangianBidisk,
    LinearImage,
    Polyannulus,
    Polydisk,
    Union,
    ball,
    mean_width,
    symplectic_ellipsoid,
)
from app.core.symp import SymHamiltonianParam, exp_param, random_unitary_symplectic, unitary_symplectic
from app.exceptions import SpecError


def random_polyannulus_union(seed):
    rng = np.random.default_rng(seed)
    members = []
    for _ in range(3):
        high = rng.uniform(0.5, 2.0, 2)
        members.append(Polyannulus(high * rng.uniform(0.0, 0.5, 2), high))
    return Union(tuple(members))


def test_objective_at_the_identity_is_the_mean_width(coarse_rule):
    value = position_objective(symplectic_ellipsoid([1.0, 2.0]), SymHamiltonianParam.zero(2), coarse_rule)
    assert value == pytest.approx(28.0 / 9.0, abs=1e-8)


def test_objective_rejects_mismatched_parameters(coarse_rule):
    with pytest.raises(SpecError):
        position_objective(ball(2), SymHamiltonianParam.zero(1), coarse_rule)


def test_descent_finds_the_standard_position_of_a_symplectic_ellipsoid(coarse_rule):
    body = symplectic_ellipsoid([1.0, 2.0])
    report = minimize_position(body, coarse_rule, starts=5, seed=11, tol=1e-6, max_iterations=300)
    assert report.best_value == pytest.approx(28.0 / 9.0, abs=1e-3)
    assert report.best_param.norm() < 1e-2
    assert report.best_value <= report.initial_value
    assert report.is_upper_bound


def test_descent_normalizes_a_stretched_ellipsoid(coarse_rule):
    # E((1, 1), (4, 4)) is symplectically the ball of radius 2.
    report = minimize_position(Ellipsoid([1.0, 1.0], [4.0, 4.0]), coarse_rule, starts=5, seed=5, tol=1e-6)
    assert report.best_value == pytest.approx(4.0, abs=1e-3)


def test_descent_never_improves_the_lagrangian_bidisk(coarse_rule):
    report = minimize_position(LagrangianBidisk(), coarse_rule, starts=5, seed=2, tol=1e-5, max_iterations=100)
    assert report.best_value >= 8.0 / 3.0 - 1e-3
    assert report.best_param.norm() < 1e-2


def test_descent_report_serializes(coarse_rule):
    report = minimize_position(ball(2), coarse_rule, starts=1, seed=0, max_iterations=3)
    data = report.to_dict()
    assert set(data) >= {"best_value", "best_param", "gradient_norm", "iterations", "converged", "trace"}
    assert len(data["best_param"]["C"]) == 2
    assert data["trace"][0][0] == 0


def test_descent_rejects_zero_starts(coarse_rule):
    with pytest.raises(SpecError):
        minimize_position(ball(2), coarse_rule, starts=0)


@pytest.mark.parametrize(
    "body",
    [Polydisk([1.0, 2.0]), random_polyannulus_union(4), symplectic_ellipsoid([1.0, 3.0])],
    ids=["polydisk", "polyannulus-union", "ellipsoid"],
)
def test_toric_bodies_are_critical(body, coarse_rule):
    for X in SymHamiltonianParam.basis(2):
        assert abs(directional_derivative(body, X, coarse_rule)) <= 1e-6


@pytest.mark.parametrize(
    "body",
    [Polydisk([1.0, 2.0]), random_polyannulus_union(4), symplectic_ellipsoid([1.0, 3.0])],
    ids=["polydisk", "polyannulus-union", "ellipsoid"],
)
def test_objective_is_convex_along_the_basis(body, sphere3_rule):
    for X in SymHamiltonianParam.basis(2):
        assert second_difference(body, X, sphere3_rule, step=1e-2) >= -1e-6


def test_non_toric_ellipsoid_decreases_along_a_coordinate_stretch(coarse_rule):
    a, b = [1.0, 2.0], [3.0, 1.0]
    slope = coordinate_path_derivative(a, b, 0, coarse_rule)
    assert slope < -1e-3
    stretch = SymHamiltonianParam.basis(2)[0]
    assert directional_derivative(Ellipsoid(a, b), stretch, coarse_rule) == pytest.approx(slope, abs=1e-10)


def test_coordinate_path_rejects_bad_index(coarse_rule):
    with pytest.raises(SpecError):
        coordinate_path_derivative([1.0, 2.0], [3.0, 1.0], 2, coarse_rule)


def test_i_integral_vanishes_at_zero_and_is_negative_after():
    assert i_integral(0.0, 1.0, 0.5) == pytest.approx(0.0, abs=1e-10)
    for c in (0.1, 1.0, 10.0):
        assert i_integral(c, 1.0, 0.5) < 0.0
    assert i_integral_slope(0.0, 1.0, 0.5) < 0.0


@pytest.mark.parametrize("c, A1, B1", [(-1.0, 1.0, 0.5), (0.0, 0.0, 0.5), (0.0, 1.0, -0.1)])
def test_i_integral_rejects_bad_arguments(c, A1, B1):
    with pytest.raises(SpecError):
        i_integral(c, A1, B1)


def test_green_moments_of_disk_and_ellipse():
    cos2, sin2 = green_moments(lambda theta: np.ones_like(theta))
    assert cos2 == pytest.approx(0.0, abs=1e-12)
    assert sin2 == pytest.approx(0.0, abs=1e-12)
    # An ellipse wider along x has a positive cos 2 theta moment.
    cos2, _ = green_moments(lambda theta: np.hypot(2.0 * np.cos(theta), np.sin(theta)))
    assert cos2 > 0.1


def test_gm_moment_matrix(sphere3_rule):
    matrix, holds = gm_moment_matrix(ball(2), sphere3_rule)
    np.testing.assert_allclose(matrix, 0.25 * np.eye(4), atol=1e-10)
    assert holds
    matrix, holds = gm_moment_matrix(Ellipsoid([1.0, 2.0], [3.0, 1.0]), sphere3_rule)
    assert not holds
    assert np.trace(matrix) == pytest.approx(0.5 * mean_width(Ellipsoid([1.0, 2.0], [3.0, 1.0]), sphere3_rule))


def test_lagrangian_bidisk_is_critical(coarse_rule):
    for X in SymHamiltonianParam.basis(2):
        assert abs(directional_derivative(LagrangianBidisk(), X, coarse_rule)) <= 1e-6


def test_directional_derivative_matches_finite_differences(coarse_rule, rng):
    body = Ellipsoid([1.0, 2.0], [3.0, 1.0])
    X = SymHamiltonianParam.from_vector(2, rng.standard_normal(SymHamiltonianParam.dimension(2)))
    h = 1e-4
    forward = position_objective(body, SymHamiltonianParam.from_vector(2, h * X.to_vector()), coarse_rule)
    backward = position_objective(body, SymHamiltonianParam.from_vector(2, -h * X.to_vector()), coarse_rule)
    expected = (forward - backward) / (2.0 * h)
    assert directional_derivative(body, X, coarse_rule) == pytest.approx(expected, abs=1e-5)


def test_objective_ignores_unitary_factors(sphere3_rule, rng):
    body = Ellipsoid([1.0, 2.0], [3.0, 1.0])
    X = SymHamiltonianParam.from_vector(2, 0.3 * rng.standard_normal(SymHamiltonianParam.dimension(2)))
    U = random_unitary_symplectic(2, rng).entries
    rotated = mean_width(LinearImage(U @ exp_param(X).entries, body), sphere3_rule)
    assert rotated == pytest.approx(position_objective(body, X, sphere3_rule), abs=1e-8)


def test_trivial_stretches_give_a_constant_profile(coarse_rule, rng):
    body = Polydisk([1.0, 2.0])
    Q = random_unitary_symplectic(2, rng)
    profile = geodesic_profile(body, Q, [1.0, 1.0], np.linspace(-1.0, 1.0, 5), coarse_rule)
    values = [value for _, value in profile]
    np.testing.assert_allclose(values, mean_width(body, coarse_rule), atol=1e-12)
    assert [s for s, _ in profile] == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])


def test_stretching_the_ball_increases_its_mean_width(coarse_rule):
    Q = unitary_symplectic(np.eye(2))
    values = [value for _, value in geodesic_profile(ball(2), Q, [2.0, 1.0], np.linspace(0.0, 1.0, 6), coarse_rule)]
    assert values[0] == pytest.approx(2.0, abs=1e-10)
    assert np.all(np.diff(values) > 0.0)


@pytest.mark.parametrize(
    "body",
    [Polydisk([1.0, 2.0]), symplectic_ellipsoid([1.0, 3.0])],
    ids=["polydisk", "ellipsoid"],
)
def test_objective_is_convex_along_euler_geodesics(body, sphere3_rule):
    rng = np.random.default_rng(17)
    Q = random_unitary_symplectic(2, rng)
    profile = geodesic_profile(body, Q, [2.0, 1.5], np.linspace(-1.0, 1.0, 9), sphere3_rule)
    assert np.all(geodesic_second_differences(profile) >= -1e-6)


def test_second_differences_need_an_even_grid():
    assert geodesic_second_differences([(0.0, 1.0), (0.5, 2.0), (1.0, 4.0)]) == pytest.approx([4.0])
    with pytest.raises(SpecError):
        geodesic_second_differences([(0.0, 1.0), (1.0, 2.0)])
    with pytest.raises(SpecError):
        geodesic_second_differences([(0.0, 1.0), (0.5, 2.0), (2.0, 4.0)])
