import numpy as np
import pytest

from app.analysis.scan import ramos_profile
from app.core.bodies import (
    Ellipsoid,
    LagrangianBidisk,
    LinearImage,
    PointCloud,
    Polyannulus,
    Polydisk,
    ToricBody,
    ToricProfile,
    Union,
    ball,
    body_center,
    ellipsoid_profile,
    hausdorff_estimate,
    lagrangian_swap,
    mean_width,
    normalized_volume,
    radial_extent,
    support,
    support_gradient,
    symplectic_ellipsoid,
    toric_box_approx,
    translate,
    urysohn_gap,
)
from app.core.quad import integrate
from app.exceptions import SpecError
from app.models.forms import mw_polydisk, mw_symplectic_ellipsoid2


def unit_vectors(rng, count, dim):
    draws = rng.standard_normal((count, dim))
    return draws / np.linalg.norm(draws, axis=1, keepdims=True)


def test_ellipsoid_support_on_axes():
    body = Ellipsoid([1.0, 2.0], [3.0, 4.0])
    np.testing.assert_allclose(support(body, np.eye(4)), [1.0, 2.0, 3.0, 4.0])


def test_translation_shifts_support():
    body = translate(ball(1), [0.5, -1.0])
    assert support(body, [1.0, 0.0]) == pytest.approx(1.5)
    assert support(body, [0.0, 1.0]) == pytest.approx(0.0)
    centered = Ellipsoid([1.0], [1.0], center=[0.5, -1.0])
    assert support(centered, [1.0, 0.0]) == pytest.approx(1.5)


def test_support_returns_float_for_one_vector():
    assert isinstance(support(ball(2), [1.0, 0.0, 0.0, 0.0]), float)


@pytest.mark.parametrize("u", [[2.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
def test_support_rejects_bad_directions(u):
    with pytest.raises(SpecError):
        support(ball(2), u)


def test_polydisk_and_polyannulus_supports(rng):
    u = unit_vectors(rng, 50, 4)
    norms = np.hypot(u[:, :2], u[:, 2:])
    np.testing.assert_allclose(support(Polydisk([1.0, 2.0]), u), norms @ [1.0, 2.0])
    np.testing.assert_allclose(support(Polyannulus([0.5, 1.0], [1.0, 2.0]), u), norms @ [1.0, 2.0])


def test_union_support_is_pointwise_max(rng):
    u = unit_vectors(rng, 100, 4)
    toric = Union((Polydisk([1.0, 2.0]), Polyannulus([0.0, 0.0], [2.0, 1.0])))
    expected = np.maximum(support(Polydisk([1.0, 2.0]), u), support(Polydisk([2.0, 1.0]), u))
    np.testing.assert_allclose(support(toric, u), expected)
    mixed = Union((ball(2), symplectic_ellipsoid([0.5, 3.0])))
    expected = np.maximum(support(ball(2), u), support(symplectic_ellipsoid([0.5, 3.0]), u))
    np.testing.assert_allclose(support(mixed, u), expected)


def test_union_flags_ties():
    body = Union((symplectic_ellipsoid([1.0, 2.0]), symplectic_ellipsoid([2.0, 1.0])))
    u = np.array([[1.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]]) / np.array([[np.sqrt(2.0)], [1.0]])
    _, ambiguous = support_gradient(body, u)
    assert ambiguous.tolist() == [True, False]


def test_union_rejects_mixed_dimensions():
    with pytest.raises(SpecError):
        Union((ball(1), ball(2)))


@pytest.mark.parametrize(
    "body",
    [Ellipsoid([1.0, 2.0], [0.5, 3.0]), Polydisk([1.0, 2.0]), LagrangianBidisk()],
    ids=["ellipsoid", "polydisk", "lagrangian-bidisk"],
)
def test_support_gradient_matches_finite_differences(body, rng):
    u = unit_vectors(rng, 20, 4)
    grad, ambiguous = body.support_gradients(u)
    assert not ambiguous.any()
    eps = 1e-6
    for k in range(4):
        step = np.zeros(4)
        step[k] = eps
        numeric = (body.support_values(u + step) - body.support_values(u - step)) / (2 * eps)
        np.testing.assert_allclose(grad[:, k], numeric, atol=1e-6)


def test_point_cloud_support_and_extreme_points():
    square = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [0.0, 0.2]]
    cloud = PointCloud(square)
    assert support(cloud, [np.sqrt(0.5), np.sqrt(0.5)]) == pytest.approx(np.sqrt(2.0))
    extreme = cloud.extreme()
    assert extreme.points.shape == (4, 2)
    u = np.column_stack([np.cos(np.linspace(0, 6, 30)), np.sin(np.linspace(0, 6, 30))])
    np.testing.assert_allclose(support(extreme, u), support(cloud, u))


def test_linear_image_of_ball_is_an_ellipsoid(rng):
    u = unit_vectors(rng, 40, 4)
    image = LinearImage(np.diag([1.0, 2.0, 3.0, 4.0]), ball(2))
    np.testing.assert_allclose(support(image, u), support(Ellipsoid([1.0, 2.0], [3.0, 4.0]), u))


def test_ball_mean_width_is_the_diameter(coarse_rule):
    assert mean_width(ball(2, 2.0), coarse_rule) == pytest.approx(4.0, abs=1e-12)


@pytest.mark.parametrize(
    "a1, a2",
    [(1, 1), (1, 2), (2, 1), (1, 3), (0.5, 1.5), (1, 1.2), (2, 5), (3, 1), (1, 4), (0.7, 0.9)],
)
def test_symplectic_ellipsoid_mean_width_matches_closed_form(a1, a2, sphere3_rule):
    value = mean_width(symplectic_ellipsoid([a1, a2]), sphere3_rule)
    assert value == pytest.approx(mw_symplectic_ellipsoid2(a1, a2), abs=1e-6)


def test_polydisk_mean_width_matches_closed_form(sphere3_rule):
    assert mean_width(Polydisk([1.0, 2.0]), sphere3_rule) == pytest.approx(mw_polydisk([1.0, 2.0]), abs=1e-10)


def test_lagrangian_bidisk_is_an_orthogonal_image_of_the_polydisk(sphere3_rule):
    swap = lagrangian_swap()
    np.testing.assert_allclose(swap @ swap.T, np.eye(4))
    nodes = sphere3_rule.nodes
    np.testing.assert_allclose(
        LinearImage(swap, LagrangianBidisk()).support_values(nodes),
        Polydisk([1.0, 1.0]).support_values(nodes),
        atol=1e-12,
    )
    assert mean_width(LagrangianBidisk(), sphere3_rule) == pytest.approx(8.0 / 3.0, abs=1e-10)
    assert mean_width(Polydisk([1.0, 1.0]), sphere3_rule) == pytest.approx(
        mean_width(LagrangianBidisk(), sphere3_rule), abs=1e-8
    )


def test_lagrangian_bidisk_frame_does_not_change_the_value(coarse_rule):
    body = LagrangianBidisk()
    direct = integrate(coarse_rule, lambda u: body.support_values(u) + body.support_values(-u))
    assert direct == pytest.approx(mean_width(body, coarse_rule), abs=1e-3)


def test_straight_curve_outer_support_is_exact(sphere3_rule):
    profile = ellipsoid_profile([1.0, 2.0], samples=64)
    exact = symplectic_ellipsoid([1.0, 2.0]).support_values(sphere3_rule.nodes)
    outer = ToricBody(profile, outer=True).support_values(sphere3_rule.nodes)
    inner = ToricBody(profile).support_values(sphere3_rule.nodes)
    np.testing.assert_allclose(outer, exact, atol=1e-9)
    assert np.all(inner <= exact + 1e-12)


def test_box_covers_converge_from_outside(coarse_rule):
    profile = ellipsoid_profile([1.0, 2.0])
    exact = symplectic_ellipsoid([1.0, 2.0])
    distances = []
    for depth in (3, 5, 7):
        cover = toric_box_approx(profile, depth)
        assert np.all(cover.support_values(coarse_rule.nodes) >= exact.support_values(coarse_rule.nodes) - 1e-12)
        distances.append(hausdorff_estimate(cover, exact, coarse_rule))
    assert distances[0] > distances[1] > distances[2]
    assert distances[2] < 0.05


def test_toric_boxes_match_polyannulus(rng):
    radii_low, radii_high = np.array([0.2, 0.5]), np.array([1.0, 1.5])
    profile = ToricProfile.from_boxes([np.pi * radii_low ** 2], [np.pi * radii_high ** 2])
    u = unit_vectors(rng, 30, 4)
    np.testing.assert_allclose(
        ToricBody(profile).support_values(u), Polyannulus(radii_low, radii_high).support_values(u)
    )


@pytest.mark.parametrize(
    "curve",
    [[[0.0, 1.0], [0.5, 1.2], [1.0, 0.0]], [[0.0, 1.0], [1.0, 0.3]], [[0.0, 1.0], [-1.0, 0.0]]],
    ids=["not-monotone", "open-end", "negative"],
)
def test_curve_profile_validation(curve):
    with pytest.raises(SpecError):
        ToricProfile.from_curve(curve)


def test_normalized_volume_and_urysohn(sphere3_rule):
    assert normalized_volume(Ellipsoid([1.0, 4.0], [4.0, 1.0])) == pytest.approx(4.0)
    assert normalized_volume(Polydisk([1.0, 1.0])) == pytest.approx(np.sqrt(2.0))
    assert urysohn_gap(ball(2), sphere3_rule) == pytest.approx(0.0, abs=1e-10)
    assert urysohn_gap(symplectic_ellipsoid([1.0, 2.0]), sphere3_rule) > 0.3
    with pytest.raises(SpecError):
        normalized_volume(LagrangianBidisk())


def test_radial_extent_lands_on_the_boundary(rng):
    body = Ellipsoid([1.0, 2.0], [3.0, 0.5], center=[1.0, 0.0, 0.0, 2.0])
    u = unit_vectors(rng, 25, 4)
    points = body_center(body) + radial_extent(body, u)[:, None] * u
    shifted = (points - body.center) / body.axes
    np.testing.assert_allclose(np.sum(shifted ** 2, axis=1), 1.0)
    polydisk = Polydisk([1.0, 2.0])
    boundary = radial_extent(polydisk, u)[:, None] * u
    np.testing.assert_allclose(np.max(np.hypot(boundary[:, :2], boundary[:, 2:]) / [1.0, 2.0], axis=1), 1.0)


def test_mean_width_ignores_translations(coarse_rule):
    body = Ellipsoid([1.0, 2.0], [3.0, 0.5])
    moved = translate(body, [0.3, -1.0, 2.0, 0.7])
    assert mean_width(moved, coarse_rule) == pytest.approx(mean_width(body, coarse_rule), abs=1e-12)


def test_mean_width_of_a_cloud_is_that_of_its_hull(coarse_rule, rng):
    points = rng.standard_normal((40, 4))
    weights = rng.dirichlet(np.ones(40), size=60)
    cloud = PointCloud(points)
    with_interior = PointCloud(np.concatenate([points, weights @ points]))
    assert mean_width(with_interior, coarse_rule) == pytest.approx(mean_width(cloud, coarse_rule), abs=1e-12)
    assert mean_width(cloud.extreme(), coarse_rule) == pytest.approx(mean_width(cloud, coarse_rule), abs=1e-12)


@pytest.mark.parametrize(
    "smaller, larger",
    [
        (ball(2), Polydisk([1.0, 1.0])),
        (Polydisk([1.0, 2.0]), Polydisk([1.5, 2.0])),
        (symplectic_ellipsoid([1.0, 2.0]), Polydisk([1.0, 2.0])),
    ],
    ids=["ball-in-polydisk", "polydisks", "ellipsoid-in-polydisk"],
)
def test_mean_width_is_monotone(smaller, larger, coarse_rule):
    assert mean_width(smaller, coarse_rule) < mean_width(larger, coarse_rule)


@pytest.mark.parametrize(
    "body",
    [
        Ellipsoid([1.0, 2.0], [0.5, 3.0]),
        Polydisk([1.0, 2.0]),
        LagrangianBidisk(),
        ToricBody(ellipsoid_profile([1.0, 2.0], 64)),
    ],
    ids=["ellipsoid", "polydisk", "lagrangian-bidisk", "toric"],
)
def test_support_is_sublinear(body, rng):
    u, v = unit_vectors(rng, 50, 4), unit_vectors(rng, 50, 4)
    np.testing.assert_allclose(body.support_values(2.5 * u), 2.5 * body.support_values(u), rtol=1e-10)
    assert np.all(body.support_values(u + v) <= body.support_values(u) + body.support_values(v) + 1e-10)


def test_hausdorff_distance_of_concentric_balls(coarse_rule):
    assert hausdorff_estimate(ball(2), ball(2, 2.0), coarse_rule) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("depth", range(1, 7))
def test_single_box_is_its_own_cover(depth):
    profile = ToricProfile.from_boxes([[0.0, 0.0]], [[1.0, 2.0]])
    cover = toric_box_approx(profile, depth)
    assert len(cover.members) == 1
    np.testing.assert_allclose(cover.members[0].a, 0.0)
    np.testing.assert_allclose(cover.members[0].b, np.sqrt(np.array([1.0, 2.0]) / np.pi))


def test_ball_covers_decrease_toward_the_ball(coarse_rule):
    profile = ellipsoid_profile([1.0, 1.0])
    widths = [mean_width(toric_box_approx(profile, depth), coarse_rule) for depth in (2, 4, 6, 8)]
    assert all(first > second for first, second in zip(widths, widths[1:]))
    assert widths[-1] > 2.0
    assert widths[-1] < 2.02


def test_finer_covers_of_the_ramos_domain_are_smaller(coarse_rule):
    profile = ramos_profile()
    coarse = mean_width(toric_box_approx(profile, 6), coarse_rule)
    fine = mean_width(toric_box_approx(profile, 8), coarse_rule)
    assert coarse > fine


def test_outer_support_gradients_match_the_chord_support(rng):
    s = np.linspace(0.0, 1.0, 33)
    body = ToricBody(ToricProfile.from_curve(np.column_stack([s, (1.0 - s) ** 2])), outer=True)
    u = unit_vectors(rng, 20, 4)
    grad, ambiguous = body.support_gradients(u)
    assert not ambiguous.any()
    np.testing.assert_allclose(np.einsum("ij,ij->i", grad, u), body.support_values(u), atol=1e-12)
    eps = 1e-6
    for k in range(4):
        step = np.zeros(4)
        step[k] = eps
        numeric = (body.support_values(u + step) - body.support_values(u - step)) / (2 * eps)
        np.testing.assert_allclose(grad[:, k], numeric, atol=1e-5)


def test_outer_gradients_of_a_straight_profile_are_the_ellipsoid_ones(rng):
    u = unit_vectors(rng, 20, 4)
    outer, _ = ToricBody(ellipsoid_profile([1.0, 2.0], 64), outer=True).support_gradients(u)
    exact, _ = symplectic_ellipsoid([1.0, 2.0]).support_gradients(u)
    np.testing.assert_allclose(outer, exact, atol=1e-9)
