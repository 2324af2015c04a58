"""Hamiltonian flows of convex bodies and the variation of their mean width.

A body is replaced by a finite sample of its boundary, the samples are moved by
the time-t flow of a Hamiltonian, and the mean width of the moved body is that of
the sampled point cloud (a convex hull and its points have the same support).

The sample holds the exact support point of every rule direction, so the cloud
reproduces the body's support at the nodes when t = 0. The rest of the sample
is aligned with the quadrature grid: every angle tuple of the rule also appears
among the sample angles. For a toric body the maximizer of <p, u> over the
sample then shares the node's angles, which keeps the discrete first variation
as symmetric as the continuous one.

Hamiltonians of degree at most 2 have affine flows. Those are applied exactly,
through the matrix exponential, and the image body keeps its exact support.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft, linalg

from app.config import settings
from app.core.bodies import (
    LinearImage,
    PointCloud,
    SupportBody,
    Translated,
    body_center,
    mean_width,
    radial_extent,
)
from app.core.quad import HOPF_PRODUCT, QuadratureRule, angular_grid, hopf_nodes, sphere_radii, torus_grid
from app.exceptions import FlowError, SpecError
from app.models.hamiltonians import HamiltonianSystem, random_hopf_trig

logger = logging.getLogger(__name__)

__all__ = [
    "FlowedBoundary",
    "affine_flow_map",
    "boundary_samples_for",
    "disk_second_variation",
    "first_variation",
    "flow",
    "flow_jacobian",
    "flowed_mean_width",
    "hamiltonian_vector_field",
    "random_hopf_trig",
    "second_variation_fd",
    "support_points_for",
]


@dataclass(frozen=True, eq=False)
class FlowedBoundary:
    """Boundary samples after the time-t flow.

    Attributes:
        points: Array of shape (P, 2n); row i is the image of sample i.
        t: Flow time.
        step_count: Number of integrator steps taken.
    """
    points: np.ndarray
    t: float
    step_count: int


def hamiltonian_vector_field(sys: HamiltonianSystem, z) -> np.ndarray:
    """X_H = J grad H = (dH/dy, -dH/dx) at one point or a batch of points."""
    array = np.asarray(z, dtype=float)
    single = array.ndim == 1
    array = np.atleast_2d(array)
    n = sys.dim_n
    if array.shape[1] != 2 * n:
        raise SpecError(f"Point has {array.shape[1]} coordinates, Hamiltonian lives on R^{2 * n}")
    grad = sys.gradient(array)
    field = np.concatenate([grad[:, n:], -grad[:, :n]], axis=1)
    return field[0] if single else field


def default_steps(t: float) -> int:
    """max(FLOW_MIN_STEPS, ceil(200 |t|))."""
    return max(settings.FLOW_MIN_STEPS, math.ceil(200 * abs(t)))


def _runge_kutta(sys: HamiltonianSystem, points: np.ndarray, t: float, steps: int, offset: int) -> np.ndarray:
    dt = t / steps
    z = points.copy()
    for _ in range(steps):
        k1 = hamiltonian_vector_field(sys, z)
        k2 = hamiltonian_vector_field(sys, z + 0.5 * dt * k1)
        k3 = hamiltonian_vector_field(sys, z + 0.5 * dt * k2)
        k4 = hamiltonian_vector_field(sys, z + dt * k3)
        z = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        bad = np.flatnonzero(~np.all(np.isfinite(z), axis=1))
        if bad.size:
            index = int(bad[0])
            raise FlowError(f"Trajectory of point {offset + index} {points[index].tolist()} left the finite range")
    return z


def flow(sys: HamiltonianSystem, pts, t: float, steps: Optional[int] = None, workers: Optional[int] = None) -> FlowedBoundary:
    """Moves every point by the classical fourth-order Runge-Kutta scheme with step t / steps.

    Points are integrated independently, in chunks of `settings.CHUNK_SIZE`
    that run on a thread pool when more than one worker is allowed.

    Raises:
        SpecError: If steps < 1 or the dimensions disagree.
        FlowError: If a trajectory becomes non-finite; the message names the point.
    """
    points = np.atleast_2d(np.asarray(pts, dtype=float))
    if points.shape[1] != 2 * sys.dim_n:
        raise SpecError(f"Points live in R^{points.shape[1]} but the Hamiltonian on R^{2 * sys.dim_n}")
    steps = default_steps(t) if steps is None else steps
    if steps < 1:
        raise SpecError(f"steps must be >= 1, got {steps}")
    if t == 0:
        return FlowedBoundary(points.copy(), 0.0, 0)

    workers = settings.THREADS if workers is None else workers
    size = settings.CHUNK_SIZE
    starts = list(range(0, points.shape[0], size))

    def run(start):
        return _runge_kutta(sys, points[start:start + size], t, steps, start)

    started = time.perf_counter()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(start) for start in starts]
    logger.info("Flowed %d points to t=%g in %d steps (%.2fs)", points.shape[0], t, steps, time.perf_counter() - started)
    return FlowedBoundary(np.concatenate(parts), float(t), steps)


def boundary_samples_for(
    body: SupportBody,
    rule: QuadratureRule,
    boundary_samples: Optional[int] = None,
    angular_refine: Optional[int] = None,
) -> np.ndarray:
    """Samples the boundary of `body` on a refinement of the rule's Hopf grid.

    Angles run over the rule's offset grid refined by an odd factor, which keeps
    every rule angle in the sample. Radii come from `boundary_samples` equispaced
    cube points per radial coordinate, endpoints included, mapped like the rule's
    radial nodes. For n = 1 the refinement defaults to the smallest odd factor
    giving at least `boundary_samples` points on the circle.

    Returns:
        Array of boundary points center + rho(u) u.

    Raises:
        SpecError: If the body has no boundary parametrization or the refinement is not odd.
    """
    n = body.dim_n
    boundary_samples = settings.FLOW_BOUNDARY_SAMPLES if boundary_samples is None else boundary_samples
    if boundary_samples < 2:
        raise SpecError(f"boundary_samples must be >= 2, got {boundary_samples}")
    base = rule.angular_points if rule.kind == HOPF_PRODUCT else settings.QUAD_ANGULAR_POINTS
    if angular_refine is None:
        angular_refine = 1
        if n == 1:
            angular_refine = max(1, math.ceil(boundary_samples / base))
            angular_refine += 1 - angular_refine % 2
    if angular_refine < 1 or angular_refine % 2 == 0:
        raise SpecError(f"angular_refine must be a positive odd integer, got {angular_refine}")

    _, cos_theta, sin_theta = torus_grid(base * angular_refine, n)
    if n == 1:
        radii = np.ones((1, 1))
    else:
        tau = np.linspace(0.0, 1.0, boundary_samples)
        cube = np.stack(np.meshgrid(*([tau] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
        radii, _ = sphere_radii(cube)
    directions = hopf_nodes(radii, cos_theta, sin_theta)
    rho = radial_extent(body, directions)
    return body_center(body) + rho[:, None] * directions


def support_points_for(body: SupportBody, rule: QuadratureRule) -> np.ndarray:
    """Support points of `body` at every rule node and its antipode.

    A Hopf product rule is symmetric under u -> -u, so its nodes alone suffice.
    """
    directions = rule.nodes if rule.kind == HOPF_PRODUCT else np.concatenate([rule.nodes, -rule.nodes])
    points, _ = body.support_gradients(directions)
    return points


def affine_flow_map(sys: HamiltonianSystem, t: float) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Exact time-t flow z -> M z + d of a Hamiltonian of degree at most 2, or None.

    The affine field A z + c is integrated as one matrix exponential of the
    augmented generator [[A, c], [0, 0]].
    """
    field = sys.affine_field()
    if field is None:
        return None
    A, c = field
    size = A.shape[0]
    generator = np.zeros((size + 1, size + 1))
    generator[:size, :size] = A
    generator[:size, size] = c
    moved = linalg.expm(t * generator)
    return moved[:size, :size], moved[:size, size]


def _check_dimensions(body: SupportBody, sys: HamiltonianSystem):
    if body.dim_n != sys.dim_n:
        raise SpecError(f"Body lives in R^{2 * body.dim_n} but the Hamiltonian on R^{2 * sys.dim_n}")


def _flowed_widths(
    body: SupportBody,
    sys: HamiltonianSystem,
    times: Sequence[float],
    rule: QuadratureRule,
    boundary_samples: Optional[int],
    steps: Optional[int],
    angular_refine: Optional[int],
) -> List[float]:
    """M(phi_H^t(K)) for every t in `times`, sampling the boundary at most once."""
    _check_dimensions(body, sys)
    if sys.affine_field() is not None:
        widths = []
        for t in times:
            matrix, offset = affine_flow_map(sys, t)
            widths.append(mean_width(Translated(LinearImage(matrix, body), offset), rule))
        return widths

    samples = np.concatenate(
        [support_points_for(body, rule), boundary_samples_for(body, rule, boundary_samples, angular_refine)]
    )
    logger.debug("Sampled %d boundary points of %s", samples.shape[0], type(body).__name__)
    return [mean_width(PointCloud(flow(sys, samples, t, steps).points), rule) for t in times]


def flowed_mean_width(
    body: SupportBody,
    sys: HamiltonianSystem,
    t: float,
    rule: QuadratureRule,
    boundary_samples: Optional[int] = None,
    steps: Optional[int] = None,
    angular_refine: Optional[int] = None,
) -> float:
    """M(phi_H^t(K)) through the flowed boundary sample, or exactly for affine flows."""
    return _flowed_widths(body, sys, [t], rule, boundary_samples, steps, angular_refine)[0]


def first_variation(
    body: SupportBody,
    sys: HamiltonianSystem,
    h_step: Optional[float],
    rule: QuadratureRule,
    boundary_samples: Optional[int] = None,
    steps: Optional[int] = None,
    angular_refine: Optional[int] = None,
) -> float:
    """Central difference (M(h) - M(-h)) / (2h) of the flowed mean width."""
    h = settings.FIRST_VARIATION_STEP if h_step is None else h_step
    forward, backward = _flowed_widths(body, sys, [h, -h], rule, boundary_samples, steps, angular_refine)
    return (forward - backward) / (2.0 * h)


def second_variation_fd(
    body: SupportBody,
    sys: HamiltonianSystem,
    h_step: Optional[float],
    rule: QuadratureRule,
    boundary_samples: Optional[int] = None,
    steps: Optional[int] = None,
    angular_refine: Optional[int] = None,
) -> float:
    """Central second difference (M(h) - 2 M(0) + M(-h)) / h^2 of the flowed mean width."""
    h = settings.SECOND_VARIATION_STEP if h_step is None else h_step
    forward, center, backward = _flowed_widths(body, sys, [h, 0.0, -h], rule, boundary_samples, steps, angular_refine)
    return (forward - 2.0 * center + backward) / (h * h)


def disk_second_variation(h_theta: Callable[[np.ndarray], np.ndarray], angular_points: Optional[int] = None) -> float:
    """(1/pi) int_0^{2 pi} (H''(theta)^2 - H'(theta)^2) d theta for H(theta) = H(theta, 1).

    Derivatives are spectral, from the FFT of the samples on the offset grid.
    Wirtinger's inequality makes the value nonnegative.
    """
    points = settings.QUAD_ANGULAR_POINTS if angular_points is None else angular_points
    theta = angular_grid(points)[0]
    values = np.asarray(h_theta(theta), dtype=float)
    coefficients = fft.rfft(values)
    k = np.arange(coefficients.size, dtype=float)
    first_symbol = 1j * k
    if points % 2 == 0:
        first_symbol[-1] = 0.0
    first = fft.irfft(first_symbol * coefficients, n=points)
    second = fft.irfft(-(k ** 2) * coefficients, n=points)
    return float((2.0 * np.pi / points) * np.sum(second ** 2 - first ** 2) / np.pi)


def flow_jacobian(sys: HamiltonianSystem, z, t: float, steps: Optional[int] = None, eps: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of the time-t flow map at z."""
    z = np.asarray(z, dtype=float)
    size = z.size
    offsets = eps * np.eye(size)
    moved = flow(sys, np.concatenate([z + offsets, z - offsets]), t, steps).points
    return ((moved[:size] - moved[size:]) / (2.0 * eps)).T
