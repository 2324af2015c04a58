"""Quadrature on the unit sphere S^{2n-1} of R^{2n} = C^n.

Coordinates are ordered (x_1, ..., x_n, y_1, ..., y_n); the i-th complex
component of a vector u is u_i = (x_i, y_i). Product rules are built in Hopf
coordinates x_i = r_i cos(theta_i), y_i = r_i sin(theta_i) with sum r_i^2 = 1,
where the rotation-invariant probability measure has density
(n-1)!/(2 pi^n) * r_1 ... r_{n-1} over the radial region and the n-torus.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Optional

import numpy as np

from app.config import settings
from app.exceptions import EvaluationError, QuadratureError

logger = logging.getLogger(__name__)

HOPF_PRODUCT = "hopf-product"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a probability measure on S^{2n-1}.

    Attributes:
        dim_n: Half-dimension n.
        nodes: Array of shape (N, 2n) of unit vectors.
        weights: Array of shape (N,) of positive weights summing to 1.
        kind: Either "hopf-product" or "monte-carlo".
        radial_points: Gauss-Legendre points per radial coordinate (product rules).
        angular_points: Trapezoid points per angle (product rules).
        seed: Generator seed (Monte-Carlo rules).
    """
    dim_n: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    radial_points: int = 0
    angular_points: int = 0
    seed: Optional[int] = None
    uniform: bool = field(default=False, repr=False)

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 * self.dim_n:
            raise QuadratureError(f"Nodes must have shape (N, {2 * self.dim_n}), got {nodes.shape}")
        if weights.shape != (nodes.shape[0],):
            raise QuadratureError("Every node needs exactly one weight")
        norm_error = np.max(np.abs(np.linalg.norm(nodes, axis=1) - 1.0))
        if norm_error > settings.NODE_NORM_TOL:
            raise QuadratureError(f"Nodes leave the unit sphere by {norm_error:.3e}")
        if np.any(weights <= 0):
            raise QuadratureError("Quadrature weights must be positive")
        if abs(weights.sum() - 1.0) > settings.WEIGHT_SUM_TOL:
            raise QuadratureError(f"Weights sum to {weights.sum()!r}, not 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def angular_grid(self) -> np.ndarray:
        """Returns the offset trapezoid angles shared by every Hopf angle.

        Raises:
            QuadratureError: If the rule is not a Hopf product rule.
        """
        if self.kind != HOPF_PRODUCT:
            raise QuadratureError("Only Hopf product rules carry an angular grid")
        return angular_grid(self.angular_points)[0]

    def hopf_coordinates(self) -> tuple:
        """Returns (angles in [0, 2 pi), radii) of every node, each of shape (N, n)."""
        n = self.dim_n
        radii = np.hypot(self.nodes[:, :n], self.nodes[:, n:])
        angles = np.mod(np.arctan2(self.nodes[:, n:], self.nodes[:, :n]), 2.0 * np.pi)
        return angles, radii

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.dim_n,
            "nodes": self.size,
            "radial_points": self.radial_points,
            "angular_points": self.angular_points,
            "seed": self.seed,
        }


def angular_grid(points: int) -> tuple:
    """Builds the half-cell offset angle grid with exact antipodal pairing.

    The second half of the grid is the first half shifted by pi; its cosines and
    sines are the exact negatives of the first half, so the node set of a product
    rule is closed under u -> -u without rounding.

    Args:
        points: Even number of angles on [0, 2 pi).

    Returns:
        A tuple (theta, cos(theta), sin(theta)) of arrays of length `points`.
    """
    half = points // 2
    theta = (np.arange(points) + 0.5) * (2.0 * np.pi / points)
    cos_half = np.cos(theta[:half])
    sin_half = np.sin(theta[:half])
    return theta, np.concatenate([cos_half, -cos_half]), np.concatenate([sin_half, -sin_half])


def sphere_radii(cube: np.ndarray) -> tuple:
    """Maps points of the unit cube [0,1]^{n-1} to Hopf radii (r_1, ..., r_n).

    Each cube coordinate tau_j is graded by t_j = sin^2(pi tau_j / 2) and the
    graded point is sent to the simplex by the collapsed map
    s_1 = t_1, s_k = (1-t_1)...(1-t_{k-1}) t_k, s_n = (1-t_1)...(1-t_{n-1}),
    with r_i = sqrt(s_i). The radii are then products of sines and cosines.

    Args:
        cube: Array of shape (K, n-1) with entries in [0, 1].

    Returns:
        A tuple (radii, density) where radii has shape (K, n) and density is the
        probability density of the measure's radial marginal in cube coordinates.
    """
    count, m = cube.shape
    phi = 0.5 * np.pi * cube
    sines, cosines = np.sin(phi), np.cos(phi)
    radii = np.empty((count, m + 1))
    prefix = np.ones(count)
    for j in range(m):
        radii[:, j] = prefix * sines[:, j]
        prefix = prefix * cosines[:, j]
    radii[:, m] = prefix

    density = np.full(count, float(factorial(m)))
    for j in range(m):
        # (1 - t_j)^(m - 1 - j) from the collapsed map, dt_j/dtau_j = pi sin cos.
        density *= np.pi * sines[:, j] * cosines[:, j] ** (2 * (m - 1 - j) + 1)
    return radii, density


def hopf_nodes(radii: np.ndarray, cos_theta: np.ndarray, sin_theta: np.ndarray) -> np.ndarray:
    """Assembles unit vectors from Hopf radii and per-angle cosines and sines.

    Args:
        radii: Array of shape (K, n).
        cos_theta: Array of shape (A, n) of cos(theta_i) for each angle tuple.
        sin_theta: Array of shape (A, n).

    Returns:
        Array of shape (K * A, 2n), radial index varying slowest.
    """
    x = radii[:, None, :] * cos_theta[None, :, :]
    y = radii[:, None, :] * sin_theta[None, :, :]
    n = radii.shape[1]
    return np.concatenate([x, y], axis=2).reshape(-1, 2 * n)


def torus_grid(points: int, n: int) -> tuple:
    """Returns (theta, cos, sin) arrays of shape (points^n, n) for the angle product grid."""
    theta, cos, sin = angular_grid(points)
    index = np.stack(np.meshgrid(*([np.arange(points)] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return theta[index], cos[index], sin[index]


def _check_dimension(n: int):
    if not 1 <= n <= settings.MAX_HALF_DIM:
        raise QuadratureError(f"Half-dimension n={n} outside the supported range 1..{settings.MAX_HALF_DIM}")


def hopf_rule(n: int, radial_points: Optional[int] = None, angular_points: Optional[int] = None) -> QuadratureRule:
    """Builds the Hopf-coordinate product rule on S^{2n-1}.

    The radial part is tensor Gauss-Legendre on the cube behind `sphere_radii`;
    every angle uses the same half-cell offset trapezoid grid.

    Args:
        n: Half-dimension, 1 <= n <= 4.
        radial_points: Gauss-Legendre points per radial coordinate (n >= 2).
        angular_points: Even number of trapezoid points per angle, at least 4.

    Returns:
        A QuadratureRule of kind "hopf-product" with
        radial_points^(n-1) * angular_points^n nodes.

    Raises:
        QuadratureError: If a parameter is out of range.
    """
    _check_dimension(n)
    radial_points = settings.QUAD_RADIAL_POINTS if radial_points is None else radial_points
    angular_points = settings.QUAD_ANGULAR_POINTS if angular_points is None else angular_points
    if angular_points < 4 or angular_points % 2:
        raise QuadratureError(f"angular_points must be an even integer >= 4, got {angular_points}")
    if radial_points < 1:
        raise QuadratureError(f"radial_points must be a positive integer, got {radial_points}")
    if n >= 2 and radial_points < 2:
        raise QuadratureError(f"radial_points must be >= 2 for n >= 2, got {radial_points}")

    _, cos_theta, sin_theta = torus_grid(angular_points, n)
    if n == 1:
        radii = np.ones((1, 1))
        radial_weights = np.ones(1)
    else:
        tau, w = np.polynomial.legendre.leggauss(radial_points)
        tau, w = 0.5 * (tau + 1.0), 0.5 * w
        m = n - 1
        cube = np.stack(np.meshgrid(*([tau] * m), indexing="ij"), axis=-1).reshape(-1, m)
        cube_weights = np.prod(np.stack(np.meshgrid(*([w] * m), indexing="ij"), axis=-1).reshape(-1, m), axis=1)
        radii, density = sphere_radii(cube)
        radial_weights = cube_weights * density

    nodes = hopf_nodes(radii, cos_theta, sin_theta)
    weights = np.repeat(radial_weights, cos_theta.shape[0])
    weights = weights / weights.sum()
    logger.info("Built Hopf rule n=%d with %d nodes", n, nodes.shape[0])
    return QuadratureRule(
        dim_n=n,
        nodes=nodes,
        weights=weights,
        kind=HOPF_PRODUCT,
        radial_points=radial_points if n >= 2 else 0,
        angular_points=angular_points,
    )


def monte_carlo_rule(n: int, samples: Optional[int] = None, seed: Optional[int] = None) -> QuadratureRule:
    """Builds a Monte-Carlo rule from normalized Gaussian draws.

    Args:
        n: Half-dimension, 1 <= n <= 4.
        samples: Number of nodes, at least 1.
        seed: Seed of numpy's default generator.

    Returns:
        A QuadratureRule of kind "monte-carlo" with equal weights.
    """
    _check_dimension(n)
    samples = settings.MC_SAMPLES if samples is None else samples
    seed = settings.SEED if seed is None else seed
    if samples < 1:
        raise QuadratureError(f"samples must be >= 1, got {samples}")
    draws = np.random.default_rng(seed).standard_normal((samples, 2 * n))
    nodes = draws / np.linalg.norm(draws, axis=1, keepdims=True)
    return QuadratureRule(
        dim_n=n,
        nodes=nodes,
        weights=np.full(samples, 1.0 / samples),
        kind=MONTE_CARLO,
        seed=seed,
        uniform=True,
    )


def evaluate(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray], workers: Optional[int] = None) -> np.ndarray:
    """Evaluates a vectorized integrand at every node of the rule.

    Nodes are split into fixed chunks of `settings.CHUNK_SIZE`; with more than one
    worker the chunks run on a thread pool and are reassembled in node order.

    Args:
        rule: The quadrature rule.
        f: Maps an array of shape (k, 2n) of unit vectors to k reals.
        workers: Worker cap; defaults to `settings.THREADS`.

    Returns:
        Array of shape (N,) of integrand values.

    Raises:
        EvaluationError: If any value is not finite.
    """
    workers = settings.THREADS if workers is None else workers
    size = settings.CHUNK_SIZE
    chunks = [rule.nodes[start:start + size] for start in range(0, rule.size, size)]

    def run(chunk):
        return np.broadcast_to(np.asarray(f(chunk), dtype=float), (chunk.shape[0],))

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(chunk) for chunk in chunks]
    values = np.concatenate(parts)

    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        index = int(bad[0])
        raise EvaluationError(
            f"Integrand is not finite at node {index} {rule.nodes[index].tolist()}: {values[index]}"
        )
    return values


def integrate(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray], workers: Optional[int] = None) -> float:
    """Returns sum_i w_i f(node_i).

    The reduction is numpy's pairwise summation over the values in node order, so
    the result does not depend on the number of workers.
    """
    values = evaluate(rule, f, workers)
    if rule.uniform:
        return float(values.sum() / values.size)
    return float(np.sum(rule.weights * values))
