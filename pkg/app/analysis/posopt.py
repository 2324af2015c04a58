"""Optimal symplectic position of a convex body.

The objective is the full mean width M(S K) over symmetric positive definite
symplectic S = exp(X), X = [[C, D], [D, -C]]; unitary factors of a symplectic
matrix do not change the mean width. Also provides the first and second
variations at the identity and the one-dimensional criteria used to certify
or refute minimality.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.core.bodies import LinearImage, SupportBody, mean_width
from app.core.quad import QuadratureRule, angular_grid, evaluate, integrate
from app.core.symp import SymHamiltonianParam, SymplecticMatrix, euler_path, exp_param
from app.exceptions import SpecError

logger = logging.getLogger(__name__)


@dataclass
class DescentReport:
    """Outcome of a multi-start descent over the symmetric chart.

    `best_value` is the full mean width M(exp(X) K), an upper bound of M_Sp(K).
    """
    best_param: SymHamiltonianParam
    best_value: float
    gradient_norm: float
    iterations: int
    trace: List[Tuple[int, float]] = field(default_factory=list)
    converged: bool = False
    starts: int = 1
    initial_value: float = float("nan")
    is_upper_bound: bool = True

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_param": {"C": self.best_param.C.tolist(), "D": self.best_param.D.tolist()},
            "best_param_norm": self.best_param.norm(),
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "starts": self.starts,
            "initial_value": self.initial_value,
            "is_upper_bound": self.is_upper_bound,
            "trace": [[iteration, value] for iteration, value in self.trace],
        }


def _check_param(body: SupportBody, X: SymHamiltonianParam):
    if X.dim_n != body.dim_n:
        raise SpecError(f"Parameter acts on R^{2 * X.dim_n} but the body lives in R^{2 * body.dim_n}")


def position_objective(body: SupportBody, X: SymHamiltonianParam, rule: QuadratureRule) -> float:
    """M(exp(X) K)."""
    _check_param(body, X)
    return mean_width(LinearImage(exp_param(X).entries, body), rule)


def directional_derivative(body: SupportBody, X: SymHamiltonianParam, rule: QuadratureRule) -> float:
    """d/ds M(exp(sX) K) at s = 0.

    Integrates <grad h(u), X u> + <grad h(-u), -X u>. Nodes where a support
    gradient is ambiguous contribute nothing and are counted in a warning.
    """
    _check_param(body, X)
    if body.dim_n != rule.dim_n:
        raise SpecError(f"Body lives in R^{2 * body.dim_n} but the rule in R^{2 * rule.dim_n}")
    matrix = X.matrix()
    skipped = []

    def integrand(u):
        moved = u @ matrix
        plus, plus_bad = body.support_gradients(u)
        minus, minus_bad = body.support_gradients(-u)
        values = np.einsum("ij,ij->i", plus - minus, moved)
        ambiguous = plus_bad | minus_bad
        skipped.append(int(ambiguous.sum()))
        return np.where(ambiguous, 0.0, values)

    value = integrate(rule, integrand)
    if sum(skipped):
        logger.warning("Excluded %d nodes with an ambiguous support gradient", sum(skipped))
    return value


def coordinate_path_derivative(a: Sequence[float], b: Sequence[float], index: int, rule: QuadratureRule) -> float:
    """Derivative of M(S(s) E(a, b)) at 0 for S(s) = diag(e^s at x_j, e^-s at y_j).

    Equals 2 int (a_j^2 x_j^2 - b_j^2 y_j^2) / |diag(a, b) u| d sigma, negative
    whenever a_j < b_j.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    n = a.size
    if not 0 <= index < n:
        raise SpecError(f"Coordinate index {index} outside 0..{n - 1}")
    axes = np.concatenate([a, b])

    def integrand(u):
        numerator = a[index] ** 2 * u[:, index] ** 2 - b[index] ** 2 * u[:, n + index] ** 2
        return 2.0 * numerator / np.linalg.norm(u * axes, axis=1)

    return integrate(rule, integrand)


def second_difference(body: SupportBody, X: SymHamiltonianParam, rule: QuadratureRule, step: Optional[float] = None) -> float:
    """(f(hX) - 2 f(0) + f(-hX)) / h^2 for the position objective f."""
    h = settings.SECOND_VARIATION_STEP if step is None else step
    vector = X.to_vector()
    n = X.dim_n
    forward = position_objective(body, SymHamiltonianParam.from_vector(n, h * vector), rule)
    center = position_objective(body, SymHamiltonianParam.zero(n), rule)
    backward = position_objective(body, SymHamiltonianParam.from_vector(n, -h * vector), rule)
    return (forward - 2.0 * center + backward) / (h * h)


def geodesic_profile(
    body: SupportBody,
    Q: SymplecticMatrix,
    stretches: Sequence[float],
    s_grid: Sequence[float],
    rule: QuadratureRule,
) -> List[Tuple[float, float]]:
    """Objective values along S(s) = Q diag(L^s, L^-s) Q^T."""
    profile = []
    for s in s_grid:
        S = euler_path(Q, stretches, s)
        profile.append((float(s), mean_width(LinearImage(S, body), rule)))
    return profile


def geodesic_second_differences(profile: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Central second differences of a profile sampled on an equispaced s grid.

    Raises:
        SpecError: If the profile has fewer than 3 points or an uneven grid.
    """
    if len(profile) < 3:
        raise SpecError(f"Second differences need at least 3 profile points, got {len(profile)}")
    s = np.array([point[0] for point in profile])
    values = np.array([point[1] for point in profile])
    steps = np.diff(s)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] == 0.0:
        raise SpecError("Profile points must lie on an equispaced grid")
    return (values[2:] - 2.0 * values[1:-1] + values[:-2]) / steps[0] ** 2


def _gradient(f: Callable[[np.ndarray], float], v: np.ndarray, step: float) -> np.ndarray:
    grad = np.empty_like(v)
    for k in range(v.size):
        offset = np.zeros_like(v)
        offset[k] = step
        grad[k] = (f(v + offset) - f(v - offset)) / (2.0 * step)
    return grad


def _descend(f: Callable[[np.ndarray], float], start: np.ndarray, tol: float, max_iterations: int) -> dict:
    v = start.copy()
    value = f(v)
    initial = value
    trace = [(0, value)]
    grad = _gradient(f, v, settings.FD_STEP)
    norm = float(np.linalg.norm(grad))
    iterations = 0
    while norm >= tol and iterations < max_iterations:
        alpha = 1.0
        accepted = False
        while alpha > 1e-12:
            candidate = v - alpha * grad
            candidate_value = f(candidate)
            if candidate_value <= value - settings.ARMIJO * alpha * norm * norm:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        v, value = candidate, candidate_value
        iterations += 1
        trace.append((iterations, value))
        grad = _gradient(f, v, settings.FD_STEP)
        norm = float(np.linalg.norm(grad))
    return {
        "param": v,
        "value": value,
        "gradient_norm": norm,
        "iterations": iterations,
        "trace": trace,
        "converged": norm < tol,
        "initial_value": initial,
    }


def minimize_position(
    body: SupportBody,
    rule: QuadratureRule,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    workers: Optional[int] = None,
) -> DescentReport:
    """Multi-start gradient descent of M(exp(X) K) over the n(n+1) chart coordinates.

    Gradients are central finite differences and steps follow Armijo
    backtracking from the unit step. Start points are drawn up front from a
    seeded Gaussian, so the result does not depend on the worker count.

    Args:
        body: The body K.
        rule: Quadrature rule for the mean width.
        starts: Number of random starts, at least 1.
        seed: Seed of the start generator.
        tol: Gradient-norm stopping tolerance.
        max_iterations: Iteration cap per start.
        workers: Worker cap for running starts concurrently.

    Returns:
        The report of the start reaching the smallest value. Non-convergence is
        recorded in the report, never raised.
    """
    starts = settings.STARTS if starts is None else starts
    seed = settings.SEED if seed is None else seed
    tol = settings.DESCENT_TOL if tol is None else tol
    max_iterations = settings.MAX_ITERATIONS if max_iterations is None else max_iterations
    workers = settings.THREADS if workers is None else workers
    if starts < 1:
        raise SpecError(f"starts must be >= 1, got {starts}")
    if body.dim_n != rule.dim_n:
        raise SpecError(f"Body lives in R^{2 * body.dim_n} but the rule in R^{2 * rule.dim_n}")
    n = body.dim_n
    dimension = SymHamiltonianParam.dimension(n)
    points = np.random.default_rng(seed).normal(0.0, settings.START_SCALE, size=(starts, dimension))

    def objective(v):
        return position_objective(body, SymHamiltonianParam.from_vector(n, v), rule)

    def run(start):
        return _descend(objective, start, tol, max_iterations)

    if workers > 1 and starts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, points))
    else:
        runs = [run(start) for start in points]

    for index, outcome in enumerate(runs):
        if not outcome["converged"]:
            logger.warning(
                "Descent start %d stopped after %d iterations with gradient norm %.3e",
                index, outcome["iterations"], outcome["gradient_norm"],
            )
    best = min(runs, key=lambda outcome: outcome["value"])
    return DescentReport(
        best_param=SymHamiltonianParam.from_vector(n, best["param"]),
        best_value=float(best["value"]),
        gradient_norm=best["gradient_norm"],
        iterations=best["iterations"],
        trace=best["trace"],
        converged=best["converged"],
        starts=starts,
        initial_value=float(best["initial_value"]),
    )


def i_integral(c: float, A1: float, B1: float, angular_points: Optional[int] = None) -> float:
    """Trapezoid value of I(c) = int_0^{2 pi} A(cos^2 - (1+c) sin^2) / (A(cos^2 + (1+c) sin^2) + B)^{1/2}.

    Raises:
        SpecError: If c <= -1, A1 <= 0 or B1 < 0.
    """
    if c <= -1:
        raise SpecError(f"I(c) needs c > -1, got {c}")
    if A1 <= 0 or B1 < 0:
        raise SpecError(f"I(c) needs A1 > 0 and B1 >= 0, got ({A1}, {B1})")
    points = settings.QUAD_ANGULAR_POINTS if angular_points is None else angular_points
    theta = angular_grid(points)[0]
    cos2, sin2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    values = A1 * (cos2 - (1.0 + c) * sin2) / np.sqrt(A1 * (cos2 + (1.0 + c) * sin2) + B1)
    return float(2.0 * np.pi / points * values.sum())


def i_integral_slope(c: float, A1: float, B1: float, angular_points: Optional[int] = None, step: float = 1e-5) -> float:
    """Central difference of I at c."""
    return (i_integral(c + step, A1, B1, angular_points) - i_integral(c - step, A1, B1, angular_points)) / (2.0 * step)


def green_moments(h: Callable[[np.ndarray], np.ndarray], angular_points: Optional[int] = None) -> Tuple[float, float]:
    """(int h cos 2 theta, int h sin 2 theta) over [0, 2 pi) for a planar support function."""
    points = settings.QUAD_ANGULAR_POINTS if angular_points is None else angular_points
    theta = angular_grid(points)[0]
    values = np.asarray(h(theta), dtype=float)
    scale = 2.0 * np.pi / points
    return float(scale * np.sum(values * np.cos(2 * theta))), float(scale * np.sum(values * np.sin(2 * theta)))


def gm_moment_matrix(body: SupportBody, rule: QuadratureRule, tol: Optional[float] = None) -> Tuple[np.ndarray, bool]:
    """Returns (int h(u) u u^T d sigma, whether it equals (M(K) / 4n) I within tol).

    The trace of the matrix is M(K)/2, so it is a multiple of the identity exactly
    when it equals M(K)/(4n) times the identity.
    """
    tol = settings.GM_TOL if tol is None else tol
    if body.dim_n != rule.dim_n:
        raise SpecError(f"Body lives in R^{2 * body.dim_n} but the rule in R^{2 * rule.dim_n}")
    values = 0.5 * (evaluate(rule, body.support_values) + evaluate(rule, lambda u: body.support_values(-u)))
    weights = np.full(rule.size, 1.0 / rule.size) if rule.uniform else rule.weights
    matrix = (rule.nodes * (weights * values)[:, None]).T @ rule.nodes
    target = np.trace(matrix) / rule.nodes.shape[1]
    holds = bool(np.max(np.abs(matrix - target * np.eye(matrix.shape[0]))) <= tol)
    return matrix, holds
