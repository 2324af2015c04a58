"""Provides the orchestration layer between the command line and the numerics.

This module contains the ExperimentService class, which turns a validated
RunConfig into quadrature rules, bodies and Hamiltonians, runs the requested
command and returns a JSON-ready result that embeds the resolved configuration.
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict

import numpy as np

from app.analysis.flows import first_variation, second_variation_fd
from app.analysis.posopt import (
    directional_derivative,
    geodesic_profile,
    geodesic_second_differences,
    gm_moment_matrix,
    green_moments,
    minimize_position,
)
from app.analysis.scan import ramos_compare, staircase_grid, staircase_table
from app.config import settings
from app.core.bodies import Ellipsoid, LinearImage, SupportBody, mean_width, support
from app.core.quad import QuadratureRule, hopf_rule, monte_carlo_rule
from app.core.symp import SymHamiltonianParam, random_unitary_symplectic, williamson
from app.exceptions import ChainViolationError, SpecError
from app.models.forms import mw_symplectic_ellipsoid
from app.schemas import RunConfig, parse_body, parse_hamiltonian

logger = logging.getLogger(__name__)

# The setting --tol overrides for each command; commands absent here ignore it.
PRIMARY_TOLERANCE = {
    "msp": "SYMPLECTIC_CHECK_TOL",
    "optimize": "DESCENT_TOL",
    "staircase": "URYSOHN_TOL",
    "ramos": "CHAIN_TOL",
    "criteria": "GM_TOL",
}

# Parameter grid of the Euler geodesic sampled by `criteria`.
GEODESIC_GRID = np.linspace(-1.0, 1.0, 9)


@contextmanager
def settings_overrides(config: RunConfig):
    """Applies the per-run flags to the settings singleton and restores them afterwards."""
    changes = {"THREADS": config.threads}
    name = PRIMARY_TOLERANCE.get(config.command)
    if name is not None and config.tol is not None:
        changes[name] = config.tol
    saved = {key: getattr(settings, key) for key in changes}
    for key, value in changes.items():
        setattr(settings, key, value)
    try:
        yield
    finally:
        for key, value in saved.items():
            setattr(settings, key, value)


def ellipsoid_form(body: SupportBody) -> np.ndarray:
    """The matrix A of {x^T A x <= 1} for an ellipsoid or a linear image of one.

    Raises:
        SpecError: For any other body or a singular linear map.
    """
    if isinstance(body, Ellipsoid):
        return body.form()
    if isinstance(body, LinearImage):
        inner = ellipsoid_form(body.inner)
        try:
            inverse = np.linalg.inv(body.matrix)
        except np.linalg.LinAlgError as e:
            raise SpecError(f"body.matrix is singular: {e}") from e
        form = inverse.T @ inner @ inverse
        return 0.5 * (form + form.T)
    raise SpecError(f"msp needs an ellipsoid body, got {type(body).__name__}")


class ExperimentService:
    """The central service class for every command of the toolkit."""

    def __init__(self):
        """Sets up the dispatch table from command names to handlers."""
        self.handlers = {
            "mean-width": self.mean_width,
            "msp": self.msp,
            "optimize": self.optimize,
            "variation": self.variation,
            "staircase": self.staircase,
            "ramos": self.ramos,
            "criteria": self.criteria,
        }

    def build_rule(self, config: RunConfig, n: int) -> QuadratureRule:
        """Monte-Carlo rule when --mc-samples is given, Hopf product rule otherwise."""
        if config.mc_samples is not None:
            return monte_carlo_rule(n, config.mc_samples, config.seed)
        return hopf_rule(n, config.radial, config.angular)

    def resolve_body(self, config: RunConfig) -> SupportBody:
        """Parses --body and checks it against --n.

        Raises:
            SpecError: If the spec is invalid or its dimension disagrees with --n.
        """
        body = parse_body(config.body)
        if config.n is not None and config.n != body.dim_n:
            raise SpecError(f"body lives in R^{2 * body.dim_n} but --n is {config.n}")
        return body

    def _fixed_dimension(self, config: RunConfig, n: int):
        if config.n is not None and config.n != n:
            raise SpecError(f"{config.command} runs in R^{2 * n}, got --n {config.n}")

    def mean_width(self, config: RunConfig) -> dict:
        body = self.resolve_body(config)
        rule = self.build_rule(config, body.dim_n)
        return {"mean_width": mean_width(body, rule)}

    def msp(self, config: RunConfig) -> dict:
        """Williamson invariants of an ellipsoid and its minimal mean width over Sp(2n)."""
        body = self.resolve_body(config)
        rule = self.build_rule(config, body.dim_n)
        lam, _ = williamson(ellipsoid_form(body))
        return {
            "lambda": lam.tolist(),
            "msp": mw_symplectic_ellipsoid(lam, rule),
            "mean_width": mean_width(body, rule),
        }

    def optimize(self, config: RunConfig) -> dict:
        body = self.resolve_body(config)
        rule = self.build_rule(config, body.dim_n)
        report = minimize_position(body, rule, starts=config.starts, seed=config.seed, workers=config.threads)
        return report.to_dict()

    def variation(self, config: RunConfig) -> dict:
        """First and second finite-difference variations of M along the Hamiltonian flow."""
        body = self.resolve_body(config)
        system = parse_hamiltonian(config.ham, body.dim_n)
        rule = self.build_rule(config, body.dim_n)
        options = {"boundary_samples": config.boundary_samples, "angular_refine": config.angular_refine}
        return {
            "first_variation": first_variation(body, system, config.h_step, rule, **options),
            "second_variation": second_variation_fd(body, system, config.h2_step, rule, **options),
        }

    def staircase(self, config: RunConfig) -> dict:
        """Rows of the E(1, sqrt(a)) comparison.

        Raises:
            ChainViolationError: If a row fails its inequality check.
        """
        self._fixed_dimension(config, 2)
        rule = self.build_rule(config, 2) if config.optimize else None
        grid = staircase_grid(config.a_from, config.a_to, config.steps)
        rows = staircase_table(grid, rule, config.optimize, config.starts, config.seed)
        failed = [row.a for row in rows if not row.strict_chain]
        if failed:
            raise ChainViolationError(f"Inequality chain fails at a = {', '.join(f'{a:.12g}' for a in failed)}")
        return {"rows": [row.to_dict() for row in rows]}

    def ramos(self, config: RunConfig) -> dict:
        self._fixed_dimension(config, 2)
        return ramos_compare(self.build_rule(config, 2), config.samples)

    def criteria(self, config: RunConfig) -> dict:
        """Criticality diagnostics.

        Reports basis derivatives, the moment matrix, second differences along
        a seeded Euler geodesic and, for n = 1, Green moments.
        """
        body = self.resolve_body(config)
        n = body.dim_n
        rule = self.build_rule(config, n)
        derivatives = [directional_derivative(body, X, rule) for X in SymHamiltonianParam.basis(n)]
        matrix, holds = gm_moment_matrix(body, rule)
        rng = np.random.default_rng(config.seed)
        Q = random_unitary_symplectic(n, rng)
        stretches = np.exp(rng.uniform(0.25, 1.0, size=n))
        profile = geodesic_profile(body, Q, stretches, GEODESIC_GRID, rule)
        result = {
            "directional_derivatives": derivatives,
            "max_abs_derivative": float(np.max(np.abs(derivatives))),
            "gm_matrix": matrix.tolist(),
            "gm_holds": holds,
            "geodesic_stretches": stretches.tolist(),
            "geodesic_min_second_difference": float(np.min(geodesic_second_differences(profile))),
        }
        if n == 1:

            def planar_support(theta):
                return support(body, np.column_stack([np.cos(theta), np.sin(theta)]))

            c2, s2 = green_moments(planar_support, config.angular)
            result["green_moments"] = {"cos2": c2, "sin2": s2}
        return result

    def execute(self, config: RunConfig) -> Dict[str, object]:
        """Runs one command and returns its result with the resolved config attached.

        Args:
            config: The validated run configuration.

        Returns:
            A JSON-ready dict; the key "config" holds `config.model_dump(mode="json")`.

        Raises:
            SpecError: For invalid specs or parameters.
            NumericalError: For non-finite or inconsistent numerics.
            ChainViolationError: When an asserted inequality fails.
        """
        handler = self.handlers[config.command]
        started = time.perf_counter()
        with settings_overrides(config):
            result = handler(config)
        logger.info("Command %s finished in %.2fs", config.command, time.perf_counter() - started)
        result["config"] = config.model_dump(mode="json")
        return result


experiment_service = ExperimentService()
