"""Datasets for the ellipsoid staircase and the comparison of the Ramos domains.

The staircase compares, for E(1, sqrt(a)), the normalized volume sqrt(a), the
squared quarter mean width and the ball-embedding capacity c^B on the range
1 <= a <= 13/2. The Ramos comparison orders the mean widths of the toric domain
X_0 (bounded by the axes and a convex curve), of X_1 = E(a, b) u E(b, a) and of
the Lagrangian bidisk.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.config import settings
from app.core.bodies import LagrangianBidisk, ToricBody, ToricProfile, Union, mean_width, symplectic_ellipsoid
from app.core.quad import QuadratureRule
from app.analysis.posopt import minimize_position
from app.exceptions import ChainViolationError, SpecError
from app.models.forms import mw_symplectic_ellipsoid2, mw_union_conjugate_ellipsoids

logger = logging.getLogger(__name__)

CB_RANGE = (1.0, 6.5)
RAMOS_A = math.sqrt(2.0)
RAMOS_B = math.sqrt(2.0 / (math.pi - 1.0))
LAGRANGIAN_BIDISK_MW = 8.0 / 3.0
STAIRCASE_FIELDS = ("a", "vol", "mw_sq_quarter", "cb", "msp_upper_sq_quarter", "strict_chain")


@dataclass(frozen=True)
class StaircaseRow:
    """One value of a with the quantities sandwiching (M_Symp)^2 / 4."""
    a: float
    vol: float
    mw_sq_quarter: float
    cb: float
    msp_upper_sq_quarter: float
    strict_chain: bool

    def to_dict(self) -> dict:
        return asdict(self)


def cb_ellipsoid(a: float) -> float:
    """c^B(E(1, sqrt(a))) on the plotted range 1 <= a <= 13/2.

    Raises:
        SpecError: Outside the plotted range.
    """
    low, high = CB_RANGE
    if not low <= a <= high:
        raise SpecError(f"c^B is tabulated only on the plotted range [1, 13/2], got a={a}")
    if a <= 2.0:
        return float(a)
    if a <= 4.0:
        return 2.0
    if a <= 5.0:
        return a / 2.0
    if a <= 6.25:
        return 2.5
    return 2.0 * a / 5.0


def staircase_row(
    a: float,
    rule: Optional[QuadratureRule] = None,
    optimize: bool = False,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
) -> StaircaseRow:
    cb = cb_ellipsoid(a)
    vol = math.sqrt(a)
    mw = mw_symplectic_ellipsoid2(1.0, vol)
    mw_sq_quarter = mw * mw / 4.0
    msp_upper = mw_sq_quarter
    if optimize:
        if rule is None:
            raise SpecError("Optimizing a staircase row needs a quadrature rule")
        report = minimize_position(symplectic_ellipsoid([1.0, vol]), rule, starts=starts, seed=seed)
        msp_upper = min(msp_upper, report.best_value ** 2 / 4.0)
    if 1.0 < a < 2.0:
        strict = vol < mw_sq_quarter < cb
    else:
        strict = vol <= mw_sq_quarter + settings.URYSOHN_TOL
    if not strict:
        logger.warning("Inequality chain fails at a=%.12g: vol=%.12g, mw^2/4=%.12g, cb=%.12g", a, vol, mw_sq_quarter, cb)
    return StaircaseRow(a, vol, mw_sq_quarter, cb, msp_upper, bool(strict))


def staircase_table(
    a_values: Sequence[float],
    rule: Optional[QuadratureRule] = None,
    optimize: bool = False,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[StaircaseRow]:
    """One StaircaseRow per a.

    With `optimize`, the descent runs on E(1, sqrt(a)) and the best value found
    (never above the identity position) fills msp_upper_sq_quarter; otherwise
    that column repeats mw_sq_quarter.
    """
    return [staircase_row(float(a), rule, optimize, starts, seed) for a in a_values]


def staircase_grid(start: float, stop: float, steps: int) -> np.ndarray:
    """`steps` equispaced values from start to stop inclusive."""
    if steps < 1:
        raise SpecError(f"steps must be >= 1, got {steps}")
    if steps == 1:
        return np.array([float(start)])
    return np.linspace(start, stop, steps)


def ramos_profile(samples: Optional[int] = None) -> ToricProfile:
    """Omega_0: the region under (2 sin(t/2) - t cos(t/2), 2 sin(t/2) + (2 pi - t) cos(t/2)), t in [0, 2 pi].

    Raises:
        SpecError: If samples < 16.
    """
    samples = settings.CURVE_SAMPLES if samples is None else samples
    if samples < 16:
        raise SpecError(f"The Ramos curve needs at least 16 samples, got {samples}")
    alpha = np.linspace(0.0, 2.0 * np.pi, samples)
    half_sin, half_cos = np.sin(alpha / 2.0), np.cos(alpha / 2.0)
    omega1 = 2.0 * half_sin - alpha * half_cos
    omega2 = 2.0 * half_sin + (2.0 * np.pi - alpha) * half_cos
    # Pin the endpoints to the axes and strip rounding wiggles from monotonicity.
    omega1[0], omega2[-1] = 0.0, 0.0
    omega1 = np.maximum.accumulate(np.maximum(omega1, 0.0))
    omega2 = np.minimum.accumulate(np.maximum(omega2, 0.0))
    return ToricProfile.from_curve(np.column_stack([omega1, omega2]))


def ramos_union_profile() -> ToricProfile:
    """Omega_1: the broken line (0, 2 pi) -> (2, 2) -> (2 pi, 0), the moment image of X_1."""
    return ToricProfile.from_curve([[0.0, 2.0 * np.pi], [2.0, 2.0], [2.0 * np.pi, 0.0]])


def ramos_union_body() -> Union:
    """X_1 = E(a, b) u E(b, a) with a = sqrt(2), b = sqrt(2 / (pi - 1))."""
    return Union((symplectic_ellipsoid([RAMOS_A, RAMOS_B]), symplectic_ellipsoid([RAMOS_B, RAMOS_A])))


def ramos_body(samples: Optional[int] = None) -> ToricBody:
    """X_0 evaluated through the outer bound of its sampled boundary."""
    return ToricBody(ramos_profile(samples), outer=True)


def ramos_compare(rule: QuadratureRule, samples: Optional[int] = None) -> dict:
    """Computes and checks M(X_0) < M(X_1) < M(P_L) = 8/3.

    mw_X0 is an upper bound of M(X_0) and mw_X0_lower a lower bound from the
    sampled points; mw_X0_coarse repeats mw_X0 at half the samples as a
    convergence diagnostic.

    Raises:
        SpecError: If the rule is not on R^4.
        ChainViolationError: If the chain or a quadrature cross-check fails by more than CHAIN_TOL.
    """
    if rule.dim_n != 2:
        raise SpecError(f"The Ramos comparison lives in R^4, got a rule on R^{2 * rule.dim_n}")
    samples = settings.CURVE_SAMPLES if samples is None else samples
    profile = ramos_profile(samples)
    record = {
        "mw_X0": mean_width(ToricBody(profile, outer=True), rule),
        "mw_X0_lower": mean_width(ToricBody(profile), rule),
        "mw_X0_coarse": mean_width(ramos_body(max(16, samples // 2)), rule),
        "mw_X1": mw_union_conjugate_ellipsoids(RAMOS_A, RAMOS_B),
        "mw_X1_quadrature": mean_width(ramos_union_body(), rule),
        "mw_PL": LAGRANGIAN_BIDISK_MW,
        "mw_PL_quadrature": mean_width(LagrangianBidisk(), rule),
        "samples": samples,
    }
    logger.info("Ramos comparison: %s", record)

    tol = settings.CHAIN_TOL
    failures = []
    if not record["mw_X0"] < record["mw_X1"] - tol:
        failures.append(f"M(X_0) <= {record['mw_X0']:.8f} is not below M(X_1) = {record['mw_X1']:.8f}")
    if not record["mw_X1"] < record["mw_PL"] - tol:
        failures.append(f"M(X_1) = {record['mw_X1']:.8f} is not below 8/3")
    if abs(record["mw_X1_quadrature"] - record["mw_X1"]) > tol:
        failures.append(f"quadrature gives M(X_1) = {record['mw_X1_quadrature']:.8f}")
    if abs(record["mw_PL_quadrature"] - record["mw_PL"]) > tol:
        failures.append(f"quadrature gives M(P_L) = {record['mw_PL_quadrature']:.8f}")
    if failures:
        raise ChainViolationError("Ramos chain violated: " + "; ".join(failures))
    return record
