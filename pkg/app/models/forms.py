"""Closed-form mean widths and the computable value of M_Sp for ellipsoids."""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma

from app.core.bodies import mean_width, symplectic_ellipsoid
from app.core.quad import QuadratureRule, hopf_rule
from app.core.symp import williamson
from app.exceptions import SpecError

logger = logging.getLogger(__name__)

UNION_LIMIT_TOL = 1e-6


def unit_ball_volume(d: int) -> float:
    """Vol(B^d) = pi^{d/2} / Gamma(d/2 + 1)."""
    return float(np.pi ** (d / 2) / gamma(d / 2 + 1))


def mw_ball(n: int, radius: float = 1.0) -> float:
    """M(B^{2n}(radius)) = 2 radius in every dimension; n only selects the ambient space.

    Raises:
        SpecError: If n < 1 or the radius is not positive.
    """
    if n < 1:
        raise SpecError(f"Ball dimension n must be >= 1, got {n}")
    if radius <= 0:
        raise SpecError(f"Ball radius must be positive, got {radius}")
    return 2.0 * float(radius)


def mw_symplectic_ellipsoid2(a1: float, a2: float) -> float:
    """M(E(a_1, a_2)) = 4/3 (a_1^2 + a_1 a_2 + a_2^2) / (a_1 + a_2)."""
    if a1 <= 0 or a2 <= 0:
        raise SpecError(f"Symplectic ellipsoid radii must be positive, got ({a1}, {a2})")
    return 4.0 / 3.0 * (a1 * a1 + a1 * a2 + a2 * a2) / (a1 + a2)


def mw_polydisk(r: Sequence[float]) -> float:
    """M(P(r)) = pi Vol(B^{2n-1}) / Vol(B^{2n}) * mean(r).

    The support of P(r) is the sum of r_i |u_i| and every |u_i| has the same
    average over the sphere.
    """
    r = np.asarray(r, dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise SpecError("Polydisk radii must be strictly positive")
    n = r.size
    return float(np.pi * unit_ball_volume(2 * n - 1) / unit_ball_volume(2 * n) * r.mean())


def mw_union_conjugate_ellipsoids(a: float, b: float) -> float:
    """M(E(a, b) u E(b, a)) in R^4 = 8/3 (a^3 - ((a^2 + b^2)/2)^{3/2}) / (a^2 - b^2).

    The expression is symmetric in (a, b); close to the diagonal its removable
    singularity is replaced by the limit 2a.
    """
    if a <= 0 or b <= 0:
        raise SpecError(f"Ellipsoid axes must be positive, got ({a}, {b})")
    a, b = max(a, b), min(a, b)
    if a - b < UNION_LIMIT_TOL * a:
        return 2.0 * a
    return 8.0 / 3.0 * (a ** 3 - ((a * a + b * b) / 2.0) ** 1.5) / (a * a - b * b)


def mw_symplectic_ellipsoid(a: Sequence[float], rule: Optional[QuadratureRule] = None) -> float:
    """M(E(a)) for any n: closed form for n <= 2, quadrature otherwise."""
    a = np.asarray(a, dtype=float)
    if a.size == 1:
        return mw_ball(1, a[0])
    if a.size == 2:
        return mw_symplectic_ellipsoid2(a[0], a[1])
    rule = hopf_rule(a.size) if rule is None else rule
    return mean_width(symplectic_ellipsoid(a), rule)


def msp_ellipsoid(form, rule: Optional[QuadratureRule] = None) -> float:
    """M_Sp of the ellipsoid {x^T A x <= 1}: the mean width of E(lambda) for its Williamson invariants.

    Raises:
        SpecError: If the form is not symmetric positive definite.
    """
    lam, _ = williamson(form)
    logger.info("Symplectic eigenvalues %s", lam.tolist())
    return mw_symplectic_ellipsoid(lam, rule)
