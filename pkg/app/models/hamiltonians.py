"""Provides the catalog of Hamiltonian functions driving symplectic flows.

A HamiltonianSystem evaluates H and its exact gradient on batches of points of
R^{2n} (shape (k, 2n), coordinates ordered x_1..x_n, y_1..y_n). Two concrete
families cover every preset: polynomials in Cartesian coordinates and
trigonometric polynomials in Hopf coordinates z_i = r_i e^{i theta_i}.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from app.exceptions import SpecError

logger = logging.getLogger(__name__)

PRESETS = ("x1y1", "r2cos", "r2cos2", "oscillator", "linear-x1")


class HamiltonianSystem(ABC):
    """A smooth function H on R^{2n} with an exact gradient."""

    dim_n: int

    @abstractmethod
    def value(self, z: np.ndarray) -> np.ndarray:
        """Evaluates H at every row of `z`."""

    @abstractmethod
    def gradient(self, z: np.ndarray) -> np.ndarray:
        """Evaluates grad H at every row of `z`, shape (k, 2n)."""

    def affine_field(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Returns (A, c) with X_H(z) = A z + c when H has degree at most 2, else None."""
        return None


@dataclass(frozen=True, eq=False)
class CartesianPolynomial(HamiltonianSystem):
    """H(z) = sum_m c_m prod_j z_j^{e_mj} with nonnegative integer exponents.

    Attributes:
        exponents: Integer array of shape (M, 2n).
        coeffs: Array of shape (M,).
    """
    exponents: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        exponents = np.atleast_2d(np.array(self.exponents, dtype=int))
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        if exponents.shape[0] != coeffs.size or exponents.shape[1] % 2 or exponents.shape[1] == 0:
            raise SpecError("Every monomial needs one coefficient and an even number of exponents")
        if np.any(exponents < 0):
            raise SpecError("Monomial exponents must be nonnegative")
        if not np.all(np.isfinite(coeffs)):
            raise SpecError("Monomial coefficients must be finite")
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim_n(self) -> int:
        return self.exponents.shape[1] // 2

    def value(self, z):
        powers = np.prod(z[:, None, :] ** self.exponents[None, :, :], axis=2)
        return powers @ self.coeffs

    def gradient(self, z):
        grad = np.empty_like(z)
        for j in range(z.shape[1]):
            lowered = self.exponents.copy()
            lowered[:, j] = np.maximum(lowered[:, j] - 1, 0)
            powers = np.prod(z[:, None, :] ** lowered[None, :, :], axis=2)
            grad[:, j] = powers @ (self.coeffs * self.exponents[:, j])
        return grad

    def affine_field(self):
        if np.any(self.exponents.sum(axis=1) > 2):
            return None
        size = self.exponents.shape[1]
        hessian = np.zeros((size, size))
        linear = np.zeros(size)
        for exponent, coeff in zip(self.exponents, self.coeffs):
            active = np.flatnonzero(exponent)
            if exponent.sum() == 1:
                linear[active[0]] += coeff
            elif active.size == 1:
                hessian[active[0], active[0]] += 2.0 * coeff
            elif active.size == 2:
                hessian[active[0], active[1]] += coeff
                hessian[active[1], active[0]] += coeff
        n = size // 2
        J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
        return J @ hessian, J @ linear


@dataclass(frozen=True, eq=False)
class HopfTrigPolynomial(HamiltonianSystem):
    """H = sum_m c_m prod_i r_i^{p_mi} trig_m(sum_i k_mi theta_i).

    Each exponent satisfies p_mi >= |k_mi|, which keeps H continuous where a
    component z_i vanishes.

    Attributes:
        frequencies: Integer array (M, n) of the angle multipliers k.
        powers: Integer array (M, n) of the radial exponents p.
        coeffs: Array (M,).
        sine: Boolean array (M,); True selects sin, False cos.
    """
    frequencies: np.ndarray
    powers: np.ndarray
    coeffs: np.ndarray
    sine: np.ndarray

    def __post_init__(self):
        k = np.atleast_2d(np.array(self.frequencies, dtype=int))
        p = np.atleast_2d(np.array(self.powers, dtype=int))
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        sine = np.array(self.sine, dtype=bool).reshape(-1)
        if k.shape != p.shape or k.shape[0] != coeffs.size or sine.size != coeffs.size:
            raise SpecError("Every Hopf term needs matching frequencies, exponents, coefficient and phase")
        if np.any(p < np.abs(k)):
            raise SpecError("Radial exponents must satisfy p_i >= |k_i|")
        object.__setattr__(self, "frequencies", k)
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "sine", sine)

    @property
    def dim_n(self) -> int:
        return self.frequencies.shape[1]

    def _polar(self, z):
        n = self.dim_n
        r = np.hypot(z[:, :n], z[:, n:])
        theta = np.arctan2(z[:, n:], z[:, :n])
        phase = theta @ self.frequencies.T
        trig = np.where(self.sine, np.sin(phase), np.cos(phase))
        dtrig = np.where(self.sine, np.cos(phase), -np.sin(phase))
        return r, theta, trig, dtrig

    def value(self, z):
        r, _, trig, _ = self._polar(z)
        radial = np.prod(r[:, None, :] ** self.powers[None, :, :], axis=2)
        return (radial * trig) @ self.coeffs

    def gradient(self, z):
        n = self.dim_n
        r, theta, trig, dtrig = self._polar(z)
        grad = np.empty_like(z)
        for i in range(n):
            lowered = self.powers.copy()
            lowered[:, i] = np.maximum(lowered[:, i] - 1, 0)
            # r_i^{p_i - 1} prod_{j != i} r_j^{p_j}; both partials below carry it.
            reduced = np.prod(r[:, None, :] ** lowered[None, :, :], axis=2) * self.coeffs
            d_r = (reduced * trig) @ self.powers[:, i]
            d_theta_over_r = (reduced * dtrig) @ self.frequencies[:, i]
            c, s = np.cos(theta[:, i]), np.sin(theta[:, i])
            grad[:, i] = c * d_r - s * d_theta_over_r
            grad[:, n + i] = s * d_r + c * d_theta_over_r
        return grad


def hopf_term_arrays(n: int, terms: Sequence[dict]) -> HopfTrigPolynomial:
    """Builds a HopfTrigPolynomial from term dictionaries.

    Each term has `ctheta` (n frequencies), `cr` (n - 1 or n exponents; a missing
    last exponent defaults to |k_n|), `coeff` and `phase` ("cos" or "sin").

    Raises:
        SpecError: If a term has the wrong number of entries.
    """
    if not terms:
        raise SpecError("A Hopf trig polynomial needs at least one term")
    frequencies, powers, coeffs, sine = [], [], [], []
    for index, term in enumerate(terms):
        k = list(term["ctheta"])
        p = list(term.get("cr", []))
        if len(k) != n:
            raise SpecError(f"terms.{index}.ctheta must have {n} entries, got {len(k)}")
        if len(p) == n - 1:
            p.append(abs(k[-1]))
        if len(p) != n:
            raise SpecError(f"terms.{index}.cr must have {n - 1} or {n} entries, got {len(p)}")
        frequencies.append(k)
        powers.append(p)
        coeffs.append(term.get("coeff", 1.0))
        sine.append(term.get("phase", "cos") == "sin")
    return HopfTrigPolynomial(frequencies, powers, coeffs, sine)


def _unit_exponent(n: int, *indices: int) -> np.ndarray:
    exponent = np.zeros(2 * n, dtype=int)
    for index in indices:
        exponent[index] += 1
    return exponent


def preset(name: str, n: int) -> HamiltonianSystem:
    """Returns a catalog Hamiltonian on R^{2n}.

    Presets:
        x1y1: H = x_1 y_1, whose flow is diag(e^t, e^-t) in the (x_1, y_1) plane.
        r2cos: H = r_1^2 cos(theta_1).
        r2cos2: H = r_1^2 cos(2 theta_1) = x_1^2 - y_1^2.
        oscillator: H = (1/2) sum (x_i^2 + y_i^2), the diagonal circle action.
        linear-x1: H = x_1.

    Raises:
        SpecError: For an unknown preset name.
    """
    if name == "x1y1":
        return CartesianPolynomial([_unit_exponent(n, 0, n)], [1.0])
    if name in ("r2cos", "r2cos2"):
        k = np.zeros(n, dtype=int)
        k[0] = 1 if name == "r2cos" else 2
        p = np.zeros(n, dtype=int)
        p[0] = 2
        return HopfTrigPolynomial([k], [p], [1.0], [False])
    if name == "oscillator":
        exponents = [_unit_exponent(n, i, i) for i in range(2 * n)]
        return CartesianPolynomial(exponents, np.full(2 * n, 0.5))
    if name == "linear-x1":
        return CartesianPolynomial([_unit_exponent(n, 0)], [1.0])
    raise SpecError(f"Unknown Hamiltonian preset {name!r}; expected one of {', '.join(PRESETS)}")


def random_hopf_trig(n: int, rng: np.random.Generator, terms: int = 3, max_frequency: int = 2) -> HopfTrigPolynomial:
    """Draws a Hopf trig polynomial with frequencies in [-max_frequency, max_frequency].

    Exponents are |k_i| plus 0 or 2, so every term is a polynomial in x and y.
    """
    k = rng.integers(-max_frequency, max_frequency + 1, size=(terms, n))
    p = np.abs(k) + 2 * rng.integers(0, 2, size=(terms, n))
    coeffs = rng.standard_normal(terms)
    sine = rng.integers(0, 2, size=terms).astype(bool)
    return HopfTrigPolynomial(k, p, coeffs, sine)
