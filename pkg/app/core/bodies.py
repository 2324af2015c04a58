"""Convex bodies of R^{2n} represented through exact support functions.

Every body evaluates its support function h(u) = sup_{k in K} <k, u> on a batch
of directions at once; directions are arrays of shape (k, 2n) ordered
(x_1, ..., x_n, y_1, ..., y_n). Bodies are immutable value objects and
composite bodies hold their members by value.

Toric sets are described by their image under the moment map
mu(z) = (pi |z_1|^2, ..., pi |z_n|^2); a moment box [a, b] becomes the
polyannulus with radii sqrt(a / pi) <= |z_i| <= sqrt(b / pi).
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from math import factorial
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from app.config import settings
from app.core.quad import QuadratureRule, integrate
from app.exceptions import SpecError

logger = logging.getLogger(__name__)


def _as_vector(values, name: str) -> np.ndarray:
    array = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(array)):
        raise SpecError(f"{name} must contain finite numbers")
    array.setflags(write=False)
    return array


def component_norms(u: np.ndarray, n: int) -> np.ndarray:
    """Returns ||u_i|| = |z_i| for every complex component, shape (k, n)."""
    return np.hypot(u[:, :n], u[:, n:])


def _unit_components(u: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (u_i / ||u_i|| spread back to R^{2n}, mask of directions with some u_i = 0)."""
    norms = component_norms(u, n)
    degenerate = np.any(norms == 0.0, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return u / np.concatenate([safe, safe], axis=1), degenerate


def max_over_radii(norms: np.ndarray, radii: np.ndarray, with_arg: bool = False):
    """Computes max_k sum_i radii[k, i] * norms[:, i] for every row of `norms`.

    Rows that agree to 12 decimals are evaluated once, which collapses the
    angular part of a Hopf product rule.

    Args:
        norms: Array of shape (k, n) of component norms.
        radii: Array of shape (K, n) of polydisk radii.
        with_arg: Also return the maximizing index and a tie mask.

    Returns:
        The maxima of shape (k,), or a tuple (maxima, argmax, ties) when
        `with_arg` is set.
    """
    _, first, inverse = np.unique(np.round(norms, 12), axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    representatives = norms[first]
    rows = max(1, settings.BLOCK_ELEMENTS // max(1, radii.shape[0]))
    best = np.empty(representatives.shape[0])
    arg = np.empty(representatives.shape[0], dtype=int)
    ties = np.zeros(representatives.shape[0], dtype=bool)
    for start in range(0, representatives.shape[0], rows):
        values = representatives[start:start + rows] @ radii.T
        index = np.argmax(values, axis=1)
        top = values[np.arange(values.shape[0]), index]
        best[start:start + rows] = top
        arg[start:start + rows] = index
        if with_arg and radii.shape[0] > 1:
            values[np.arange(values.shape[0]), index] = -np.inf
            ties[start:start + rows] = top - values.max(axis=1) <= settings.TIE_TOL
    if with_arg:
        return best[inverse], arg[inverse], ties[inverse]
    return best[inverse]


def cloud_max(u: np.ndarray, points: np.ndarray, with_arg: bool = False):
    """Computes max over points of <p, u> for every row of `u`, in memory-bounded blocks.

    Args:
        u: Array of shape (k, d).
        points: Array of shape (P, d).
        with_arg: Also return the maximizing point index and a tie mask.
    """
    count = points.shape[0]
    cols = min(count, settings.BLOCK_ELEMENTS)
    rows = max(1, settings.BLOCK_ELEMENTS // cols)
    best = np.full(u.shape[0], -np.inf)
    second = np.full(u.shape[0], -np.inf)
    arg = np.zeros(u.shape[0], dtype=int)
    for r0 in range(0, u.shape[0], rows):
        block = u[r0:r0 + rows]
        span = slice(r0, r0 + block.shape[0])
        for c0 in range(0, count, cols):
            values = block @ points[c0:c0 + cols].T
            if not with_arg:
                best[span] = np.maximum(best[span], values.max(axis=1))
                continue
            index = np.argmax(values, axis=1)
            top = values[np.arange(values.shape[0]), index]
            improved = top > best[span]
            values[np.arange(values.shape[0]), index] = -np.inf
            runner = values.max(axis=1) if values.shape[1] > 1 else np.full(values.shape[0], -np.inf)
            second[span] = np.where(improved, np.maximum(runner, best[span]), np.maximum(second[span], top))
            arg[span] = np.where(improved, index + c0, arg[span])
            best[span] = np.where(improved, top, best[span])
    if with_arg:
        return best, arg, best - second <= settings.TIE_TOL
    return best


class SupportBody(ABC):
    """A bounded set of R^{2n} known through its support function."""

    dim_n: int

    @abstractmethod
    def support_values(self, u: np.ndarray) -> np.ndarray:
        """Evaluates h at every row of `u` (shape (k, 2n), any nonzero length)."""

    @abstractmethod
    def support_gradients(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Returns (gradient of h at every row, mask of rows where it is ambiguous)."""

    def quadrature_frame(self) -> Optional[np.ndarray]:
        """An orthogonal F in which u -> h(F u) is smooth in Hopf coordinates, or None."""
        return None


@dataclass(frozen=True, eq=False)
class Ellipsoid(SupportBody):
    """E(a, b) = {sum x_i^2 / a_i^2 + y_i^2 / b_i^2 <= 1}, translated by `center`."""
    a: np.ndarray
    b: np.ndarray
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        a, b = _as_vector(self.a, "a"), _as_vector(self.b, "b")
        if a.shape != b.shape or a.size == 0:
            raise SpecError("Ellipsoid axes a and b must be non-empty and of equal length")
        if np.any(a <= 0) or np.any(b <= 0):
            raise SpecError("Ellipsoid axes must be strictly positive")
        center = np.zeros(2 * a.size) if self.center is None else _as_vector(self.center, "center")
        if center.shape != (2 * a.size,):
            raise SpecError(f"Ellipsoid center must have {2 * a.size} coordinates")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "center", center)

    @property
    def dim_n(self) -> int:
        return self.a.size

    @property
    def axes(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    def form(self) -> np.ndarray:
        """Returns the matrix A of the centered ellipsoid {x^T A x <= 1}."""
        return np.diag(1.0 / self.axes ** 2)

    def support_values(self, u):
        return u @ self.center + np.linalg.norm(u * self.axes, axis=1)

    def support_gradients(self, u):
        stretched = u * self.axes ** 2
        norm = np.linalg.norm(u * self.axes, axis=1, keepdims=True)
        return self.center + stretched / norm, np.zeros(u.shape[0], dtype=bool)


@dataclass(frozen=True, eq=False)
class Polydisk(SupportBody):
    """P(r): the product of disks of radii r_i in the complex coordinates."""
    r: np.ndarray

    def __post_init__(self):
        r = _as_vector(self.r, "r")
        if r.size == 0 or np.any(r <= 0):
            raise SpecError("Polydisk radii must be strictly positive")
        object.__setattr__(self, "r", r)

    @property
    def dim_n(self) -> int:
        return self.r.size

    def support_values(self, u):
        return component_norms(u, self.dim_n) @ self.r

    def support_gradients(self, u):
        unit, degenerate = _unit_components(u, self.dim_n)
        return unit * np.concatenate([self.r, self.r]), degenerate


@dataclass(frozen=True, eq=False)
class Polyannulus(SupportBody):
    """X_[a,b] = {a_i <= |z_i| <= b_i}; its convex hull is the polydisk P(b)."""
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a, b = _as_vector(self.a, "a"), _as_vector(self.b, "b")
        if a.shape != b.shape or a.size == 0:
            raise SpecError("Polyannulus radii a and b must be non-empty and of equal length")
        if np.any(a < 0) or np.any(a > b) or not np.any(b > 0):
            raise SpecError("Polyannulus radii must satisfy 0 <= a_i <= b_i with some b_i > 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim_n(self) -> int:
        return self.a.size

    def support_values(self, u):
        return component_norms(u, self.dim_n) @ self.b

    def support_gradients(self, u):
        unit, degenerate = _unit_components(u, self.dim_n)
        return unit * np.concatenate([self.b, self.b]), degenerate


@dataclass(frozen=True, eq=False)
class Union(SupportBody):
    """The union of member bodies; its support is the pointwise max."""
    members: Tuple[SupportBody, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise SpecError("A union needs at least one member")
        dims = {member.dim_n for member in members}
        if len(dims) != 1:
            raise SpecError(f"Union members disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "members", members)

    @property
    def dim_n(self) -> int:
        return self.members[0].dim_n

    def _toric_radii(self) -> Optional[np.ndarray]:
        if all(isinstance(member, (Polydisk, Polyannulus)) for member in self.members):
            return np.stack([m.r if isinstance(m, Polydisk) else m.b for m in self.members])
        return None

    def support_values(self, u):
        radii = self._toric_radii()
        if radii is not None:
            return max_over_radii(component_norms(u, self.dim_n), radii)
        return np.max(np.stack([member.support_values(u) for member in self.members]), axis=0)

    def support_gradients(self, u):
        values = np.stack([member.support_values(u) for member in self.members])
        order = np.argsort(-values, axis=0, kind="stable")
        rows = np.arange(u.shape[0])
        winner = order[0]
        ties = np.zeros(u.shape[0], dtype=bool)
        if len(self.members) > 1:
            ties = values[winner, rows] - values[order[1], rows] <= settings.TIE_TOL
        gradients = np.empty_like(u)
        ambiguous = ties.copy()
        for index, member in enumerate(self.members):
            chosen = winner == index
            if np.any(chosen):
                grad, bad = member.support_gradients(u[chosen])
                gradients[chosen] = grad
                ambiguous[chosen] |= bad
        return gradients, ambiguous


@dataclass(frozen=True, eq=False)
class LagrangianBidisk(SupportBody):
    """P_L = {x_1^2 + x_2^2 <= 1, y_1^2 + y_2^2 <= 1} in R^4."""

    @property
    def dim_n(self) -> int:
        return 2

    def quadrature_frame(self):
        # h(F u) = |u_1| + |u_2|, the support of P(1, 1).
        return lagrangian_swap()

    def support_values(self, u):
        return np.linalg.norm(u[:, :2], axis=1) + np.linalg.norm(u[:, 2:], axis=1)

    def support_gradients(self, u):
        nx = np.linalg.norm(u[:, :2], axis=1, keepdims=True)
        ny = np.linalg.norm(u[:, 2:], axis=1, keepdims=True)
        degenerate = (nx[:, 0] == 0.0) | (ny[:, 0] == 0.0)
        nx, ny = np.where(nx == 0.0, 1.0, nx), np.where(ny == 0.0, 1.0, ny)
        return np.concatenate([u[:, :2] / nx, u[:, 2:] / ny], axis=1), degenerate


@dataclass(frozen=True, eq=False)
class PointCloud(SupportBody):
    """A finite point set; its support is that of its convex hull."""
    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] % 2:
            raise SpecError("A point cloud needs a non-empty list of points of even dimension")
        if not np.all(np.isfinite(points)):
            raise SpecError("Point cloud coordinates must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def dim_n(self) -> int:
        return self.points.shape[1] // 2

    def support_values(self, u):
        return cloud_max(u, self.points)

    def support_gradients(self, u):
        _, arg, ties = cloud_max(u, self.points, with_arg=True)
        return self.points[arg], ties

    def extreme(self) -> "PointCloud":
        """Returns the sub-cloud of convex-hull vertices (Qhull)."""
        hull = ConvexHull(self.points)
        return PointCloud(self.points[np.sort(hull.vertices)])


@dataclass(frozen=True, eq=False)
class LinearImage(SupportBody):
    """T K for a 2n x 2n matrix T; h_{TK}(u) = h_K(T^T u)."""
    matrix: np.ndarray
    inner: SupportBody

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        size = 2 * self.inner.dim_n
        if matrix.shape != (size, size):
            raise SpecError(f"Linear image matrix must be {size}x{size}, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise SpecError("Linear image matrix must be finite")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim_n(self) -> int:
        return self.inner.dim_n

    def support_values(self, u):
        return self.inner.support_values(u @ self.matrix)

    def support_gradients(self, u):
        grad, ambiguous = self.inner.support_gradients(u @ self.matrix)
        return grad @ self.matrix.T, ambiguous


@dataclass(frozen=True, eq=False)
class Translated(SupportBody):
    """K + v; h_{K+v}(u) = h_K(u) + <v, u>."""
    inner: SupportBody
    offset: np.ndarray

    def __post_init__(self):
        offset = _as_vector(self.offset, "offset")
        if offset.shape != (2 * self.inner.dim_n,):
            raise SpecError(f"Translation needs {2 * self.inner.dim_n} coordinates")
        object.__setattr__(self, "offset", offset)

    @property
    def dim_n(self) -> int:
        return self.inner.dim_n

    def support_values(self, u):
        return self.inner.support_values(u) + u @ self.offset

    def support_gradients(self, u):
        grad, ambiguous = self.inner.support_gradients(u)
        return grad + self.offset, ambiguous


@dataclass(frozen=True, eq=False)
class ToricProfile:
    """A moment-map image Omega in the nonnegative orthant.

    Either a union of boxes [low_k, high_k] or, for n = 2, a monotone curve from
    the omega_2 axis to the omega_1 axis that closes Omega against both axes.
    Coordinates are moment coordinates pi |z_i|^2.
    """
    lows: Optional[np.ndarray] = None
    highs: Optional[np.ndarray] = None
    curve: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.curve is not None:
            curve = np.array(self.curve, dtype=float)
            if curve.ndim != 2 or curve.shape[1] != 2 or curve.shape[0] < 2:
                raise SpecError("A boundary curve needs at least two points in the plane")
            if not np.all(np.isfinite(curve)) or np.any(curve < 0):
                raise SpecError("A boundary curve must lie in the closed nonnegative quadrant")
            if curve[0, 0] > curve[-1, 0]:
                curve = curve[::-1].copy()
            if np.any(np.diff(curve[:, 0]) < 0) or np.any(np.diff(curve[:, 1]) > 0):
                raise SpecError("A boundary curve must be monotone from the omega_2 axis to the omega_1 axis")
            scale = curve.max()
            if curve[0, 0] > 1e-9 * scale or curve[-1, 1] > 1e-9 * scale:
                raise SpecError("Boundary curve endpoints must lie on the coordinate axes")
            curve.setflags(write=False)
            object.__setattr__(self, "curve", curve)
            return
        lows, highs = np.array(self.lows, dtype=float), np.array(self.highs, dtype=float)
        if highs.ndim != 2 or highs.shape[0] == 0 or lows.shape != highs.shape:
            raise SpecError("A box profile needs matching non-empty lists of lower and upper corners")
        if not (np.all(np.isfinite(highs)) and np.all(np.isfinite(lows))):
            raise SpecError("Toric profile is unbounded")
        if np.any(lows < 0) or np.any(lows > highs):
            raise SpecError("Profile boxes must satisfy 0 <= low <= high")
        lows.setflags(write=False)
        highs.setflags(write=False)
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)

    @classmethod
    def from_boxes(cls, lows: Sequence, highs: Sequence) -> "ToricProfile":
        return cls(lows=lows, highs=highs)

    @classmethod
    def from_curve(cls, points: Sequence) -> "ToricProfile":
        return cls(curve=points)

    @property
    def is_curve(self) -> bool:
        return self.curve is not None

    @property
    def dim_n(self) -> int:
        return 2 if self.is_curve else self.highs.shape[1]

    def extent(self) -> np.ndarray:
        """Largest moment coordinate along each axis."""
        points = self.curve if self.is_curve else self.highs
        return points.max(axis=0)

    def corner_radii(self) -> np.ndarray:
        """Polydisk radii of the corners whose polydisks generate the support.

        For boxes these are the upper corners; for a curve, its sample points.
        The induced support is exact for boxes and a lower bound for curves.
        """
        corners = self.curve if self.is_curve else self.highs
        return np.sqrt(corners / np.pi)

    def is_convex_curve(self) -> bool:
        """True if the sampled curve turns left everywhere (Omega's complement is convex)."""
        edges = np.diff(self.curve, axis=0)
        cross = edges[:-1, 0] * edges[1:, 1] - edges[:-1, 1] * edges[1:, 0]
        return bool(np.all(cross >= -1e-12 * self.curve.max() ** 2))

    def staircase_corners(self) -> np.ndarray:
        """Upper corners (omega_1 of the later sample, omega_2 of the earlier one) covering the curve."""
        return np.column_stack([self.curve[1:, 0], self.curve[:-1, 1]])

    def support_values(self, norms: np.ndarray) -> np.ndarray:
        """sup over the discretized Omega of sum sqrt(omega_i / pi) * norms_i."""
        return max_over_radii(norms, self.corner_radii())

    def outer_support_values(self, norms: np.ndarray) -> np.ndarray:
        """A guaranteed upper bound of the support of mu^{-1}(Omega).

        Boxes are exact. A curve whose samples turn left everywhere lies below its
        chords, so the region under the chord polygon covers Omega and its support
        is maximized segment by segment in closed form. Any other curve falls back
        to the staircase cover.
        """
        if not self.is_curve:
            return self.support_values(norms)
        if not self.is_convex_curve():
            return max_over_radii(norms, np.sqrt(self.staircase_corners() / np.pi))
        return _chord_support(norms, self.curve)

    def outer_support_radii(self, norms: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Like `outer_support_values`, also returning the maximizer's polydisk radii and a tie mask."""
        if self.is_curve and self.is_convex_curve():
            values, radii = _chord_support(norms, self.curve, with_arg=True)
            return values, radii, np.zeros(norms.shape[0], dtype=bool)
        corners = np.sqrt(self.staircase_corners() / np.pi) if self.is_curve else self.corner_radii()
        values, arg, ties = max_over_radii(norms, corners, with_arg=True)
        return values, corners[arg], ties

    def radial_extent(self, norms: np.ndarray) -> np.ndarray:
        """Scale rho with rho * u on the boundary of mu^{-1}(Omega), for unit u with these norms."""
        if not self.is_curve:
            radii = np.sqrt(self.highs / np.pi)
            with np.errstate(divide="ignore"):
                ratio = radii[None, :, :] / norms[:, None, :]
            return np.max(np.min(ratio, axis=2), axis=1)
        direction = norms ** 2
        angle = np.arctan2(direction[:, 1], direction[:, 0])
        vertices = self.curve
        vertex_angle = np.arctan2(vertices[:, 1], vertices[:, 0])
        # Vertex angles decrease from pi/2 to 0 along the curve.
        position = np.searchsorted(-vertex_angle, -angle, side="right")
        segment = np.clip(position - 1, 0, vertices.shape[0] - 2)
        start = vertices[segment]
        edge = vertices[segment + 1] - start
        numerator = start[:, 0] * edge[:, 1] - start[:, 1] * edge[:, 0]
        denominator = direction[:, 0] * edge[:, 1] - direction[:, 1] * edge[:, 0]
        scale = numerator / denominator
        return np.sqrt(scale / np.pi)


def _chord_support(norms: np.ndarray, curve: np.ndarray, with_arg: bool = False):
    """Maximizes sum t_i sqrt(omega_i / pi) over every chord of the curve.

    Along a chord omega = p + s (q - p) the objective is concave in s; squaring
    its stationarity condition leaves a linear equation for s. With `with_arg`
    the polydisk radii sqrt(omega / pi) of the maximizer come back as well.
    """
    _, first, inverse = np.unique(np.round(norms, 12), axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    t = norms[first]
    p = curve[:-1]
    d = np.diff(curve, axis=0)
    t1, t2 = t[:, 0:1] ** 2, t[:, 1:2] ** 2
    d1, d2 = d[None, :, 0], d[None, :, 1]
    p1, p2 = p[None, :, 0], p[None, :, 1]
    denominator = d1 * d2 * (t1 * d1 - t2 * d2)
    safe = np.where(denominator == 0.0, 1.0, denominator)
    s = np.where(denominator == 0.0, 0.0, (t2 * d2 ** 2 * p1 - t1 * d1 ** 2 * p2) / safe)
    fractions = np.stack([np.clip(s, 0.0, 1.0), np.zeros_like(s), np.ones_like(s)])

    w1 = np.maximum(p1 + fractions * d1, 0.0)
    w2 = np.maximum(p2 + fractions * d2, 0.0)
    values = t[:, 0:1] * np.sqrt(w1 / np.pi) + t[:, 1:2] * np.sqrt(w2 / np.pi)
    rows = np.arange(t.shape[0])
    flat = values.transpose(1, 0, 2).reshape(t.shape[0], -1)
    index = np.argmax(flat, axis=1)
    best = flat[rows, index]
    if not with_arg:
        return best[inverse]
    candidate, segment = np.divmod(index, d.shape[0])
    radii = np.sqrt(np.column_stack([w1[candidate, rows, segment], w2[candidate, rows, segment]]) / np.pi)
    return best[inverse], radii[inverse]


@dataclass(frozen=True, eq=False)
class ToricBody(SupportBody):
    """mu^{-1}(Omega) for a ToricProfile Omega.

    With `outer` set, a curve profile is evaluated through its guaranteed upper
    bound instead of the sampled points; box profiles are exact either way.
    """
    profile: ToricProfile
    outer: bool = False

    @property
    def dim_n(self) -> int:
        return self.profile.dim_n

    def support_values(self, u):
        norms = component_norms(u, self.dim_n)
        if self.outer:
            return self.profile.outer_support_values(norms)
        return self.profile.support_values(norms)

    def support_gradients(self, u):
        norms = component_norms(u, self.dim_n)
        if self.outer:
            _, chosen, ties = self.profile.outer_support_radii(norms)
        else:
            radii = self.profile.corner_radii()
            _, arg, ties = max_over_radii(norms, radii, with_arg=True)
            chosen = radii[arg]
        unit, degenerate = _unit_components(u, self.dim_n)
        return unit * np.concatenate([chosen, chosen], axis=1), ties | degenerate


def ball(n: int, radius: float = 1.0) -> Ellipsoid:
    """The round ball B^{2n} of the given radius."""
    return Ellipsoid(np.full(n, radius), np.full(n, radius))


def symplectic_ellipsoid(a: Sequence[float]) -> Ellipsoid:
    """The symplectic ellipsoid E(a) = E(a, a)."""
    return Ellipsoid(a, a)


def translate(body: SupportBody, offset: Sequence[float]) -> SupportBody:
    """Returns body + offset."""
    return Translated(body, offset)


def ellipsoid_profile(a: Sequence[float], samples: Optional[int] = None) -> ToricProfile:
    """Moment image of E(a_1, a_2): the simplex omega_1/(pi a_1^2) + omega_2/(pi a_2^2) <= 1, as a curve."""
    a1, a2 = (float(value) for value in a)
    samples = settings.CURVE_SAMPLES if samples is None else samples
    s = np.linspace(0.0, 1.0, samples)
    return ToricProfile.from_curve(np.column_stack([np.pi * a1 ** 2 * s, np.pi * a2 ** 2 * (1.0 - s)]))


def lagrangian_swap() -> np.ndarray:
    """The orthogonal swap x_2 <-> y_1 of R^4, which maps P_L onto P(1, 1)."""
    return np.eye(4)[[0, 2, 1, 3]]


def _directions(body: SupportBody, u) -> Tuple[np.ndarray, bool]:
    array = np.asarray(u, dtype=float)
    single = array.ndim == 1
    array = np.atleast_2d(array)
    if array.shape[1] != 2 * body.dim_n:
        raise SpecError(f"Direction has {array.shape[1]} coordinates, body lives in R^{2 * body.dim_n}")
    deviation = np.max(np.abs(np.linalg.norm(array, axis=1) - 1.0))
    if deviation > settings.UNIT_VECTOR_TOL:
        raise SpecError(f"Support directions must be unit vectors (off by {deviation:.3e})")
    return array, single


def support(body: SupportBody, u):
    """Evaluates the support function at one unit vector or a batch of them.

    Args:
        body: The body.
        u: A unit vector of length 2n or an array of shape (k, 2n).

    Returns:
        A float for a single vector, otherwise an array of shape (k,).

    Raises:
        SpecError: If a direction is not a unit vector or has the wrong length.
    """
    array, single = _directions(body, u)
    values = body.support_values(array)
    return float(values[0]) if single else values


def support_gradient(body: SupportBody, u) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (gradient of h, ambiguity mask) at a batch of unit vectors."""
    array, _ = _directions(body, u)
    return body.support_gradients(array)


def _check_rule(body: SupportBody, rule: QuadratureRule):
    if body.dim_n != rule.dim_n:
        raise SpecError(f"Body lives in R^{2 * body.dim_n} but the rule in R^{2 * rule.dim_n}")


def mean_width(body: SupportBody, rule: QuadratureRule) -> float:
    """M(K) = integral of h(u) + h(-u) against the rule's measure.

    Bodies with a quadrature frame F are integrated as u -> h(F u); the measure
    is rotation invariant, so the value is unchanged while the integrand becomes
    smooth in the rule's coordinates.

    Raises:
        SpecError: If body and rule disagree on dimension.
        EvaluationError: If the support is not finite at some node.
    """
    _check_rule(body, rule)
    frame = body.quadrature_frame()
    if frame is None:
        return integrate(rule, lambda u: body.support_values(u) + body.support_values(-u))

    def framed(u):
        turned = u @ frame.T
        return body.support_values(turned) + body.support_values(-turned)

    return integrate(rule, framed)


def hausdorff_estimate(b1: SupportBody, b2: SupportBody, rule: QuadratureRule) -> float:
    """Max over rule nodes of |h_1 - h_2|, a lower bound of the Hausdorff distance."""
    _check_rule(b1, rule)
    _check_rule(b2, rule)
    return float(np.max(np.abs(b1.support_values(rule.nodes) - b2.support_values(rule.nodes))))


def toric_box_approx(profile: ToricProfile, depth: int) -> Union:
    """Outer polyannulus-union cover of Omega on the dyadic grid of step extent / 2^depth.

    Boxes expand to the grid cells they touch; a curve profile gets one column of
    cells per grid step whose height is the curve's value at the column's left
    edge rounded up to the grid. Covers are nested as the depth grows.

    Raises:
        SpecError: If depth < 1 or the profile is degenerate.
    """
    if depth < 1:
        raise SpecError(f"Box approximation depth must be >= 1, got {depth}")
    extent = profile.extent()
    if not np.all(extent > 0):
        raise SpecError("Toric profile must have positive extent along every axis")
    step = extent / 2 ** depth
    if profile.is_curve:
        curve = profile.curve
        left = np.arange(2 ** depth) * step[0]
        index = np.searchsorted(curve[:, 0], left, side="right") - 1
        heights = np.ceil(curve[np.clip(index, 0, None), 1] / step[1]) * step[1]
        keep = heights > 0
        lows = np.column_stack([left, np.zeros_like(left)])[keep]
        highs = np.column_stack([left + step[0], heights])[keep]
    else:
        lows = np.floor(profile.lows / step) * step
        highs = np.ceil(profile.highs / step) * step
    members = tuple(Polyannulus(np.sqrt(low / np.pi), np.sqrt(high / np.pi)) for low, high in zip(lows, highs))
    return Union(members)


def normalized_volume(body: SupportBody) -> float:
    """(Vol(K) / Vol(B^{2n}))^{1/n} for bodies with a closed-form volume.

    Raises:
        SpecError: For bodies without a closed-form volume.
    """
    n = body.dim_n
    if isinstance(body, Ellipsoid):
        return float(np.prod(body.a * body.b) ** (1.0 / n))
    if isinstance(body, Polydisk):
        return float((factorial(n) * np.prod(body.r ** 2)) ** (1.0 / n))
    if isinstance(body, Translated):
        return normalized_volume(body.inner)
    if isinstance(body, LinearImage):
        return float(abs(np.linalg.det(body.matrix)) ** (1.0 / n) * normalized_volume(body.inner))
    raise SpecError(f"No closed-form volume for {type(body).__name__}")


def urysohn_gap(body: SupportBody, rule: QuadratureRule) -> float:
    """(M / 2)^2 minus the normalized volume; nonnegative by Urysohn's inequality."""
    return (mean_width(body, rule) / 2.0) ** 2 - normalized_volume(body)


def radial_extent(body: SupportBody, u: np.ndarray) -> np.ndarray:
    """Distance rho(u) from the body's center to its boundary along unit directions u.

    Raises:
        SpecError: For bodies without a boundary parametrization.
    """
    n = body.dim_n
    if isinstance(body, Ellipsoid):
        return 1.0 / np.linalg.norm(u / body.axes, axis=1)
    if isinstance(body, Polydisk):
        with np.errstate(divide="ignore"):
            return np.min(body.r / component_norms(u, n), axis=1)
    if isinstance(body, ToricBody):
        return body.profile.radial_extent(component_norms(u, n))
    raise SpecError(f"{type(body).__name__} has no boundary parametrization")


def body_center(body: SupportBody) -> np.ndarray:
    """The point the boundary parametrization is centered at."""
    if isinstance(body, Ellipsoid):
        return body.center
    return np.zeros(2 * body.dim_n)
