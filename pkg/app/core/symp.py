"""Symplectic linear algebra on R^{2n} with J = [[0, I], [-I, 0]].

With this J the Hamiltonian field of H is J grad H = (dH/dy, -dH/dx), so
H = x_1 y_1 generates the path diag(e^t, e^-t) in the (x_1, y_1) plane.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, expm, polar

from app.config import settings
from app.exceptions import SpecError, SymplecticError

logger = logging.getLogger(__name__)


def symplectic_form(n: int) -> np.ndarray:
    """The standard 2n x 2n skew form J = [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _half_dimension(matrix: np.ndarray) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
        raise SpecError(f"Expected a square matrix of even size, got shape {matrix.shape}")
    return matrix.shape[0] // 2


def symplectic_defect(matrix) -> float:
    """max |M^T J M - J| over all entries."""
    matrix = np.asarray(matrix, dtype=float)
    J = symplectic_form(_half_dimension(matrix))
    return float(np.max(np.abs(matrix.T @ J @ matrix - J)))


def is_symplectic(matrix, tol: Optional[float] = None) -> bool:
    """True iff max |M^T J M - J| <= tol.

    Raises:
        SpecError: If the matrix is not square of even size.
    """
    tol = settings.SYMPLECTIC_CHECK_TOL if tol is None else tol
    return symplectic_defect(matrix) <= tol


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """A validated element of Sp(2n).

    The defect tolerance is scaled by max(1, |P|_max^2) so that well-conditioned
    products of large symplectic matrices still validate.
    """
    entries: np.ndarray
    tol: Optional[float] = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        _half_dimension(entries)
        tol = settings.SYMPLECTIC_CHECK_TOL if self.tol is None else self.tol
        scale = max(1.0, float(np.max(np.abs(entries))) ** 2)
        defect = symplectic_defect(entries)
        if defect > tol * scale:
            raise SymplecticError(f"Matrix is not symplectic: defect {defect:.3e} exceeds {tol * scale:.3e}")
        determinant = np.linalg.det(entries)
        if abs(determinant - 1.0) > 1e-8 * scale:
            raise SymplecticError(f"Symplectic matrix has determinant {determinant!r}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "tol", tol)

    @property
    def dim_n(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def T(self) -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries.T, self.tol)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries @ other.entries, max(self.tol, other.tol))


def _check_symmetric(matrix: np.ndarray, name: str, tol: float) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(matrix - matrix.T)) > tol * scale:
        raise SpecError(f"{name} must be symmetric")
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True, eq=False)
class SymHamiltonianParam:
    """A symmetric element X = [[C, D], [D, -C]] of sp(2n).

    The chart coordinates are the upper triangles of C then D, n(n+1) numbers.
    """
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.array(self.C, dtype=float))
        D = np.atleast_2d(np.array(self.D, dtype=float))
        if C.shape != D.shape or C.shape[0] != C.shape[1]:
            raise SpecError("C and D must be square matrices of equal size")
        C = _check_symmetric(C, "C", settings.SYMPLECTIC_BUILD_TOL)
        D = _check_symmetric(D, "D", settings.SYMPLECTIC_BUILD_TOL)
        C.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def dim_n(self) -> int:
        return self.C.shape[0]

    def matrix(self) -> np.ndarray:
        return np.block([[self.C, self.D], [self.D, -self.C]])

    def norm(self) -> float:
        """Frobenius norm of X."""
        return float(np.linalg.norm(self.matrix()))

    def to_vector(self) -> np.ndarray:
        upper = np.triu_indices(self.dim_n)
        return np.concatenate([self.C[upper], self.D[upper]])

    @staticmethod
    def dimension(n: int) -> int:
        return n * (n + 1)

    @classmethod
    def from_vector(cls, n: int, vector: Sequence[float]) -> "SymHamiltonianParam":
        vector = np.asarray(vector, dtype=float)
        half = n * (n + 1) // 2
        if vector.shape != (2 * half,):
            raise SpecError(f"Expected {2 * half} chart coordinates for n={n}, got {vector.shape}")
        upper = np.triu_indices(n)
        blocks = []
        for part in (vector[:half], vector[half:]):
            block = np.zeros((n, n))
            block[upper] = part
            blocks.append(block + np.triu(block, 1).T)
        return cls(*blocks)

    @classmethod
    def zero(cls, n: int) -> "SymHamiltonianParam":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def basis(cls, n: int) -> List["SymHamiltonianParam"]:
        """Unit chart vectors; off-diagonal entries appear symmetrically in C or D."""
        size = cls.dimension(n)
        return [cls.from_vector(n, np.eye(size)[k]) for k in range(size)]


def exp_param(X: SymHamiltonianParam) -> SymplecticMatrix:
    """exp(X) for symmetric X in sp(2n): symmetric, positive definite and symplectic.

    Uses scipy's scaling-and-squaring Pade exponential and symmetrizes the result.
    """
    S = expm(X.matrix())
    return SymplecticMatrix(0.5 * (S + S.T), settings.SYMPLECTIC_BUILD_TOL)


def polar_decompose(P: SymplecticMatrix) -> Tuple[SymplecticMatrix, SymplecticMatrix]:
    """P = Q S with Q orthogonal symplectic and S symmetric positive definite symplectic."""
    Q, S = polar(P.entries, side="right")
    return SymplecticMatrix(Q, P.tol), SymplecticMatrix(0.5 * (S + S.T), P.tol)


def _orient(columns: np.ndarray) -> np.ndarray:
    """Flips column signs so that each column's largest entry is positive."""
    pivots = columns[np.argmax(np.abs(columns), axis=0), np.arange(columns.shape[1])]
    return columns * np.where(pivots < 0, -1.0, 1.0)


def euler_decompose(S: SymplecticMatrix) -> Tuple[SymplecticMatrix, np.ndarray]:
    """S = Q diag(L, 1/L) Q^T with Q unitary-symplectic and L >= 1.

    Eigenvectors of S with eigenvalue L > 1 give the first n columns e_j of Q and
    the remaining columns are -J e_j, which are eigenvectors for 1/L. The
    eigenvalue-1 space is J-invariant and is split into pairs (w, J w) by a
    symplectic Gram-Schmidt sweep.

    Returns:
        A tuple (Q, L) with L sorted in decreasing order.

    Raises:
        SpecError: If S is not symmetric positive definite.
        SymplecticError: If the spectrum does not pair up.
    """
    entries = _check_symmetric(S.entries, "S", settings.SYMPLECTIC_CHECK_TOL)
    n = S.dim_n
    J = symplectic_form(n)
    values, vectors = eigh(entries)
    if values[0] <= 0:
        raise SpecError("Euler decomposition needs a positive definite matrix")

    logs = np.log(values)
    neutral_tol = settings.SYMPLECTIC_BUILD_TOL
    expanding = np.flatnonzero(logs > neutral_tol)[::-1]
    contracting = np.flatnonzero(logs < -neutral_tol)
    neutral = np.flatnonzero(np.abs(logs) <= neutral_tol)
    if expanding.size != contracting.size or neutral.size % 2:
        raise SymplecticError(f"Spectrum of S does not come in reciprocal pairs: {values}")

    columns = [vectors[:, index] for index in expanding]
    stretches = [values[index] for index in expanding]
    basis = vectors[:, neutral]
    while basis.shape[1]:
        w = basis[:, 0] / np.linalg.norm(basis[:, 0])
        jw = J @ w
        columns.append(w)
        stretches.append(1.0)
        rest = basis[:, 1:]
        rest = rest - np.outer(w, w @ rest) - np.outer(jw, jw @ rest)
        if rest.shape[1] == 0:
            break
        left, singular, _ = np.linalg.svd(rest, full_matrices=False)
        basis = left[:, singular > 0.5]

    first = _orient(np.column_stack(columns))
    Q = np.hstack([first, -J @ first])
    return SymplecticMatrix(Q, settings.SYMPLECTIC_CHECK_TOL), np.array(stretches)


def euler_path(Q: SymplecticMatrix, stretches: Sequence[float], s: float) -> np.ndarray:
    """S(s) = Q diag(L^s, L^-s) Q^T, the geodesic through the identity."""
    stretches = np.asarray(stretches, dtype=float)
    scale = np.concatenate([stretches ** s, stretches ** (-s)])
    return (Q.entries * scale) @ Q.entries.T


def williamson(form) -> Tuple[np.ndarray, SymplecticMatrix]:
    """Williamson normal form of the ellipsoid {x^T A x <= 1}.

    With K = A^{-1/2} J A^{-1/2} (antisymmetric), the Hermitian matrix iK has
    eigenvalues +-mu_j. The positive eigenvectors v_j = a_j + i b_j assemble the
    orthogonal O = sqrt(2) [b | a] with O^T K O = [[0, diag(mu)], [-diag(mu), 0]],
    and P0 = diag(mu, mu)^{1/2} O^T A^{1/2} is symplectic with
    P0^{-T} A P0^{-1} = diag(1/mu, 1/mu). So P0 maps the ellipsoid onto the
    symplectic ellipsoid with radii lambda_j = sqrt(mu_j).

    Args:
        form: Symmetric positive definite 2n x 2n matrix A.

    Returns:
        A tuple (lambda ascending, P0).

    Raises:
        SpecError: If the form is not symmetric positive definite.
    """
    A = np.array(form, dtype=float)
    n = _half_dimension(A)
    A = _check_symmetric(A, "Quadratic form", settings.SYMPLECTIC_CHECK_TOL)
    w, V = eigh(A)
    if w[0] <= 0:
        raise SpecError("Quadratic form is not positive definite")
    inv_half = (V / np.sqrt(w)) @ V.T
    half = (V * np.sqrt(w)) @ V.T
    K = inv_half @ symplectic_form(n) @ inv_half
    mu, vectors = eigh(1j * K)
    mu, positive = mu[n:], vectors[:, n:]
    O = np.sqrt(2.0) * np.hstack([positive.imag, positive.real])
    d = np.concatenate([1.0 / mu, 1.0 / mu])
    P0 = (O.T @ half) / np.sqrt(d)[:, None]
    lam = np.sqrt(mu)
    return lam, SymplecticMatrix(P0, settings.SYMPLECTIC_CHECK_TOL)


def symplectic_eigenvalues(form) -> np.ndarray:
    """The Williamson invariants lambda_1 <= ... <= lambda_n of an ellipsoid form."""
    return williamson(form)[0]


def williamson_residual(form, lam: np.ndarray, P0: SymplecticMatrix) -> float:
    """max |P0^{-T} A P0^{-1} - diag(1/lambda^2, 1/lambda^2)|."""
    inverse = np.linalg.inv(P0.entries)
    normal = inverse.T @ np.asarray(form, dtype=float) @ inverse
    target = np.diag(np.concatenate([lam ** -2.0, lam ** -2.0]))
    return float(np.max(np.abs(normal - target)))


def unitary_symplectic(U) -> SymplecticMatrix:
    """Realification [[Re U, -Im U], [Im U, Re U]] of a unitary n x n matrix."""
    U = np.asarray(U, dtype=complex)
    return SymplecticMatrix(np.block([[U.real, -U.imag], [U.imag, U.real]]))


def random_unitary_symplectic(n: int, rng: np.random.Generator) -> SymplecticMatrix:
    """A random element of U(n) inside Sp(2n), from the QR factor of a complex Gaussian."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    return unitary_symplectic(Q * phases)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> SymplecticMatrix:
    """exp(J B) for a random symmetric B, a generic element of Sp(2n)."""
    B = rng.standard_normal((2 * n, 2 * n)) * scale
    return SymplecticMatrix(expm(symplectic_form(n) @ (0.5 * (B + B.T))))
