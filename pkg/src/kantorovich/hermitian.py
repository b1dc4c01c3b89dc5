"""Dense Hermitian matrix arithmetic.

Spectral decomposition, functional calculus, Loewner-order comparison and
operator norms for finite-dimensional self-adjoint matrices. Matrices are
plain ``numpy`` arrays; every public entry point validates and promotes its
input to ``complex128`` so real input is just a special case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from .scalar import ScalarFunction

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-10

# relative Hermiticity tolerance: |H - H*| <= HERMITIAN_TOL * (1 + max|H_ij|)
HERMITIAN_TOL = 1e-12


class NotHermitianError(ValueError):
    """Raised when a matrix is not self-adjoint within tolerance."""

    def __init__(self, asymmetry: float, bound: float):
        self.asymmetry = asymmetry
        self.bound = bound
        super().__init__(
            f"matrix is not Hermitian: max |H - H*| = {asymmetry:.3e} exceeds {bound:.3e}"
        )


class DomainError(ValueError):
    """A scalar function was evaluated outside its domain."""


class SpectrumError(ValueError):
    """A spectrum does not lie inside the stated bracket [m, M]."""


@dataclass(frozen=True)
class SpectrumBounds:
    """The bracket ``0 < m < M`` for the spectrum of a positive operator."""

    m: float
    M: float

    def __post_init__(self):
        m, M = float(self.m), float(self.M)
        if not (np.isfinite(m) and np.isfinite(M)):
            raise ValueError(f"bounds must be finite, got m={m}, M={M}")
        if not 0 < m < M:
            raise ValueError(f"bounds must satisfy 0 < m < M, got m={m}, M={M}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "M", M)

    @property
    def width(self) -> float:
        return self.M - self.m

    def as_tuple(self) -> tuple[float, float]:
        return self.m, self.M


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return resymmetrize((U * self.eigenvalues) @ U.conj().T)


@dataclass(frozen=True)
class LoewnerVerdict:
    """Outcome of testing ``A <= B`` in the Loewner order.

    ``gap`` is the smallest eigenvalue of ``B - A``; the relation is
    accepted when ``gap >= -tolerance``.
    """

    holds: bool
    gap: float
    scale: float
    tolerance: float


def hermitian(H, *, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``H`` as a square Hermitian matrix and return a complex copy.

    Scalars and 1-d inputs of length one are promoted to ``1 x 1`` matrices.

    Raises:
        ValueError: if ``H`` is not square.
        NotHermitianError: if ``H`` differs from its adjoint by more than
            ``tol * (1 + max|H_ij|)``.
    """
    H = np.array(H, dtype=np.complex128)
    if H.ndim == 0:
        H = H.reshape(1, 1)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    asym = float(np.max(np.abs(H - H.conj().T)))
    bound = tol * (1.0 + float(np.max(np.abs(H))))
    if asym > bound:
        raise NotHermitianError(asym, bound)
    return H


def resymmetrize(X: np.ndarray) -> np.ndarray:
    """Return the Hermitian part ``(X + X*) / 2``."""
    return 0.5 * (X + X.conj().T)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def spectral_decompose(H) -> SpectralDecomposition:
    """Eigendecomposition ``H = U diag(lam) U*`` with ascending ``lam``."""
    H = hermitian(H)
    lam, U = np.linalg.eigh(H)
    return SpectralDecomposition(lam, U)


def eigenvalues(H) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    return np.linalg.eigvalsh(hermitian(H))


def apply_scalar(H, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Functional calculus with a bare vectorised callable, no domain check."""
    lam, U = spectral_decompose(H)
    values = np.asarray(func(lam), dtype=np.complex128)
    if values.shape != lam.shape:
        values = np.broadcast_to(values, lam.shape)
    return resymmetrize((U * values) @ U.conj().T)


def apply_function(H, f: ScalarFunction) -> np.ndarray:
    """Evaluate ``f(H) = U diag(f(lam)) U*``.

    Raises:
        DomainError: if an eigenvalue of ``H`` lies outside ``f.domain``.
    """
    lam, U = spectral_decompose(H)
    for x in lam:
        if not f.domain.contains(x):
            raise DomainError(
                f"eigenvalue {x!r} lies outside the domain {f.domain} of {f.name}"
            )
    values = np.asarray(f(lam), dtype=np.complex128)
    return resymmetrize((U * values) @ U.conj().T)


def operator_norm(H) -> float:
    """Spectral norm of a Hermitian matrix, ``max |lam_i|``."""
    lam = eigenvalues(H)
    return float(max(abs(lam[0]), abs(lam[-1])))


def spectral_norm(X) -> float:
    """Largest singular value of an arbitrary (possibly non-normal) matrix."""
    X = np.asarray(X, dtype=np.complex128)
    return float(np.linalg.svd(X, compute_uv=False)[0])


def loewner_leq(A, B, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> LoewnerVerdict:
    """Test ``A <= B`` in the Loewner order.

    The tolerance is ``atol + rtol * scale`` with
    ``scale = max(1, ||A||, ||B||)``.
    """
    A = hermitian(A)
    B = hermitian(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    scale = max(1.0, operator_norm(A), operator_norm(B))
    gap = float(np.linalg.eigvalsh(resymmetrize(B - A))[0])
    tolerance = atol + rtol * scale
    return LoewnerVerdict(holds=gap >= -tolerance, gap=gap, scale=scale, tolerance=tolerance)


def check_spectrum_in(H, bounds: SpectrumBounds, tol: float = 1e-12) -> np.ndarray:
    """Return the eigenvalues of ``H`` after checking they lie in ``[m, M]``.

    ``tol`` is relative to ``max(1, M)``.
    """
    lam = eigenvalues(H)
    slack = tol * max(1.0, bounds.M)
    if lam[0] < bounds.m - slack or lam[-1] > bounds.M + slack:
        raise SpectrumError(
            f"spectrum [{lam[0]!r}, {lam[-1]!r}] is not inside [{bounds.m!r}, {bounds.M!r}]"
        )
    return lam


def chord_operator(A, bounds: SpectrumBounds, f: ScalarFunction) -> np.ndarray:
    """Geometric chord of ``f`` lifted to ``A``.

    Computes ``f(m)^((M - A)/(M - m)) f(M)^((A - m)/(M - m))``, the
    log-linear interpolant of ``f`` between the bracket endpoints applied to
    ``A`` through the functional calculus.

    Raises:
        DomainError: if ``f(m)`` or ``f(M)`` is not strictly positive.
        SpectrumError: if the spectrum of ``A`` leaves ``[m, M]``.
    """
    A = hermitian(A)
    check_spectrum_in(A, bounds)
    m, M = bounds.as_tuple()
    fm, fM = float(f(m)), float(f(M))
    if not (fm > 0 and fM > 0):
        raise DomainError(f"{f.name} must be positive at m and M, got f(m)={fm}, f(M)={fM}")

    def chord(t):
        # exponents (1, 0) at t = m and (0, 1) at t = M, so the endpoints are exact
        return fm ** ((M - t) / (M - m)) * fM ** ((t - m) / (M - m))

    return apply_scalar(A, chord)


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)
