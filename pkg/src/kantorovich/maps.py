"""Normalized positive linear maps.

Five structured families are provided. Each is an immutable dataclass with
an ``apply`` method; :func:`apply_map` dispatches on them uniformly.

* :class:`KrausMap` -- ``A ↦ Σ K_i* A K_i``, with ``K_i`` of shape
  ``(dim_in, dim_out)`` and ``Σ K_i* K_i = I_out``.
* :class:`PinchingMap` -- ``A ↦ Σ P_j A P_j`` for a resolution of identity.
* :class:`CompressionMap` -- ``A ↦ V* A V`` for an isometry ``V``.
* :class:`NormalizedTraceMap` -- ``A ↦ tr(A)/n`` as a ``1 x 1`` matrix.
* :class:`UnitaryMixtureMap` -- ``A ↦ Σ w_i U_i* A U_i``.

Every family is completely positive by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .hermitian import apply_function, hermitian, identity, is_unitary, loewner_leq, resymmetrize, spectral_norm
from .scalar import ScalarFunction, POSITIVE_REALS

UNITALITY_TOL = 1e-10
WEIGHT_TOL = 1e-12
MAX_RETRIES = 8


class InvalidMapError(ValueError):
    """A map specification violates its defining invariants."""


def _frozen(X) -> np.ndarray:
    X = np.array(X, dtype=np.complex128)
    X.flags.writeable = False
    return X


def _check_input(A, dim_in: int) -> np.ndarray:
    A = hermitian(A)
    if A.shape[0] != dim_in:
        raise ValueError(f"map expects a {dim_in}x{dim_in} input, got {A.shape}")
    return A


@dataclass(frozen=True, eq=False)
class KrausMap:
    operators: tuple[np.ndarray, ...]
    validate: bool = True

    variant = "kraus"

    def __post_init__(self):
        ops = tuple(_frozen(K) for K in self.operators)
        if not ops:
            raise InvalidMapError("at least one Kraus operator is required")
        shape = ops[0].shape
        if any(K.ndim != 2 or K.shape != shape for K in ops):
            raise InvalidMapError("Kraus operators must be 2-d and share one shape")
        object.__setattr__(self, "operators", ops)
        if self.validate:
            residual = spectral_norm(sum(K.conj().T @ K for K in ops) - np.eye(shape[1]))
            if residual > UNITALITY_TOL:
                raise InvalidMapError(f"Σ K_i* K_i deviates from identity by {residual:.3e}")

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[0]

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[1]

    def apply(self, A: np.ndarray) -> np.ndarray:
        return resymmetrize(sum(K.conj().T @ A @ K for K in self.operators))


@dataclass(frozen=True, eq=False)
class PinchingMap:
    projections: tuple[np.ndarray, ...]

    variant = "pinching"

    def __post_init__(self):
        ps = tuple(_frozen(P) for P in self.projections)
        if not ps:
            raise InvalidMapError("at least one projection is required")
        n = ps[0].shape[0]
        for i, P in enumerate(ps):
            if P.shape != (n, n):
                raise InvalidMapError("projections must be square and of equal size")
            if np.max(np.abs(P @ P - P)) > UNITALITY_TOL or np.max(np.abs(P - P.conj().T)) > UNITALITY_TOL:
                raise InvalidMapError(f"projection {i} is not an orthogonal projection")
            for Q in ps[i + 1:]:
                if np.max(np.abs(P @ Q)) > UNITALITY_TOL:
                    raise InvalidMapError("projections are not mutually orthogonal")
        if np.max(np.abs(sum(ps) - np.eye(n))) > UNITALITY_TOL:
            raise InvalidMapError("projections do not sum to the identity")
        object.__setattr__(self, "projections", ps)

    @classmethod
    def from_blocks(cls, sizes, basis=None) -> PinchingMap:
        """Pinching onto consecutive column blocks of ``basis`` (default: standard basis)."""
        n = int(sum(sizes))
        basis = np.eye(n, dtype=np.complex128) if basis is None else np.asarray(basis)
        projections, start = [], 0
        for size in sizes:
            V = basis[:, start:start + size]
            projections.append(V @ V.conj().T)
            start += size
        return cls(tuple(projections))

    @property
    def dim_in(self) -> int:
        return self.projections[0].shape[0]

    dim_out = dim_in

    def apply(self, A: np.ndarray) -> np.ndarray:
        return resymmetrize(sum(P @ A @ P for P in self.projections))


@dataclass(frozen=True, eq=False)
class CompressionMap:
    isometry: np.ndarray

    variant = "compression"

    def __post_init__(self):
        V = _frozen(self.isometry)
        if V.ndim != 2 or V.shape[1] > V.shape[0]:
            raise InvalidMapError(f"isometry must be n x k with k <= n, got {V.shape}")
        residual = float(np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1]))))
        if residual > UNITALITY_TOL:
            raise InvalidMapError(f"V*V deviates from identity by {residual:.3e}")
        object.__setattr__(self, "isometry", V)

    @property
    def dim_in(self) -> int:
        return self.isometry.shape[0]

    @property
    def dim_out(self) -> int:
        return self.isometry.shape[1]

    def apply(self, A: np.ndarray) -> np.ndarray:
        V = self.isometry
        return resymmetrize(V.conj().T @ A @ V)


@dataclass(frozen=True)
class NormalizedTraceMap:
    dim: int

    variant = "normalized_trace"

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidMapError("dimension must be positive")

    @property
    def dim_in(self) -> int:
        return self.dim

    dim_out = 1

    def apply(self, A: np.ndarray) -> np.ndarray:
        return np.array([[np.trace(A).real / self.dim]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class UnitaryMixtureMap:
    weights: tuple[float, ...]
    unitaries: tuple[np.ndarray, ...]

    variant = "unitary_mixture"

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        us = tuple(_frozen(U) for U in self.unitaries)
        if not us or len(weights) != len(us):
            raise InvalidMapError("need one weight per unitary")
        if min(weights) < 0 or abs(sum(weights) - 1.0) > WEIGHT_TOL:
            raise InvalidMapError("weights must be nonnegative and sum to 1")
        n = us[0].shape[0]
        for U in us:
            if U.shape != (n, n) or not is_unitary(U, UNITALITY_TOL):
                raise InvalidMapError("mixture components must be unitary and of equal size")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "unitaries", us)

    @property
    def dim_in(self) -> int:
        return self.unitaries[0].shape[0]

    dim_out = dim_in

    def apply(self, A: np.ndarray) -> np.ndarray:
        return resymmetrize(sum(w * (U.conj().T @ A @ U) for w, U in zip(self.weights, self.unitaries)))


MapSpec = Union[KrausMap, PinchingMap, CompressionMap, NormalizedTraceMap, UnitaryMixtureMap]


@dataclass(frozen=True)
class MapValidationReport:
    unitality_residual: float
    positivity_failures: int
    samples: int

    @property
    def valid(self) -> bool:
        return self.unitality_residual <= 1e-9 and self.positivity_failures == 0


def apply_map(spec: MapSpec, A) -> np.ndarray:
    """Apply ``spec`` to a Hermitian ``A`` of matching input dimension."""
    return spec.apply(_check_input(A, spec.dim_in))


def to_kraus(spec: MapSpec) -> KrausMap:
    """Express any structured map in Kraus form."""
    if isinstance(spec, KrausMap):
        return spec
    if isinstance(spec, PinchingMap):
        ops = spec.projections
    elif isinstance(spec, CompressionMap):
        ops = (spec.isometry,)
    elif isinstance(spec, NormalizedTraceMap):
        n = spec.dim
        ops = tuple(np.eye(n, 1, -i) / np.sqrt(n) for i in range(n))
    else:
        ops = tuple(np.sqrt(w) * U for w, U in zip(spec.weights, spec.unitaries))
    return KrausMap(ops)


def validate_map(spec: MapSpec, trials: int = 100, seed: int = 0) -> MapValidationReport:
    """Measure unitality and sample positivity of a map.

    Unlike the constructors, this never raises on an invalid map: it reports
    ``||Φ(I) - I||`` and how many of ``trials`` random PSD inputs were sent
    outside the PSD cone.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = spec.dim_in
    image = spec.apply(identity(n))
    residual = spectral_norm(image - identity(image.shape[0]))
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        rank = int(rng.integers(1, n + 1))
        G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
        out = spec.apply(resymmetrize(G @ G.conj().T))
        if not loewner_leq(np.zeros_like(out), out).holds:
            failures += 1
    return MapValidationReport(residual, failures, trials)


_INV_SQRT = ScalarFunction("inv-sqrt", lambda t: 1.0 / np.sqrt(t), POSITIVE_REALS)


def random_unital_map(dim_in: int, dim_out: int, n_kraus: int, seed=None) -> KrausMap:
    """Random unital Kraus map from complex Gaussian draws.

    ``G_i`` are ``dim_in x dim_out`` Ginibre matrices and
    ``K_i = G_i S^(-1/2)`` with ``S = Σ G_i* G_i``. A singular ``S`` is
    redrawn up to eight times.
    """
    if n_kraus < 1 or dim_in < 1 or dim_out < 1:
        raise ValueError("dimensions and n_kraus must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RETRIES):
        G = rng.standard_normal((n_kraus, dim_in, dim_out)) + 1j * rng.standard_normal((n_kraus, dim_in, dim_out))
        S = resymmetrize(sum(g.conj().T @ g for g in G))
        lam = np.linalg.eigvalsh(S)
        if lam[0] <= 1e-12 * lam[-1]:
            continue
        root = apply_function(S, _INV_SQRT)
        return KrausMap(tuple(g @ root for g in G))
    raise np.linalg.LinAlgError(
        f"Σ G_i* G_i stayed singular after {MAX_RETRIES} draws "
        f"(dim_in={dim_in}, dim_out={dim_out}, n_kraus={n_kraus})"
    )


def _encode(X) -> list:
    X = np.asarray(X, dtype=np.complex128)
    return np.stack([X.real, X.imag], axis=-1).tolist()


def _decode(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def map_to_json(spec: MapSpec) -> dict:
    """Serialise a map to a JSON-ready dict; complex entries become ``[re, im]``."""
    out = {"variant": spec.variant}
    if isinstance(spec, KrausMap):
        out["kraus"] = [_encode(K) for K in spec.operators]
    elif isinstance(spec, PinchingMap):
        out["projections"] = [_encode(P) for P in spec.projections]
    elif isinstance(spec, CompressionMap):
        out["isometry"] = _encode(spec.isometry)
    elif isinstance(spec, NormalizedTraceMap):
        out["dim"] = spec.dim
    else:
        out["weights"] = list(spec.weights)
        out["unitaries"] = [_encode(U) for U in spec.unitaries]
    return out


def map_from_json(data: dict) -> MapSpec:
    variant = data["variant"]
    if variant == "kraus":
        return KrausMap(tuple(_decode(K) for K in data["kraus"]))
    if variant == "pinching":
        return PinchingMap(tuple(_decode(P) for P in data["projections"]))
    if variant == "compression":
        return CompressionMap(_decode(data["isometry"]))
    if variant == "normalized_trace":
        return NormalizedTraceMap(int(data["dim"]))
    if variant == "unitary_mixture":
        return UnitaryMixtureMap(tuple(data["weights"]), tuple(_decode(U) for U in data["unitaries"]))
    raise InvalidMapError(f"unknown map variant {variant!r}")
