"""Seeded generation of matrices, maps and edge-case instances.

Everything here is a pure function of its seed. Spectra are assigned and
then conjugated by a random unitary, so the eigenvalues of a generated
matrix are known exactly up to rounding.
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass

import numpy as np

from .hermitian import SpectrumBounds, resymmetrize
from .maps import (
    CompressionMap,
    KrausMap,
    MapSpec,
    NormalizedTraceMap,
    PinchingMap,
    UnitaryMixtureMap,
    random_unital_map,
)

SPECTRUM_STYLES = ("uniform-in-band", "two-point", "endpoint-pinned", "clustered")
MAP_STYLES = ("trace", "pinching", "compression", "kraus(3)", "unitary_mixture(4)")

_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """SplitMix64 finaliser applied to ``seed`` and ``index``.

    Campaign instance ``i`` uses ``mix_seed(campaign_seed, i)`` so results do
    not depend on evaluation order.
    """
    z = (int(seed) * 0x9E3779B97F4A7C15 + int(index) + 1) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class InstanceRecipe:
    dim: int
    bounds: SpectrumBounds
    spectrum_style: str = "uniform-in-band"
    map_style: str = "trace"
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.spectrum_style not in SPECTRUM_STYLES:
            raise ValueError(f"unknown spectrum style {self.spectrum_style!r}")
        parse_map_style(self.map_style)
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        out = asdict(self)
        out["bounds"] = {"m": self.bounds.m, "M": self.bounds.M}
        return out

    @classmethod
    def from_json(cls, data: dict) -> InstanceRecipe:
        b = data["bounds"]
        return cls(
            dim=int(data["dim"]),
            bounds=SpectrumBounds(b["m"], b["M"]),
            spectrum_style=data.get("spectrum_style", "uniform-in-band"),
            map_style=data.get("map_style", "trace"),
            seed=int(data.get("seed", 0)),
        )


def parse_map_style(style: str) -> tuple[str, int | None]:
    """Split ``"kraus(3)"`` into ``("kraus", 3)``; bare names give ``None``."""
    m = re.fullmatch(r"\s*(trace|pinching|compression|kraus|unitary_mixture)\s*(?:\(\s*(\d+)\s*\))?\s*", style)
    if not m:
        raise ValueError(f"unknown map style {style!r}")
    name, count = m.group(1), m.group(2)
    if count is not None and name not in ("kraus", "unitary_mixture"):
        raise ValueError(f"map style {name!r} takes no count")
    if count is not None and int(count) < 1:
        raise ValueError("count must be >= 1")
    return name, (int(count) if count is not None else None)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix.

    The phases of ``diag(R)`` are folded back into ``Q``; without that step
    the QR output is not rotation invariant.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _rng(seed)
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def band_spectrum(dim: int, bounds: SpectrumBounds, style: str, rng: np.random.Generator) -> np.ndarray:
    m, M = bounds.as_tuple()
    if style == "uniform-in-band":
        lam = rng.uniform(m, M, dim)
    elif style == "two-point":
        lam = rng.choice([m, M], dim)
        lam[0] = m
        if dim > 1:
            lam[1] = M
    elif style == "endpoint-pinned":
        lam = rng.uniform(m, M, dim)
        lam[0] = m
        if dim > 1:
            lam[1] = M
    elif style == "clustered":
        spread = 1e-3 * (M - m)
        center = rng.uniform(m + spread, M - spread)
        lam = center + rng.uniform(-spread, spread, dim)
    else:
        raise ValueError(f"unknown spectrum style {style!r}")
    return np.sort(lam)


def conjugate_spectrum(lam, U) -> np.ndarray:
    """``U diag(lam) U*`` made exactly Hermitian."""
    return resymmetrize((U * np.asarray(lam, dtype=float)) @ U.conj().T)


def random_hermitian_in_band(recipe: InstanceRecipe, rng=None) -> np.ndarray:
    """Matrix with spectrum in ``[m, M]`` drawn according to ``recipe``.

    ``rng`` lets callers continue one stream (for the map draw); by default a
    fresh generator is seeded from ``recipe.seed``.
    """
    rng = np.random.default_rng(recipe.seed) if rng is None else rng
    lam = band_spectrum(recipe.dim, recipe.bounds, recipe.spectrum_style, rng)
    return conjugate_spectrum(lam, random_unitary(recipe.dim, rng))


def random_map(style: str, dim: int, seed=None) -> MapSpec:
    """Random normalized positive map of the given style on ``dim x dim`` inputs."""
    name, count = parse_map_style(style)
    rng = _rng(seed)
    if name == "trace":
        return NormalizedTraceMap(dim)
    if name == "pinching":
        cuts = np.sort(rng.choice(np.arange(1, dim), size=int(rng.integers(0, dim)), replace=False)) if dim > 1 else []
        sizes = np.diff(np.concatenate([[0], cuts, [dim]])).astype(int)
        return PinchingMap.from_blocks(sizes, random_unitary(dim, rng))
    if name == "compression":
        k = int(rng.integers(1, dim + 1))
        return CompressionMap(random_unitary(dim, rng)[:, :k])
    if name == "kraus":
        dim_out = int(rng.integers(1, dim + 1))
        return random_unital_map(dim, dim_out, count or 3, rng)
    k = count or 4
    weights = rng.dirichlet(np.ones(k))
    weights /= weights.sum()
    return UnitaryMixtureMap(tuple(weights), tuple(random_unitary(dim, rng) for _ in range(k)))


def realize(recipe: InstanceRecipe) -> tuple[np.ndarray, MapSpec]:
    """Matrix and map for a recipe, both drawn from one seeded stream."""
    rng = np.random.default_rng(recipe.seed)
    A = random_hermitian_in_band(recipe, rng)
    return A, random_map(recipe.map_style, recipe.dim, rng)


@dataclass(frozen=True)
class EdgeInstance:
    label: str
    A: np.ndarray
    phi: MapSpec
    bounds: SpectrumBounds


def edge_instances(bounds: SpectrumBounds, dim: int, seed: int = 0) -> list[EdgeInstance]:
    """Hand-built boundary cases for the inequality checkers.

    Includes the balanced two-point instance under the normalized trace
    (the equality case), a small perturbation of ``m I`` under a
    compression, a bracket of condition ratio ``1e4`` under a Kraus map and
    a near-degenerate bracket of width ``1e-6``.
    """
    if dim < 2:
        raise ValueError("edge instances need dim >= 2")
    rng = np.random.default_rng(seed)
    m, M = bounds.as_tuple()
    out = []

    lam = np.where(np.arange(dim) < dim // 2, m, M) if dim % 2 == 0 else np.r_[m, M, rng.choice([m, M], dim - 2)]
    lam = np.sort(lam)
    out.append(EdgeInstance("two-point/trace", np.diag(lam).astype(np.complex128), NormalizedTraceMap(dim), bounds))
    out.append(EdgeInstance(
        "balanced-two-point/trace",
        conjugate_spectrum([m, M], random_unitary(2, rng)),
        NormalizedTraceMap(2),
        bounds,
    ))

    eps = 1e-6 * (M - m)
    lam = m + eps * np.r_[0.0, rng.uniform(0, 1, dim - 1)]
    out.append(EdgeInstance(
        "near-m/compression",
        conjugate_spectrum(lam, random_unitary(dim, rng)),
        CompressionMap(random_unitary(dim, rng)[:, : max(1, dim // 2)]),
        bounds,
    ))

    wide = SpectrumBounds(m, 1e4 * m)
    out.append(EdgeInstance(
        "condition-1e4/kraus",
        conjugate_spectrum(band_spectrum(dim, wide, "endpoint-pinned", rng), random_unitary(dim, rng)),
        random_unital_map(dim, dim, 3, rng),
        wide,
    ))

    narrow = SpectrumBounds(m, m + 1e-6)
    out.append(EdgeInstance(
        "near-degenerate/kraus",
        conjugate_spectrum(band_spectrum(dim, narrow, "endpoint-pinned", rng), random_unitary(dim, rng)),
        random_unital_map(dim, dim, 2, rng),
        narrow,
    ))
    return out
