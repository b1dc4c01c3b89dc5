"""Scalar functions, chords and the constants of the Kantorovich family.

The function registry covers ``t^-1``, ``t^p``, ``exp(-t)`` and positive
affine functions. Each entry carries its domain together with the convexity
flags the inequality checkers rely on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hermitian import DomainError, SpectrumBounds

MU_GRID_POINTS = 2049
MU_REFINE_WIDTH = 1e-10
LOG_CONVEX_SLACK = 1e-12
# |p| and |p - 1| below this are treated as the excluded exponents 0 and 1
EXPONENT_EXCLUSION = 1e-8

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return bool(above and below)

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


POSITIVE_REALS = Interval(0.0, math.inf)
NONNEGATIVE_REALS = Interval(0.0, math.inf, lo_closed=True)
REAL_LINE = Interval()


@dataclass(frozen=True)
class ScalarFunction:
    """A named vectorised real function with domain metadata.

    The boolean flags record what is known about the function on its whole
    domain; they gate which checkers accept it.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    domain: Interval = REAL_LINE
    convex: bool = False
    log_convex: bool = False
    operator_convex: bool = False

    def __call__(self, t):
        return self.func(t)

    def require_domain(self, lo: float, hi: float):
        if not (self.domain.contains(lo) and self.domain.contains(hi)):
            raise DomainError(f"[{lo}, {hi}] is not inside the domain {self.domain} of {self.name}")


@dataclass(frozen=True)
class ConvexityReport:
    kind: str  # "log-convex" | "convex-only" | "neither"
    worst_violation: float
    samples: int


def inverse() -> ScalarFunction:
    return ScalarFunction(
        "inv",
        lambda t: 1.0 / np.asarray(t, dtype=float),
        POSITIVE_REALS,
        convex=True,
        log_convex=True,
        operator_convex=True,
    )


def power(p: float) -> ScalarFunction:
    """``t ↦ t^p``.

    Integer exponents ``p >= 0`` are defined on the whole line; otherwise the
    domain is ``(0, inf)``, or ``[0, inf)`` for ``p > 0``.
    """
    p = float(p)
    if p == -1.0:
        return inverse()
    if p.is_integer() and p >= 0:
        domain = REAL_LINE
        convex = p == 0 or p == 1 or p % 2 == 0
    else:
        domain = NONNEGATIVE_REALS if p > 0 else POSITIVE_REALS
        convex = p <= 0 or p >= 1
    return ScalarFunction(
        f"pow({p:g})",
        lambda t: np.power(np.asarray(t, dtype=float), p),
        domain,
        convex=convex,
        log_convex=p <= 0,
        # only the two textbook cases are flagged
        operator_convex=p == 2.0,
    )


def exp_neg() -> ScalarFunction:
    return ScalarFunction(
        "exp-neg",
        lambda t: np.exp(-np.asarray(t, dtype=float)),
        REAL_LINE,
        convex=True,
        log_convex=True,
    )


def affine(slope: float, intercept: float) -> ScalarFunction:
    """``t ↦ slope * t + intercept``.

    The domain is the half-line where the function is strictly positive.
    """
    a, b = float(slope), float(intercept)
    if a > 0:
        domain = Interval(-b / a, math.inf)
    elif a < 0:
        domain = Interval(-math.inf, -b / a)
    elif b > 0:
        domain = REAL_LINE
    else:
        raise ValueError("a constant affine function must be positive")
    return ScalarFunction(
        f"affine({a:g},{b:g})",
        lambda t: a * np.asarray(t, dtype=float) + b,
        domain,
        convex=True,
        log_convex=a == 0,
    )


_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def get_function(spec: str) -> ScalarFunction:
    """Look up a registry function by id.

    Accepted ids: ``inv``, ``sq``, ``exp-neg``, ``pow(p)``, ``affine(a,b)``.
    """
    s = spec.strip().replace(" ", "")
    if s == "inv":
        return inverse()
    if s == "sq":
        return power(2)
    if s == "exp-neg":
        return exp_neg()
    if m := re.fullmatch(rf"pow\(({_NUMBER})\)", s):
        return power(float(m.group(1)))
    if m := re.fullmatch(rf"affine\(({_NUMBER}),({_NUMBER})\)", s):
        return affine(float(m.group(1)), float(m.group(2)))
    raise KeyError(f"unknown function id {spec!r}")


REGISTRY_IDS = ("inv", "sq", "exp-neg", "pow(p)", "affine(a,b)")


def _check_t(t, bounds: SpectrumBounds):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < bounds.m) or np.any(t_arr > bounds.M):
        raise ValueError(f"t must lie in [{bounds.m}, {bounds.M}]")
    return t_arr


def _endpoint_values(bounds: SpectrumBounds, f: ScalarFunction) -> tuple[float, float]:
    f.require_domain(bounds.m, bounds.M)
    return float(f(bounds.m)), float(f(bounds.M))


def linear_chord(t, bounds: SpectrumBounds, f: ScalarFunction):
    """Affine interpolant of ``f`` through ``(m, f(m))`` and ``(M, f(M))``."""
    t_arr = _check_t(t, bounds)
    m, M = bounds.as_tuple()
    fm, fM = _endpoint_values(bounds, f)
    out = (M - t_arr) / (M - m) * fm + (t_arr - m) / (M - m) * fM
    return out if out.ndim else float(out)


def log_chord(t, bounds: SpectrumBounds, f: ScalarFunction):
    """Log-linear interpolant ``f(m)^((M-t)/(M-m)) f(M)^((t-m)/(M-m))``."""
    t_arr = _check_t(t, bounds)
    m, M = bounds.as_tuple()
    fm, fM = _endpoint_values(bounds, f)
    if not (fm > 0 and fM > 0):
        raise DomainError(f"log chord needs f(m), f(M) > 0, got {fm}, {fM}")
    out = fm ** ((M - t_arr) / (M - m)) * fM ** ((t_arr - m) / (M - m))
    return out if out.ndim else float(out)


def is_log_convex(f: ScalarFunction, interval: tuple[float, float], n: int = 200) -> ConvexityReport:
    """Sampled midpoint test of log-convexity.

    For every pair ``a < b`` of an ``n``-point grid the multiplicative
    criterion ``f((a+b)/2)^2 <= f(a) f(b)`` is checked, which avoids taking
    logarithms near underflow. If it fails, plain midpoint convexity is
    tested instead. ``worst_violation`` is the largest relative violation of
    the criterion for the reported kind (``<= 0`` means no violation beyond
    rounding); for ``"neither"`` it refers to the convexity test.
    """
    if n < 3:
        raise ValueError("need at least 3 grid points")
    lo, hi = interval
    grid = np.linspace(lo, hi, n)
    values = np.asarray(f(grid), dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DomainError(f"{f.name} must be finite and positive on [{lo}, {hi}]")
    i, j = np.triu_indices(n, k=1)
    fa, fb = values[i], values[j]
    fmid = np.asarray(f(0.5 * (grid[i] + grid[j])), dtype=float)

    geometric = fa * fb
    log_violation = float(np.max((fmid * fmid - geometric) / geometric))
    pairs = len(i)
    if log_violation <= LOG_CONVEX_SLACK:
        return ConvexityReport("log-convex", log_violation, pairs)
    arithmetic = 0.5 * (fa + fb)
    violation = float(np.max((fmid - arithmetic) / arithmetic))
    kind = "convex-only" if violation <= LOG_CONVEX_SLACK else "neither"
    return ConvexityReport(kind, violation, pairs)


def golden_section_max(g: Callable[[float], float], lo: float, hi: float, tol: float = MU_REFINE_WIDTH):
    """Maximise a unimodal ``g`` on ``[lo, hi]`` by golden-section search.

    Returns ``(t_best, g_best)`` after the bracket shrinks below ``tol``.
    """
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INVPHI * (b - a)
            gd = g(d)
    t = 0.5 * (a + b)
    return t, g(t)


def mu_constant(bounds: SpectrumBounds, f: ScalarFunction) -> float:
    """``max_{t in [m, M]} L(t) / f(t)`` where ``L`` is the affine chord of ``f``.

    A uniform grid scan locates the best cell, then golden-section search
    refines inside the neighbouring cells.
    """
    m, M = bounds.as_tuple()
    fm, fM = _endpoint_values(bounds, f)
    grid = np.linspace(m, M, MU_GRID_POINTS)
    values = np.asarray(f(grid), dtype=float)
    if np.any(values <= 0) or np.any(~np.isfinite(values)):
        raise DomainError(f"{f.name} must be strictly positive on [{m}, {M}]")

    def ratio(t):
        lin = (M - t) / (M - m) * fm + (t - m) / (M - m) * fM
        return lin / np.asarray(f(t), dtype=float)

    scan = ratio(grid)
    k = int(np.argmax(scan))
    best = float(scan[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    _, refined = golden_section_max(lambda t: float(ratio(t)), lo, hi)
    return max(best, float(refined))


def kantorovich_constant(bounds: SpectrumBounds, p: float) -> float:
    """Generalised Kantorovich constant ``K(m, M, p)``.

    Evaluated from the closed form; ``p`` in ``{0, 1}`` (within ``1e-8``)
    is rejected since the formula divides by ``p`` and ``p - 1`` there.
    """
    p = float(p)
    if abs(p) < EXPONENT_EXCLUSION or abs(p - 1.0) < EXPONENT_EXCLUSION:
        raise DomainError(f"K(m, M, p) is undefined at p = {p}")
    m, M = bounds.as_tuple()
    Mp, mp = M**p, m**p
    cross = m * Mp - M * mp
    return cross / ((p - 1.0) * (M - m)) * ((p - 1.0) / p * (Mp - mp) / cross) ** p


def kantorovich_classical(bounds: SpectrumBounds) -> float:
    """``(M + m)^2 / (4 M m)``."""
    m, M = bounds.as_tuple()
    return (M + m) ** 2 / (4.0 * M * m)


def squared_constant(bounds: SpectrumBounds, p: float) -> float:
    """Multiplier ``((M + m)^2 / (4^(2/p) M m))^p`` of the squared inequality."""
    m, M = bounds.as_tuple()
    return ((M + m) ** 2 / (4.0 ** (2.0 / p) * M * m)) ** p


def sum_bound_gap(t, bounds: SpectrumBounds):
    """``(M + m) - [t + m M m^((t-M)/(M-m)) M^((m-t)/(M-m))]``, nonnegative on ``[m, M]``.

    Uses the equivalent form ``m^((t-m)/(M-m)) M^((M-t)/(M-m))`` for the
    product term, which is exact at both endpoints.
    """
    t_arr = _check_t(t, bounds)
    m, M = bounds.as_tuple()
    product = m ** ((t_arr - m) / (M - m)) * M ** ((M - t_arr) / (M - m))
    out = (M + m) - (t_arr + product)
    return out if out.ndim else float(out)
