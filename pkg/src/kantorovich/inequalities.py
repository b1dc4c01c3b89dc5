"""Checkers for the operator Kantorovich family of inequalities.

Every checker evaluates one inequality chain on a concrete instance and
returns a :class:`ChainReport` listing each link with its gap. For Loewner
links the gap is the smallest eigenvalue of ``rhs - lhs``; for norm links
it is ``rhs - lhs`` as scalars. A link holds when its gap is at least
``-(atol + rtol * scale)``.

Throughout, ``chord`` denotes the operator
``m^((A - M)/(M - m)) M^((m - A)/(M - m))``, i.e. the geometric chord of
``t^-1`` lifted to ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hermitian import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    DomainError,
    LoewnerVerdict,
    SpectrumBounds,
    apply_function,
    apply_scalar,
    check_spectrum_in,
    chord_operator,
    eigenvalues,
    hermitian,
    identity,
    loewner_leq,
    operator_norm,
    spectral_norm,
)
from .maps import MapSpec, apply_map
from .scalar import (
    ScalarFunction,
    inverse,
    kantorovich_classical,
    kantorovich_constant,
    mu_constant,
    power,
    squared_constant,
)

# relative width of the undecidable band around the critical value in check_norm_criterion
NORM_CRITERION_BAND = 1e-8
MAX_EXPONENT = 16.0


@dataclass(frozen=True)
class Link:
    lhs: str
    rhs: str
    gap: float
    holds: bool
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gap", float(self.gap))
        object.__setattr__(self, "holds", bool(self.holds))

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "gap": self.gap, "holds": self.holds}


@dataclass
class ChainReport:
    name: str
    links: list[Link]
    instance: dict = field(default_factory=dict)
    inconclusive: bool = False

    @property
    def all_hold(self) -> bool:
        return all(link.holds for link in self.links)

    @property
    def min_gap(self) -> float:
        return min(link.gap for link in self.links)

    @property
    def gaps(self) -> list[float]:
        return [link.gap for link in self.links]

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "links": [link.to_json() for link in self.links],
            "instance": self.instance,
            "all_hold": self.all_hold,
        }
        if self.inconclusive:
            out["inconclusive"] = True
        return out


def _loewner_link(lhs_label, rhs_label, lhs, rhs, rtol, atol) -> Link:
    v: LoewnerVerdict = loewner_leq(lhs, rhs, rtol=rtol, atol=atol)
    return Link(lhs_label, rhs_label, v.gap, v.holds, v.scale)


def _scalar_link(lhs_label, rhs_label, lhs: float, rhs: float, rtol, atol) -> Link:
    scale = max(1.0, abs(lhs), abs(rhs))
    gap = rhs - lhs
    return Link(lhs_label, rhs_label, gap, gap >= -(atol + rtol * scale), scale)


def _prepare(A, phi: MapSpec, bounds: SpectrumBounds) -> np.ndarray:
    A = hermitian(A)
    if A.shape[0] != phi.dim_in:
        raise ValueError(f"map expects dimension {phi.dim_in}, got {A.shape[0]}")
    check_spectrum_in(A, bounds)
    return A


def _instance(A, phi, bounds, **extra) -> dict:
    info = {"dim": int(A.shape[0]), "m": bounds.m, "M": bounds.M, "map_variant": phi.variant}
    info.update(extra)
    return info


def _positive_definite(X, label):
    X = hermitian(X)
    if eigenvalues(X)[0] <= 0:
        raise DomainError(f"{label} must be positive definite")
    return X


def check_theorem_A(A, phi: MapSpec, bounds: SpectrumBounds, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """Classical operator Kantorovich inequality ``Φ(A^-1) <= K Φ(A)^-1``."""
    A = _prepare(A, phi, bounds)
    inv = inverse()
    lhs = apply_map(phi, apply_function(A, inv))
    rhs = kantorovich_classical(bounds) * apply_function(apply_map(phi, A), inv)
    link = _loewner_link("Φ(A^-1)", "K·Φ(A)^-1", lhs, rhs, rtol, atol)
    return ChainReport("theorem-a", [link], _instance(A, phi, bounds))


def check_refined_kantorovich(A, phi: MapSpec, bounds: SpectrumBounds, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """``Φ(A^-1) <= Φ(chord) <= K Φ(A)^-1`` with ``K = (M+m)^2 / 4Mm``."""
    A = _prepare(A, phi, bounds)
    inv = inverse()
    left = apply_map(phi, apply_function(A, inv))
    middle = apply_map(phi, chord_operator(A, bounds, inv))
    right = kantorovich_classical(bounds) * apply_function(apply_map(phi, A), inv)
    links = [
        _loewner_link("Φ(A^-1)", "Φ(chord)", left, middle, rtol, atol),
        _loewner_link("Φ(chord)", "K·Φ(A)^-1", middle, right, rtol, atol),
    ]
    return ChainReport("refined", links, _instance(A, phi, bounds))


def check_logconvex_refinement(
    A, phi: MapSpec, bounds: SpectrumBounds, f: ScalarFunction, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL
) -> ChainReport:
    """``Φ(f(A)) <= Φ(chord_f) <= μ f(Φ(A))`` for log-convex ``f``.

    A third diagnostic link ``Φ(chord_f) <= Φ(L(A))`` checks the
    intermediate affine-chord bound the chain is routed through.
    """
    if not f.log_convex:
        raise DomainError(f"{f.name} is not flagged log-convex")
    A = _prepare(A, phi, bounds)
    f.require_domain(bounds.m, bounds.M)
    m, M = bounds.as_tuple()
    fm, fM = float(f(m)), float(f(M))
    if not (fm > 0 and fM > 0):
        raise DomainError(f"{f.name} must be positive at the bracket endpoints")
    mu = mu_constant(bounds, f)
    chord = apply_map(phi, chord_operator(A, bounds, f))
    left = apply_map(phi, apply_function(A, f))
    right = mu * apply_function(apply_map(phi, A), f)
    affine = apply_map(phi, apply_scalar(A, lambda t: (M - t) / (M - m) * fm + (t - m) / (M - m) * fM))
    links = [
        _loewner_link("Φ(f(A))", "Φ(chord_f)", left, chord, rtol, atol),
        _loewner_link("Φ(chord_f)", "μ·f(Φ(A))", chord, right, rtol, atol),
        _loewner_link("Φ(chord_f)", "Φ(L(A))", chord, affine, rtol, atol),
    ]
    return ChainReport("logconvex", links, _instance(A, phi, bounds, f=f.name, mu=mu))


def check_power_refinement(
    A, phi: MapSpec, bounds: SpectrumBounds, p: float, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL
) -> ChainReport:
    """``Φ(A^p) <= Φ(chord_{t^p}) <= K(m, M, p) Φ(A)^p`` for ``p < 0``."""
    p = float(p)
    if not p < 0:
        raise DomainError(f"the power refinement needs p < 0, got {p}")
    A = _prepare(A, phi, bounds)
    f = power(p)
    left = apply_map(phi, apply_function(A, f))
    middle = apply_map(phi, chord_operator(A, bounds, f))
    right = kantorovich_constant(bounds, p) * apply_function(apply_map(phi, A), f)
    links = [
        _loewner_link("Φ(A^p)", "Φ(chord_p)", left, middle, rtol, atol),
        _loewner_link("Φ(chord_p)", "K(m,M,p)·Φ(A)^p", middle, right, rtol, atol),
    ]
    return ChainReport("power", links, _instance(A, phi, bounds, p=p))


def check_cdj(A, phi: MapSpec, f: ScalarFunction, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """Jensen-type inequality ``f(Φ(A)) <= Φ(f(A))`` for operator convex ``f``."""
    if not f.operator_convex:
        raise DomainError(f"{f.name} is not flagged operator convex")
    A = hermitian(A)
    if A.shape[0] != phi.dim_in:
        raise ValueError(f"map expects dimension {phi.dim_in}, got {A.shape[0]}")
    lhs = apply_function(apply_map(phi, A), f)
    rhs = apply_map(phi, apply_function(A, f))
    link = _loewner_link("f(Φ(A))", "Φ(f(A))", lhs, rhs, rtol, atol)
    lam = eigenvalues(A)
    info = {"dim": int(A.shape[0]), "m": float(lam[0]), "M": float(lam[-1]), "map_variant": phi.variant, "f": f.name}
    return ChainReport("cdj", [link], info)


def check_theorem_C(
    A, phi: MapSpec, bounds: SpectrumBounds, f: ScalarFunction, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL
) -> ChainReport:
    """``(1/μ) Φ(f(A)) <= f(Φ(A)) <= μ Φ(f(A))`` for convex nonnegative ``f``."""
    if not f.convex:
        raise DomainError(f"{f.name} is not flagged convex")
    A = _prepare(A, phi, bounds)
    mu = mu_constant(bounds, f)
    image = apply_map(phi, apply_function(A, f))
    middle = apply_function(apply_map(phi, A), f)
    links = [
        _loewner_link("Φ(f(A))/μ", "f(Φ(A))", image / mu, middle, rtol, atol),
        _loewner_link("f(Φ(A))", "μ·Φ(f(A))", middle, mu * image, rtol, atol),
    ]
    return ChainReport("theorem-c", links, _instance(A, phi, bounds, f=f.name, mu=mu))


def check_bhatia_kittaneh(A, B, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """``||AB|| <= ||A + B||^2 / 4`` for positive definite ``A`` and ``B``."""
    A = _positive_definite(A, "A")
    B = _positive_definite(B, "B")
    lhs = spectral_norm(A @ B)
    rhs = 0.25 * operator_norm(A + B) ** 2
    link = _scalar_link("‖AB‖", "‖A+B‖²/4", lhs, rhs, rtol, atol)
    return ChainReport("bhatia-kittaneh", [link], {"dim": int(A.shape[0])})


def _psd(X, label, rtol, atol) -> np.ndarray:
    X = hermitian(X)
    if not loewner_leq(np.zeros_like(X), X, rtol=rtol, atol=atol).holds:
        raise DomainError(f"{label} must be positive semidefinite")
    return X


def _psd_power(X, r):
    # rounding can push zero eigenvalues slightly negative; clip before the power
    return apply_scalar(X, lambda t: np.power(np.clip(t, 0.0, None), r))


def check_ando(A, B, r: float, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """``||A^r + B^r|| <= ||(A + B)^r||`` for PSD ``A``, ``B`` and ``r >= 1``."""
    r = float(r)
    if not r >= 1:
        raise DomainError(f"r must be >= 1, got {r}")
    A = _psd(A, "A", rtol, atol)
    B = _psd(B, "B", rtol, atol)
    lhs = operator_norm(_psd_power(A, r) + _psd_power(B, r))
    rhs = operator_norm(_psd_power(A + B, r))
    link = _scalar_link("‖A^r+B^r‖", "‖(A+B)^r‖", lhs, rhs, rtol, atol)
    return ChainReport("ando", [link], {"dim": int(A.shape[0]), "r": r})


def check_eq6(A, phi: MapSpec, bounds: SpectrumBounds, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """``Φ(A) + m M Φ(chord) <= (M + m) I``."""
    A = _prepare(A, phi, bounds)
    m, M = bounds.as_tuple()
    image = apply_map(phi, A)
    lhs = image + m * M * apply_map(phi, chord_operator(A, bounds, inverse()))
    rhs = (M + m) * identity(image.shape[0])
    link = _loewner_link("Φ(A)+mM·Φ(chord)", "(M+m)·I", lhs, rhs, rtol, atol)
    return ChainReport("eq6", [link], _instance(A, phi, bounds))


def check_norm_criterion(A, B, alpha: float, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """Compare ``A <= αB`` with ``||A^(1/2) B^(-1/2)|| <= α^(1/2)``.

    The single link holds when both predicates agree; its gap is
    ``√α - ||A^(1/2) B^(-1/2)||``. Instances within a relative band of
    ``1e-8`` of the critical value, or whose Loewner gap sits inside the
    comparison tolerance, cannot be decided in floating point and are marked
    inconclusive.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    A = _positive_definite(A, "A")
    B = _positive_definite(B, "B")
    root_a = apply_scalar(A, np.sqrt)
    inv_root_b = apply_scalar(B, lambda t: 1.0 / np.sqrt(t))
    norm = spectral_norm(root_a @ inv_root_b)
    root_alpha = np.sqrt(alpha)
    verdict = loewner_leq(A, alpha * B, rtol=rtol, atol=atol)
    norm_pred = norm <= root_alpha
    inconclusive = abs(norm - root_alpha) <= NORM_CRITERION_BAND * root_alpha or abs(verdict.gap) <= verdict.tolerance
    link = Link("A ≤ αB", "‖A^½B^-½‖ ≤ √α", float(root_alpha - norm), verdict.holds == norm_pred, verdict.scale)
    info = {
        "dim": int(A.shape[0]),
        "alpha": alpha,
        "norm": norm,
        "loewner_holds": verdict.holds,
        "norm_holds": bool(norm_pred),
    }
    return ChainReport("norm-criterion", [link], info, inconclusive=bool(inconclusive))


def check_squared(A, phi: MapSpec, bounds: SpectrumBounds, p: float, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ChainReport:
    """``Φ(chord)^p <= ((M+m)^2 / (4^(2/p) M m))^p Φ(A)^(-p)`` for ``p >= 2``."""
    p = float(p)
    if not p >= 2:
        raise DomainError(f"the squared inequality needs p >= 2, got {p}")
    if p > MAX_EXPONENT:
        raise DomainError(f"p is capped at {MAX_EXPONENT:g} to keep the constant finite")
    A = _prepare(A, phi, bounds)
    middle = apply_map(phi, chord_operator(A, bounds, inverse()))
    lhs = apply_function(middle, power(p))
    rhs = squared_constant(bounds, p) * apply_function(apply_map(phi, A), power(-p))
    link = _loewner_link("Φ(chord)^p", "C_p·Φ(A)^-p", lhs, rhs, rtol, atol)
    return ChainReport("squared", [link], _instance(A, phi, bounds, p=p))


def classical_slack(A, phi: MapSpec, bounds: SpectrumBounds) -> float:
    """Smallest eigenvalue of ``K Φ(A)^-1 - Φ(A^-1)``."""
    return check_theorem_A(A, phi, bounds).links[0].gap
