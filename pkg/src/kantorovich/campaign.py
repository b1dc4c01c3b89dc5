"""Randomised verification campaigns.

A campaign draws ``trials`` instances, one :class:`InstanceRecipe` per
index, and runs the selected checkers on each. Instance ``i`` is seeded by
``mix_seed(seed, i)`` alone, so a campaign gives the same report whether it
runs serially or across worker processes.
"""

from __future__ import annotations

import dataclasses
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import inequalities as ineq
from .hermitian import DEFAULT_ATOL, DEFAULT_RTOL, SpectrumBounds, apply_scalar, eigenvalues, spectral_norm
from .instances import (
    MAP_STYLES,
    SPECTRUM_STYLES,
    InstanceRecipe,
    parse_map_style,
    mix_seed,
    random_hermitian_in_band,
    realize,
)
from .scalar import get_function

REPORT_VERSION = 1

THEOREMS = (
    "theorem-a",
    "refined",
    "logconvex",
    "power",
    "squared",
    "cdj",
    "theorem-c",
    "bhatia-kittaneh",
    "ando",
    "eq6",
    "norm-criterion",
)

DEFAULT_P = {"power": (-0.5, -1.0, -2.0, -3.0), "squared": (2.0, 3.0, 4.0, 8.0)}
DEFAULT_F = {"logconvex": ("exp-neg", "inv"), "cdj": ("inv", "sq"), "theorem-c": ("sq", "inv")}
DEFAULT_R = (1.5, 2.0, 3.0)
_FUNCTION_FLAG = {"logconvex": "log_convex", "cdj": "operator_convex", "theorem-c": "convex"}


class ConfigError(ValueError):
    """Invalid campaign configuration (CLI exit status 2)."""


@dataclass(frozen=True)
class CampaignConfig:
    theorem: str = "all"
    trials: int = 100
    dim_min: int = 2
    dim_max: int = 8
    bounds: tuple[float, float] | None = None
    tight: bool = True
    widen: float = 0.0
    p: tuple[float, ...] | None = None
    functions: tuple[str, ...] | None = None
    r: tuple[float, ...] | None = None
    map_styles: tuple[str, ...] = MAP_STYLES
    spectrum_styles: tuple[str, ...] = SPECTRUM_STYLES
    seed: int = 0
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    output: str | None = None
    format: str = "json"
    jobs: int = 1
    recipes: tuple[dict, ...] | None = field(default=None, compare=True)

    def __post_init__(self):
        for name in ("bounds", "p", "functions", "r", "map_styles", "spectrum_styles", "recipes"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        self.validate()

    @property
    def theorems(self) -> tuple[str, ...]:
        return THEOREMS if self.theorem == "all" else (self.theorem,)

    def validate(self):
        if self.theorem != "all" and self.theorem not in THEOREMS:
            raise ConfigError(f"unknown theorem {self.theorem!r}; choose from {', '.join(THEOREMS)} or all")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 1 <= self.dim_min <= self.dim_max:
            raise ConfigError(f"invalid dimension range {self.dim_min}..{self.dim_max}")
        if self.bounds is not None:
            try:
                SpectrumBounds(*self.bounds)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid bounds {self.bounds}: {exc}") from None
        if not self.widen >= 0:
            raise ConfigError("widen must be >= 0")
        if not (self.rtol >= 0 and self.atol >= 0):
            raise ConfigError("tolerances must be nonnegative")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for style in self.map_styles:
            try:
                parse_map_style(style)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for style in self.spectrum_styles:
            if style not in SPECTRUM_STYLES:
                raise ConfigError(f"unknown spectrum style {style!r}")
        if not self.map_styles or not self.spectrum_styles:
            raise ConfigError("need at least one map style and one spectrum style")
        if self.r is not None and any(not r >= 1 for r in self.r):
            raise ConfigError("r values must be >= 1")
        if self.recipes is not None:
            if not self.recipes:
                raise ConfigError("recipes must not be empty")
            for recipe in self.recipes:
                try:
                    InstanceRecipe.from_json(recipe)
                except (KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"invalid recipe {recipe}: {exc!r}") from None
        # resolving the tasks runs every p and function constraint check
        campaign_tasks(self)

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_json(cls, data: dict) -> CampaignConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def campaign_tasks(config: CampaignConfig) -> list[tuple[str, dict]]:
    """Expand the theorem selector into ``(theorem, params)`` pairs.

    With an explicit p list and ``theorem == "all"``, negative exponents go to
    the power refinement and exponents ``>= 2`` to the squared inequality.
    """
    selected = config.theorems
    tasks: list[tuple[str, dict]] = []
    if config.p is not None:
        for p in config.p:
            if not math.isfinite(p):
                raise ConfigError(f"p must be finite, got {p}")
            fits = (p < 0 and "power" in selected) or (p >= 2 and "squared" in selected)
            if not fits:
                raise ConfigError(f"p = {p:g} fits none of the selected theorems ({', '.join(selected)})")
            if abs(p) > ineq.MAX_EXPONENT:
                raise ConfigError(f"|p| is capped at {ineq.MAX_EXPONENT:g}")
    if config.functions is not None:
        for name in config.functions:
            try:
                f = get_function(name)
            except (KeyError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
            if not any(getattr(f, _FUNCTION_FLAG[t]) for t in selected if t in _FUNCTION_FLAG):
                raise ConfigError(f"function {name} fits none of the selected theorems ({', '.join(selected)})")
    for theorem in selected:
        if theorem in ("power", "squared"):
            if config.p is None:
                ps = DEFAULT_P[theorem]
            else:
                ps = tuple(p for p in config.p if (p < 0 if theorem == "power" else p >= 2))
            tasks.extend((theorem, {"p": float(p)}) for p in ps)
        elif theorem in DEFAULT_F:
            names = DEFAULT_F[theorem] if config.functions is None else config.functions
            flag = _FUNCTION_FLAG[theorem]
            for name in names:
                if getattr(get_function(name), flag):
                    tasks.append((theorem, {"f": name}))
                elif config.theorem != "all":
                    raise ConfigError(f"{name} is not {flag.replace('_', ' ')}, as {theorem} requires")
        elif theorem == "ando":
            tasks.extend(("ando", {"r": float(r)}) for r in (config.r or DEFAULT_R))
        else:
            tasks.append((theorem, {}))
    return tasks


def make_recipe(config: CampaignConfig, index: int) -> InstanceRecipe:
    """Recipe for campaign instance ``index``; depends only on the config and index."""
    seed = mix_seed(config.seed, index)
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(config.dim_min, config.dim_max + 1))
    if config.bounds is not None:
        bounds = SpectrumBounds(*config.bounds)
    else:
        # moderate bands keep exp(-M) and the constants well inside double range
        m = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
        ratio = float(np.exp(rng.uniform(np.log(1.05), np.log(20.0))))
        bounds = SpectrumBounds(m, m * ratio)
    style = config.spectrum_styles[int(rng.integers(len(config.spectrum_styles)))]
    map_style = config.map_styles[int(rng.integers(len(config.map_styles)))]
    return InstanceRecipe(dim, bounds, style, map_style, mix_seed(seed, 0))


def working_bounds(A, recipe: InstanceRecipe, tight: bool, widen: float) -> SpectrumBounds:
    """Bracket handed to the checkers.

    The tight bracket is the computed extreme eigenvalues; it falls back to
    the recipe band when the spectrum is numerically a single point.
    """
    if tight:
        lam = eigenvalues(A)
        lo, hi = float(lam[0]), float(lam[-1])
        if hi - lo <= 1e-9 * hi:
            lo, hi = recipe.bounds.as_tuple()
    else:
        lo, hi = recipe.bounds.as_tuple()
    return SpectrumBounds(lo / (1.0 + widen), hi * (1.0 + widen))


def _pair(recipe: InstanceRecipe):
    rng = np.random.default_rng(recipe.seed)
    A = random_hermitian_in_band(recipe, rng)
    B = random_hermitian_in_band(recipe, rng)
    return A, B, rng


def run_instance(theorem: str, params: dict, recipe: InstanceRecipe, *, tight=True, widen=0.0,
                 rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> ineq.ChainReport:
    """Run one checker on the instance described by ``recipe``."""
    tol = {"rtol": rtol, "atol": atol}
    if theorem in ("bhatia-kittaneh", "ando", "norm-criterion"):
        A, B, rng = _pair(recipe)
        if theorem == "bhatia-kittaneh":
            report = ineq.check_bhatia_kittaneh(A, B, **tol)
        elif theorem == "ando":
            # shift by m so pinned spectra yield singular PSD matrices
            m = recipe.bounds.m
            shift = m * np.eye(recipe.dim)
            report = ineq.check_ando(A - shift, B - shift, params["r"], **tol)
        else:
            root_a = apply_scalar(A, np.sqrt)
            inv_root_b = apply_scalar(B, lambda t: 1.0 / np.sqrt(t))
            critical = spectral_norm(root_a @ inv_root_b) ** 2
            alpha = critical * float(np.exp(rng.uniform(-0.5, 0.5)))
            report = ineq.check_norm_criterion(A, B, alpha, **tol)
    else:
        A, phi = realize(recipe)
        bounds = working_bounds(A, recipe, tight, widen)
        if theorem == "theorem-a":
            report = ineq.check_theorem_A(A, phi, bounds, **tol)
        elif theorem == "refined":
            report = ineq.check_refined_kantorovich(A, phi, bounds, **tol)
        elif theorem == "eq6":
            report = ineq.check_eq6(A, phi, bounds, **tol)
        elif theorem == "power":
            report = ineq.check_power_refinement(A, phi, bounds, params["p"], **tol)
        elif theorem == "squared":
            report = ineq.check_squared(A, phi, bounds, params["p"], **tol)
        elif theorem == "logconvex":
            report = ineq.check_logconvex_refinement(A, phi, bounds, get_function(params["f"]), **tol)
        elif theorem == "theorem-c":
            report = ineq.check_theorem_C(A, phi, bounds, get_function(params["f"]), **tol)
        elif theorem == "cdj":
            report = ineq.check_cdj(A, phi, get_function(params["f"]), **tol)
        else:
            raise ConfigError(f"unknown theorem {theorem!r}")
    report.instance = {
        "seed": recipe.seed,
        "spectrum_style": recipe.spectrum_style,
        "map_style": recipe.map_style,
        **report.instance,
        **params,
    }
    return report


def _recipes(config: CampaignConfig) -> list[InstanceRecipe]:
    if config.recipes is not None:
        return [InstanceRecipe.from_json(r) for r in config.recipes]
    return [make_recipe(config, i) for i in range(config.trials)]


def _run_index(args):
    config, index, recipe = args
    out = []
    for theorem, params in campaign_tasks(config):
        report = run_instance(theorem, params, recipe, tight=config.tight, widen=config.widen,
                              rtol=config.rtol, atol=config.atol)
        out.append((theorem, params, report))
    return index, recipe, out


def _summarize(entries) -> dict:
    conclusive = [r.min_gap for _, r in entries if not r.inconclusive]
    passes = sum(1 for _, r in entries if not r.inconclusive and r.all_hold)
    inconclusive = sum(1 for _, r in entries if r.inconclusive)
    return {
        "instances": len(entries),
        "passes": passes,
        "failures": len(entries) - passes - inconclusive,
        "inconclusive": inconclusive,
        "min_gap": min(conclusive) if conclusive else None,
        "median_gap": statistics.median(conclusive) if conclusive else None,
        "max_gap": max(conclusive) if conclusive else None,
    }


def run_campaign(config: CampaignConfig) -> dict:
    """Run a campaign and return the report as a JSON-ready dict.

    The report has keys ``version``, ``config``, ``results`` (one chain
    report per instance and task, in index order) and ``summary``.
    """
    start = time.perf_counter()
    recipes = _recipes(config)
    jobs = [(config, i, recipe) for i, recipe in enumerate(recipes)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_run_index, jobs, chunksize=max(1, len(jobs) // (4 * config.jobs))))
    else:
        outcomes = [_run_index(job) for job in jobs]
    outcomes.sort(key=lambda item: item[0])

    results, failing = [], []
    by_theorem: dict[str, list] = {t: [] for t, _ in campaign_tasks(config)}
    for index, recipe, reports in outcomes:
        for theorem, params, report in reports:
            entry = report.to_json()
            entry["instance"]["index"] = index
            results.append(entry)
            by_theorem[theorem].append((index, report))
            if not report.inconclusive and not report.all_hold:
                failing.append({"index": index, "theorem": theorem, "params": params, "recipe": recipe.to_json()})

    per_theorem = {theorem: _summarize(entries) for theorem, entries in by_theorem.items()}
    summary = {
        "theorems": per_theorem,
        "total_failures": sum(s["failures"] for s in per_theorem.values()),
        "failing_recipes": failing,
        "wall_time": time.perf_counter() - start,
    }
    return {"version": REPORT_VERSION, "config": config.to_json(), "results": results, "summary": summary}


def replay(failure: dict, config: CampaignConfig | None = None) -> ineq.ChainReport:
    """Re-run one entry of ``summary["failing_recipes"]``."""
    config = config or CampaignConfig()
    recipe = InstanceRecipe.from_json(failure["recipe"])
    return run_instance(failure["theorem"], failure["params"], recipe, tight=config.tight,
                        widen=config.widen, rtol=config.rtol, atol=config.atol)


def tightness_rows(config: CampaignConfig) -> list[dict]:
    """Per-instance gaps of the refined chain next to the classical slack."""
    rows = []
    for index, recipe in enumerate(_recipes(config)):
        A, phi = realize(recipe)
        bounds = working_bounds(A, recipe, config.tight, config.widen)
        refined = ineq.check_refined_kantorovich(A, phi, bounds, rtol=config.rtol, atol=config.atol)
        rows.append({
            "index": index,
            "seed": recipe.seed,
            "dim": recipe.dim,
            "m": bounds.m,
            "M": bounds.M,
            "spectrum_style": recipe.spectrum_style,
            "map_variant": phi.variant,
            "link1_gap": refined.links[0].gap,
            "link2_gap": refined.links[1].gap,
            "classical_slack": ineq.classical_slack(A, phi, bounds),
            "holds": refined.all_hold,
        })
    return rows


TIGHTNESS_COLUMNS = (
    "index", "seed", "dim", "m", "M", "spectrum_style", "map_variant",
    "link1_gap", "link2_gap", "classical_slack", "holds",
)
