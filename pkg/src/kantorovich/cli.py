"""Command-line front end: ``kantorovich {verify,constants,equality-cases,tightness}``.

Exit status: 0 when every checked inequality holds, 1 on an inequality
failure or equality-case regression, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys

import numpy as np

from . import inequalities as ineq
from .campaign import THEOREMS, TIGHTNESS_COLUMNS, CampaignConfig, ConfigError, run_campaign, tightness_rows
from .hermitian import DomainError, SpectrumBounds
from .instances import conjugate_spectrum, random_unitary
from .maps import NormalizedTraceMap
from .scalar import get_function, kantorovich_classical, kantorovich_constant, mu_constant

log = logging.getLogger("kantorovich")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2
EQUALITY_TOL = 1e-10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _strings(text: str) -> list[str]:
    # commas inside parentheses belong to the item, e.g. affine(1,2)
    items, depth, current = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            items.append(current.strip())
            current = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        current += ch
    items.append(current.strip())
    return [item for item in items if item]


def _dim_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO..HI, got {text!r}") from None


def _add_campaign_flags(p: argparse.ArgumentParser):
    # every default is None so that --config values survive unless overridden
    p.add_argument("--config", help="JSON config file; explicit flags override its values")
    p.add_argument("--theorem", choices=(*THEOREMS, "all"))
    p.add_argument("--trials", type=int)
    p.add_argument("--dim", type=_dim_range, help="dimension or range LO..HI")
    p.add_argument("--m", type=float, help="lower end of the generation band")
    p.add_argument("--M", type=float, help="upper end of the generation band")
    p.add_argument("--tight", action=argparse.BooleanOptionalAction, default=None,
                   help="bracket each instance by its extreme eigenvalues (default on)")
    p.add_argument("--widen", type=float, help="multiplicative widening of the bracket")
    p.add_argument("--p", type=_floats, help="exponents, e.g. --p=-0.5,-1 or --p 2,4,8")
    p.add_argument("--f", type=_strings, dest="functions", help="function ids, e.g. inv,sq,exp-neg")
    p.add_argument("--r", type=_floats, help="exponents for the Ando lemma")
    p.add_argument("--maps", type=_strings, dest="map_styles", help="map styles, e.g. trace,kraus(3)")
    p.add_argument("--spectra", type=_strings, dest="spectrum_styles")
    p.add_argument("--seed", type=int)
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("-o", "--output", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"))


def _config_from_args(args, **overrides) -> CampaignConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("theorem", "trials", "tight", "widen", "p", "functions", "r", "map_styles",
                "spectrum_styles", "seed", "rtol", "atol", "jobs", "output", "format"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.dim is not None:
        data["dim_min"], data["dim_max"] = args.dim
    if (args.m is None) != (args.M is None):
        raise ConfigError("--m and --M must be given together")
    if args.m is not None:
        data["bounds"] = [args.m, args.M]
    data.update(overrides)
    return CampaignConfig.from_json(data)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    config = _config_from_args(args)
    report = run_campaign(config)
    _emit(json.dumps(report, indent=2) + "\n", config.output)
    for theorem, s in report["summary"]["theorems"].items():
        log.info("%-16s instances=%d passes=%d failures=%d inconclusive=%d",
                 theorem, s["instances"], s["passes"], s["failures"], s["inconclusive"])
    return EXIT_OK if report["summary"]["total_failures"] == 0 else EXIT_FAILURE


def constants_table(m: float, M: float, ps, fs) -> list[dict]:
    bounds = SpectrumBounds(m, M)
    rows = []
    for p in ps:
        row = {"quantity": "K", "m": m, "M": M, "p": p, "value": kantorovich_constant(bounds, p)}
        if p == -1:
            row["closed_form"] = kantorovich_classical(bounds)
        rows.append(row)
    for name in fs:
        rows.append({"quantity": "mu", "m": m, "M": M, "f": name, "value": mu_constant(bounds, get_function(name))})
    return rows


def cmd_constants(args) -> int:
    try:
        rows = constants_table(args.m, args.M, args.p or [], args.functions or [])
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    if args.format == "json":
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    for row in rows:
        if row["quantity"] == "K":
            line = f"K({row['m']:g}, {row['M']:g}, {row['p']:g}) = {row['value']:.17g}"
            if "closed_form" in row:
                line += f"   (M+m)^2/(4Mm) = {row['closed_form']:.17g}"
        else:
            line = f"mu({row['m']:g}, {row['M']:g}, {row['f']}) = {row['value']:.17g}"
        print(line)
    return EXIT_OK


EQUALITY_BRACKETS = ((1.0, 2.0), (0.5, 3.0), (2.0, 7.0), (1.0, 100.0))


def equality_cases(seed: int = 0) -> list[dict]:
    """Gaps of the refined chain, the (M+m) bound and the squared bound at p = 2.

    Instances are ``diag(m, M)`` and a random unitary conjugate of it under
    the normalized trace; every gap is zero in exact arithmetic.
    """
    rng = np.random.default_rng(seed)
    out = []
    phi = NormalizedTraceMap(2)
    for m, M in EQUALITY_BRACKETS:
        bounds = SpectrumBounds(m, M)
        for label, A in (("diag", np.diag([m, M]).astype(complex)),
                         ("conjugated", conjugate_spectrum([m, M], random_unitary(2, rng)))):
            for report in (ineq.check_refined_kantorovich(A, phi, bounds),
                           ineq.check_eq6(A, phi, bounds),
                           ineq.check_squared(A, phi, bounds, 2.0)):
                out.append({
                    "check": report.name,
                    "instance": label,
                    "m": m,
                    "M": M,
                    "gaps": report.gaps,
                    "ok": all(abs(g) <= EQUALITY_TOL for g in report.gaps),
                })
    return out


def cmd_equality_cases(args) -> int:
    rows = equality_cases(args.seed or 0)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        for row in rows:
            gaps = ", ".join(f"{g:+.3e}" for g in row["gaps"])
            status = "ok" if row["ok"] else "REGRESSION"
            print(f"{row['check']:<9} {row['instance']:<10} m={row['m']:<4g} M={row['M']:<5g} gaps=({gaps})  {status}")
    return EXIT_OK if all(row["ok"] for row in rows) else EXIT_FAILURE


def cmd_tightness(args) -> int:
    config = _config_from_args(args, theorem="refined")
    rows = tightness_rows(config)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TIGHTNESS_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    _emit(buf.getvalue(), config.output)
    return EXIT_OK if all(row["holds"] for row in rows) else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kantorovich", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="run a randomised verification campaign", allow_abbrev=False)
    _add_campaign_flags(verify)
    verify.set_defaults(handler=cmd_verify)

    constants = sub.add_parser("constants", help="print K(m, M, p) and mu(m, M, f)", allow_abbrev=False)
    constants.add_argument("--m", type=float, required=True)
    constants.add_argument("--M", type=float, required=True)
    constants.add_argument("--p", type=_floats)
    constants.add_argument("--f", type=_strings, dest="functions")
    constants.add_argument("--format", choices=("text", "json"), default="text")
    constants.set_defaults(handler=cmd_constants)

    eq = sub.add_parser("equality-cases", help="replay the two-point equality instances", allow_abbrev=False)
    eq.add_argument("--seed", type=int)
    eq.add_argument("--format", choices=("text", "json"), default="text")
    eq.set_defaults(handler=cmd_equality_cases)

    tight = sub.add_parser("tightness", help="CSV of refined-chain gaps vs the classical slack", allow_abbrev=False)
    _add_campaign_flags(tight)
    tight.set_defaults(handler=cmd_tightness)
    return parser


_NUMBER_LIST = re.compile(r"^-?[\d.]+(?:[eE][-+]?\d+)?(?:,-?[\d.]+(?:[eE][-+]?\d+)?)*$")


def _attach_negative_lists(argv: list[str]) -> list[str]:
    # argparse reads "-1,-2" as an option string; glue it to its flag instead
    out, i = [], 0
    while i < len(argv):
        if argv[i] in ("--p", "--r") and i + 1 < len(argv) and _NUMBER_LIST.match(argv[i + 1]):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_lists(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.handler(args)
    except (ConfigError, DomainError) as exc:
        print(f"kantorovich: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # remaining ValueErrors come from argument values (e.g. m >= M)
        print(f"kantorovich: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
