"""Command-line front end: ``spin7 <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or domain
failure.  CSV files carry one header row; floats are written with 17
significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import acceptance
from . import closed_form_solutions as cf
from . import harmonic_forms as hf
from .gradient_flow import FlowState, integrate_flow, trajectory_diagnostics
from .metric_families import FAMILIES, FamilyDomainError, MetricFamily, sample

OUT_DIR_ENV = "SPIN7_OUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

VERIFY_CRITERIA = {
    "superpotential": [1],
    "ricci": [2, 3],
    "holonomy": [7],
    "cayley": [7, 8],
}

# option -> default; None means "not given" so a config file may fill it
DEFAULTS = {
    "family": None,
    "k": None,
    "kappa": None,
    "branch": None,
    "scale": 1.0,
    "r_min": None,
    "r_max": None,
    "n": 50,
    "t_end": 10.0,
    "tol": 1e-8,
    "rtol": 1e-10,
    "a": None,
    "b": None,
    "c": None,
    "duality": -1,
    "z_min": 0.05,
    "z_max": 0.95,
    "v_min": -4.0,
    "v_max": 4.0,
    "nz": 10,
    "nv": 9,
    "out": None,
    "json": False,
    "inject_sign_flip": False,
    "only": None,
}


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    def __init__(self, message: str, partial: Optional[str] = None):
        super().__init__(message)
        self.partial = partial


@dataclass
class RunConfig:
    command: str
    target: Optional[str] = None
    options: Dict[str, object] = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# output

def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _resolve(out: Optional[str]) -> Optional[Path]:
    if out is None:
        return None
    path = Path(out)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def emit(text: str, cfg: RunConfig, suffix: str = "") -> None:
    path = _resolve(cfg.out)
    if path is None:
        sys.stdout.write(text)
        return
    if suffix:
        path = path.with_name(path.stem + suffix + path.suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------------------
# commands

def _family(cfg: RunConfig) -> MetricFamily:
    if cfg.family is None:
        raise UsageError("--family is required")
    try:
        return MetricFamily(cfg.family, cfg.scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_flow(cfg: RunConfig) -> int:
    given = [cfg.a, cfg.b, cfg.c]
    if any(v is not None for v in given):
        if any(v is None for v in given):
            raise UsageError("give all of --a, --b, --c")
        a, b, c = given
    else:
        fam = _family(cfg)
        r0 = cfg.r_min if cfg.r_min is not None else fam.r_bolt + 0.5 * fam.scale
        if r0 <= fam.r_bolt:
            raise UsageError(f"--r-min must exceed the bolt radius {fam.r_bolt}")
        s = sample(fam, r0, order=1)
        a, b, c = (float(v) for v in s.triad.values)
    if cfg.t_end <= 0:
        raise UsageError("--t-end must be positive")
    if a == 0 or c == 0:
        raise UsageError("initial data must have a, c nonzero")
    traj = integrate_flow(FlowState(0.0, a, b, c), cfg.t_end, tol=cfg.rtol)
    ric, el, tv = trajectory_diagnostics(traj)
    rows = zip(traj.t, traj.a, traj.b, traj.c, ric, el, tv)
    text = to_csv(["t", "a", "b", "c", "ricci_residual", "el_residual", "TplusV"], rows)
    if traj.status != "ok":
        raise NumericalFailure(traj.message, text)
    emit(text, cfg)
    worst = max(float(ric.max()), float(el.max()), float(tv.max()))
    if worst >= cfg.tol:
        print(f"residual {worst:.3g} exceeds --tol {cfg.tol:g}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _params(cfg: RunConfig) -> cf.SolutionParams:
    if (cfg.k is None) == (cfg.kappa is None):
        raise UsageError("give exactly one of --k or --kappa")
    try:
        return cf.SolutionParams(k=cfg.k, kappa=cfg.kappa, branch=cfg.branch)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_classify(cfg: RunConfig) -> int:
    params = _params(cfg)
    result = cf.classify(params)
    emit(to_json(result.as_dict()), cfg)
    return EXIT_NUMERICAL if result.branch == "singular" else EXIT_OK


def cmd_metric(cfg: RunConfig) -> int:
    if cfg.n < 2:
        raise UsageError("--n must be at least 2")
    if cfg.k is not None or cfg.kappa is not None:
        params = _params(cfg)
        cls = cf.classify(params)
        if cls.branch not in ("B8minus", "B8plus"):
            raise NumericalFailure(f"no sampled metric for branch {cls.branch}")
        start = cls.z0 if params.k is not None else cls.y0
        lo = cfg.r_min if cfg.r_min is not None else start + 1e-3 * (1 - start)
        hi = cfg.r_max if cfg.r_max is not None else 1 - 1e-6
        if not start < lo < hi < 1:
            raise UsageError(f"coordinate range must satisfy {start:.6g} < min < max < 1")
        rows = []
        for u in np.linspace(lo, hi, cfg.n):
            m = cf.metric_from_zv(params, float(u))
            rows.append((u, m.g_uu, m.coef_R12, m.coef_R3, m.coef_S4, m.v))
        emit(to_csv(["u", "g_uu", "coef_R12", "coef_R3", "coef_S4", "v"], rows), cfg)
        return EXIT_OK
    fam = _family(cfg)
    lo = cfg.r_min if cfg.r_min is not None else fam.r_bolt
    hi = cfg.r_max if cfg.r_max is not None else fam.r_bolt + 10 * fam.scale
    if not fam.r_bolt <= lo < hi:
        raise UsageError(f"radial range must satisfy {fam.r_bolt} <= r-min < r-max")
    rows = []
    for r in np.linspace(lo, hi, cfg.n):
        try:
            s = sample(fam, float(r), order=1)
        except FamilyDomainError as exc:
            raise NumericalFailure(str(exc)) from None
        abc = [float(v) for v in s.triad.values] if s.triad is not None else [math.nan] * 3
        rows.append((s.r, s.g_rr, s.coef_R12, s.coef_R3, s.coef_S4, *abc))
    emit(to_csv(["r", "g_rr", "coef_R12", "coef_R3", "coef_S4", "a", "b", "c"], rows), cfg)
    return EXIT_OK


def _run_report(numbers: Optional[List[int]], cfg: RunConfig) -> int:
    rhs = acceptance.sign_flipped_rhs if cfg.inject_sign_flip else None
    results = acceptance.run_suite(rhs=rhs, only=numbers)
    failing = [r.number for r in results if not r.passed]
    if cfg.json:
        doc = {
            "passed": not failing,
            "failing": failing,
            "mutation": "sign_flip" if cfg.inject_sign_flip else None,
            "criteria": [r.as_dict() for r in results],
        }
        emit(to_json(doc), cfg)
    else:
        emit("".join(r.line() + "\n" for r in results), cfg)
    if failing:
        print("failing criteria: " + ", ".join(map(str, failing)), file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.target not in VERIFY_CRITERIA:
        raise UsageError(f"verify target must be one of {sorted(VERIFY_CRITERIA)}")
    return _run_report(VERIFY_CRITERIA[cfg.target], cfg)


def cmd_report(cfg: RunConfig) -> int:
    numbers = None
    if cfg.only:
        try:
            numbers = sorted({int(x) for x in str(cfg.only).split(",")})
        except ValueError:
            raise UsageError("--only takes a comma-separated list of criterion numbers") from None
        if not all(1 <= k <= len(acceptance.CRITERIA) for k in numbers):
            raise UsageError("criterion numbers run from 1 to 12")
    return _run_report(numbers, cfg)


def cmd_harmonic(cfg: RunConfig) -> int:
    family = cfg.family or "A8"
    label = int(cfg.duality)
    try:
        hf.closed_form_u(family, label, 10.0)
    except hf.NotNormalisableError as exc:
        raise NumericalFailure(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fam = MetricFamily(family)
    if cfg.out is not None:
        lo = cfg.r_min if cfg.r_min is not None else fam.r_bolt + 0.01
        hi = cfg.r_max if cfg.r_max is not None else fam.r_bolt + 20.0
        if not fam.r_bolt < lo < hi:
            raise UsageError(f"radial range must satisfy {fam.r_bolt} < r-min < r-max")
        rows = []
        for r in np.linspace(lo, hi, cfg.n):
            u = hf.closed_form_u(family, label, float(r))
            rows.append((r, *u.values, hf.norm_squared(u), hf.l2_integrand(family, label, float(r))))
        emit(to_csv(["r", "u1", "u2", "u3", "norm_squared", "l2_integrand"], rows), cfg, suffix="_profile")
    rep = hf.l2_integral(family, label)
    rank, relation = hf.linear_relation(family, label)
    doc = rep.as_dict()
    doc.update({
        "printed_label": label,
        "calibration_constant": hf.measure_calibration(),
        "sample_rank": rank,
        "linear_relation": [str(v) for v in relation] if relation else None,
        "inward_match": hf.match_closed_form(family, label),
    })
    text = to_json(doc)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        emit(text, cfg)
    return EXIT_OK


def _trajectories(n: int = 40) -> List[tuple]:
    """Representative curves of the four regular classes, in the (z, v) plane."""
    rows = []
    for name, k in (("B8minus", 0.5), ("B8minus", 2.0)):
        z0 = cf.bolt_z(k)
        for z in np.linspace(z0 + 1e-6, 0.99, n):
            rows.append((name, k, z, cf.v_of_z(k, z)))
    for name, kappa in (("B8plus", 0.0), ("B8plus", 1.0)):
        y0 = cf.bolt_y(kappa)
        for y in np.linspace(y0 + 1e-6, 0.99, n):
            z = 1.0 / y if y != 0 else math.inf
            rows.append((name, kappa, z, cf.v_of_y(kappa, y)))
    rows.append(("A8", 0.0, 1.0, -2.0))
    rows.append(("B8", 0.0, 1.0, 2.0))
    return rows


def cmd_phase_portrait(cfg: RunConfig) -> int:
    if cfg.nz < 1 or cfg.nv < 1:
        raise UsageError("--nz and --nv must be positive")
    if cfg.z_min > cfg.z_max or cfg.v_min > cfg.v_max:
        raise UsageError("grid bounds are reversed")
    zs = np.linspace(cfg.z_min, cfg.z_max, cfg.nz)
    vs = np.linspace(cfg.v_min, cfg.v_max, cfg.nv)
    if any(abs(z - s) < 1e-12 for z in zs for s in (-1.0, 0.0, 1.0)):
        raise UsageError("grid must avoid z in {-1, 0, 1}")
    rows = [(z, v, *cf.phase_field(z, v)) for z in zs for v in vs]
    emit(to_csv(["z", "v", "dz_dtau", "dv_dtau"], rows), cfg)
    if cfg.out is not None:
        emit(to_csv(["class", "parameter", "z", "v"], _trajectories()), cfg, suffix="_trajectories")
    return EXIT_OK


COMMANDS = {
    "flow": cmd_flow,
    "classify": cmd_classify,
    "metric": cmd_metric,
    "verify": cmd_verify,
    "harmonic": cmd_harmonic,
    "phase-portrait": cmd_phase_portrait,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# parsing

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--k", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--branch", choices=cf.BRANCHES)
    g.add_argument("--scale", type=float)
    g.add_argument("--r-min", type=float)
    g.add_argument("--r-max", type=float)
    g.add_argument("--n", type=int, help="number of sample points")
    g.add_argument("--tol", type=float, help="residual threshold")
    g.add_argument("--out", help=f"output file (relative paths resolve against ${OUT_DIR_ENV})")
    g.add_argument("--json", action="store_true", default=None)
    g.add_argument("--config", help="key = value file; command-line flags win")

    parser = _Parser(prog="spin7", description="Cohomogeneity-one Spin(7) metrics: flows, closed forms, checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("flow", parents=[common], help="integrate the first-order system to CSV")
    for name in ("a", "b", "c"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--rtol", type=float, help="integrator relative tolerance")

    sub.add_parser("classify", parents=[common], help="branch and bolt data for --k or --kappa")
    sub.add_parser("metric", parents=[common], help="metric coefficients to CSV")

    p = sub.add_parser("verify", parents=[common], help="run the checks for one property")
    p.add_argument("target", choices=sorted(VERIFY_CRITERIA))
    p.add_argument("--inject-sign-flip", action="store_true", default=None)

    p = sub.add_parser("harmonic", parents=[common], help="L2 harmonic 4-form data")
    p.add_argument("--duality", type=int, choices=(-1, 1), help="printed duality label")

    p = sub.add_parser("phase-portrait", parents=[common], help="(z, v) vector field to CSV")
    for name in ("z-min", "z-max", "v-min", "v-max"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--nz", type=int)
    p.add_argument("--nv", type=int)

    p = sub.add_parser("report", parents=[common], help="full acceptance dossier")
    p.add_argument("--inject-sign-flip", action="store_true", default=None)
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def _read_config(path: str) -> Dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, text: str):
    default = DEFAULTS.get(key)
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float) or key in ("k", "kappa", "r_min", "r_max", "a", "b", "c"):
        return float(text)
    return text


def make_config(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(argv)
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "target", "config")}
    options = dict(DEFAULTS)
    if args.config:
        for key, text in _read_config(args.config).items():
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                options[key] = _coerce(key, text)
            except ValueError:
                raise UsageError(f"bad value for {key}: {text!r}") from None
    options.update(given)
    for key in ("tol", "rtol", "scale"):
        if not options[key] > 0:
            raise UsageError(f"--{key.replace('_', '-')} must be positive")
    return RunConfig(args.command, getattr(args, "target", None), options)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = make_config(argv)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"spin7: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        if exc.partial:
            try:
                emit(exc.partial, cfg)
            except OSError:
                pass
        print(f"spin7: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (cf.SolutionDomainError, cf.SingularTrajectoryError, FamilyDomainError) as exc:
        print(f"spin7: domain error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
