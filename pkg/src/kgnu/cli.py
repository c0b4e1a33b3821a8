"""Command-line interface: ``kgnu {potential,spectrum,sweep,verify,wavefunction}``.

Output is CSV (``#`` metadata lines, ``%.17g`` floats, LF endings) or JSON
(``"schema": "kgnu/1"``).  Exit codes: 0 success, 1 numerical or physical
failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import DomainViolation, InvalidVariantParams, KGNUError, NoRoot, NotPhysical, PoleAtX
from .kg_core import KGProblem, energy_levels, wavefunction
from .oracle import DEFAULT_ORACLE, OracleConfig, kg_selfconsistent_level, oracle_eigenvector
from .qhyper import PotentialParams, potential_curve
from .variants import VariantKind, VariantSpec, pt_rosen_morse_levels, to_general

SCHEMA = "kgnu/1"
CONVENTION_NOTE = (
    "reduced symbols use eps2=-V1bar/(q alpha^2), gam2=-V2bar/alpha^2, "
    "beta2=-Ebar^2/alpha^2 (re-derived; the originally printed q-powers differ)"
)
DEFAULT_SWEEP_Q = (1.0, 0.5, -0.5, -1.0)


class UsageError(Exception):
    """Bad configuration detected after argument parsing (exit code 2)."""


class NumericalFailure(Exception):
    """A requested physical quantity does not exist (exit code 1)."""


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, complex):
        return "%.17g%+.17gj" % (v.real + 0.0, v.imag + 0.0)
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return ""
        return "%.17g" % (v + 0.0)  # folds -0 into 0
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else v
    return v


def render(table: Table, fmt_name: str) -> str:
    meta = {"version": __version__, "convention_erratum": True,
            "convention": CONVENTION_NOTE, **table.meta}
    if fmt_name == "json":
        head = {
            "schema": SCHEMA,
            "metadata": {k: _json_value(v) if not isinstance(v, dict) else
                         {kk: _json_value(vv) for kk, vv in v.items()} for k, v in meta.items()},
            "columns": table.columns,
        }
        # one row per line keeps large tables diffable
        text = json.dumps(head, indent=2, allow_nan=False)[:-2]
        rows = ",\n".join(
            "    " + json.dumps([_json_value(v) for v in row], allow_nan=False) for row in table.rows
        )
        body = f"[\n{rows}\n  ]" if rows else "[]"
        return f'{text},\n  "rows": {body}\n}}\n'
    lines = []
    for k, v in meta.items():
        if isinstance(v, dict):
            v = " ".join(f"{kk}={fmt(vv)}" for kk, vv in v.items())
        else:
            v = fmt(v)
        lines.append(f"# {k}: {v}")
    lines.append(",".join(table.columns))
    lines.extend(",".join(fmt(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def emit(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def thread_count() -> int:
    raw = os.environ.get("KGNU_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"KGNU_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise UsageError("KGNU_THREADS must be at least 1")
    return n


def ordered_map(fn, items):
    """``map`` over a thread pool capped by KGNU_THREADS, results in input order."""
    items = list(items)
    workers = min(thread_count(), max(len(items), 1))
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- parameters

def _qs(args) -> list:
    return [1.0] if args.q is None else list(args.q)


def _potential(args, q=None) -> PotentialParams:
    try:
        return PotentialParams(args.v1, args.v2, args.alpha, _qs(args)[0] if q is None else q)
    except ValueError as exc:
        raise UsageError(str(exc))


def _single_q(args) -> float:
    qs = _qs(args)
    if len(qs) != 1:
        raise UsageError("this command takes a single --q value")
    return qs[0]


def _problem(args) -> KGProblem:
    q = _single_q(args)
    if q == 0:
        raise UsageError(
            "q = 0 is rejected: the energy equation divides by q (exponential-potential limit); "
            "see the convention note on the reduced symbols"
        )
    try:
        return KGProblem(args.mass, _potential(args, q))
    except ValueError as exc:
        raise UsageError(str(exc))


def _variant(args) -> Optional[VariantSpec]:
    if args.variant == "general":
        return None
    kind = VariantKind(args.variant)
    fixed_q = kind in (VariantKind.ROSEN_MORSE_WELL, VariantKind.ECKART)
    try:
        # fixed-q kinds fill in their own q; an explicit conflicting --q is rejected
        return VariantSpec(kind, args.v1, args.v2, args.alpha,
                           q=(None if args.q is None else _single_q(args)) if fixed_q else _single_q(args),
                           theta=args.theta)
    except InvalidVariantParams as exc:
        raise UsageError(str(exc))


def _oracle_config(args) -> OracleConfig:
    cfg = DEFAULT_ORACLE
    kw = {}
    if getattr(args, "grid_points", None) is not None:
        kw["points"] = args.grid_points
    if getattr(args, "grid_half_width", None) is not None:
        kw["half_width_alpha"] = args.grid_half_width
    if getattr(args, "no_extrapolate", False):
        kw["extrapolate"] = False
    if kw.get("points", cfg.points) < 100:
        raise UsageError("--grid-points must be at least 100")
    if kw.get("half_width_alpha", cfg.half_width_alpha) <= 0:
        raise UsageError("--grid-half-width must be positive")
    return OracleConfig(**{**cfg.__dict__, **kw})


def _params_meta(args, **extra):
    d = {"mass": args.mass, "v1": args.v1, "v2": args.v2, "alpha": args.alpha}
    if hasattr(args, "q"):
        qs = _qs(args)
        d["q"] = " ".join(fmt(q) for q in qs) if len(qs) > 1 else qs[0]
    d.update(extra)
    return d


# ---------------------------------------------------------------- commands

def cmd_potential(args) -> Table:
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if not args.xmin < args.xmax:
        raise UsageError("--xmin must be smaller than --xmax")
    qs = _qs(args)
    long = len(qs) > 1 or args.long
    table = Table(["q", "x", "V"] if long else ["x", "V"])
    for q in qs:
        try:
            curve = potential_curve(_potential(args, q), args.xmin, args.xmax, args.points)
        except DomainViolation as exc:
            raise UsageError(str(exc))
        for x, v in curve:
            table.rows.append([q, x, v] if long else [x, v])
    table.meta["command"] = "potential"
    table.meta["params"] = _params_meta(args, xmin=args.xmin, xmax=args.xmax, points=args.points)
    return table


def _spectrum_states(args):
    v = _variant(args)
    if v is not None and v.kind is VariantKind.PT_ECKART:
        raise UsageError("no energy equation is available for the PT Eckart potential")
    if v is not None and v.kind is VariantKind.PT_ROSEN_MORSE:
        return pt_rosen_morse_levels(v, args.mass, args.n_max)
    if v is not None:
        p = KGProblem(args.mass, to_general(v))
    else:
        p = _problem(args)
    return energy_levels(p, args.n_max)


def cmd_spectrum(args) -> Table:
    if args.n_max is not None and args.n_max < 0:
        raise UsageError("--n-max must be non-negative")
    v = _variant(args)
    if v is not None:
        args.q = [v.q] if v.q is not None else None
    states = _spectrum_states(args)
    table = Table(["n", "E", "Ebar2", "mu", "nu", "physical", "reasons"])
    for s in states:
        if args.physical_only and not s.physical:
            continue
        table.rows.append([s.n, s.energy, s.ebar2, s.mu, s.nu, s.physical, ";".join(s.reasons)])
    table.meta["command"] = "spectrum"
    table.meta["params"] = _params_meta(args, variant=args.variant, n_max=args.n_max)
    return table


def _sweep_values(args):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.steps == 1:
        return [args.vfrom]
    if args.vfrom == args.vto:
        raise UsageError("--from and --to must differ when --steps > 1")
    return list(np.linspace(args.vfrom, args.vto, args.steps))


def cmd_sweep(args) -> Table:
    values = _sweep_values(args)
    if any(q == 0 for q in args.q):
        raise UsageError("q = 0 is not allowed in a sweep")
    if any(n < 0 for n in args.n):
        raise UsageError("level indices must be non-negative")
    n_top = max(args.n)
    jobs = [(q, v) for q in args.q for v in values]

    def run(job):
        q, v = job
        p = KGProblem(args.mass, PotentialParams(v, args.v2_ratio * v, args.alpha, q))
        states = energy_levels(p, n_top) if p.domain.kind == "full" else energy_levels(p)
        return [s for s in states if s.physical]

    results = ordered_map(run, jobs)
    table = Table(["q", "n", "V", "E"])
    for q in args.q:
        for n in args.n:
            for (jq, v), phys in zip(jobs, results):
                if jq != q:
                    continue
                hits = [s.energy for s in phys if s.n == n]
                for e in hits or [None]:
                    table.rows.append([q, n, v, e])
    table.meta["command"] = "sweep"
    table.meta["params"] = {
        "mass": args.mass, "alpha": args.alpha, "q": " ".join(fmt(q) for q in args.q),
        "n": " ".join(str(n) for n in args.n), "from": args.vfrom, "to": args.vto,
        "steps": args.steps, "v2_rule": f"V2 = {fmt(args.v2_ratio)} * V1",
    }
    return table


BUILTIN_SUITE = tuple(
    (q, v1, v2)
    for q in (1.0, 0.5, -1.0)
    for v1 in (0.5, 1.0, 2.0)
    for v2 in (0.0, -v1 / 3.0)
)


def verify_cases(mass: float, alpha: float, cases, config: OracleConfig):
    """``(label, n, E_closed, E_oracle)`` for every physical closed-form level."""
    work = []
    for q, v1, v2 in cases:
        p = KGProblem(mass, PotentialParams(v1, v2, alpha, q))
        label = f"q={fmt(q)}|v1={fmt(v1)}|v2={fmt(v2)}"
        for s in energy_levels(p):
            if s.physical:
                work.append((label, p, s))

    def run(item):
        label, p, s = item
        try:
            e = kg_selfconsistent_level(p, s.n, near=s.energy, config=config).energy
        except NoRoot:
            e = None
        return label, s.n, s.energy, e

    return ordered_map(run, work)


def cmd_verify(args) -> Table:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    config = _oracle_config(args)
    if args.v1 is None:
        cases = BUILTIN_SUITE
    else:
        q = _single_q(args)
        if q == 0:
            raise UsageError("q = 0 is rejected: the energy equation divides by q")
        cases = ((q, args.v1, args.v2),)
    rows = verify_cases(args.mass, args.alpha, cases, config)
    table = Table(["case", "n", "E_closed", "E_oracle", "gap"])
    max_gap = 0.0
    for label, n, ec, eo in rows:
        gap = math.inf if eo is None else abs(eo - ec)
        max_gap = max(max_gap, gap)
        table.rows.append([label, n, ec, eo, gap if eo is not None else None])
    table.meta["command"] = "verify"
    table.meta["params"] = {
        "mass": args.mass, "alpha": args.alpha,
        "suite": "builtin" if args.v1 is None else "user",
        "tol": args.tol, "grid_points": config.points,
        "grid_half_width_alpha": config.half_width_alpha, "extrapolate": config.extrapolate,
    }
    table.meta["cases"] = len(rows)
    table.meta["max_gap"] = max_gap
    table.meta["passed"] = max_gap <= args.tol
    return table


def cmd_wavefunction(args) -> Table:
    p = _problem(args)
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    states = [s for s in energy_levels(p, args.n if p.domain.kind == "full" else None) if s.n == args.n]
    physical = [s for s in states if s.physical]
    if not physical:
        why = "; ".join(f"E={fmt(s.energy)}: {','.join(s.reasons)}" for s in states) or "no root of the energy equation"
        raise NumericalFailure(f"no physical state with n={args.n} ({why})")
    if args.root >= len(physical) or args.root < 0:
        raise NumericalFailure(f"n={args.n} has {len(physical)} physical root(s); --root {args.root} is out of range")
    state = physical[args.root]
    alpha = p.potential.alpha
    dom = p.domain
    if dom.kind == "full":
        xmin = -10.0 / alpha if args.xmin is None else args.xmin
        xmax = 10.0 / alpha if args.xmax is None else args.xmax
    else:
        xmin = dom.start + 1e-6 / alpha if args.xmin is None else args.xmin
        xmax = dom.start + 20.0 / alpha if args.xmax is None else args.xmax
        if xmin <= dom.start:
            raise UsageError(f"--xmin must lie right of the pole at x0 = {fmt(dom.start)}")
    if not xmin < xmax:
        raise UsageError("--xmin must be smaller than --xmax")
    xs = np.linspace(xmin, xmax, args.points)
    try:
        wf = wavefunction(p, state)
    except NotPhysical as exc:
        raise NumericalFailure(str(exc))
    psi = wf(xs)
    columns = ["x", "psi"]
    extra = None
    if args.oracle:
        config = _oracle_config(args)
        try:
            res = kg_selfconsistent_level(p, state.n, near=state.energy, config=config)
        except NoRoot as exc:
            raise NumericalFailure(str(exc))
        gx, gpsi = oracle_eigenvector(p, state.n, res.energy, config=config)
        extra = np.interp(xs, gx, gpsi, left=0.0, right=0.0)
        if np.dot(extra, psi) < 0:
            extra = -extra
        columns.append("psi_oracle")
    table = Table(columns)
    for i, x in enumerate(xs):
        row = [x, psi[i]]
        if extra is not None:
            row.append(extra[i])
        table.rows.append(row)
    table.meta["command"] = "wavefunction"
    table.meta["params"] = _params_meta(args, n=args.n, root=args.root)
    table.meta["state"] = {"E": state.energy, "mu": state.mu, "nu": state.nu,
                           "norm_constant": wf.norm_constant}
    return table


COMMANDS = {
    "potential": cmd_potential,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "wavefunction": cmd_wavefunction,
}


# ---------------------------------------------------------------- parser

def _common(sp, v1_required=True, with_q=True):
    sp.add_argument("--mass", type=float, default=1.0)
    if v1_required:
        sp.add_argument("--v1", type=float, default=1.0)
    else:
        sp.add_argument("--v1", type=float, default=None,
                        help="run a single user case instead of the built-in suite")
    sp.add_argument("--v2", type=float, default=0.0)
    sp.add_argument("--alpha", type=float, default=1.0)
    if with_q:
        sp.add_argument("--q", type=float, nargs="+", default=None, help="shape parameter(s), default 1")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", default=None, help="output path (default stdout)")


def _grid_flags(sp):
    sp.add_argument("--grid-points", type=int, default=None)
    sp.add_argument("--grid-half-width", type=float, default=None, help="in units of 1/alpha")
    sp.add_argument("--no-extrapolate", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgnu", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kgnu {__version__}")
    parser.add_argument("--config", default=None, help="flat key=value file mirroring the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("potential", help="sample V(x)")
    _common(sp)
    sp.add_argument("--xmin", type=float, default=-5.0)
    sp.add_argument("--xmax", type=float, default=5.0)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--long", action="store_true", help="long format with a q column")

    sp = sub.add_parser("spectrum", help="closed-form levels")
    _common(sp)
    sp.add_argument("--n-max", type=int, default=None)
    sp.add_argument("--variant", default="general",
                    choices=["general"] + [k.value for k in VariantKind])
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument("--physical-only", action="store_true")

    sp = sub.add_parser("sweep", help="levels against the coupling V1")
    sp.add_argument("--mass", type=float, default=1.0)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--q", type=float, nargs="+", default=list(DEFAULT_SWEEP_Q))
    sp.add_argument("--n", type=int, nargs="+", default=[0])
    sp.add_argument("--from", dest="vfrom", type=float, default=0.5)
    sp.add_argument("--to", dest="vto", type=float, default=5.0)
    sp.add_argument("--steps", type=int, default=10, help="number of sweep points")
    sp.add_argument("--v2-ratio", type=float, default=-1.0 / 3.0, help="coupling rule V2 = ratio * V1")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", default=None)

    sp = sub.add_parser("verify", help="closed form against the finite-difference oracle")
    _common(sp, v1_required=False)
    sp.add_argument("--tol", type=float, default=1e-4)
    _grid_flags(sp)

    sp = sub.add_parser("wavefunction", help="normalized psi(x)")
    _common(sp)
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--root", type=int, default=0, help="index among physical roots of this n")
    sp.add_argument("--xmin", type=float, default=None)
    sp.add_argument("--xmax", type=float, default=None)
    sp.add_argument("--points", type=int, default=801)
    sp.add_argument("--oracle", action="store_true", help="add the finite-difference eigenvector")
    _grid_flags(sp)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(sub: argparse.ArgumentParser, cfg: dict):
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    defaults = {}
    for key, value in cfg.items():
        if key not in actions:
            raise UsageError(f"unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} needs a boolean")
            defaults[key] = low in ("true", "1", "yes")
            continue
        conv = act.type or str
        try:
            if act.nargs in ("+", "*"):
                defaults[key] = [conv(tok) for tok in value.replace(",", " ").split()]
            else:
                defaults[key] = conv(value)
        except ValueError:
            raise UsageError(f"config key {key!r}: cannot parse {value!r}")
        if act.choices is not None and defaults[key] not in act.choices:
            raise UsageError(f"config key {key!r}: {value!r} is not one of {list(act.choices)}")
    sub.set_defaults(**defaults)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        known, rest = pre.parse_known_args(argv)
        if known.config is not None:
            try:
                cfg = read_config(known.config)
            except OSError as exc:
                raise UsageError(f"cannot read config: {exc}")
            command = next((a for a in rest if a in COMMANDS), None)
            if command is None:
                parser.error("a command is required")
            _apply_config(_subparser(parser, command), cfg)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"kgnu: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        table = COMMANDS[args.command](args)
        emit(render(table, args.format), args.output)
    except UsageError as exc:
        print(f"kgnu: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, NotPhysical) as exc:
        print(f"kgnu: {exc}", file=sys.stderr)
        return 1
    except (DomainViolation, InvalidVariantParams, PoleAtX) as exc:
        print(f"kgnu: error: {exc}", file=sys.stderr)
        return 2
    except (KGNUError, ArithmeticError) as exc:
        print(f"kgnu: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"kgnu: error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify" and not table.meta["passed"]:
        print(f"kgnu: max gap {fmt(table.meta['max_gap'])} exceeds tolerance {fmt(args.tol)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
