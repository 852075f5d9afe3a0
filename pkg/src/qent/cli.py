"""Command-line front end.

Examples::

    qent classical --x1 1/4 --x2 1/4
    qent measure --stats boson --L 256 --x1 0.25 --x2 0.25 --y 0 --K "1,2"
    qent sweep --stats fermion --K 1,2 --L 64 --x1 1/8 --x2 1/4 --param y --values 0:1/2:1/64
    qent extrapolate --stats boson --K 1,2 --x1 1/8 --x2 1/4 --y 1/8
    qent additivity --stats fermion --x1 0.25 --y 0 --K1 1 --K2 L/4 --ladder 64,128,256
    qent oracle-check --suite small

Data goes to ``--output`` (or stdout); a short summary goes to stderr.
Exit status is 0 on success, 1 when a check fails or a computed value breaks
an invariant, and 2 for invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .combinatorics import MomentumSpec, MultisetError
from .linalg import LinalgError
from .measures import InvariantViolation, MEASURE_NAMES, compute_measures
from .model import Geometry, GeometryError, Statistics
from .oracle import oracle_suite, run_case
from .statebuilder import ClassicalState, build_classical_density, build_density
from .sweeps import (
    DEFAULT_LADDER,
    GeometryTemplate,
    StateSpec,
    SweepError,
    SweepRow,
    additivity_report,
    _geometries,
    additivity_to_dict,
    commensurate_ladder,
    dumps_json,
    extrapolate_L,
    fmt,
    measure_record,
    row_record,
    sweep,
    sweep_to_csv,
    sweep_to_dict,
)

COMMANDS = ("measure", "classical", "sweep", "extrapolate", "additivity", "oracle-check")


@dataclass
class RunConfig:
    command: str
    stats: Statistics | None = None
    momenta: str | None = None
    parts: list[str] = field(default_factory=list)
    geometry: Geometry | None = None
    template: GeometryTemplate | None = None
    parameter: str | None = None
    values: list = field(default_factory=list)
    x2_values: list[Fraction] = field(default_factory=list)
    ladder: list[int] = field(default_factory=list)
    suite: str = "small"
    tol: float = 1e-8
    bound: float = 0.05
    negativity: str = "auto"
    output: str | None = None
    format: str = "json"


def _ratio(text: str) -> Fraction:
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a ratio: {text!r}") from None
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"ratio {text!r} outside [0, 1]")
    return value


def _int_list(text: str) -> list[int]:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"chain lengths must be positive: {text!r}")
    return out


def parse_values(text: str) -> list[Fraction]:
    """``"a,b,c"`` or the inclusive range ``"start:stop:step"``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (Fraction(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            out, v = [], start
            while v <= stop:
                out.append(v)
                v += step
            return out
        return [Fraction(v) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qent",
        description="Reflected entropy, mutual information and logarithmic negativity "
        "of two intervals in quasiparticle excited states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def geometry_flags(p):
        p.add_argument("--L", type=int, required=False, help="number of sites")
        p.add_argument("--ell1", type=int, help="sites in A")
        p.add_argument("--d", type=int, help="sites between A and B")
        p.add_argument("--ell2", type=int, help="sites in B")
        p.add_argument("--x1", type=_ratio, help="ell1 / L")
        p.add_argument("--x2", type=_ratio, help="ell2 / L")
        p.add_argument("--y", type=_ratio, help="d / L")

    def output_flags(p, default_format="json"):
        p.add_argument("--output", "-o", help="write data here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=default_format)

    def state_flags(p, with_K=True):
        p.add_argument("--stats", required=True, help="classical, boson or fermion")
        if with_K:
            p.add_argument("--K", required=True, help='momenta, e.g. "1^2,3" or "1,L/4"')
        p.add_argument(
            "--negativity",
            choices=("auto", "standard", "fermionic"),
            default="auto",
            help="partial transpose; auto uses the fermionic one for fermions",
        )

    p = sub.add_parser("measure", help="measures for one state and geometry")
    state_flags(p)
    geometry_flags(p)
    output_flags(p)

    p = sub.add_parser("classical", help="measures of classical particles")
    p.add_argument("--x1", type=_ratio, required=True)
    p.add_argument("--x2", type=_ratio, required=True)
    p.add_argument("--K", default="1", help='particle labels with multiplicities, default "1"')
    output_flags(p)

    p = sub.add_parser("sweep", help="measures along x2, y or L")
    state_flags(p)
    geometry_flags(p)
    p.add_argument("--param", required=True, choices=("x2", "y", "L"))
    p.add_argument("--values", required=True, type=parse_values, help='"a,b,c" or "start:stop:step"')
    output_flags(p, "csv")

    p = sub.add_parser("extrapolate", help="fit measures in 1/L and report L -> infinity")
    state_flags(p)
    geometry_flags(p)
    p.add_argument("--ladder", type=_int_list, default=list(DEFAULT_LADDER))
    output_flags(p)

    p = sub.add_parser("additivity", help="compare a union state with the sum of its parts")
    state_flags(p, with_K=False)
    p.add_argument("--K1", required=True)
    p.add_argument("--K2", required=True)
    p.add_argument("--K3")
    p.add_argument("--x1", type=_ratio, required=True)
    p.add_argument("--x2", type=parse_values, default=[Fraction(1, 8), Fraction(1, 4), Fraction(3, 8)])
    p.add_argument("--y", type=_ratio, default=Fraction(0))
    p.add_argument("--ladder", type=_int_list, default=[64, 128, 256])
    p.add_argument("--bound", type=float, default=0.05, help="largest allowed deviation at the top of the ladder")
    output_flags(p, "csv")

    p = sub.add_parser("oracle-check", help="compare the pipeline with exact diagonalization")
    p.add_argument("--suite", choices=("small", "tiny"), default="small")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument(
        "--negativity", choices=("auto", "standard", "fermionic"), default="auto"
    )
    output_flags(p, "csv")
    return parser


def _geometry_from(ns, parser) -> Geometry:
    if ns.L is None:
        parser.error("--L is required")
    explicit = [ns.ell1, ns.d, ns.ell2]
    ratios = [ns.x1, ns.x2, ns.y]
    try:
        if any(v is not None for v in explicit):
            if any(v is not None for v in ratios):
                parser.error("give either --ell1/--d/--ell2 or --x1/--x2/--y, not both")
            if ns.ell1 is None or ns.ell2 is None:
                parser.error("--ell1 and --ell2 are required with explicit site counts")
            return Geometry(ns.L, ns.ell1, ns.d or 0, ns.ell2)
        if ns.x1 is None or ns.x2 is None:
            parser.error("--x1 and --x2 (or --ell1 and --ell2) are required")
        return Geometry.from_ratios(ns.L, ns.x1, ns.x2, ns.y or 0)
    except GeometryError as exc:
        parser.error(str(exc))


def _template_from(ns, parser, need_L: bool) -> GeometryTemplate:
    if any(getattr(ns, k, None) is not None for k in ("ell1", "d", "ell2")):
        if ns.L is None:
            parser.error("--L is required with explicit site counts")
        g = _geometry_from(ns, parser)
        return GeometryTemplate(Fraction(g.ell1, g.L), Fraction(g.ell2, g.L), Fraction(g.d, g.L), g.L)
    if ns.x1 is None or ns.x2 is None:
        parser.error("--x1 and --x2 are required")
    if need_L and ns.L is None:
        parser.error("--L is required")
    return GeometryTemplate(ns.x1, ns.x2, ns.y or Fraction(0), ns.L)


def _stats(text: str, parser) -> Statistics:
    try:
        return Statistics.parse(text)
    except ValueError as exc:
        parser.error(str(exc))


def _check_momenta(text: str, stats: Statistics, parser, L: int | None = None) -> str:
    try:
        spec = MomentumSpec.parse(text)
        if not spec.terms:
            parser.error("--K must name at least one momentum")
        if stats is Statistics.FERMIONIC:
            if any(t.multiplicity > 1 for t in spec.terms):
                parser.error(f"--K {text!r}: fermions cannot share a momentum (Pauli exclusion)")
            if L is not None or not spec.depends_on_L:
                K = spec.resolve(L)
                if not K.is_fermionic:
                    parser.error(f"--K {text!r}: fermions cannot share a momentum (Pauli exclusion)")
        elif L is not None or not spec.depends_on_L:
            spec.resolve(L)
    except MultisetError as exc:
        parser.error(f"--K {text!r}: {exc}")
    return text


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(command=ns.command, output=ns.output, format=ns.format)
    if hasattr(ns, "negativity"):
        cfg.negativity = ns.negativity

    if ns.command == "classical":
        if ns.x1 + ns.x2 > 1:
            parser.error("--x1 + --x2 must not exceed 1")
        cfg.stats = Statistics.CLASSICAL
        cfg.momenta = _check_momenta(ns.K, Statistics.CLASSICAL, parser)
        cfg.template = GeometryTemplate(ns.x1, ns.x2)
    elif ns.command == "measure":
        cfg.stats = _stats(ns.stats, parser)
        cfg.geometry = _geometry_from(ns, parser)
        cfg.momenta = _check_momenta(ns.K, cfg.stats, parser, cfg.geometry.L)
    elif ns.command in ("sweep", "extrapolate"):
        cfg.stats = _stats(ns.stats, parser)
        if ns.command == "sweep":
            cfg.parameter = ns.param
            cfg.values = ns.values
            if not cfg.values:
                parser.error("--values is empty")
            if ns.param == "L":
                cfg.values = [int(v) for v in cfg.values]
            cfg.template = _template_from(ns, parser, need_L=ns.param != "L")
        else:
            cfg.ladder = ns.ladder
            cfg.template = _template_from(ns, parser, need_L=False)
        cfg.momenta = _check_momenta(ns.K, cfg.stats, parser, cfg.template.L)
        try:
            state = StateSpec.parse(cfg.stats, cfg.momenta)
            if ns.command == "sweep":
                for _, g in _geometries(cfg.template, cfg.parameter, cfg.values):
                    state.resolve(g.L)
            elif len(commensurate_ladder(state, cfg.template, cfg.ladder)) < 3:
                parser.error(f"--ladder {ns.ladder}: fewer than 3 chain lengths give integer site counts and momenta")
        except (SweepError, MultisetError) as exc:
            parser.error(f"--values: {exc}" if ns.command == "sweep" else str(exc))
    elif ns.command == "additivity":
        cfg.stats = _stats(ns.stats, parser)
        cfg.parts = [_check_momenta(k, cfg.stats, parser) for k in (ns.K1, ns.K2, ns.K3) if k]
        cfg.x2_values = list(ns.x2)
        cfg.template = GeometryTemplate(ns.x1, cfg.x2_values[0], ns.y)
        cfg.ladder = ns.ladder
        cfg.bound = ns.bound
        if cfg.stats is Statistics.CLASSICAL:
            parser.error("additivity compares bosonic or fermionic states")
        for x2 in cfg.x2_values:
            for L in cfg.ladder:
                try:
                    GeometryTemplate(ns.x1, x2, ns.y).at(L=L)
                    seen: set[int] = set()
                    for k in cfg.parts:
                        K = StateSpec.parse(cfg.stats, k).resolve(L)
                        if seen & set(K.counts):
                            raise MultisetError(f"momentum groups overlap: {sorted(seen & set(K.counts))}")
                        seen |= set(K.counts)
                except (GeometryError, MultisetError) as exc:
                    parser.error(f"x2={x2}, L={L}: {exc}")
    elif ns.command == "oracle-check":
        cfg.suite = ns.suite
        cfg.tol = ns.tol
    return cfg


# ---------------------------------------------------------------------------


def _records_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _record_csv(rec: dict) -> str:
    return _records_to_csv(list(rec), [[fmt(v) if isinstance(v, float) else v for v in rec.values()]])


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(line: str) -> None:
    print(line, file=sys.stderr)


def _run_measure(cfg: RunConfig) -> int:
    state = StateSpec.parse(cfg.stats, cfg.momenta)
    K = state.resolve(cfg.geometry.L)
    m = compute_measures(build_density(K, cfg.geometry, cfg.stats), negativity=cfg.negativity)
    rec = row_record(SweepRow(None, cfg.geometry, K, m))
    _emit(cfg, dumps_json(rec) if cfg.format == "json" else _record_csv(rec))
    _summary(f"{cfg.stats.value} K={K} {cfg.geometry}: S_R={fmt(m.S_R)} I={fmt(m.I)} E_N={fmt(m.E_N)}")
    return 0


def _run_classical(cfg: RunConfig) -> int:
    K = MomentumSpec.parse(cfg.momenta).resolve(None)
    x1, x2 = float(cfg.template.x1), float(cfg.template.x2)
    m = compute_measures(build_classical_density([ClassicalState(r, x1, x2) for _, r in K.entries]))
    rec = measure_record(m)
    _emit(cfg, dumps_json(rec) if cfg.format == "json" else _record_csv(rec))
    _summary(f"classical K={K} x1={cfg.template.x1} x2={cfg.template.x2}: gap={fmt(m.markov_gap)}")
    return 0


def _run_sweep(cfg: RunConfig, extrapolate: bool) -> int:
    if cfg.negativity != "auto":
        raise SweepError("--negativity other than auto is only supported by measure and oracle-check")
    state = StateSpec.parse(cfg.stats, cfg.momenta)
    if extrapolate:
        result = extrapolate_L(state, cfg.template, cfg.ladder)
    else:
        result = sweep(state, cfg.template, cfg.parameter, cfg.values)
    _emit(cfg, sweep_to_csv(result) if cfg.format == "csv" else dumps_json(sweep_to_dict(result)))
    if result.fit is not None:
        x = result.extrapolated
        _summary(
            f"L -> inf: S_R={fmt(x.S_R)} I={fmt(x.I)} E_N={fmt(x.E_N)} "
            f"(max residual {result.fit.max_residual:.2e})"
        )
    else:
        _summary(f"{len(result.rows)} points over {result.parameter}")
    return 0


def _run_additivity(cfg: RunConfig) -> int:
    reports = []
    for x2 in cfg.x2_values:
        t = GeometryTemplate(cfg.template.x1, x2, cfg.template.y)
        reports.append((x2, additivity_report(cfg.parts, cfg.stats, t, cfg.ladder, cfg.bound)))
    passed = all(r.passed for _, r in reports)
    if cfg.format == "json":
        body = {
            "stats": cfg.stats.value,
            "parts": cfg.parts,
            "passed": passed,
            "reports": [dict(x2=str(x2), **additivity_to_dict(r)) for x2, r in reports],
        }
        _emit(cfg, dumps_json(body))
    else:
        header = ["x2", "L"] + [f"delta_{n}" for n in MEASURE_NAMES] + ["passed"]
        rows = []
        for x2, r in reports:
            for row in r.rows:
                rows.append([str(x2), row.L] + [fmt(row.deviation[n]) for n in MEASURE_NAMES] + [r.passed])
        _emit(cfg, _records_to_csv(header, rows))
    for x2, r in reports:
        devs = " ".join(f"{n}={fmt(r.rows[-1].deviation[n])}" for n in MEASURE_NAMES)
        _summary(f"x2={x2}: {'PASS' if r.passed else 'FAIL'} at L={r.rows[-1].L}: {devs}")
    return 0 if passed else 1


def _run_oracle(cfg: RunConfig) -> int:
    results = [run_case(c, cfg.tol, cfg.negativity) for c in oracle_suite(cfg.suite)]
    if cfg.format == "json":
        body = [
            {
                "case": r.case.label(),
                "pipeline": measure_record(r.pipeline),
                "oracle": measure_record(r.oracle),
                "max_deviation": float(f"{r.max_deviation:.3e}"),
                "passed": r.passed,
            }
            for r in results
        ]
        _emit(cfg, dumps_json(body))
    else:
        lines = [f"{'case':52s} {'max|dev|':>10s}  result"]
        for r in results:
            lines.append(f"{r.case.label():52s} {r.max_deviation:10.2e}  {'PASS' if r.passed else 'FAIL'}")
        _emit(cfg, "\n".join(lines) + "\n")
    failed = sum(not r.passed for r in results)
    _summary(f"oracle-check {cfg.suite}: {len(results) - failed}/{len(results)} cases within {cfg.tol:g}")
    return 0 if failed == 0 else 1


def run(cfg: RunConfig) -> int:
    try:
        if cfg.command == "measure":
            return _run_measure(cfg)
        if cfg.command == "classical":
            return _run_classical(cfg)
        if cfg.command in ("sweep", "extrapolate"):
            return _run_sweep(cfg, cfg.command == "extrapolate")
        if cfg.command == "additivity":
            return _run_additivity(cfg)
        if cfg.command == "oracle-check":
            return _run_oracle(cfg)
    except InvariantViolation as exc:
        _summary(f"invariant violated: {exc}")
        return 1
    except (LinalgError, SweepError, MultisetError, GeometryError) as exc:
        _summary(f"error: {exc}")
        return 1
    raise ValueError(f"unknown command {cfg.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    return run(parse_args(argv))


def main_exit() -> None:
    sys.exit(main())
