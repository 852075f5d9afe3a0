"""Parameter sweeps, large-L extrapolation and additivity checks.

Each point of a sweep is an independent computation. Points are evaluated
on a thread pool (LAPACK releases the GIL) and always reported in parameter
order. ``QENT_THREADS`` caps the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .combinatorics import MomentumMultiset, MomentumSpec, MultisetError
from .measures import MEASURE_NAMES, MeasureSet, compose_additive, compute_measures
from .model import Geometry, GeometryError, Statistics
from .statebuilder import build_density

DEFAULT_LADDER = (32, 64, 128, 256)
PARAMETERS = ("x2", "y", "L")


class SweepError(ValueError):
    pass


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class StateSpec:
    """Statistics plus momentum content, possibly written in terms of ``L``."""

    stats: Statistics
    momenta: MomentumSpec

    @classmethod
    def parse(cls, stats: str | Statistics, momenta: str) -> "StateSpec":
        spec = cls(Statistics.parse(stats) if isinstance(stats, str) else stats, MomentumSpec.parse(momenta))
        if spec.stats is Statistics.FERMIONIC and not spec.momenta.depends_on_L:
            if not spec.momenta.resolve(None).is_fermionic:
                raise MultisetError(f"fermionic state cannot repeat a momentum: {momenta!r}")
        return spec

    def resolve(self, L: int) -> MomentumMultiset:
        K = self.momenta.resolve(L)
        if self.stats is Statistics.FERMIONIC and not K.is_fermionic:
            raise MultisetError(f"fermionic state {self.momenta} repeats a momentum at L={L}")
        return K

    def __str__(self) -> str:
        return str(self.momenta)


@dataclass(frozen=True)
class GeometryTemplate:
    """Fixed ratios ``x1, x2, y`` and an optional chain length."""

    x1: Fraction
    x2: Fraction
    y: Fraction = Fraction(0)
    L: int | None = None

    @classmethod
    def make(cls, x1, x2, y=0, L=None) -> "GeometryTemplate":
        return cls(to_fraction(x1), to_fraction(x2), to_fraction(y), L)

    def at(self, **changes) -> Geometry:
        t = replace(self, **{k: (v if k == "L" else to_fraction(v)) for k, v in changes.items()})
        if t.L is None:
            raise SweepError("chain length L is required")
        return Geometry.from_ratios(t.L, t.x1, t.x2, t.y)


@dataclass(frozen=True)
class SweepRow:
    value: object
    geometry: Geometry
    K: MomentumMultiset
    measures: MeasureSet


@dataclass
class FitResult:
    """``X(L) = X_inf + a / L + b / L^2`` fitted per measure."""

    ladder: list[int]
    coefficients: dict[str, tuple[float, float, float]]
    residuals: dict[str, list[float]]

    @property
    def extrapolated(self) -> MeasureSet:
        c = self.coefficients
        return MeasureSet.from_values(c["S_R"][0], c["I"][0], c["E_N"][0])

    @property
    def max_residual(self) -> float:
        return max((abs(r) for rs in self.residuals.values() for r in rs), default=0.0)


@dataclass
class SweepResult:
    parameter: str
    stats: Statistics
    momenta: str
    rows: list[SweepRow]
    fit: FitResult | None = None
    template: GeometryTemplate | None = field(default=None, repr=False)

    @property
    def values(self) -> list:
        return [r.value for r in self.rows]

    @property
    def extrapolated(self) -> MeasureSet | None:
        return None if self.fit is None else self.fit.extrapolated

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r.measures, name) for r in self.rows])


def worker_count() -> int:
    env = os.environ.get("QENT_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SweepError(f"QENT_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def evaluate(state: StateSpec, g: Geometry) -> tuple[MomentumMultiset, MeasureSet]:
    K = state.resolve(g.L)
    return K, compute_measures(build_density(K, g, state.stats))


def _run_points(state: StateSpec, points: Sequence[tuple[object, Geometry]], workers: int | None) -> list[SweepRow]:
    workers = worker_count() if workers is None else max(1, workers)

    def one(point):
        value, g = point
        K, m = evaluate(state, g)
        return SweepRow(value, g, K, m)

    if workers == 1 or len(points) < 2:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, points))


def _geometries(template: GeometryTemplate, parameter: str, values) -> list[tuple[object, Geometry]]:
    if parameter not in PARAMETERS:
        raise SweepError(f"cannot sweep {parameter!r}; choose one of {', '.join(PARAMETERS)}")
    points, bad = [], []
    for v in values:
        try:
            if parameter == "L":
                v = int(v)
                g = template.at(L=v)
            else:
                v = to_fraction(v)
                g = template.at(**{parameter: v})
        except (GeometryError, SweepError, ValueError) as exc:
            bad.append(f"{parameter}={v} ({exc})")
            continue
        points.append((v, g))
    if bad:
        raise SweepError("unusable sweep values: " + "; ".join(bad))
    return sorted(points, key=lambda p: p[0])


def sweep(
    state: StateSpec,
    template: GeometryTemplate,
    parameter: str,
    values,
    workers: int | None = None,
) -> SweepResult:
    """Measures at every value of ``parameter`` (one of ``x2``, ``y``, ``L``)."""
    points = _geometries(template, parameter, values)
    return SweepResult(parameter, state.stats, str(state), _run_points(state, points, workers), template=template)


def fit_inverse_L(ladder: Sequence[int], series: dict[str, Sequence[float]]) -> FitResult:
    ladder = [int(L) for L in ladder]
    if len(ladder) < 3:
        raise SweepError(f"need at least 3 chain lengths to extrapolate, got {ladder}")
    inv = 1.0 / np.asarray(ladder, dtype=float)
    design = np.column_stack([np.ones_like(inv), inv, inv**2])
    coefficients, residuals = {}, {}
    for name, ys in series.items():
        ys = np.asarray(ys, dtype=float)
        coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
        coefficients[name] = tuple(float(c) for c in coef)
        residuals[name] = [float(r) for r in ys - design @ coef]
    return FitResult(ladder, coefficients, residuals)


def commensurate_ladder(state: StateSpec, template: GeometryTemplate, ladder: Sequence[int]) -> list[int]:
    usable = []
    for L in ladder:
        try:
            template.at(L=L)
            state.resolve(L)
        except (GeometryError, MultisetError):
            continue
        usable.append(int(L))
    return usable


def extrapolate_L(
    state: StateSpec,
    template: GeometryTemplate,
    ladder: Sequence[int] | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Sweep ``L`` along ``ladder`` and fit each measure in ``1/L``.

    Chain lengths where the ratios or momenta are not integers are dropped.
    """
    usable = commensurate_ladder(state, template, DEFAULT_LADDER if ladder is None else ladder)
    if len(usable) < 3:
        raise SweepError(f"need at least 3 commensurate chain lengths, got {usable}")
    result = sweep(state, template, "L", usable, workers)
    result.fit = fit_inverse_L(usable, {n: result.series(n) for n in MEASURE_NAMES})
    return result


# ---------------------------------------------------------------------------
# additivity


@dataclass(frozen=True)
class AdditivityRow:
    L: int
    geometry: Geometry
    whole: MeasureSet
    parts: tuple[MeasureSet, ...]

    @property
    def predicted(self) -> MeasureSet:
        return compose_additive(self.parts)

    @property
    def deviation(self) -> dict[str, float]:
        p = self.predicted
        return {n: abs(getattr(self.whole, n) - getattr(p, n)) for n in MEASURE_NAMES}


@dataclass
class AdditivityReport:
    stats: Statistics
    parts: list[str]
    rows: list[AdditivityRow]
    bound: float
    slack: float = 1e-10

    def non_increasing(self, name: str) -> bool:
        devs = [r.deviation[name] for r in self.rows]
        return all(b <= a + self.slack for a, b in zip(devs, devs[1:]))

    def measure_passed(self, name: str) -> bool:
        return self.non_increasing(name) and self.rows[-1].deviation[name] <= self.bound

    @property
    def passed(self) -> bool:
        return all(self.measure_passed(n) for n in MEASURE_NAMES)


def additivity_report(
    parts: Sequence[StateSpec | str],
    stats: Statistics | str,
    template: GeometryTemplate,
    ladder: Sequence[int] = (64, 128, 256),
    bound: float = 0.05,
    workers: int | None = None,
) -> AdditivityReport:
    """Deviation of the union state from the sum of its parts along ``ladder``.

    The check passes when every deviation is non-increasing in ``L`` (up to
    a 1e-10 rounding allowance) and ends below ``bound`` nats.
    """
    stats = Statistics.parse(stats) if isinstance(stats, str) else stats
    specs = [p if isinstance(p, StateSpec) else StateSpec.parse(stats, p) for p in parts]
    if len(specs) < 2:
        raise SweepError("additivity needs at least two momentum groups")
    ladder = sorted(int(L) for L in ladder)
    union_text = ",".join(str(s.momenta) for s in specs)
    union = StateSpec.parse(stats, union_text)

    rows = []
    for L in ladder:
        g = template.at(L=L)
        resolved = [s.resolve(L) for s in specs]
        seen: set[int] = set()
        for K in resolved:
            overlap = seen & set(K.counts)
            if overlap:
                raise SweepError(f"momentum groups overlap at L={L}: {sorted(overlap)}")
            seen |= set(K.counts)
        pieces = _run_points(union, [(L, g)], 1) + [
            _run_points(s, [(L, g)], 1)[0] for s in specs
        ]
        rows.append(AdditivityRow(L, g, pieces[0].measures, tuple(p.measures for p in pieces[1:])))
    return AdditivityReport(stats, [str(s.momenta) for s in specs], rows, bound)


# ---------------------------------------------------------------------------
# serialization


CSV_HEADER = ("L", "x1", "x2", "y", "K", "S_R", "I", "E_N", "gap")


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def rounded(x: float) -> float:
    return float(fmt(x))


def measure_record(m: MeasureSet) -> dict[str, float]:
    return {"S_R": rounded(m.S_R), "I": rounded(m.I), "E_N": rounded(m.E_N), "gap": rounded(m.markov_gap)}


def row_record(row: SweepRow) -> dict:
    g = row.geometry
    rec = {"L": g.L, "x1": rounded(g.x1), "x2": rounded(g.x2), "y": rounded(g.y), "K": str(row.K)}
    rec.update(measure_record(row.measures))
    return rec


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        g, m = row.geometry, row.measures
        writer.writerow(
            [g.L, fmt(g.x1), fmt(g.x2), fmt(g.y), str(row.K), fmt(m.S_R), fmt(m.I), fmt(m.E_N), fmt(m.markov_gap)]
        )
    return buf.getvalue()


def sweep_to_dict(result: SweepResult) -> dict:
    out = {
        "parameter": result.parameter,
        "stats": result.stats.value,
        "K": result.momenta,
        "values": [str(v) for v in result.values],
        "rows": [row_record(r) for r in result.rows],
        "extrapolated": None,
        "fit": None,
    }
    if result.fit is not None:
        fit = result.fit
        out["extrapolated"] = measure_record(fit.extrapolated)
        out["fit"] = {
            "ansatz": "X(L) = X_inf + a/L + b/L^2",
            "ladder": fit.ladder,
            "max_residual": rounded(fit.max_residual),
            "measures": {
                name: {
                    "X_inf": rounded(c[0]),
                    "a": rounded(c[1]),
                    "b": rounded(c[2]),
                    "residuals": [rounded(r) for r in fit.residuals[name]],
                }
                for name, c in fit.coefficients.items()
            },
        }
    return out


def additivity_to_dict(report: AdditivityReport) -> dict:
    rows = []
    for r in report.rows:
        g = r.geometry
        rows.append(
            {
                "L": r.L,
                "x1": rounded(g.x1),
                "x2": rounded(g.x2),
                "y": rounded(g.y),
                "whole": measure_record(r.whole),
                "sum_of_parts": measure_record(r.predicted),
                "deviation": {k: rounded(v) for k, v in r.deviation.items()},
            }
        )
    return {
        "stats": report.stats.value,
        "parts": report.parts,
        "bound": report.bound,
        "rows": rows,
        "non_increasing": {n: report.non_increasing(n) for n in MEASURE_NAMES},
        "passed": report.passed,
    }


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
