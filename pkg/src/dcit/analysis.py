"""Robustness and predictive-power diagnostics for the DCIT."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from dcit.data_ingest import DIMENSIONS, PanelDataset
from dcit.index_core import (
    IndexScores,
    NormalizedMatrix,
    WeightVector,
    composite_index,
    rank_countries,
)

Preset = Literal["baseline", "ict_heavy", "fdi_heavy"]
HEAVY_WEIGHT = 0.7
PRESET_DIMENSION = {"ict_heavy": "ict_index", "fdi_heavy": "fdi_net_inflows"}


class DegenerateTargetWarning(UserWarning):
    pass


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.clip((xc @ yc) / math.sqrt((xc @ xc) * (yc @ yc)), -1.0, 1.0))


def spearman_rho(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 3:
        raise ValueError("need at least 3 observations")
    ra, rb = average_ranks(a), average_ranks(b)
    if np.ptp(ra) == 0 or np.ptp(rb) == 0:
        raise ValueError("spearman_rho undefined for a constant vector")
    return _pearson(ra, rb)


def reweight_scenario(preset: Preset) -> WeightVector:
    """Baseline equal weights, or 0.7 on one dimension and 0.075 on the rest."""
    if preset == "baseline":
        return WeightVector.equal()
    if preset not in PRESET_DIMENSION:
        raise ValueError(f"unknown preset {preset!r}")
    heavy = PRESET_DIMENSION[preset]
    rest = (1.0 - HEAVY_WEIGHT) / (len(DIMENSIONS) - 1)
    return WeightVector.from_mapping({d: HEAVY_WEIGHT if d == heavy else rest for d in DIMENSIONS})


@dataclass
class StabilityReport:
    scenario_name: str
    year: int
    rho: float
    baseline_rank: dict[str, int]
    scenario_rank: dict[str, int]
    shift: dict[str, int]
    max_abs_shift_country: str

    def to_dict(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "year": self.year,
            "rho": self.rho,
            "max_abs_shift_country": self.max_abs_shift_country,
            "countries": [
                {
                    "country": c,
                    "baseline_rank": self.baseline_rank[c],
                    "scenario_rank": self.scenario_rank[c],
                    "shift": self.shift[c],
                }
                for c in sorted(self.shift)
            ],
        }


def rank_stability(
    Z: NormalizedMatrix,
    w_base: WeightVector,
    w_alt: WeightVector,
    year: int,
    scenario_name: str = "alternative",
) -> StabilityReport:
    base = composite_index(Z, w_base)
    alt = composite_index(Z, w_alt)
    rb = {c: r for c, _, r in rank_countries(base, year)}
    ra = {c: r for c, _, r in rank_countries(alt, year)}
    countries = sorted(rb)
    rho = spearman_rho(
        [base.scores[(c, year)] for c in countries],
        [alt.scores[(c, year)] for c in countries],
    )
    # positive shift = moved down the table under the alternative weights
    shift = {c: ra[c] - rb[c] for c in countries}
    worst = min(countries, key=lambda c: (-abs(shift[c]), c))
    return StabilityReport(scenario_name, year, rho, rb, ra, shift, worst)


def write_rank_shifts_csv(report: StabilityReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "baseline_rank", "scenario_rank"])
        for c in sorted(report.shift):
            w.writerow([c, report.baseline_rank[c], report.scenario_rank[c]])


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n_obs: int


def ols_r2(x: Sequence[float], y: Sequence[float]) -> RegressionFit:
    """Simple least-squares fit ``y ~ intercept + slope * x`` with R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("regressor has zero variance")
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    syy = float(yc @ yc)
    if syy == 0:
        warnings.warn("target has zero variance; R^2 set to 0", DegenerateTargetWarning, stacklevel=2)
        return RegressionFit(slope, intercept, 0.0, int(x.size))
    resid = y - (intercept + slope * x)
    r2 = 1.0 - float(resid @ resid) / syy
    return RegressionFit(slope, intercept, min(max(r2, 0.0), 1.0), int(x.size))


@dataclass
class SweepReport:
    w_start: WeightVector
    w_end: WeightVector
    year: int
    lambdas: list[float]
    samples: dict[str, list[float]]
    per_country_r2: dict[str, float]
    linearity_r2: float
    max_relative_change: float
    max_relative_change_country: str | None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "w_start": self.w_start.as_dict(),
            "w_end": self.w_end.as_dict(),
            "year": self.year,
            "lambdas": self.lambdas,
            "linearity_r2": self.linearity_r2,
            "max_relative_change": self.max_relative_change,
            "max_relative_change_country": self.max_relative_change_country,
            "statistic": "max over countries of |DCIT(w_end) - DCIT(w_start)| / DCIT(w_start)",
            "per_country_r2": dict(sorted(self.per_country_r2.items())),
            "notes": self.notes,
        }

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["country", "lambda", "dcit"])
            for c in sorted(self.samples):
                for lam, v in zip(self.lambdas, self.samples[c]):
                    w.writerow([c, repr(lam), repr(v)])


def weight_sweep(
    Z: NormalizedMatrix,
    w_start: WeightVector,
    w_end: WeightVector,
    steps: int,
    year: int,
) -> SweepReport:
    """Walk the straight line between two weight vectors and measure how
    linearly each country's DCIT responds.

    A country whose DCIT does not move along the path is perfectly linear and
    scores R^2 = 1.
    """
    if steps < 3:
        raise ValueError("steps must be >= 3")
    lambdas = [k / (steps - 1) for k in range(steps)]
    countries, _ = Z.slice_year(year)
    samples: dict[str, list[float]] = {c: [] for c in countries}
    for lam in lambdas:
        s = composite_index(Z, w_start.blend(w_end, lam))
        for c in countries:
            samples[c].append(s.scores[(c, year)])

    per_r2 = {}
    for c, ys in samples.items():
        ys_arr = np.asarray(ys)
        if float(((ys_arr - ys_arr.mean()) ** 2).sum()) <= 1e-24:
            per_r2[c] = 1.0
        else:
            per_r2[c] = ols_r2(lambdas, ys).r_squared

    notes = []
    best_c, best = None, 0.0
    for c in sorted(samples):
        start, end = samples[c][0], samples[c][-1]
        if start == 0:
            notes.append(f"{c}: DCIT at w_start is 0, relative change undefined; excluded")
            continue
        rel = abs(end - start) / start
        if best_c is None or rel > best:
            best_c, best = c, rel
    return SweepReport(
        w_start, w_end, year, lambdas, samples, per_r2,
        float(np.mean(list(per_r2.values()))), best, best_c, notes,
    )


@dataclass
class PredictiveRow:
    target: str
    fit: RegressionFit


@dataclass
class PredictiveTable:
    rows: list[PredictiveRow]
    year: int | None
    pooled: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "year": self.year,
            "pooled": self.pooled,
            "rows": [{"target": r.target, **asdict(r.fit)} for r in self.rows],
            "notes": self.notes,
        }

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["target", "r_squared", "slope", "intercept", "n_obs"])
            for r in self.rows:
                f = r.fit
                w.writerow([r.target, repr(f.r_squared), repr(f.slope), repr(f.intercept), f.n_obs])


def predictive_power(
    scores: IndexScores,
    panel: PanelDataset,
    targets: Sequence[str],
    year: int | None = None,
    pooled: bool = False,
) -> PredictiveTable:
    """Regress each target indicator on DCIT, one simple regression per target.

    Uses the ``year`` cross-section (default: latest scored year) unless
    ``pooled`` is set, in which case every scored (country, year) is a sample.
    """
    if not pooled and year is None:
        year = scores.years()[-1]
    keys = sorted(scores.scores) if pooled else [(c, year) for c in sorted(scores.cross_section(year))]
    rows, notes = [], []
    for t in targets:
        pairs = [
            (scores.scores[(c, y)], panel.get(c, y, t))
            for c, y in keys
            if panel.get(c, y, t) is not None
        ]
        if len(pairs) < 3:
            notes.append(f"{t}: only {len(pairs)} observation(s); skipped")
            continue
        x, y_ = zip(*pairs)
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", DegenerateTargetWarning)
                fit = ols_r2(x, y_)
            if caught:
                notes.append(f"{t}: zero-variance target, R^2 set to 0")
        except ValueError as exc:
            notes.append(f"{t}: {exc}; skipped")
            continue
        rows.append(PredictiveRow(t, fit))
    rows.sort(key=lambda r: (-r.fit.r_squared, r.target))
    return PredictiveTable(rows, None if pooled else year, pooled, notes)


def write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
