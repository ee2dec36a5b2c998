"""Exponential-smoothing base levels and compound-growth scenario projections."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from dcit.clustering import ClusterProfile
from dcit.data_ingest import DIMENSIONS
from dcit.index_core import IndexScores, WeightVector, scores_from_mapping

BASE_YEAR = 2024
ALPHA_BOUNDS = (0.01, 1.0)
GOLDEN = (math.sqrt(5) - 1) / 2

LEVERS = ("none", "ict_only", "fdi_only", "synergy")
LEVER_DIMENSIONS = {
    "none": (),
    "ict_only": ("ict_index", "broadband_adoption"),
    "fdi_only": ("fdi_net_inflows",),
    "synergy": ("ict_index", "broadband_adoption", "fdi_net_inflows"),
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class SmoothingFit:
    alpha: float
    level: float
    sse: float


def ses_sse(y: Sequence[float], alpha: float) -> tuple[float, float]:
    """One-step-ahead SSE and final level for smoothing constant ``alpha``."""
    level = y[0]
    sse = 0.0
    for obs in y[1:]:
        err = obs - level
        sse += err * err
        level = alpha * obs + (1.0 - alpha) * level
    return sse, level


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2


def ses_fit(series: Mapping[int, float] | Sequence[float], tol: float = 1e-4) -> SmoothingFit:
    """Fit simple exponential smoothing by minimizing one-step-ahead SSE.

    A 0.01-step scan over (0.01, 1] brackets the best region; golden-section
    search refines inside the bracket. The SSE surface is not always unimodal,
    so the bracket guards against settling in a poorer local minimum.
    """
    if isinstance(series, Mapping):
        y = [float(series[k]) for k in sorted(series)]
    else:
        y = [float(v) for v in series]
    if len(y) < 4:
        raise ValueError(f"need at least 4 observations, got {len(y)}")

    lo, hi = ALPHA_BOUNDS
    grid = np.round(np.arange(lo, hi + 1e-12, 0.01), 10)
    sses = [ses_sse(y, a)[0] for a in grid]
    i = int(np.argmin(sses))
    a_lo, a_hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    refined = _golden_min(lambda a: ses_sse(y, a)[0], a_lo, a_hi, tol)

    best_alpha, best_sse = float(grid[i]), sses[i]
    sse_r = ses_sse(y, refined)[0]
    if sse_r < best_sse:
        best_alpha, best_sse = refined, sse_r
    return SmoothingFit(best_alpha, ses_sse(y, best_alpha)[1], best_sse)


class Projection(NamedTuple):
    value: float
    raw: float
    clamped: bool


def scenario_project(base: float, growth_rate: float, ict_factor: float, t: int) -> Projection:
    """base * (1 + growth_rate)**t * ict_factor, clamped to [0, 1]."""
    if not 0.0 <= base <= 1.0:
        raise ValueError(f"base must lie in [0, 1], got {base}")
    if t < 0:
        raise ValueError("t must be >= 0")
    if growth_rate <= -1:
        raise ValueError("growth_rate must be > -1")
    if ict_factor <= 0:
        raise ValueError("ict_factor must be > 0")
    raw = base * (1.0 + growth_rate) ** t * ict_factor
    value = min(max(raw, 0.0), 1.0)
    return Projection(value, raw, value != raw)


def calibrate_growth(base: float, target: float, horizon: int, ict_factor: float = 1.0) -> float:
    """Growth rate that carries ``base`` to ``target`` after ``horizon`` years."""
    if base <= 0 or target <= 0:
        raise ValueError("base and target must be positive")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if ict_factor <= 0:
        raise ValueError("ict_factor must be > 0")
    return (target / (base * ict_factor)) ** (1.0 / horizon) - 1.0


@dataclass(frozen=True)
class ClusterParams:
    growth_rate: float
    ict_factor: float = 1.0


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    clusters: Mapping[str, ClusterParams]
    lever: str = "none"
    lever_boosts: Mapping[str, float] = field(default_factory=dict)
    horizon: tuple[int, int] = (BASE_YEAR, 2028)

    def __post_init__(self):
        if self.lever not in LEVERS:
            raise ScenarioError(f"unknown lever {self.lever!r}")
        if self.horizon[0] < BASE_YEAR or self.horizon[1] < self.horizon[0]:
            raise ScenarioError(f"invalid horizon {self.horizon}")
        for key, p in self.clusters.items():
            if p.ict_factor <= 0:
                raise ScenarioError(f"cluster {key}: ict_factor must be > 0")
            if p.growth_rate <= -1:
                raise ScenarioError(f"cluster {key}: growth_rate must be > -1")
        unknown = set(self.lever_boosts) - set(DIMENSIONS)
        if unknown:
            raise ScenarioError(f"lever_boosts name unknown dimensions {sorted(unknown)}")

    def years(self) -> range:
        return range(self.horizon[0], self.horizon[1] + 1)

    def params_for(self, *keys: str) -> ClusterParams:
        for k in (*keys, "default"):
            if k in self.clusters:
                return self.clusters[k]
        raise ScenarioError(f"scenario {self.name!r} has no parameters for cluster {keys[0]!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "clusters": {
                k: {"growth_rate": p.growth_rate, "ict_factor": p.ict_factor}
                for k, p in self.clusters.items()
            },
            "lever": self.lever,
            "lever_boosts": dict(self.lever_boosts),
            "horizon": list(self.horizon),
        }


def load_scenario(path: str | Path) -> ScenarioSpec:
    doc = json.loads(Path(path).read_text())
    return scenario_from_dict(doc)


def scenario_from_dict(doc: Mapping) -> ScenarioSpec:
    try:
        clusters = {
            str(k): ClusterParams(float(v["growth_rate"]), float(v.get("ict_factor", 1.0)))
            for k, v in doc["clusters"].items()
        }
        return ScenarioSpec(
            name=doc["name"],
            clusters=clusters,
            lever=doc.get("lever", "none"),
            lever_boosts={k: float(v) for k, v in doc.get("lever_boosts", {}).items()},
            horizon=tuple(doc.get("horizon", (BASE_YEAR, 2028))),
        )
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario config: {exc}") from None


def apply_levers(spec: ScenarioSpec, z_latest: Sequence[float]) -> dict[int, np.ndarray]:
    """Boosted normalized dimension values for every horizon year.

    Each dimension named by the lever gains ``lever_boosts[dim] * t`` at
    horizon offset t, clamped to [0, 1]; other dimensions stay put.
    """
    z0 = np.asarray(z_latest, dtype=float)
    if z0.shape != (len(DIMENSIONS),):
        raise ValueError(f"expected {len(DIMENSIONS)} normalized values")
    dims = LEVER_DIMENSIONS[spec.lever]
    missing = [d for d in dims if d not in spec.lever_boosts]
    if missing:
        raise ScenarioError(f"lever {spec.lever!r} needs boosts for {missing}")
    step = np.array([spec.lever_boosts[d] if d in dims else 0.0 for d in DIMENSIONS])
    start = spec.horizon[0]
    return {y: np.clip(z0 + (y - start) * step, 0.0, 1.0) for y in spec.years()}


@dataclass
class ForecastSeries:
    entity: str
    scenario: str
    values: dict[int, float]
    clamped: dict[int, bool]


def project_entity(
    entity: str,
    base: float,
    params: ClusterParams,
    spec: ScenarioSpec,
    z_latest: Sequence[float] | None = None,
    weights: WeightVector | None = None,
) -> ForecastSeries:
    """Compound-growth trajectory plus the composite uplift from any lever.

    The lever uplift in year t is DCIT(boosted Z_t) - DCIT(Z_0) under
    ``weights``; it is added to the compound-growth value before clamping.
    """
    weights = weights or WeightVector.equal()
    if spec.lever != "none" and z_latest is None:
        raise ScenarioError(f"lever {spec.lever!r} needs normalized dimension values for {entity}")
    trajectory = apply_levers(spec, z_latest) if spec.lever != "none" else None
    w = weights.as_array()
    values, clamped = {}, {}
    for y in spec.years():
        p = scenario_project(base, params.growth_rate, params.ict_factor, y - spec.horizon[0])
        raw = p.raw
        if trajectory is not None:
            raw += float(trajectory[y] @ w - np.asarray(z_latest, dtype=float) @ w)
        v = min(max(raw, 0.0), 1.0)
        values[y] = v
        clamped[y] = v != raw
    return ForecastSeries(entity, spec.name, values, clamped)


def forecast_clusters(
    profiles: Sequence[ClusterProfile],
    scenarios: Sequence[ScenarioSpec],
    z_by_cluster: Mapping[int, Sequence[float]] | None = None,
    weights: WeightVector | None = None,
) -> list[ForecastSeries]:
    """One series per (cluster, scenario), starting from the cluster mean DCIT.

    Scenario parameters are looked up by the profile label, then the cluster
    id, then a ``"default"`` entry.
    """
    out = []
    for spec in scenarios:
        for p in profiles:
            params = spec.params_for(p.label, str(p.cluster))
            z = None if z_by_cluster is None else z_by_cluster.get(p.cluster)
            out.append(project_entity(p.label, p.mean_dcit, params, spec, z, weights))
    return out


def write_forecast_csv(series: Sequence[ForecastSeries], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity", "scenario", "year", "dcit", "clamped"])
        for s in series:
            for y in sorted(s.values):
                w.writerow([s.entity, s.scenario, y, repr(s.values[y]), str(s.clamped[y]).lower()])


def smoothed_base_scores(
    scores: IndexScores, base_year: int = BASE_YEAR
) -> tuple[IndexScores, dict[str, SmoothingFit | None]]:
    """Per-country SES level of the DCIT history, stamped as ``base_year``.

    Countries with fewer than four scored years fall back to their latest
    value (fit recorded as None).
    """
    history: dict[str, dict[int, float]] = {}
    for (c, y), s in scores.scores.items():
        if y < base_year:
            history.setdefault(c, {})[y] = s
    base, fits = {}, {}
    for c in sorted(history):
        h = history[c]
        if len(h) >= 4:
            fit = ses_fit(h)
            level = fit.level
        else:
            fit, level = None, h[max(h)]
        fits[c] = fit
        base[(c, base_year)] = min(max(level, 0.0), 1.0)
    return scores_from_mapping(base, scores.weights_used), fits
