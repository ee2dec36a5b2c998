"""Stage-by-stage orchestration; every stage reads prior outputs from the run directory."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import platform
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from dcit import __version__
from dcit.analysis import (
    predictive_power,
    rank_stability,
    reweight_scenario,
    weight_sweep,
    write_json,
    write_rank_shifts_csv,
)
from dcit.clustering import (
    FeatureMatrix,
    cluster_labels,
    cluster_profile,
    read_assignment_csv,
    read_profiles_csv,
    select_clustering,
    write_profiles_csv,
)
from dcit.data_ingest import (
    DIMENSIONS,
    ImputePolicy,
    compute_total_trade,
    default_catalog,
    impute_gaps,
    load_country_meta,
    load_panel,
    write_panel,
)
from dcit.forecast import BASE_YEAR, forecast_clusters, load_scenario, smoothed_base_scores, write_forecast_csv
from dcit.index_core import (
    NormalizedMatrix,
    WeightVector,
    composite_index,
    normalize_panel,
    rank_countries,
    read_scores_csv,
    write_index_json,
    write_scores_csv,
)
from dcit.report import gap_report, load_tdi, write_gap_csv

log = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
DEMO_PANEL = DATA_DIR / "demo_panel.csv"
DEMO_META = DATA_DIR / "countries.csv"
DEMO_TDI = DATA_DIR / "tdi.csv"
SCENARIO_DIR = DATA_DIR / "scenarios"
DEFAULT_SCENARIOS = tuple(
    str(SCENARIO_DIR / f"{n}.json")
    for n in (
        "pessimistic", "optimistic", "high_growth",
        "optimistic_ict_only", "optimistic_fdi_only", "optimistic_synergy",
    )
)

STAGES = ("ingest", "index", "cluster", "stability", "sweep", "predict", "forecast", "gap")

# file -> schema (CSV header, or "json")
OUTPUT_SCHEMAS = {
    "panel.csv": "country,year,indicator,value",
    "validation.json": "json",
    "normalized.csv": "country,year," + ",".join(DIMENSIONS),
    "dcit_scores.csv": "country,year,dcit,rank",
    "ranking.csv": "rank,country,dcit",
    "index.json": "json",
    "clusters.json": "json",
    "clusters.csv": "country,cluster",
    "cluster_profile.csv": "cluster,label,year,mean_dcit,count,share_pct",
    "stability.json": "json",
    "rank_shifts.csv": "country,baseline_rank,scenario_rank",
    "rank_shifts_fdi_heavy.csv": "country,baseline_rank,scenario_rank",
    "sweep.csv": "country,lambda,dcit",
    "sweep.json": "json",
    "predictive_power.csv": "target,r_squared,slope,intercept,n_obs",
    "predictive_power.json": "json",
    "forecast.csv": "entity,scenario,year,dcit,clamped",
    "gap.csv": "cluster,dcit_mean,tdi,gap,quadrant",
}


class StageError(RuntimeError):
    pass


@dataclass
class RunConfig:
    input: str = str(DEMO_PANEL)
    meta: str | None = str(DEMO_META)
    tdi: str | None = str(DEMO_TDI)
    scenarios: list[str] = field(default_factory=lambda: list(DEFAULT_SCENARIOS))
    out: str = "dcit_out"
    seed: int = 0
    year: int = 2023
    scope: str = "pooled"
    weights: str = "equal"
    k_min: int = 2
    k_max: int = 6
    restarts: int = 20
    methods: list[str] = field(default_factory=lambda: ["kmeans", "agglomerative_ward"])
    impute: str = "interpolate"
    sweep_steps: int = 11
    pooled_regression: bool = False
    balanced_band: float = 0.05
    lagging_level: float = 0.4

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "RunConfig":
        doc = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown run config keys: {sorted(unknown)}")
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)

    def identity(self) -> dict:
        """Config content that determines outputs (the output directory does not)."""
        d = asdict(self)
        d.pop("out")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def resolve_weights(spec: str) -> WeightVector:
    presets = {"equal": "baseline", "baseline": "baseline", "ict-heavy": "ict_heavy",
               "ict_heavy": "ict_heavy", "fdi-heavy": "fdi_heavy", "fdi_heavy": "fdi_heavy"}
    if spec in presets:
        return reweight_scenario(presets[spec])
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"weights file {spec} not found")
    return WeightVector.from_mapping(json.loads(path.read_text()))


def _scope(cfg: RunConfig) -> str:
    return cfg.scope.replace("-", "_")


def _hints(cfg: RunConfig) -> dict[str, str | None]:
    if not cfg.meta:
        return {}
    return {c: m.cluster_hint for c, m in load_country_meta(cfg.meta).items()}


def _need(out: Path, *names: str) -> None:
    missing = [n for n in names if not (out / n).exists()]
    if missing:
        raise StageError(f"missing prior stage outputs: {missing}")


def stage_ingest(cfg: RunConfig, out: Path) -> None:
    panel = compute_total_trade(load_panel(cfg.input, default_catalog()))
    panel, report = impute_gaps(panel, ImputePolicy(cfg.impute))
    write_panel(panel, out / "panel.csv")
    report.to_json(out / "validation.json")


def _normalized(cfg: RunConfig, out: Path) -> NormalizedMatrix:
    _need(out, "normalized.csv")
    return NormalizedMatrix.from_csv(out / "normalized.csv", _scope(cfg))


def stage_index(cfg: RunConfig, out: Path) -> None:
    _need(out, "panel.csv", "validation.json")
    panel = load_panel(out / "panel.csv")
    excluded = {e["country"] for e in json.loads((out / "validation.json").read_text())["excluded_countries"]}
    keep = [c for c in panel.countries if c not in excluded]
    Z, dropped = normalize_panel(panel, _scope(cfg), countries=keep, drop_incomplete=True)
    for c, y in dropped:
        log.info("dropped incomplete row %s %s", c, y)
    scores = composite_index(Z, resolve_weights(cfg.weights))
    Z.to_csv(out / "normalized.csv")
    write_scores_csv(scores, out / "dcit_scores.csv")
    write_index_json(scores, Z, out / "index.json")
    with (out / "ranking.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "country", "dcit"])
        for c, s, r in rank_countries(scores, cfg.year):
            w.writerow([r, c, repr(s)])


def stage_cluster(cfg: RunConfig, out: Path) -> None:
    _need(out, "dcit_scores.csv")
    Z = _normalized(cfg, out)
    X = FeatureMatrix.from_normalized(Z, cfg.year)
    k_max = min(cfg.k_max, len(X.labels))
    best, candidates = select_clustering(
        X, range(cfg.k_min, k_max + 1), cfg.methods, seed=cfg.seed, restarts=cfg.restarts
    )
    labels = cluster_labels(best.assignment, _hints(cfg))
    doc = best.to_dict()
    doc["labels"] = {str(k): v for k, v in labels.items()}
    doc["candidates"] = [
        {"method": c.method, "K": c.K, "silhouette": c.silhouette, "inertia": c.inertia}
        for c in candidates
    ]
    write_json(doc, out / "clusters.json")
    best.to_csv(out / "clusters.csv")

    weights = resolve_weights(cfg.weights)
    scores = read_scores_csv(out / "dcit_scores.csv", weights)
    base, _ = smoothed_base_scores(scores, BASE_YEAR)
    profiles = cluster_profile(scores, best, cfg.year, labels)
    profiles += cluster_profile(base, best, BASE_YEAR, labels)
    write_profiles_csv(profiles, out / "cluster_profile.csv")


def stage_stability(cfg: RunConfig, out: Path) -> None:
    Z = _normalized(cfg, out)
    w_base = resolve_weights(cfg.weights)
    reports = {
        name: rank_stability(Z, w_base, reweight_scenario(name), cfg.year, name)
        for name in ("ict_heavy", "fdi_heavy")
    }
    write_json({k: r.to_dict() for k, r in reports.items()}, out / "stability.json")
    write_rank_shifts_csv(reports["ict_heavy"], out / "rank_shifts.csv")
    write_rank_shifts_csv(reports["fdi_heavy"], out / "rank_shifts_fdi_heavy.csv")


def stage_sweep(cfg: RunConfig, out: Path) -> None:
    Z = _normalized(cfg, out)
    rep = weight_sweep(Z, reweight_scenario("ict_heavy"), reweight_scenario("fdi_heavy"),
                       cfg.sweep_steps, cfg.year)
    rep.to_csv(out / "sweep.csv")
    write_json(rep.to_dict(), out / "sweep.json")


def stage_predict(cfg: RunConfig, out: Path) -> None:
    _need(out, "panel.csv", "dcit_scores.csv")
    panel = load_panel(out / "panel.csv")
    scores = read_scores_csv(out / "dcit_scores.csv", resolve_weights(cfg.weights))
    targets = default_catalog().with_role("auxiliary_target")
    table = predictive_power(scores, panel, targets, None if cfg.pooled_regression else cfg.year,
                             pooled=cfg.pooled_regression)
    table.to_csv(out / "predictive_power.csv")
    write_json(table.to_dict(), out / "predictive_power.json")


def _base_profiles(out: Path):
    _need(out, "cluster_profile.csv")
    return [p for p in read_profiles_csv(out / "cluster_profile.csv") if p.year == BASE_YEAR]


def stage_forecast(cfg: RunConfig, out: Path) -> None:
    missing = [s for s in cfg.scenarios if not Path(s).exists()]
    if missing:
        raise StageError(f"scenario config(s) not found: {missing}")
    specs = [load_scenario(s) for s in cfg.scenarios]
    profiles = _base_profiles(out)
    _need(out, "clusters.csv")
    assignment = read_assignment_csv(out / "clusters.csv")
    Z = _normalized(cfg, out)
    countries, vals = Z.slice_year(cfg.year)
    z_by_cluster = {}
    for k in sorted(set(assignment.values())):
        idx = [i for i, c in enumerate(countries) if assignment.get(c) == k]
        if idx:
            z_by_cluster[k] = vals[idx].mean(axis=0)
    series = forecast_clusters(profiles, specs, z_by_cluster, resolve_weights(cfg.weights))
    write_forecast_csv(series, out / "forecast.csv")


def stage_gap(cfg: RunConfig, out: Path) -> None:
    if not cfg.tdi or not Path(cfg.tdi).exists():
        raise StageError(f"TDI benchmark file not found: {cfg.tdi}")
    rows = gap_report(_base_profiles(out), load_tdi(cfg.tdi), cfg.balanced_band, cfg.lagging_level)
    write_gap_csv(rows, out / "gap.csv")


STAGE_FUNCS: dict[str, Callable[[RunConfig, Path], None]] = {
    "ingest": stage_ingest,
    "index": stage_index,
    "cluster": stage_cluster,
    "stability": stage_stability,
    "sweep": stage_sweep,
    "predict": stage_predict,
    "forecast": stage_forecast,
    "gap": stage_gap,
}

STAGE_OUTPUTS = {
    "ingest": ["panel.csv", "validation.json"],
    "index": ["normalized.csv", "dcit_scores.csv", "ranking.csv", "index.json"],
    "cluster": ["clusters.json", "clusters.csv", "cluster_profile.csv"],
    "stability": ["stability.json", "rank_shifts.csv", "rank_shifts_fdi_heavy.csv"],
    "sweep": ["sweep.csv", "sweep.json"],
    "predict": ["predictive_power.csv", "predictive_power.json"],
    "forecast": ["forecast.csv"],
    "gap": ["gap.csv"],
}


def file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_pipeline(cfg: RunConfig, stages: tuple[str, ...] = STAGES) -> int:
    """Run ``stages`` in order and write ``manifest.json``; returns an exit code.

    A failing stage stops the run. Outputs of earlier stages are kept and the
    manifest names the failed stage.
    """
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "package": "dcit",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": cfg.seed,
        "config_hash": cfg.digest(),
        "config": cfg.identity(),
        "stages": [],
        "failed_stage": None,
        "files": {},
    }
    status = 0
    for name in stages:
        try:
            STAGE_FUNCS[name](cfg, out)
        except Exception as exc:  # noqa: BLE001 - any stage failure is reported, not raised
            log.error("stage %s failed: %s", name, exc)
            manifest["stages"].append({"stage": name, "status": "failed", "error": str(exc)})
            manifest["failed_stage"] = name
            status = 1
            break
        manifest["stages"].append({"stage": name, "status": "ok"})
        for f in STAGE_OUTPUTS[name]:
            manifest["files"][f] = {"schema": OUTPUT_SCHEMAS[f], "sha256": file_sha256(out / f)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return status
