"""DCIT versus TDI gap analysis."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from dcit.clustering import ClusterProfile

BALANCED_BAND = 0.05
LAGGING_LEVEL = 0.4


@dataclass(frozen=True)
class TdiBenchmark:
    """Trade Digitalization Index per cluster label; None marks a missing value."""

    tdi: Mapping[str, float | None]

    def __post_init__(self):
        for k, v in self.tdi.items():
            if v is not None and not (0.0 <= v <= 1.0 and math.isfinite(v)):
                raise ValueError(f"TDI for cluster {k} must lie in [0, 1], got {v}")

    def get(self, key: str) -> float | None:
        return self.tdi.get(key)


def load_tdi(path: str | Path) -> TdiBenchmark:
    values = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            raw = (row.get("tdi") or "").strip()
            values[row["cluster"].strip()] = float(raw) if raw else None
    return TdiBenchmark(values)


def classify_gap(
    dcit: float,
    tdi: float | None,
    balanced_band: float = BALANCED_BAND,
    lagging_level: float = LAGGING_LEVEL,
) -> str:
    """Readiness/execution quadrant for one cluster.

    ``balanced`` when |tdi - dcit| <= balanced_band; otherwise ``lagging`` if
    both scores sit below ``lagging_level``; otherwise ``execution-led`` when
    TDI leads and ``readiness-led`` when DCIT leads. Missing TDI gives ``n/a``.
    """
    if tdi is None:
        return "n/a"
    gap = tdi - dcit
    # small slack so decimal edges like 0.55 - 0.5 land inside the band
    if abs(gap) <= balanced_band + 1e-12:
        return "balanced"
    if dcit < lagging_level and tdi < lagging_level:
        return "lagging"
    return "execution-led" if gap > 0 else "readiness-led"


@dataclass(frozen=True)
class GapRow:
    cluster: str
    dcit_mean: float
    tdi: float | None
    gap: float | None
    quadrant: str


def gap_report(
    profiles: Sequence[ClusterProfile],
    tdi: TdiBenchmark,
    balanced_band: float = BALANCED_BAND,
    lagging_level: float = LAGGING_LEVEL,
) -> list[GapRow]:
    rows = []
    for p in profiles:
        t = tdi.get(p.label)
        if t is None:
            t = tdi.get(str(p.cluster)) if p.label != str(p.cluster) else None
        gap = None if t is None else t - p.mean_dcit
        rows.append(
            GapRow(p.label, p.mean_dcit, t, gap, classify_gap(p.mean_dcit, t, balanced_band, lagging_level))
        )
    return rows


def write_gap_csv(rows: Sequence[GapRow], path: str | Path) -> None:
    def fmt(v):
        return "" if v is None else repr(v)

    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster", "dcit_mean", "tdi", "gap", "quadrant"])
        for r in rows:
            w.writerow([r.cluster, repr(r.dcit_mean), fmt(r.tdi), fmt(r.gap), r.quadrant])


def profiles_from_table(table: Mapping[str, float]) -> list[ClusterProfile]:
    """Profiles from a bare {label: mean DCIT} mapping (counts unknown)."""
    return [
        ClusterProfile(int(k) if k.isdigit() else i, k, 2024, v, 0, 0.0)
        for i, (k, v) in enumerate(table.items())
    ]
