"""Min-max normalization and the weighted DCIT composite."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Mapping, Sequence

import numpy as np

from dcit.data_ingest import DIMENSIONS, PanelDataset

Scope = Literal["pooled", "per_year"]


class DegenerateSeriesError(ValueError):
    """A dimension is constant over its normalization scope."""

    def __init__(self, dimension: str | None, detail: str = ""):
        self.dimension = dimension
        msg = f"constant series for dimension {dimension!r}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class MissingDataError(ValueError):
    pass


def minmax_normalize(series: Sequence[float], dimension: str | None = None) -> list[float]:
    """Rescale ``series`` onto [0, 1] via (x - min) / (max - min)."""
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("cannot normalize an empty series")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    lo, hi = x.min(), x.max()
    if hi == lo:
        raise DegenerateSeriesError(dimension)
    z = (x - lo) / (hi - lo)
    return np.clip(z, 0.0, 1.0).tolist()


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative weights over the five DCIT dimensions, summing to one."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != len(DIMENSIONS):
            raise ValueError(f"expected {len(DIMENSIONS)} weights, got {len(w)}")
        if any(not math.isfinite(v) or v < 0 for v in w):
            raise ValueError(f"weights must be finite and >= 0: {w}")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(w)!r}")

    @classmethod
    def equal(cls) -> "WeightVector":
        n = len(DIMENSIONS)
        return cls((1.0 / n,) * n)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> "WeightVector":
        unknown = set(mapping) - set(DIMENSIONS)
        if unknown:
            raise ValueError(f"unknown dimensions in weights: {sorted(unknown)}")
        return cls(tuple(float(mapping.get(d, 0.0)) for d in DIMENSIONS))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(DIMENSIONS, self.weights))

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)

    def blend(self, other: "WeightVector", lam: float) -> "WeightVector":
        """Return ``(1 - lam) * self + lam * other``."""
        return WeightVector(
            tuple((1.0 - lam) * a + lam * b for a, b in zip(self.weights, other.weights))
        )


@dataclass(frozen=True)
class NormalizedMatrix:
    """Z values for each (country, year) row across the five dimensions.

    ``rows`` and ``values`` are aligned: ``values[k, j]`` is the normalized
    score of ``rows[k]`` on ``DIMENSIONS[j]``. ``bounds`` maps a scope
    partition (``"pooled"`` or a year) to per-dimension (min, max).
    """

    rows: tuple[tuple[str, int], ...]
    values: np.ndarray
    bounds: Mapping[object, Mapping[str, tuple[float, float]]]
    scope: Scope

    def years(self) -> list[int]:
        return sorted({y for _, y in self.rows})

    def countries(self) -> list[str]:
        return sorted({c for c, _ in self.rows})

    def slice_year(self, year: int) -> tuple[list[str], np.ndarray]:
        idx = [k for k, (_, y) in enumerate(self.rows) if y == year]
        if not idx:
            raise KeyError(f"year {year} not in normalized matrix")
        return [self.rows[k][0] for k in idx], self.values[idx]

    def row(self, country: str, year: int) -> np.ndarray:
        return self.values[self.rows.index((country, year))]

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["country", "year", *DIMENSIONS])
            for (c, y), z in zip(self.rows, self.values):
                w.writerow([c, y, *(repr(float(v)) for v in z)])

    @classmethod
    def from_csv(cls, path: str | Path, scope: Scope = "pooled") -> "NormalizedMatrix":
        rows, vals = [], []
        with Path(path).open(newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append((rec["country"], int(rec["year"])))
                vals.append([float(rec[d]) for d in DIMENSIONS])
        return cls(tuple(rows), np.array(vals, dtype=float).reshape(-1, len(DIMENSIONS)), {}, scope)


def normalize_panel(
    panel: PanelDataset,
    scope: Scope = "pooled",
    *,
    countries: Sequence[str] | None = None,
    drop_incomplete: bool = False,
) -> tuple[NormalizedMatrix, list[tuple[str, int]]]:
    """Min-max normalize each DCIT dimension over the chosen scope.

    Returns the matrix and the list of (country, year) rows dropped for
    incompleteness; that list is empty unless ``drop_incomplete`` is set,
    in which case incomplete rows are skipped instead of raising.
    """
    if scope not in ("pooled", "per_year"):
        raise ValueError(f"unknown scope {scope!r}")
    countries = list(countries) if countries is not None else list(panel.countries)

    rows: list[tuple[str, int]] = []
    raw: list[list[float]] = []
    dropped: list[tuple[str, int]] = []
    for c in sorted(countries):
        for y in panel.year_range():
            vals = [panel.get(c, y, d) for d in DIMENSIONS]
            if any(v is None for v in vals):
                if all(v is None for v in vals):
                    continue
                if drop_incomplete:
                    dropped.append((c, y))
                    continue
                missing = [d for d, v in zip(DIMENSIONS, vals) if v is None]
                raise MissingDataError(f"{c} {y} missing {missing}; impute or exclude first")
            rows.append((c, y))
            raw.append(vals)
    if not rows:
        raise MissingDataError("no complete (country, year) rows to normalize")

    X = np.array(raw, dtype=float)
    Z = np.empty_like(X)
    bounds: dict[object, dict[str, tuple[float, float]]] = {}
    if scope == "pooled":
        parts = {"pooled": np.arange(len(rows))}
    else:
        years = np.array([y for _, y in rows])
        parts = {int(y): np.flatnonzero(years == y) for y in np.unique(years)}
    for part, idx in parts.items():
        bounds[part] = {}
        for j, d in enumerate(DIMENSIONS):
            col = X[idx, j]
            try:
                Z[idx, j] = minmax_normalize(col, dimension=d)
            except DegenerateSeriesError:
                raise DegenerateSeriesError(d, f"scope partition {part}") from None
            bounds[part][d] = (float(col.min()), float(col.max()))
    return NormalizedMatrix(tuple(rows), Z, bounds, scope), dropped


@dataclass(frozen=True)
class IndexScores:
    scores: Mapping[tuple[str, int], float]
    weights_used: WeightVector
    ranking: Mapping[int, tuple[str, ...]]

    def years(self) -> list[int]:
        return sorted(self.ranking)

    def cross_section(self, year: int) -> dict[str, float]:
        if year not in self.ranking:
            raise KeyError(f"year {year} not scored")
        return {c: self.scores[(c, year)] for c in self.ranking[year]}


def _order(scores: Mapping[str, float]) -> list[str]:
    return sorted(scores, key=lambda c: (-scores[c], c))


def scores_from_mapping(
    scores: Mapping[tuple[str, int], float], weights: WeightVector
) -> IndexScores:
    by_year: dict[int, dict[str, float]] = {}
    for (c, y), s in scores.items():
        by_year.setdefault(y, {})[c] = s
    ranking = {y: tuple(_order(cs)) for y, cs in sorted(by_year.items())}
    return IndexScores(dict(scores), weights, ranking)


def composite_index(Z: NormalizedMatrix, w: WeightVector | None = None) -> IndexScores:
    """DCIT = sum_j w_j * Z_ij for every row of ``Z``."""
    w = w or WeightVector.equal()
    if not isinstance(w, WeightVector):
        raise TypeError("weights must be a WeightVector")
    dcit = np.clip(Z.values @ w.as_array(), 0.0, 1.0)
    return scores_from_mapping(
        {row: float(v) for row, v in zip(Z.rows, dcit)}, w
    )


def rank_countries(scores: IndexScores, year: int) -> list[tuple[str, float, int]]:
    """Descending (country, score, dense rank); ties share a rank, ISO3 order."""
    if year not in scores.ranking:
        raise KeyError(f"year {year} not scored")
    out = []
    rank, prev = 0, None
    for c in scores.ranking[year]:
        s = scores.scores[(c, year)]
        if s != prev:
            rank += 1
            prev = s
        out.append((c, s, rank))
    return out


def write_scores_csv(scores: IndexScores, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "year", "dcit", "rank"])
        for y in scores.years():
            for c, s, r in rank_countries(scores, y):
                w.writerow([c, y, repr(s), r])


def read_scores_csv(path: str | Path, weights: WeightVector | None = None) -> IndexScores:
    with Path(path).open(newline="") as fh:
        data = {(r["country"], int(r["year"])): float(r["dcit"]) for r in csv.DictReader(fh)}
    return scores_from_mapping(data, weights or WeightVector.equal())


def write_index_json(scores: IndexScores, Z: NormalizedMatrix, path: str | Path) -> None:
    doc = {
        "weights_used": scores.weights_used.as_dict(),
        "scope": Z.scope,
        "bounds": {str(k): {d: list(b) for d, b in v.items()} for k, v in Z.bounds.items()},
        "scores": [
            {"country": c, "year": y, "dcit": scores.scores[(c, y)]}
            for y in scores.years()
            for c in sorted(scores.cross_section(y))
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
