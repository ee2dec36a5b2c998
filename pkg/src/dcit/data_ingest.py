"""Loading, validation and gap-filling of the long-format country-year panel."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

FIRST_YEAR = 2011
LAST_YEAR = 2023

DIMENSIONS = (
    "broadband_adoption",
    "ict_index",
    "gdp_per_capita",
    "fdi_net_inflows",
    "total_trade_usd",
)

Key = tuple[str, int, str]


class PanelError(ValueError):
    """Base class for panel loading and validation failures."""


class MalformedRowError(PanelError):
    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class DuplicateKeyError(PanelError):
    def __init__(self, key: Key, first_line: int, second_line: int):
        self.key = key
        self.lines = (first_line, second_line)
        super().__init__(
            f"duplicate observation {key} on lines {first_line} and {second_line}"
        )


class UnknownIndicatorError(MalformedRowError):
    pass


class StrictGapError(PanelError):
    def __init__(self, gaps: list[Key]):
        self.gaps = gaps
        listing = ", ".join(f"{c}/{y}/{i}" for c, y, i in gaps)
        super().__init__(f"{len(gaps)} gap(s) under strict policy: {listing}")


@dataclass(frozen=True)
class Indicator:
    id: str
    unit: str
    roles: frozenset[str]
    nonnegative: bool
    polarity: str = "higher-is-better"


@dataclass(frozen=True)
class IndicatorCatalog:
    entries: tuple[Indicator, ...]

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("indicator ids must be unique")
        dims = {e.id for e in self.entries if "dcit_dimension" in e.roles}
        if dims != set(DIMENSIONS):
            raise ValueError(f"catalog must define exactly the dimensions {DIMENSIONS}")

    def __contains__(self, indicator_id: str) -> bool:
        return any(e.id == indicator_id for e in self.entries)

    def __getitem__(self, indicator_id: str) -> Indicator:
        for e in self.entries:
            if e.id == indicator_id:
                return e
        raise KeyError(indicator_id)

    def with_role(self, role: str) -> list[str]:
        return [e.id for e in self.entries if role in e.roles]


def default_catalog() -> IndicatorCatalog:
    dim, aux, raw = "dcit_dimension", "auxiliary_target", "raw_component"
    return IndicatorCatalog(
        (
            Indicator("broadband_adoption", "subscriptions per 100 people", frozenset({dim, aux}), True),
            Indicator("ict_index", "readiness score 0-1", frozenset({dim, aux}), True),
            Indicator("gdp_per_capita", "current USD", frozenset({dim}), True),
            Indicator("fdi_net_inflows", "current USD", frozenset({dim, aux}), False),
            Indicator("total_trade_usd", "current USD", frozenset({dim}), True),
            Indicator("exports_usd", "current USD", frozenset({raw}), True),
            Indicator("imports_usd", "current USD", frozenset({raw}), True),
            Indicator("trade_growth_pct", "percent per year", frozenset({aux}), False),
            Indicator("gdp_growth_pct", "percent per year", frozenset({aux}), False),
        )
    )


@dataclass(frozen=True)
class PanelDataset:
    """Immutable long-format panel keyed by (country, year, indicator)."""

    observations: Mapping[Key, float]
    countries: tuple[str, ...]
    years: tuple[int, int]

    @classmethod
    def from_observations(
        cls, observations: Mapping[Key, float], years: tuple[int, int] | None = None
    ) -> "PanelDataset":
        obs = dict(observations)
        countries = tuple(sorted({c for c, _, _ in obs}))
        if years is None:
            ys = [y for _, y, _ in obs]
            years = (min(ys), max(ys)) if ys else (FIRST_YEAR, LAST_YEAR)
        return cls(obs, countries, years)

    def get(self, country: str, year: int, indicator: str) -> float | None:
        return self.observations.get((country, year, indicator))

    def indicators(self) -> list[str]:
        return sorted({i for _, _, i in self.observations})

    def year_range(self) -> range:
        return range(self.years[0], self.years[1] + 1)

    def series(self, country: str, indicator: str) -> dict[int, float]:
        return {
            y: self.observations[(country, y, indicator)]
            for y in self.year_range()
            if (country, y, indicator) in self.observations
        }

    def cross_section(self, year: int, indicator: str) -> dict[str, float]:
        return {
            c: self.observations[(c, year, indicator)]
            for c in self.countries
            if (c, year, indicator) in self.observations
        }

    def without_countries(self, excluded: Iterable[str]) -> "PanelDataset":
        drop = set(excluded)
        obs = {k: v for k, v in self.observations.items() if k[0] not in drop}
        return PanelDataset(obs, tuple(c for c in self.countries if c not in drop), self.years)


@dataclass
class ValidationReport:
    missing_cells: list[Key] = field(default_factory=list)
    imputed_cells: list[Key] = field(default_factory=list)
    excluded_countries: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "missing_cells": [list(k) for k in self.missing_cells],
            "imputed_cells": [list(k) for k in self.imputed_cells],
            "excluded_countries": [
                {"country": c, "reason": r} for c, r in self.excluded_countries
            ],
        }

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


class ImputePolicy(enum.Enum):
    INTERPOLATE = "interpolate"
    STRICT = "strict"


def load_panel(path: str | Path, catalog: IndicatorCatalog | None = None) -> PanelDataset:
    """Parse a ``country,year,indicator,value`` CSV into a validated panel.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        MalformedRowError: bad field count, bad year, non-numeric or
            non-finite value, out-of-range year or a negative level.
        UnknownIndicatorError: indicator not in ``catalog``.
        DuplicateKeyError: the same (country, year, indicator) twice.
    """
    catalog = catalog or default_catalog()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)

    obs: dict[Key, float] = {}
    seen_at: dict[Key, int] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["country", "year", "indicator", "value"]:
            raise MalformedRowError(1, "header must be country,year,indicator,value")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRowError(line, f"expected 4 fields, got {len(row)}")
            country, year_s, indicator, value_s = (f.strip() for f in row)
            if len(country) != 3 or not country.isalpha() or not country.isupper():
                raise MalformedRowError(line, f"country {country!r} is not an ISO3 code")
            try:
                year = int(year_s)
            except ValueError:
                raise MalformedRowError(line, f"year {year_s!r} is not an integer") from None
            if not FIRST_YEAR <= year <= LAST_YEAR:
                raise MalformedRowError(line, f"year {year} outside {FIRST_YEAR}-{LAST_YEAR}")
            if indicator not in catalog:
                raise UnknownIndicatorError(line, f"unknown indicator {indicator!r}")
            try:
                value = float(value_s)
            except ValueError:
                raise MalformedRowError(line, f"value {value_s!r} is not numeric") from None
            if not math.isfinite(value):
                raise MalformedRowError(line, f"value {value_s!r} is not finite")
            if catalog[indicator].nonnegative and value < 0:
                raise MalformedRowError(line, f"{indicator} must be >= 0, got {value}")
            key = (country, year, indicator)
            if key in seen_at:
                raise DuplicateKeyError(key, seen_at[key], line)
            seen_at[key] = line
            obs[key] = value
    return PanelDataset.from_observations(obs)


def write_panel(panel: PanelDataset, path: str | Path) -> None:
    # repr() gives the shortest string that round-trips the float exactly
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "year", "indicator", "value"])
        for (c, y, i) in sorted(panel.observations):
            w.writerow([c, y, i, repr(panel.observations[(c, y, i)])])


def compute_total_trade(
    panel: PanelDataset, report: ValidationReport | None = None
) -> PanelDataset:
    """Add ``total_trade_usd = exports_usd + imports_usd`` per (country, year).

    Existing total-trade observations are kept as they are, which makes the
    operation idempotent. Pairs lacking either component are appended to
    ``report.missing_cells`` (when a report is given) and left missing.
    """
    obs = dict(panel.observations)
    for c in panel.countries:
        for y in panel.year_range():
            if (c, y, "total_trade_usd") in obs:
                continue
            ex = obs.get((c, y, "exports_usd"))
            im = obs.get((c, y, "imports_usd"))
            if ex is None or im is None:
                if report is not None:
                    report.missing_cells.append((c, y, "total_trade_usd"))
                continue
            obs[(c, y, "total_trade_usd")] = ex + im
    return PanelDataset(obs, panel.countries, panel.years)


def impute_gaps(
    panel: PanelDataset,
    policy: ImputePolicy = ImputePolicy.INTERPOLATE,
    indicators: Iterable[str] | None = None,
) -> tuple[PanelDataset, ValidationReport]:
    """Fill interior gaps by within-country linear interpolation on year.

    Leading and trailing gaps are never extrapolated; they stay in
    ``missing_cells``. A country with no observation at all for one of the
    DCIT dimensions is listed in ``excluded_countries``.
    """
    if indicators is None:
        indicators = sorted(set(panel.indicators()) | set(DIMENSIONS))
    indicators = list(indicators)
    years = list(panel.year_range())

    gaps: list[Key] = [
        (c, y, i)
        for c in panel.countries
        for i in indicators
        for y in years
        if (c, y, i) not in panel.observations
    ]
    if policy is ImputePolicy.STRICT and gaps:
        raise StrictGapError(gaps)

    report = ValidationReport()
    obs = dict(panel.observations)
    for c in panel.countries:
        for i in indicators:
            known = panel.series(c, i)
            if not known:
                if i in DIMENSIONS:
                    report.excluded_countries.append((c, f"no observations for {i}"))
                report.missing_cells.extend((c, y, i) for y in years)
                continue
            observed = sorted(known)
            for y in years:
                if y in known:
                    continue
                if y < observed[0] or y > observed[-1]:
                    report.missing_cells.append((c, y, i))
                    continue
                lo = max(k for k in observed if k < y)
                hi = min(k for k in observed if k > y)
                frac = (y - lo) / (hi - lo)
                obs[(c, y, i)] = known[lo] + frac * (known[hi] - known[lo])
                report.imputed_cells.append((c, y, i))
    return PanelDataset(obs, panel.countries, panel.years), report


@dataclass(frozen=True)
class CountryMeta:
    name: str
    cluster_hint: str | None


def load_country_meta(path: str | Path) -> dict[str, CountryMeta]:
    """Read the ``country,name,cluster_hint`` sidecar file."""
    meta = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            hint = (row.get("cluster_hint") or "").strip() or None
            meta[row["country"].strip()] = CountryMeta(row["name"].strip(), hint)
    return meta
