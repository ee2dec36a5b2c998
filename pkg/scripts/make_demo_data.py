"""Generate the bundled synthetic 28-country demo panel (2011-2023).

Values are synthetic. Countries carry the four-group roster used for report
labels; each group gets its own level profile so the groups are recoverable
by clustering. A handful of interior cells are dropped to exercise
imputation.

    python scripts/make_demo_data.py [--out src/dcit/data]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

ROSTER = {
    "0": [("BRA", "Brazil"), ("CHL", "Chile"), ("COL", "Colombia"), ("IND", "India"),
          ("IDN", "Indonesia"), ("MYS", "Malaysia"), ("MEX", "Mexico"), ("MAR", "Morocco"),
          ("PER", "Peru"), ("PHL", "Philippines"), ("SEN", "Senegal"), ("THA", "Thailand"),
          ("VNM", "Vietnam")],
    "1": [("BGD", "Bangladesh"), ("ETH", "Ethiopia"), ("KEN", "Kenya"), ("MMR", "Myanmar"),
          ("NGA", "Nigeria"), ("PAK", "Pakistan"), ("RWA", "Rwanda"), ("TZA", "Tanzania"),
          ("UGA", "Uganda"), ("ZMB", "Zambia")],
    "2": [("ARG", "Argentina"), ("EGY", "Egypt"), ("ZAF", "South Africa"), ("TUR", "Turkey")],
    "3": [("CHN", "China")],
}

# 2023 group levels: broadband per 100, ICT score, GDP per capita USD,
# FDI USD, total trade USD; then annual growth of each.
LEVELS = {
    "0": (72.0, 0.62, 4600.0, 2.2e10, 4.0e11),
    "1": (14.0, 0.18, 1300.0, 1.5e9, 4.0e10),
    "2": (38.0, 0.34, 11200.0, 6.0e9, 2.4e11),
    "3": (96.0, 0.95, 12600.0, 1.9e11, 6.0e12),
}
GROWTH = {
    "0": (0.06, 0.04, 0.03, 0.04, 0.04),
    "1": (0.10, 0.05, 0.03, 0.05, 0.05),
    "2": (0.09, 0.03, 0.01, 0.02, 0.03),
    "3": (0.05, 0.03, 0.06, 0.03, 0.05),
}
SPREAD = (0.07, 0.07, 0.08, 0.25, 0.25)
YEARS = range(2011, 2024)
DROPPED = [
    ("KEN", 2015, "broadband_adoption"),
    ("MMR", 2013, "ict_index"),
    ("MMR", 2014, "ict_index"),
    ("PER", 2017, "fdi_net_inflows"),
    ("EGY", 2019, "exports_usd"),
    ("EGY", 2019, "imports_usd"),
    ("ETH", 2011, "gdp_growth_pct"),
]


def generate(seed: int = 20240):
    rng = np.random.default_rng(seed)
    rows, meta = [], []
    for group, members in ROSTER.items():
        lv = np.array(LEVELS[group])
        gr = np.array(GROWTH[group])
        for iso, name in members:
            meta.append((iso, name, group))
            country_level = lv * np.exp(rng.normal(0, SPREAD, 5))
            country_level[1] = min(country_level[1], 0.99)
            country_level[0] = min(country_level[0], 140.0)
            noise = rng.normal(0, 0.03, (len(YEARS) + 1, 5))
            export_share = rng.uniform(0.42, 0.55)
            gdp_trend = rng.normal(100 * gr[2] + 1.0, 0.8)
            prev_trade = None
            for k, year in enumerate([2010, *YEARS]):
                back = 2023 - year
                v = country_level / (1 + gr) ** back * np.exp(noise[k])
                v[1] = min(v[1], 1.0)
                trade = v[4]
                if year == 2010:
                    prev_trade = trade
                    continue
                fdi = v[3]
                if rng.random() < 0.04:
                    fdi = -0.3 * fdi  # occasional net disinvestment
                obs = {
                    "broadband_adoption": round(v[0], 3),
                    "ict_index": round(v[1], 4),
                    "gdp_per_capita": round(v[2], 1),
                    "fdi_net_inflows": round(fdi, -5),
                    "exports_usd": round(trade * export_share, -5),
                    "imports_usd": round(trade * (1 - export_share), -5),
                    "trade_growth_pct": round(100 * (trade / prev_trade - 1), 3),
                    "gdp_growth_pct": round(gdp_trend + rng.normal(0, 1.2), 3),
                }
                prev_trade = trade
                for ind, val in obs.items():
                    if (iso, year, ind) not in DROPPED:
                        rows.append((iso, year, ind, val))
    rows.sort()
    meta.sort()
    return rows, meta


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/dcit/data"))
    ap.add_argument("--seed", type=int, default=20240)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, meta = generate(args.seed)
    with (out / "demo_panel.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "year", "indicator", "value"])
        w.writerows(rows)
    with (out / "countries.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "name", "cluster_hint"])
        w.writerows(meta)
    print(f"wrote {len(rows)} observations for {len(meta)} countries to {out}")


if __name__ == "__main__":
    main()
