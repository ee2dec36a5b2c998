import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import normal_equations, pearson, spearman_definitional

from dcit.analysis import (
    DegenerateTargetWarning,
    average_ranks,
    ols_r2,
    predictive_power,
    rank_stability,
    reweight_scenario,
    spearman_rho,
    weight_sweep,
)
from dcit.data_ingest import DIMENSIONS, PanelDataset
from dcit.index_core import NormalizedMatrix, WeightVector, scores_from_mapping


def test_spearman_trivial():
    assert spearman_rho([1, 2, 3], [10, 20, 30]) == 1.0
    assert spearman_rho([1, 2, 3], [30, 20, 10]) == -1.0


def test_spearman_with_ties():
    rho = spearman_rho([1, 2, 2, 4], [1, 3, 2, 4])
    assert rho == pytest.approx(spearman_definitional([1, 2, 2, 4], [1, 3, 2, 4]), abs=1e-12)
    # ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4) give 4.5 / sqrt(4.5 * 5)
    assert rho == pytest.approx(3 / math.sqrt(10), abs=1e-12)


def test_spearman_errors():
    with pytest.raises(ValueError):
        spearman_rho([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        spearman_rho([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        spearman_rho([1, 2], [1, 2])


def test_average_ranks_matches_scipy():
    x = [3.0, 1.0, 3.0, 2.0, 3.0, 0.5]
    assert average_ranks(x).tolist() == stats.rankdata(x).tolist()


vec = st.lists(st.integers(-5, 5), min_size=3, max_size=12)


@given(vec, vec)
def test_spearman_properties(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    assume(len(set(a)) > 1 and len(set(b)) > 1)
    rho = spearman_rho(a, b)
    assert -1.0 <= rho <= 1.0
    assert rho == pytest.approx(spearman_rho(b, a), abs=1e-12)
    # strictly increasing transform of one argument
    assert spearman_rho([math.exp(v) for v in a], b) == pytest.approx(rho, abs=1e-12)
    assert rho == pytest.approx(stats.spearmanr(a, b).statistic, abs=1e-12)


def test_presets():
    base = reweight_scenario("baseline")
    assert base.weights == (0.2,) * 5
    ict = reweight_scenario("ict_heavy").as_dict()
    assert ict["ict_index"] == 0.7
    assert all(v == pytest.approx(0.075) for d, v in ict.items() if d != "ict_index")
    fdi = reweight_scenario("fdi_heavy").as_dict()
    assert fdi["fdi_net_inflows"] == 0.7
    for p in ("baseline", "ict_heavy", "fdi_heavy"):
        assert sum(reweight_scenario(p).weights) == pytest.approx(1.0, abs=1e-12)


def _random_z(n, seed, year=2023):
    rng = np.random.default_rng(seed)
    rows = tuple((f"C{i:02d}", year) for i in range(n))
    return NormalizedMatrix(rows, rng.random((n, 5)), {}, "pooled")


def test_rank_stability_identity():
    Z = _random_z(8, 1)
    rep = rank_stability(Z, WeightVector.equal(), WeightVector.equal(), 2023)
    assert rep.rho == 1.0
    assert set(rep.shift.values()) == {0}


def test_rank_stability_six_countries_matches_recompute():
    Z = _random_z(6, 3)
    rep = rank_stability(Z, reweight_scenario("baseline"), reweight_scenario("ict_heavy"), 2023, "ict_heavy")
    base = Z.values @ np.full(5, 0.2)
    alt = Z.values @ np.array([0.075, 0.7, 0.075, 0.075, 0.075])
    assert rep.rho == pytest.approx(stats.spearmanr(base, alt).statistic, abs=1e-12)
    # independent ranking: position in a descending sort, 1-based
    names = [c for c, _ in Z.rows]
    want_base = {names[i]: r + 1 for r, i in enumerate(np.argsort(-base))}
    want_alt = {names[i]: r + 1 for r, i in enumerate(np.argsort(-alt))}
    assert rep.baseline_rank == want_base
    assert rep.scenario_rank == want_alt
    assert sum(rep.shift.values()) == 0
    worst = max(abs(v) for v in rep.shift.values())
    assert abs(rep.shift[rep.max_abs_shift_country]) == worst


def test_sweep_is_linear_and_reports_change():
    Z = _random_z(10, 5)
    w0, w1 = reweight_scenario("ict_heavy"), reweight_scenario("fdi_heavy")
    rep = weight_sweep(Z, w0, w1, 11, 2023)
    assert rep.linearity_r2 >= 1 - 1e-9
    assert rep.lambdas == sorted(rep.lambdas) and rep.lambdas[0] == 0.0 and rep.lambdas[-1] == 1.0
    start = Z.values @ w0.as_array()
    end = Z.values @ w1.as_array()
    assert rep.max_relative_change == pytest.approx(np.max(np.abs(end - start) / start), abs=1e-12)


def test_sweep_degenerate_path():
    Z = _random_z(5, 6)
    rep = weight_sweep(Z, WeightVector.equal(), WeightVector.equal(), 5, 2023)
    assert rep.max_relative_change == 0.0
    assert rep.linearity_r2 == 1.0
    with pytest.raises(ValueError):
        weight_sweep(Z, WeightVector.equal(), WeightVector.equal(), 2, 2023)


def test_sweep_excludes_zero_start():
    Z = _random_z(4, 8)
    Z.values[0] = 0.0
    rep = weight_sweep(Z, reweight_scenario("ict_heavy"), reweight_scenario("fdi_heavy"), 3, 2023)
    assert any("C00" in n for n in rep.notes)
    assert rep.max_relative_change_country != "C00"


def test_ols_perfect_and_constant():
    fit = ols_r2([1, 2, 3, 4], [3, 5, 7, 9])
    assert (fit.slope, fit.intercept, fit.r_squared) == (pytest.approx(2.0), pytest.approx(1.0), 1.0)
    with pytest.warns(DegenerateTargetWarning):
        assert ols_r2([1, 2, 3], [4, 4, 4]).r_squared == 0.0
    with pytest.raises(ValueError):
        ols_r2([2, 2, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        ols_r2([1, 2], [1, 2])


def test_ols_matches_normal_equations():
    x, y = [1, 2, 3, 4], [1.1, 1.9, 3.2, 3.8]
    fit = ols_r2(x, y)
    slope, intercept, r2 = normal_equations(x, y)
    assert fit.slope == pytest.approx(slope, abs=1e-10)
    assert fit.intercept == pytest.approx(intercept, abs=1e-10)
    assert fit.r_squared == pytest.approx(r2, abs=1e-10)
    # by hand: slope 4.7/5, SS_res 0.082, SS_tot 4.5
    assert fit.slope == pytest.approx(0.94)
    assert fit.r_squared == pytest.approx(1 - 0.082 / 4.5)


pts = st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=20)


@settings(max_examples=60)
@given(pts, st.floats(0.1, 10), st.floats(-50, 50), st.floats(0.1, 10), st.floats(-50, 50))
def test_ols_affine_invariance_and_pearson(data, a, b, c, d):
    x, y = map(list, zip(*data))
    assume(np.var(x) > 1e-2 and np.var(y) > 1e-2)
    r2 = ols_r2(x, y).r_squared
    assert 0.0 <= r2 <= 1.0
    assert r2 == pytest.approx(pearson(x, y) ** 2, abs=1e-10)
    r2t = ols_r2([a * v + b for v in x], [c * v + d for v in y]).r_squared
    assert r2t == pytest.approx(r2, abs=1e-9)


def test_predictive_self_prediction_and_ordering():
    rng = np.random.default_rng(0)
    sc = {(f"C{i:02d}", 2023): float(v) for i, v in enumerate(rng.random(12))}
    scores = scores_from_mapping(sc, WeightVector.equal())
    noise = rng.normal(0, 0.2, 12)
    obs = {}
    for i, ((c, y), s) in enumerate(sorted(sc.items())):
        obs[(c, y, "ict_index")] = 3 * s + 1
        obs[(c, y, "gdp_growth_pct")] = s + noise[i]
    panel = PanelDataset.from_observations(obs)
    table = predictive_power(scores, panel, ["gdp_growth_pct", "ict_index", "fdi_net_inflows"])
    assert [r.target for r in table.rows] == ["ict_index", "gdp_growth_pct"]
    assert table.rows[0].fit.r_squared == pytest.approx(1.0, abs=1e-12)
    x = [sc[k] for k in sorted(sc)]
    y = [obs[(c, y_, "gdp_growth_pct")] for c, y_ in sorted(sc)]
    assert table.rows[1].fit.r_squared == pytest.approx(normal_equations(x, y)[2], abs=1e-10)
    assert any("fdi_net_inflows" in n for n in table.notes)


def test_predictive_pooled_mode():
    sc = {(c, y): 0.1 * i + 0.01 * (y - 2020) for i, c in enumerate("ABCD") for y in (2020, 2021)}
    scores = scores_from_mapping({(c * 3, y): v for (c, y), v in sc.items()}, WeightVector.equal())
    panel = PanelDataset.from_observations(
        {(c, y, "ict_index"): 2 * v for (c, y), v in scores.scores.items()}
    )
    table = predictive_power(scores, panel, ["ict_index"], pooled=True)
    assert table.rows[0].fit.n_obs == 8
    assert table.pooled and table.year is None


def test_dimension_order_is_stable():
    assert DIMENSIONS[1] == "ict_index" and DIMENSIONS[3] == "fdi_net_inflows"
