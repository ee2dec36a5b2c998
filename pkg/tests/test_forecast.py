import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ses_grid

from dcit.clustering import ClusterProfile
from dcit.forecast import (
    ClusterParams,
    ScenarioError,
    ScenarioSpec,
    apply_levers,
    calibrate_growth,
    forecast_clusters,
    load_scenario,
    project_entity,
    scenario_from_dict,
    scenario_project,
    ses_fit,
    ses_sse,
    smoothed_base_scores,
    write_forecast_csv,
)
from dcit.index_core import WeightVector, scores_from_mapping

REF_BASES = {"0": 0.327, "1": 0.116, "2": 0.274, "3": 0.810}
REF_2028 = {"0": 0.95, "1": 0.88, "2": 0.991, "3": 0.923}


def test_ses_constant_series():
    fit = ses_fit([0.4] * 6)
    assert fit.level == 0.4 and fit.sse == 0.0


def test_ses_alpha_one_returns_last_observation():
    assert ses_sse([1.0, 3.0, 2.0, 5.0], 1.0)[1] == 5.0


def test_ses_linear_series_matches_grid():
    fit = ses_fit({2019: 1.0, 2020: 2.0, 2021: 3.0, 2022: 4.0, 2023: 5.0})
    grid_sse, grid_alpha = ses_grid([1.0, 2.0, 3.0, 4.0, 5.0])
    assert fit.alpha == pytest.approx(grid_alpha, abs=1e-3)
    assert fit.level == pytest.approx(ses_sse([1, 2, 3, 4, 5], grid_alpha)[1], abs=1e-3)
    assert fit.sse <= grid_sse + 1e-9


def test_ses_needs_four_points():
    with pytest.raises(ValueError):
        ses_fit([1.0, 2.0, 3.0])


@settings(max_examples=40)
@given(st.lists(st.floats(0, 1), min_size=4, max_size=13))
def test_ses_beats_reference_alphas(y):
    fit = ses_fit(y)
    assert 0.01 <= fit.alpha <= 1.0
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        assert fit.sse <= ses_sse(y, a)[0] + 1e-12


def test_project_identity():
    for t in range(6):
        assert scenario_project(0.42, 0.0, 1.0, t) == (0.42, 0.42, False)


def test_project_singleton_cluster_target():
    # growth solved by hand from (0.923 / 0.810) ** (1/4) - 1
    p = scenario_project(0.810, 0.033174, 1.0, 4)
    assert p.value == pytest.approx(0.923, abs=1e-3)
    assert not p.clamped


def test_project_clamps():
    p = scenario_project(0.9, 0.2, 1.0, 3)
    assert p.raw == pytest.approx(0.9 * 1.2**3)
    assert p.raw == pytest.approx(1.5552)
    assert p.value == 1.0 and p.clamped


def test_project_rejects_bad_inputs():
    for args in [(1.2, 0.0, 1.0, 1), (0.5, -1.0, 1.0, 1), (0.5, 0.1, 0.0, 1), (0.5, 0.1, 1.0, -1)]:
        with pytest.raises(ValueError):
            scenario_project(*args)


def _bisect_growth(base, target, horizon):
    lo, hi = -0.99, 10.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if base * (1 + mid) ** horizon < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@pytest.mark.parametrize("label", ["0", "1", "2", "3"])
def test_calibrate_reference_rates(label):
    g = calibrate_growth(REF_BASES[label], REF_2028[label], 4, 1.0)
    assert g == pytest.approx(_bisect_growth(REF_BASES[label], REF_2028[label], 4), abs=1e-9)


def test_calibrate_frozen_values():
    assert calibrate_growth(0.327, 0.95, 4) == pytest.approx(0.3055514, abs=1e-6)
    assert calibrate_growth(0.116, 0.88, 4) == pytest.approx(0.6596105, abs=1e-6)
    assert calibrate_growth(0.5, 0.5, 3) == 0.0
    with pytest.raises(ValueError):
        calibrate_growth(0.0, 0.5, 3)
    with pytest.raises(ValueError):
        calibrate_growth(0.5, 0.5, 0)


@given(st.floats(0.01, 1), st.floats(0.01, 1), st.integers(1, 10), st.floats(0.5, 2))
def test_calibrate_round_trip(base, target, horizon, factor):
    g = calibrate_growth(base, target, horizon, factor)
    assert abs(scenario_project(base, g, factor, horizon).raw - target) < 1e-9


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 0.5),
       st.floats(0.5, 1.5), st.floats(0.5, 1.5), st.integers(0, 8))
def test_project_monotone(b1, b2, g1, g2, f1, f2, t):
    lo = scenario_project(min(b1, b2), min(g1, g2), min(f1, f2), t).raw
    hi = scenario_project(max(b1, b2), max(g1, g2), max(f1, f2), t).raw
    assert lo <= hi
    assert scenario_project(b1, g1, f1, t).raw <= scenario_project(b1, g1, f1, t + 1).raw + 1e-15


def _spec(lever="none", boosts=None, growth=0.05, name="demo"):
    return ScenarioSpec(name, {"default": ClusterParams(growth, 1.0)}, lever, boosts or {})


Z_MID = [0.5, 0.4, 0.3, 0.2, 0.1]  # broadband, ict, gdp, fdi, trade
BOOSTS = {"ict_index": 0.05, "broadband_adoption": 0.05, "fdi_net_inflows": 0.03}


def test_lever_none_equals_projection():
    s = project_entity("x", 0.3, ClusterParams(0.05), _spec(), None)
    for y, v in s.values.items():
        assert v == scenario_project(0.3, 0.05, 1.0, y - 2024).value


def test_lever_synergy_hand_computed():
    s = project_entity("x", 0.3, ClusterParams(0.05), _spec("synergy", BOOSTS), Z_MID)
    # 2028: boosted Z = (0.7, 0.6, 0.3, 0.32, 0.1), mean 0.404, uplift 0.104;
    # compound part 0.3 * 1.05**4 = 0.364651875
    assert s.values[2028] == pytest.approx(0.468651875, abs=1e-9)
    assert s.values[2024] == pytest.approx(0.3, abs=1e-15)


def test_apply_levers_trajectory_and_clamp():
    traj = apply_levers(_spec("ict_only", {"ict_index": 0.3, "broadband_adoption": 0.2}), Z_MID)
    assert traj[2024].tolist() == Z_MID
    assert traj[2026] == pytest.approx([0.9, 1.0, 0.3, 0.2, 0.1])
    assert traj[2028][1] == 1.0 and traj[2028][0] == 1.0
    with pytest.raises(ScenarioError):
        apply_levers(_spec("fdi_only", {"ict_index": 0.1}), Z_MID)


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=5, max_size=5), st.floats(0, 0.1), st.floats(0, 0.1),
       st.floats(0, 0.1), st.floats(0.01, 1), st.floats(-0.2, 0.4))
def test_synergy_dominates_single_levers(z, bi, bb, bf, base, g):
    ict = {"ict_index": bi, "broadband_adoption": bb, "fdi_net_inflows": 0.0}
    fdi = {"ict_index": 0.0, "broadband_adoption": 0.0, "fdi_net_inflows": bf}
    syn = {k: max(ict[k], fdi[k]) for k in ict}
    p = ClusterParams(g)
    out = {name: project_entity("x", base, p, _spec(name, b), z)
           for name, b in (("ict_only", ict), ("fdi_only", fdi), ("synergy", syn))}
    for y in range(2024, 2029):
        assert out["synergy"].values[y] >= out["ict_only"].values[y] - 1e-15
        assert out["synergy"].values[y] >= out["fdi_only"].values[y] - 1e-15
        assert 0.0 <= out["synergy"].values[y] <= 1.0


def _profiles(bases):
    return [ClusterProfile(int(k), k, 2024, v, 1, 0.25) for k, v in bases.items()]


def test_bundled_high_growth_hits_reference_targets(scenario_dir):
    spec = load_scenario(scenario_dir / "high_growth.json")
    for k, p in spec.clusters.items():
        assert p.growth_rate == calibrate_growth(REF_BASES[k], REF_2028[k], 4, p.ict_factor)
    series = forecast_clusters(_profiles(REF_BASES), [spec])
    for s in series:
        assert s.values[2024] == REF_BASES[s.entity]
        assert s.values[2028] == pytest.approx(REF_2028[s.entity], abs=0.005)


def test_pessimistic_flat(scenario_dir):
    spec = load_scenario(scenario_dir / "pessimistic.json")
    for s in forecast_clusters(_profiles(REF_BASES), [spec]):
        assert set(s.values.values()) == {REF_BASES[s.entity]}


def test_optimistic_matches_per_year_formula(scenario_dir):
    spec = load_scenario(scenario_dir / "optimistic.json")
    for s in forecast_clusters(_profiles(REF_BASES), [spec]):
        p = spec.params_for(s.entity)
        for y, v in s.values.items():
            assert v == REF_BASES[s.entity] * (1 + p.growth_rate) ** (y - 2024) * p.ict_factor


def test_missing_cluster_params():
    spec = ScenarioSpec("x", {"0": ClusterParams(0.1)})
    with pytest.raises(ScenarioError):
        forecast_clusters(_profiles({"0": 0.3, "1": 0.2}), [spec])


def test_lever_requires_dimension_values():
    with pytest.raises(ScenarioError):
        forecast_clusters(_profiles({"0": 0.3}), [_spec("synergy", BOOSTS)])


@pytest.mark.parametrize(
    "doc",
    [
        {"name": "x", "clusters": {"0": {"growth_rate": 0.1, "ict_factor": 0}}},
        {"name": "x", "clusters": {"0": {"growth_rate": -1.5}}},
        {"name": "x", "clusters": {}, "horizon": [2020, 2028]},
        {"name": "x", "clusters": {}, "lever": "magic"},
        {"clusters": {}},
    ],
)
def test_invalid_scenarios(doc):
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_scenario_json_round_trip(tmp_path):
    spec = _spec("synergy", BOOSTS)
    (tmp_path / "s.json").write_text(json.dumps(spec.to_dict()))
    assert load_scenario(tmp_path / "s.json") == spec


def test_forecast_csv(tmp_path):
    series = forecast_clusters(_profiles({"0": 0.9}), [_spec(growth=0.2)])
    write_forecast_csv(series, tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "entity,scenario,year,dcit,clamped"
    assert lines[-1] == "0,demo,2028,1.0,true"
    assert lines[1] == "0,demo,2024,0.9,false"


def test_smoothed_base_scores():
    hist = {("AAA", y): 0.1 + 0.01 * (y - 2011) for y in range(2011, 2024)}
    hist.update({("BBB", y): 0.5 for y in range(2021, 2024)})
    base, fits = smoothed_base_scores(scores_from_mapping(hist, WeightVector.equal()))
    assert base.years() == [2024]
    assert base.scores[("BBB", 2024)] == 0.5 and fits["BBB"] is None
    assert base.scores[("AAA", 2024)] == pytest.approx(fits["AAA"].level)
    assert np.isclose(fits["AAA"].alpha, 1.0, atol=1e-3)
