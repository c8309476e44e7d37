import math

import numpy as np
import pytest

from uavcharge.coverage import (COMPONENTS, CoverageModel, beta2, coverage, coverage_component_ubar,
                                coverage_component_uo, coverage_inputs, gain_thresholds)
from uavcharge.params import default_config
from uavcharge.queueing import ActivityProbabilities

CFG = default_config()
N_OUT = 512


@pytest.fixture(scope="module")
def inputs():
    return coverage_inputs(CFG)


def test_gain_thresholds():
    ch = CFG.channel.__class__(rho_u=1.0)
    assert gain_thresholds(1.0, ch)[0] == pytest.approx(1.0)
    assert gain_thresholds(60.0, CFG.channel)[0] == pytest.approx(60**2.1 / 0.2)
    g_l, g_n = gain_thresholds(np.linspace(60, 2000, 30), CFG.channel)
    assert np.all(np.diff(g_l) > 0) and np.all(np.diff(g_n) > 0)


def test_beta2_branches():
    assert beta2(1) == 1.0
    assert beta2(3) == pytest.approx(6 ** (-1 / 3))


def test_small_threshold_gives_certain_hotspot_coverage(inputs):
    cfg = CFG.with_overrides(theta=1e-9)
    model = CoverageModel(cfg, inputs.availability.p_a, inputs.activity)
    uo_l, uo_n = coverage_component_uo(model)
    assert uo_l + uo_n == pytest.approx(1.0, abs=1e-6)


def test_nlos_rayleigh_paths_identical(inputs):
    model = CoverageModel(CFG, inputs.availability.p_a, inputs.activity)
    r = np.linspace(61, 170, 9)
    a = model._uav_success("nlos", "hotspot_uav", r, "alzer")
    e = model._uav_success("nlos", "hotspot_uav", r, "exact")
    assert np.allclose(a, e, rtol=1e-12, atol=0)


def test_no_servers_gives_zero_unavailable_coverage():
    act = ActivityProbabilities(p_c_a=0.0, p_crs_a=0.0, p_r=0.0, p_s00=1.0)
    model = CoverageModel(CFG, 0.0, act)
    assert coverage_component_ubar(model, n_outer=64) == (0.0, 0.0, 0.0, 0.0)


def test_inactive_typical_station_serves_nothing(inputs):
    act = inputs.activity
    model = CoverageModel(CFG, inputs.availability.p_a,
                          ActivityProbabilities(act.p_c_a, 0.0, act.p_r, act.p_s00))
    assert coverage_component_ubar(model, n_outer=128)[2] == 0.0


@pytest.fixture(scope="module")
def report(inputs):
    return coverage(CFG, n_outer=N_OUT, inputs=inputs)


def test_assembly_identity(report):
    c = report.components
    assert set(c) == set(COMPONENTS)
    total = report.p_a * (c["uo_los"] + c["uo_nlos"]) + (1 - report.p_a) * (
        c["up_los"] + c["up_nlos"] + c["cs"] + c["cc"])
    assert report.p_cov_total == total
    assert report.assembled() == pytest.approx(report.p_cov_total, abs=1e-15)
    assert 0 <= report.p_cov_total <= 1
    assert all(0 <= v <= 1 for v in c.values())


def test_deterministic_under_seed(inputs, report):
    again = coverage(CFG, n_outer=N_OUT, inputs=inputs)
    assert again.p_cov_total == report.p_cov_total
    assert again.components == report.components


def test_monotone_in_threshold(inputs):
    vals = [coverage(CFG.with_overrides(theta=t), n_outer=256, inputs=inputs).p_cov_total
            for t in (0.1, 1.0, 10.0)]
    assert vals[0] >= vals[1] >= vals[2]


def test_unknown_method(inputs):
    with pytest.raises(ValueError):
        coverage(CFG, method="magic", inputs=inputs)


def test_unit_nakagami_methods_agree():
    cfg = CFG.with_overrides(m_l=1)
    inp = coverage_inputs(cfg)
    a = coverage(cfg, "alzer", n_outer=256, inputs=inp).p_cov_total
    e = coverage(cfg, "exact", n_outer=256, inputs=inp).p_cov_total
    assert abs(a - e) <= 1e-9
