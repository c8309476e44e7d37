import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

import oracles
from uavcharge.channel import los_probability_horizontal
from uavcharge.geometry import (ThinnedMeasure, cell_count_log_pmf, cell_count_pmf, first_contact_cdf,
                                first_contact_density, first_contact_pdf, hotspot_uav_density, hotspot_uav_pdf,
                                los_measure_quad, nearest_active_station_cdf, nearest_active_station_density,
                                nearest_active_station_pdf, nearest_los_pdf, nearest_nlos_pdf, nearest_uav_cdf,
                                nearest_uav_density, user_station_density, user_station_distance_cdf,
                                user_station_distance_cdf_quad, user_station_distance_pdf)
from uavcharge.params import default_config

NET = default_config().net
CH = default_config().channel


def test_pmf_empty_cell_value():
    pmf = cell_count_pmf(NET.__class__(ratio=1.0))
    a = b = 3.5
    assert pmf.probabilities[0] == pytest.approx(a * b**a / (b + 1) ** (a + 1), rel=1e-12)
    assert pmf.probabilities[0] == pytest.approx(0.3227, abs=5e-5)


@pytest.mark.parametrize("ratio", [0.5, 1.0, 10.0, 20.0])
def test_pmf_normalisation_and_mean(ratio):
    net = NET.__class__(ratio=ratio)
    pmf = cell_count_pmf(net)
    assert pmf.probabilities.sum() + pmf.tail_mass == pytest.approx(1.0, abs=1e-12)
    assert pmf.tail_mass <= 1e-8
    # brute-force moment far past the truncation point
    n = np.arange(20000)
    brute = np.exp(cell_count_log_pmf(n, net))
    assert np.dot(n, brute) == pytest.approx(ratio * 4.5 / 3.5, rel=1e-9)
    assert pmf.mean() == pytest.approx(ratio * 4.5 / 3.5, rel=1e-5)


def test_pmf_ratio10_mean():
    assert cell_count_pmf(NET).mean() == pytest.approx(12.857, abs=1e-3)


def test_pmf_tol_validated():
    with pytest.raises(ValueError):
        cell_count_pmf(NET, tol=0.1)


def test_first_contact_mode_and_value():
    lam = 5e-7
    mode = 1 / math.sqrt(2 * math.pi * lam)
    grid = np.linspace(0.5 * mode, 1.5 * mode, 20001)
    assert grid[np.argmax(first_contact_pdf(lam, grid))] == pytest.approx(mode, rel=1e-4)
    r = 707.1
    assert first_contact_pdf(lam, r) == pytest.approx(2 * math.pi * lam * r * math.exp(-math.pi * lam * r * r))
    assert integrate.quad(lambda x: first_contact_pdf(lam, x), 0, np.inf)[0] == pytest.approx(1.0, abs=1e-9)


def test_hotspot_values():
    assert hotspot_uav_pdf(NET.h, NET) == pytest.approx(2 * NET.h / NET.r_c**2)
    assert hotspot_uav_pdf(100.0, NET) == pytest.approx(200 / 14400)
    assert hotspot_uav_density(NET).normalization() == pytest.approx(1.0, abs=1e-9)


def test_nearest_active_station_reductions():
    r = np.linspace(0, 4000, 50)
    assert np.allclose(nearest_active_station_pdf(r, 0.0, 5e-7), first_contact_pdf(5e-7, r))
    assert nearest_active_station_density(500.0, 2.5e-7).normalization() == pytest.approx(1.0, abs=1e-8)


def test_nearest_active_station_rejection_oracle():
    rng = np.random.default_rng(3)
    d = oracles.nearest_beyond(rng, 2.5e-7, 500.0, 40000)
    assert np.mean(d <= 1000.0) == pytest.approx(nearest_active_station_cdf(1000.0, 500.0, 2.5e-7), abs=0.005)


def test_user_station_centered_disk():
    r = np.linspace(1, NET.r_c - 1, 30)
    assert np.allclose(user_station_distance_pdf(r, 0.0, NET.r_c), 2 * r / NET.r_c**2)
    assert user_station_distance_cdf(200 + 120, 200.0, 120.0) == pytest.approx(1.0)


def test_user_station_monte_carlo():
    rng = np.random.default_rng(11)
    d = oracles.user_station(rng, 200.0, 120.0, 200000)
    assert np.mean(d <= 200.0) == pytest.approx(user_station_distance_cdf(200.0, 200.0, 120.0), abs=0.003)


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.0, 500.0), d=st.floats(0.0, 400.0))
def test_user_station_cdf_matches_quadrature(r, d):
    assert user_station_distance_cdf(r, d, 120.0) == pytest.approx(user_station_distance_cdf_quad(r, d, 120.0),
                                                                   abs=1e-6)


@pytest.mark.parametrize("d", [0.0, 60.0, 119.0, 120.0, 200.0, 1000.0])
def test_user_station_normalisation(d):
    assert user_station_density(d, 120.0).normalization() == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("z", [10.0, 100.0, 500.0, 2000.0, 1e4, 1e6])
def test_los_measure_quadrature(z):
    tm = ThinnedMeasure(CH, NET.h)
    assert tm.los(z) == pytest.approx(los_measure_quad(z, CH, NET.h), rel=1e-7)
    assert tm.nlos(z) + tm.los(z) == pytest.approx(z * z / 2, rel=1e-12)


def test_nearest_uav_vanishing_density():
    tm = ThinnedMeasure(CH, NET.h)
    r = np.linspace(NET.h, 3000, 40)
    assert np.max(nearest_los_pdf(r, 1e-15, CH, NET.h, tm)) < 1e-10
    assert np.max(nearest_nlos_pdf(r, 1e-15, CH, NET.h, tm)) < 1e-10


def test_nearest_uav_full_los_reduces_to_first_contact():
    ch = CH.__class__(env_A=1e-12, env_B=1e-12)  # LoS probability ~1 everywhere
    tm = ThinnedMeasure(ch, NET.h)
    lam = 5e-6
    r = np.linspace(NET.h, 1500, 30)
    z = np.sqrt(r * r - NET.h**2)
    assert np.allclose(nearest_uav_cdf("los", r, lam, tm), first_contact_cdf(lam, z), atol=1e-9)


@pytest.mark.parametrize("kind", ["los", "nlos"])
def test_nearest_uav_normalisation_and_cdf_limit(kind):
    tm = ThinnedMeasure(CH, NET.h)
    dens = nearest_uav_density(kind, NET.lambda_u, tm)
    assert dens.normalization() == pytest.approx(1.0, abs=1e-6)
    assert float(dens.cdf(dens.support[1])) == pytest.approx(1.0, abs=1e-6)


def test_sampler_inverts_cdf():
    dens = first_contact_density(5e-7)
    u = np.linspace(0.001, 0.999, 101)
    assert np.allclose(dens.cdf(dens.ppf(u)), u, atol=1e-9)


def test_first_contact_geometric_ks():
    rng = np.random.default_rng(5)
    d = oracles.first_contact(rng, 5e-7, 20000)
    assert stats.kstest(d, lambda x: first_contact_cdf(5e-7, x)).pvalue > 0.01


def test_los_probability_used_by_oracle_is_bounded():
    z = np.geomspace(1, 1e7, 50)
    p = los_probability_horizontal(z, CH, NET.h)
    assert np.all((p >= 0) & (p <= 1)) and np.all(np.diff(p) <= 1e-15)
