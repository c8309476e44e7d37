import math

import numpy as np
import pytest
from scipy import integrate

from uavcharge.channel import los_probability_horizontal
from uavcharge.laplace import (InterferenceField, ServingCase, case_limits, derivatives_from_log,
                               laplace_derivatives, laplace_interference, laplace_noise_plus_interference,
                               mean_interference, station_term_closed_form)
from uavcharge.params import default_config
from uavcharge.simulation import estimate_laplace

CFG = default_config()
CH, H = CFG.channel, CFG.h
LU, LC = 3.7e-6, 1.4e-7
CASES = [ServingCase("hotspot_uav", 100.0), ServingCase("los_uav", 150.0), ServingCase("nlos_uav", 120.0),
         ServingCase("station", 150.0, True, 200.0, 400.0), ServingCase("station", 150.0, False, None, 400.0)]


@pytest.mark.parametrize("case", CASES)
def test_zero_argument_and_empty_field(case):
    assert laplace_interference(0.0, case, LU, LC, CH, H) == 1.0
    assert laplace_interference(1e9, case, 0.0, 0.0, CH, H) == 1.0


def test_invalid_inputs():
    with pytest.raises(ValueError):
        laplace_interference(-1.0, CASES[0], LU, LC, CH, H)
    with pytest.raises(ValueError):
        ServingCase("satellite", 10.0)
    with pytest.raises(ValueError):
        ServingCase("station", 10.0, True, None, 20.0)


@pytest.mark.parametrize("s", [1e6, 1e8, 1e10])
def test_noise_factor(s):
    case = CASES[1]
    L = laplace_interference(s, case, LU, LC, CH, H)
    assert laplace_noise_plus_interference(s, case, LU, LC, CH, H, sigma2=0.0) == pytest.approx(L, rel=1e-14)
    assert laplace_noise_plus_interference(s, case, LU, LC, CH, H) == pytest.approx(L * math.exp(-s * CH.sigma2))


@pytest.mark.parametrize("s, lo", [(1e6, 50.0), (1e9, 300.0), (1e11, 0.0), (3e12, 2000.0)])
def test_station_term_closed_form(s, lo):
    field = InterferenceField(0.0, 1.0, CH, H)
    f = field.log_derivatives(s, 0.0, 0.0, lo, order=0, sigma2=0.0)[0]
    assert float(-f[0] / (2 * math.pi)) == pytest.approx(station_term_closed_form(s, lo, CH), rel=1e-8)


def _uav_term_quad(s, lo, los):
    """``∫_lo^∞ (1 - MGF) z P(z) dz`` by adaptive quadrature with a power-law tail."""
    ch = CH
    gain, alpha, m = (ch.eta_l * ch.rho_u, ch.alpha_l, ch.m_l) if los else (ch.eta_n * ch.rho_u, ch.alpha_n, ch.m_n)

    def f(z):
        p = los_probability_horizontal(z, ch, H)
        K = gain * (z * z + H * H) ** (-alpha / 2)
        # 1 - (1 + x)^-m without cancellation for small x
        return -math.expm1(-m * math.log1p(s * K / m)) * z * (p if los else 1 - p)

    grid = np.geomspace(1.0, 1e12, 241)
    edges = [lo] + [e for e in grid if e > lo]
    val = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-10, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
    p_end = los_probability_horizontal(edges[-1], ch, H)
    return val + s * gain * (p_end if los else 1 - p_end) * edges[-1] ** (2 - alpha) / (alpha - 2)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")  # roundoff notes on far panels
@pytest.mark.parametrize("s, a, b", [(1e5, 0.0, 0.0), (1e7, 200.0, 150.0), (1e9, 50.0, 3000.0)])
def test_uav_terms_match_quadrature(s, a, b):
    field = InterferenceField(1.0, 0.0, CH, H)
    f = field.log_derivatives(s, a, b, 0.0, order=0, sigma2=0.0)[0]
    expect = _uav_term_quad(s, a, False) + _uav_term_quad(s, b, True)
    assert float(-f[0] / (2 * math.pi)) == pytest.approx(expect, rel=1e-7)


@pytest.mark.parametrize("case", CASES[1:])
def test_first_derivative_at_zero_is_campbell_mean(case):
    d1 = laplace_derivatives(0.0, 1, case, LU, LC, CH, H)
    assert d1 == pytest.approx(-(CH.sigma2 + mean_interference(case, LU, LC, CH, H)), rel=1e-6)


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_derivatives_match_finite_differences(case, k):
    a, b, c = case_limits(case, CH, H)
    field = InterferenceField(LU, LC, CH, H)
    s = 3e8 if case.kind == "station" else 3e6
    step = 1e-2 * s
    # central difference of the (k-1)-th derivative
    lo, hi = (field.derivatives(x, a, b, c, order=k - 1)[k - 1, 0] for x in (s - step, s + step))
    fd = (hi - lo) / (2 * step)
    exact = field.derivatives(s, a, b, c, order=k)[k, 0]
    assert exact == pytest.approx(fd, rel=1e-3)
    assert laplace_derivatives(s, 0, case, LU, LC, CH, H) == pytest.approx(
        laplace_noise_plus_interference(s, case, LU, LC, CH, H))


def test_derivative_recurrence_exponential_oracle():
    # log L = -λ s  ⇒  L^(n) = (-λ)^n e^{-λ s}
    lam, s = 0.7, 1.3
    f = np.array([-lam * s, -lam, 0.0, 0.0, 0.0])
    L = derivatives_from_log(f)
    assert np.allclose(L, [(-lam) ** n * math.exp(-lam * s) for n in range(5)])


@pytest.mark.parametrize("case", CASES)
def test_complete_monotonicity(case):
    a, b, c = case_limits(case, CH, H)
    field = InterferenceField(LU, LC, CH, H)
    s = np.geomspace(1e4, 1e10, 25)
    L = field.derivatives(s, a, b, c, order=3)
    for k in range(4):
        assert np.all((-1) ** k * L[k] >= 0)


def test_monte_carlo_small():
    case = ServingCase("hotspot_uav", 100.0)
    est = estimate_laplace(1e6, case, LU, LC, CH, H, realizations=20000, seed=3)
    assert est.estimate == pytest.approx(laplace_interference(1e6, case, LU, LC, CH, H), rel=0.02)


def test_monte_carlo_trivial():
    case = ServingCase("los_uav", 150.0)
    zero = estimate_laplace(0.0, case, LU, LC, CH, H, realizations=500)
    assert zero.estimate == 1.0 and zero.half_width_95 == 0.0
    assert estimate_laplace(1e8, case, 0.0, 0.0, CH, H, realizations=500).estimate == 1.0
