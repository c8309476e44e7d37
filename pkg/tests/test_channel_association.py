import math

import numpy as np
import pytest
from scipy import integrate

from uavcharge.association import AssociationModel, association_probabilities
from uavcharge.channel import (d_los, d_nlos, exclusion_distances, los_probability, los_probability_limit,
                               nlos_probability, station_exclusion, uav_exclusion_from_station)
from uavcharge.geometry import nearest_uav_pdf, user_station_distance_pdf
from uavcharge.params import default_config

CFG = default_config()
CH, H = CFG.channel, CFG.h


def test_los_probability_endpoints():
    assert los_probability(H, CH, H) == pytest.approx(1 / (1 + 25.27 * math.exp(-0.5 * (90 - 25.27))), rel=1e-12)
    assert los_probability(1e12, CH, H) == pytest.approx(los_probability_limit(CH), rel=1e-6)
    assert los_probability_limit(CH) == pytest.approx(1 / (1 + 25.27 * math.exp(25.27 * 0.5)))
    with pytest.raises(ValueError):
        los_probability(H / 2, CH, H)


def test_los_probability_monotone_and_complement():
    r = np.geomspace(H, 1e6, 400)
    p = los_probability(r, CH, H)
    assert np.all(np.diff(p) <= 0)
    assert np.allclose(p + nlos_probability(r, CH, H), 1.0)


def test_symmetric_channel_exclusions():
    ch = CH.__class__(eta_n=1.0, alpha_l=4.0)
    r = np.array([30.0, 60.0, 150.0])
    assert np.allclose(d_los(r, ch, H), np.maximum(H, r))
    assert np.allclose(d_nlos(r, ch, H), np.maximum(H, r))


def test_exclusion_values():
    assert d_nlos(100.0, CH, H) == pytest.approx(60.0)
    assert d_los(200.0, CH, H) == pytest.approx((1 / 100) ** (1 / 2.1) * 200 ** (4 / 2.1))
    ex = exclusion_distances(200.0, CH, H)
    assert ex.d_l == pytest.approx(d_los(200.0, CH, H))


@pytest.mark.parametrize("kind", ["los", "nlos"])
def test_station_uav_exclusions_are_power_balances(kind):
    eta, alpha = (CH.eta_l, CH.alpha_l) if kind == "los" else (CH.eta_n, CH.alpha_n)
    r = 350.0
    R = station_exclusion(r, CH, kind)
    assert CH.rho_u * R ** (-CH.alpha_t) == pytest.approx(eta * CH.rho_u * r ** (-alpha))
    d = uav_exclusion_from_station(R, CH, kind, 0.0)
    assert d == pytest.approx(r)


def test_association_empty_uav_process():
    ap = association_probabilities(120.0, 300.0, 800.0, 1e-20, CH, H, 120.0)
    assert ap.a_los_n == pytest.approx(1.0)
    m = AssociationModel(1e-20, CH, H, 120.0)
    assert m.los_vs_nlos(120.0) == pytest.approx(1.0)


def test_station_candidate_at_zero_distance():
    m = AssociationModel(CFG.net.lambda_u, CH, H, 120.0)
    assert m.station_vs_uav("los", 0.0) == pytest.approx(1.0)
    assert m.station_vs_uav("nlos", 0.0) == pytest.approx(1.0)


def _completeness(r_s, r_c, lam, printed):
    m = AssociationModel(lam, CH, H, 120.0, printed_station_form=printed)
    tm = m.measure

    def uav(kind):
        return integrate.quad(lambda r: float(getattr(m.probabilities(r, r_s, r_c), "a_" + kind)
                                               * nearest_uav_pdf(kind, r, lam, tm)),
                              H, 1e5, points=[100, 300, 1000, 3000], limit=500)[0]

    def station(field, d):
        return integrate.quad(lambda r: float(getattr(m.probabilities(r, r_s, r_c), field)
                                               * user_station_distance_pdf(r, d, 120.0)),
                              max(0.0, d - 120), d + 120, points=[abs(d - 120)], limit=200)[0]

    return uav("los") + uav("nlos") + station("a_cs", r_s) + station("a_cc", r_c)


@pytest.mark.parametrize("r_s, r_c, lam", [(300, 800, 5e-6), (50, 400, 5e-7), (700, 1500, 5e-6)])
def test_association_is_complete(r_s, r_c, lam):
    # the four candidates partition the outcomes: probabilities sum to one
    assert _completeness(r_s, r_c, lam, printed=False) == pytest.approx(1.0, abs=5e-3)


def test_printed_station_exclusion_breaks_completeness():
    assert abs(_completeness(300, 800, 5e-6, printed=True) - 1.0) > 0.1
