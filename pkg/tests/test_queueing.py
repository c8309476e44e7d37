import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavcharge.energy import expected_profile
from uavcharge.geometry import cell_count_pmf
from uavcharge.params import default_config
from uavcharge.queueing import (KERNELS, QueueCache, activity_probabilities, arrival_probability,
                                mixture_weights, solve_queue, station_return_fraction, transition_matrix)
from uavcharge.simulation import simulate_queue_chain

CFG = default_config()
PROF = expected_profile(CFG.net, CFG.energy)


def test_arrival_probability_default_value():
    expect = 300 / (300 + 2 * PROF.t_land + 2 * PROF.t_tra_expected + PROF.t_se_expected)
    assert arrival_probability(0, CFG.energy, PROF) == pytest.approx(expect)
    assert arrival_probability(0, CFG.energy, PROF) == pytest.approx(0.1424, abs=1e-4)


def test_arrival_probability_limits():
    assert arrival_probability(1e9, CFG.energy, PROF) == pytest.approx(1.0, abs=1e-6)
    fast = CFG.energy.__class__(t_ch=1e-9)
    assert arrival_probability(0, fast, PROF) == pytest.approx(0.0, abs=1e-11)
    p = arrival_probability(np.arange(10), CFG.energy, PROF)
    assert np.all(np.diff(p) > 0)


@pytest.mark.parametrize("kernel", KERNELS)
@pytest.mark.parametrize("n, c", [(1, 1), (2, 1), (7, 3), (12, 4), (30, 2)])
def test_kernel_row_stochastic(kernel, n, c):
    K = transition_matrix(n, c, CFG.energy, PROF, kernel)
    assert np.allclose(K.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(K >= 0)


@pytest.mark.parametrize("c", [1, 3])
def test_single_uav(c):
    q = solve_queue(1, c, CFG.energy, PROF)
    assert np.array_equal(q.p_occupancy, [1.0]) and q.p_empty == 1.0
    assert q.waiting_mass() == 0.0


@pytest.mark.parametrize("n, c", [(2, 2), (3, 4), (5, 5)])
def test_capacity_exceeds_population(n, c):
    q = solve_queue(n, c, CFG.energy, PROF)
    assert q.p_empty == pytest.approx(1.0)
    assert q.p_state[0] == pytest.approx(1.0)


def test_stationary_matches_chain_simulation():
    q = solve_queue(6, 2, CFG.energy, PROF)
    hist = simulate_queue_chain(6, 2, CFG.energy, PROF, slots=10**6, seed=1)
    assert 0.5 * np.abs(hist - q.p_occupancy).sum() < 0.01


def test_chain_simulation_trivial_cases():
    assert np.array_equal(simulate_queue_chain(1, 1, CFG.energy, PROF, slots=10**5), [1.0])
    hist = simulate_queue_chain(3, 4, CFG.energy, PROF, slots=10**5)
    assert hist[0] == 1.0
    with pytest.raises(ValueError):
        simulate_queue_chain(4, 1, CFG.energy, PROF, slots=10)


def test_chain_simulation_departures_kernel():
    q = solve_queue(8, 3, CFG.energy, PROF, kernel="departures")
    hist = simulate_queue_chain(8, 3, CFG.energy, PROF, slots=10**6, seed=2, kernel="departures")
    assert 0.5 * np.abs(hist - q.p_occupancy).sum() < 0.01


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 40), c=st.integers(1, 6))
def test_more_capacity_never_more_waiting(n, c):
    a = solve_queue(n, c, CFG.energy, PROF)
    b = solve_queue(n, c + 1, CFG.energy, PROF)
    assert b.p_empty >= a.p_empty - 1e-12
    assert np.isclose(a.p_state.sum(), 1.0)


@pytest.mark.parametrize("conv", ["renorm", "shift", "include-n0"])
def test_mixture_weights_normalised(conv):
    sizes, w = mixture_weights(cell_count_pmf(CFG.net), conv)
    assert w.sum() == pytest.approx(1.0)
    assert sizes.min() == (0 if conv == "include-n0" else 1)
    with pytest.raises(ValueError):
        mixture_weights(cell_count_pmf(CFG.net), "bogus")


def test_activity_bounds_and_ordering():
    act = activity_probabilities(CFG.net, CFG.energy, PROF, cell_count_pmf(CFG.net))
    assert 0 <= act.p_c_a <= act.p_crs_a <= 1
    assert 0 <= act.p_r <= 1


def test_activity_sparse_limit():
    net = CFG.net.__class__(ratio=1e-4)
    act = activity_probabilities(net, CFG.energy, PROF, cell_count_pmf(net))
    assert act.p_c_a < 1e-6


def test_return_fraction_vanishes_with_short_slots():
    e = CFG.energy.__class__(t_ch=1e-9)
    assert station_return_fraction(0, CFG.net, e, PROF) < 1e-10


def test_queue_cache_reuses():
    cache = QueueCache(2, CFG.energy, PROF)
    assert cache(5) is cache(5)
