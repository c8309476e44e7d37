"""Numba kernels for the slotted charging-cycle simulation."""

from __future__ import annotations

import numpy as np
from numba import njit

AWAY, QUEUED = 0, 1


@njit(cache=True)
def run_stations(station_of, members_ptr, members, away_slots, capacity, n_slots, warmup, first_arrival,
                 seed, max_deps, hist_cap):
    """Simulate every station's FIFO charging queue slot by slot.

    A UAV charged during slot ``t`` leaves at boundary ``t + 1``, is away for
    ``away_slots[u]`` slots and queues again at boundary ``t + 1 + away_slots[u]``.
    ``first_arrival[u] >= 1`` is the countdown at the start: the UAV first queues
    at boundary ``first_arrival[u] - 1``.
    Simultaneous arrivals are ordered by a random key.

    Returns per-UAV departure boundaries and waits (all cycles), plus per-station
    counters over the measured slots: slots with >= 1 UAV present, slots with a
    backlog after the chargers are filled, and a backlog histogram.
    """
    np.random.seed(seed)
    n_uav = station_of.shape[0]
    n_st = members_ptr.shape[0] - 1
    phase = np.zeros(n_uav, np.int64)
    countdown = first_arrival.copy()
    phase[:] = AWAY
    arr_slot = np.zeros(n_uav, np.int64)
    key = np.zeros(n_uav)
    deps = np.full((n_uav, max_deps), -1, np.int64)
    waits = np.full((n_uav, max_deps), -1, np.int64)
    n_deps = np.zeros(n_uav, np.int64)
    present_slots = np.zeros(n_st, np.int64)
    backlog_slots = np.zeros(n_st, np.int64)
    hist = np.zeros((n_st, hist_cap + 1), np.int64)
    picked = np.zeros(capacity, np.int64)

    for t in range(n_slots):
        for u in range(n_uav):
            if phase[u] == AWAY:
                countdown[u] -= 1
                if countdown[u] == 0:
                    phase[u] = QUEUED
                    arr_slot[u] = t
                    key[u] = np.random.random()
        for s in range(n_st):
            lo, hi = members_ptr[s], members_ptr[s + 1]
            present = 0
            for q in range(lo, hi):
                if phase[members[q]] == QUEUED:
                    present += 1
            # pick up to `capacity` earliest arrivals (ties by key)
            n_pick = 0
            while n_pick < capacity and n_pick < present:
                best = -1
                for q in range(lo, hi):
                    u = members[q]
                    if phase[u] != QUEUED:
                        continue
                    taken = False
                    for j in range(n_pick):
                        if picked[j] == u:
                            taken = True
                            break
                    if taken:
                        continue
                    if best < 0 or arr_slot[u] < arr_slot[best] or (
                            arr_slot[u] == arr_slot[best] and key[u] < key[best]):
                        best = u
                picked[n_pick] = best
                n_pick += 1
            backlog = present - n_pick
            if t >= warmup:
                if present > 0:
                    present_slots[s] += 1
                if backlog > 0:
                    backlog_slots[s] += 1
                hist[s, min(backlog, hist_cap)] += 1
            for j in range(n_pick):
                u = picked[j]
                if n_deps[u] < max_deps:
                    deps[u, n_deps[u]] = t + 1
                    waits[u, n_deps[u]] = t - arr_slot[u]
                    n_deps[u] += 1
                phase[u] = AWAY
                countdown[u] = away_slots[u] + 1
        # conservation: every UAV is either away or queued
        n_q = 0
        for u in range(n_uav):
            if phase[u] == QUEUED:
                n_q += 1
            elif phase[u] != AWAY:
                raise RuntimeError("UAV in unknown phase")
        if n_q > n_uav:
            raise RuntimeError("queue population exceeds UAV count")
    return deps, waits, n_deps, present_slots, backlog_slots, hist


@njit(cache=True)
def queue_chain(n_uavs, capacity, p_ch, n_chains, n_steps, burn_in, backlog_kernel, seed):
    """Parallel chains of the binomial-arrival occupancy chain; returns a histogram."""
    np.random.seed(seed)
    hist = np.zeros(n_uavs, np.int64)
    for ch in range(n_chains):
        n = 0
        for t in range(burn_in + n_steps):
            m = n_uavs - 1 - n
            p = p_ch[n // capacity]
            k = np.random.binomial(m, p)
            if backlog_kernel:
                n2 = n + k - capacity
                if n2 < 0:
                    n2 = 0
            else:
                n2 = n - min(capacity, n) + k
            if n2 < 0 or n2 > n_uavs - 1:
                raise RuntimeError("occupancy left the state space")
            n = n2
            if t >= burn_in:
                hist[n] += 1
    return hist
