"""Slotted charging queue at the typical station, conditioned on N UAVs in its cell.

The chain state is the number ``n`` of *other* UAVs (the typical one excluded)
still queued at the start of a slot after the ``c`` chargers have been filled.
Waiting state ``i = n // c`` means a newly arriving UAV waits ``i`` slots.
During a slot each of the ``N - 1 - n`` absent UAVs arrives independently with
probability ``P_ch(i)``; with ``k`` arrivals the next state is
``max(0, n + k - c)``.

``kernel="departures"`` selects the alternative reading where the state counts
every UAV present and ``min(c, n)`` leave per slot: ``n - min(c, n) + k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, stats

from .energy import EnergyProfile, landing_time
from .geometry import CellCountPmf, first_contact_pdf
from .params import EnergyConfig, NetworkConfig

KERNELS = ("backlog", "departures")


class QueueSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class QueueSolution:
    n_uavs: int
    capacity: int
    p_occupancy: np.ndarray
    p_state: np.ndarray
    arrival_probs: np.ndarray
    p_empty: float
    kernel: str = "backlog"

    @property
    def i_max(self) -> int:
        return self.n_uavs // self.capacity

    def waiting_mass(self) -> float:
        """Probability that an arriving UAV waits at least one slot."""
        return float(self.p_state[1:].sum())


@dataclass(frozen=True)
class ActivityProbabilities:
    p_c_a: float
    p_crs_a: float
    p_r: float
    p_s00: float


def arrival_probability(i, energy: EnergyConfig, profile: EnergyProfile):
    """Probability that an absent UAV reaches the station within one slot in state ``i``."""
    i = np.asarray(i, dtype=float)
    busy = energy.t_ch * (1.0 + i)
    away = 2 * profile.t_land + 2 * profile.t_tra_expected + profile.t_se_expected
    out = busy / (busy + away)
    return float(out) if out.ndim == 0 else out


def transition_matrix(n_uavs: int, capacity: int, energy: EnergyConfig, profile: EnergyProfile,
                      kernel: str = "backlog") -> np.ndarray:
    """Row-stochastic kernel over states ``0..N-1``."""
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    size = n_uavs
    K = np.zeros((size, size))
    for n1 in range(size):
        m = n_uavs - 1 - n1
        k = np.arange(m + 1)
        w = stats.binom.pmf(k, m, arrival_probability(n1 // capacity, energy, profile))
        if kernel == "backlog":
            n2 = np.maximum(0, n1 + k - capacity)
        else:
            n2 = n1 - min(capacity, n1) + k
        np.add.at(K[n1], n2, w)
    return K


def stationary_distribution(K: np.ndarray) -> np.ndarray:
    """Solve ``pi K = pi``, ``sum(pi) = 1`` with a dense linear solve."""
    size = K.shape[0]
    if size == 1:
        return np.ones(1)
    A = K.T - np.eye(size)
    A[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise QueueSolveError(f"singular queue system (cond={np.linalg.cond(A):.3g})") from exc
    if not np.all(np.isfinite(pi)) or np.max(np.abs(pi @ K - pi)) > 1e-9:
        raise QueueSolveError(f"stationary solve did not converge (cond={np.linalg.cond(A):.3g})")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def state_probabilities(p_occupancy: np.ndarray, capacity: int, n_uavs: int) -> np.ndarray:
    i_max = n_uavs // capacity
    out = np.zeros(i_max + 1)
    for i in range(i_max + 1):
        out[i] = p_occupancy[capacity * i: capacity * (i + 1)].sum()
    return out


def solve_queue(n_uavs: int, capacity: int, energy: EnergyConfig, profile: EnergyProfile,
                kernel: str = "backlog") -> QueueSolution:
    if n_uavs < 1 or capacity < 1:
        raise ValueError("solve_queue requires N >= 1 and c >= 1")
    K = transition_matrix(n_uavs, capacity, energy, profile, kernel)
    pi = stationary_distribution(K)
    i_max = n_uavs // capacity
    return QueueSolution(
        n_uavs=n_uavs,
        capacity=capacity,
        p_occupancy=pi,
        p_state=state_probabilities(pi, capacity, n_uavs),
        arrival_probs=np.atleast_1d(arrival_probability(np.arange(i_max + 1), energy, profile)),
        p_empty=float(pi[0]),
        kernel=kernel,
    )


class QueueCache:
    """Memoises ``solve_queue`` over N for a fixed configuration."""

    def __init__(self, capacity: int, energy: EnergyConfig, profile: EnergyProfile, kernel: str = "backlog"):
        self.capacity, self.energy, self.profile, self.kernel = capacity, energy, profile, kernel
        self._store: dict[int, QueueSolution] = {}

    def __call__(self, n_uavs: int) -> QueueSolution:
        if n_uavs not in self._store:
            self._store[n_uavs] = solve_queue(n_uavs, self.capacity, self.energy, self.profile, self.kernel)
        return self._store[n_uavs]


def mixture_weights(pmf: CellCountPmf, convention: str = "renorm") -> tuple[np.ndarray, np.ndarray]:
    """Population sizes ``N`` (typical UAV included) and their weights.

    ``renorm``: ``N = n`` for ``n >= 1``, re-normalised. ``shift``: ``N = n + 1``
    (the typical UAV added to the other ``n``). ``include-n0``: ``N = n`` for
    ``n >= 0``; callers assign the ``N = 0`` term by convention.
    """
    probs = pmf.probabilities / pmf.probabilities.sum()
    n = pmf.support
    if convention == "renorm":
        return n[1:], probs[1:] / probs[1:].sum()
    if convention == "shift":
        return n + 1, probs
    if convention == "include-n0":
        return n, probs
    raise ValueError(f"unknown convention {convention!r}")


@lru_cache(maxsize=4096)
def station_return_fraction(i: int, net: NetworkConfig, energy: EnergyConfig, profile: EnergyProfile) -> float:
    """Expected share of an unavailable period spent at the station, for waiting state ``i``."""
    t_land = landing_time(net.h, energy.a_ave)
    busy = energy.t_ch * (1 + i)

    def f(x):
        return busy / (2 * t_land + 2 * x / energy.v + busy) * first_contact_pdf(net.lambda_c, x)

    hi = np.sqrt(-np.log(1e-16) / (np.pi * net.lambda_c))
    return integrate.quad(f, 0.0, hi, epsabs=1e-10, epsrel=1e-8, limit=200)[0]


def activity_probabilities(net: NetworkConfig, energy: EnergyConfig, profile: EnergyProfile,
                           pmf: CellCountPmf, convention: str = "renorm", kernel: str = "backlog",
                           cache: QueueCache | None = None) -> ActivityProbabilities:
    """Station activity from the empty-substate probability mixed over the cell count."""
    cache = cache or QueueCache(net.capacity_c, energy, profile, kernel)
    probs = pmf.probabilities / pmf.probabilities.sum()
    # a station whose cell holds zero or one UAV has nobody queued
    p_s00 = sum(w * (1.0 if n <= 1 else cache(int(n)).p_empty) for n, w in zip(pmf.support, probs))

    sizes, weights = mixture_weights(pmf, "renorm" if convention == "include-n0" else convention)
    state_mix: dict[int, float] = {}
    for n, w in zip(sizes, weights):
        for i, p in enumerate(cache(int(n)).p_state):
            state_mix[i] = state_mix.get(i, 0.0) + w * p
    p_r = sum(p * station_return_fraction(i, net, energy, profile) for i, p in state_mix.items() if p > 0)
    p_s00 = float(min(max(p_s00, 0.0), 1.0))
    return ActivityProbabilities(
        p_c_a=1.0 - p_s00,
        p_crs_a=float(1.0 - p_s00 * (1.0 - p_r)),
        p_r=float(p_r),
        p_s00=p_s00,
    )
