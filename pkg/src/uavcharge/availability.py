"""Probability that a UAV is hovering over its hotspot rather than travelling or charging.

For waiting state ``i`` the service share of a cycle at station distance ``x``
is ``Y = T_se(x) / (T_se(x) + T_w(i) + T_ch + 2 x / V + 2 T_land)``. Inverting
for ``x`` gives ``x(y) = (-a1 + a3 y) / (-a2 - a4 y)``, so that
``E[Y] = ∫ P(R_s < x(y)) dy`` over ``[a5, a1 / a3]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .energy import EnergyProfile
from .geometry import CellCountPmf
from .params import ConfigError, EnergyConfig, NetworkConfig
from .queueing import QueueCache, QueueSolution, mixture_weights


@dataclass(frozen=True)
class AvailabilityCoefficients:
    a1: float
    a2: float
    a3: np.ndarray
    a4: float
    a5: np.ndarray


@dataclass(frozen=True)
class AvailabilityReport:
    n_values: np.ndarray
    conditional: np.ndarray
    p_a: float
    max_achievable: np.ndarray
    truncation_n_max: int
    tail_mass: float
    convention: str

    def conditional_at(self, n: int) -> float:
        idx = np.searchsorted(self.n_values, n)
        if idx >= len(self.n_values) or self.n_values[idx] != n:
            raise KeyError(n)
        return float(self.conditional[idx])


def coefficients(i, net: NetworkConfig, energy: EnergyConfig) -> AvailabilityCoefficients:
    i = np.asarray(i, dtype=float)
    budget = energy.b_max - 2 * energy.e_l
    a1 = energy.v * budget
    a2 = 2 * energy.p_m
    a3 = energy.v * (budget + energy.p_s * energy.t_ch * (1 + i)
                     + 4 * energy.p_s * math.sqrt(2 * net.h / energy.a_ave))
    a4 = 2 * (energy.p_s - energy.p_m)
    a5 = (2 * energy.p_m * a1 - a2 * energy.v * budget) / (2 * energy.p_m * a3 + a4 * energy.v * budget)
    return AvailabilityCoefficients(a1, a2, a3, a4, a5)


def _check_supported(energy: EnergyConfig) -> None:
    if energy.p_s <= energy.p_m:
        raise ConfigError("hover power must exceed travel power (a4 <= 0 is unsupported)", field_name="p_s")


@lru_cache(maxsize=4096)
def _state_availability(i: int, lambda_c: float, h: float, b_max: float, e_l: float, p_m: float,
                        p_s: float, v: float, a_ave: float, t_ch: float) -> float:
    net = NetworkConfig(lambda_c=lambda_c, h=h)
    energy = EnergyConfig(b_max=b_max, e_l=e_l, p_m=p_m, p_s=p_s, v=v, a_ave=a_ave, t_ch=t_ch)
    co = coefficients(i, net, energy)
    a3, a5 = float(co.a3), float(co.a5)

    def integrand(y):
        x = (-co.a1 + a3 * y) / (-co.a2 - co.a4 * y)
        return -math.expm1(-lambda_c * math.pi * x * x)

    return integrate.quad(integrand, a5, co.a1 / a3, epsabs=1e-10, epsrel=1e-8, limit=200)[0]


def state_availability(i: int, net: NetworkConfig, energy: EnergyConfig) -> float:
    """Expected service share of a cycle when the wait is ``i`` slots."""
    _check_supported(energy)
    return _state_availability(int(i), net.lambda_c, net.h, energy.b_max, energy.e_l, energy.p_m,
                               energy.p_s, energy.v, energy.a_ave, energy.t_ch)


def conditional_availability(n_uavs: int, queue: QueueSolution, net: NetworkConfig,
                             energy: EnergyConfig, profile: EnergyProfile | None = None) -> float:
    """``P(a | N)``: state availabilities weighted by the waiting-state law.

    States beyond the reachable range carry zero mass, so summing over every
    state equals the truncated sum up to ``I_max - 1`` whenever ``N >= c``.
    """
    if queue.n_uavs != n_uavs:
        raise ValueError("queue solution was computed for a different N")
    return float(sum(p * state_availability(i, net, energy) for i, p in enumerate(queue.p_state) if p > 0))


def availability(net: NetworkConfig, energy: EnergyConfig, profile: EnergyProfile, pmf: CellCountPmf,
                 convention: str = "renorm", kernel: str = "backlog",
                 cache: QueueCache | None = None) -> AvailabilityReport:
    """Unconditional availability mixed over the cell-count law.

    ``convention`` is one of ``renorm`` (N >= 1 re-normalised), ``shift``
    (N = 1 + n) or ``include-n0`` (n = 0 included with ``P(a|0) = 1``).
    """
    _check_supported(energy)
    cache = cache or QueueCache(net.capacity_c, energy, profile, kernel)
    sizes, weights = mixture_weights(pmf, convention)
    ceiling = state_availability(0, net, energy)
    cond = np.empty(len(sizes))
    for k, n in enumerate(sizes):
        cond[k] = 1.0 if n == 0 else conditional_availability(int(n), cache(int(n)), net, energy)
    return AvailabilityReport(
        n_values=np.asarray(sizes),
        conditional=cond,
        p_a=float(np.dot(weights, cond)),
        max_achievable=np.where(np.asarray(sizes) == 0, 1.0, ceiling),
        truncation_n_max=pmf.truncation_n_max,
        tail_mass=pmf.tail_mass,
        convention=convention,
    )
