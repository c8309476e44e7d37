"""Battery budget: travel, landing and service times of a UAV."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .params import ConfigError, EnergyConfig, NetworkConfig, RotorParams


@dataclass(frozen=True)
class EnergyProfile:
    """Expected per-cycle timings for a UAV at the mean station distance (s, m/s, J, m)."""

    t_land: float
    v_max: float
    e_l: float
    expected_r_s: float
    t_tra_expected: float
    t_se_expected: float


def blade_power(v, rotor: RotorParams):
    """Propulsion power (W) of a rotary-wing UAV flying level at speed ``v``."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("blade_power requires v > 0 (induced term diverges at v = 0)")
    profile = rotor.p_0 * (1.0 + 3.0 * v**2 / rotor.u_tip**2)
    induced = rotor.p_i * rotor.v_0 / v
    drag = 0.5 * rotor.d_0 * rotor.rho_air * rotor.rotor_solidity_s * rotor.rotor_area_A * v**3
    out = profile + induced + drag
    return float(out) if out.ndim == 0 else out


def energy_per_meter(v, rotor: RotorParams):
    return blade_power(v, rotor) / np.asarray(v, dtype=float)


def optimal_velocity(rotor: RotorParams, v_lo: float = 0.5, v_hi: float = 60.0,
                     xtol: float = 1e-4) -> float:
    """Speed in ``[v_lo, v_hi]`` minimising travel energy per metre."""
    res = optimize.minimize_scalar(lambda v: energy_per_meter(v, rotor), bounds=(v_lo, v_hi),
                                   method="bounded", options={"xatol": xtol})
    if not math.isfinite(res.fun):
        raise ValueError("non-finite power evaluation while searching for optimal velocity")
    # bounded Brent stops within xtol of an active bound; snap to it
    for bound in (v_lo, v_hi):
        if abs(res.x - bound) < 10 * xtol and energy_per_meter(bound, rotor) <= res.fun:
            return bound
    return float(res.x)


def landing_time(h: float, a_ave: float) -> float:
    """Time spent landing or taking off, ``2*sqrt(2h/a)``."""
    return 2.0 * math.sqrt(2.0 * h / a_ave)


def max_vertical_speed(h: float, a_ave: float) -> float:
    return math.sqrt(2.0 * h * a_ave)


def vertical_power(v, rotor: RotorParams):
    """Blade power with the induced term capped at its hover value ``P_i``.

    ``P_i v_0 / v`` is a forward-flight form that diverges as ``v -> 0``; the
    vertical phases start and end at rest, so the cap keeps their energy finite.
    """
    v = np.asarray(v, dtype=float)
    profile = rotor.p_0 * (1.0 + 3.0 * v**2 / rotor.u_tip**2)
    induced = rotor.p_i * np.minimum(rotor.v_0 / np.maximum(v, 1e-300), 1.0)
    drag = 0.5 * rotor.d_0 * rotor.rho_air * rotor.rotor_solidity_s * rotor.rotor_area_A * v**3
    out = profile + induced + drag
    return float(out) if out.ndim == 0 else out


def landing_energy(h: float, a_ave: float, rotor: RotorParams, reading: str = "dt") -> float:
    """Vertical-phase energy from the blade model, as a cross-check of ``e_l``.

    ``reading="t_dt"`` integrates ``P(v(t)) * t dt`` literally; ``"dt"`` integrates
    ``P(v(t)) dt``, which is dimensionally an energy. Neither replaces the
    configured ``e_l``.
    """
    if reading not in ("dt", "t_dt"):
        raise ValueError(f"unknown reading {reading!r}")
    t_end = math.sqrt(2.0 * h / a_ave)
    v_max = max_vertical_speed(h, a_ave)
    weight = (lambda t: t) if reading == "t_dt" else (lambda t: 1.0)
    # the cap switches on where v = v_0
    brk = [min(rotor.v_0 / a_ave, t_end)]
    up = integrate.quad(lambda t: float(vertical_power(a_ave * t, rotor)) * weight(t), 0.0, t_end,
                        points=brk, epsabs=1e-8, epsrel=1e-10, limit=200)[0]
    down = integrate.quad(lambda t: float(vertical_power(v_max - a_ave * t, rotor)) * weight(t), 0.0, t_end,
                          points=[max(t_end - brk[0], 0.0)], epsabs=1e-8, epsrel=1e-10, limit=200)[0]
    return up + down


def service_time(r_s, energy: EnergyConfig):
    """Hover/service time (s) left after the round trip to a station ``r_s`` metres away.

    Negative values mean the battery cannot cover the trip.
    """
    r_s = np.asarray(r_s, dtype=float)
    out = (energy.b_max - 2.0 * energy.p_m * r_s / energy.v - 2.0 * energy.e_l) / energy.p_s
    return float(out) if out.ndim == 0 else out


def mean_station_distance(lambda_c: float) -> float:
    return 1.0 / (2.0 * math.sqrt(lambda_c))


def expected_profile(net: NetworkConfig, energy: EnergyConfig) -> EnergyProfile:
    r_s = mean_station_distance(net.lambda_c)
    t_se = service_time(r_s, energy)
    if t_se <= 0:
        raise ConfigError(f"expected service time {t_se:.3g} s is not positive", field_name="b_max")
    return EnergyProfile(
        t_land=landing_time(net.h, energy.a_ave),
        v_max=max_vertical_speed(net.h, energy.a_ave),
        e_l=energy.e_l,
        expected_r_s=r_s,
        t_tra_expected=r_s / energy.v,
        t_se_expected=t_se,
    )


def away_time(r_s, net: NetworkConfig, energy: EnergyConfig):
    """Service plus round-trip travel and two vertical phases for distance ``r_s``."""
    r_s = np.asarray(r_s, dtype=float)
    return (np.maximum(service_time(r_s, energy), 0.0) + 2.0 * r_s / energy.v
            + 2.0 * landing_time(net.h, energy.a_ave))
