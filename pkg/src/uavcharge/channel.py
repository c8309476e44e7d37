"""Air-to-ground LoS model and the received-power exclusion distances.

Exclusion distances answer "how far must a rival be for the candidate at
distance ``r`` to be the strongest on average?":

* ``d_n(r)``: an NLoS UAV must be beyond this 3-D distance to lose to a LoS UAV at ``r``.
* ``d_l(r)``: a LoS UAV must be beyond this to lose to an NLoS UAV at ``r``.
* ``D_l(r)``, ``D_n(r)``: a station must be beyond this ground distance to lose to a
  LoS / NLoS UAV at ``r``.
* ``hat_D_l(r)``, ``hat_D_n(r)``: a LoS / NLoS UAV must be beyond this to lose to
  a station at ground distance ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ChannelConfig


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def los_probability_horizontal(z, channel: ChannelConfig, h: float):
    """LoS probability for a UAV at altitude ``h`` and ground offset ``z`` from the user."""
    z = np.asarray(z, dtype=float)
    angle = np.degrees(np.arctan2(h, z))
    return _out(1.0 / (1.0 + channel.env_A * np.exp(-channel.env_B * (angle - channel.env_A))))


def los_probability(r, channel: ChannelConfig, h: float):
    """LoS probability at 3-D link distance ``r >= h``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < h * (1 - 1e-12)):
        raise ValueError("los_probability requires r >= h")
    z = np.sqrt(np.maximum(r * r - h * h, 0.0))
    return los_probability_horizontal(z, channel, h)


def nlos_probability(r, channel: ChannelConfig, h: float):
    return _out(1.0 - np.asarray(los_probability(r, channel, h)))


def los_probability_limit(channel: ChannelConfig) -> float:
    """LoS probability as the elevation angle tends to zero."""
    return 1.0 / (1.0 + channel.env_A * np.exp(channel.env_A * channel.env_B))


@dataclass(frozen=True)
class ExclusionDistances:
    d_l: float | np.ndarray
    d_n: float | np.ndarray
    big_D_l: float | np.ndarray
    big_D_n: float | np.ndarray
    hat_D_l: float | np.ndarray
    hat_D_n: float | np.ndarray


def d_los(r, channel: ChannelConfig, h: float):
    """Distance beyond which a LoS UAV is weaker than an NLoS UAV at ``r`` (floored at h)."""
    r = np.asarray(r, dtype=float)
    val = (channel.eta_l / channel.eta_n) ** (1.0 / channel.alpha_l) * r ** (channel.alpha_n / channel.alpha_l)
    return _out(np.maximum(h, val))


def d_nlos(r, channel: ChannelConfig, h: float):
    r = np.asarray(r, dtype=float)
    val = (channel.eta_n / channel.eta_l) ** (1.0 / channel.alpha_n) * r ** (channel.alpha_l / channel.alpha_n)
    return _out(np.maximum(h, val))


def station_exclusion(r, channel: ChannelConfig, kind: str, printed: bool = False):
    """Ground distance beyond which a station is weaker than a ``kind`` UAV at ``r``.

    Equal average power means ``rho R^-alpha_t = eta rho r^-alpha``, i.e.
    ``R = r^(alpha/alpha_t) * eta^(-1/alpha_t)``. ``printed=True`` uses the
    ``+1/alpha_t`` exponent on ``eta`` instead (kept for comparison only).
    """
    r = np.asarray(r, dtype=float)
    eta, alpha = (channel.eta_l, channel.alpha_l) if kind == "los" else (channel.eta_n, channel.alpha_n)
    sign = 1.0 if printed else -1.0
    return _out(r ** (alpha / channel.alpha_t) * eta ** (sign / channel.alpha_t))


def uav_exclusion_from_station(r, channel: ChannelConfig, kind: str, h: float):
    """3-D distance beyond which a ``kind`` UAV is weaker than a station at ground distance ``r``."""
    r = np.asarray(r, dtype=float)
    eta, alpha = (channel.eta_l, channel.alpha_l) if kind == "los" else (channel.eta_n, channel.alpha_n)
    with np.errstate(divide="ignore"):
        val = r ** (channel.alpha_t / alpha) * eta ** (1.0 / alpha)
    return _out(np.maximum(h, val))


def exclusion_distances(r, channel: ChannelConfig, h: float, printed_station_form: bool = False) -> ExclusionDistances:
    return ExclusionDistances(
        d_l=d_los(r, channel, h),
        d_n=d_nlos(r, channel, h),
        big_D_l=station_exclusion(r, channel, "los", printed_station_form),
        big_D_n=station_exclusion(r, channel, "nlos", printed_station_form),
        hat_D_l=uav_exclusion_from_station(r, channel, "los", h),
        hat_D_n=uav_exclusion_from_station(r, channel, "nlos", h),
    )


def horizontal(r, h: float):
    """Ground offset of a UAV at 3-D distance ``r`` (clamped at 0)."""
    r = np.asarray(r, dtype=float)
    return _out(np.sqrt(np.maximum(r * r - h * h, 0.0)))
