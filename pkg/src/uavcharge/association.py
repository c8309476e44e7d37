"""Strongest-average-power association when the hotspot UAV is away.

The candidates are the nearest available LoS UAV, the nearest available NLoS
UAV, the typical station (distance ``R_su`` from the user) and the nearest
other active station (``R_cu``). Each factor below is the probability that
one rival is too far to beat a candidate at distance ``r``. Given ``R_s`` and
``R_c``, the rivals are independent, so a candidate's association probability
is the product of its factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import d_los, d_nlos, horizontal, station_exclusion, uav_exclusion_from_station
from .geometry import ThinnedMeasure, user_station_distance_cdf
from .params import ChannelConfig


@dataclass(frozen=True)
class AssociationProbabilities:
    """Association probabilities at distance ``r`` given ``(R_s, R_c)``.

    Suffix-free fields assume the typical station is active; ``*_n`` fields
    assume it is inactive.
    """

    a_los: np.ndarray
    a_nlos: np.ndarray
    a_cs: np.ndarray
    a_cc: np.ndarray
    a_los_n: np.ndarray
    a_nlos_n: np.ndarray
    a_cc_n: np.ndarray


class AssociationModel:
    def __init__(self, lam_u_avail: float, channel: ChannelConfig, h: float, r_c: float,
                 measure: ThinnedMeasure | None = None, printed_station_form: bool = False):
        self.lam_u = lam_u_avail
        self.channel = channel
        self.h = h
        self.r_c = r_c
        self.measure = measure or ThinnedMeasure(channel, h)
        self.printed = printed_station_form

    def _void(self, kind: str, d):
        """Probability that no available ``kind`` UAV lies within 3-D distance ``d``."""
        z = horizontal(d, self.h)
        return np.exp(-2 * np.pi * self.lam_u * np.asarray(self.measure.measure(kind, z)))

    # UAV candidate at 3-D distance r
    def los_vs_nlos(self, r):
        return self._void("nlos", d_nlos(r, self.channel, self.h))

    def nlos_vs_los(self, r):
        return self._void("los", d_los(r, self.channel, self.h))

    def uav_vs_station(self, kind: str, r, center_dist):
        excl = station_exclusion(r, self.channel, kind, self.printed)
        return 1.0 - np.asarray(user_station_distance_cdf(excl, center_dist, self.r_c))

    # station candidate at ground distance r
    def station_vs_uav(self, kind: str, r):
        return self._void(kind, uav_exclusion_from_station(r, self.channel, kind, self.h))

    def station_vs_station(self, r, other_center_dist):
        return 1.0 - np.asarray(user_station_distance_cdf(r, other_center_dist, self.r_c))

    def probabilities(self, r, r_s, r_c) -> AssociationProbabilities:
        r, r_s, r_c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, r_s, r_c)))
        ln, nl = self.los_vs_nlos(r), self.nlos_vs_los(r)
        l_cs, l_cc = self.uav_vs_station("los", r, r_s), self.uav_vs_station("los", r, r_c)
        n_cs, n_cc = self.uav_vs_station("nlos", r, r_s), self.uav_vs_station("nlos", r, r_c)
        st_uav = self.station_vs_uav("los", r) * self.station_vs_uav("nlos", r)
        return AssociationProbabilities(
            a_los=ln * l_cs * l_cc,
            a_nlos=nl * n_cs * n_cc,
            a_cs=st_uav * self.station_vs_station(r, r_c),
            a_cc=st_uav * self.station_vs_station(r, r_s),
            a_los_n=ln * l_cc,
            a_nlos_n=nl * n_cc,
            a_cc_n=st_uav,
        )


def association_probabilities(r, r_s, r_c, lam_u_avail: float, channel: ChannelConfig, h: float,
                              r_c_disk: float, printed_station_form: bool = False) -> AssociationProbabilities:
    model = AssociationModel(lam_u_avail, channel, h, r_c_disk, printed_station_form=printed_station_form)
    return model.probabilities(r, r_s, r_c)
