"""Laplace transform of the aggregate interference seen by the typical user.

Interferers form three independent PPPs: NLoS UAVs, LoS UAVs (both thinned
from the available UAVs by the LoS probability) and active stations. Each
contributes a PGFL factor ``exp(-2πλ ∫_lo^∞ (1 - u(s, z)) w(z) dz)`` where
``u`` is the Nakagami MGF of the interferer's received power and ``lo`` is the
exclusion radius implied by the association rule.

Derivatives in ``s`` are taken on ``log L`` (only the MGF depends on ``s``)
and recombined with the recurrence
``L^(n) = Σ_{j<n} C(n-1, j) f^(j+1) L^(n-1-j)``, ``f = log L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._quad import panel_rule
from .channel import (d_los, d_nlos, los_probability_horizontal, los_probability_limit, station_exclusion,
                      uav_exclusion_from_station)
from .params import ChannelConfig

SERVING_KINDS = ("hotspot_uav", "los_uav", "nlos_uav", "station")

Z_END = 1e9


@dataclass(frozen=True)
class ServingCase:
    """Who serves the typical user, and from how far.

    ``r`` is the 3-D link distance for UAVs and the ground distance for stations.
    A station case needs ``r_cu`` and, when the typical station is active, ``r_su``.
    """

    kind: str
    r: float
    station_active: bool = True
    r_su: float | None = None
    r_cu: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in SERVING_KINDS:
            raise ValueError(f"unknown serving kind {self.kind!r}")
        if self.kind == "station":
            if self.r_cu is None or (self.station_active and self.r_su is None):
                raise ValueError("station case needs r_cu (and r_su when the typical station is active)")


def exclusion_limits(kind: str, r, channel: ChannelConfig, h: float, r_station_excl=None,
                     printed_station_form: bool = False):
    """Lower integration limits ``(a, b, c)`` for NLoS UAVs, LoS UAVs and stations.

    ``a`` and ``b`` are horizontal offsets; ``c`` is a ground distance. For the
    station kind ``r_station_excl`` is the station exclusion radius (defaults to ``r``).
    """
    r = np.asarray(r, dtype=float)
    zero = np.zeros_like(r)

    def horiz(d):
        return np.sqrt(np.maximum(np.asarray(d) ** 2 - h * h, 0.0))

    if kind == "hotspot_uav":
        return zero, zero, zero
    if kind == "los_uav":
        return horiz(d_nlos(r, channel, h)), horiz(r), np.asarray(
            station_exclusion(r, channel, "los", printed_station_form)) + zero
    if kind == "nlos_uav":
        return horiz(r), horiz(d_los(r, channel, h)), np.asarray(
            station_exclusion(r, channel, "nlos", printed_station_form)) + zero
    if kind == "station":
        c = r if r_station_excl is None else np.asarray(r_station_excl, dtype=float) + zero
        return (horiz(uav_exclusion_from_station(r, channel, "nlos", h)),
                horiz(uav_exclusion_from_station(r, channel, "los", h)), c)
    raise ValueError(f"unknown serving kind {kind!r}")


def case_limits(case: ServingCase, channel: ChannelConfig, h: float, printed_station_form: bool = False):
    excl = None
    if case.kind == "station":
        excl = min(case.r_su, case.r_cu) if case.station_active else case.r_cu
    a, b, c = exclusion_limits(case.kind, case.r, channel, h, excl, printed_station_form)
    return float(a), float(b), float(c)


def _offset_rule(order: int = 12) -> tuple[np.ndarray, np.ndarray]:
    edges = np.concatenate([np.arange(0.0, 1000.0, 10.0), np.geomspace(1000.0, Z_END, 110)])
    return panel_rule(edges, order)


_T_NODES, _T_WEIGHTS = _offset_rule()


def _rising(m: float, j: int) -> float:
    """Rising factorial ``m (m+1) ... (m+j-1)``."""
    return float(special.poch(m, j))


class InterferenceField:
    """Interferer densities plus channel constants; evaluates ``log L`` and its derivatives."""

    def __init__(self, lam_u_avail: float, lam_c_active: float, channel: ChannelConfig, h: float):
        self.lam_u = float(lam_u_avail)
        self.lam_c = float(lam_c_active)
        self.channel = channel
        self.h = float(h)
        self.p_inf = los_probability_limit(channel)

    def _term(self, s, lo, order, kind):
        ch = self.channel
        if kind == "station":
            gain, alpha, m = ch.rho_u, ch.alpha_t, 1
        elif kind == "los":
            gain, alpha, m = ch.eta_l * ch.rho_u, ch.alpha_l, ch.m_l
        else:
            gain, alpha, m = ch.eta_n * ch.rho_u, ch.alpha_n, ch.m_n
        z = lo[:, None] + _T_NODES[None, :]
        w = _T_WEIGHTS[None, :]
        if kind == "station":
            K = gain * z ** (-alpha)
            base = w * z
        else:
            K = gain * (z * z + self.h**2) ** (-alpha / 2)
            p_l = los_probability_horizontal(z, ch, self.h)
            base = w * z * (p_l if kind == "los" else 1.0 - p_l)
        # out[0] = ∫ (1 - u) base, out[j] = ∫ u^(j) base with u = (1 + sK/m)^-m
        x = s[:, None] * K / m
        out = np.empty((order + 1, len(s)))
        out[0] = np.sum(base * -np.expm1(-m * np.log1p(x)), axis=1)
        if order:
            head = (1.0 + x) ** (-m)
            ratio = K / m / (1.0 + x)
            for j in range(1, order + 1):
                out[j] = (-1) ** j * _rising(m, j) * np.sum(base * head * ratio**j, axis=1)
        # analytic far tail, where the MGF is linear in s
        z_end = lo + Z_END
        p_end = 1.0 if kind == "station" else (self.p_inf if kind == "los" else 1.0 - self.p_inf)
        tail = gain * p_end * z_end ** (2 - alpha) / (alpha - 2)
        out[0] += s * tail
        if order:
            out[1] -= tail
        return out

    def log_derivatives(self, s, a, b, c, order: int = 0, sigma2: float | None = None,
                        chunk: int = 512) -> np.ndarray:
        """Array ``f[j]`` of ``d^j/ds^j log L_{σ²+I}(s)``, ``j = 0..order``.

        ``sigma2=None`` uses the channel noise power; pass 0 for interference only.
        """
        s, a, b, c = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (s, a, b, c)))
        shape = s.shape
        s, a, b, c = (v.ravel() for v in (s, a, b, c))
        noise = self.channel.sigma2 if sigma2 is None else sigma2
        out = np.zeros((order + 1, s.size))
        for start in range(0, s.size, chunk):
            sl = slice(start, start + chunk)
            acc = np.zeros((order + 1, len(s[sl])))
            if self.lam_u > 0:
                acc += 2 * np.pi * self.lam_u * (self._term(s[sl], a[sl], order, "nlos")
                                                 + self._term(s[sl], b[sl], order, "los"))
            if self.lam_c > 0:
                acc += 2 * np.pi * self.lam_c * self._term(s[sl], c[sl], order, "station")
            acc[0] *= -1.0
            out[:, sl] = acc
        out[0] -= s * noise
        if order:
            out[1] -= noise
        return out.reshape((order + 1,) + shape)

    def derivatives(self, s, a, b, c, order: int = 0, sigma2: float | None = None) -> np.ndarray:
        """``L^{(j)}(s)`` for ``j = 0..order`` via the exponential recurrence."""
        f = self.log_derivatives(s, a, b, c, order, sigma2)
        return derivatives_from_log(f)

    def transform(self, s, a, b, c, sigma2: float | None = None):
        return np.exp(self.log_derivatives(s, a, b, c, 0, sigma2)[0])


def derivatives_from_log(f: np.ndarray) -> np.ndarray:
    order = f.shape[0] - 1
    L = np.empty_like(f)
    L[0] = np.exp(f[0])
    for n in range(1, order + 1):
        L[n] = sum(math.comb(n - 1, j) * f[j + 1] * L[n - 1 - j] for j in range(n))
    return L


# --------------------------------------------------------------------------- public API


def _scalar(x):
    x = np.asarray(x)
    return float(x.reshape(-1)[0]) if x.size == 1 else x


def laplace_interference(s: float, case: ServingCase, lam_u_avail: float, lam_c_active: float,
                         channel: ChannelConfig, h: float, printed_station_form: bool = False) -> float:
    if s < 0:
        raise ValueError("s must be >= 0")
    a, b, c = case_limits(case, channel, h, printed_station_form)
    field = InterferenceField(lam_u_avail, lam_c_active, channel, h)
    return _scalar(field.transform(s, a, b, c, sigma2=0.0))


def laplace_noise_plus_interference(s: float, case: ServingCase, lam_u_avail: float, lam_c_active: float,
                                    channel: ChannelConfig, h: float, sigma2: float | None = None,
                                    printed_station_form: bool = False) -> float:
    noise = channel.sigma2 if sigma2 is None else sigma2
    return math.exp(-s * noise) * laplace_interference(s, case, lam_u_avail, lam_c_active, channel, h,
                                                       printed_station_form)


def laplace_derivatives(s: float, k: int, case: ServingCase, lam_u_avail: float, lam_c_active: float,
                        channel: ChannelConfig, h: float, sigma2: float | None = None) -> float:
    """``k``-th derivative of the noise-plus-interference transform."""
    if k < 0:
        raise ValueError("k must be >= 0")
    a, b, c = case_limits(case, channel, h)
    field = InterferenceField(lam_u_avail, lam_c_active, channel, h)
    return _scalar(field.derivatives(s, a, b, c, k, sigma2)[k])


def mean_interference(case: ServingCase, lam_u_avail: float, lam_c_active: float, channel: ChannelConfig,
                      h: float) -> float:
    """Campbell mean of the interference (adaptive quadrature, independent of the Gauss rule)."""
    a, b, c = case_limits(case, channel, h)
    ch = channel
    opts = dict(epsabs=0.0, epsrel=1e-10, limit=500)

    def uav(lo, gain, alpha, los):
        def f(z):
            p = los_probability_horizontal(z, ch, h)
            return gain * (z * z + h * h) ** (-alpha / 2) * z * (p if los else 1 - p)
        pts = [p for p in (100.0, 300.0, 1000.0, 1e4) if p > lo]
        val = sum(integrate.quad(f, x0, x1, **opts)[0] for x0, x1 in zip([lo] + pts, pts + [np.inf]))
        return val

    total = 2 * np.pi * lam_u_avail * (uav(a, ch.eta_n * ch.rho_u, ch.alpha_n, False)
                                      + uav(b, ch.eta_l * ch.rho_u, ch.alpha_l, True))
    if lam_c_active > 0:
        if c <= 0:
            return math.inf
        total += 2 * np.pi * lam_c_active * ch.rho_u * c ** (2 - ch.alpha_t) / (ch.alpha_t - 2)
    return total


def station_term_closed_form(s: float, lo: float, channel: ChannelConfig) -> float:
    """``∫_lo^∞ (1 - 1/(1 + sρ z^-α)) z dz`` in closed form (used as a test oracle)."""
    alpha = channel.alpha_t
    kappa = (s * channel.rho_u) ** (1 / alpha)
    if kappa == 0:
        return 0.0
    x = lo / kappa
    total = (math.pi / alpha) / math.sin(2 * math.pi / alpha)
    if x <= 1:
        part = x * x / 2 * special.hyp2f1(1, 2 / alpha, 1 + 2 / alpha, -x**alpha)
        return kappa**2 * (total - part)
    return kappa**2 * x ** (2 - alpha) / (alpha - 2) * special.hyp2f1(1, 1 - 2 / alpha, 2 - 2 / alpha, -x**-alpha)
