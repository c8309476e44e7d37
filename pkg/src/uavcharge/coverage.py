"""SINR coverage of the typical hotspot user.

With the hotspot UAV available the user is served by it; otherwise by the
strongest-average-power candidate among the nearest LoS / NLoS available UAV,
the typical station and the nearest other active station. The total is

    P_cov = P_a (uo_los + uo_nlos) + (1 - P_a) (up_los + up_nlos + cs + cc).

Nakagami-m success probabilities use either the Alzer approximation of the
gamma CDF (default) or the exact finite sum over Laplace-transform derivatives.
The outer expectation over the station distances ``(R_s, R_c)`` uses scrambled
Sobol points; the user-to-station distances are integrated analytically through
their CDFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ._quad import panel_rule, radial_edges
from .association import AssociationModel
from .availability import AvailabilityReport, availability
from .channel import los_probability
from .energy import expected_profile
from .geometry import (ThinnedMeasure, cell_count_pmf, nearest_active_station_ppf,
                       nearest_uav_cdf, nearest_uav_pdf, user_station_distance_cdf)
from .laplace import InterferenceField, exclusion_limits
from .params import ChannelConfig, SystemConfig
from .queueing import ActivityProbabilities, QueueCache, activity_probabilities

METHODS = ("alzer", "exact")
COMPONENTS = ("uo_los", "uo_nlos", "up_los", "up_nlos", "cs", "cc")


@dataclass(frozen=True)
class CoverageReport:
    p_cov_total: float
    components: dict[str, float]
    p_a: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def p_cov_available(self) -> float:
        return self.components["uo_los"] + self.components["uo_nlos"]

    @property
    def p_cov_unavailable(self) -> float:
        c = self.components
        return c["up_los"] + c["up_nlos"] + c["cs"] + c["cc"]

    def assembled(self) -> float:
        return self.p_a * self.p_cov_available + (1 - self.p_a) * self.p_cov_unavailable


def gain_thresholds(r, channel: ChannelConfig):
    """Normalised SINR thresholds ``g = θ r^α / (η ρ)`` for LoS and NLoS links."""
    r = np.asarray(r, dtype=float)
    g_l = channel.theta * r**channel.alpha_l / (channel.eta_l * channel.rho_u)
    g_n = channel.theta * r**channel.alpha_n / (channel.eta_n * channel.rho_u)
    if r.ndim == 0:
        return float(g_l), float(g_n)
    return g_l, g_n


def beta2(m: int) -> float:
    return 1.0 if m == 1 else math.factorial(m) ** (-1.0 / m)


def _noise_bound(channel: ChannelConfig, alpha: float, gain: float, m: int) -> float:
    """Distance beyond which noise alone keeps the success probability below ~1e-12."""
    if channel.sigma2 <= 0:
        return math.inf
    # smallest exponent used by either method is beta2 * m * g * sigma2
    g_needed = 28.0 / (beta2(m) * m * channel.sigma2)
    return (g_needed * gain / channel.theta) ** (1.0 / alpha)


class CoverageModel:
    """Coverage components for fixed densities and activity probabilities."""

    def __init__(self, cfg: SystemConfig, p_a: float, activity: ActivityProbabilities,
                 printed_station_form: bool = False):
        self.cfg = cfg
        self.channel = cfg.channel
        self.h = cfg.net.h
        self.p_a = p_a
        self.activity = activity
        self.lam_u = p_a * cfg.net.lambda_u
        self.lam_c = activity.p_c_a * cfg.net.lambda_c
        self.printed = printed_station_form
        self.measure = ThinnedMeasure(self.channel, self.h)
        self.field = InterferenceField(self.lam_u, self.lam_c, self.channel, self.h)
        self.assoc = AssociationModel(self.lam_u, self.channel, self.h, cfg.net.r_c, self.measure,
                                      printed_station_form)

    # ------------------------------------------------------------------ link success

    def _uav_success(self, kind: str, serving: str, r, method: str) -> np.ndarray:
        """P(SINR >= θ) for a UAV link of type ``kind`` at 3-D distance ``r``."""
        ch = self.channel
        m = ch.m_l if kind == "los" else ch.m_n
        g = gain_thresholds(r, ch)[0 if kind == "los" else 1]
        a, b, c = exclusion_limits(serving, r, ch, self.h, printed_station_form=self.printed)
        if method == "alzer":
            bt = beta2(m)
            total = np.zeros_like(np.asarray(r, dtype=float))
            for k in range(1, m + 1):
                total += math.comb(m, k) * (-1) ** (k + 1) * self.field.transform(k * bt * m * g, a, b, c)
            return total
        if method == "exact":
            s = m * g
            L = self.field.derivatives(s, a, b, c, order=m - 1)
            return sum((-s) ** k / math.factorial(k) * L[k] for k in range(m))
        raise ValueError(f"unknown method {method!r}")

    def _station_success(self, r) -> np.ndarray:
        ch = self.channel
        r = np.asarray(r, dtype=float)
        s = ch.theta * r**ch.alpha_t / ch.rho_u
        a, b, c = exclusion_limits("station", r, ch, self.h, printed_station_form=self.printed)
        return self.field.transform(s, a, b, c)

    # ------------------------------------------------------------------ hotspot UAV available

    def component_uo(self, method: str = "alzer", order: int = 24, panels: int = 8) -> tuple[float, float]:
        net = self.cfg.net
        edges = np.linspace(net.h, math.sqrt(net.h**2 + net.r_c**2), panels + 1)
        r, w = panel_rule(edges, order)
        dens = w * 2 * r / net.r_c**2
        p_l = np.asarray(los_probability(r, self.channel, self.h))
        uo_l = float(np.sum(dens * p_l * self._uav_success("los", "hotspot_uav", r, method)))
        uo_n = float(np.sum(dens * (1 - p_l) * self._uav_success("nlos", "hotspot_uav", r, method)))
        return uo_l, uo_n

    # ------------------------------------------------------------------ hotspot UAV unavailable

    def outer_samples(self, n_outer: int = 4096, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Scrambled Sobol draws of ``(R_s, R_c)``."""
        sob = qmc.Sobol(d=2, scramble=True, seed=np.random.default_rng(seed))
        m = max(1, int(math.ceil(math.log2(n_outer))))
        u = sob.random_base2(m)[:n_outer]
        u = np.clip(u, 1e-15, 1 - 1e-15)
        r_s = np.sqrt(-np.log1p(-u[:, 0]) / (math.pi * self.cfg.net.lambda_c))
        if self.lam_c > 0:
            r_c = np.asarray(nearest_active_station_ppf(u[:, 1], r_s, self.lam_c))
        else:
            r_c = np.full_like(r_s, np.inf)
        return r_s, r_c

    def _uav_grid(self, kind: str, order: int = 8):
        ch = self.channel
        if kind == "los":
            hi = _noise_bound(ch, ch.alpha_l, ch.eta_l * ch.rho_u, ch.m_l)
        else:
            hi = _noise_bound(ch, ch.alpha_n, ch.eta_n * ch.rho_u, ch.m_n)
        # and where the nearest-distance CCDF is negligible
        ccdf_hi = self.h * 2
        while ccdf_hi < 1e8 and 1 - nearest_uav_cdf(kind, ccdf_hi, self.lam_u, self.measure) > 1e-9:
            ccdf_hi *= 1.5
        hi = max(min(hi, ccdf_hi), self.h * 1.001)
        edges = radial_edges(self.h, hi, fine_until=3000.0, fine_width=10.0, growth=1.15)
        return panel_rule(edges, order)

    def component_ubar(self, method: str = "alzer", n_outer: int = 4096, seed: int = 0,
                       chunk: int = 256) -> tuple[float, float, float, float]:
        r_s, r_c = self.outer_samples(n_outer, seed)
        p_crs = self.activity.p_crs_a

        up = {}
        for kind in ("los", "nlos"):
            if self.lam_u <= 0:
                up[kind] = 0.0
                continue
            r, w = self._uav_grid(kind)
            serving = f"{kind}_uav"
            base = w * np.asarray(nearest_uav_pdf(kind, r, self.lam_u, self.measure)) \
                * self._uav_success(kind, serving, r, method)
            rival = self.assoc.los_vs_nlos(r) if kind == "los" else self.assoc.nlos_vs_los(r)
            base = base * rival
            acc = 0.0
            for sl in _chunks(len(r_s), chunk):
                f_cs = self.assoc.uav_vs_station(kind, r[None, :], r_s[sl, None])
                f_cc = self.assoc.uav_vs_station(kind, r[None, :], r_c[sl, None])
                acc += float(np.sum(base[None, :] * f_cc * (p_crs * f_cs + (1 - p_crs))))
            up[kind] = acc / len(r_s)

        cs = cc = 0.0
        grid = self._station_grid(r_s)
        mid = 0.5 * (grid[1:] + grid[:-1])
        g_mid = self._station_success(mid) * self.assoc.station_vs_uav("los", mid) \
            * self.assoc.station_vs_uav("nlos", mid)
        for sl in _chunks(len(r_s), chunk):
            F_su = np.asarray(user_station_distance_cdf(grid[None, :], r_s[sl, None], self.cfg.net.r_c))
            F_cu = np.asarray(user_station_distance_cdf(grid[None, :], r_c[sl, None], self.cfg.net.r_c))
            F_su_mid = 0.5 * (F_su[:, 1:] + F_su[:, :-1])
            F_cu_mid = 0.5 * (F_cu[:, 1:] + F_cu[:, :-1])
            cs += p_crs * float(np.sum(g_mid * (1 - F_cu_mid) * np.diff(F_su, axis=1)))
            cc += float(np.sum(g_mid * (p_crs * (1 - F_su_mid) + (1 - p_crs)) * np.diff(F_cu, axis=1)))
        cs /= len(r_s)
        cc /= len(r_s)
        return up["los"], up["nlos"], float(cs), float(cc)

    def _station_grid(self, r_s: np.ndarray) -> np.ndarray:
        ch = self.channel
        hi = float(np.max(r_s)) + self.cfg.net.r_c
        if ch.sigma2 > 0:
            hi = min(hi, (40.0 * ch.rho_u / (ch.theta * ch.sigma2)) ** (1 / ch.alpha_t))
        fine = np.linspace(0.0, min(hi, 1000.0), int(min(hi, 1000.0) / 0.5) + 1)
        if hi > 1000.0:
            fine = np.concatenate([fine, np.geomspace(1000.0, hi, 400)[1:]])
        return fine


def _chunks(n: int, size: int):
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


@dataclass
class CoverageInputs:
    """Upstream results needed by the coverage model."""

    availability: AvailabilityReport
    activity: ActivityProbabilities


def coverage_inputs(cfg: SystemConfig, convention: str = "renorm", kernel: str = "backlog") -> CoverageInputs:
    profile = expected_profile(cfg.net, cfg.energy)
    pmf = cell_count_pmf(cfg.net)
    cache = QueueCache(cfg.net.capacity_c, cfg.energy, profile, kernel)
    rep = availability(cfg.net, cfg.energy, profile, pmf, convention, kernel, cache)
    act = activity_probabilities(cfg.net, cfg.energy, profile, pmf, convention, kernel, cache)
    return CoverageInputs(rep, act)


def coverage_component_uo(model: CoverageModel, method: str = "alzer") -> tuple[float, float]:
    return model.component_uo(method)


def coverage_component_ubar(model: CoverageModel, method: str = "alzer", n_outer: int = 4096,
                            seed: int = 0) -> tuple[float, float, float, float]:
    return model.component_ubar(method, n_outer, seed)


def coverage(cfg: SystemConfig, method: str = "alzer", n_outer: int = 4096, seed: int = 0,
             convention: str = "renorm", kernel: str = "backlog", printed_station_form: bool = False,
             inputs: CoverageInputs | None = None) -> CoverageReport:
    """Total coverage probability for a configuration."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    inputs = inputs or coverage_inputs(cfg, convention, kernel)
    p_a = inputs.availability.p_a
    model = CoverageModel(cfg, p_a, inputs.activity, printed_station_form)
    uo_l, uo_n = model.component_uo(method)
    up_l, up_n, cs, cc = model.component_ubar(method, n_outer, seed)
    comps = dict(zip(COMPONENTS, (uo_l, uo_n, up_l, up_n, cs, cc)))
    total = p_a * (uo_l + uo_n) + (1 - p_a) * (up_l + up_n + cs + cc)
    diag = {
        "p_c_a": inputs.activity.p_c_a,
        "p_crs_a": inputs.activity.p_crs_a,
        "lambda_u_avail": model.lam_u,
        "lambda_c_active": model.lam_c,
        "n_outer": n_outer,
        "seed": seed,
        "convention": convention,
        "kernel": kernel,
    }
    return CoverageReport(p_cov_total=float(total), components=comps, p_a=p_a, method=method, diagnostics=diag)
