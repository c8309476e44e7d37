"""Cell-count PMF and the distance laws between the typical user and candidate servers.

Distances to UAVs are 3-D (the UAV hovers at altitude ``h``); distances to
charging stations are ground distances. Horizontal offsets of UAVs are written
``z`` so that ``r = sqrt(z**2 + h**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate, special

from ._quad import interval_rule, panel_rule, radial_edges
from .channel import los_probability_horizontal, los_probability_limit
from .params import ChannelConfig, NetworkConfig

QUAD_EPSABS = 1e-8
QUAD_EPSREL = 1e-6
ARCCOS_TOL = 1e-12


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


# --------------------------------------------------------------------------- cell count


@dataclass(frozen=True)
class CellCountPmf:
    """Truncated law of the number of UAVs in the typical (area-biased) cell.

    ``probabilities[n] = P(N = n)`` for ``n = 0..truncation_n_max``.
    """

    probabilities: np.ndarray
    truncation_n_max: int
    tail_mass: float

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.truncation_n_max + 1)

    def mean(self) -> float:
        return float(np.dot(self.support, self.probabilities))

    def conditioned_positive(self) -> np.ndarray:
        """Probabilities re-normalised over ``n >= 1`` (entry 0 set to zero)."""
        p = self.probabilities.copy()
        p[0] = 0.0
        return p / p.sum()


def cell_count_log_pmf(n, net: NetworkConfig):
    """Log-probability of ``n`` UAVs in the typical cell (negative-binomial form)."""
    n = np.asarray(n, dtype=float)
    a, b, ratio = net.pv_fit_a, net.pv_fit_b, net.ratio
    out = (special.gammaln(a + n + 1) - special.gammaln(a + 1) - special.gammaln(n + 1)
           + (a + 1) * np.log(b) + n * np.log(ratio) - (a + n + 1) * np.log(b + ratio))
    return _out(out)


def cell_count_pmf(net: NetworkConfig, tol: float = 1e-8) -> CellCountPmf:
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    # mean + generous multiple of the standard deviation, grown until the tail is small enough
    shape, p = net.pv_fit_a + 1.0, net.pv_fit_b / (net.pv_fit_b + net.ratio)
    mean = shape * (1 - p) / p
    sd = np.sqrt(shape * (1 - p)) / p
    n_hi = int(mean + 20 * sd + 50)
    while True:
        probs = np.exp(cell_count_log_pmf(np.arange(n_hi + 1), net))
        cum = np.cumsum(probs)
        if cum[-1] >= 1.0 - tol:
            break
        n_hi *= 2
    n_max = int(np.searchsorted(cum, 1.0 - tol))
    probs = probs[: n_max + 1]
    # tail from the closed-form survival function; the sum then closes to 1 exactly
    tail = float(special.betainc(n_max + 1, shape, 1 - p)) if n_max >= 0 else 1.0
    return CellCountPmf(probabilities=probs, truncation_n_max=n_max, tail_mass=tail)


# --------------------------------------------------------------------------- stations


def first_contact_pdf(lam: float, r):
    r = np.asarray(r, dtype=float)
    return _out(np.where(r >= 0, 2 * np.pi * lam * r * np.exp(-np.pi * lam * r * r), 0.0))


def first_contact_cdf(lam: float, r):
    r = np.maximum(np.asarray(r, dtype=float), 0.0)
    return _out(-np.expm1(-np.pi * lam * r * r))


def nearest_active_station_pdf(r, r_s, lam_active: float):
    """Density of the nearest active station beyond the typical station at ``r_s``."""
    r = np.asarray(r, dtype=float)
    r_s = np.asarray(r_s, dtype=float)
    val = 2 * np.pi * lam_active * r * np.exp(-np.pi * lam_active * (r * r - r_s * r_s))
    return _out(np.where(r >= r_s, val, 0.0))


def nearest_active_station_cdf(r, r_s, lam_active: float):
    r = np.asarray(r, dtype=float)
    r_s = np.asarray(r_s, dtype=float)
    val = -np.expm1(-np.pi * lam_active * (r * r - r_s * r_s))
    return _out(np.where(r >= r_s, val, 0.0))


def nearest_active_station_ppf(u, r_s, lam_active: float):
    u = np.asarray(u, dtype=float)
    return _out(np.sqrt(np.asarray(r_s, dtype=float) ** 2 - np.log1p(-u) / (np.pi * lam_active)))


# --------------------------------------------------------------------------- hotspot


def hotspot_uav_pdf(r, net: NetworkConfig):
    """3-D distance from a uniform user in the hotspot disk to the UAV hovering above its centre."""
    r = np.asarray(r, dtype=float)
    hi = np.sqrt(net.r_c**2 + net.h**2)
    return _out(np.where((r >= net.h) & (r <= hi), 2 * r / net.r_c**2, 0.0))


def hotspot_uav_cdf(r, net: NetworkConfig):
    r = np.asarray(r, dtype=float)
    return _out(np.clip((r * r - net.h**2) / net.r_c**2, 0.0, 1.0))


# --------------------------------------------------------------------------- user ↔ station


def _clamped_arccos(x):
    x = np.asarray(x, dtype=float)
    return np.arccos(np.clip(x, -1.0, 1.0))


def user_station_distance_pdf(r, center_dist, r_c: float):
    """Density of the ground distance between a uniform user in a disk of radius ``r_c``
    and a station ``center_dist`` from the disk centre."""
    r = np.asarray(r, dtype=float)
    d = np.asarray(center_dist, dtype=float)
    r, d = np.broadcast_arrays(r, d)
    out = np.zeros(r.shape)
    inner = (r > 0) & (r <= r_c - d)
    out[inner] = 2 * r[inner] / r_c**2
    ring = (r > np.abs(r_c - d)) & (r < d + r_c) & (d > 0)
    rr, dd = r[ring], d[ring]
    out[ring] = 2 * rr / (np.pi * r_c**2) * _clamped_arccos((rr**2 - r_c**2 + dd**2) / (2 * dd * rr))
    return _out(out)


def _lens_area(r, d, r_c):
    """Area of the intersection of disk(0, r_c) and disk(p, r) with |p| = d."""
    r, d = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(d, dtype=float))
    out = np.zeros(r.shape)
    small, big = np.minimum(r, r_c), np.maximum(r, r_c)
    contained = d <= big - small
    out[contained] = np.pi * small[contained] ** 2
    lens = (~contained) & (d < r + r_c)
    rr, dd = r[lens], d[lens]
    t1 = rr**2 * _clamped_arccos((dd**2 + rr**2 - r_c**2) / (2 * dd * rr))
    t2 = r_c**2 * _clamped_arccos((dd**2 + r_c**2 - rr**2) / (2 * dd * r_c))
    t3 = 0.5 * np.sqrt(np.maximum((-dd + rr + r_c) * (dd + rr - r_c) * (dd - rr + r_c) * (dd + rr + r_c), 0.0))
    out[lens] = t1 + t2 - t3
    return out


def user_station_distance_cdf(r, center_dist, r_c: float):
    """Closed-form CDF: fraction of the hotspot disk within ``r`` of the station."""
    r = np.maximum(np.asarray(r, dtype=float), 0.0)
    out = _lens_area(r, center_dist, r_c) / (np.pi * r_c**2)
    return _out(np.clip(out, 0.0, 1.0))


def user_station_distance_cdf_quad(r: float, center_dist: float, r_c: float) -> float:
    """Reference CDF via quadrature of the ring density (scalar)."""
    d = float(center_dist)
    if r <= 0:
        return 0.0
    if r >= d + r_c:
        return 1.0
    if d < r_c:
        base = (r_c - d) ** 2 / r_c**2
        if r <= r_c - d:
            return r * r / r_c**2
        lo = r_c - d
    else:
        base, lo = 0.0, d - r_c
        if r <= lo:
            return 0.0
    ring = integrate.quad(lambda x: user_station_distance_pdf(x, d, r_c), lo, r,
                          epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)[0]
    return min(1.0, base + ring)


# --------------------------------------------------------------------------- thinned UAV processes


class ThinnedMeasure:
    """Radial measures of the LoS / NLoS thinned UAV processes around the user.

    ``los(Z) = ∫_0^Z z P_l(sqrt(z² + h²)) dz`` and ``nlos(Z) = Z²/2 − los(Z)``.
    Evaluated with a composite Gauss rule whose panel sums are cached, so each
    call costs one short Gauss rule per argument.
    """

    Z_MAX = 1e9

    def __init__(self, channel: ChannelConfig, h: float, order: int = 16):
        self.channel = channel
        self.h = h
        self.order = order
        self.p_inf = los_probability_limit(channel)
        self.edges = radial_edges(0.0, self.Z_MAX, fine_until=3000.0, fine_width=10.0, growth=1.2)
        nodes, weights = panel_rule(self.edges, order)
        vals = weights * nodes * los_probability_horizontal(nodes, channel, h)
        per_panel = vals.reshape(len(self.edges) - 1, order).sum(axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(per_panel)])

    def _p_los(self, z):
        return los_probability_horizontal(z, self.channel, self.h)

    def los(self, z):
        z = np.asarray(z, dtype=float)
        zc = np.clip(z, 0.0, self.Z_MAX)
        k = np.clip(np.searchsorted(self.edges, zc, side="right") - 1, 0, len(self.edges) - 2)
        lo = self.edges[k]
        nodes, weights = interval_rule(lo, zc, order=self.order)
        part = np.sum(weights * nodes * self._p_los(nodes), axis=-1)
        out = self.cum[k] + part
        # beyond Z_MAX the LoS probability has reached its limit
        beyond = np.maximum(z, self.Z_MAX) ** 2 - self.Z_MAX**2
        return _out(out + 0.5 * self.p_inf * beyond)

    def nlos(self, z):
        z = np.asarray(z, dtype=float)
        return _out(0.5 * z * z - np.asarray(self.los(z)))

    def measure(self, kind: str, z):
        return self.los(z) if kind == "los" else self.nlos(z)


def los_measure_quad(z: float, channel: ChannelConfig, h: float) -> float:
    """Reference value of the LoS radial measure by adaptive quadrature."""
    f = lambda t: t * los_probability_horizontal(t, channel, h)  # noqa: E731
    pts = [p for p in (100.0, 300.0, 1000.0) if p < z]
    return integrate.quad(f, 0.0, z, points=pts or None, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                          limit=500)[0]


def _kind_probability(kind: str, z, channel: ChannelConfig, h: float):
    p = los_probability_horizontal(z, channel, h)
    return p if kind == "los" else 1.0 - np.asarray(p)


def nearest_uav_cdf(kind: str, r, lam_avail: float, measure: ThinnedMeasure):
    """CDF of the 3-D distance to the nearest available ``kind`` ('los' / 'nlos') UAV."""
    r = np.asarray(r, dtype=float)
    z = np.sqrt(np.maximum(r * r - measure.h**2, 0.0))
    return _out(-np.expm1(-2 * np.pi * lam_avail * np.asarray(measure.measure(kind, z))))


def nearest_uav_pdf(kind: str, r, lam_avail: float, measure: ThinnedMeasure):
    r = np.asarray(r, dtype=float)
    h = measure.h
    z = np.sqrt(np.maximum(r * r - h * h, 0.0))
    prob = _kind_probability(kind, z, measure.channel, h)
    val = 2 * np.pi * lam_avail * prob * r * np.exp(-2 * np.pi * lam_avail * np.asarray(measure.measure(kind, z)))
    return _out(np.where(r >= h, val, 0.0))


def nearest_los_pdf(r, lam_avail: float, channel: ChannelConfig, h: float,
                    measure: ThinnedMeasure | None = None):
    return nearest_uav_pdf("los", r, lam_avail, measure or ThinnedMeasure(channel, h))


def nearest_nlos_pdf(r, lam_avail: float, channel: ChannelConfig, h: float,
                     measure: ThinnedMeasure | None = None):
    return nearest_uav_pdf("nlos", r, lam_avail, measure or ThinnedMeasure(channel, h))


# --------------------------------------------------------------------------- density records


@dataclass(frozen=True)
class DistanceDensity:
    """A distance law with its support, density, CDF and an inverse-CDF sampler."""

    kind: str
    support: tuple[float, float]
    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    conditioning: dict = field(default_factory=dict)
    breakpoints: tuple[float, ...] = ()

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.support
        pts = sorted({lo, hi, *[b for b in self.breakpoints if lo < b < hi]})
        grid = np.unique(np.concatenate(
            [np.linspace(a, b, 4001) if b / max(a, 1.0) < 50 else np.geomspace(max(a, 1e-9), b, 8001)
             for a, b in zip(pts[:-1], pts[1:])]))
        cdf = np.maximum.accumulate(np.asarray(self.cdf(grid), dtype=float))
        return grid, cdf

    def ppf(self, u):
        grid, cdf = self._table
        u = np.asarray(u, dtype=float) * cdf[-1] + (1 - np.asarray(u)) * cdf[0]
        k = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, len(grid) - 2)
        # one Newton step from linear interpolation sharpens the table inverse
        span = np.maximum(cdf[k + 1] - cdf[k], 1e-300)
        x = grid[k] + (grid[k + 1] - grid[k]) * np.clip((u - cdf[k]) / span, 0.0, 1.0)
        dens = np.asarray(self.pdf(x), dtype=float)
        step = np.where(dens > 0, (u - np.asarray(self.cdf(x))) / np.where(dens > 0, dens, 1.0), 0.0)
        return np.clip(x + step, grid[k], grid[k + 1])

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.ppf(rng.random(size))

    def normalization(self) -> float:
        """Integral of the density over the support (adaptive quadrature)."""
        lo, hi = self.support
        pts = sorted({lo, hi, *[b for b in self.breakpoints if lo < b < hi]})
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            total += integrate.quad(lambda x: float(self.pdf(x)), a, b, epsabs=1e-10, epsrel=1e-9,
                                    limit=500)[0]
        return total


def _upper_from_cdf(cdf, lo: float, tail: float = 1e-9, start: float | None = None) -> float:
    hi = start or max(2 * lo, 1.0)
    while 1.0 - float(cdf(hi)) > tail:
        hi *= 2
    return hi


def hotspot_uav_density(net: NetworkConfig) -> DistanceDensity:
    return DistanceDensity(
        kind="hotspot_uav",
        support=(net.h, float(np.sqrt(net.r_c**2 + net.h**2))),
        pdf=lambda r: hotspot_uav_pdf(r, net),
        cdf=lambda r: hotspot_uav_cdf(r, net),
    )


def nearest_uav_density(kind: str, lam_avail: float, measure: ThinnedMeasure) -> DistanceDensity:
    cdf = lambda r: nearest_uav_cdf(kind, r, lam_avail, measure)  # noqa: E731
    h = measure.h
    hi = _upper_from_cdf(cdf, h, start=10 * h)
    return DistanceDensity(
        kind=f"nearest_{kind}",
        support=(h, hi),
        pdf=lambda r: nearest_uav_pdf(kind, r, lam_avail, measure),
        cdf=cdf,
        conditioning={"lambda_avail": lam_avail},
        breakpoints=(2 * h, 5 * h, 20 * h, 3000.0, 3e4, 3e5),
    )


def first_contact_density(lam: float) -> DistanceDensity:
    hi = float(np.sqrt(-np.log(1e-9) / (np.pi * lam)))
    return DistanceDensity(
        kind="first_contact_station",
        support=(0.0, hi),
        pdf=lambda r: first_contact_pdf(lam, r),
        cdf=lambda r: first_contact_cdf(lam, r),
        conditioning={"lambda": lam},
    )


def nearest_active_station_density(r_s: float, lam_active: float) -> DistanceDensity:
    hi = float(np.sqrt(r_s**2 - np.log(1e-9) / (np.pi * lam_active)))
    return DistanceDensity(
        kind="nearest_active_station_given_rs",
        support=(r_s, hi),
        pdf=lambda r: nearest_active_station_pdf(r, r_s, lam_active),
        cdf=lambda r: nearest_active_station_cdf(r, r_s, lam_active),
        conditioning={"r_s": r_s, "lambda_active": lam_active},
    )


def user_station_density(center_dist: float, r_c: float) -> DistanceDensity:
    lo = max(0.0, center_dist - r_c)
    brk = (abs(r_c - center_dist),)
    return DistanceDensity(
        kind="user_to_station_given_center_distance",
        support=(lo, center_dist + r_c),
        pdf=lambda r: user_station_distance_pdf(r, center_dist, r_c),
        cdf=lambda r: user_station_distance_cdf(r, center_dist, r_c),
        conditioning={"center_dist": center_dist, "r_c": r_c},
        breakpoints=brk,
    )
