"""Monte Carlo simulator used as an independent oracle for the analytic chain.

A replication draws station and UAV-hotspot PPPs in a disk window (a typical
UAV is added at the origin), attaches each UAV to its nearest station, runs
the slotted charging cycle of every UAV, and then takes coverage snapshots of
a user dropped uniformly in the typical hotspot.

Clocks: the queue runs on whole slots (a UAV away for ``D`` seconds is away
for ``ceil(D / T_ch)`` slots), while availability is accounted in continuous
time as ``T_se / (D + T_ch (1 + w))`` per cycle with ``w`` waiting slots. A
snapshot time is mapped linearly from a UAV's real cycle onto its accounted
cycle to decide whether the UAV is hovering.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from . import _simkernel
from .channel import los_probability_horizontal
from .energy import EnergyProfile, expected_profile, landing_time, service_time
from .laplace import ServingCase, case_limits
from .params import ChannelConfig, EnergyConfig, SystemConfig
from .queueing import arrival_probability

MODES = ("full", "queue_only", "interference_only")
CATEGORIES = ("uo_los", "uo_nlos", "up_los", "up_nlos", "cs", "cc")


@dataclass(frozen=True)
class SimEstimate:
    metric: str
    estimate: float
    replications: int
    half_width_95: float
    seed: int

    def __post_init__(self) -> None:
        if self.half_width_95 < 0:
            raise ValueError("half-width must be non-negative")


@dataclass(frozen=True)
class SimScenario:
    """Simulation controls.

    ``window_radius=None`` uses twice the edge guard ``5 / sqrt(π λ_c)``; UAV and
    station statistics are taken inside half the window. ``thinning`` supplies
    ``(p_a, p_c_a, p_crs_a)`` for ``interference_only`` mode, where UAVs and
    stations are switched on independently instead of running the queues.
    ``uavs=False`` removes every UAV (including the typical one), leaving no server.
    """

    window_radius: float | None = None
    warmup_slots: int = 200
    measure_slots: int = 400
    replications: int = 100
    seed: int = 0
    mode: str = "full"
    snapshots: int = 8
    thinning: tuple[float, float, float] | None = None
    uavs: bool = True

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "interference_only" and self.thinning is None:
            raise ValueError("interference_only mode needs thinning probabilities")
        if self.warmup_slots < 0 or self.measure_slots < 1 or self.snapshots < 0:
            raise ValueError("slot and snapshot counts must be non-negative")


def guard_radius(lambda_c: float) -> float:
    return 5.0 / math.sqrt(math.pi * lambda_c)


def window_for(scenario: SimScenario, lambda_c: float) -> float:
    guard = guard_radius(lambda_c)
    w = 2 * guard if scenario.window_radius is None else scenario.window_radius
    if w < guard * (1 - 1e-12):
        raise ValueError(f"window radius {w:.1f} m is below the edge guard {guard:.1f} m")
    return w


def _generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def _disk_points(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    rad = radius * np.sqrt(rng.random(n))
    ang = 2 * np.pi * rng.random(n)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


# --------------------------------------------------------------------------- one replication


@dataclass
class _Cycles:
    """Per-UAV cycle records from the queue kernel."""

    deps: np.ndarray
    waits: np.ndarray
    n_deps: np.ndarray
    away: np.ndarray


def _uav_cycle_times(r_s: np.ndarray, cfg: SystemConfig):
    e = cfg.energy
    t_land = landing_time(cfg.net.h, e.a_ave)
    t_se = np.maximum(service_time(r_s, e), 0.0)
    d = t_se + 2 * r_s / e.v + 2 * t_land
    return t_se, d, t_land


def _availability_fractions(cyc: _Cycles, t_se, d, t_ch, warmup):
    """Accounted service share per UAV over cycles that start after warm-up."""
    k = np.arange(cyc.deps.shape[1] - 1)[None, :]
    sel = (k + 1 < cyc.n_deps[:, None]) & (cyc.deps[:, :-1] >= warmup)
    n_cyc = sel.sum(axis=1)
    slots = np.where(sel, 1 + cyc.waits[:, 1:], 0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = n_cyc * t_se / (n_cyc * d + t_ch * slots)
    return np.where(n_cyc > 0, out, np.nan)


def _snapshot_states(cyc: _Cycles, tau: float, t_se, d, t_ch, t0):
    """Hovering flags and at-station flags of every UAV at slot time ``tau``."""
    valid = cyc.deps >= 0
    k = np.sum(valid & (cyc.deps <= tau), axis=1) - 1
    n = cyc.deps.shape[0]
    rows = np.arange(n)
    ok = (k >= 0) & (k + 1 < cyc.n_deps)
    kk = np.clip(k, 0, cyc.deps.shape[1] - 2)
    start = cyc.deps[rows, kk].astype(float)
    end = cyc.deps[rows, kk + 1].astype(float)
    w = cyc.waits[rows, kk + 1].astype(float)
    frac = (tau - start) / np.maximum(end - start, 1.0)
    acc = frac * (d + t_ch * (1 + w))
    hovering = ok & (acc >= t0) & (acc < t0 + t_se)
    at_station = ok & (tau >= start + cyc.away)
    # a UAV without a complete enclosing cycle has not left its station yet
    at_station |= ~ok
    return hovering, at_station


def _coverage_snapshot(rng, cfg: SystemConfig, hubs, uav_on, typical_on, stations, station_on, typical_station):
    """One user drop: returns (success, category index)."""
    ch, net = cfg.channel, cfg.net
    user = _disk_points(rng, 1, net.r_c)[0]
    # UAV links (3-D), LoS drawn per link
    z = np.hypot(hubs[uav_on, 0] - user[0], hubs[uav_on, 1] - user[1])
    ids = np.flatnonzero(uav_on)
    los = rng.random(z.size) < los_probability_horizontal(z, ch, net.h)
    dist = np.sqrt(z * z + net.h**2)
    eta = np.where(los, ch.eta_l, ch.eta_n)
    alpha = np.where(los, ch.alpha_l, ch.alpha_n)
    m = np.where(los, ch.m_l, ch.m_n)
    mean_u = eta * ch.rho_u * dist ** (-alpha)
    fade_u = rng.gamma(m, 1.0 / m)
    # station links (ground)
    st_ids = np.flatnonzero(station_on)
    rst = np.hypot(stations[st_ids, 0] - user[0], stations[st_ids, 1] - user[1])
    mean_c = ch.rho_u * np.maximum(rst, 1e-9) ** (-ch.alpha_t)
    fade_c = rng.exponential(1.0, rst.size)

    mean_all = np.concatenate([mean_u, mean_c])
    power = np.concatenate([mean_u * fade_u, mean_c * fade_c])
    if mean_all.size == 0:
        return False, -1
    if typical_on:
        srv = int(np.flatnonzero(ids == 0)[0])
        cat = 0 if los[srv] else 1
    else:
        srv = int(np.argmax(mean_all))
        if srv < ids.size:
            cat = 2 if los[srv] else 3
        else:
            cat = 4 if st_ids[srv - ids.size] == typical_station else 5
    sig = power[srv]
    interference = power.sum() - sig
    sinr = sig / (interference + ch.sigma2)
    if not np.isfinite(sinr):
        raise FloatingPointError("non-finite SINR")
    return bool(sinr >= ch.theta), cat


def run_replication(rep: int, scenario: SimScenario, cfg: SystemConfig) -> dict:
    net, e = cfg.net, cfg.energy
    rng = _generator(scenario.seed, rep)
    W = window_for(scenario, net.lambda_c)
    area = math.pi * W * W
    stations = _disk_points(rng, max(1, rng.poisson(net.lambda_c * area)), W)
    hubs = np.vstack([np.zeros((1, 2)), _disk_points(rng, rng.poisson(net.lambda_u * area), W)])
    r_s, station_of = cKDTree(stations).query(hubs)
    station_of = station_of.astype(np.int64)
    t_se, d, t_land = _uav_cycle_times(r_s, cfg)
    t0 = t_land + r_s / e.v
    out: dict = {}
    if not scenario.uavs:
        none = np.zeros(0, bool)
        snaps = [_coverage_snapshot(rng, cfg, np.zeros((0, 2)), none, False, stations,
                                    np.zeros(len(stations), bool), -1) for _ in range(scenario.snapshots)]
        out.update(_summarise_snaps(snaps))
        return out
    inner_uav = np.hypot(hubs[:, 0], hubs[:, 1]) <= W / 2
    inner_st = np.hypot(stations[:, 0], stations[:, 1]) <= W / 2

    if scenario.mode == "interference_only":
        p_a, p_c_a, p_crs_a = scenario.thinning
        snaps = []
        for _ in range(scenario.snapshots):
            uav_on = rng.random(len(hubs)) < p_a
            st_on = rng.random(len(stations)) < p_c_a
            if not uav_on[0]:
                st_on[station_of[0]] = rng.random() < p_crs_a
            snaps.append(_coverage_snapshot(rng, cfg, hubs, uav_on, bool(uav_on[0]), stations, st_on,
                                            station_of[0]))
        out.update(_summarise_snaps(snaps))
        return out

    away = np.maximum(np.ceil(d / e.t_ch).astype(np.int64), 1)
    order = np.argsort(station_of, kind="stable")
    ptr = np.searchsorted(station_of[order], np.arange(len(stations) + 1)).astype(np.int64)
    first = rng.integers(1, away + 2).astype(np.int64)
    n_slots = scenario.warmup_slots + scenario.measure_slots
    max_deps = n_slots // (int(away.min()) + 1) + 2
    kseed = int(rng.integers(0, 2**31 - 1))
    deps, waits, n_deps, present, backlog, _ = _simkernel.run_stations(
        station_of, ptr, order.astype(np.int64), away, net.capacity_c, n_slots, scenario.warmup_slots,
        first, kseed, max_deps, 1)
    cyc = _Cycles(deps, waits, n_deps, away)

    frac = _availability_fractions(cyc, t_se, d, e.t_ch, scenario.warmup_slots)
    sel = inner_uav & np.isfinite(frac)
    out["p_a"] = float(np.mean(frac[sel])) if sel.any() else np.nan
    out["active_fraction"] = float(np.mean(present[inner_st]) / scenario.measure_slots) if inner_st.any() else np.nan
    out["backlog_fraction"] = float(np.mean(backlog[inner_st]) / scenario.measure_slots) if inner_st.any() else np.nan
    w_meas = [waits[u, 1:n_deps[u]][deps[u, : n_deps[u] - 1] >= scenario.warmup_slots]
              for u in np.flatnonzero(inner_uav)]
    w_all = np.concatenate(w_meas) if w_meas else np.zeros(0)
    out["mean_wait_slots"] = float(w_all.mean()) if w_all.size else np.nan
    out["max_wait_slots"] = float(w_all.max()) if w_all.size else np.nan

    if scenario.mode == "full" and scenario.snapshots > 0:
        longest = int(np.max(away)) + 1 + int(max(1, np.max(waits)))
        lo = scenario.warmup_slots + longest
        hi = n_slots - longest
        if hi <= lo:
            raise ValueError("measure window too short for coverage snapshots")
        snaps = []
        for _ in range(scenario.snapshots):
            tau = lo + (hi - lo) * rng.random()
            hovering, at_station = _snapshot_states(cyc, tau, t_se, d, e.t_ch, t0)
            st_on = np.zeros(len(stations), bool)
            st_on[station_of[at_station]] = True
            snaps.append(_coverage_snapshot(rng, cfg, hubs, hovering, bool(hovering[0]), stations, st_on,
                                            station_of[0]))
        out.update(_summarise_snaps(snaps))
    return out


def _summarise_snaps(snaps) -> dict:
    succ = np.array([s for s, _ in snaps], float)
    cats = np.array([c for _, c in snaps], int)
    out = {"p_cov": float(succ.mean()) if succ.size else np.nan}
    avail = np.isin(cats, (0, 1))
    out["n_snap_avail"] = int(avail.sum())
    out["n_snap_unavail"] = int((~avail).sum())
    out["hits_avail"] = float(succ[avail].sum())
    out["hits_unavail"] = float(succ[~avail].sum())
    for i, name in enumerate(CATEGORIES):
        out[f"n_{name}"] = int((cats == i).sum())
        out[f"hits_{name}"] = float(succ[cats == i].sum())
    return out


# --------------------------------------------------------------------------- aggregation


def _estimate(metric: str, values, seed: int) -> SimEstimate:
    v = np.asarray([x for x in values if np.isfinite(x)], float)
    if v.size == 0:
        return SimEstimate(metric, float("nan"), 0, float("nan"), seed)
    hw = 1.96 * v.std(ddof=1) / math.sqrt(v.size) if v.size > 1 else float("inf")
    return SimEstimate(metric, float(v.mean()), int(v.size), float(hw), seed)


def _ratio_estimate(metric: str, hits, counts, seed: int) -> SimEstimate:
    """Pooled ratio with a delta-method half-width across replications."""
    hits, counts = np.asarray(hits, float), np.asarray(counts, float)
    n = counts.size
    if counts.sum() == 0:
        return SimEstimate(metric, float("nan"), n, float("nan"), seed)
    est = hits.sum() / counts.sum()
    resid = hits - est * counts
    hw = 1.96 * math.sqrt(np.sum(resid**2) / max(n - 1, 1) / n) / counts.mean() if n > 1 else float("inf")
    return SimEstimate(metric, float(est), n, float(hw), seed)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("UAVCHARGE_WORKERS", "1")))
    except ValueError:
        return 1


def _run_block(args):
    reps, scenario, cfg = args
    return [run_replication(r, scenario, cfg) for r in reps]


def simulate_network(scenario: SimScenario, cfg: SystemConfig, workers: int | None = None) -> dict[str, SimEstimate]:
    """Run all replications and summarise every measured quantity."""
    window_for(scenario, cfg.net.lambda_c)
    expected_profile(cfg.net, cfg.energy)
    workers = workers or _workers()
    reps = list(range(scenario.replications))
    if workers > 1 and len(reps) > 1:
        blocks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, [(b, scenario, cfg) for b in blocks]))
        by_rep = {}
        for b, res in zip(blocks, parts):
            by_rep.update(zip(b, res))
        rows = [by_rep[r] for r in reps]
    else:
        rows = [run_replication(r, scenario, cfg) for r in reps]

    seed = scenario.seed
    out: dict[str, SimEstimate] = {}
    for metric in ("p_a", "active_fraction", "backlog_fraction", "mean_wait_slots", "p_cov"):
        if metric in rows[0]:
            out[metric] = _estimate(metric, [r[metric] for r in rows], seed)
    if "n_snap_avail" in rows[0]:
        out["p_cov_available"] = _ratio_estimate("p_cov_available", [r["hits_avail"] for r in rows],
                                                 [r["n_snap_avail"] for r in rows], seed)
        out["p_cov_unavailable"] = _ratio_estimate("p_cov_unavailable", [r["hits_unavail"] for r in rows],
                                                   [r["n_snap_unavail"] for r in rows], seed)
        n_un = [r["n_snap_unavail"] for r in rows]
        for name in CATEGORIES[2:]:
            out[f"share_{name}"] = _ratio_estimate(f"share_{name}", [r[f"n_{name}"] for r in rows], n_un, seed)
        for name in CATEGORIES:
            # unconditional contribution of each serving type, comparable to the analytic components
            base = "n_snap_avail" if name.startswith("uo") else "n_snap_unavail"
            out[f"cov_{name}"] = _ratio_estimate(f"cov_{name}", [r[f"hits_{name}"] for r in rows],
                                                 [r[base] for r in rows], seed)
    return out


# --------------------------------------------------------------------------- focused oracles


def simulate_cell(n_uavs: int, cfg: SystemConfig, replications: int = 200, seed: int = 0,
                  warmup_slots: int = 200, measure_slots: int = 600) -> SimEstimate:
    """Availability ``P(a | N)`` of ``N`` UAVs sharing one station, distances drawn i.i.d."""
    e, net = cfg.energy, cfg.net
    vals = []
    for rep in range(replications):
        rng = _generator(seed, rep)
        u = rng.random(n_uavs)
        r_s = np.sqrt(-np.log1p(-u) / (math.pi * net.lambda_c))
        t_se, d, _ = _uav_cycle_times(r_s, cfg)
        away = np.maximum(np.ceil(d / e.t_ch).astype(np.int64), 1)
        station_of = np.zeros(n_uavs, np.int64)
        n_slots = warmup_slots + measure_slots
        deps, waits, n_deps, *_ = _simkernel.run_stations(
            station_of, np.array([0, n_uavs], np.int64), np.arange(n_uavs, dtype=np.int64), away,
            net.capacity_c, n_slots, warmup_slots, rng.integers(1, away + 2).astype(np.int64),
            int(rng.integers(0, 2**31 - 1)), n_slots // (int(away.min()) + 1) + 2, 1)
        frac = _availability_fractions(_Cycles(deps, waits, n_deps, away), t_se, d, e.t_ch, warmup_slots)
        vals.append(float(np.nanmean(frac)))
    return _estimate(f"p_a_given_n{n_uavs}", vals, seed)


def simulate_queue_chain(n_uavs: int, capacity: int, energy: EnergyConfig, profile: EnergyProfile,
                         slots: int = 10**6, seed: int = 0, kernel: str = "backlog",
                         chains: int = 100, burn_in: int = 200) -> np.ndarray:
    """Normalised occupancy histogram of the binomial-arrival chain over ``0..N-1``."""
    if slots < 10**5:
        raise ValueError("slots must be >= 1e5")
    if n_uavs == 1:
        return np.ones(1)
    p_ch = np.atleast_1d(arrival_probability(np.arange(n_uavs // capacity + 1), energy, profile))
    kseed = int(_generator(seed, n_uavs, capacity).integers(0, 2**31 - 1))
    steps = int(math.ceil(slots / chains))
    hist = _simkernel.queue_chain(n_uavs, capacity, p_ch.astype(float), chains, steps, burn_in,
                                  kernel == "backlog", kseed)
    return hist / hist.sum()


def far_field_mean(windows: tuple[float, float, float], lam_u: float, lam_c: float, channel: ChannelConfig,
                   h: float) -> float:
    """Mean interference from NLoS UAVs, LoS UAVs and stations beyond their ``windows`` (adaptive quadrature)."""
    ch = channel
    opts = dict(epsabs=0.0, epsrel=1e-8, limit=500)
    total = 0.0
    for w, los, gain, alpha in ((windows[0], False, ch.eta_n * ch.rho_u, ch.alpha_n),
                                (windows[1], True, ch.eta_l * ch.rho_u, ch.alpha_l)):
        def f(z, los=los, gain=gain, alpha=alpha):
            p = los_probability_horizontal(z, ch, h)
            return gain * (z * z + h * h) ** (-alpha / 2) * z * (p if los else 1 - p)
        edges = [w * 10.0**k for k in range(0, 12)]
        part = sum(integrate.quad(f, x0, x1, **opts)[0] for x0, x1 in zip(edges[:-1], edges[1:]))
        # beyond the last edge the LoS probability is at its limit and the integrand is a power law
        z_end = edges[-1]
        p_end = los_probability_horizontal(z_end, ch, h)
        part += gain * (p_end if los else 1 - p_end) * z_end ** (2 - alpha) / (alpha - 2)
        total += 2 * math.pi * lam_u * part
    total += 2 * math.pi * lam_c * ch.rho_u * windows[2] ** (2 - ch.alpha_t) / (ch.alpha_t - 2)
    return total


def _annulus(rng, lam, lo, hi, n_real):
    counts = rng.poisson(lam * math.pi * (hi * hi - lo * lo), n_real)
    owner = np.repeat(np.arange(n_real), counts)
    return owner, np.sqrt(lo * lo + (hi * hi - lo * lo) * rng.random(owner.size))


def estimate_laplace(s: float, case: ServingCase, lam_u_avail: float, lam_c_active: float,
                     channel: ChannelConfig, h: float, realizations: int = 10**5, seed: int = 0,
                     margin: float = 8000.0, chunk: int = 2000) -> SimEstimate:
    """Empirical ``E[exp(-s I)]`` over PPP realisations outside the case's exclusion radii.

    Each interferer type is drawn in an annulus from its exclusion radius out to
    ``margin`` beyond it (UAVs get a LoS mark and only the matching type is
    kept). Interferers farther out contribute a tiny, nearly deterministic
    term, applied as ``exp(-s * E[I_far])`` with the mean from adaptive quadrature.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    a, b, c = case_limits(case, channel, h)
    windows = (a + margin, b + margin, c + margin)
    rng = _generator(seed, 7)
    ch = channel
    vals = np.empty(realizations)
    for start in range(0, realizations, chunk):
        n_real = min(chunk, realizations - start)
        interference = np.zeros(n_real)
        if lam_u_avail > 0:
            for lo, hi, los_kind in ((a, windows[0], False), (b, windows[1], True)):
                owner, z = _annulus(rng, lam_u_avail, lo, hi, n_real)
                keep = (rng.random(z.size) < los_probability_horizontal(z, ch, h)) == los_kind
                owner, z = owner[keep], z[keep]
                eta, alpha, m = (ch.eta_l, ch.alpha_l, ch.m_l) if los_kind else (ch.eta_n, ch.alpha_n, ch.m_n)
                pw = eta * ch.rho_u * rng.gamma(m, 1.0 / m, z.size) * (z * z + h * h) ** (-alpha / 2)
                interference += np.bincount(owner, weights=pw, minlength=n_real)
        if lam_c_active > 0:
            owner, rr = _annulus(rng, lam_c_active, c, windows[2], n_real)
            pw = ch.rho_u * rng.exponential(1.0, rr.size) * np.maximum(rr, 1e-9) ** (-ch.alpha_t)
            interference += np.bincount(owner, weights=pw, minlength=n_real)
        vals[start:start + n_real] = np.exp(-s * interference)
    vals *= math.exp(-s * far_field_mean(windows, lam_u_avail, lam_c_active, channel, h))
    sd = vals.std(ddof=1) if realizations > 1 else 0.0
    return SimEstimate(f"laplace_{case.kind}", float(vals.mean()), realizations,
                       float(1.96 * sd / math.sqrt(realizations)), seed)
