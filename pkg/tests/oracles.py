"""Geometric sampling oracles shared by the unit and acceptance tests.

Each oracle realises the underlying point process directly (points in a disk
or annulus, independent LoS draws) and measures the distance of interest, so
it shares no code with the analytic densities it checks.
"""

import numpy as np

from uavcharge.channel import los_probability_horizontal


def _ppp_annulus(rng, lam, r_in, r_out, n_real):
    counts = rng.poisson(lam * np.pi * (r_out**2 - r_in**2), n_real)
    owner = np.repeat(np.arange(n_real), counts)
    rad = np.sqrt(r_in**2 + (r_out**2 - r_in**2) * rng.random(owner.size))
    return owner, rad


def _nearest(owner, rad, n_real):
    out = np.full(n_real, np.inf)
    np.minimum.at(out, owner, rad)
    return out


def first_contact(rng, lam, n, r_out=None):
    r_out = r_out or 6.0 / np.sqrt(lam)
    owner, rad = _ppp_annulus(rng, lam, 0.0, r_out, n)
    return _nearest(owner, rad, n)


def nearest_beyond(rng, lam, r_s, n, r_out=None):
    r_out = r_out or r_s + 6.0 / np.sqrt(lam)
    owner, rad = _ppp_annulus(rng, lam, r_s, r_out, n)
    return _nearest(owner, rad, n)


def uniform_disk(rng, r_c, n):
    rad = r_c * np.sqrt(rng.random(n))
    ang = 2 * np.pi * rng.random(n)
    return rad * np.cos(ang), rad * np.sin(ang)


def hotspot_distance(rng, r_c, h, n):
    x, y = uniform_disk(rng, r_c, n)
    return np.sqrt(x * x + y * y + h * h)


def user_station(rng, center_dist, r_c, n):
    x, y = uniform_disk(rng, r_c, n)
    return np.hypot(x - center_dist, y)


def nearest_kind_uav(rng, kind, lam, channel, h, n, z_max, chunk=20000):
    """3-D distance to the nearest LoS/NLoS UAV among those within horizontal ``z_max``.

    Realisations without such a UAV return ``inf``.
    """
    out = np.empty(n)
    for s in range(0, n, chunk):
        m = min(chunk, n - s)
        owner, z = _ppp_annulus(rng, lam, 0.0, z_max, m)
        los = rng.random(z.size) < los_probability_horizontal(z, channel, h)
        keep = los if kind == "los" else ~los
        out[s:s + m] = _nearest(owner[keep], np.sqrt(z[keep] ** 2 + h * h), m)
    return out
