"""Composite Gauss-Legendre rules used for vectorised integrals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def panel_rule(edges: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule over consecutive panels ``edges[k]..edges[k+1]``.

    ``edges`` may carry leading batch dimensions; the panel axis is last.
    Returns nodes and weights of shape ``(..., n_panels * order)``.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    lo = edges[..., :-1, None]
    width = np.diff(edges, axis=-1)[..., None]
    nodes = lo + width * x
    weights = width * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def interval_rule(lo, hi, order: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Single-panel rule on ``[lo, hi]`` broadcast over array inputs (node axis last)."""
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    x, w = gauss_legendre(order)
    return lo + (hi - lo) * x, (hi - lo) * w


def radial_edges(lo: float, hi: float, fine_until: float = 2000.0, fine_width: float = 25.0,
                 growth: float = 1.25) -> np.ndarray:
    """Panel edges: uniform up to ``fine_until`` then geometrically growing."""
    if hi <= lo:
        return np.array([lo, hi])
    fine_hi = min(max(fine_until, lo), hi)
    n_fine = max(1, int(np.ceil((fine_hi - lo) / fine_width)))
    parts = [np.linspace(lo, fine_hi, n_fine + 1)]
    if hi > fine_hi:
        n_geo = max(1, int(np.ceil(np.log(hi / max(fine_hi, 1.0)) / np.log(growth))))
        parts.append(np.geomspace(max(fine_hi, 1.0), hi, n_geo + 1)[1:])
    return np.concatenate(parts)
