"""Small derivative-free maximizers used by the rate computations."""

import itertools
import math

import numpy as np
from scipy.optimize import minimize

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x))``; the endpoints are also evaluated so a monotone
    objective returns its boundary maximum.
    """
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    best = max(((c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))), key=lambda p: p[1])
    return float(best[0]), float(best[1])


def simplex_grid(k, steps):
    """All points of the probability simplex in R^k with coordinates in (1/steps)Z."""
    pts = []
    for cuts in itertools.combinations(range(steps + k - 1), k - 1):
        prev = -1
        counts = []
        for c in cuts:
            counts.append(c - prev - 1)
            prev = c
        counts.append(steps + k - 2 - prev)
        pts.append(counts)
    return np.asarray(pts, dtype=float) / steps


def _project(v):
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - (css - 1.0) / ks > 0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def maximize_over_simplex(f, k, steps=64, tol=1e-11):
    """Heuristic global maximum of ``f(p)`` over probability vectors of length ``k``.

    A uniform grid with ``steps`` divisions per coordinate locates the best
    cell, then a local polish refines it: golden-section search for k = 2,
    Nelder-Mead on the projected simplex otherwise.
    """
    if k == 1:
        p = np.ones(1)
        return p, float(f(p))
    grid = simplex_grid(k, steps)
    vals = np.array([f(p) for p in grid])
    i = int(np.argmax(vals))
    p0, v0 = grid[i], float(vals[i])

    if k == 2:
        h = 1.0 / steps
        lo, hi = max(0.0, p0[0] - h), min(1.0, p0[0] + h)
        x, v = golden_section_max(lambda a: f(np.array([a, 1.0 - a])), lo, hi, tol=tol)
        if v >= v0:
            return np.array([x, 1.0 - x]), v
        return p0, v0

    def neg(v):
        return -f(_project(np.append(v, 1.0 - v.sum())))

    res = minimize(
        neg,
        p0[:-1],
        method="Nelder-Mead",
        options={"xatol": tol, "fatol": 1e-14, "maxiter": 20_000,
                 "initial_simplex": _initial_simplex(p0[:-1], 0.5 / steps)},
    )
    p = _project(np.append(res.x, 1.0 - res.x.sum()))
    v = float(f(p))
    if v >= v0:
        return p, v
    return p0, v0


def _initial_simplex(x0, h):
    pts = [x0]
    for j in range(x0.size):
        e = x0.copy()
        e[j] += h if e[j] + h <= 1.0 else -h
        pts.append(e)
    return np.asarray(pts)
