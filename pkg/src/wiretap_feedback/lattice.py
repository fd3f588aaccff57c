"""Mod-lattice channel numerics: reduction, wrapped Gaussian density, entropy.

The fundamental region is the parallelepiped ``{G u : u in [-1/2, 1/2)^m}``.
Only m in {1, 2} is supported; the entropy quadrature is a tensor midpoint
rule whose cost grows as N^m.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureError

TRUNC_SIGMAS = 10.0
ENTROPY_TOL = 1e-8
MAX_POINTS = {1: 1 << 20, 2: 1 << 11}
_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    g: np.ndarray
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0
    sigma0_sq: float = 1.0
    volume: float = field(init=False)
    g_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.g, dtype=float))
        m = g.shape[0]
        if g.shape != (m, m) or m not in (1, 2):
            raise ValueError("generator must be a 1x1 or 2x2 matrix")
        if not np.all(np.isfinite(g)):
            raise ValueError("generator has non-finite entries")
        det = float(np.linalg.det(g))
        if det == 0.0 or abs(det) < 1e-14 * np.abs(g).max() ** m:
            raise ValueError("generator matrix is singular")
        for name in ("sigma0_sq", "sigma1_sq", "sigma2_sq"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        g.setflags(write=False)
        g_inv = np.linalg.inv(g)
        g_inv.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "volume", abs(det))
        object.__setattr__(self, "g_inv", g_inv)

    @property
    def m(self):
        return self.g.shape[0]

    @classmethod
    def integers(cls, **sigmas):
        return cls(np.eye(1), **sigmas)


def region_radius(spec):
    """Largest norm of a point of the fundamental region (attained at a corner)."""
    corners = np.array(list(itertools.product((-0.5, 0.5), repeat=spec.m)))
    return float(np.linalg.norm(corners @ spec.g.T, axis=1).max())


def mod_lambda_reduce(x, spec):
    """Reduce points into the fundamental region: x - G round(G^-1 x).

    Coordinates in the lattice basis are rounded half-down so they land in
    [-1/2, 1/2). Accepts a single point of length m or an (..., m) array.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.m:
        raise ValueError(f"points must have trailing dimension {spec.m}")
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot reduce non-finite points")
    u = x @ spec.g_inv.T
    k = np.floor(u + 0.5)
    return x - k @ spec.g.T


def in_region(x, spec, slack=1e-12):
    u = np.asarray(x, dtype=float) @ spec.g_inv.T
    return np.all((u >= -0.5 - slack) & (u < 0.5 + slack), axis=-1)


def lattice_points(spec, radius):
    """All lattice points with norm at most ``radius``."""
    bounds = np.ceil(np.linalg.norm(spec.g_inv, axis=1) * radius).astype(int)
    axes = [np.arange(-b, b + 1) for b in bounds]
    u = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.m)
    pts = u @ spec.g.T
    return pts[np.linalg.norm(pts, axis=1) <= radius]


def _shifts(spec, sigma_sq):
    radius = TRUNC_SIGMAS * math.sqrt(spec.m * sigma_sq) + region_radius(spec)
    return lattice_points(spec, radius)


def _pdf_unchecked(pts, spec, sigma_sq, shifts):
    m = spec.m
    norm = (2.0 * math.pi * sigma_sq) ** (-m / 2.0)
    out = np.empty(pts.shape[0])
    step = max(1, _CHUNK * 64 // max(1, shifts.shape[0]))
    for i in range(0, pts.shape[0], step):
        d = pts[i:i + step, None, :] + shifts[None, :, :]
        out[i:i + step] = np.exp(-np.sum(d * d, axis=-1) / (2.0 * sigma_sq)).sum(axis=1)
    return norm * out


def wrapped_gaussian_pdf(n_prime, spec, sigma_sq):
    """Density of white Gaussian noise (variance ``sigma_sq`` per dimension) mod the lattice.

    ``n_prime`` is one point of the fundamental region or an (N, m) array of
    them; returns a float or an (N,) array.
    """
    if not sigma_sq > 0:
        raise ValueError("sigma_sq must be positive")
    pts = np.asarray(n_prime, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != spec.m:
        raise ValueError(f"points must have dimension {spec.m}")
    if not np.all(in_region(pts, spec)):
        raise ValueError("n_prime lies outside the fundamental region")
    vals = _pdf_unchecked(pts, spec, sigma_sq, _shifts(spec, sigma_sq))
    return float(vals[0]) if single else vals


def _midpoint_nodes(spec, n):
    u1 = (np.arange(n) + 0.5) / n - 0.5
    u = np.stack(np.meshgrid(*([u1] * spec.m), indexing="ij"), axis=-1).reshape(-1, spec.m)
    return u @ spec.g.T, spec.volume / n**spec.m


def _initial_nodes(spec, sigma_sq):
    # Resolve the density peak from the first level: spacing <= sigma / 4.
    extent = float(np.linalg.norm(spec.g, axis=0).max())
    return max(16, int(math.ceil(4.0 * extent / math.sqrt(sigma_sq))))


def region_integral(func, spec, sigma_sq, tol=ENTROPY_TOL, max_points=None):
    """Integrate ``func(f)`` over the region, f the wrapped density at the nodes.

    Midpoint rule refined by doubling until successive estimates differ by
    less than ``tol``.
    """
    max_points = max_points or MAX_POINTS[spec.m]
    shifts = _shifts(spec, sigma_sq)
    n = _initial_nodes(spec, sigma_sq)
    prev = None
    while n <= max_points:
        nodes, weight = _midpoint_nodes(spec, n)
        est = weight * float(np.sum(func(_pdf_unchecked(nodes, spec, sigma_sq, shifts))))
        if prev is not None and abs(est - prev) < tol:
            return est
        prev = est
        n *= 2
    raise QuadratureError(f"quadrature did not converge to {tol} with {max_points} nodes per axis")


def _neg_f_log2_f(f):
    out = np.zeros_like(f)
    pos = f > 1e-300
    out[pos] = -f[pos] * np.log2(f[pos])
    return out


def wrapped_gaussian_entropy(spec, sigma_sq, tol=ENTROPY_TOL):
    """Differential entropy (bits) of Gaussian noise reduced mod the lattice."""
    if not sigma_sq > 0:
        raise ValueError("sigma_sq must be positive")
    return region_integral(_neg_f_log2_f, spec, sigma_sq, tol)


def wrapped_gaussian_mass(spec, sigma_sq, tol=ENTROPY_TOL):
    """Integral of the wrapped density over the region (1 up to truncation)."""
    return region_integral(lambda f: f, spec, sigma_sq, tol)


def mod_lambda_capacity(spec, tol=ENTROPY_TOL):
    """log2 V(Lambda) - h(Lambda, sigma1^2): depends on the main-channel noise only."""
    return math.log2(spec.volume) - wrapped_gaussian_entropy(spec, spec.sigma1_sq, tol)


def uniform_in_region(spec, size, rng):
    u = rng.random((size, spec.m)) - 0.5
    return u @ spec.g.T


def sample_mod_lambda(spec, x, x1, rng):
    """Outputs ``(y, z)`` of the destination and wiretapper for inputs ``x``, ``x1``.

    ``x`` and ``x1`` are (N, m) arrays; Gaussian noise with variances
    sigma1^2 (destination) and sigma2^2 (wiretapper) per dimension.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    if x.shape != x1.shape:
        raise ValueError("x and x1 must have the same shape")
    n1 = rng.normal(0.0, math.sqrt(spec.sigma1_sq), x.shape)
    n2 = rng.normal(0.0, math.sqrt(spec.sigma2_sq), x.shape)
    return mod_lambda_reduce(x + x1 + n1, spec), mod_lambda_reduce(x + x1 + n2, spec)
