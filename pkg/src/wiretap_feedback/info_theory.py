"""Finite-alphabet information measures and discrete channel capacity.

All quantities are in bits. ``0 log 0`` is taken as 0, and probabilities below
``TINY`` are treated as exact zeros.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

TINY = 1e-300
NORM_TOL = 1e-12
RENORM_TOL = 1e-9
LN2 = math.log(2.0)


def _normalized(arr, what):
    arr = np.asarray(arr, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{what} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} has non-finite entries")
    if np.any(arr < 0):
        raise ValueError(f"{what} has negative entries")
    total = arr.sum()
    dev = abs(total - 1.0)
    if dev > RENORM_TOL:
        raise ValueError(f"{what} sums to {total!r}, not 1")
    if dev > 0:
        arr = arr / total
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over ``{0, ..., alphabet_size - 1}``.

    Inputs within 1e-9 of unit mass are renormalized; anything further off is
    rejected.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = _normalized(self.probs, "Pmf")
        if arr.ndim != 1:
            raise ValueError("Pmf must be one-dimensional")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def alphabet_size(self):
        return self.probs.size

    @classmethod
    def uniform(cls, q):
        return cls(np.full(q, 1.0 / q))

    @classmethod
    def point(cls, q, symbol=0):
        p = np.zeros(q)
        p[symbol] = 1.0
        return cls(p)

    @classmethod
    def bernoulli(cls, p1):
        if not 0.0 <= p1 <= 1.0:
            raise ValueError("Bernoulli parameter must lie in [0, 1]")
        return cls(np.array([1.0 - p1, p1]))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint law as a k-dimensional probability tensor."""

    tensor: np.ndarray

    def __post_init__(self):
        arr = _normalized(self.tensor, "JointPmf")
        arr.setflags(write=False)
        object.__setattr__(self, "tensor", arr)

    @property
    def dims(self):
        return list(self.tensor.shape)

    def marginal(self, axis):
        axes = tuple(i for i in range(self.tensor.ndim) if i != axis)
        return Pmf(self.tensor.sum(axis=axes))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.tensor, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic channel law, ``p[x, y] = P(y | x)``."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("TransitionMatrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("TransitionMatrix entries must be finite and nonnegative")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > RENORM_TOL):
            raise ValueError("TransitionMatrix rows must sum to 1")
        arr = arr / sums[:, None]
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @property
    def rows(self):
        return self.p.shape[0]

    @property
    def cols(self):
        return self.p.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.p, dtype=dtype)


def _plogp(p):
    """Elementwise p * log2(p) with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > TINY
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def binary_entropy(p):
    """Binary entropy function in bits; accepts scalars or arrays."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("binary_entropy argument must lie in [0, 1]")
    h = -(_plogp(arr) + _plogp(1.0 - arr))
    if np.ndim(h) == 0:
        return float(h)
    return h


def entropy(p):
    """Shannon entropy in bits of a Pmf (or any probability array)."""
    arr = np.asarray(p, dtype=float)
    return float(max(0.0, -_plogp(arr).sum()))


def _as_joint2(j):
    arr = np.asarray(j, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-axis joint law, got {arr.ndim} axes")
    return arr


def mutual_information(j):
    """I(A;B) in bits for a joint law ``j[a, b]``."""
    arr = _as_joint2(j)
    pa = arr.sum(axis=1)
    pb = arr.sum(axis=0)
    outer = np.outer(pa, pb)
    mask = arr > TINY
    mi = np.sum(arr[mask] * np.log2(arr[mask] / outer[mask]))
    return float(max(0.0, mi))


def conditional_entropy(j, given_axis=1):
    """H(target | given) for a 2-axis joint; ``given_axis`` names the condition."""
    arr = _as_joint2(j)
    if given_axis not in (0, 1):
        raise ValueError("given_axis must be 0 or 1")
    given = arr.sum(axis=1 - given_axis)
    return float(max(0.0, entropy(arr) - entropy(given)))


def conditional_mutual_information(j3):
    """I(A;B|C) for a 3-axis joint ``j3[a, b, c]``."""
    arr = np.asarray(j3, dtype=float)
    if arr.ndim != 3:
        raise ValueError("expected a 3-axis joint law")
    h_ac = entropy(arr.sum(axis=1))
    h_bc = entropy(arr.sum(axis=0))
    h_c = entropy(arr.sum(axis=(0, 1)))
    h_abc = entropy(arr)
    return float(max(0.0, h_ac + h_bc - h_abc - h_c))


def channel_mutual_information(p_x, w):
    """I(X;Y) for input law ``p_x`` through ``w[x, y]``."""
    p_x = np.asarray(p_x, dtype=float)
    w = np.asarray(w, dtype=float)
    return mutual_information(p_x[:, None] * w)


def channel_capacity_ba(w, tol=1e-10, max_iter=100_000, trace=None):
    """Capacity of a DMC by Blahut-Arimoto iteration.

    Parameters
    ----------
    w : TransitionMatrix or array, shape (n_in, n_out)
        ``w[x, y] = P(y | x)``.
    tol : float
        Stop once the duality gap ``log max_x c_x - I(p)`` is below ``tol`` bits.
    max_iter : int
        Iteration cap; :class:`ConvergenceError` if the gap is still open.
    trace : list, optional
        If given, receives I(p) (bits) for every iterate.

    Returns
    -------
    capacity : float
        I(p*) in bits, within ``tol`` of the capacity.
    input_pmf : Pmf
        The input law achieving ``capacity``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.asarray(TransitionMatrix(np.asarray(w)).p)
    n_in = w.shape[0]
    logw = np.zeros_like(w)
    pos = w > TINY
    logw[pos] = np.log(w[pos])
    p = np.full(n_in, 1.0 / n_in)
    tol_nats = tol * LN2

    for _ in range(max_iter):
        q = p @ w
        logq = np.zeros_like(q)
        qpos = q > TINY
        logq[qpos] = np.log(q[qpos])
        # D(w_x || q) in nats; zero-probability outputs contribute nothing.
        d = np.where(pos, w * (logw - logq[None, :]), 0.0).sum(axis=1)
        mi = float(p @ d)
        if trace is not None:
            trace.append(mi / LN2)
        upper = float(d.max())
        if upper - mi < tol_nats:
            return max(0.0, mi / LN2), Pmf(p)
        p = p * np.exp(d - upper)
        p /= p.sum()

    raise ConvergenceError(
        f"Blahut-Arimoto gap {(upper - mi) / LN2:.3e} bits after {max_iter} iterations"
    )


def plug_in_mi_estimate(samples):
    """Plug-in mutual information of paired symbols, with Miller-Madow correction.

    ``samples`` is an (N, 2) array-like of symbol pairs. Returns
    ``(estimate, corrected)`` in bits.
    """
    arr = np.asarray(samples)
    if arr.size == 0:
        raise ValueError("plug_in_mi_estimate needs at least one sample")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must have shape (N, 2)")
    n = arr.shape[0]
    _, a = np.unique(arr[:, 0], return_inverse=True)
    _, b = np.unique(arr[:, 1], return_inverse=True)
    a = a.ravel()
    b = b.ravel()
    qa, qb = a.max() + 1, b.max() + 1
    counts = np.bincount(a * qb + b, minlength=qa * qb).reshape(qa, qb)
    joint = counts / n
    estimate = mutual_information(joint)
    k_ab = np.count_nonzero(counts)
    # Miller-Madow: H_mm = H + (K - 1) / (2N) nats for each entropy term.
    bias = (k_ab - qa - qb + 1) / (2.0 * n * LN2)
    return estimate, estimate - bias
