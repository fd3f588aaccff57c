"""Secrecy rate expressions for the modulo-additive wiretap channel.

Covers the no-feedback secrecy lower bound (auxiliary variable fixed to the
channel input), the public-discussion key-capacity bounds, the full-duplex
feedback secrecy capacity, and the half-duplex erasure/flip scheme.
"""

from dataclasses import dataclass, field

import numpy as np

from . import channels
from .info_theory import (
    Pmf,
    binary_entropy,
    channel_capacity_ba,
    conditional_mutual_information,
    mutual_information,
)
from .optimize import golden_section_max, maximize_over_simplex

SCHEMES = (
    "no_feedback",
    "public_lower",
    "public_upper",
    "public_closed_form",
    "full_duplex",
    "half_duplex",
    "half_duplex_general",
)
MAX_GRID_INPUT = 4


@dataclass
class RateReport:
    scheme: str
    rate_bits: float
    achieving_params: dict | None = None
    notes: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.rate_bits < 0:
            raise ValueError("rate_bits must be nonnegative")

    def to_dict(self):
        params = None
        if self.achieving_params is not None:
            params = {
                k: (np.asarray(v).tolist() if isinstance(v, (np.ndarray, Pmf)) else v)
                for k, v in self.achieving_params.items()
            }
        return {
            "scheme": self.scheme,
            "rate_bits": self.rate_bits,
            "achieving_params": params,
            "notes": self.notes,
            "details": self.details,
        }


def _check_grid_size(spec):
    if spec.x_size > MAX_GRID_INPUT:
        raise ValueError(
            f"input alphabet {spec.x_size} too large for simplex grid search "
            f"(max {MAX_GRID_INPUT})"
        )


def _silent_joint(spec):
    """P(y, z | x) with the feedback symbol fixed at 0."""
    return channels.forward_law(spec, Pmf.point(spec.x1_size))


def _terms(p_x, cond):
    """I(X;Y), I(X;Z), I(Y;Z), I(X;Y|Z) for input ``p_x`` through ``cond[x, y, z]``."""
    j = np.asarray(p_x)[:, None, None] * cond
    return {
        "xy": mutual_information(j.sum(axis=2)),
        "xz": mutual_information(j.sum(axis=1)),
        "yz": mutual_information(j.sum(axis=0)),
        "xy_z": conditional_mutual_information(j),
    }


def _maximize(spec, cond, objective, grid_steps):
    p, v = maximize_over_simplex(lambda p: objective(_terms(p, cond)), spec.x_size, grid_steps)
    return Pmf(p), v


def no_feedback_secrecy_lower(spec, grid_steps=64):
    """max over P_X of [I(X;Y) - I(X;Z)]^+ with silent feedback (V = X restriction)."""
    _check_grid_size(spec)
    cond = _silent_joint(spec)
    p, v = _maximize(spec, cond, lambda t: t["xy"] - t["xz"], grid_steps)
    return RateReport(
        "no_feedback",
        max(0.0, v),
        {"input_pmf": p},
        notes="lower bound on C_s: V=X restriction of the auxiliary variable",
        details={"unclamped": v},
    )


def public_discussion_bounds(spec, grid_steps=64):
    """Lower and upper bounds on the public-discussion key capacity."""
    _check_grid_size(spec)
    cond = _silent_joint(spec)
    p_a, a = _maximize(spec, cond, lambda t: t["xy"] - t["xz"], grid_steps)
    p_b, b = _maximize(spec, cond, lambda t: t["xy"] - t["yz"], grid_steps)
    p_c, c = _maximize(spec, cond, lambda t: t["xy"], grid_steps)
    p_d, d = _maximize(spec, cond, lambda t: t["xy_z"], grid_steps)

    if a >= b:
        lo_val, lo_p, lo_branch = a, p_a, "max I(X;Y)-I(X;Z)"
    else:
        lo_val, lo_p, lo_branch = b, p_b, "max I(X;Y)-I(Y;Z)"
    if c <= d:
        up_val, up_p, up_branch = c, p_c, "max I(X;Y)"
    else:
        up_val, up_p, up_branch = d, p_d, "max I(X;Y|Z)"
    branches = {
        "max_ixy_minus_ixz": a,
        "max_ixy_minus_iyz": b,
        "max_ixy": c,
        "max_ixy_given_z": d,
    }
    lower = RateReport(
        "public_lower", max(0.0, lo_val), {"input_pmf": lo_p},
        notes=f"active branch: {lo_branch}", details=branches,
    )
    upper = RateReport(
        "public_upper", max(0.0, up_val), {"input_pmf": up_p},
        notes=f"active branch: {up_branch}", details=branches,
    )
    return lower, upper


def full_duplex_secrecy_capacity(spec, tol=1e-10, max_iter=100_000):
    """Feedback secrecy capacity: the main-channel capacity without a wiretapper."""
    cap, p = channel_capacity_ba(channels.main_channel(spec), tol=tol, max_iter=max_iter)
    return RateReport(
        "full_duplex",
        cap,
        {"input_pmf": p, "feedback_pmf": Pmf.uniform(spec.x1_size)},
        notes="Blahut-Arimoto capacity of P(y|x); uniform feedback over Z",
    )


def _validate_unit(**kw):
    for name, v in kw.items():
        arr = np.asarray(v, dtype=float)
        if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
            raise ValueError(f"{name} must lie in [0, 1]")


def _bsc_out(p, mu):
    # Pr{output = 1} for BSC(p) with Pr{X = 1} = mu.
    return p + mu - 2.0 * mu * p


def halfduplex_inner(eps, delta, mu, t):
    """Unclamped half-duplex rate; vectorizes over array arguments."""
    _validate_unit(eps=eps, delta=delta, mu=mu, t=t)
    eps, delta, mu, t = (np.asarray(v, dtype=float) for v in (eps, delta, mu, t))
    d_hat = delta + t - 2.0 * delta * t
    main = (1.0 - t) * (binary_entropy(_bsc_out(eps, mu)) - binary_entropy(eps))
    leak = binary_entropy(np.clip(_bsc_out(d_hat, mu), 0.0, 1.0)) - binary_entropy(d_hat)
    r = main - leak
    return float(r) if np.ndim(r) == 0 else r


def halfduplex_rate(eps, delta, mu, t):
    """Secrecy rate of the half-duplex Bernoulli(t) feedback scheme at (mu, t), bits."""
    r = halfduplex_inner(eps, delta, mu, t)
    return max(0.0, r) if np.ndim(r) == 0 else np.maximum(r, 0.0)


def _lexmax(rates, mus, ts):
    order = np.lexsort((ts, mus, rates))
    i = order[-1]
    return float(rates[i]), float(mus[i]), float(ts[i])


def halfduplex_optimize(eps, delta, grid=64, refine_tol=1e-12, max_sweeps=200):
    """Maximize the half-duplex rate over (mu, t) in [0, 1]^2.

    Coarse grid at resolution 1/grid, then alternating golden-section line
    searches in mu and t within one grid cell of the incumbent until a sweep
    improves the rate by less than ``refine_tol``.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    if refine_tol <= 0:
        raise ValueError("refine_tol must be positive")
    _validate_unit(eps=eps, delta=delta)
    axis = np.linspace(0.0, 1.0, grid + 1)
    mus, ts = np.meshgrid(axis, axis, indexing="ij")
    rates = halfduplex_inner(eps, delta, mus, ts)
    best, mu, t = _lexmax(rates.ravel(), mus.ravel(), ts.ravel())

    h = 1.0 / grid
    mu_lo, mu_hi = max(0.0, mu - h), min(1.0, mu + h)
    t_lo, t_hi = max(0.0, t - h), min(1.0, t + h)
    gss_tol = min(1e-10, refine_tol)
    for _ in range(max_sweeps):
        prev = best
        m_new, r = golden_section_max(lambda m: halfduplex_inner(eps, delta, m, t), mu_lo, mu_hi, gss_tol)
        if r > best:
            mu, best = m_new, r
        t_new, r = golden_section_max(lambda s: halfduplex_inner(eps, delta, mu, s), t_lo, t_hi, gss_tol)
        if r > best:
            t, best = t_new, r
        if best - prev < refine_tol:
            break

    return RateReport(
        "half_duplex",
        max(0.0, best),
        {"mu": mu, "t": t, "delta_hat": channels.halfduplex_equivalent_wiretap(delta, t)},
        notes="grid + coordinate golden-section search; [.]^+ applied after maximization",
        details={"unclamped": best, "grid": grid},
    )


def halfduplex_equivalent_channels(spec, p_x1):
    """Equivalent main P(yhat|x) (last column = erasure) and wiretap P(z|x)."""
    p_x1 = np.asarray(p_x1 if isinstance(p_x1, Pmf) else Pmf(p_x1))
    if p_x1.size != spec.x1_size:
        raise ValueError(f"p_x1 has {p_x1.size} entries, spec expects {spec.x1_size}")
    listen = p_x1[0]
    main = np.asarray(channels.main_channel(spec))
    eq_main = np.hstack([listen * main, np.full((spec.x_size, 1), 1.0 - listen)])
    wire = np.asarray(channels.wiretap_channel(spec, Pmf(p_x1)))
    return eq_main, wire


def halfduplex_general_rate(spec, p_x, p_x1):
    """[I(X;Yhat) - I(X;Z)]^+ when the destination erases itself whenever X1 != 0."""
    p_x = np.asarray(p_x if isinstance(p_x, Pmf) else Pmf(p_x))
    if p_x.size != spec.x_size:
        raise ValueError(f"p_x has {p_x.size} entries, spec expects {spec.x_size}")
    eq_main, wire = halfduplex_equivalent_channels(spec, p_x1)
    r = mutual_information(p_x[:, None] * eq_main) - mutual_information(p_x[:, None] * wire)
    return max(0.0, r)


def bsc_closed_forms(eps, delta, case):
    """Known closed forms (C_s, C_s^p, C_s^f) for the binary cases, or None where unknown."""
    h = binary_entropy
    cs_f = 1.0 - h(eps)
    if case == "noiseless":
        return {"C_s": 0.0, "C_s_p": 0.0, "C_s_f": 1.0}
    if case == "independent":
        return {
            "C_s": max(0.0, h(delta) - h(eps)),
            "C_s_p": h(eps + delta - 2 * eps * delta) - h(eps),
            "C_s_f": cs_f,
        }
    if case == "degraded_main":
        return {"C_s": 0.0, "C_s_p": 0.0, "C_s_f": cs_f}
    if case == "degraded_wiretap":
        v = h(delta) - h(eps)
        return {"C_s": v, "C_s_p": v, "C_s_f": cs_f}
    raise ValueError(f"unknown case {case!r}")
