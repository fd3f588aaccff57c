"""Modulo-additive wiretap channels with destination feedback.

At time i the three receivers see

    y0 = x + x1 + n0   (mod |Y0|)   source, noisy feedback
    y  = x + x1 + n1   (mod |Y|)    destination
    z  = x + x1 + n2   (mod |Z|)    wiretapper

with the noise triple (n0, n1, n2) drawn i.i.d. from ``noise_law``.
"""

from dataclasses import dataclass, field

import numpy as np

from .info_theory import JointPmf, Pmf, TransitionMatrix

CORRELATIONS = ("independent", "degraded_main", "degraded_wiretap", "noiseless", "custom")

# Output ordering of the half-duplex equivalent main channel.
ERASURE = 1
HALF_DUPLEX_OUTPUTS = ("0", "erasure", "1")


@dataclass(frozen=True, eq=False)
class ModAddChannelSpec:
    x_size: int
    x1_size: int
    y0_size: int
    y_size: int
    z_size: int
    noise_law: JointPmf

    def __post_init__(self):
        sizes = (self.x_size, self.x1_size, self.y0_size, self.y_size, self.z_size)
        if any(int(s) != s or s < 1 for s in sizes):
            raise ValueError("alphabet sizes must be positive integers")
        if self.x_size > self.y_size or self.x_size > self.z_size:
            raise ValueError("x_size must not exceed y_size or z_size")
        if not isinstance(self.noise_law, JointPmf):
            object.__setattr__(self, "noise_law", JointPmf(self.noise_law))
        if tuple(self.noise_law.dims) != (self.y0_size, self.y_size, self.z_size):
            raise ValueError(
                f"noise_law dims {self.noise_law.dims} do not match "
                f"(y0, y, z) = {(self.y0_size, self.y_size, self.z_size)}"
            )

    @property
    def n12(self):
        """Joint law of (N1, N2)."""
        return self.noise_law.tensor.sum(axis=0)

    @property
    def n1_pmf(self):
        return self.noise_law.tensor.sum(axis=(0, 2))

    @property
    def n2_pmf(self):
        return self.noise_law.tensor.sum(axis=(0, 1))

    @classmethod
    def from_n12(cls, n12, x_size=None, x1_size=None, y0_size=2):
        """Build a spec from a joint (N1, N2) law; N0 independent uniform."""
        n12 = np.asarray(JointPmf(n12).tensor)
        if n12.ndim != 2:
            raise ValueError("(N1, N2) law must be 2-D")
        qy, qz = n12.shape
        law = np.full(y0_size, 1.0 / y0_size)[:, None, None] * n12[None, :, :]
        return cls(
            x_size=min(qy, qz) if x_size is None else x_size,
            x1_size=qz if x1_size is None else x1_size,
            y0_size=y0_size,
            y_size=qy,
            z_size=qz,
            noise_law=JointPmf(law),
        )

    @classmethod
    def independent(cls, n1, n2, n0=None, x_size=None, x1_size=None):
        n1 = np.asarray(Pmf(n1).probs)
        n2 = np.asarray(Pmf(n2).probs)
        if n0 is None:
            return cls.from_n12(np.outer(n1, n2), x_size=x_size, x1_size=x1_size)
        n0 = np.asarray(Pmf(n0).probs)
        law = n0[:, None, None] * n1[None, :, None] * n2[None, None, :]
        return cls(
            x_size=min(n1.size, n2.size) if x_size is None else x_size,
            x1_size=n2.size if x1_size is None else x1_size,
            y0_size=n0.size,
            y_size=n1.size,
            z_size=n2.size,
            noise_law=JointPmf(law),
        )


@dataclass(frozen=True)
class BscWiretapSpec:
    eps: float
    delta: float
    correlation: str = "independent"
    custom: object = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("eps", "delta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name} must lie in [0, 1/2], got {v}")
        if self.correlation not in CORRELATIONS:
            raise ValueError(f"unknown correlation {self.correlation!r}")
        if self.correlation == "degraded_main" and not self.delta < self.eps:
            raise ValueError("degraded_main requires delta < eps")
        if self.correlation == "degraded_wiretap" and not self.eps < self.delta:
            raise ValueError("degraded_wiretap requires eps < delta")
        if self.correlation == "noiseless" and (self.eps != 0 or self.delta != 0):
            raise ValueError("noiseless requires eps = delta = 0")
        if self.correlation == "custom":
            if self.custom is None:
                raise ValueError("custom correlation needs a joint (N1, N2) law")
            law = np.asarray(JointPmf(self.custom).tensor)
            if law.shape != (2, 2):
                raise ValueError("custom (N1, N2) law must be 2x2")
            if abs(law[1, :].sum() - self.eps) > 1e-9 or abs(law[:, 1].sum() - self.delta) > 1e-9:
                raise ValueError("custom law marginals disagree with eps/delta")

    @property
    def n_prime(self):
        """Flip probability of the degrading BSC, or None."""
        if self.correlation == "degraded_main":
            return (self.eps - self.delta) / (1.0 - 2.0 * self.delta)
        if self.correlation == "degraded_wiretap":
            return (self.delta - self.eps) / (1.0 - 2.0 * self.eps)
        return None


def _bsc_n12(spec):
    e, d = spec.eps, spec.delta
    if spec.correlation == "noiseless":
        n12 = np.zeros((2, 2))
        n12[0, 0] = 1.0
        return n12
    if spec.correlation == "independent":
        return np.outer([1 - e, e], [1 - d, d])
    if spec.correlation == "custom":
        return np.asarray(JointPmf(spec.custom).tensor)
    a = spec.n_prime
    n12 = np.zeros((2, 2))
    if spec.correlation == "degraded_main":
        # N1 = N2 + N'
        for n2, p2 in ((0, 1 - d), (1, d)):
            for np_, pp in ((0, 1 - a), (1, a)):
                n12[(n2 + np_) % 2, n2] += p2 * pp
    else:
        # N2 = N1 + N'
        for n1, p1 in ((0, 1 - e), (1, e)):
            for np_, pp in ((0, 1 - a), (1, a)):
                n12[n1, (n1 + np_) % 2] += p1 * pp
    return n12


def bsc_to_modadd(spec):
    """Binary modulo-additive spec realizing one of the BSC correlation cases."""
    return ModAddChannelSpec.from_n12(_bsc_n12(spec), x_size=2, x1_size=2, y0_size=2)


def forward_law(spec, x1_pmf):
    """Conditional law ``P[x, y, z] = P(y, z | x)`` under random feedback ``x1_pmf``."""
    x1 = np.asarray(x1_pmf if isinstance(x1_pmf, Pmf) else Pmf(x1_pmf))
    if x1.size != spec.x1_size:
        raise ValueError(f"x1_pmf has {x1.size} entries, spec expects {spec.x1_size}")
    qy, qz = spec.y_size, spec.z_size
    n12 = spec.n12
    out = np.zeros((spec.x_size, qy, qz))
    n1_idx = np.arange(qy)[:, None]
    n2_idx = np.arange(qz)[None, :]
    for x in range(spec.x_size):
        for s, ps in enumerate(x1):
            if ps == 0.0:
                continue
            y = (x + s + n1_idx) % qy
            z = (x + s + n2_idx) % qz
            np.add.at(out[x], (np.broadcast_to(y, n12.shape), np.broadcast_to(z, n12.shape)), ps * n12)
    return out


def main_channel(spec):
    """P(y | x) with silent feedback."""
    return TransitionMatrix(forward_law(spec, Pmf.point(spec.x1_size)).sum(axis=2))


def wiretap_channel(spec, x1_pmf=None):
    """P(z | x); feedback silent unless ``x1_pmf`` is given."""
    if x1_pmf is None:
        x1_pmf = Pmf.point(spec.x1_size)
    return TransitionMatrix(forward_law(spec, x1_pmf).sum(axis=1))


def add_symbols(x, x1, n, q):
    return (np.asarray(x) + np.asarray(x1) + np.asarray(n)) % q


def cancel_feedback(y, x1, y_size):
    """Strip known feedback from the destination's observation: (y - x1) mod |Y|."""
    return (np.asarray(y) - np.asarray(x1)) % y_size


def _check_unit(name, v):
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")


def halfduplex_equivalent_main(eps, t):
    """Main channel seen through Bernoulli(t) self-erasures; outputs (0, erasure, 1)."""
    _check_unit("eps", eps)
    _check_unit("t", t)
    keep = 1.0 - t
    right = keep * (1.0 - eps)
    wrong = keep - right
    return TransitionMatrix(np.array([[right, t, wrong], [wrong, t, right]]))


def halfduplex_equivalent_wiretap(delta, t):
    """Wiretapper flip probability when feedback flips each symbol w.p. t."""
    _check_unit("delta", delta)
    _check_unit("t", t)
    return delta + t - 2.0 * delta * t


@dataclass(frozen=True)
class HalfDuplexParams:
    mu: float
    t: float
    delta: float
    delta_hat: float = field(init=False)

    def __post_init__(self):
        _check_unit("mu", self.mu)
        object.__setattr__(self, "delta_hat", halfduplex_equivalent_wiretap(self.delta, self.t))


def sample_noise(spec, size, rng):
    """Draw ``size`` i.i.d. noise triples; returns (n0, n1, n2)."""
    law = spec.noise_law.tensor
    cdf = np.cumsum(law.ravel())
    cdf[-1] = 1.0
    flat = np.searchsorted(cdf, rng.random(size), side="right")
    return np.unravel_index(flat, law.shape)


def sample_symbols(spec, x, x1, rng):
    """Pass ``x`` (source) and ``x1`` (feedback) through the channel.

    Returns ``(y0, y, z)``. ``rng`` is a numpy Generator owned by the caller.
    """
    x = np.asarray(x)
    x1 = np.asarray(x1)
    if x.shape != x1.shape:
        raise ValueError("x and x1 must have the same shape")
    if x.size and (x.min() < 0 or x.max() >= spec.x_size):
        raise ValueError("source symbol out of range")
    if x1.size and (x1.min() < 0 or x1.max() >= spec.x1_size):
        raise ValueError("feedback symbol out of range")
    n0, n1, n2 = sample_noise(spec, x.shape, rng)
    y0 = add_symbols(x, x1, n0, spec.y0_size)
    y = add_symbols(x, x1, n1, spec.y_size)
    z = add_symbols(x, x1, n2, spec.z_size)
    return y0, y, z
