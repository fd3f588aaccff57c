"""Monte Carlo and exact checks of the destination-key feedback schemes.

Each trial draws from its own counter-based substream, so reports do not
depend on how trials are split across worker threads. Aggregation uses only
integer counts.
"""

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaincc

from . import channels, lattice
from .channels import ModAddChannelSpec
from .errors import BudgetExceededError
from .info_theory import Pmf, plug_in_mi_estimate
from .rng import TAG_CODEBOOK, TAG_TRIAL, substream

CODEBOOK_CAP = 1 << 24
ENUM_CAP = 1 << 20
DIGEST_LEN = 8
# Minimum mean count per (message, digest) cell for the plug-in MI estimate.
DIGEST_MIN_CELL = 16
WILSON_Z = 1.959963984540054
SCHEMES = ("full_duplex", "half_duplex", "mod_lambda")
CSV_COLUMNS = (
    "scheme", "n", "M", "trials", "seed", "p_e_hat", "ci_lo", "ci_hi",
    "chi2", "pvalue", "mi_bits", "mi_corrected",
)


@dataclass(frozen=True, eq=False)
class Codebook:
    m_size: int
    n: int
    words: np.ndarray
    source_pmf: Pmf
    seed: int


@dataclass
class SimConfig:
    scheme: str
    n: int
    m_size: int
    trials: int
    seed: int
    channel: object
    t: float | None = None
    mu: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.m_size < 2:
            raise ValueError("m_size must be at least 2")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.scheme == "half_duplex":
            if self.t is None or not 0.0 <= self.t <= 1.0:
                raise ValueError("half_duplex needs t in [0, 1]")
        if self.scheme == "mod_lambda":
            if not isinstance(self.channel, lattice.LatticeSpec):
                raise ValueError("mod_lambda needs a LatticeSpec channel")
        elif not isinstance(self.channel, ModAddChannelSpec):
            raise ValueError(f"{self.scheme} needs a ModAddChannelSpec channel")


@dataclass
class SimReport:
    scheme: str
    n: int
    m_size: int
    trials: int
    seed: int
    p_e_hat: float
    ci_lo: float
    ci_hi: float
    chi2_stat: float
    chi2_pvalue: float
    mi_estimate_bits: float
    mi_corrected_bits: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def csv_row(self):
        return [
            self.scheme, self.n, self.m_size, self.trials, self.seed, self.p_e_hat,
            self.ci_lo, self.ci_hi, self.chi2_stat, self.chi2_pvalue,
            self.mi_estimate_bits, self.mi_corrected_bits,
        ]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerow(self.csv_row())
        return buf.getvalue()


def wilson_interval(successes, total, z=WILSON_Z):
    if total == 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == total else min(1.0, centre + half)
    return min(lo, p), max(hi, p)


def chi_squared_uniformity(samples, q):
    """Pearson chi-squared statistic against the uniform law on q symbols, with p-value."""
    samples = np.asarray(samples).ravel()
    if samples.size < 5 * q:
        raise ValueError(f"need at least {5 * q} samples for a {q}-symbol test")
    return _chi2_from_counts(np.bincount(samples, minlength=q)[:q], q)


def _chi2_from_counts(counts, q):
    total = counts.sum()
    expected = total / q
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return stat, float(gammaincc((q - 1) / 2.0, stat / 2.0))


def generate_codebook(m_size, n, source_pmf, seed):
    """Random codebook with i.i.d. symbols; bit-exact in ``seed``."""
    if m_size < 1 or n < 1:
        raise ValueError("m_size and n must be positive")
    if m_size * n > CODEBOOK_CAP:
        raise BudgetExceededError(f"codebook of {m_size * n} symbols exceeds cap {CODEBOOK_CAP}")
    pmf = source_pmf if isinstance(source_pmf, Pmf) else Pmf(source_pmf)
    rng = substream(seed, TAG_CODEBOOK)
    words = rng.choice(pmf.alphabet_size, size=(m_size, n), p=np.asarray(pmf))
    words.setflags(write=False)
    return Codebook(m_size, n, words, pmf, seed)


def _log_table(pmf):
    pmf = np.asarray(pmf, dtype=float)
    out = np.full(pmf.shape, -np.inf)
    pos = pmf > 0
    out[pos] = np.log(pmf[pos])
    return out


def ml_decode(y_hat, words, log_noise, q):
    """Index of the codeword maximizing sum_i log P_N(y_hat_i - x_i); ties go low.

    Entries of ``y_hat`` equal to -1 are erasures and carry no likelihood.
    """
    diff = (y_hat[None, :] - words) % q
    ll = log_noise[diff]
    ll = np.where(y_hat[None, :] < 0, 0.0, ll)
    return int(np.argmax(ll.sum(axis=1)))


def digest_length(n, q, m_size, trials):
    """Number of leading wiretap symbols folded into the MI digest.

    The largest k <= min(n, 8) keeping m_size * q**k cells at no fewer than
    DIGEST_MIN_CELL expected samples each; at least 1.
    """
    k = 1
    while k < min(n, DIGEST_LEN) and m_size * q ** (k + 1) * DIGEST_MIN_CELL <= trials:
        k += 1
    return k


def _digest(z, q, k):
    return int(np.ravel_multi_index(tuple(z[:k]), (q,) * k))


def _chunks(trials, workers):
    workers = max(1, int(workers))
    size = max(1, math.ceil(trials / (4 * workers)))
    return [range(s, min(trials, s + size)) for s in range(0, trials, size)]


def _run_parallel(fn, trials, workers):
    chunks = _chunks(trials, workers)
    if workers <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _report(cfg, errors, z_counts, q_z, pairs, extra):
    lo, hi = wilson_interval(errors, cfg.trials)
    chi2, pval = _chi2_from_counts(z_counts, q_z)
    mi, mi_c = plug_in_mi_estimate(pairs)
    return SimReport(
        cfg.scheme, cfg.n, cfg.m_size, cfg.trials, cfg.seed,
        errors / cfg.trials, lo, hi, chi2, pval, mi, mi_c, extra,
    )


def run_full_duplex(cfg):
    """Uniform feedback over Z, cancellation and ML decoding at the destination."""
    if cfg.scheme != "full_duplex":
        raise ValueError("config scheme must be full_duplex")
    spec = cfg.channel
    book = generate_codebook(cfg.m_size, cfg.n, Pmf.uniform(spec.x_size), cfg.seed)
    log_n1 = _log_table(spec.n1_pmf)
    qz = spec.z_size
    dlen = digest_length(cfg.n, qz, cfg.m_size, cfg.trials)

    def work(trial_ids):
        errors = 0
        z_counts = np.zeros(qz, dtype=np.int64)
        pairs = np.empty((len(trial_ids), 2), dtype=np.int64)
        for j, k in enumerate(trial_ids):
            rng = substream(cfg.seed, TAG_TRIAL, k)
            w = int(rng.integers(cfg.m_size))
            x = book.words[w]
            x1 = rng.integers(spec.x1_size, size=cfg.n)
            _, y, z = channels.sample_symbols(spec, x, x1, rng)
            y_hat = channels.cancel_feedback(y, x1, spec.y_size)
            errors += ml_decode(y_hat, book.words, log_n1, spec.y_size) != w
            z_counts += np.bincount(z, minlength=qz)
            pairs[j] = (w, _digest(z, qz, dlen))
        return errors, z_counts, pairs

    parts = _run_parallel(work, cfg.trials, cfg.workers)
    errors = sum(p[0] for p in parts)
    z_counts = sum(p[1] for p in parts)
    pairs = np.concatenate([p[2] for p in parts])
    return _report(cfg, errors, z_counts, qz, pairs, {
        "digest_symbols": dlen,
        "secrecy_evidence": "z-symbol uniformity and digest MI only; exact I(W;Z) "
                            "is available on enumerable instances",
    })


def run_half_duplex(cfg):
    """Bernoulli(t) feedback symbol 1 erases the destination's own reception.

    Besides the SimReport fields, ``extra`` holds the empirical equivalent main
    channel (rows x, columns 0 / erasure / 1), the empirical wiretap flip rate
    and their analytic counterparts.
    """
    if cfg.scheme != "half_duplex":
        raise ValueError("config scheme must be half_duplex")
    spec = cfg.channel
    if spec.x_size != 2 or spec.x1_size != 2:
        raise ValueError("half_duplex simulation needs a binary channel")
    book = generate_codebook(cfg.m_size, cfg.n, Pmf.bernoulli(cfg.mu), cfg.seed)
    log_n1 = _log_table(spec.n1_pmf)
    qz = spec.z_size
    dlen = digest_length(cfg.n, qz, cfg.m_size, cfg.trials)

    def work(trial_ids):
        errors = 0
        counts = np.zeros((2, 3), dtype=np.int64)
        flips = 0
        z_counts = np.zeros(qz, dtype=np.int64)
        pairs = np.empty((len(trial_ids), 2), dtype=np.int64)
        for j, k in enumerate(trial_ids):
            rng = substream(cfg.seed, TAG_TRIAL, k)
            w = int(rng.integers(cfg.m_size))
            x = book.words[w]
            x1 = (rng.random(cfg.n) < cfg.t).astype(np.int64)
            _, y, z = channels.sample_symbols(spec, x, x1, rng)
            # listening slots see y = x + n1; transmitting slots are erased
            y_hat = np.where(x1 == 1, -1, y)
            col = np.where(x1 == 1, channels.ERASURE, 2 * y)
            counts += np.bincount(x * 3 + col, minlength=6).reshape(2, 3)
            flips += int(np.count_nonzero(z != x))
            errors += ml_decode(y_hat, book.words, log_n1, spec.y_size) != w
            z_counts += np.bincount(z, minlength=qz)
            pairs[j] = (w, _digest(z, qz, dlen))
        return errors, counts, flips, z_counts, pairs

    parts = _run_parallel(work, cfg.trials, cfg.workers)
    errors = sum(p[0] for p in parts)
    counts = sum(p[1] for p in parts)
    flips = sum(p[2] for p in parts)
    z_counts = sum(p[3] for p in parts)
    pairs = np.concatenate([p[4] for p in parts])

    rows = counts.sum(axis=1, keepdims=True)
    emp = np.divide(counts, rows, out=np.zeros((2, 3)), where=rows > 0)
    eps = float(spec.n1_pmf[1])
    delta = float(spec.n2_pmf[1])
    analytic = np.asarray(channels.halfduplex_equivalent_main(eps, cfg.t))
    total = cfg.trials * cfg.n
    extra = {
        "empirical_main": emp.tolist(),
        "analytic_main": analytic.tolist(),
        "main_linf": float(np.abs(emp - analytic).max()),
        "wiretap_flip_rate": flips / total,
        "delta_hat": channels.halfduplex_equivalent_wiretap(delta, cfg.t),
        "symbols": total,
        "digest_symbols": dlen,
        "t": cfg.t,
        "mu": cfg.mu,
    }
    return _report(cfg, errors, z_counts, qz, pairs, extra)


def _torus_log_lik(y_hat, words, spec, shifts):
    """log prod_i f(y_hat_i - x_i mod Lambda) for every codeword."""
    n, m = y_hat.shape
    diff = lattice.mod_lambda_reduce(y_hat[None, :, :] - words, spec).reshape(-1, m)
    f = lattice._pdf_unchecked(diff, spec, spec.sigma1_sq, shifts)
    with np.errstate(divide="ignore"):
        return np.log(f).reshape(words.shape[0], n).sum(axis=1)


def run_mod_lambda(cfg, bins=64):
    """Mod-lattice version: uniform codewords and uniform feedback over the region."""
    if cfg.scheme != "mod_lambda":
        raise ValueError("config scheme must be mod_lambda")
    spec = cfg.channel
    book_rng = substream(cfg.seed, TAG_CODEBOOK)
    if cfg.m_size * cfg.n * spec.m > CODEBOOK_CAP:
        raise BudgetExceededError("codebook exceeds cap")
    words = lattice.uniform_in_region(spec, cfg.m_size * cfg.n, book_rng).reshape(cfg.m_size, cfg.n, spec.m)
    shifts = lattice._shifts(spec, spec.sigma1_sq)
    digest_bins = 8
    dlen = digest_length(min(cfg.n, 2), digest_bins, cfg.m_size, cfg.trials)

    def work(trial_ids):
        errors = 0
        z_counts = np.zeros(bins, dtype=np.int64)
        pairs = np.empty((len(trial_ids), 2), dtype=np.int64)
        for j, k in enumerate(trial_ids):
            rng = substream(cfg.seed, TAG_TRIAL, k)
            w = int(rng.integers(cfg.m_size))
            x1 = lattice.uniform_in_region(spec, cfg.n, rng)
            y, z = lattice.sample_mod_lambda(spec, words[w], x1, rng)
            y_hat = lattice.mod_lambda_reduce(y - x1, spec)
            ll = _torus_log_lik(y_hat, words, spec, shifts)
            errors += int(np.argmax(ll)) != w
            u = z @ spec.g_inv.T + 0.5
            cell = np.clip((u[:, 0] * bins).astype(np.int64), 0, bins - 1)
            z_counts += np.bincount(cell, minlength=bins)
            d = np.clip((u[:dlen, 0] * digest_bins).astype(np.int64), 0, digest_bins - 1)
            pairs[j] = (w, int(np.ravel_multi_index(tuple(d), (digest_bins,) * d.size)))
        return errors, z_counts, pairs

    parts = _run_parallel(work, cfg.trials, cfg.workers)
    errors = sum(p[0] for p in parts)
    z_counts = sum(p[1] for p in parts)
    pairs = np.concatenate([p[2] for p in parts])
    return _report(cfg, errors, z_counts, bins, pairs, {
        "capacity_bits": lattice.mod_lambda_capacity(spec),
        "rate_bits": math.log2(cfg.m_size) / cfg.n,
        "z_bins": bins,
        "digest_symbols": dlen,
    })


def run(cfg):
    return {"full_duplex": run_full_duplex, "half_duplex": run_half_duplex,
            "mod_lambda": run_mod_lambda}[cfg.scheme](cfg)


def exact_small_system(codebook, spec, feedback_pmf):
    """Exact ML error probability and I(W; Z^n) for a tiny system.

    The message is uniform over the codebook, feedback symbols are i.i.d.
    ``feedback_pmf`` and known to the destination, and noise is i.i.d. from the
    spec's noise law. Both quantities are computed by enumerating every noise,
    feedback and output vector.

    Returns ``(exact_p_e, exact_mi_w_z)``, the latter in bits.
    """
    fb = np.asarray(feedback_pmf if isinstance(feedback_pmf, Pmf) else Pmf(feedback_pmf))
    if fb.size != spec.x1_size:
        raise ValueError("feedback_pmf length must equal x1_size")
    words = np.asarray(codebook.words)
    m_size, n = words.shape
    if words.max() >= spec.x_size:
        raise ValueError("codeword symbols exceed the input alphabet")
    qy, qz = spec.y_size, spec.z_size
    terms = m_size * (spec.x1_size * qy * qz) ** n
    if terms > ENUM_CAP:
        raise BudgetExceededError(f"{terms} enumeration terms exceed cap {ENUM_CAP}")

    # Reliability: the destination knows x1, so y_hat = x + n1 exactly.
    n1 = spec.n1_pmf
    log_n1 = _log_table(n1)
    err = 0.0
    for noise in itertools.product(range(qy), repeat=n):
        pn = float(np.prod(n1[list(noise)]))
        if pn == 0.0:
            continue
        for w in range(m_size):
            y_hat = (words[w] + np.asarray(noise)) % qy
            if ml_decode(y_hat, words, log_n1, qy) != w:
                err += pn / m_size

    # Secrecy: per-symbol wiretap law P(z | x) summed over feedback and n2.
    n2 = spec.n2_pmf
    sym = np.zeros((spec.x_size, qz))
    for x in range(spec.x_size):
        for s, ps in enumerate(fb):
            for v, pv in enumerate(n2):
                sym[x, (x + s + v) % qz] += ps * pv
    p_z_w = np.ones((m_size, 1))
    for i in range(n):
        p_z_w = (p_z_w[:, :, None] * sym[words[:, i]][:, None, :]).reshape(m_size, -1)
    p_z = p_z_w.mean(axis=0)
    mask = p_z_w > 0
    ratio = np.where(mask, p_z_w, 1.0) / np.where(mask, p_z[None, :], 1.0)
    mi = float(np.sum(np.where(mask, p_z_w * np.log2(ratio), 0.0)) / m_size)
    return err, mi
