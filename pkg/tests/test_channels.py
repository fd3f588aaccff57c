import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretap_feedback.channels import (
    BscWiretapSpec,
    HalfDuplexParams,
    ModAddChannelSpec,
    add_symbols,
    bsc_to_modadd,
    cancel_feedback,
    forward_law,
    halfduplex_equivalent_main,
    halfduplex_equivalent_wiretap,
    main_channel,
    sample_symbols,
    wiretap_channel,
)
from wiretap_feedback.info_theory import JointPmf, Pmf
from wiretap_feedback.rng import substream

unit = st.floats(0.0, 1.0)
half = st.floats(0.0, 0.5)


# -- BSC specializations -----------------------------------------------------

def test_noiseless_point_mass():
    spec = bsc_to_modadd(BscWiretapSpec(0.0, 0.0, "noiseless"))
    np.testing.assert_array_equal(spec.n12, [[1.0, 0.0], [0.0, 0.0]])
    assert (spec.x_size, spec.y_size, spec.z_size) == (2, 2, 2)


def test_degraded_main_n_prime():
    spec = BscWiretapSpec(0.1, 0.05, "degraded_main")
    assert spec.n_prime == pytest.approx(1 / 18, abs=1e-15)
    # enumerate N1 = N2 + N' by hand
    a, d = 1 / 18, 0.05
    p_n1 = sum(pd * pa for n2, pd in ((0, 1 - d), (1, d)) for nn, pa in ((0, 1 - a), (1, a))
               if (n2 + nn) % 2 == 1)
    assert p_n1 == pytest.approx(0.1, abs=1e-15)
    n12 = bsc_to_modadd(spec).n12
    assert n12[1, :].sum() == pytest.approx(0.1, abs=1e-15)
    assert n12[:, 1].sum() == pytest.approx(0.05, abs=1e-15)


def test_independent_marginals_by_summation():
    n12 = bsc_to_modadd(BscWiretapSpec(0.1, 0.1, "independent")).n12
    np.testing.assert_allclose(n12, np.outer([0.9, 0.1], [0.9, 0.1]), atol=1e-15)
    assert n12.sum(axis=1)[1] == pytest.approx(0.1)
    assert n12.sum(axis=0)[1] == pytest.approx(0.1)


@pytest.mark.parametrize("args", [
    (0.05, 0.1, "degraded_main"),
    (0.1, 0.1, "degraded_main"),
    (0.3, 0.1, "degraded_wiretap"),
    (0.1, 0.1, "noiseless"),
    (0.6, 0.1, "independent"),
    (0.1, 0.1, "bogus"),
])
def test_bsc_invalid(args):
    with pytest.raises(ValueError):
        BscWiretapSpec(*args)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.49), st.floats(0.0, 0.5))
def test_degraded_composition(delta, eps):
    if not delta < eps:
        return
    a = (eps - delta) / (1 - 2 * delta)
    assert 0.0 <= a <= 0.5
    composed = delta * (1 - a) + (1 - delta) * a
    assert abs(composed - eps) <= 1e-12
    n12 = bsc_to_modadd(BscWiretapSpec(eps, delta, "degraded_main")).n12
    assert abs(n12[1, :].sum() - eps) <= 1e-12


def test_custom_correlation():
    law = np.array([[0.85, 0.05], [0.0, 0.1]])
    spec = bsc_to_modadd(BscWiretapSpec(0.1, 0.15, "custom", custom=law))
    np.testing.assert_allclose(spec.n12, law)
    assert spec.y0_size == 2
    np.testing.assert_allclose(spec.noise_law.tensor.sum(axis=(1, 2)), [0.5, 0.5])


def test_spec_dims_checked():
    with pytest.raises(ValueError):
        ModAddChannelSpec(2, 2, 2, 2, 2, JointPmf(np.full((2, 2, 3), 1 / 12)))
    with pytest.raises(ValueError):
        ModAddChannelSpec.from_n12(np.full((2, 3), 1 / 6), x_size=3)


# -- forward law -----------------------------------------------------------------

def test_forward_law_noiseless_identity():
    spec = bsc_to_modadd(BscWiretapSpec(0.0, 0.0, "noiseless"))
    law = forward_law(spec, Pmf.point(2))
    for x in range(2):
        assert law[x, x, x] == 1.0


def test_forward_law_uniform_feedback_hides_input():
    spec = bsc_to_modadd(BscWiretapSpec(0.1, 0.3, "degraded_wiretap"))
    pz = forward_law(spec, Pmf.uniform(2)).sum(axis=1)
    np.testing.assert_allclose(pz, 0.5, atol=1e-15)


def test_forward_law_by_enumeration():
    eps, delta = 0.1, 0.2
    spec = bsc_to_modadd(BscWiretapSpec(eps, delta, "independent"))
    law = forward_law(spec, Pmf.point(2))
    # brute force over (x1, n1, n2) with x1 = 0
    for x in range(2):
        ref = np.zeros((2, 2))
        for x1, n1, n2 in itertools.product(range(2), repeat=3):
            p = (x1 == 0) * (eps if n1 else 1 - eps) * (delta if n2 else 1 - delta)
            ref[(x + x1 + n1) % 2, (x + x1 + n2) % 2] += p
        np.testing.assert_allclose(law[x], ref, atol=1e-15)
        assert law[x, 1 - x, :].sum() == pytest.approx(0.1)
        assert law[x, :, 1 - x].sum() == pytest.approx(0.2)


def test_forward_law_dimension_mismatch():
    spec = bsc_to_modadd(BscWiretapSpec(0.1, 0.2))
    with pytest.raises(ValueError):
        forward_law(spec, Pmf.uniform(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.data())
def test_forward_law_slices_normalized(qy, qz, data):
    raw = np.array(data.draw(st.lists(st.floats(0.01, 1.0), min_size=qy * qz, max_size=qy * qz)))
    n12 = (raw / raw.sum()).reshape(qy, qz)
    spec = ModAddChannelSpec.from_n12(n12)
    fb = np.array(data.draw(st.lists(st.floats(0.0, 1.0), min_size=qz, max_size=qz))) + 1e-3
    law = forward_law(spec, Pmf(fb / fb.sum()))
    np.testing.assert_allclose(law.sum(axis=(1, 2)), 1.0, atol=1e-12)


def test_main_and_wiretap_channels():
    spec = bsc_to_modadd(BscWiretapSpec(0.1, 0.3))
    np.testing.assert_allclose(np.asarray(main_channel(spec)), [[0.9, 0.1], [0.1, 0.9]])
    np.testing.assert_allclose(np.asarray(wiretap_channel(spec)), [[0.7, 0.3], [0.3, 0.7]])


# -- crypto lemma ---------------------------------------------------------------

@pytest.mark.parametrize("q", range(2, 9))
def test_crypto_lemma_exact(q):
    rng = np.random.default_rng(q)
    px = rng.dirichlet(np.ones(q))
    joint = np.zeros((q, q))
    for x in range(q):
        for k in range(q):
            joint[x, (x + k) % q] += px[x] / q
    for x in range(q):
        cond = np.zeros(q)
        for k in range(q):
            cond[(x + k) % q] += 1 / q
        assert 0.5 * np.abs(cond - 1 / q).sum() <= 1e-15
    assert np.abs(joint - np.outer(joint.sum(1), joint.sum(0))).max() <= 1e-16


# -- cancellation ------------------------------------------------------------------

def test_cancel_trivial():
    assert cancel_feedback(0, 0, 2) == 0
    assert cancel_feedback(1, 1, 2) == 0


@pytest.mark.parametrize("q", [2, 3, 5])
def test_cancel_composition_exhaustive(q):
    for x, x1, n in itertools.product(range(q), repeat=3):
        assert cancel_feedback(add_symbols(x, x1, n, q), x1, q) == add_symbols(x, 0, n, q)


# -- half-duplex equivalents ------------------------------------------------------

def test_halfduplex_main_examples():
    np.testing.assert_array_equal(np.asarray(halfduplex_equivalent_main(0.0, 0.0)),
                                  [[1, 0, 0], [0, 0, 1]])
    w = np.asarray(halfduplex_equivalent_main(0.37, 1.0))
    np.testing.assert_array_equal(w[:, 1], [1, 1])
    np.testing.assert_allclose(np.asarray(halfduplex_equivalent_main(0.1, 0.3)),
                               [[0.63, 0.3, 0.07], [0.07, 0.3, 0.63]], atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(unit, unit)
def test_halfduplex_main_rows_sum_to_one(eps, t):
    w = np.asarray(halfduplex_equivalent_main(eps, t))
    for row in w:
        assert abs(math.fsum(row) - 1.0) <= 2.0**-52


@pytest.mark.parametrize("bad", [(-0.1, 0.2), (0.2, 1.1)])
def test_halfduplex_domain(bad):
    with pytest.raises(ValueError):
        halfduplex_equivalent_main(*bad)
    with pytest.raises(ValueError):
        halfduplex_equivalent_wiretap(*bad)


def test_delta_hat_examples():
    assert halfduplex_equivalent_wiretap(0.0, 0.5) == 0.5
    assert halfduplex_equivalent_wiretap(0.23, 0.0) == 0.23
    assert halfduplex_equivalent_wiretap(0.2, 0.25) == pytest.approx(0.35, abs=1e-15)


def test_delta_hat_monte_carlo():
    rng = np.random.default_rng(42)
    n = 10**6
    flips = (rng.random(n) < 0.2) ^ (rng.random(n) < 0.25)
    assert abs(flips.mean() - 0.35) < 3 * math.sqrt(0.35 * 0.65 / n)


@settings(max_examples=300, deadline=None)
@given(unit, unit)
def test_delta_hat_complement_identity(delta, t):
    total = halfduplex_equivalent_wiretap(delta, t) + halfduplex_equivalent_wiretap(1 - delta, t)
    assert abs(total - 1.0) <= 1e-15


def test_halfduplex_params():
    p = HalfDuplexParams(mu=0.5, t=0.25, delta=0.2)
    assert p.delta_hat == pytest.approx(0.35)
    with pytest.raises(ValueError):
        HalfDuplexParams(mu=1.5, t=0.2, delta=0.1)


# -- sampling ----------------------------------------------------------------------

def test_sample_noiseless():
    spec = bsc_to_modadd(BscWiretapSpec(0.0, 0.0, "noiseless"))
    x = np.array([0, 1, 1, 0, 1])
    y0, y, z = sample_symbols(spec, x, np.zeros_like(x), substream(1, 3))
    np.testing.assert_array_equal(y, x)
    np.testing.assert_array_equal(z, x)
    # N0 is uniform by construction; y0 = x + n0
    assert y0.shape == x.shape


def test_sample_flip_rate():
    spec = bsc_to_modadd(BscWiretapSpec(0.1, 0.2))
    n = 10**6
    x = np.zeros(n, dtype=np.int64)
    _, y, _ = sample_symbols(spec, x, x, substream(9, 3))
    assert abs(y.mean() - 0.1) < 0.001


def test_sample_degraded_wiretap_correlation():
    eps, delta = 0.1, 0.3
    spec = bsc_to_modadd(BscWiretapSpec(eps, delta, "degraded_wiretap"))
    x = np.zeros(10**6, dtype=np.int64)
    _, y, z = sample_symbols(spec, x, x, substream(10, 3))
    assert abs(np.mean(y != z) - (delta - eps) / (1 - 2 * eps)) < 0.002


def test_sample_deterministic_and_range_checked():
    spec = bsc_to_modadd(BscWiretapSpec(0.1, 0.2))
    x = np.array([0, 1, 0, 1])
    a = sample_symbols(spec, x, x, substream(5, 3, 7))
    b = sample_symbols(spec, x, x, substream(5, 3, 7))
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)
    with pytest.raises(ValueError):
        sample_symbols(spec, np.array([2]), np.array([0]), substream(5, 3))
    with pytest.raises(ValueError):
        sample_symbols(spec, np.array([0, 1]), np.array([0]), substream(5, 3))
