import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitkd.kd_numerics import (
    DivergenceUndefined,
    KdLossConfig,
    finite_difference_grad,
    kd_loss,
    kd_loss_grad,
    kl_div,
    relative_error,
    selftest,
    softmax_t,
)

logits = st.lists(st.floats(-20, 20), min_size=2, max_size=10)


def test_softmax_example():
    got = softmax_t([2.0, 1.0, 0.1], T=2.0)
    np.testing.assert_allclose(got, [0.5016877570904369, 0.30428900627781413, 0.1940232366317488], rtol=1e-12)


def test_softmax_large_logits_stable():
    p = softmax_t([1000.0, 999.0, -1000.0])
    assert np.all(np.isfinite(p)) and abs(p.sum() - 1) < 1e-12


def test_kl_example():
    assert kl_div([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.14384103622589042, rel=1e-12)


def test_kl_undefined():
    with pytest.raises(DivergenceUndefined):
        kl_div([0.5, 0.5], [1.0, 0.0])
    # zero in p is fine
    assert kl_div([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2))


def test_kl_rejects_non_distribution():
    with pytest.raises(ValueError):
        kl_div([0.5, 0.6], [0.5, 0.5])


def test_kd_loss_example():
    cfg = KdLossConfig(temperature=2.0, kd_weight=0.5)
    t, s = [2.0, 1.0, 0.0], [0.0, 0.0, 0.0]
    kl = kl_div(softmax_t(t, 2.0), softmax_t(s, 2.0))
    assert kl == pytest.approx(0.07842095194127836, rel=1e-12)
    assert kd_loss(t, s, 0, cfg) == pytest.approx(0.7061480482166116, rel=1e-12)


def test_kd_weight_extremes():
    t, s = [2.0, 1.0, 0.0], [0.3, -0.2, 0.5]
    ce_only = kd_loss(t, s, 1, KdLossConfig(kd_weight=0.0))
    assert ce_only == pytest.approx(-np.log(softmax_t(s)[1]), rel=1e-12)
    assert kd_loss(t, t, 1, KdLossConfig(kd_weight=1.0)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("kwargs", [dict(temperature=0.0), dict(kd_weight=1.5), dict(kd_weight=-0.1)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        KdLossConfig(**kwargs)


def test_bad_label():
    with pytest.raises(ValueError):
        kd_loss([1, 2], [1, 2], 2)


@settings(max_examples=200)
@given(a=logits, b=logits, T=st.floats(0.5, 5))
def test_kl_nonnegative(a, b, T):
    n = min(len(a), len(b))
    p, q = softmax_t(a[:n], T), softmax_t(b[:n], T)
    assert kl_div(p, q) >= 0
    assert abs(kl_div(p, p)) <= 1e-12


@settings(max_examples=100)
@given(a=st.lists(st.floats(-5, 5), min_size=3, max_size=3), b=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       label=st.integers(0, 2), T=st.floats(1, 4), lam=st.floats(0, 1))
def test_gradient_matches_finite_difference(a, b, label, T, lam):
    cfg = KdLossConfig(T, lam)
    analytic = kd_loss_grad(a, b, label, cfg)
    numeric = finite_difference_grad(a, b, label, cfg)
    assert relative_error(analytic, numeric) <= 1e-5 or np.max(np.abs(analytic - numeric)) <= 1e-8


def test_selftest_passes():
    results = selftest(seed=3)
    assert results and all(r.passed for r in results)
