import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csilab.errors import (ConstantInput, DimensionMismatch, EmptyInput,
                           ZeroRow)
from csilab.metrics import (cdf, decile_dominates, nmse_db, pearson,
                            pearson_mag, sgcs, sgcs_batch)


def random_w(rng, n_sub=4, n_tx=8):
    return rng.normal(size=(n_sub, n_tx)) + 1j * rng.normal(size=(n_sub, n_tx))


def sgcs_reference(w, w_hat):
    """Literal per-subband loop over the defining formula."""
    vals = []
    for s in range(w.shape[0]):
        num = abs(np.vdot(w[s], w_hat[s])) ** 2
        den = (np.linalg.norm(w[s]) ** 2) * (np.linalg.norm(w_hat[s]) ** 2)
        vals.append(num / den)
    return float(np.mean(vals))


def test_sgcs_matches_reference_loop():
    rng = np.random.default_rng(0)
    for _ in range(50):
        w, w_hat = random_w(rng), random_w(rng)
        assert sgcs(w, w_hat) == pytest.approx(sgcs_reference(w, w_hat), abs=1e-13)


def test_sgcs_bounds_and_perfect():
    rng = np.random.default_rng(1)
    w = random_w(rng)
    assert sgcs(w, w) == pytest.approx(1.0, abs=1e-13)
    for _ in range(20):
        v = sgcs(w, random_w(rng))
        assert 0.0 <= v <= 1.0


def test_sgcs_gauge_invariance():
    rng = np.random.default_rng(2)
    w, w_hat = random_w(rng), random_w(rng)
    base = sgcs(w, w_hat)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(w.shape[0], 1)))
    scales = rng.uniform(0.1, 3.0, size=(w.shape[0], 1))
    assert sgcs(w, w_hat * phases * scales) == pytest.approx(base, abs=1e-12)
    assert sgcs(w * phases, w_hat) == pytest.approx(base, abs=1e-12)


def test_sgcs_orthogonal_rows():
    w = np.zeros((1, 4), dtype=complex)
    w_hat = np.zeros((1, 4), dtype=complex)
    w[0, 0] = 1.0
    w_hat[0, 1] = 1.0
    assert sgcs(w, w_hat) == pytest.approx(0.0, abs=1e-15)


def test_sgcs_validation():
    rng = np.random.default_rng(3)
    w = random_w(rng)
    with pytest.raises(DimensionMismatch):
        sgcs(w, w[:2])
    with pytest.raises(DimensionMismatch):
        sgcs(w[0], w[0])
    bad = w.copy()
    bad[1] = 0.0
    with pytest.raises(ZeroRow):
        sgcs(w, bad)


def test_sgcs_batch_consistency():
    rng = np.random.default_rng(4)
    w = np.stack([random_w(rng) for _ in range(6)])
    w_hat = np.stack([random_w(rng) for _ in range(6)])
    per = sgcs_batch(w, w_hat)
    assert per.shape == (6,)
    for i in range(6):
        assert per[i] == pytest.approx(sgcs(w[i], w_hat[i]), abs=1e-13)
    with pytest.raises(DimensionMismatch):
        sgcs_batch(w[0], w_hat[0])


@settings(deadline=None, max_examples=30)
@given(seed=st.integers(0, 2**16))
def test_sgcs_symmetry(seed):
    rng = np.random.default_rng(seed)
    w, w_hat = random_w(rng), random_w(rng)
    assert sgcs(w, w_hat) == pytest.approx(sgcs(w_hat, w), abs=1e-12)


def test_pearson_basics():
    x = np.arange(10.0)
    assert pearson(x, 2 * x + 3) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=500), rng.normal(size=500)
    assert abs(pearson(a, b)) < 0.2
    assert pearson(a.reshape(20, 25), a.reshape(20, 25)) == pytest.approx(1.0)


def test_pearson_validation():
    with pytest.raises(EmptyInput):
        pearson(np.array([]), np.array([]))
    with pytest.raises(DimensionMismatch):
        pearson(np.ones(3), np.ones(4))
    with pytest.raises(ConstantInput):
        pearson(np.ones(5), np.arange(5.0))


def test_nmse_db():
    rng = np.random.default_rng(6)
    w = random_w(rng)
    assert nmse_db(w, w) == -np.inf
    assert nmse_db(w, np.zeros_like(w)) == pytest.approx(0.0, abs=1e-12)
    # scaling the error by 10 in amplitude adds 20 dB
    err = random_w(rng) * 0.01
    d1 = nmse_db(w, w + err)
    d2 = nmse_db(w, w + 10 * err)
    assert d2 - d1 == pytest.approx(20.0, abs=1e-9)
    with pytest.raises(ZeroRow):
        nmse_db(np.zeros_like(w), w)
    with pytest.raises(DimensionMismatch):
        nmse_db(w, w[:2])


def test_pearson_mag_matches_manual():
    rng = np.random.default_rng(7)
    a = random_w(rng)
    b = random_w(rng)
    expect = pearson(np.abs(a), np.abs(b))
    assert pearson_mag(a, b) == pytest.approx(expect, abs=1e-15)
    assert pearson_mag(a, a) == pytest.approx(1.0, abs=1e-12)
    # affine increasing transform of the magnitudes -> still 1
    assert pearson(np.abs(a), 3.0 * np.abs(a) + 0.5) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        pearson_mag(a, a[:2])


def test_pearson_extended_precision_oracle():
    rng = np.random.default_rng(8)
    x = rng.normal(size=200)
    y = 0.3 * x + rng.normal(size=200)
    import decimal
    decimal.getcontext().prec = 50
    dx = [decimal.Decimal(float(v)) for v in x]
    dy = [decimal.Decimal(float(v)) for v in y]
    n = decimal.Decimal(200)
    mx = sum(dx) / n
    my = sum(dy) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(dx, dy))
    vx = sum((a - mx) ** 2 for a in dx)
    vy = sum((b - my) ** 2 for b in dy)
    expect = float(cov / (vx.sqrt() * vy.sqrt()))
    assert pearson(x, y) == pytest.approx(expect, abs=1e-12)


def test_cdf_summary():
    samples = [0.3, 0.1, 0.2, 0.9, 0.5]
    s = cdf(samples)
    assert np.array_equal(s.values, np.sort(samples))
    assert s.grid[0] == pytest.approx(0.2)
    assert s.grid[-1] == 1.0
    assert np.all(np.diff(s.grid) > 0)
    assert s.deciles.shape == (9,)
    assert np.all(np.diff(s.deciles) >= 0)
    assert np.all((s.deciles >= 0.1) & (s.deciles <= 0.9))
    with pytest.raises(EmptyInput):
        cdf([])


def test_decile_dominance():
    rng = np.random.default_rng(9)
    base = rng.normal(size=400)
    assert decile_dominates(base + 0.3, base)
    assert decile_dominates(base + 0.3, base, margin=0.2)
    assert not decile_dominates(base + 0.3, base, margin=0.4)
    assert not decile_dominates(base, base + 0.3)
    # identical sets dominate each other at zero margin
    assert decile_dominates(base, base)
