import numpy as np
import pytest

from csilab.eigen import (TOL_MULTIPLICITY, canonical_phase, dominant_eigenpair,
                          dominant_eigenspace, eigenvector_matrix)
from csilab.errors import ZeroChannel
from csilab.metrics import sgcs


def random_channel(rng, n_rx=2, n_tx=8):
    return rng.normal(size=(n_rx, n_tx)) + 1j * rng.normal(size=(n_rx, n_tx))


def oracle_top(h_s):
    """Full-decomposition reference: top eigenpair of H^H H."""
    gram = h_s.conj().T @ h_s
    lam, vec = np.linalg.eigh(gram)
    return lam[-1].real, vec[:, -1]


def test_matches_full_decomposition():
    rng = np.random.default_rng(17)
    for _ in range(200):
        h = random_channel(rng)
        lam_o, v_o = oracle_top(h)
        w, lam, _ = dominant_eigenpair(h)
        assert abs(lam - lam_o) <= 1e-10 * lam_o
        cos2 = abs(np.vdot(v_o, w)) ** 2 / (np.vdot(w, w).real)
        assert cos2 >= 1.0 - 1e-10


def test_eigenpair_is_unit_and_canonical():
    rng = np.random.default_rng(3)
    h = random_channel(rng)
    w, lam, _ = dominant_eigenpair(h)
    assert np.isclose(np.linalg.norm(w), 1.0)
    k = np.argmax(np.abs(w))
    assert w[k].imag == pytest.approx(0.0, abs=1e-12)
    assert w[k].real >= 0.0
    assert lam > 0


def test_canonical_phase_invariance():
    rng = np.random.default_rng(4)
    v = rng.normal(size=6) + 1j * rng.normal(size=6)
    rotated = v * np.exp(1j * 1.234)
    assert np.allclose(canonical_phase(v), canonical_phase(rotated))


def test_zero_channel_raises():
    with pytest.raises(ZeroChannel):
        dominant_eigenpair(np.zeros((2, 4), dtype=complex))


def test_degenerate_eigenspace_multiplicity():
    # two orthonormal rows of equal power: the Gram matrix has a doubly
    # degenerate top eigenvalue, and the returned basis must span it
    h = np.zeros((2, 4), dtype=complex)
    h[0, 0] = 1.0
    h[1, 1] = 1.0
    basis, lam, mult = dominant_eigenspace(h)
    assert mult == 2
    assert basis.shape == (4, 2)
    assert np.allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)
    gram = h.conj().T @ h
    assert np.allclose(gram @ basis, lam * basis, atol=1e-10)


def test_multiplicity_tolerance_boundary():
    # eigenvalues straddling the relative tolerance collapse or split
    h = np.zeros((2, 3), dtype=complex)
    h[0, 0] = 1.0
    h[1, 1] = 1.0 - 10 * TOL_MULTIPLICITY
    _, _, mult_split = dominant_eigenspace(h)
    assert mult_split == 1
    h[1, 1] = 1.0 - 0.01 * TOL_MULTIPLICITY
    _, _, mult_merge = dominant_eigenspace(h)
    assert mult_merge == 2


def test_eigenvector_matrix_rows():
    rng = np.random.default_rng(6)
    n_sub, n_rx, n_tx = 5, 2, 8
    h = rng.normal(size=(n_sub, n_rx, n_tx)) + 1j * rng.normal(size=(n_sub, n_rx, n_tx))
    w = eigenvector_matrix(h)
    assert w.shape == (n_sub, n_tx)
    for s in range(n_sub):
        ws, _, _ = dominant_eigenpair(h[s])
        assert sgcs(w[[s]], ws[None]) >= 1.0 - 1e-12


def test_eigenvector_matrix_tags_subband():
    h = np.ones((3, 2, 4), dtype=complex)
    h[1] = 0.0
    with pytest.raises(ZeroChannel) as exc:
        eigenvector_matrix(h)
    assert exc.value.subband == 1
