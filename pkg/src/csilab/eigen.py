"""Dominant-eigenvector extraction for per-subband precoding.

The precoder for subband s is the unit eigenvector of h_s^H h_s at the largest
eigenvalue.  Everything here goes through the small receive-side Gram matrix
h_s h_s^H (n_rx x n_rx): its nonzero spectrum matches h_s^H h_s, and mapping an
eigenvector v back through h_s^H lands exactly in the eigenspace of h_s^H h_s,
so the eigen-equation residual stays at machine precision even for n_tx >> n_rx.
"""

from __future__ import annotations

import numpy as np

from .errors import ZeroChannel

# eigenvalues within this relative distance of the top one count as coincident
TOL_MULTIPLICITY = 1e-8


def _gram_top(h_s: np.ndarray):
    """Top eigenvalue of h h^H, its multiplicity, and the receive-side basis."""
    h_s = np.asarray(h_s)
    if h_s.ndim != 2:
        raise ValueError("expected a single (n_rx, n_tx) channel matrix")
    if not np.any(h_s):
        raise ZeroChannel("all-zero channel matrix")
    gram = h_s @ h_s.conj().T
    evals, evecs = np.linalg.eigh(gram)
    lam = float(evals[-1])
    if lam <= 0.0:
        raise ZeroChannel("channel has no positive-energy direction")
    mult = int(np.count_nonzero(evals >= lam * (1.0 - TOL_MULTIPLICITY)))
    return lam, mult, evecs[:, -mult:]


def dominant_eigenspace(h_s: np.ndarray):
    """Orthonormal basis (n_tx, mult) of the top eigenspace of h^H h.

    Returns (basis, eigenvalue, multiplicity).  Columns v of the receive-side
    basis map to h^H v with <h^H v_i, h^H v_j> = lam * delta_ij, so dividing by
    the norms keeps the mapped basis orthonormal.
    """
    lam, mult, v_rx = _gram_top(h_s)
    basis = np.asarray(h_s).conj().T @ v_rx
    basis /= np.linalg.norm(basis, axis=0, keepdims=True)
    return basis, lam, mult


def canonical_phase(w: np.ndarray) -> np.ndarray:
    """Rotate a vector so its largest-magnitude entry is real nonnegative."""
    i = int(np.argmax(np.abs(w)))
    pivot = w[i]
    if pivot == 0:
        return w.copy()
    return w * (np.conj(pivot) / np.abs(pivot))


def dominant_eigenpair(h_s: np.ndarray):
    """Unit dominant eigenvector of h^H h with a deterministic global phase.

    Returns (w, eigenvalue, multiplicity); w has its largest-magnitude entry
    rotated to the nonnegative real axis so repeated runs agree bit-for-bit.
    When multiplicity > 1 the returned w is one unit vector from the eigenspace
    (the choice is deterministic but basis-dependent).
    """
    basis, lam, mult = dominant_eigenspace(h_s)
    return canonical_phase(basis[:, 0]), lam, mult


def eigenvector_matrix(h: np.ndarray) -> np.ndarray:
    """Stack per-subband dominant eigenvectors into W with shape (n_sub, n_tx).

    Row s is the (phase-canonicalized) dominant eigenvector for subband s.
    Raises ZeroChannel, tagged with the subband index, if any h_s is zero.
    """
    h = np.asarray(h)
    if h.ndim != 3:
        raise ValueError("expected an (n_sub, n_rx, n_tx) channel stack")
    n_sub = h.shape[0]
    w = np.empty((n_sub, h.shape[2]), dtype=np.complex128)
    for s in range(n_sub):
        try:
            w[s], _, _ = dominant_eigenpair(h[s])
        except ZeroChannel as exc:
            raise ZeroChannel(str(exc), subband=s) from None
    return w
