"""Bi-directional correlation enhancement of the eigenvector matrix.

A raw eigenvector carries an arbitrary global phase (and, under eigenvalue
multiplicity, an arbitrary basis choice), which decorrelates the downlink
eigenvector matrix from the physically-reciprocal uplink one.  Enhancement
replaces each row by the projection of a deterministic reference vector --
taken from the channel itself -- onto the dominant eigenspace.  That pins
phase and in-space weighting to channel physics without changing the spanned
eigenspace, so precoding performance is untouched while the two link
directions become comparable pictures.
"""

from __future__ import annotations

import numpy as np

from .eigen import dominant_eigenpair, dominant_eigenspace
from .errors import DegenerateProjection, ZeroChannel

# reference projections below this relative size mean the reference carries
# essentially no component in the dominant eigenspace
TOL_PROJECTION = 1e-10


def extract_reference(h_s: np.ndarray, row: int = 0) -> np.ndarray:
    """Reference vector for one subband: Hermitian transpose of a receive row.

    Row r of h_s maps transmit space to receive antenna r; its Hermitian
    transpose (the conjugated row) lives in the same transmit-side space as
    the eigenvectors of h^H h, which is what makes the projection meaningful.
    A zero preferred row falls back to the next nonzero one (cyclically), so
    only an all-zero matrix is an error.
    """
    h_s = np.asarray(h_s)
    if h_s.ndim != 2:
        raise ValueError("expected a single (n_rx, n_tx) channel matrix")
    n_rx = h_s.shape[0]
    for r in range(n_rx):
        cand = h_s[(row + r) % n_rx]
        if np.any(cand):
            return np.conj(cand)
    raise ZeroChannel("every receive antenna sees a zero channel")


def project_reference(basis: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Unit-normalized projection of `ref` onto span(basis columns).

    With an orthonormal basis V the projector is V V^H, so the projection is
    V (V^H ref).  Raises DegenerateProjection when the reference is (numerically)
    orthogonal to the space and no direction can be picked out.
    """
    coef = basis.conj().T @ ref
    proj = basis @ coef
    norm = np.linalg.norm(proj)
    if norm <= TOL_PROJECTION * np.linalg.norm(ref):
        raise DegenerateProjection(
            "reference vector is orthogonal to the dominant eigenspace")
    return proj / norm


def enhance_subband(h_s: np.ndarray, row: int = 0) -> np.ndarray:
    """Enhanced unit precoder for one subband matrix."""
    basis, _, _ = dominant_eigenspace(h_s)
    return project_reference(basis, extract_reference(h_s, row))


def enhance_matrix(h: np.ndarray, row: int = 0,
                   fallbacks: list | None = None) -> np.ndarray:
    """Enhanced eigenvector matrix, one unit row per subband.

    Each row spans (a subset of) the same dominant eigenspace as the raw
    eigenvector row, but with phase/weighting pinned by the receive-row
    reference instead of solver convention.  A degenerate projection (the
    reference happens to be orthogonal to the eigenspace) is not fatal: the
    row falls back to the canonical eigenvector, and the subband index is
    appended to `fallbacks` when a list is supplied.  Zero-channel errors are
    tagged with the offending subband index.
    """
    h = np.asarray(h)
    if h.ndim != 3:
        raise ValueError("expected an (n_sub, n_rx, n_tx) channel stack")
    n_sub = h.shape[0]
    w = np.empty((n_sub, h.shape[2]), dtype=np.complex128)
    for s in range(n_sub):
        try:
            w[s] = enhance_subband(h[s], row)
        except ZeroChannel as exc:
            raise ZeroChannel(str(exc), subband=s) from None
        except DegenerateProjection:
            w[s] = dominant_eigenpair(h[s])[0]
            if fallbacks is not None:
                fallbacks.append(s)
    return w
