"""Evaluation metrics: squared generalized cosine similarity and friends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantInput, DimensionMismatch, EmptyInput, ZeroRow


def sgcs(w: np.ndarray, w_hat: np.ndarray) -> float:
    """Mean over subbands of |<w_s, w_hat_s>|^2 / (|w_s|^2 |w_hat_s|^2).

    Insensitive to any per-subband phase and scale of either argument; 1 means
    every reconstructed row points along the true precoder direction.
    """
    w = np.asarray(w)
    w_hat = np.asarray(w_hat)
    if w.shape != w_hat.shape or w.ndim != 2:
        raise DimensionMismatch(
            f"need matching 2-D matrices, got {w.shape} vs {w_hat.shape}")
    num = np.abs(np.einsum("st,st->s", np.conj(w), w_hat)) ** 2
    den = np.einsum("st,st->s", np.conj(w), w).real \
        * np.einsum("st,st->s", np.conj(w_hat), w_hat).real
    if np.any(den <= 0.0):
        raise ZeroRow("zero row in SGCS operand")
    return float(np.mean(num / den))


def sgcs_batch(w: np.ndarray, w_hat: np.ndarray) -> np.ndarray:
    """Per-sample SGCS over a (batch, n_sub, n_tx) stack."""
    w = np.asarray(w)
    w_hat = np.asarray(w_hat)
    if w.shape != w_hat.shape or w.ndim != 3:
        raise DimensionMismatch(
            f"need matching 3-D stacks, got {w.shape} vs {w_hat.shape}")
    num = np.abs(np.einsum("bst,bst->bs", np.conj(w), w_hat)) ** 2
    den = np.einsum("bst,bst->bs", np.conj(w), w).real \
        * np.einsum("bst,bst->bs", np.conj(w_hat), w_hat).real
    if np.any(den <= 0.0):
        raise ZeroRow("zero row in SGCS operand")
    return np.mean(num / den, axis=1)


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation of two equally-shaped real arrays, flattened."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptyInput("cannot correlate empty arrays")
    if x.size != y.size:
        raise DimensionMismatch(f"size mismatch: {x.size} vs {y.size}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.linalg.norm(xc)
    sy = np.linalg.norm(yc)
    if sx == 0.0 or sy == 0.0:
        raise ConstantInput("correlation undefined for a constant array")
    return float(np.dot(xc, yc) / (sx * sy))


def pearson_mag(w_a: np.ndarray, w_b: np.ndarray) -> float:
    """Pearson correlation between the entrywise magnitudes of two matrices."""
    w_a = np.asarray(w_a)
    w_b = np.asarray(w_b)
    if w_a.shape != w_b.shape:
        raise DimensionMismatch(f"shape mismatch: {w_a.shape} vs {w_b.shape}")
    return pearson(np.abs(w_a), np.abs(w_b))


@dataclass(frozen=True)
class CdfSummary:
    """Empirical CDF of a sample set, with its nine deciles."""

    values: np.ndarray   # sorted samples
    grid: np.ndarray     # CDF level at each sorted sample, in (0, 1]
    deciles: np.ndarray  # 10th..90th percentiles


def cdf(samples) -> CdfSummary:
    """Empirical CDF summary; `deciles` supports stochastic-dominance checks."""
    values = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if values.size == 0:
        raise EmptyInput("cannot summarize an empty sample set")
    grid = np.arange(1, values.size + 1) / values.size
    deciles = np.quantile(values, np.arange(1, 10) / 10.0)
    return CdfSummary(values=values, grid=grid, deciles=deciles)


def decile_dominates(a, b, margin: float = 0.0) -> bool:
    """True when every decile of `a` is >= the matching decile of `b` + margin.

    The coarse nine-point comparison is deliberate: it is insensitive to tail
    noise in a way a full-CDF comparison is not, and a curve that wins at every
    decile is visibly "shifted right".
    """
    return bool(np.all(cdf(a).deciles >= cdf(b).deciles + margin))


def nmse_db(w: np.ndarray, w_hat: np.ndarray) -> float:
    """Normalized mean-square error in dB (diagnostic; SGCS is the headline)."""
    w = np.asarray(w)
    w_hat = np.asarray(w_hat)
    if w.shape != w_hat.shape:
        raise DimensionMismatch(f"shape mismatch: {w.shape} vs {w_hat.shape}")
    err = np.sum(np.abs(w - w_hat) ** 2)
    ref = np.sum(np.abs(w) ** 2)
    if ref <= 0.0:
        raise ZeroRow("reference has zero energy")
    return float(10.0 * np.log10(err / ref)) if err > 0 else -np.inf
