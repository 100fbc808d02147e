"""Input format alignment: angular-delay images and benchmark registration.

The enhanced eigenvector matrix is carried into the angular-delay domain by a
2-D orthonormal DFT, where multipath structure is sparse.  Because uplink and
downlink images of one user concentrate around the *same* path geometry, each
side can be cyclically shifted so its energy registers against a canonical
benchmark image (a boresight line-of-sight construction whose peak sits at the
origin).  The receiver undoes the shift using its own uplink estimate, so no
shift indices need to be fed back.
"""

from __future__ import annotations

import numpy as np

from .config import SystemConfig
from .errors import BenchmarkAmbiguous, ConstantInput, DimensionMismatch

# relative gap under which two profile peaks / two shift scores count as tied
TOL_TIE = 1e-9


def dft2(w: np.ndarray) -> np.ndarray:
    """Frequency-antenna matrix -> angular-delay matrix (orthonormal).

    Rows index delay bins, columns index angle bins.  A path with delay tau
    and departure angle theta lands near row (-bandwidth*tau) mod n_sub and
    column (-n_tx*sin(theta)/2) mod n_tx; the zero-delay boresight path lands
    at the origin.
    """
    return np.fft.fft(np.fft.ifft(w, axis=0, norm="ortho"), axis=1, norm="ortho")


def inverse_dft2(x: np.ndarray) -> np.ndarray:
    """Exact inverse of dft2 (round-trip is identity to machine precision)."""
    return np.fft.fft(np.fft.ifft(x, axis=1, norm="ortho"), axis=0, norm="ortho")


def circular_shift(w: np.ndarray, m: int, n: int) -> np.ndarray:
    """out[i, j] = w[(i + m) mod rows, (j + n) mod cols].

    Shifts compose additively: shifting by (m1, n1) then (m2, n2) equals one
    shift by (m1 + m2, n1 + n2).
    """
    w = np.asarray(w)
    if w.ndim != 2:
        raise DimensionMismatch("circular_shift expects a 2-D array")
    return np.roll(w, shift=(-m, -n), axis=(0, 1))


def row_profile(w: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(w)).sum(axis=1)


def col_profile(w: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(w)).sum(axis=0)


def row_col_sums(w: np.ndarray) -> tuple:
    """Row and column magnitude-sum profiles of a matrix, as a pair.

    Accepts a complex matrix or a precomputed magnitude image; either way the
    profiles are sums of entry magnitudes.
    """
    return row_profile(w), col_profile(w)


def make_benchmark(cfg: SystemConfig, link: str) -> np.ndarray:
    """Benchmark magnitude image for one link.

    Built by pushing a boresight line-of-sight channel through the same
    eigenvector -> enhancement -> dft2 pipeline as real data; its energy sits
    in a single cell at the origin, which is what registration aligns to.
    """
    from .bce import enhance_matrix
    from .channel import los_pathset, render_channel

    h = render_channel(los_pathset(), cfg, link)
    b = np.abs(dft2(enhance_matrix(h)))
    for prof in (row_profile(b), col_profile(b)):
        top = np.sort(prof)[::-1]
        if top.size > 1 and top[1] >= top[0] * (1.0 - TOL_TIE):
            raise BenchmarkAmbiguous("benchmark profile peak is not unique")
    return b


def make_benchmarks(cfg: SystemConfig) -> tuple:
    """Benchmark pair (DL, UL) for registering both link directions."""
    return make_benchmark(cfg, "DL"), make_benchmark(cfg, "UL")


def _best_shift(profile: np.ndarray, bench_profile: np.ndarray) -> int:
    """Cyclic shift of `profile` maximizing its dot product with the benchmark.

    Exhaustive over all shifts; ties resolve to the smallest shift index.
    """
    if profile.shape != bench_profile.shape:
        raise DimensionMismatch("profile lengths differ")
    n = profile.size
    scores = np.empty(n)
    for m in range(n):
        scores[m] = float(np.dot(np.roll(profile, -m), bench_profile))
    if scores.max() - scores.min() <= TOL_TIE * max(scores.max(), 1e-300):
        raise ConstantInput("profile carries no registration information")
    best = scores.max()
    return int(np.flatnonzero(scores >= best * (1.0 - TOL_TIE))[0])


def optimal_shift(mag: np.ndarray, bench: np.ndarray) -> tuple:
    """(m, n) registering a magnitude image against the benchmark image.

    Rows and columns separate: m maximizes the shifted row-sum profile's dot
    product with the benchmark's row profile, n likewise over column profiles.
    """
    mag = np.asarray(mag)
    bench = np.asarray(bench)
    if mag.shape != bench.shape:
        raise DimensionMismatch(
            f"image shape {mag.shape} does not match benchmark {bench.shape}")
    m = _best_shift(row_profile(mag), row_profile(bench))
    n = _best_shift(col_profile(mag), col_profile(bench))
    return m, n


def align(x: np.ndarray, shift: tuple) -> np.ndarray:
    """Apply a registration shift to a (complex) angular-delay matrix."""
    return circular_shift(x, shift[0], shift[1])


def restore(x: np.ndarray, shift: tuple) -> np.ndarray:
    """Undo a registration shift and return to the frequency-antenna domain."""
    return inverse_dft2(circular_shift(x, -shift[0], -shift[1]))
