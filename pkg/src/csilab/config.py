"""System configuration and shared tensor validation.

Eigenvector matrices are stored throughout as (n_sub, n_tx) complex arrays:
subband rows, antenna columns.  Per-subband channel stacks are (n_sub, n_rx,
n_tx).  All complex data is dense double precision.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, subband layout, carrier frequencies and codec sizes."""

    n_tx: int = 32
    n_rx: int = 4
    n_sub: int = 13
    n_gran: int = 48
    f_dl_hz: float = 2.60e9
    f_ul_hz: float = 2.48e9
    bandwidth_hz: float = 10e6
    m_bottleneck: int = 1
    b_bits: int = 6
    seed: int = 0

    def __post_init__(self):
        if not (self.n_tx >= self.n_rx >= 1):
            raise ValueError(f"need n_tx >= n_rx >= 1, got {self.n_tx}, {self.n_rx}")
        if self.n_sub < 1 or self.n_gran < 1:
            raise ValueError("n_sub and n_gran must be positive")
        if self.m_bottleneck < 1 or self.b_bits < 1:
            raise ValueError("m_bottleneck and b_bits must be positive")
        for name in ("f_dl_hz", "f_ul_hz", "bandwidth_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def total_bits(self) -> int:
        return self.m_bottleneck * self.b_bits

    def subband_centers_hz(self, link: str) -> np.ndarray:
        """Subband center frequencies, spaced bandwidth/n_sub around the carrier."""
        fc = {"DL": self.f_dl_hz, "UL": self.f_ul_hz}[link]
        step = self.bandwidth_hz / self.n_sub
        s = np.arange(self.n_sub)
        return fc + (s - (self.n_sub - 1) / 2.0) * step

    def content_hash(self) -> str:
        """Stable hash of all fields, used to tie datasets/checkpoints to a config."""
        import hashlib

        text = ",".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def default_config(seed: int = 0) -> SystemConfig:
    """The full-size simulation configuration (6-bit single-unit feedback)."""
    return SystemConfig(seed=seed)


def desk_config(seed: int = 0) -> SystemConfig:
    """Reduced configuration sized for fast tests."""
    return SystemConfig(n_tx=8, n_rx=2, n_sub=4, n_gran=4, seed=seed)


def save_config(cfg: SystemConfig, path) -> None:
    """Write a flat key-value text file, one `name = value` line per field."""
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in fields(cfg)]
    tmp = Path(f"{os.fspath(path)}.tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_config(path) -> SystemConfig:
    kwargs = {}
    field_types = {f.name: f.type for f in fields(SystemConfig)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in field_types:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        caster = int if field_types[key] in ("int", int) else float
        kwargs[key] = caster(value.strip())
    return SystemConfig(**kwargs)


def as_cmatrix(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Validate and return a dense complex128 matrix.

    Rejects non-2D input, NaN/Inf entries, and (when given) wrong dimensions.
    """
    a = np.asarray(entries, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if rows is not None and a.shape[0] != rows:
        raise ValueError(f"expected {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"expected {cols} cols, got {a.shape[1]}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    return a


def check_channel_stack(h: np.ndarray, cfg: SystemConfig | None = None) -> np.ndarray:
    """Validate an (n_sub, n_rx, n_tx) per-subband channel stack."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 3:
        raise ValueError(f"expected (n_sub, n_rx, n_tx) stack, got ndim={h.ndim}")
    if cfg is not None and h.shape != (cfg.n_sub, cfg.n_rx, cfg.n_tx):
        raise ValueError(f"stack shape {h.shape} does not match config "
                         f"{(cfg.n_sub, cfg.n_rx, cfg.n_tx)}")
    if not np.all(np.isfinite(h.view(np.float64))):
        raise ValueError("channel entries must be finite")
    return h


@dataclass(frozen=True)
class ChannelPair:
    """Paired uplink/downlink per-subband channels from one propagation geometry."""

    dl: np.ndarray  # (n_sub, n_rx, n_tx) complex128
    ul: np.ndarray
    env_id: int

    def __post_init__(self):
        dl = check_channel_stack(self.dl)
        ul = check_channel_stack(self.ul)
        if dl.shape != ul.shape:
            raise ValueError(f"dl/ul shape mismatch: {dl.shape} vs {ul.shape}")
        object.__setattr__(self, "dl", dl)
        object.__setattr__(self, "ul", ul)
        dl.setflags(write=False)
        ul.setflags(write=False)
