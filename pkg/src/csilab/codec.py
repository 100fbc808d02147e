"""Transformer autoencoder codec with quantized bottleneck and UL fusion.

The encoder treats the real/imag-stacked precoder matrix as a sequence of
2*n_sub tokens of width n_tx, runs post-norm attention blocks, and compresses
to M sigmoid units which are uniformly quantized to b bits each (straight-
through estimator for gradients).  The decoder expands back to an image and
fuses the uplink magnitude map two ways: as an extra input channel, and as a
per-pixel feature modulation (FiLM) after every trunk block.  The modulation
is the load-bearing path: after delay-angle alignment the map's content is
*support* -- which bins the few codeword bits are describing -- and gating
features multiplicatively is how a small network expresses that.  Activations
are GELU throughout and there is no normalization inside the conv stack,
which keeps the whole network smooth enough for finite-difference gradient
checks.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn

from .config import SystemConfig
from .errors import CorruptRecord, RangeViolation

CODEWORD_MAGIC = b"CSCW"
CODEWORD_VERSION = 1


def _n_heads(d: int) -> int:
    for h in (4, 2):
        if d % h == 0:
            return h
    return 1


class AttnBlock(nn.Module):
    """Post-norm transformer block: attention then feed-forward, GELU inside."""

    def __init__(self, d: int):
        super().__init__()
        self.attn = nn.MultiheadAttention(d, _n_heads(d), batch_first=True)
        self.ff = nn.Sequential(nn.Linear(d, 4 * d), nn.GELU(), nn.Linear(4 * d, d))
        self.norm1 = nn.LayerNorm(d)
        self.norm2 = nn.LayerNorm(d)

    def forward(self, x):
        a, _ = self.attn(x, x, x, need_weights=False)
        x = self.norm1(x + a)
        return self.norm2(x + self.ff(x))


class ResBlock(nn.Module):
    """3x3 conv residual block; a 1x1 conv matches channels when they differ."""

    def __init__(self, c_in: int, c_mid: int, c_out: int):
        super().__init__()
        self.conv1 = nn.Conv2d(c_in, c_mid, 3, padding=1)
        self.conv2 = nn.Conv2d(c_mid, c_out, 3, padding=1)
        self.skip = nn.Conv2d(c_in, c_out, 1) if c_in != c_out else nn.Identity()
        self.act = nn.GELU()

    def forward(self, x):
        y = self.conv2(self.act(self.conv1(x)))
        return self.act(y + self.skip(x))


class Quantizer(nn.Module):
    """Uniform scalar quantizer on [0, 1] with straight-through gradients."""

    def __init__(self, b_bits: int):
        super().__init__()
        if b_bits < 1:
            raise RangeViolation("need at least one bit per bottleneck unit")
        self.b_bits = b_bits
        self.levels = 2 ** b_bits - 1

    def forward(self, z):
        q = torch.round(z * self.levels) / self.levels
        return z + (q - z).detach()

    def to_indices(self, z: torch.Tensor) -> np.ndarray:
        z = z.detach().cpu().numpy()
        if np.any(z < 0.0) or np.any(z > 1.0):
            raise RangeViolation("bottleneck values left [0, 1]")
        return np.rint(z * self.levels).astype(np.uint32)

    def from_indices(self, idx: np.ndarray) -> torch.Tensor:
        idx = np.asarray(idx)
        if np.any(idx > self.levels):
            raise RangeViolation(f"index exceeds {self.levels}")
        return torch.from_numpy(idx.astype(np.float64) / self.levels)


class Encoder(nn.Module):
    def __init__(self, cfg: SystemConfig, n_blocks: int = 2):
        super().__init__()
        self.blocks = nn.ModuleList(AttnBlock(cfg.n_tx) for _ in range(n_blocks))
        self.fc = nn.Linear(2 * cfg.n_sub * cfg.n_tx, cfg.m_bottleneck)

    def forward(self, tokens):
        x = tokens
        for blk in self.blocks:
            x = blk(x)
        return torch.sigmoid(self.fc(x.flatten(1)))


class Decoder(nn.Module):
    def __init__(self, cfg: SystemConfig, ul_assist: bool, n_blocks: int = 2,
                 width: int = 32, map_width: int = 16):
        super().__init__()
        self.cfg = cfg
        self.ul_assist = ul_assist
        self.fc = nn.Linear(cfg.m_bottleneck, 2 * cfg.n_sub * cfg.n_tx)
        c_in = 3 if ul_assist else 2
        self.block_in = ResBlock(c_in, width, 2)
        self.blocks = nn.ModuleList(ResBlock(2, width, 2) for _ in range(4))
        self.conv_out = nn.Conv2d(c_in, 2, 3, padding=1)
        self.attn = nn.ModuleList(AttnBlock(cfg.n_tx) for _ in range(n_blocks))
        if ul_assist:
            self.map_stem = nn.Sequential(
                nn.Conv2d(1, map_width, 3, padding=1), nn.GELU(),
                nn.Conv2d(map_width, map_width, 3, padding=1), nn.GELU())
            # one (gamma, beta) head per trunk block, zero-initialized so the
            # modulation starts as the identity and is recruited by training
            self.film = nn.ModuleList(
                nn.Conv2d(map_width, 4, 3, padding=1)
                for _ in range(len(self.blocks)))
            for head in self.film:
                nn.init.zeros_(head.weight)
                nn.init.zeros_(head.bias)

    def forward(self, q, ul_mag=None):
        n_sub, n_tx = self.cfg.n_sub, self.cfg.n_tx
        x = self.fc(q).reshape(-1, 2, n_sub, n_tx)
        if self.ul_assist:
            if ul_mag is None:
                raise ValueError("decoder was built with uplink assistance")
            u = ul_mag.unsqueeze(1)
            x = torch.cat([x, u], dim=1)
            m = self.map_stem(u)
        y = self.block_in(x)
        for i, blk in enumerate(self.blocks):
            y = blk(y)
            if self.ul_assist:
                gamma, beta = self.film[i](m).chunk(2, dim=1)
                y = y * (1.0 + gamma) + beta
        if self.ul_assist:
            y = torch.cat([y, u], dim=1)
        y = self.conv_out(y)
        t = y.reshape(-1, 2 * n_sub, n_tx)
        for blk in self.attn:
            t = blk(t)
        return t


class CsiCodec(nn.Module):
    """End-to-end codec; `ul_assist=False` removes the fusion branch entirely."""

    def __init__(self, cfg: SystemConfig, ul_assist: bool = True):
        super().__init__()
        self.cfg = cfg
        self.ul_assist = ul_assist
        self.encoder = Encoder(cfg)
        self.quantizer = Quantizer(cfg.b_bits)
        self.decoder = Decoder(cfg, ul_assist)

    def forward(self, tokens, ul_mag=None):
        z = self.encoder(tokens)
        q = self.quantizer(z)
        return self.decoder(q, ul_mag), z, q


def tokens_from_complex(x: np.ndarray) -> torch.Tensor:
    """(batch, n_sub, n_tx) complex -> (batch, 2*n_sub, n_tx) float tokens."""
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[None]
    t = np.concatenate([x.real, x.imag], axis=1)
    return torch.from_numpy(np.ascontiguousarray(t, dtype=np.float32))


def complex_from_tokens(t: torch.Tensor) -> np.ndarray:
    """Inverse of tokens_from_complex."""
    a = t.detach().cpu().numpy()
    n_sub = a.shape[1] // 2
    return a[:, :n_sub, :] + 1j * a[:, n_sub:, :]


def pack_codeword(indices: np.ndarray, b_bits: int) -> bytes:
    """Serialize quantizer indices as a tight MSB-first bitstream.

    Layout: magic 'CSCW', version u8, b_bits u8, count u16 (big-endian), then
    ceil(count*b_bits/8) payload bytes; pad bits in the final byte are zero.
    """
    indices = np.asarray(indices).ravel()
    if indices.size == 0 or indices.size > 0xFFFF:
        raise RangeViolation("codeword length must be in [1, 65535]")
    if np.any(indices < 0) or np.any(indices >= 2 ** b_bits):
        raise RangeViolation(f"indices must fit in {b_bits} bits")
    bits = []
    for v in indices.astype(np.uint64):
        bits.extend((int(v) >> (b_bits - 1 - k)) & 1 for k in range(b_bits))
    while len(bits) % 8:
        bits.append(0)
    payload = bytes(
        sum(b << (7 - k) for k, b in enumerate(bits[i:i + 8]))
        for i in range(0, len(bits), 8))
    head = CODEWORD_MAGIC + bytes([CODEWORD_VERSION, b_bits])
    head += int(indices.size).to_bytes(2, "big")
    return head + payload


def unpack_codeword(buf: bytes):
    """Inverse of pack_codeword: returns (indices, b_bits)."""
    if len(buf) < 8 or buf[:4] != CODEWORD_MAGIC:
        raise CorruptRecord("not a codeword record")
    if buf[4] != CODEWORD_VERSION:
        raise CorruptRecord(f"unsupported codeword version {buf[4]}")
    b_bits = buf[5]
    count = int.from_bytes(buf[6:8], "big")
    n_bytes = (count * b_bits + 7) // 8
    if len(buf) != 8 + n_bytes:
        raise CorruptRecord("codeword payload length mismatch")
    bits = []
    for byte in buf[8:]:
        bits.extend((byte >> (7 - k)) & 1 for k in range(8))
    if any(bits[count * b_bits:]):
        raise CorruptRecord("nonzero padding bits")
    out = np.empty(count, dtype=np.uint32)
    for i in range(count):
        v = 0
        for k in range(b_bits):
            v = (v << 1) | bits[i * b_bits + k]
        out[i] = v
    return out, b_bits


def seed_all(seed: int) -> None:
    """Make torch init/shuffling reproducible alongside numpy streams."""
    torch.manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
