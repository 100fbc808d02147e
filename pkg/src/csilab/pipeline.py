"""End-to-end feedback pipeline with ablation switches.

Glues the stages together for one sample: eigenvector extraction (optionally
enhanced), optional angular-delay alignment, codec input/target tensors, and
the restoration path the receiver runs with its own uplink-derived shift.
Each ablation flag removes a stage *structurally*: with `ifa_on=False` no DFT
is taken anywhere, and with `ul_assist_on=False` the decoder has no fusion
branch at all (see codec.Decoder).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .bce import enhance_matrix
from .channel import EnvironmentSpec, generate_pair
from .codec import (complex_from_tokens, pack_codeword,
                    tokens_from_complex, unpack_codeword)
from .config import ChannelPair, SystemConfig
from .eigen import eigenvector_matrix
from .errors import VersionMismatch
from .ifa import align, dft2, make_benchmarks, optimal_shift, restore


@dataclass(frozen=True)
class PipelineFlags:
    bce_on: bool = True
    ifa_on: bool = True
    ul_assist_on: bool = True

    @property
    def label(self) -> str:
        parts = [name for name, on in (("bce", self.bce_on), ("ifa", self.ifa_on),
                                       ("ul", self.ul_assist_on)) if on]
        return "+".join(parts) if parts else "plain"


@dataclass(frozen=True)
class Sample:
    """One user, fully prepared for the codec."""

    enc_in: np.ndarray     # complex (n_sub, n_tx): codec input image
    ul_map: np.ndarray     # float (n_sub, n_tx): uplink magnitude side info
    target: np.ndarray     # complex (n_sub, n_tx): frequency-domain precoder
    shift_dl: tuple        # registration applied to the encoder input
    shift_ul: tuple        # registration the receiver derives from uplink
    env_id: int


def prepare_sample(pair: ChannelPair, cfg: SystemConfig, flags: PipelineFlags,
                   benchmarks: tuple | None = None) -> Sample:
    w_dl = enhance_matrix(pair.dl) if flags.bce_on else eigenvector_matrix(pair.dl)
    w_ul = enhance_matrix(pair.ul) if flags.bce_on else eigenvector_matrix(pair.ul)
    if flags.ifa_on:
        if benchmarks is None:
            benchmarks = make_benchmarks(cfg)
        bench_dl, bench_ul = benchmarks
        x_dl = dft2(w_dl)
        shift_dl = optimal_shift(np.abs(x_dl), bench_dl)
        x_ul = dft2(w_ul)
        shift_ul = optimal_shift(np.abs(x_ul), bench_ul)
        enc_in = align(x_dl, shift_dl)
        ul_map = np.abs(align(x_ul, shift_ul))
    else:
        enc_in = w_dl
        ul_map = np.abs(w_ul)
        shift_dl = (0, 0)
        shift_ul = (0, 0)
    return Sample(enc_in=enc_in, ul_map=ul_map, target=w_dl,
                  shift_dl=shift_dl, shift_ul=shift_ul, env_id=pair.env_id)


def prepare_users(env: EnvironmentSpec, cfg: SystemConfig, flags: PipelineFlags,
                  user_indices, benchmarks: tuple | None = None) -> list:
    if flags.ifa_on and benchmarks is None:
        benchmarks = make_benchmarks(cfg)
    return [prepare_sample(generate_pair(env, cfg, u), cfg, flags, benchmarks)
            for u in user_indices]


@dataclass
class Batch:
    """Stacked samples as torch tensors (targets stay complex)."""

    tokens: torch.Tensor     # (B, 2*n_sub, n_tx) float
    ul_map: torch.Tensor     # (B, n_sub, n_tx) float
    target: torch.Tensor     # (B, n_sub, n_tx) complex
    shifts_ul: torch.Tensor  # (B, 2) long
    env_ids: np.ndarray

    def __len__(self):
        return self.tokens.shape[0]

    def select(self, idx) -> "Batch":
        idx = np.asarray(idx)
        return Batch(tokens=self.tokens[idx], ul_map=self.ul_map[idx],
                     target=self.target[idx], shifts_ul=self.shifts_ul[idx],
                     env_ids=self.env_ids[idx])

    def to_double(self) -> "Batch":
        return Batch(tokens=self.tokens.double(), ul_map=self.ul_map.double(),
                     target=self.target.to(torch.complex128),
                     shifts_ul=self.shifts_ul, env_ids=self.env_ids)


def collate(samples: list) -> Batch:
    enc = np.stack([s.enc_in for s in samples])
    ul = np.stack([s.ul_map for s in samples]).astype(np.float32)
    tgt = np.stack([s.target for s in samples]).astype(np.complex64)
    shifts = np.array([s.shift_ul for s in samples], dtype=np.int64)
    return Batch(tokens=tokens_from_complex(enc),
                 ul_map=torch.from_numpy(ul),
                 target=torch.from_numpy(tgt),
                 shifts_ul=torch.from_numpy(shifts),
                 env_ids=np.array([s.env_id for s in samples], dtype=np.int64))


def restore_tokens(out_tokens: torch.Tensor, flags: PipelineFlags,
                   shifts_ul: torch.Tensor) -> torch.Tensor:
    """Decoder tokens -> complex frequency-domain precoder batch.

    Differentiable; this is the receiver-side path, so the shift undone here
    is the uplink-derived one, not the (unavailable) downlink shift.
    """
    n_sub = out_tokens.shape[1] // 2
    w = torch.complex(out_tokens[:, :n_sub, :], out_tokens[:, n_sub:, :])
    if not flags.ifa_on:
        return w
    rows = []
    for b in range(w.shape[0]):
        m = int(shifts_ul[b, 0])
        n = int(shifts_ul[b, 1])
        rows.append(torch.roll(w[b], shifts=(m, n), dims=(0, 1)))
    w = torch.stack(rows)
    w = torch.fft.ifft(w, dim=2, norm="ortho")
    return torch.fft.fft(w, dim=1, norm="ortho")


def sgcs_torch(w_true: torch.Tensor, w_hat: torch.Tensor,
               eps: float = 1e-12) -> torch.Tensor:
    num = torch.abs(torch.sum(torch.conj(w_true) * w_hat, dim=2)) ** 2
    den = (torch.sum(torch.abs(w_true) ** 2, dim=2)
           * torch.sum(torch.abs(w_hat) ** 2, dim=2)).clamp_min(eps)
    return torch.mean(num / den)


def codec_loss(model, batch: Batch, flags: PipelineFlags) -> torch.Tensor:
    """1 - mean SGCS after quantization and receiver-side restoration."""
    ul = batch.ul_map if flags.ul_assist_on else None
    out, _, _ = model(batch.tokens, ul)
    w_hat = restore_tokens(out, flags, batch.shifts_ul)
    return 1.0 - sgcs_torch(batch.target, w_hat)


@torch.no_grad()
def evaluate_codec(model, batch: Batch, flags: PipelineFlags) -> np.ndarray:
    """Per-sample SGCS of the full encode/quantize/decode/restore chain."""
    model.eval()
    ul = batch.ul_map if flags.ul_assist_on else None
    out, _, _ = model(batch.tokens, ul)
    w_hat = restore_tokens(out, flags, batch.shifts_ul)
    num = torch.abs(torch.sum(torch.conj(batch.target) * w_hat, dim=2)) ** 2
    den = (torch.sum(torch.abs(batch.target) ** 2, dim=2)
           * torch.sum(torch.abs(w_hat) ** 2, dim=2)).clamp_min(1e-12)
    return torch.mean(num / den, dim=1).cpu().numpy().astype(np.float64)


def ue_encode_pipeline(pair: ChannelPair, cfg: SystemConfig, model,
                       benchmarks: tuple | None = None):
    """UE side of the air interface: DL channels -> packed codeword.

    Returns (codeword_bytes, shift_dl).  The shift is a local diagnostic --
    the BS never receives it; it derives its own from uplink measurements.
    """
    if benchmarks is None:
        benchmarks = make_benchmarks(cfg)
    w_dl = enhance_matrix(pair.dl)
    x_dl = dft2(w_dl)
    shift_dl = optimal_shift(np.abs(x_dl), benchmarks[0])
    toks = tokens_from_complex(align(x_dl, shift_dl))
    model.eval()
    with torch.no_grad():
        z = model.encoder(toks)
    idx = model.quantizer.to_indices(z)[0]
    return pack_codeword(idx, cfg.b_bits), shift_dl


def bs_decode_pipeline(codeword: bytes, ul_stack: np.ndarray,
                       cfg: SystemConfig, model,
                       benchmarks: tuple | None = None) -> np.ndarray:
    """BS side of the air interface: codeword + UL channels -> precoder matrix.

    Deliberately takes no downlink quantity of any kind; everything the
    restoration needs (shift control, decoder side information) is derived
    from the uplink stack.  Raises VersionMismatch when the codeword's bit
    depth disagrees with the configuration the model was built for.
    """
    if benchmarks is None:
        benchmarks = make_benchmarks(cfg)
    w_ul = enhance_matrix(np.asarray(ul_stack))
    x_ul = dft2(w_ul)
    shift_ul = optimal_shift(np.abs(x_ul), benchmarks[1])
    ul_map = np.abs(align(x_ul, shift_ul))
    idx, b = unpack_codeword(codeword)
    if b != cfg.b_bits:
        raise VersionMismatch(
            f"codeword uses {b}-bit units, configuration says {cfg.b_bits}")
    z = model.quantizer.from_indices(idx[None]).to(torch.float32)
    ul_t = torch.from_numpy(ul_map[None]).to(torch.float32)
    model.eval()
    with torch.no_grad():
        out = model.decoder(z, ul_t if model.decoder.ul_assist else None)
    w_img = complex_from_tokens(out)[0]
    return restore(w_img, shift_ul)
