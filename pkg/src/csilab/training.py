"""Two-phase Adam training loop for the codec."""

from __future__ import annotations

import math
import time

import numpy as np
import torch

from .errors import NonFiniteLoss
from .pipeline import Batch, PipelineFlags, codec_loss

_SEED_SHUFFLE = 0x53485546


def train_codec(model, batch: Batch, flags: PipelineFlags,
                epochs_phase1: int, epochs_phase2: int = 0,
                lr_phase1: float = 1e-3, lr_phase2: float = 1e-4,
                batch_size: int = 64, seed: int = 0, log=None) -> dict:
    """Train on an in-memory batch; returns a per-epoch history dict.

    Phase 1 runs at lr_phase1, phase 2 continues at lr_phase2 (classic
    large-then-small schedule).  Minibatch order is drawn from a dedicated
    seeded stream so runs are repeatable.
    """
    rng = np.random.default_rng([_SEED_SHUFFLE, seed])
    history = {"epoch": [], "loss": [], "lr": []}
    n = len(batch)
    step = 0
    t0 = time.monotonic()
    for phase, (epochs, lr) in enumerate(
            [(epochs_phase1, lr_phase1), (epochs_phase2, lr_phase2)], start=1):
        if epochs <= 0:
            continue
        opt = torch.optim.Adam(model.parameters(), lr=lr)
        for ep in range(epochs):
            model.train()
            order = rng.permutation(n)
            losses = []
            for lo in range(0, n, batch_size):
                mb = batch.select(order[lo:lo + batch_size])
                loss = codec_loss(model, mb, flags)
                val = float(loss.detach())
                if not math.isfinite(val):
                    raise NonFiniteLoss("training loss left the reals",
                                        epoch=len(history["epoch"]), step=step)
                opt.zero_grad()
                loss.backward()
                opt.step()
                losses.append(val)
                step += 1
            history["epoch"].append(len(history["epoch"]))
            history["loss"].append(float(np.mean(losses)))
            history["lr"].append(lr)
            if log is not None:
                log(f"phase {phase} epoch {ep+1}/{epochs}  "
                    f"loss {history['loss'][-1]:.5f}  "
                    f"[{time.monotonic()-t0:.1f}s]")
    return history
