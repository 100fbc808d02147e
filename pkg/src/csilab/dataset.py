"""On-disk formats: channel datasets (.npz) and codec checkpoints (.pt).

A dataset stores raw paired channels rather than prepared codec inputs, so one
generated file serves every ablation configuration.  Both formats carry a
version tag and the full system configuration; loaders validate before use.
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np
import torch

from .config import ChannelPair, SystemConfig
from .errors import CorruptRecord, VersionMismatch

DATASET_VERSION = 1
CHECKPOINT_VERSION = 1


def save_dataset(path, cfg: SystemConfig, pairs: list) -> None:
    """Write channel pairs to `path` as a compressed NumPy archive.

    Keys: 'version' (scalar), 'config_json' (JSON of the config fields),
    'dl' and 'ul' (complex64, shape (n, n_sub, n_rx, n_tx)), 'env_ids' (int64).
    """
    dl = np.stack([p.dl for p in pairs]).astype(np.complex64)
    ul = np.stack([p.ul for p in pairs]).astype(np.complex64)
    env_ids = np.array([p.env_id for p in pairs], dtype=np.int64)
    tmp = f"{os.fspath(path)}.tmp.npz"
    np.savez_compressed(
        tmp, version=np.int64(DATASET_VERSION),
        config_json=np.array(json.dumps(dataclasses.asdict(cfg))),
        dl=dl, ul=ul, env_ids=env_ids)
    os.replace(tmp, path)


def load_dataset(path):
    """Read a dataset archive back as (cfg, list of ChannelPair)."""
    try:
        with np.load(path, allow_pickle=False) as z:
            missing = {"version", "config_json", "dl", "ul", "env_ids"} - set(z.files)
            if missing:
                raise CorruptRecord(f"dataset missing keys {sorted(missing)}")
            version = int(z["version"])
            if version != DATASET_VERSION:
                raise VersionMismatch(
                    f"dataset version {version}, expected {DATASET_VERSION}")
            cfg = SystemConfig(**json.loads(str(z["config_json"])))
            dl = z["dl"].astype(np.complex128)
            ul = z["ul"].astype(np.complex128)
            env_ids = z["env_ids"]
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CorruptRecord(f"unreadable dataset: {exc}") from None
    if dl.shape != ul.shape or dl.ndim != 4:
        raise CorruptRecord("dataset channel stacks are malformed")
    if not (np.all(np.isfinite(dl.view(np.float64)))
            and np.all(np.isfinite(ul.view(np.float64)))):
        raise CorruptRecord("dataset contains non-finite entries")
    pairs = [ChannelPair(dl=dl[i], ul=ul[i], env_id=int(env_ids[i]))
             for i in range(dl.shape[0])]
    return cfg, pairs


def save_checkpoint(path, model, cfg: SystemConfig, flags, history=None) -> None:
    """Write model weights plus enough metadata to rebuild the model."""
    tmp = f"{os.fspath(path)}.tmp"
    torch.save({
        "version": CHECKPOINT_VERSION,
        "config": dataclasses.asdict(cfg),
        "flags": dataclasses.asdict(flags),
        "state_dict": model.state_dict(),
        "history": history or {},
    }, tmp)
    os.replace(tmp, path)


def load_checkpoint(path):
    """Read a checkpoint back as (model, cfg, flags, history)."""
    from .codec import CsiCodec
    from .pipeline import PipelineFlags

    try:
        blob = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CorruptRecord(f"unreadable checkpoint: {exc}") from None
    if not isinstance(blob, dict) or "version" not in blob:
        raise CorruptRecord("checkpoint lacks a version field")
    if blob["version"] != CHECKPOINT_VERSION:
        raise VersionMismatch(
            f"checkpoint version {blob['version']}, expected {CHECKPOINT_VERSION}")
    try:
        cfg = SystemConfig(**blob["config"])
        flags = PipelineFlags(**blob["flags"])
        model = CsiCodec(cfg, ul_assist=flags.ul_assist_on)
        model.load_state_dict(blob["state_dict"])
    except (KeyError, TypeError, RuntimeError, ValueError) as exc:
        raise CorruptRecord(f"checkpoint does not describe a model: {exc}") from None
    return model, cfg, flags, blob.get("history", {})
