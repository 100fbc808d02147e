"""Command-line harness: gen / train / eval / exp / inspect."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .channel import generate_pair, make_environments
from .codec import (CsiCodec, pack_codeword, seed_all, tokens_from_complex,
                    unpack_codeword)
from .config import default_config, desk_config, load_config
from .dataset import (load_checkpoint, load_dataset, save_checkpoint,
                      save_dataset)
from .errors import CsilabError
from .experiments import RECIPES, run_experiment
from .pipeline import PipelineFlags, collate, evaluate_codec, prepare_sample
from .training import train_codec

_FLAGSETS = {
    "full": PipelineFlags(True, True, True),
    "no-bce": PipelineFlags(False, True, True),
    "no-ifa": PipelineFlags(True, False, True),
    "no-ul": PipelineFlags(True, True, False),
}


def _resolve_config(name_or_path: str, seed):
    if name_or_path == "default":
        cfg = default_config()
    elif name_or_path == "desk":
        cfg = desk_config()
    else:
        cfg = load_config(name_or_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def _prepare_all(cfg, pairs, flags):
    from .pipeline import make_benchmarks

    bench = make_benchmarks(cfg) if flags.ifa_on else None
    return collate([prepare_sample(p, cfg, flags, bench) for p in pairs])


def cmd_gen(args):
    cfg = _resolve_config(args.config, args.seed)
    envs = make_environments(args.envs, cfg, cfg.seed)
    pairs = [generate_pair(env, cfg, u)
             for env in envs for u in range(args.users)]
    save_dataset(args.out, cfg, pairs)
    print(f"wrote {len(pairs)} pairs ({args.envs} envs x {args.users} users) "
          f"to {args.out}  [config {cfg.content_hash()}]")
    return 0


def cmd_train(args):
    cfg, pairs = load_dataset(args.data)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.m is not None:
        cfg = dataclasses.replace(cfg, m_bottleneck=args.m)
    flags = _FLAGSETS[args.flags]
    batch = _prepare_all(cfg, pairs, flags)
    seed_all(cfg.seed)
    model = CsiCodec(cfg, ul_assist=flags.ul_assist_on)
    history = train_codec(model, batch, flags, args.epochs1, args.epochs2,
                          batch_size=args.batch, seed=cfg.seed, log=print)
    scores = evaluate_codec(model, batch, flags)
    save_checkpoint(args.out, model, cfg, flags, history)
    print(f"final train loss {history['loss'][-1]:.5f}  "
          f"train SGCS {np.mean(scores):.4f}")
    print(f"checkpoint -> {args.out}")
    return 0


def cmd_eval(args):
    cfg_data, pairs = load_dataset(args.data)
    model, cfg, flags, _ = load_checkpoint(args.ckpt)
    if cfg_data.content_hash() != cfg.content_hash():
        print(f"note: dataset config {cfg_data.content_hash()} differs from "
              f"checkpoint config {cfg.content_hash()}")
    batch = _prepare_all(cfg, pairs, flags)
    scores = evaluate_codec(model, batch, flags)
    if args.out:
        import csv as _csv

        with open(args.out, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["sample", "env_id", "sgcs"])
            for i, s in enumerate(scores):
                w.writerow([i, int(batch.env_ids[i]), f"{s:.6f}"])
        print(f"per-sample results -> {args.out}")
    if args.codeword_out:
        ul = batch.ul_map[:1] if flags.ul_assist_on else None
        z = model.encoder(batch.tokens[:1])
        idx = model.quantizer.to_indices(z)[0]
        with open(args.codeword_out, "wb") as fh:
            fh.write(pack_codeword(idx, cfg.b_bits))
        print(f"sample-0 codeword ({cfg.total_bits} bits) -> {args.codeword_out}")
    print(f"SGCS over {len(scores)} samples: mean {np.mean(scores):.4f}  "
          f"median {np.median(scores):.4f}  p10 {np.quantile(scores, 0.1):.4f}")
    return 0


def cmd_exp(args):
    cfg = _resolve_config(args.config, args.seed)
    run_experiment(args.name, cfg, args.out, log=print)
    print(f"experiment outputs -> {args.out}")
    return 0


def _is_torch_zip(path) -> bool:
    # both .npz and torch checkpoints are zip files; torch's carries a pickle
    import zipfile

    try:
        with zipfile.ZipFile(path) as z:
            return any(n.endswith(".pkl") for n in z.namelist())
    except zipfile.BadZipFile:
        return False


def cmd_inspect(args):
    path = args.path
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head[:2] == b"PK" and not _is_torch_zip(path):  # numpy archive
        cfg, pairs = load_dataset(path)
        print(f"dataset: {len(pairs)} pairs, config {cfg.content_hash()}")
        for f in dataclasses.fields(cfg):
            print(f"  {f.name} = {getattr(cfg, f.name)}")
        envs = sorted({p.env_id for p in pairs})
        print(f"  env_ids = {envs}")
    elif head == b"CSCW":
        with open(path, "rb") as fh:
            idx, b = unpack_codeword(fh.read())
        print(f"codeword: {idx.size} units x {b} bits = {idx.size * b} bits")
        print(f"  indices = {idx.tolist()}")
    else:
        try:
            model, cfg, flags, history = load_checkpoint(path)
        except CsilabError:
            cfg = load_config(path)
            print(f"config {cfg.content_hash()}")
            for f in dataclasses.fields(cfg):
                print(f"  {f.name} = {getattr(cfg, f.name)}")
            return 0
        n_par = sum(p.numel() for p in model.parameters())
        print(f"checkpoint: {n_par} parameters, flags {flags.label}, "
              f"config {cfg.content_hash()}")
        if history.get("loss"):
            print(f"  epochs trained = {len(history['loss'])}, "
                  f"final loss = {history['loss'][-1]:.5f}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="csilab",
        description="uplink-assisted implicit CSI feedback laboratory")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a paired-channel dataset")
    g.add_argument("--config", default="default")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.add_argument("--envs", type=int, default=4)
    g.add_argument("--users", type=int, default=64)
    g.set_defaults(fn=cmd_gen)

    t = sub.add_parser("train", help="train the codec on a dataset")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--flags", choices=sorted(_FLAGSETS), default="full")
    t.add_argument("--m", type=int, default=None,
                   help="override bottleneck width")
    t.add_argument("--epochs1", type=int, default=60)
    t.add_argument("--epochs2", type=int, default=20)
    t.add_argument("--batch", type=int, default=64)
    t.set_defaults(fn=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    e.add_argument("--data", required=True)
    e.add_argument("--ckpt", required=True)
    e.add_argument("--out", default=None, help="per-sample CSV path")
    e.add_argument("--codeword-out", default=None,
                   help="write sample 0's packed codeword here")
    e.set_defaults(fn=cmd_eval)

    x = sub.add_parser("exp", help="run a report recipe (CSV + figures)")
    x.add_argument("--name", default="all",
                   choices=sorted(RECIPES) + ["all"])
    x.add_argument("--config", default="desk")
    x.add_argument("--seed", type=int, default=None)
    x.add_argument("--out", default="exp_out")
    x.set_defaults(fn=cmd_exp)

    i = sub.add_parser("inspect", help="describe a dataset/checkpoint/codeword/config file")
    i.add_argument("--path", required=True)
    i.set_defaults(fn=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CsilabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
