import csv
import json
import os

import pytest

from csilab.config import SystemConfig, desk_config
from csilab.experiments import (exp_fig2, exp_fig4, exp_fig5, exp_images,
                                exp_shifts, run_experiment)

CFG = desk_config()
TINY = SystemConfig(n_tx=4, n_rx=2, n_sub=2, n_gran=2,
                    m_bottleneck=1, b_bits=3)


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_fig2_recipe(tmp_path):
    out = exp_fig2(CFG, tmp_path, n_envs=2, users_per_env=6, log=None)
    header, rows = _read_csv(tmp_path / "fig2.csv")
    assert header == ["method", "pearson_value"]
    assert len(rows) == 24  # 12 samples x 2 methods
    assert {r[0] for r in rows} == {"bce", "raw"}
    assert all(-1.0 <= float(r[1]) <= 1.0 for r in rows)
    assert (tmp_path / "fig2.png").stat().st_size > 0
    assert len(out["deciles_bce"]) == len(out["deciles_raw"]) == 9
    assert isinstance(out["bce_dominates"], bool)


def test_images_recipe(tmp_path):
    out = exp_images(CFG, tmp_path, log=None)
    header, rows = _read_csv(tmp_path / "images.csv")
    assert header == ["image", "delay_bin", "angle_bin", "magnitude"]
    names = {r[0] for r in rows}
    assert names == {"benchmark", "DL", "DL aligned", "UL", "UL aligned"}
    assert len(rows) == 5 * CFG.n_sub * CFG.n_tx
    assert (tmp_path / "images.png").stat().st_size > 0
    assert len(out["shift_dl"]) == 2 and len(out["shift_ul"]) == 2


def test_shifts_recipe(tmp_path):
    out = exp_shifts(CFG, tmp_path, n_envs=2, users_per_env=8, log=None)
    header, rows = _read_csv(tmp_path / "shifts.csv")
    assert header == ["kind", "env_id", "n", "agreement"]
    kinds = [r[0] for r in rows]
    assert kinds.count("matched") == 2 and kinds.count("control") == 1
    assert 0.0 <= out["matched"] <= 1.0 and 0.0 <= out["control"] <= 1.0
    assert (tmp_path / "shifts.png").stat().st_size > 0


def test_fig4_recipe(tmp_path):
    out = exp_fig4(TINY, tmp_path, bits=(3,), n_envs=1, train_users=8,
                   test_users=4, epochs=(2, 0), log=None)
    header, rows = _read_csv(tmp_path / "fig4.csv")
    assert header == ["method", "bits", "mean_sgcs"]
    assert len(rows) == 4  # one budget x four variants
    assert {r[0] for r in rows} == {"full", "no-bce", "no-ifa", "no-ul"}
    assert all(0.0 <= float(r[2]) <= 1.0 for r in rows)
    assert set(out["sgcs"]) == {"full@3", "no-bce@3", "no-ifa@3", "no-ul@3"}
    assert set(out["monotone"]) == {"full", "no-bce", "no-ifa", "no-ul"}
    assert (tmp_path / "fig4.png").stat().st_size > 0


def test_fig4_rejects_indivisible_budget(tmp_path):
    with pytest.raises(ValueError, match="divisible"):
        exp_fig4(CFG, tmp_path, bits=(7,), n_envs=1, train_users=4,
                 test_users=2, epochs=(1, 0), log=None)


def test_fig5_recipe(tmp_path):
    out = exp_fig5(TINY, tmp_path, n_train_envs=(1, 2), n_test_envs=1,
                   train_users=6, test_users=4, epochs=(2, 0), log=None)
    header, rows = _read_csv(tmp_path / "fig5.csv")
    assert header == ["method", "n_train_envs", "mean_sgcs"]
    assert len(rows) == 4  # two methods x two sweep points
    assert {r[0] for r in rows} == {"ifa_on", "ifa_off"}
    assert {r[1] for r in rows} == {"1", "2"}
    assert set(out["seen_to_unseen_drop"]) == {"ifa_on", "ifa_off"}
    assert isinstance(out["ifa_drop_smaller"], bool)
    assert (tmp_path / "fig5.png").stat().st_size > 0


def test_run_experiment_writes_manifest_and_summary(tmp_path):
    out_dir = tmp_path / "nested" / "dir"
    res = run_experiment("images", CFG, out_dir, log=None)
    assert os.path.isdir(out_dir)
    assert set(res) == {"images"}
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config_hash"] == CFG.content_hash()
    assert manifest["seed"] == CFG.seed
    assert manifest["recipes"] == ["images"]
    assert "images" in manifest["timings_s"]
    summary = json.loads((out_dir / "summary.json").read_text())
    assert list(summary) == ["images"]
    with pytest.raises(ValueError, match="unknown experiment"):
        run_experiment("nope", CFG, out_dir, log=None)
    with pytest.raises(ValueError, match="single recipe"):
        run_experiment("all", CFG, out_dir, log=None, users_per_env=3)


def test_fig2_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        os.makedirs(d)
        exp_fig2(CFG, d, n_envs=1, users_per_env=5, log=None)
    assert (a / "fig2.csv").read_bytes() == (b / "fig2.csv").read_bytes()
