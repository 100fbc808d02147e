import csv
import subprocess
import sys

import pytest

from csilab.cli import main
from csilab.codec import unpack_codeword
from csilab.config import desk_config, save_config


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """One gen -> train -> eval chain shared by the CLI tests."""
    d = tmp_path_factory.mktemp("cli")
    data, ckpt = str(d / "data.npz"), str(d / "codec.pt")
    assert main(["gen", "--config", "desk", "--seed", "11", "--out", data,
                 "--envs", "2", "--users", "8"]) == 0
    assert main(["train", "--data", data, "--out", ckpt,
                 "--epochs1", "2", "--epochs2", "1", "--batch", "8"]) == 0
    return d


def test_gen_then_inspect(workdir, capsys):
    assert main(["inspect", "--path", str(workdir / "data.npz")]) == 0
    out = capsys.readouterr().out
    assert "16 pairs" in out
    assert "env_ids = [0, 1]" in out
    assert "n_tx = 8" in out


def test_train_then_inspect(workdir, capsys):
    assert main(["inspect", "--path", str(workdir / "codec.pt")]) == 0
    out = capsys.readouterr().out
    assert "checkpoint:" in out and "flags bce+ifa+ul" in out
    assert "epochs trained = 3" in out


def test_eval_writes_csv_and_codeword(workdir, capsys):
    per, cw = str(workdir / "per.csv"), str(workdir / "cw.bin")
    assert main(["eval", "--data", str(workdir / "data.npz"),
                 "--ckpt", str(workdir / "codec.pt"),
                 "--out", per, "--codeword-out", cw]) == 0
    assert "SGCS over 16 samples" in capsys.readouterr().out
    with open(per, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sample", "env_id", "sgcs"]
    assert len(rows) == 17
    assert all(0.0 <= float(r[2]) <= 1.0 for r in rows[1:])
    with open(cw, "rb") as fh:
        idx, b = unpack_codeword(fh.read())
    cfg = desk_config()
    assert b == cfg.b_bits and idx.size == cfg.m_bottleneck


def test_inspect_codeword_and_config(workdir, tmp_path, capsys):
    assert main(["inspect", "--path", str(workdir / "cw.bin")]) == 0
    assert "codeword: 1 units x 6 bits = 6 bits" in capsys.readouterr().out
    cfg_path = tmp_path / "desk.cfg"
    save_config(desk_config(), cfg_path)
    assert main(["inspect", "--path", str(cfg_path)]) == 0
    assert "n_sub = 4" in capsys.readouterr().out


def test_train_flag_and_m_overrides(workdir, capsys):
    ckpt = str(workdir / "noul.pt")
    assert main(["train", "--data", str(workdir / "data.npz"), "--out", ckpt,
                 "--flags", "no-ul", "--m", "2",
                 "--epochs1", "1", "--epochs2", "0", "--batch", "8"]) == 0
    capsys.readouterr()
    assert main(["inspect", "--path", ckpt]) == 0
    assert "flags bce+ifa," in capsys.readouterr().out


def test_exp_smoke(tmp_path, capsys):
    out_dir = tmp_path / "exp"
    assert main(["exp", "--name", "images", "--config", "desk",
                 "--out", str(out_dir)]) == 0
    assert (out_dir / "images.csv").exists()
    assert (out_dir / "images.png").exists()


def test_config_file_resolution(workdir, tmp_path):
    cfg_path = tmp_path / "my.cfg"
    save_config(desk_config(), cfg_path)
    out = str(tmp_path / "d2.npz")
    assert main(["gen", "--config", str(cfg_path), "--seed", "11",
                 "--out", out, "--envs", "1", "--users", "3"]) == 0


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["eval", "--data", str(tmp_path / "missing.npz"),
                 "--ckpt", str(tmp_path / "missing.pt")]) == 1
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_tx: 8\n")  # wrong delimiter
    assert main(["gen", "--config", str(bad), "--out",
                 str(tmp_path / "x.npz")]) == 1


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "csilab", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for verb in ("gen", "train", "eval", "exp", "inspect"):
        assert verb in proc.stdout
