import hashlib

import numpy as np
import pytest

from latdyn.cli import main
from latdyn.runconfig import PROFILES, load_runconfig
from latdyn.train import curriculum_patch_len

TINY_INI = """\
[sim]
system = pendulum
n_frames = 8
duration = 0.8

[data]
trajectories = 6
ratios = 0.5,0.25,0.25

[model]
latent_dim = 2
context = 2
n_attention_blocks = 2
n_heads = 2
enc_channels = 2,2
token_dim = 4
repr_dim = 2
init_hidden = 4
dyn_hidden = 4
time_embed_dim = 2

[train]
epochs = 4
batch = 2
curriculum_period = 2
val_every = 2

[eval]
runs = 2
"""


@pytest.fixture()
def tiny_ini(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_INI)
    return path


@pytest.fixture()
def tiny_dataset(tmp_path, tiny_ini):
    out = tmp_path / "pend.ldid"
    assert main(["simulate", "--config", str(tiny_ini), "--out", str(out)]) == 0
    return out


# -- run config -------------------------------------------------------------


def test_paper_scale_profile_matches_published_recipe():
    cfg = load_runconfig(profile="paper_scale")
    assert cfg.train.lr0 == 3e-4
    assert cfg.train.weight_decay == 0.01
    assert cfg.train.batch == 16
    assert cfg.train.curriculum_period == 3000
    assert cfg.sim.grid == (128, 128)
    assert cfg.model.context == 10
    assert cfg.model.latent_dim == 32
    assert cfg.model.attention_mode == "spatio_temporal"
    assert cfg.model.n_attention_blocks == 8
    assert cfg.model.n_heads == 4
    assert curriculum_patch_len(0, cfg.train.curriculum_period, 59) == 1


def test_desk_profile_shapes():
    cfg = load_runconfig(profile="desk")
    assert cfg.sim.grid == (32, 32)
    assert cfg.sim.n_frames == 30
    assert cfg.train.epochs == 3000
    assert cfg.model.image_shape == (1, 32, 32)


def test_unknown_profile_rejected():
    with pytest.raises(ValueError, match="profile"):
        load_runconfig(profile="gpu_farm")


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[train]\nlearning_rate = 0.1\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_runconfig(path)


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[optimizer]\nlr = 0.1\n")
    with pytest.raises(ValueError, match="unknown config section"):
        load_runconfig(path)


def test_intervention_keys_parsed(tmp_path):
    path = tmp_path / "iv.ini"
    path.write_text("[sim]\nintervention.gravity = 4.0\nintervention.length = 0.5\n")
    cfg = load_runconfig(path)
    assert cfg.sim.intervention == {"gravity": 4.0, "length": 0.5}


def test_config_file_overrides_profile(tiny_ini):
    cfg = load_runconfig(tiny_ini, profile="desk")
    assert cfg.sim.n_frames == 8
    assert cfg.data.trajectories == 6
    assert cfg.model.token_dim == 4


def test_double_pendulum_channels():
    cfg = load_runconfig(profile="desk", overrides={"sim": {"system": "double_pendulum"}})
    assert cfg.model.image_shape == (3, 32, 32)


# -- simulate ---------------------------------------------------------------


def test_simulate_writes_dataset(tiny_dataset):
    from latdyn.data import read_dataset

    ds = read_dataset(tiny_dataset)
    assert len(ds.trajectories) == 6
    assert {k: len(v) for k, v in ds.split.items()} == {"train": 3, "val": 2, "test": 1}
    assert ds.trajectories[0].frames.shape == (8, 1, 32, 32)


def test_simulate_same_seed_same_checksum(tmp_path, tiny_ini):
    a, b = tmp_path / "a.ldid", tmp_path / "b.ldid"
    for out in (a, b):
        assert main(["simulate", "--config", str(tiny_ini), "--out", str(out)]) == 0
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_simulate_trajectories_override(tmp_path, tiny_ini):
    out = tmp_path / "c.ldid"
    assert main(["simulate", "--config", str(tiny_ini), "--trajectories", "4",
                 "--out", str(out)]) == 0
    from latdyn.data import read_dataset

    assert len(read_dataset(out).trajectories) == 4


def test_simulate_invalid_system_lists_names(tmp_path, tiny_ini, capsys):
    out = tmp_path / "d.ldid"
    rc = main(["simulate", "--config", str(tiny_ini), "--system", "quantum",
               "--out", str(out)])
    assert rc == 1
    assert "pendulum" in capsys.readouterr().err


# -- train ------------------------------------------------------------------


def test_train_missing_dataset_flag_usage_error(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["train", "--out", str(tmp_path)])
    assert e.value.code == 2


def test_train_runs_and_logs(tmp_path, tiny_ini, tiny_dataset):
    out = tmp_path / "run"
    rc = main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
               "--out", str(out)])
    assert rc == 0
    log = (out / "train_log.csv").read_text().splitlines()
    assert log[0] == "epoch,lr,nll,kl_repr,kl_smooth,total,patch_len,val_mse"
    assert len(log) == 5  # header + 4 epochs
    assert (out / "best.ckpt").exists() and (out / "last.ckpt").exists()


def test_train_resume_equals_continuous(tmp_path, tiny_ini, tiny_dataset):
    full = tmp_path / "full"
    rc = main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
               "--out", str(full)])
    assert rc == 0
    split = tmp_path / "split"
    rc = main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
               "--out", str(split), "--stop-epoch", "2"])
    assert rc == 0
    rc = main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
               "--out", str(split), "--resume", str(split / "last.ckpt")])
    assert rc == 0
    full_log = (full / "train_log.csv").read_text()
    split_log = (split / "train_log.csv").read_text()
    assert split_log == full_log


# -- eval -------------------------------------------------------------------


def test_eval_writes_report(tmp_path, tiny_ini, tiny_dataset):
    run = tmp_path / "run"
    main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
          "--out", str(run)])
    rep = tmp_path / "report"
    rc = main(["eval", "--config", str(tiny_ini), "--checkpoint", str(run / "best.ckpt"),
               "--dataset", str(tiny_dataset), "--out", str(rep), "--runs", "2"])
    assert rc == 0
    files = list(rep.iterdir())
    assert any(f.name.startswith("metrics_") for f in files)
    assert any(f.name.startswith("rmse_curve_") for f in files)
    assert any(f.name.startswith("plotdata_") for f in files)


def test_eval_default_runs_is_five():
    from latdyn.cli import build_parser

    args = build_parser().parse_args(["eval", "--checkpoint", "c", "--dataset", "d",
                                      "--out", "o"])
    assert args.runs == 5


def test_eval_window_flag(tmp_path, tiny_ini, tiny_dataset):
    run = tmp_path / "run"
    main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
          "--out", str(run)])
    rep = tmp_path / "rep30"
    rc = main(["eval", "--config", str(tiny_ini), "--checkpoint", str(run / "best.ckpt"),
               "--dataset", str(tiny_dataset), "--out", str(rep), "--runs", "1",
               "--window", "3"])
    assert rc == 0
    curve = next(f for f in rep.iterdir() if f.name.startswith("rmse_curve_"))
    assert len(curve.read_text().splitlines()) == 4  # header + 3 steps


# -- transfer ---------------------------------------------------------------


def test_transfer_bad_fraction_rejected(tmp_path, tiny_ini, tiny_dataset, capsys):
    rc = main(["transfer", "--config", str(tiny_ini), "--checkpoint", "x.ckpt",
               "--dataset", str(tiny_dataset), "--fractions", "1.5",
               "--out", str(tmp_path / "t")])
    assert rc == 1
    assert "fraction" in capsys.readouterr().err


def test_transfer_table_rows(tmp_path, tiny_ini, tiny_dataset):
    run = tmp_path / "run"
    main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
          "--out", str(run)])
    out = tmp_path / "transfer"
    rc = main(["transfer", "--config", str(tiny_ini),
               "--checkpoint", str(run / "best.ckpt"),
               "--dataset", str(tiny_dataset), "--fractions", "0.5,1.0",
               "--out", str(out)])
    assert rc == 0
    rows = (out / "transfer_table.csv").read_text().splitlines()
    assert rows[0] == "fraction,provenance,mean_normalized_mse"
    assert len(rows) == 1 + 4  # 2 fractions x {prior, scratch}


# -- inspect ----------------------------------------------------------------


def test_inspect_dataset(tiny_dataset, capsys):
    assert main(["inspect", str(tiny_dataset)]) == 0
    out = capsys.readouterr().out
    assert "6 trajectories" in out
    assert "split train: 3" in out


def test_inspect_checkpoint(tmp_path, tiny_ini, tiny_dataset, capsys):
    run = tmp_path / "run"
    main(["train", "--config", str(tiny_ini), "--dataset", str(tiny_dataset),
          "--out", str(run)])
    assert main(["inspect", str(run / "best.ckpt")]) == 0
    assert "config hash" in capsys.readouterr().out


def test_inspect_corrupt_file_exit_1(tmp_path, tiny_dataset, capsys):
    bad = tmp_path / "bad.ldid"
    raw = bytearray(tiny_dataset.read_bytes())
    raw[-40] ^= 0xFF
    bad.write_bytes(bytes(raw))
    assert main(["inspect", str(bad)]) == 1
    assert "offset" in capsys.readouterr().err


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--help"])
    assert e.value.code == 0
    out = capsys.readouterr().out
    for name in ("simulate", "train", "eval", "transfer", "inspect"):
        assert name in out


def test_profiles_cover_both_scales():
    assert set(PROFILES) == {"desk", "paper_scale"}
