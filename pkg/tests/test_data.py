import hashlib

import numpy as np
import pytest

from latdyn.data import (
    Dataset,
    FormatError,
    Trajectory,
    decompose_patches,
    make_irregular,
    read_dataset,
    split_dataset,
    stitch_indices,
    write_dataset,
)


def make_traj(tid, t=20, c=1, h=8, w=8, seed=0):
    rng = np.random.default_rng(seed + tid)
    return Trajectory(
        tid, np.arange(t) * 0.05, rng.random((t, c, h, w)).astype(np.float32)
    )


# -- containers -------------------------------------------------------------


def test_trajectory_rejects_unsorted_times():
    with pytest.raises(ValueError):
        Trajectory(0, np.array([0.0, 0.0]), np.zeros((2, 1, 4, 4), dtype=np.float32))


def test_dataset_rejects_overlapping_splits():
    trajs = [make_traj(i) for i in range(3)]
    with pytest.raises(ValueError):
        Dataset(trajs, split={"train": {0, 1}, "val": {1}, "test": {2}})


# -- file format ------------------------------------------------------------


def test_empty_dataset_round_trip(tmp_path):
    path = tmp_path / "empty.ldid"
    ds = Dataset([], meta={"system": "pendulum"})
    write_dataset(ds, path)
    assert read_dataset(path) == ds


def test_round_trip_bit_exact(tmp_path):
    path = tmp_path / "a.ldid"
    ds = Dataset(
        [make_traj(i) for i in range(3)],
        split={"train": {0}, "val": {1}, "test": {2}},
        meta={"system": "pendulum", "intervention": {}},
    )
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back == ds
    # writing the reread dataset reproduces identical bytes
    path2 = tmp_path / "b.ldid"
    write_dataset(back, path2)
    assert hashlib.sha256(path.read_bytes()).digest() == hashlib.sha256(path2.read_bytes()).digest()


def test_corrupted_magic_rejected(tmp_path):
    path = tmp_path / "bad.ldid"
    write_dataset(Dataset([make_traj(0)]), path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="magic"):
        read_dataset(path)


def test_corrupted_payload_reports_offset(tmp_path):
    path = tmp_path / "bad.ldid"
    write_dataset(Dataset([make_traj(0)]), path)
    raw = bytearray(path.read_bytes())
    raw[-40] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="offset"):
        read_dataset(path)


def test_truncation_rejected(tmp_path):
    path = tmp_path / "trunc.ldid"
    write_dataset(Dataset([make_traj(0)]), path)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(FormatError, match="truncated"):
        read_dataset(path)


# -- splits -----------------------------------------------------------------


def test_split_paper_sizes():
    s = split_dataset(500, (0.8, 0.1, 0.1), seed=0)
    assert (len(s["train"]), len(s["val"]), len(s["test"])) == (400, 50, 50)
    assert s["train"] | s["val"] | s["test"] == set(range(500))


def test_split_all_train():
    s = split_dataset(10, (1.0, 0.0, 0.0), seed=1)
    assert len(s["train"]) == 10 and not s["val"] and not s["test"]


def test_split_deterministic():
    assert split_dataset(100, (0.8, 0.1, 0.1), seed=42) == split_dataset(
        100, (0.8, 0.1, 0.1), seed=42
    )


def test_split_too_small_rejected():
    with pytest.raises(ValueError):
        split_dataset(2, (0.8, 0.1, 0.1), seed=0)


# -- irregular thinning -----------------------------------------------------


def test_make_irregular_identity():
    traj = make_traj(0, t=30)
    out = make_irregular(traj, 1.0, seed=0)
    assert out == traj


def test_make_irregular_reproducible_and_keeps_frame0():
    traj = make_traj(0, t=100)
    a = make_irregular(traj, 0.5, seed=3)
    b = make_irregular(traj, 0.5, seed=3)
    assert a == b
    assert a.times[0] == traj.times[0]
    assert len(a) < 100


def test_make_irregular_preserves_time_order_and_stamps():
    traj = make_traj(0, t=60)
    out = make_irregular(traj, 0.7, seed=9)
    assert (np.diff(out.times) > 0).all()
    assert set(out.times).issubset(set(traj.times))


def test_make_irregular_too_short_rejected():
    traj = make_traj(0, t=15)
    with pytest.raises(ValueError):
        make_irregular(traj, 0.05, seed=0)


# -- patch decomposition ----------------------------------------------------


def test_patch_counting_oracle():
    traj = make_traj(0, t=50)
    ps = decompose_patches(traj, 10, overlap=1)
    assert len(ps) == (50 - 10) // 9 + 1 == 5
    assert [p.indices[0] for p in ps.patches] == [0, 9, 18, 27, 36]
    assert ps.coverage == 46 / 50


def test_single_patch_full_length():
    traj = make_traj(0, t=20)
    ps = decompose_patches(traj, 20, overlap=1)
    assert len(ps) == 1 and ps.coverage == 1.0


def test_patch_times_rebased():
    traj = make_traj(0, t=30)
    ps = decompose_patches(traj, 10, overlap=1)
    for p in ps.patches:
        assert p.times[0] == 0.0
        assert (np.diff(p.times) > 0).all()


def test_stitch_reconstruction():
    traj = make_traj(0, t=50)
    ps = decompose_patches(traj, 10, overlap=1)
    idx = stitch_indices(ps)
    assert np.array_equal(idx, np.arange(46))
    assert np.array_equal(traj.frames[idx], traj.frames[:46])


def test_overlap_frames_appear_in_exactly_two_patches():
    traj = make_traj(0, t=50)
    ps = decompose_patches(traj, 10, overlap=1)
    counts = np.zeros(50, dtype=int)
    for p in ps.patches:
        counts[p.indices] += 1
    covered = counts[:46]
    assert (covered >= 1).all()
    assert (counts[np.array([9, 18, 27, 36])] == 2).all()


def test_patch_too_long_rejected():
    with pytest.raises(ValueError):
        decompose_patches(make_traj(0, t=5), 10)
