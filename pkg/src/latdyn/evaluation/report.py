"""Test-set evaluation protocol and CSV report plumbing."""

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..model import load_checkpoint, predict
from .metrics import classic_iqr, iqr75, normalized_mse, rmse_over_time


@dataclass
class EvalReport:
    """Aggregated rollout metrics over (trajectory x run)."""

    per_trajectory: list  # rows of (traj_id, run, normalized mse)
    rmse_curve: "np.ndarray"  # mean per-step RMSE, length = horizon
    mean_nmse: float
    iqr_nmse: float
    horizon: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rmse_curve = np.asarray(self.rmse_curve, dtype=np.float64)
        vals = [v for _, _, v in self.per_trajectory]
        if vals and not (np.isfinite(vals).all() and (np.asarray(vals) >= 0).all()):
            raise ValueError("metrics must be finite and non-negative")


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]


def evaluate_checkpoint(checkpoint_path, dataset, runs=5, horizon=None,
                        sample_psi=True, iqr_mode="central75"):
    """Run the rollout protocol: per test trajectory and per run seed,
    predict 2T steps from the first k context frames and score both metrics.

    With sample_psi the runs differ through the psi sampling seed; in mean
    mode all runs are identical.
    """
    params, cfg, _ = load_checkpoint(checkpoint_path)
    test = dataset.subset("test") if dataset.split else list(dataset.trajectories)
    if not test:
        raise ValueError("dataset has no test trajectories")
    c_img = test[0].frames.shape[1:]
    if tuple(cfg.image_shape) != tuple(c_img):
        raise ValueError(f"checkpoint expects frames {cfg.image_shape}, dataset has {c_img}")
    if horizon is None:
        horizon = len(test[0]) // 2
    k = cfg.context
    irregular = dataset.meta.get("irregular_keep") is not None
    rows, curves = [], []
    iqr_fn = iqr75 if iqr_mode == "central75" else classic_iqr
    for traj in sorted(test, key=lambda t: t.id):
        if len(traj) < 2 * horizon:
            raise ValueError(f"trajectory {traj.id} shorter than 2*horizon")
        if len(traj) < k + 1:
            raise ValueError(f"trajectory {traj.id} has fewer than k+1 frames")
        gt = traj.frames[: 2 * horizon].astype(np.float64)
        for run in range(runs):
            rng = np.random.default_rng(run) if sample_psi else None
            pred = np.empty_like(gt)
            pred[:k] = gt[:k]
            pred[k:] = predict(
                params, cfg, traj.frames[:k], traj.times[:k],
                traj.times[k : 2 * horizon], rng=rng, irregular=irregular,
            )
            rows.append((traj.id, run, normalized_mse(pred, gt, horizon)))
            curves.append(rmse_over_time(pred, gt, horizon))
    vals = [v for _, _, v in rows]
    return EvalReport(
        per_trajectory=rows,
        rmse_curve=np.mean(curves, axis=0),
        mean_nmse=float(np.mean(vals)),
        iqr_nmse=iqr_fn(vals),
        horizon=horizon,
        metadata={
            "checkpoint_hash": file_hash(checkpoint_path),
            "runs": runs,
            "sample_psi": sample_psi,
            "iqr_mode": iqr_mode,
        },
    )


def emit_report(report, out_dir):
    """Write per-trajectory metrics, the RMSE curve, and a columnar
    plot-data file; names embed the checkpoint hash. Returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = report.metadata.get("checkpoint_hash", "nohash")
    metrics_path = out / f"metrics_{tag}.csv"
    curve_path = out / f"rmse_curve_{tag}.csv"
    plot_path = out / f"plotdata_{tag}.txt"
    with open(metrics_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["trajectory", "run", "normalized_mse"])
        for tid, run, val in report.per_trajectory:
            w.writerow([tid, run, repr(val)])
        if report.per_trajectory:
            w.writerow(["mean", "", repr(report.mean_nmse)])
            w.writerow(["iqr", "", repr(report.iqr_nmse)])
    with open(curve_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["normalized_time", "rmse"])
        for i, val in enumerate(report.rmse_curve):
            w.writerow([repr(i / report.horizon), repr(float(val))])
    with open(plot_path, "w") as f:
        f.write("# normalized_time rmse\n")
        for i, val in enumerate(report.rmse_curve):
            f.write(f"{i / report.horizon} {float(val)}\n")
    return metrics_path, curve_path, plot_path


def parse_report(metrics_path, curve_path):
    """Read back emitted CSVs into (per_trajectory rows, mean, iqr, curve)."""
    rows, mean_nmse, iqr_nmse = [], None, None
    with open(metrics_path, newline="") as f:
        for rec in list(csv.reader(f))[1:]:
            if rec[0] == "mean":
                mean_nmse = float(rec[2])
            elif rec[0] == "iqr":
                iqr_nmse = float(rec[2])
            else:
                rows.append((int(rec[0]), int(rec[1]), float(rec[2])))
    with open(curve_path, newline="") as f:
        curve = np.array([float(rec[1]) for rec in list(csv.reader(f))[1:]])
    return rows, mean_nmse, iqr_nmse, curve
