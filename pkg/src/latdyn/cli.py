"""Command-line entry point: simulate / train / eval / transfer / inspect.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import csv
import os
import sys
from pathlib import Path

from .runconfig import PROFILES, load_runconfig


def _set_threads(n):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(n)
    except ImportError:
        pass


def _common_flags(p):
    p.add_argument("--config", type=Path, default=None, help="INI run config file")
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk",
                   help="built-in defaults profile")
    p.add_argument("--seed", type=int, default=None, help="override all seeds")
    p.add_argument("--threads", type=int, default=1,
                   help="worker thread cap (default 1 for determinism)")


def _load(args, overrides=None):
    overrides = dict(overrides or {})
    if args.seed is not None:
        overrides.setdefault("sim", {})["seed"] = args.seed
        overrides.setdefault("train", {})["seed"] = args.seed
    return load_runconfig(args.config, profile=args.profile, overrides=overrides)


def cmd_simulate(args):
    from .data import write_dataset
    from .sim import build_dataset

    over = {}
    if args.system is not None:
        over.setdefault("sim", {})["system"] = args.system
    if args.trajectories is not None:
        over.setdefault("data", {})["trajectories"] = args.trajectories
    cfg = _load(args, over)
    ds = build_dataset(
        cfg.sim, cfg.data.trajectories, ratios=cfg.data.ratios, seed=cfg.sim.seed,
        irregular_keep=cfg.data.irregular_keep,
    )
    write_dataset(ds, args.out)
    sizes = {k: len(v) for k, v in ds.split.items()}
    print(f"wrote {len(ds.trajectories)} trajectories ({sizes}) to {args.out}")
    return 0


def cmd_train(args):
    from .data import read_dataset
    from .train import load_resume_state, save_resume_state, train_loop

    cfg = _load(args)
    ds = read_dataset(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model_cfg = cfg.model
    kwargs = {}
    if args.resume is not None:
        params, model_cfg, start_epoch, opt_state = load_resume_state(args.resume)
        kwargs = dict(initial=params, start_epoch=start_epoch, opt_state=opt_state)
        print(f"resuming at epoch {start_epoch}")
    res = train_loop(
        ds, model_cfg, cfg.train, stop_epoch=args.stop_epoch,
        log_path=out / "train_log.csv", checkpoint_path=out / "best.ckpt", **kwargs,
    )
    save_resume_state(out / "last.ckpt", res, model_cfg, cfg.train.seed)
    if res.diverged:
        print("training diverged; last finite parameters kept", file=sys.stderr)
        return 1
    print(f"done: best val mse {res.best_val:.6g} at epoch {res.best_epoch}")
    return 0


def cmd_eval(args):
    from .data import read_dataset
    from .evaluation import emit_report, evaluate_checkpoint

    cfg = _load(args)
    ds = read_dataset(args.dataset)
    horizon = args.window if args.window is not None else cfg.eval.horizon
    report = evaluate_checkpoint(
        args.checkpoint, ds, runs=args.runs, horizon=horizon,
        sample_psi=cfg.eval.sample_psi, iqr_mode=cfg.eval.iqr_mode,
    )
    paths = emit_report(report, args.out)
    print(f"mean normalized MSE {report.mean_nmse:.6g} "
          f"(75% IQR {report.iqr_nmse:.6g}) over {len(report.per_trajectory)} rollouts")
    for p in paths:
        print(f"  {p}")
    return 0


def cmd_transfer(args):
    from .data import read_dataset
    from .evaluation import evaluate_checkpoint
    from .train import fine_tune, scratch_train

    cfg = _load(args)
    fractions = [float(x) for x in args.fractions.split(",") if x.strip()]
    for f in fractions:
        if not 0 < f <= 1:
            raise ValueError(f"fraction {f} outside (0, 1]")
    ds = read_dataset(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for f in fractions:
        for label in ("prior", "scratch"):
            ckpt = out / f"{label}_f{f:g}.ckpt"
            if label == "prior":
                fine_tune(args.checkpoint, ds, f, cfg.model, cfg.train,
                          out_checkpoint=ckpt)
            else:
                scratch_train(ds, f, cfg.model, cfg.train, out_checkpoint=ckpt)
            report = evaluate_checkpoint(ckpt, ds, runs=cfg.eval.runs,
                                         horizon=cfg.eval.horizon,
                                         sample_psi=cfg.eval.sample_psi)
            rows.append((f, label, report.mean_nmse))
    table = out / "transfer_table.csv"
    with open(table, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fraction", "provenance", "mean_normalized_mse"])
        for r in rows:
            w.writerow([r[0], r[1], repr(r[2])])
    for f, label, val in rows:
        print(f"f={f:g} {label:8s} mean nmse {val:.6g}")
    print(f"table: {table}")
    return 0


def cmd_inspect(args):
    with open(args.path, "rb") as f:
        magic = f.read(4)
    if magic == b"LDID":
        from .data import read_dataset

        ds = read_dataset(args.path)
        shapes = {t.frames.shape[1:] for t in ds.trajectories}
        lengths = sorted({len(t) for t in ds.trajectories})
        print(f"LDID dataset: {len(ds.trajectories)} trajectories")
        print(f"  frames per trajectory: {lengths[0]}" +
              (f"..{lengths[-1]}" if len(lengths) > 1 else ""))
        for s in sorted(shapes):
            print(f"  frame shape (C,H,W): {s}")
        for name, ids in sorted(ds.split.items()):
            print(f"  split {name}: {len(ids)}")
        for k, v in sorted(ds.meta.items()):
            print(f"  meta {k}: {v}")
        return 0
    if magic == b"LDCK":
        from .model import load_checkpoint

        params, cfg, meta = load_checkpoint(args.path)
        n_params = sum(t.data.size for t in params.values())
        print(f"checkpoint: config hash {cfg.hash()}")
        print(f"  tensors: {len(params)}, parameters: {n_params}")
        for k, v in sorted(meta.items()):
            print(f"  meta {k}: {v}")
        return 0
    raise ValueError(f"unrecognized file magic {magic!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="latdyn",
                                description="latent dynamics from image trajectories")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a rendered trajectory dataset")
    _common_flags(s)
    s.add_argument("--system", default=None, help="simulated system name")
    s.add_argument("--trajectories", type=int, default=None)
    s.add_argument("--out", type=Path, required=True, help="output .ldid file")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("train", help="train on a dataset")
    _common_flags(s)
    s.add_argument("--dataset", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True, help="output directory")
    s.add_argument("--resume", type=Path, default=None, help="resume-state checkpoint")
    s.add_argument("--stop-epoch", type=int, default=None,
                   help="pause after this epoch (resume later with --resume)")
    s.set_defaults(fn=cmd_train)

    s = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    _common_flags(s)
    s.add_argument("--checkpoint", type=Path, required=True)
    s.add_argument("--dataset", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True, help="report directory")
    s.add_argument("--runs", type=int, default=5)
    s.add_argument("--window", type=int, default=None, help="prediction window T")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("transfer", help="few-shot transfer comparison")
    _common_flags(s)
    s.add_argument("--checkpoint", type=Path, required=True, help="prior checkpoint")
    s.add_argument("--dataset", type=Path, required=True, help="intervened dataset")
    s.add_argument("--fractions", default="0.08,0.32",
                   help="comma-separated train fractions")
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(fn=cmd_transfer)

    s = sub.add_parser("inspect", help="print dataset or checkpoint header")
    s.add_argument("path", type=Path)
    s.set_defaults(fn=cmd_inspect)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None):
        _set_threads(args.threads)
    try:
        return args.fn(args)
    except (ValueError, OSError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
