"""Command line interface: every pipeline stage as a subcommand.

Each subcommand writes fixed-named artifacts under ``--out DIR`` (default:
current directory).  Exit codes: 0 success, 1 input or configuration
problem, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import lstmvae, pipeline, signal, sindy, trajkit
from .collisim import SimConfig, run as run_simulation
from .errors import ConfigurationError, DataError, NumericsError, ShapeError
from .lstmvae import TrainConfig, VaeArch
from .signal import Series, SgConfig
from .sindy import SindyModel
from .trajkit import TrajectorySet

__all__ = ["main", "build_parser"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _outpath(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _sg_of(args) -> SgConfig:
    return SgConfig(window=args.window, order=args.order)


def _load_data(path: str, fmt: str, dt: float = 1.0) -> TrajectorySet:
    return trajkit.load_trajectories(path, fmt=fmt, dt=dt)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    cfg = SimConfig(
        n_particles=args.particles, box_width=args.box_width, box_height=args.box_height,
        radius=args.radius, speed_scale=args.speed, dt=args.dt, n_steps=args.steps,
        seed=args.seed,
    )
    features = run_simulation(cfg)
    traj = TrajectorySet(features, dt=cfg.dt)
    path = _outpath(args, "data.csv")
    trajkit.save_trajectories(traj, path, fmt=args.format)
    print(f"simulated {cfg.n_particles} particles for {cfg.n_steps} steps -> {path}")
    return 0


def _cmd_ingest(args) -> int:
    traj = _load_data(args.data, args.format, dt=args.dt)
    if args.smooth_window is not None:
        traj = trajkit.smooth_trajectories(
            traj, SgConfig(window=args.smooth_window, order=args.smooth_order))
    if args.no_scale:
        scaled_values = traj.features
        scaler = trajkit.ScaleParams(np.zeros(traj.features.shape[1]),
                                     np.ones(traj.features.shape[1]))
    else:
        scaled_values, scaler = trajkit.minmax_scale(traj.features)
    scaled = TrajectorySet(scaled_values, dt=traj.dt, particle_ids=traj.particle_ids,
                           frames=traj.frames)
    data_path = _outpath(args, "data_scaled.csv")
    trajkit.save_trajectories(scaled, data_path, fmt="wide")
    trajkit.save_scaler(scaler, _outpath(args, "scaler.json"))
    print(f"ingested {traj.n_frames} frames x {traj.n_particles} particles -> {data_path}")
    return 0


def _cmd_train(args) -> int:
    traj = _load_data(args.data, args.format)
    arch = VaeArch(
        input_size=traj.features.shape[1],
        encoder_layers=args.layers, encoder_hidden=args.hidden,
        decoder_layers=args.decoder_layers, decoder_hidden=args.decoder_hidden,
    )
    cfg = TrainConfig(
        epochs=args.epochs, learning_rate=args.lr, kl_weight=args.kl_weight,
        recon_loss=args.recon_loss, seed=args.seed, clip_norm=args.clip_norm,
    )
    result = lstmvae.train(arch, traj.features, cfg)
    lstmvae.save_params(result.params, _outpath(args, "vae_params.json"))
    lstmvae.save_loss_history(result.history, _outpath(args, "loss_history.csv"))
    last = result.history[-1]
    print(f"trained {cfg.epochs} epochs: recon={last.recon:.6g} kl={last.kl:.6g} "
          f"total={last.total:.6g}")
    return 0


def _cmd_encode(args) -> int:
    params = lstmvae.load_params(args.params)
    traj = _load_data(args.data, args.format)
    latent = lstmvae.encode_latent(params, traj.features)
    filtered = signal.sg_filter(latent.z, _sg_of(args))
    path = _outpath(args, "latent.csv")
    pipeline._write_latent_csv(path, latent, filtered)
    print(f"encoded {len(latent)} frames -> {path}")
    return 0


def _cmd_discover(args) -> int:
    z_raw, _ = pipeline.load_latent_csv(args.latent)
    model = sindy.discover(Series(z_raw, args.dt), degree=args.degree,
                           threshold=args.threshold, sg=_sg_of(args))
    model.save(_outpath(args, "sindy_model.json"))
    print(sindy.model_to_text(model))
    return 0


def _cmd_solve(args) -> int:
    model = SindyModel.load(args.model)
    solution = sindy.integrate(model, args.z0, args.dt, args.steps)
    path = _outpath(args, "ode_solution.csv")
    pipeline._write_solution_csv(path, solution)
    if solution.diverged:
        print(f"solution diverged after {solution.values.size} samples -> {path}",
              file=sys.stderr)
        return 2
    print(f"integrated {solution.values.size} samples -> {path}")
    return 0


def _cmd_validate(args) -> int:
    model = SindyModel.load(args.model)
    params_long = lstmvae.load_params(args.params_long)
    traj = _load_data(args.data, args.format)
    scores = pipeline.validate_extrapolation(
        model, params_long, traj.features, args.t_train, args.t_extrapolate,
        dt=args.dt, latent_sg=_sg_of(args), z0=args.z0,
    )
    pipeline._write_json(_outpath(args, "metrics.json"), scores)
    print(f"pearson={scores['pearson']:.4f} rmse={scores['rmse']:.6g} "
          f"flipped={scores['flipped']} diverged={scores['diverged']}")
    return 0


def _cmd_anomaly(args) -> int:
    z_raw, _ = pipeline.load_latent_csv(args.latent)
    model = SindyModel.load(args.model)
    report = pipeline.anomaly_score(
        Series(z_raw, args.dt), model, sg=_sg_of(args),
        threshold=args.threshold, baseline_end=args.baseline_end,
    )
    path = _outpath(args, "anomaly.csv")
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame", "residual", "rolling", "zscore", "flag"])
        for t in range(report.residual.size):
            writer.writerow([
                t, repr(float(report.residual[t])), repr(float(report.rolling[t])),
                repr(float(report.zscore[t])), int(report.flags[t]),
            ])
    if report.first_flag is None:
        print(f"no anomalies (threshold {report.threshold}) -> {path}")
    else:
        print(f"first anomaly at frame {report.first_flag} "
              f"(threshold {report.threshold}) -> {path}")
    return 0


def _cmd_repair(args) -> int:
    model = SindyModel.load(args.model)
    params = lstmvae.load_params(args.params)
    scaler = trajkit.load_scaler(args.scaler) if args.scaler else None
    result = pipeline.repair_states(model, params, args.z0, args.frames,
                                    dt=args.dt, scaler=scaler)
    path = _outpath(args, "repaired.csv")
    trajkit.save_trajectories(result.trajectory, path, fmt="long")
    note = " (diverged, truncated)" if result.diverged else ""
    print(f"repaired {result.trajectory.n_frames} frames{note} -> {path}")
    return 0


def _cmd_density(args) -> int:
    traj = _load_data(args.data, args.format)
    frames = [int(f) for f in args.frames.split(",") if f.strip() != ""]
    grids = pipeline.density_report(traj, frames, grid_size=args.grid,
                                    bandwidth=args.bandwidth)
    for fd in grids:
        path = _outpath(args, f"density_{fd.frame}.csv")
        pipeline.save_density_csv(fd, path)
        print(f"frame {fd.frame}: peak density {fd.peak:.6g} -> {path}")
    return 0


def _cmd_run(args) -> int:
    if args.config:
        cfg = pipeline.config_from_toml(args.config, out_dir=args.out, seed=args.seed)
    else:
        kw = {"out_dir": args.out}
        if args.seed is not None:
            kw["seed"] = args.seed
        cfg = pipeline.RunConfig(**kw)
    artifacts = pipeline.run_discovery(cfg)
    print(artifacts.metrics["model_text"])
    print(f"pearson={artifacts.metrics['pearson']:.4f} "
          f"rmse={artifacts.metrics['rmse']:.6g} "
          f"recon_mse={artifacts.metrics['recon_mse']:.6g}")
    print(f"artifacts in {artifacts.out_dir} (config {artifacts.config_hash})")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_sg_flags(p, window=51, order=1):
    p.add_argument("--window", type=int, default=window,
                   help=f"Savitzky-Golay window (odd, default {window})")
    p.add_argument("--order", type=int, default=order,
                   help=f"Savitzky-Golay polynomial order (default {order})")


def _add_format_flag(p):
    p.add_argument("--format", default="auto", choices=("auto", "long", "wide"),
                   help="trajectory CSV layout (default: detect from header)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latentdyn",
                     description="Latent dynamics discovery for particle trajectories")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", help="simulate colliding particles, write data.csv",
                       parents=[], description="Simulate hard disks in a box.")
    p.add_argument("--particles", type=int, default=5)
    p.add_argument("--box-width", type=float, default=1.0)
    p.add_argument("--box-height", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=0.03)
    p.add_argument("--speed", type=float, default=1.0, help="initial speed scale")
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="long", choices=("long", "wide"))
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ingest", help="validate, smooth, and scale a trajectory CSV")
    p.add_argument("--data", required=True, help="input trajectory CSV")
    _add_format_flag(p)
    p.add_argument("--dt", type=float, default=1.0, help="sampling interval metadata")
    p.add_argument("--smooth-window", type=int, default=None,
                   help="optional pre-smoothing window (odd)")
    p.add_argument("--smooth-order", type=int, default=2)
    p.add_argument("--no-scale", action="store_true", help="skip min-max scaling")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="train the autoencoder on a scaled trajectory CSV")
    p.add_argument("--data", required=True)
    _add_format_flag(p)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--kl-weight", type=float, default=1e-3)
    p.add_argument("--recon-loss", default="mse", choices=("mse", "smooth_l1"))
    p.add_argument("--clip-norm", type=float, default=5.0)
    p.add_argument("--hidden", type=int, default=32, help="encoder hidden size")
    p.add_argument("--layers", type=int, default=1, help="encoder LSTM layers")
    p.add_argument("--decoder-hidden", type=int, default=None)
    p.add_argument("--decoder-layers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("encode", help="extract the latent series with trained parameters")
    p.add_argument("--params", required=True, help="vae_params.json from train")
    p.add_argument("--data", required=True)
    _add_format_flag(p)
    _add_sg_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("discover", help="fit sparse polynomial dynamics to a latent CSV")
    p.add_argument("--latent", required=True, help="latent.csv from encode")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--threshold", type=float, default=0.1)
    _add_sg_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("solve", help="integrate a discovered model with RK4")
    p.add_argument("--model", required=True, help="sindy_model.json")
    p.add_argument("--z0", type=float, required=True)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--steps", type=int, required=True,
                   help="integration steps (writes steps+1 samples)")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("validate",
                       help="score model extrapolation against a long-horizon latent")
    p.add_argument("--model", required=True)
    p.add_argument("--params-long", required=True,
                   help="vae_params.json trained on the long horizon")
    p.add_argument("--data", required=True, help="scaled trajectory CSV (long horizon)")
    _add_format_flag(p)
    p.add_argument("--t-train", type=int, required=True)
    p.add_argument("--t-extrapolate", type=int, required=True)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--z0", type=float, default=None,
                   help="integration start (default: first reference latent value)")
    _add_sg_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("anomaly", help="score an observed latent against a model")
    p.add_argument("--latent", required=True, help="latent.csv from encode")
    p.add_argument("--model", required=True)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--baseline-end", type=int, default=None,
                   help="frames forming the residual baseline (default: all)")
    _add_sg_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_anomaly)

    p = sub.add_parser("repair", help="decode a model-integrated latent into states")
    p.add_argument("--model", required=True)
    p.add_argument("--params", required=True, help="decoder parameters (vae_params.json)")
    p.add_argument("--z0", type=float, required=True)
    p.add_argument("--frames", type=int, required=True, help="output frame count")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--scaler", default=None, help="scaler.json to map back to data units")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_repair)

    p = sub.add_parser("density", help="kernel-density grids of particle positions")
    p.add_argument("--data", required=True)
    _add_format_flag(p)
    p.add_argument("--frames", required=True, help="comma-separated frame indices")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("run", help="execute the full discovery pipeline")
    p.add_argument("--config", default=None, help="TOML run configuration")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default="run_artifacts")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ConfigurationError, DataError, ShapeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericsError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
