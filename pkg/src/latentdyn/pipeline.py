"""End-to-end orchestration: config, full runs, validation, anomaly, repair.

A run wires the stages together: obtain trajectories (simulator or CSV),
preprocess (optional smoothing, min-max scaling), train the autoencoder,
extract and filter the latent series, identify its dynamics, integrate the
identified model past the training horizon, and score the extrapolation
against a long-horizon reference latent.  Every artifact lands in one output
directory stamped by a config hash, and reruns with the same configuration
are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import lstmvae, signal, sindy, trajkit
from .collisim import SimConfig, run as run_simulation
from .errors import ConfigurationError, DataError, LatentDynError, NumericsError
from .lstmvae import TrainConfig, VaeArch, VaeParams
from .signal import Series, SgConfig
from .sindy import IntegrationResult, SindyModel
from .trajkit import ScaleParams, TrajectorySet

__all__ = [
    "RunConfig",
    "RunArtifacts",
    "config_from_toml",
    "run_discovery",
    "validate_extrapolation",
    "AnomalyReport",
    "anomaly_score",
    "RepairResult",
    "repair_states",
    "premature_repair_experiment",
    "FrameDensity",
    "density_report",
    "save_density_csv",
]


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a discovery run.

    ``seed`` governs the whole run: the simulator uses ``seed``, the
    training-horizon model trains with ``seed + 1``, and the long-horizon
    reference model with ``seed + 2`` (any seeds in the nested configs are
    overridden).  ``out_dir`` is where artifacts land; it is deliberately
    excluded from the config hash so identical experiments in different
    directories produce identical artifacts.
    """

    source: str = "simulate"
    csv_path: str | None = None
    csv_format: str = "auto"
    dt: float | None = None
    sim: SimConfig = field(default_factory=SimConfig)
    smooth: SgConfig | None = None
    scale: bool = True
    encoder_layers: int = 1
    encoder_hidden: int = 32
    decoder_layers: int | None = None
    decoder_hidden: int | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    latent_sg: SgConfig = field(default_factory=SgConfig)
    degree: int = 3
    threshold: float = 0.1
    t_train: int = 500
    t_extrapolate: int | None = None
    premature_fraction: float = 0.3
    seed: int = 0
    out_dir: str = "run_artifacts"

    def __post_init__(self):
        if self.source not in ("simulate", "csv"):
            raise ConfigurationError(f"source must be 'simulate' or 'csv', got {self.source!r}")
        if self.source == "csv" and not self.csv_path:
            raise ConfigurationError("source 'csv' requires csv_path")
        if self.t_train < 2:
            raise ConfigurationError(f"t_train must be >= 2, got {self.t_train}")
        if self.t_extrapolate is None:
            object.__setattr__(self, "t_extrapolate", self.t_train)
        if self.t_extrapolate < self.t_train:
            raise ConfigurationError(
                f"t_extrapolate ({self.t_extrapolate}) must be >= t_train ({self.t_train})"
            )
        if self.dt is not None and self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not 0.0 < self.premature_fraction <= 1.0:
            raise ConfigurationError(
                f"premature_fraction must be in (0, 1], got {self.premature_fraction}"
            )

    @property
    def effective_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return self.sim.dt if self.source == "simulate" else 1.0

    def to_dict(self) -> dict:
        """JSON-ready dict; excludes out_dir (execution placement, not identity)."""
        return {
            "source": self.source,
            "csv_path": self.csv_path,
            "csv_format": self.csv_format,
            "dt": self.dt,
            "sim": dataclasses.asdict(self.sim),
            "smooth": None if self.smooth is None else dataclasses.asdict(self.smooth),
            "scale": self.scale,
            "encoder_layers": self.encoder_layers,
            "encoder_hidden": self.encoder_hidden,
            "decoder_layers": self.decoder_layers,
            "decoder_hidden": self.decoder_hidden,
            "train": self.train.to_dict(),
            "latent_sg": dataclasses.asdict(self.latent_sg),
            "degree": self.degree,
            "threshold": self.threshold,
            "t_train": self.t_train,
            "t_extrapolate": self.t_extrapolate,
            "premature_fraction": self.premature_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict, out_dir: str | None = None) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigurationError(f"run config must be a table, got {type(obj).__name__}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigurationError(f"unknown run config keys: {sorted(unknown)}")
        kw = dict(obj)
        try:
            if "sim" in kw and kw["sim"] is not None:
                kw["sim"] = SimConfig(**kw["sim"])
            if kw.get("smooth") is not None:
                kw["smooth"] = SgConfig(**kw["smooth"])
            if "train" in kw and kw["train"] is not None:
                kw["train"] = TrainConfig(**kw["train"])
            if "latent_sg" in kw and kw["latent_sg"] is not None:
                kw["latent_sg"] = SgConfig(**kw["latent_sg"])
        except TypeError as e:
            raise ConfigurationError(f"bad nested config table: {e}") from None
        if out_dir is not None:
            kw["out_dir"] = out_dir
        return cls(**kw)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def config_from_toml(path: str, out_dir: str | None = None,
                     seed: int | None = None) -> RunConfig:
    """Load a RunConfig from a TOML file; optional out_dir/seed overrides."""
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            obj = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"{path}: invalid TOML: {e}") from None
    if seed is not None:
        obj["seed"] = seed
    return RunConfig.from_dict(obj, out_dir=out_dir)


@dataclass
class RunArtifacts:
    """In-memory results of a discovery run plus where they were written."""

    out_dir: str
    config: RunConfig
    config_hash: str
    scaled: TrajectorySet
    scaler: ScaleParams
    params: VaeParams
    latent: lstmvae.LatentSeries
    latent_filtered: np.ndarray
    model: SindyModel
    solution: IntegrationResult
    metrics: dict
    params_long: VaeParams | None = None
    latent_long: lstmvae.LatentSeries | None = None


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_latent_csv(path: str, latent: lstmvae.LatentSeries,
                      filtered: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame", "z_raw", "z_filtered", "mu", "logvar"])
        for t in range(len(latent)):
            writer.writerow([
                t, repr(float(latent.z[t])), repr(float(filtered[t])),
                repr(float(latent.mu[t])), repr(float(latent.logvar[t])),
            ])


def load_latent_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a latent CSV; returns (z_raw, z_filtered) arrays."""
    if not os.path.exists(path):
        raise DataError(f"latent file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:3] != ["frame", "z_raw", "z_filtered"]:
            raise DataError(
                f"{path}: expected header frame,z_raw,z_filtered,..., got {header!r}"
            )
        raw, filtered = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                raw.append(float(row[1]))
                filtered.append(float(row[2]))
            except (IndexError, ValueError) as e:
                raise DataError(f"{path}: row {lineno}: {e}") from None
    return np.asarray(raw), np.asarray(filtered)


def _write_solution_csv(path: str, solution: IntegrationResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame", "z"])
        for t, z in enumerate(solution.values):
            writer.writerow([t, repr(float(z))])


def load_solution_csv(path: str) -> np.ndarray:
    """Read an ODE-solution CSV written by the solve stage; returns the z column."""
    if not os.path.exists(path):
        raise DataError(f"solution file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["frame", "z"]:
            raise DataError(f"{path}: expected header frame,z, got {header!r}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(float(row[1]))
            except (IndexError, ValueError) as e:
                raise DataError(f"{path}: row {lineno}: {e}") from None
    return np.asarray(out)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# the full run
# ---------------------------------------------------------------------------


def _acquire_data(cfg: RunConfig) -> TrajectorySet:
    if cfg.source == "simulate":
        sim = dataclasses.replace(cfg.sim, n_steps=cfg.t_extrapolate, seed=cfg.seed)
        features = run_simulation(sim)
        return TrajectorySet(features, dt=cfg.effective_dt)
    traj = trajkit.load_trajectories(cfg.csv_path, fmt=cfg.csv_format, dt=cfg.effective_dt)
    if traj.n_frames < cfg.t_extrapolate:
        raise DataError(
            f"{cfg.csv_path}: {traj.n_frames} frames but t_extrapolate={cfg.t_extrapolate}"
        )
    return TrajectorySet(traj.features[: cfg.t_extrapolate], dt=traj.dt,
                         particle_ids=traj.particle_ids,
                         frames=traj.frames[: cfg.t_extrapolate])


def run_discovery(cfg: RunConfig) -> RunArtifacts:
    """Execute the full workflow and write every artifact under ``cfg.out_dir``.

    Stages: acquire -> preprocess -> train -> latent -> discover ->
    integrate -> validate.  On failure, artifacts produced so far stay in
    place next to a ``failure.json`` marker, and the error re-raises.
    Fixed config (including seed) gives byte-identical artifact files.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    chash = cfg.config_hash()
    stage = "configure"
    try:
        _write_json(os.path.join(cfg.out_dir, "config.json"),
                    {"config": cfg.to_dict(), "config_hash": chash, "seed": cfg.seed})

        stage = "acquire"
        data = _acquire_data(cfg)

        stage = "preprocess"
        if cfg.smooth is not None:
            data = trajkit.smooth_trajectories(data, cfg.smooth)
        if cfg.scale:
            scaled_values, scaler = trajkit.minmax_scale(data.features)
        else:
            scaled_values = data.features.copy()
            scaler = ScaleParams(np.zeros(data.features.shape[1]),
                                 np.ones(data.features.shape[1]))
        scaled = TrajectorySet(scaled_values, dt=data.dt,
                               particle_ids=data.particle_ids, frames=data.frames)
        trajkit.save_trajectories(scaled, os.path.join(cfg.out_dir, "data_scaled.csv"),
                                  fmt="wide")
        trajkit.save_scaler(scaler, os.path.join(cfg.out_dir, "scaler.json"))

        stage = "train"
        arch = VaeArch(
            input_size=scaled.features.shape[1],
            encoder_layers=cfg.encoder_layers,
            encoder_hidden=cfg.encoder_hidden,
            decoder_layers=cfg.decoder_layers,
            decoder_hidden=cfg.decoder_hidden,
        )
        train_cfg = dataclasses.replace(cfg.train, seed=cfg.seed + 1)
        result = lstmvae.train(arch, scaled.features[: cfg.t_train], train_cfg)
        lstmvae.save_params(result.params, os.path.join(cfg.out_dir, "vae_params.json"))
        lstmvae.save_loss_history(result.history,
                                  os.path.join(cfg.out_dir, "loss_history.csv"))

        stage = "latent"
        dt = scaled.dt
        latent = result.latent
        filtered = signal.sg_filter(latent.z, cfg.latent_sg)
        _write_latent_csv(os.path.join(cfg.out_dir, "latent.csv"), latent, filtered)

        stage = "discover"
        model = sindy.discover(Series(latent.z, dt), degree=cfg.degree,
                               threshold=cfg.threshold, sg=cfg.latent_sg)
        model.provenance["config_hash"] = chash
        model.provenance["seed"] = cfg.seed
        model.save(os.path.join(cfg.out_dir, "sindy_model.json"))

        stage = "integrate"
        z0 = float(filtered[0])
        solution = sindy.integrate(model, z0, dt, cfg.t_extrapolate - 1)
        _write_solution_csv(os.path.join(cfg.out_dir, "ode_solution.csv"), solution)

        stage = "validate"
        params_long = None
        latent_long = None
        if cfg.t_extrapolate > cfg.t_train:
            long_cfg = dataclasses.replace(cfg.train, seed=cfg.seed + 2)
            result_long = lstmvae.train(arch, scaled.features, long_cfg)
            params_long = result_long.params
            latent_long = result_long.latent
            lstmvae.save_params(params_long,
                                os.path.join(cfg.out_dir, "vae_params_long.json"))
            lstmvae.save_loss_history(result_long.history,
                                      os.path.join(cfg.out_dir, "loss_history_long.csv"))
            filtered_long = signal.sg_filter(latent_long.z, cfg.latent_sg)
            _write_latent_csv(os.path.join(cfg.out_dir, "latent_long.csv"),
                              latent_long, filtered_long)
            reference = filtered_long
        else:
            reference = filtered
        scores = _score_solution(solution, reference)

        recon = lstmvae.reconstruct(result.params, latent.z)
        recon_mse = float(np.mean((recon - scaled.features[: cfg.t_train]) ** 2))
        metrics = {
            "pearson": scores["pearson"],
            "rmse": scores["rmse"],
            "recon_mse": recon_mse,
            "model_text": sindy.model_to_text(model),
            "sign_flipped": scores["flipped"],
            "diverged": solution.diverged,
            "seed": cfg.seed,
            "config_hash": chash,
        }
        _write_json(os.path.join(cfg.out_dir, "metrics.json"), metrics)

        stage = "manifest"
        names = sorted(n for n in os.listdir(cfg.out_dir)
                       if n not in ("manifest.json", "failure.json")
                       and os.path.isfile(os.path.join(cfg.out_dir, n)))
        _write_json(os.path.join(cfg.out_dir, "manifest.json"), {
            "config_hash": chash,
            "seed": cfg.seed,
            "files": {n: _sha256(os.path.join(cfg.out_dir, n)) for n in names},
        })
    except LatentDynError as err:
        _write_json(os.path.join(cfg.out_dir, "failure.json"),
                    {"stage": stage, "error": type(err).__name__, "message": str(err)})
        raise
    return RunArtifacts(
        out_dir=cfg.out_dir, config=cfg, config_hash=chash, scaled=scaled,
        scaler=scaler, params=result.params, latent=latent, latent_filtered=filtered,
        model=model, solution=solution, metrics=metrics,
        params_long=params_long, latent_long=latent_long,
    )


def _score_solution(solution: IntegrationResult, reference: np.ndarray) -> dict:
    """Sign-aligned Pearson and RMSE between a solution and a reference latent."""
    n = min(solution.values.size, reference.size)
    if n < 2:
        raise NumericsError("too few overlapping samples to score the solution")
    sol = solution.values[:n]
    ref = reference[:n]
    r = signal.pearson(sol, ref)
    flipped = False
    if r < 0:
        # A global sign flip of the latent is dynamically meaningless, so
        # compare against the orientation that correlates positively.
        sol = -sol
        r = -r
        flipped = True
    rmse = float(np.sqrt(np.mean((sol - ref) ** 2)))
    return {"pearson": float(r), "rmse": rmse, "flipped": flipped}


def validate_extrapolation(
    model: SindyModel,
    params_long: VaeParams,
    data_long,
    t_train: int,
    t_extrapolate: int,
    *,
    dt: float = 1.0,
    latent_sg: SgConfig | None = SgConfig(),
    z0: float | None = None,
) -> dict:
    """Score a discovered model's extrapolation against a long-horizon latent.

    The reference latent comes from encoding ``data_long`` (first
    ``t_extrapolate`` rows) with the long-horizon parameters and filtering;
    the candidate is the model integrated from ``z0`` (default: the
    reference's first value) over the same horizon.  The candidate's sign is
    aligned before scoring, since a global latent sign flip carries no
    dynamical meaning.  Returns ``{"pearson", "rmse", "flipped", "diverged"}``.
    """
    if not 2 <= t_train <= t_extrapolate:
        raise ConfigurationError(
            f"need 2 <= t_train <= t_extrapolate, got {t_train}, {t_extrapolate}"
        )
    features = np.asarray(getattr(data_long, "features", data_long), dtype=np.float64)
    if features.shape[0] < t_extrapolate:
        raise DataError(
            f"data has {features.shape[0]} rows but t_extrapolate={t_extrapolate}"
        )
    latent = lstmvae.encode_latent(params_long, features[:t_extrapolate])
    reference = latent.z if latent_sg is None else signal.sg_filter(latent.z, latent_sg)
    if z0 is None:
        z0 = float(reference[0])
    solution = sindy.integrate(model, z0, dt, t_extrapolate - 1)
    scores = _score_solution(solution, reference)
    scores["diverged"] = solution.diverged
    return scores


# ---------------------------------------------------------------------------
# anomaly detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnomalyReport:
    """Residual diagnostics of an observed latent against a discovered model.

    ``residual`` is the pointwise mismatch between the observed latent's
    derivative and the model's prediction; ``rolling`` its trailing-window
    mean; ``zscore`` that rolling mean standardized against the baseline
    segment; ``flags`` marks where the z-score exceeds the threshold.
    """

    residual: np.ndarray
    rolling: np.ndarray
    zscore: np.ndarray
    flags: np.ndarray
    threshold: float
    window: int
    dt: float

    @property
    def first_flag(self) -> int | None:
        idx = np.flatnonzero(self.flags)
        return int(idx[0]) if idx.size else None


def anomaly_score(
    z_obs: Series,
    model: SindyModel,
    sg: SgConfig | None = SgConfig(),
    threshold: float = 3.0,
    baseline_end: int | None = None,
    scale_floor: float = 0.02,
) -> AnomalyReport:
    """Score an observed latent series against the model ``dz/dt = f(z)``.

    The observed series is filtered (pass ``sg=None`` to skip), its
    derivative estimated, and the residual ``|dz/dt - f(z)|`` averaged over
    a trailing window of the filter width.  That rolling mean is z-scored
    against its own distribution over the baseline segment (default: the
    whole series; pass the training horizon to detect drift after it).  The
    z-score denominator is floored at ``scale_floor`` times the RMS model
    derivative over the baseline, so clean series with near-zero residual
    variance do not produce spurious flags.
    """
    values = z_obs.values
    if sg is not None:
        values = signal.sg_filter(values, sg)
    window = sg.window if sg is not None else max(3, min(51, values.size))
    if values.size < window:
        raise ConfigurationError(f"series of {values.size} samples shorter than window {window}")
    dzdt = signal.estimate_derivative(values, z_obs.dt)
    predicted = model.predict(values)
    residual = np.abs(dzdt - predicted)

    kernel = np.ones(window) / window
    rolling = np.convolve(residual, kernel, mode="full")[: residual.size]
    # Trailing means over partially filled windows at the start:
    counts = np.minimum(np.arange(1, residual.size + 1), window)
    rolling = rolling * (window / counts)

    if baseline_end is None:
        baseline_end = values.size
    if not window <= baseline_end <= values.size:
        raise ConfigurationError(
            f"baseline_end must lie in [{window}, {values.size}], got {baseline_end}"
        )
    base = rolling[window - 1: baseline_end]
    mu_b = float(base.mean())
    sigma_b = float(base.std())
    floor = scale_floor * float(np.sqrt(np.mean(predicted[:baseline_end] ** 2)))
    denom = max(sigma_b, floor, 1e-12)
    zscore = (rolling - mu_b) / denom
    flags = zscore > threshold
    return AnomalyReport(
        residual=residual, rolling=rolling, zscore=zscore, flags=flags,
        threshold=threshold, window=window, dt=z_obs.dt,
    )


# ---------------------------------------------------------------------------
# repair and density
# ---------------------------------------------------------------------------


@dataclass
class RepairResult:
    """States reconstructed by decoding a model-integrated latent."""

    trajectory: TrajectorySet
    solution: IntegrationResult

    @property
    def diverged(self) -> bool:
        return self.solution.diverged


def repair_states(
    model: SindyModel,
    params: VaeParams,
    z0: float,
    n_frames: int,
    *,
    dt: float = 1.0,
    scaler: ScaleParams | None = None,
) -> RepairResult:
    """Rebuild feature states by integrating the model and decoding the result.

    The identified dynamics are integrated from ``z0`` for ``n_frames``
    samples and the solution decoded into feature space; when scaler
    parameters are given the output is mapped back to data units.  If the
    integration diverges the decoded trajectory is truncated accordingly and
    the result carries the divergence flag.
    """
    if n_frames < 2:
        raise ConfigurationError(f"n_frames must be >= 2, got {n_frames}")
    solution = sindy.integrate(model, z0, dt, n_frames - 1)
    z = solution.values[:n_frames]
    decoded = lstmvae.reconstruct(params, z)
    if scaler is not None:
        decoded = trajkit.inverse_scale(decoded, scaler)
    return RepairResult(
        trajectory=TrajectorySet(decoded, dt=dt), solution=solution,
    )


def premature_repair_experiment(cfg: RunConfig, artifacts: RunArtifacts | None = None) -> dict:
    """Compare two decodes through a deliberately under-trained decoder.

    A fresh long-horizon model is trained on ``premature_fraction`` of the
    epoch budget (same data, architecture, and seed derivation as the run's
    reference model, so it is that model's own training stopped early).  Its
    decoder then reconstructs the full horizon twice: from its own encoded
    latent, and from the run's ODE-extrapolated latent after sign alignment.
    Returns both reconstruction MSEs; ``improved`` reports whether the
    model-solved latent decoded better than the premature model's own.
    """
    if artifacts is None:
        artifacts = run_discovery(cfg)
    features = artifacts.scaled.features[: cfg.t_extrapolate]
    epochs = max(1, int(round(cfg.train.epochs * cfg.premature_fraction)))
    arch = VaeArch(
        input_size=features.shape[1],
        encoder_layers=cfg.encoder_layers,
        encoder_hidden=cfg.encoder_hidden,
        decoder_layers=cfg.decoder_layers,
        decoder_hidden=cfg.decoder_hidden,
    )
    premature_cfg = dataclasses.replace(cfg.train, epochs=epochs, seed=cfg.seed + 2)
    result = lstmvae.train(arch, features, premature_cfg)
    z_own = result.latent.z
    z_ode = artifacts.solution.values
    n = min(z_own.size, z_ode.size)
    sign = 1.0 if signal.pearson(z_ode[:n], z_own[:n]) >= 0 else -1.0
    decoded_own = lstmvae.reconstruct(result.params, z_own[:n])
    decoded_ode = lstmvae.reconstruct(result.params, sign * z_ode[:n])
    mse_own = float(np.mean((decoded_own - features[:n]) ** 2))
    mse_repair = float(np.mean((decoded_ode - features[:n]) ** 2))
    return {
        "premature_epochs": epochs,
        "n_frames": int(n),
        "sign": sign,
        "mse_own_latent": mse_own,
        "mse_repair": mse_repair,
        "improved": bool(mse_repair < mse_own),
    }


@dataclass(frozen=True)
class FrameDensity:
    """KDE of particle positions at one frame, on a shared grid."""

    frame: int
    grid_x: np.ndarray
    grid_y: np.ndarray
    density: np.ndarray
    peak: float


def density_report(
    traj: TrajectorySet,
    frames: list[int],
    grid_size: int = 64,
    bandwidth: float | None = None,
) -> list[FrameDensity]:
    """Kernel-density grids of particle positions at the requested frames.

    All frames share one grid spanning the trajectory's bounding box (plus a
    small margin), so densities are directly comparable across frames.
    """
    if grid_size < 2:
        raise ConfigurationError(f"grid_size must be >= 2, got {grid_size}")
    if not frames:
        raise ConfigurationError("no frames requested")
    for f in frames:
        if not 0 <= f < traj.n_frames:
            raise DataError(f"frame {f} out of range [0, {traj.n_frames})")
    xs = traj.features[:, 0::2]
    ys = traj.features[:, 1::2]
    margin = 0.05
    span_x = max(xs.max() - xs.min(), 1e-12)
    span_y = max(ys.max() - ys.min(), 1e-12)
    gx = np.linspace(xs.min() - margin * span_x, xs.max() + margin * span_x, grid_size)
    gy = np.linspace(ys.min() - margin * span_y, ys.max() + margin * span_y, grid_size)
    out = []
    for f in frames:
        density = signal.kde_density(traj.positions_at(f), gx, gy, bandwidth=bandwidth)
        out.append(FrameDensity(frame=int(f), grid_x=gx, grid_y=gy, density=density,
                                peak=float(density.max())))
    return out


def save_density_csv(fd: FrameDensity, path: str) -> None:
    """Write one density grid as CSV: first row x coordinates, first column y."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y\\x"] + [repr(float(x)) for x in fd.grid_x])
        for iy, y in enumerate(fd.grid_y):
            writer.writerow([repr(float(y))] + [repr(float(v)) for v in fd.density[iy]])
