"""LSTM variational autoencoder compressing multi-particle states to a scalar latent.

The encoder runs stacked LSTM layers over the feature sequence and maps each
timestep's hidden state through two linear heads to a latent mean and
log-variance.  Sampling uses the reparameterization trick (mean plus noise
scaled by the standard deviation) so gradients flow through; inference mode
uses zero noise, making the latent series the per-timestep mean.  The decoder
expands the scalar latent back through its own LSTM stack to the feature
dimension.  All computation is recorded on :mod:`latentdyn.gradcore` graphs.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import gradcore as gc
from .errors import ConfigurationError, DataError, NumericsError, ShapeError

__all__ = [
    "VaeArch",
    "TrainConfig",
    "LstmLayerParams",
    "LinearParams",
    "VaeParams",
    "LatentSeries",
    "LossTerms",
    "LossRecord",
    "TrainResult",
    "init_params",
    "lstm_cell_step",
    "encode",
    "reparameterize",
    "decode",
    "elbo_loss",
    "train",
    "encode_latent",
    "reconstruct",
    "save_params",
    "load_params",
    "save_loss_history",
    "load_loss_history",
]


@dataclass(frozen=True)
class VaeArch:
    """Network dimensions.  The latent is a single scalar per timestep.

    ``decoder_layers`` / ``decoder_hidden`` default to mirroring the encoder.
    """

    input_size: int
    encoder_layers: int = 1
    encoder_hidden: int = 32
    latent_size: int = 1
    decoder_layers: int | None = None
    decoder_hidden: int | None = None

    def __post_init__(self):
        if self.latent_size != 1:
            raise ConfigurationError(f"latent_size is fixed at 1, got {self.latent_size}")
        if self.input_size < 1 or self.encoder_hidden < 1 or self.encoder_layers < 1:
            raise ConfigurationError("input_size, encoder_hidden, encoder_layers must be >= 1")
        if self.decoder_layers is None:
            object.__setattr__(self, "decoder_layers", self.encoder_layers)
        if self.decoder_hidden is None:
            object.__setattr__(self, "decoder_hidden", self.encoder_hidden)
        if self.decoder_hidden < 1 or self.decoder_layers < 1:
            raise ConfigurationError("decoder_hidden and decoder_layers must be >= 1")

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "encoder_layers": self.encoder_layers,
            "encoder_hidden": self.encoder_hidden,
            "latent_size": self.latent_size,
            "decoder_layers": self.decoder_layers,
            "decoder_hidden": self.decoder_hidden,
        }


@dataclass(frozen=True)
class TrainConfig:
    """Training settings; identical config plus identical data gives identical parameters."""

    epochs: int = 1000
    learning_rate: float = 1e-3
    kl_weight: float = 1e-3
    recon_loss: str = "mse"
    seed: int = 0
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.kl_weight < 0:
            raise ConfigurationError(f"kl_weight must be >= 0, got {self.kl_weight}")
        if self.recon_loss not in ("mse", "smooth_l1"):
            raise ConfigurationError(
                f"recon_loss must be 'mse' or 'smooth_l1', got {self.recon_loss!r}"
            )
        if self.clip_norm <= 0:
            raise ConfigurationError(f"clip_norm must be > 0, got {self.clip_norm}")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "kl_weight": self.kl_weight,
            "recon_loss": self.recon_loss,
            "seed": self.seed,
            "clip_norm": self.clip_norm,
        }


@dataclass
class LstmLayerParams:
    """One LSTM layer: per-gate weights over the concatenation [h_prev, x_t]."""

    w_i: gc.Node
    w_f: gc.Node
    w_o: gc.Node
    w_c: gc.Node
    b_i: gc.Node
    b_f: gc.Node
    b_o: gc.Node
    b_c: gc.Node
    hidden_size: int
    input_size: int

    def __post_init__(self):
        expect_w = (self.hidden_size, self.hidden_size + self.input_size)
        expect_b = (1, self.hidden_size)
        for name in ("w_i", "w_f", "w_o", "w_c"):
            node = getattr(self, name)
            if node.value.shape != expect_w:
                raise ShapeError(f"{name} must have shape {expect_w}, got {node.value.shape}")
        for name in ("b_i", "b_f", "b_o", "b_c"):
            node = getattr(self, name)
            if node.value.shape != expect_b:
                raise ShapeError(f"{name} must have shape {expect_b}, got {node.value.shape}")

    def nodes(self) -> list[gc.Node]:
        return [self.w_i, self.b_i, self.w_f, self.b_f,
                self.w_o, self.b_o, self.w_c, self.b_c]


@dataclass
class LinearParams:
    """A dense affine map: weight of shape (fan_in, fan_out) plus a bias row."""

    w: gc.Node
    b: gc.Node

    def nodes(self) -> list[gc.Node]:
        return [self.w, self.b]


@dataclass
class VaeParams:
    """All trainable leaves of the autoencoder, in a fixed traversal order."""

    arch: VaeArch
    encoder: list[LstmLayerParams]
    head_mu: LinearParams
    head_logvar: LinearParams
    dec_in: LinearParams
    decoder: list[LstmLayerParams]
    dec_out: LinearParams
    train_config: TrainConfig | None = None

    def all_params(self) -> list[gc.Node]:
        out: list[gc.Node] = []
        for layer in self.encoder:
            out += layer.nodes()
        out += self.head_mu.nodes() + self.head_logvar.nodes() + self.dec_in.nodes()
        for layer in self.decoder:
            out += layer.nodes()
        out += self.dec_out.nodes()
        return out


@dataclass(frozen=True)
class LatentSeries:
    """Per-timestep latent statistics; in inference mode ``z`` equals ``mu``."""

    z: np.ndarray
    mu: np.ndarray
    logvar: np.ndarray

    def __post_init__(self):
        for name in ("z", "mu", "logvar"):
            v = np.asarray(getattr(self, name), dtype=np.float64).reshape(-1)
            if not np.isfinite(v).all():
                raise NumericsError(f"latent series field {name} contains non-finite values")
            object.__setattr__(self, name, v)
        if not (self.z.size == self.mu.size == self.logvar.size):
            raise ShapeError("latent series fields must have equal lengths")

    def __len__(self):
        return self.z.size


class LossTerms(NamedTuple):
    total: gc.Node
    recon: gc.Node
    kl: gc.Node


class LossRecord(NamedTuple):
    epoch: int
    recon: float
    kl: float
    total: float


@dataclass
class TrainResult:
    params: VaeParams
    latent: LatentSeries
    history: list[LossRecord]


# ---------------------------------------------------------------------------
# parameter initialization
# ---------------------------------------------------------------------------


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _init_layer(rng: np.random.Generator, hidden: int, inp: int) -> LstmLayerParams:
    fan_in = hidden + inp
    kw = {}
    for gate in ("i", "f", "o", "c"):
        kw[f"w_{gate}"] = gc.parameter(_uniform(rng, (hidden, fan_in), fan_in))
        kw[f"b_{gate}"] = gc.parameter(_uniform(rng, (1, hidden), fan_in))
    return LstmLayerParams(hidden_size=hidden, input_size=inp, **kw)


def _init_linear(rng: np.random.Generator, fan_in: int, fan_out: int) -> LinearParams:
    return LinearParams(
        w=gc.parameter(_uniform(rng, (fan_in, fan_out), fan_in)),
        b=gc.parameter(_uniform(rng, (1, fan_out), fan_in)),
    )


def init_params(arch: VaeArch, rng: np.random.Generator) -> VaeParams:
    """Seeded uniform initialization, bound 1/sqrt(fan_in) per tensor."""
    encoder = []
    inp = arch.input_size
    for _ in range(arch.encoder_layers):
        encoder.append(_init_layer(rng, arch.encoder_hidden, inp))
        inp = arch.encoder_hidden
    head_mu = _init_linear(rng, arch.encoder_hidden, 1)
    head_logvar = _init_linear(rng, arch.encoder_hidden, 1)
    dec_in = _init_linear(rng, 1, arch.decoder_hidden)
    decoder = []
    inp = arch.decoder_hidden
    for _ in range(arch.decoder_layers):
        decoder.append(_init_layer(rng, arch.decoder_hidden, inp))
        inp = arch.decoder_hidden
    dec_out = _init_linear(rng, arch.decoder_hidden, arch.input_size)
    return VaeParams(
        arch=arch, encoder=encoder, head_mu=head_mu, head_logvar=head_logvar,
        dec_in=dec_in, decoder=decoder, dec_out=dec_out,
    )


# ---------------------------------------------------------------------------
# forward passes (operate inside an active gradcore.Graph)
# ---------------------------------------------------------------------------


def _stack_gates(layer: LstmLayerParams) -> tuple[gc.Node, gc.Node]:
    """Fuse the four gate maps into one (hidden+input, 4*hidden) matrix + bias row."""
    wt = gc.concat_cols(
        gc.transpose(layer.w_i), gc.transpose(layer.w_f),
        gc.transpose(layer.w_o), gc.transpose(layer.w_c),
    )
    b = gc.concat_cols(layer.b_i, layer.b_f, layer.b_o, layer.b_c)
    return wt, b


def _cell(wt: gc.Node, b: gc.Node, hidden: int,
          x_t: gc.Node, h_prev: gc.Node, c_prev: gc.Node) -> tuple[gc.Node, gc.Node]:
    hx = gc.concat_cols(h_prev, x_t)
    pre = gc.add(gc.matmul(hx, wt), b)
    i = gc.sigmoid(gc.slice_cols(pre, 0, hidden))
    f = gc.sigmoid(gc.slice_cols(pre, hidden, 2 * hidden))
    o = gc.sigmoid(gc.slice_cols(pre, 2 * hidden, 3 * hidden))
    g = gc.tanh(gc.slice_cols(pre, 3 * hidden, 4 * hidden))
    c_t = gc.add(gc.mul(f, c_prev), gc.mul(i, g))
    h_t = gc.mul(o, gc.tanh(c_t))
    return h_t, c_t


def _ensure_node(x, rows_as_is: bool = True) -> gc.Node:
    if isinstance(x, gc.Node):
        return x
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1 and not rows_as_is:
        a = a.reshape(-1, 1)
    return gc.constant(a)


def lstm_cell_step(params: LstmLayerParams, x_t, h_prev, c_prev) -> tuple[gc.Node, gc.Node]:
    """One LSTM step: gates i, f, o from sigmoids, candidate from tanh.

    ``c_t = f * c_prev + i * tanh(w_c [h_prev, x_t] + b_c)`` and
    ``h_t = o * tanh(c_t)``.  Inputs may be nodes or arrays of shape
    (1, input_size) / (1, hidden_size); requires an active graph.
    """
    x_t, h_prev, c_prev = (_ensure_node(v) for v in (x_t, h_prev, c_prev))
    wt, b = _stack_gates(params)
    return _cell(wt, b, params.hidden_size, x_t, h_prev, c_prev)


def _run_stack(layers: list[LstmLayerParams], rows: list[gc.Node]) -> gc.Node:
    """Run stacked LSTM layers over per-timestep row nodes; returns (T, hidden) top states."""
    stacked = [_stack_gates(layer) for layer in layers]
    h = [gc.constant(np.zeros((1, layer.hidden_size))) for layer in layers]
    c = [gc.constant(np.zeros((1, layer.hidden_size))) for layer in layers]
    tops = []
    for x in rows:
        for idx, layer in enumerate(layers):
            wt, b = stacked[idx]
            h[idx], c[idx] = _cell(wt, b, layer.hidden_size, x, h[idx], c[idx])
            x = h[idx]
        tops.append(x)
    return gc.concat_rows(*tops)


def _as_rows(states) -> list[gc.Node]:
    """Per-timestep (1, n) row nodes from a matrix node, array, or ready-made list."""
    if isinstance(states, list):
        return states
    x = _ensure_node(states)
    return [gc.slice_rows(x, t, t + 1) for t in range(x.value.shape[0])]


def encode(params: VaeParams, states) -> tuple[gc.Node, gc.Node]:
    """Encoder forward pass: (T, 2k) states to per-timestep latent mean and log-variance.

    ``states`` may be a (T, 2k) array, an equivalent node, or a list of
    (1, 2k) row nodes.  Returns ``(mu, logvar)`` as (T, 1) nodes; requires
    an active graph.
    """
    rows = _as_rows(states)
    if not rows:
        raise ShapeError("encode needs at least one timestep")
    if rows[0].value.shape[1] != params.arch.input_size:
        raise ShapeError(
            f"encode expects {params.arch.input_size} feature columns, "
            f"got {rows[0].value.shape[1]}"
        )
    hidden = _run_stack(params.encoder, rows)
    mu = gc.add(gc.matmul(hidden, params.head_mu.w), params.head_mu.b)
    logvar = gc.add(gc.matmul(hidden, params.head_logvar.w), params.head_logvar.b)
    return mu, logvar


def reparameterize(mu: gc.Node, logvar: gc.Node, noise) -> gc.Node:
    """Differentiable sampling: ``z = mu + exp(0.5 * logvar) * noise``."""
    eps = _ensure_node(noise, rows_as_is=False)
    if eps.value.shape != mu.value.shape:
        raise ShapeError(f"noise shape {eps.value.shape} != mu shape {mu.value.shape}")
    return gc.add(mu, gc.mul(gc.exp(gc.scale(logvar, 0.5)), eps))


def decode(params: VaeParams, z) -> gc.Node:
    """Decoder forward pass: (T, 1) latent to (T, 2k) reconstructed states.

    The scalar latent is linearly expanded to the decoder width at every
    timestep, run through the decoder LSTM stack, and projected to the
    feature dimension.  Requires an active graph.
    """
    z = _ensure_node(z, rows_as_is=False)
    if z.value.shape[1] != 1:
        raise ShapeError(f"decode expects a (T, 1) latent, got {z.value.shape}")
    u = gc.add(gc.matmul(z, params.dec_in.w), params.dec_in.b)
    hidden = _run_stack(params.decoder, _as_rows(u))
    return gc.add(gc.matmul(hidden, params.dec_out.w), params.dec_out.b)


def elbo_loss(x, x_recon: gc.Node, mu: gc.Node, logvar: gc.Node,
              cfg: TrainConfig) -> LossTerms:
    """Reconstruction term plus ``kl_weight`` times the Gaussian KL term.

    KL to the standard normal, mean-reduced:
    ``-0.5 * mean(1 + logvar - mu**2 - exp(logvar))``.
    Returns the total along with both terms (all scalar nodes).
    """
    x = _ensure_node(x)
    if cfg.recon_loss == "mse":
        recon = gc.mse_loss(x_recon, x)
    else:
        recon = gc.smooth_l1_loss(x_recon, x)
    ones = gc.constant(np.ones_like(mu.value))
    inner = gc.sub(gc.sub(gc.add(ones, logvar), gc.mul(mu, mu)), gc.exp(logvar))
    kl = gc.scale(gc.mean_all(inner), -0.5)
    total = gc.add(recon, gc.scale(kl, cfg.kl_weight))
    return LossTerms(total=total, recon=recon, kl=kl)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def _clip_global_norm(params: list[gc.Node], max_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(p.grad * p.grad))
                        for p in params if p.grad is not None))
    if total > max_norm:
        factor = max_norm / total
        for p in params:
            if p.grad is not None:
                p.grad *= factor


class _Adam:
    """Adaptive-moment estimation with bias correction."""

    def __init__(self, params: list[gc.Node], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad if p.grad is not None else 0.0
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.value -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


def _features_of(data) -> np.ndarray:
    features = getattr(data, "features", data)
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ShapeError(f"training data must be a (T, features) matrix, got {f.shape}")
    return f


def train(arch: VaeArch, data, cfg: TrainConfig) -> TrainResult:
    """Full-sequence gradient training (batch of one sequence).

    Each epoch rebuilds the forward graph: encode, reparameterize with
    fresh seeded normal noise, decode, and minimize the weighted ELBO with
    adaptive-moment updates under a global gradient-norm clip.  A non-finite
    loss aborts with the failing epoch.  Fixed seed implies an identical
    parameter trajectory and loss history.
    """
    features = _features_of(data)
    if features.min() < -1e-9 or features.max() > 1.0 + 1e-9:
        warnings.warn(
            f"training data outside [0, 1] (range [{features.min():.3g}, "
            f"{features.max():.3g}]); scale it first for best results",
            stacklevel=2,
        )
    if features.shape[1] != arch.input_size:
        raise ShapeError(
            f"arch.input_size is {arch.input_size} but data has {features.shape[1]} columns"
        )
    rng = np.random.default_rng(cfg.seed)
    params = init_params(arch, rng)
    params.train_config = cfg
    leaves = params.all_params()
    optimizer = _Adam(leaves, cfg.learning_rate)
    x_const = gc.constant(features)
    n_steps = features.shape[0]
    # Row views of the input are leaves too; build them once, reuse every epoch.
    x_rows = [gc.constant(features[t:t + 1]) for t in range(n_steps)]
    history: list[LossRecord] = []
    for epoch in range(1, cfg.epochs + 1):
        noise = rng.standard_normal((n_steps, 1))
        with gc.Graph():
            mu, logvar = encode(params, x_rows)
            z = reparameterize(mu, logvar, noise)
            x_recon = decode(params, z)
            total, recon, kl = elbo_loss(x_const, x_recon, mu, logvar, cfg)
            if not np.isfinite(total.value[0, 0]):
                raise NumericsError(f"training diverged: non-finite loss at epoch {epoch}")
            gc.zero_grad(leaves)
            gc.backward(total)
        _clip_global_norm(leaves, cfg.clip_norm)
        optimizer.step()
        history.append(LossRecord(
            epoch=epoch,
            recon=float(recon.value[0, 0]),
            kl=float(kl.value[0, 0]),
            total=float(total.value[0, 0]),
        ))
    return TrainResult(params=params, latent=encode_latent(params, features), history=history)


def encode_latent(params: VaeParams, data) -> LatentSeries:
    """Inference-mode latent extraction: zero noise, so z equals the mean."""
    features = _features_of(data)
    with gc.Graph():
        mu, logvar = encode(params, features)
        return LatentSeries(
            z=mu.value.ravel().copy(),
            mu=mu.value.ravel().copy(),
            logvar=logvar.value.ravel().copy(),
        )


def reconstruct(params: VaeParams, latent: np.ndarray) -> np.ndarray:
    """Inference-mode decode of a latent vector; returns a (T, 2k) array."""
    with gc.Graph():
        return decode(params, np.asarray(latent, dtype=np.float64)).value.copy()


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

_FORMAT = "latentdyn-vae-v1"


def _weights_dict(params: VaeParams) -> dict:
    out: dict[str, gc.Node] = {}
    for side, layers in (("encoder", params.encoder), ("decoder", params.decoder)):
        for idx, layer in enumerate(layers):
            for name in ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c"):
                out[f"{side}.{idx}.{name}"] = getattr(layer, name)
    for name, lin in (("head_mu", params.head_mu), ("head_logvar", params.head_logvar),
                      ("dec_in", params.dec_in), ("dec_out", params.dec_out)):
        out[f"{name}.w"] = lin.w
        out[f"{name}.b"] = lin.b
    return out


def save_params(params: VaeParams, path: str) -> None:
    """Persist parameters, architecture, and training config as one JSON document."""
    doc = {
        "format": _FORMAT,
        "arch": params.arch.to_dict(),
        "train_config": None if params.train_config is None else params.train_config.to_dict(),
        "weights": {
            name: {"shape": list(node.value.shape), "data": node.value.ravel().tolist()}
            for name, node in _weights_dict(params).items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_params(path: str) -> VaeParams:
    """Load parameters saved by :func:`save_params`."""
    if not os.path.exists(path):
        raise DataError(f"parameter file not found: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise DataError(f"{path}: not a {_FORMAT} parameter file")
    try:
        arch = VaeArch(**doc["arch"])
        cfg = None if doc.get("train_config") is None else TrainConfig(**doc["train_config"])
        weights = doc["weights"]
    except (KeyError, TypeError) as e:
        raise DataError(f"{path}: malformed parameter file: {e}") from None

    def node_of(name: str) -> gc.Node:
        try:
            rec = weights[name]
            arr = np.asarray(rec["data"], dtype=np.float64).reshape(rec["shape"])
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"{path}: bad weight record {name!r}: {e}") from None
        return gc.parameter(arr)

    def layer_of(side: str, idx: int, hidden: int, inp: int) -> LstmLayerParams:
        kw = {name: node_of(f"{side}.{idx}.{name}")
              for name in ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c")}
        return LstmLayerParams(hidden_size=hidden, input_size=inp, **kw)

    encoder, inp = [], arch.input_size
    for idx in range(arch.encoder_layers):
        encoder.append(layer_of("encoder", idx, arch.encoder_hidden, inp))
        inp = arch.encoder_hidden
    decoder, inp = [], arch.decoder_hidden
    for idx in range(arch.decoder_layers):
        decoder.append(layer_of("decoder", idx, arch.decoder_hidden, inp))
        inp = arch.decoder_hidden
    return VaeParams(
        arch=arch,
        encoder=encoder,
        head_mu=LinearParams(node_of("head_mu.w"), node_of("head_mu.b")),
        head_logvar=LinearParams(node_of("head_logvar.w"), node_of("head_logvar.b")),
        dec_in=LinearParams(node_of("dec_in.w"), node_of("dec_in.b")),
        decoder=decoder,
        dec_out=LinearParams(node_of("dec_out.w"), node_of("dec_out.b")),
        train_config=cfg,
    )


def save_loss_history(history: list[LossRecord], path: str) -> None:
    """Write the per-epoch loss history as CSV (epoch, recon, kl, total)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "recon", "kl", "total"])
        for rec in history:
            writer.writerow([rec.epoch, repr(rec.recon), repr(rec.kl), repr(rec.total)])


def load_loss_history(path: str) -> list[LossRecord]:
    """Read a loss-history CSV written by :func:`save_loss_history`."""
    if not os.path.exists(path):
        raise DataError(f"loss history file not found: {path}")
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["epoch", "recon", "kl", "total"]:
            raise DataError(f"{path}: expected header epoch,recon,kl,total, got {header!r}")
        for row in reader:
            if not row:
                continue
            try:
                out.append(LossRecord(int(row[0]), float(row[1]), float(row[2]), float(row[3])))
            except (IndexError, ValueError) as e:
                raise DataError(f"{path}: malformed row {row!r}: {e}") from None
    return out
