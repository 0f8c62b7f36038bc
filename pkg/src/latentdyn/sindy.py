"""Sparse identification of scalar latent dynamics.

Candidate right-hand sides are polynomials in the latent value z; the
active terms are selected by sequentially thresholded least squares.
The resulting model ``dz/dt = sum_d xi_d * z**d`` can be integrated
forward with a fixed-step fourth-order Runge-Kutta scheme.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import signal
from .errors import ConfigurationError, DataError, NumericsError, ShapeError

__all__ = [
    "build_library",
    "stlsq",
    "SindyModel",
    "discover",
    "IntegrationResult",
    "integrate",
    "model_to_text",
]

DIVERGENCE_LIMIT = 1e6


def build_library(z: np.ndarray, degree: int) -> np.ndarray:
    """Polynomial feature matrix ``[1, z, z**2, ..., z**degree]``, one row per sample."""
    zv = np.asarray(z, dtype=np.float64)
    if zv.ndim != 1:
        raise ShapeError(f"build_library expects a 1-D array, got shape {zv.shape}")
    if degree < 1:
        raise ConfigurationError(f"degree must be >= 1, got {degree}")
    return zv[:, None] ** np.arange(degree + 1)


def stlsq(
    theta: np.ndarray,
    dzdt: np.ndarray,
    threshold: float,
    max_iter: int = 20,
) -> tuple[np.ndarray, dict]:
    """Sequentially thresholded least squares.

    Starting from the plain least-squares solution, coefficients with
    magnitude at or below ``threshold`` are zeroed and the remaining
    (active) columns are refit, until the active set stops changing or
    ``max_iter`` passes elapse.

    Returns
    -------
    xi : (n_terms,) array
        Sparse coefficient vector.
    info : dict
        ``iterations``, ``residual`` (RMS of ``theta @ xi - dzdt``),
        ``rank_deficient`` (an active subproblem was rank deficient and
        solved in the minimum-norm sense), and ``empty`` (every
        coefficient was thresholded away).
    """
    th = np.asarray(theta, dtype=np.float64)
    y = np.asarray(dzdt, dtype=np.float64).reshape(-1)
    if th.ndim != 2 or th.shape[0] != y.size:
        raise ShapeError(f"library {th.shape} incompatible with targets {y.shape}")
    if th.shape[0] <= th.shape[1]:
        raise ConfigurationError(
            f"need more samples than library terms: {th.shape[0]} rows for "
            f"{th.shape[1]} terms"
        )
    if threshold < 0:
        raise ConfigurationError(f"threshold must be >= 0, got {threshold}")

    rank_deficient = False

    def lstsq_cols(cols: np.ndarray) -> np.ndarray:
        nonlocal rank_deficient
        sub = th[:, cols]
        coef, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
        if rank < sub.shape[1]:
            rank_deficient = True
        return coef

    xi = np.zeros(th.shape[1])
    active = np.ones(th.shape[1], dtype=bool)
    xi[active] = lstsq_cols(active)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        keep = np.abs(xi) > threshold
        if np.array_equal(keep, active):
            break
        active = keep
        xi = np.zeros(th.shape[1])
        if not active.any():
            break
        xi[active] = lstsq_cols(active)
    empty = not active.any()
    if empty:
        warnings.warn("stlsq eliminated every term; the model is dz/dt = 0", stacklevel=2)
    if rank_deficient:
        warnings.warn("stlsq met a rank-deficient subproblem; used minimum-norm fit",
                      stacklevel=2)
    residual = float(np.sqrt(np.mean((th @ xi - y) ** 2)))
    return xi, {
        "iterations": iterations,
        "residual": residual,
        "rank_deficient": rank_deficient,
        "empty": empty,
    }


@dataclass
class SindyModel:
    """A discovered polynomial model ``dz/dt = sum_d coefficients[d] * z**d``."""

    coefficients: np.ndarray
    threshold: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64).reshape(-1)
        if c.size == 0:
            raise ShapeError("coefficients must contain at least the constant term")
        self.coefficients = c

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def predict(self, z):
        """Evaluate dz/dt at ``z`` (scalar or array, applied elementwise)."""
        zv = np.asarray(z, dtype=np.float64)
        out = np.polynomial.polynomial.polyval(zv, self.coefficients)
        return float(out) if zv.ndim == 0 else out

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "threshold": self.threshold,
            "coefficients": self.coefficients.tolist(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SindyModel":
        try:
            model = cls(
                coefficients=np.asarray(obj["coefficients"], dtype=np.float64),
                threshold=float(obj["threshold"]),
                provenance=dict(obj.get("provenance", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"malformed model record: {e}") from None
        if int(obj.get("degree", model.degree)) != model.degree:
            raise DataError(
                f"model record degree {obj['degree']} does not match "
                f"{model.coefficients.size} coefficients"
            )
        return model

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "SindyModel":
        if not os.path.exists(path):
            raise DataError(f"model file not found: {path}")
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}: invalid JSON: {e}") from None
        return cls.from_dict(obj)


def discover(
    z: signal.Series,
    degree: int = 3,
    threshold: float = 0.1,
    sg: signal.SgConfig | None = signal.SgConfig(window=51, order=1),
) -> SindyModel:
    """Identify sparse polynomial dynamics from a latent time series.

    The series is Savitzky-Golay filtered (pass ``sg=None`` to skip), its
    time derivative estimated by finite differences, and the coefficient
    vector fit by :func:`stlsq` on the polynomial library of the filtered
    values.
    """
    values = z.values
    if sg is not None:
        values = signal.sg_filter(values, sg)
    dzdt = signal.estimate_derivative(values, z.dt)
    theta = build_library(values, degree)
    xi, info = stlsq(theta, dzdt, threshold)
    provenance = {
        "n_samples": int(values.size),
        "dt": float(z.dt),
        "sg_window": None if sg is None else sg.window,
        "sg_order": None if sg is None else sg.order,
        "stlsq": info,
    }
    return SindyModel(coefficients=xi, threshold=threshold, provenance=provenance)


@dataclass(frozen=True)
class IntegrationResult:
    """RK4 solution samples (``values[0]`` is the initial condition) plus a divergence flag."""

    values: np.ndarray
    dt: float
    diverged: bool = False


def integrate(model: SindyModel, z0: float, dt: float, n_steps: int) -> IntegrationResult:
    """Integrate ``dz/dt = model.predict(z)`` with fixed-step RK4.

    Returns ``n_steps + 1`` samples starting at ``z0``.  If ``|z|`` exceeds
    ``1e6`` the solution is truncated at the last finite sample and flagged
    ``diverged`` instead of raising.
    """
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    z0 = float(z0)
    if not np.isfinite(z0) or not np.isfinite(model.predict(z0)):
        raise DataError(f"initial condition {z0!r} gives a non-finite right-hand side")

    f = model.predict
    out = np.empty(n_steps + 1)
    out[0] = z0
    z = z0
    for i in range(1, n_steps + 1):
        k1 = f(z)
        k2 = f(z + 0.5 * dt * k1)
        k3 = f(z + 0.5 * dt * k2)
        k4 = f(z + dt * k3)
        z = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(z) or abs(z) > DIVERGENCE_LIMIT:
            return IntegrationResult(values=out[:i].copy(), dt=dt, diverged=True)
        out[i] = z
    return IntegrationResult(values=out, dt=dt, diverged=False)


def model_to_text(model: SindyModel) -> str:
    """Human-readable equation, e.g. ``dz/dt = -3.266 - 1.232 z^2``.

    Terms appear in ascending degree with three-decimal coefficients;
    zero coefficients are skipped; the empty model prints ``dz/dt = 0``.
    """
    parts: list[str] = []
    for d, c in enumerate(model.coefficients):
        if c == 0.0:
            continue
        mag = f"{abs(c):.3f}"
        var = "" if d == 0 else " z" if d == 1 else f" z^{d}"
        if not parts:
            sign = "-" if c < 0 else ""
            parts.append(f"{sign}{mag}{var}")
        else:
            parts.append(f"{'-' if c < 0 else '+'} {mag}{var}")
    if not parts:
        return "dz/dt = 0"
    return "dz/dt = " + " ".join(parts)
