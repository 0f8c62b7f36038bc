"""latentdyn: discover governing equations of confined multi-agent systems.

The workflow: simulate or ingest particle trajectories (:mod:`collisim`,
:mod:`trajkit`), compress each frame to a scalar latent with an LSTM
variational autoencoder trained on a from-scratch autodiff engine
(:mod:`lstmvae`, :mod:`gradcore`), then identify sparse polynomial dynamics
of that latent and integrate them forward (:mod:`sindy`).  :mod:`pipeline`
orchestrates full runs, validation, anomaly detection, and state repair;
``latentdyn`` on the command line exposes every stage.
"""

from . import collisim, gradcore, lstmvae, pipeline, signal, sindy, trajkit
from .collisim import Particle, SimConfig
from .errors import (
    ConfigurationError,
    DataError,
    LatentDynError,
    NumericsError,
    ShapeError,
)
from .lstmvae import LatentSeries, TrainConfig, VaeArch, VaeParams
from .pipeline import (
    AnomalyReport,
    RunConfig,
    anomaly_score,
    premature_repair_experiment,
    repair_states,
    run_discovery,
)
from .signal import Series, SgConfig
from .sindy import SindyModel, discover, integrate, model_to_text, stlsq
from .trajkit import ScaleParams, TrajectorySet, load_trajectories, save_trajectories

__version__ = "0.1.0"

__all__ = [
    "collisim",
    "gradcore",
    "lstmvae",
    "pipeline",
    "signal",
    "sindy",
    "trajkit",
    "Particle",
    "SimConfig",
    "LatentDynError",
    "ConfigurationError",
    "DataError",
    "ShapeError",
    "NumericsError",
    "LatentSeries",
    "TrainConfig",
    "VaeArch",
    "VaeParams",
    "AnomalyReport",
    "RunConfig",
    "anomaly_score",
    "premature_repair_experiment",
    "repair_states",
    "run_discovery",
    "Series",
    "SgConfig",
    "SindyModel",
    "discover",
    "integrate",
    "model_to_text",
    "stlsq",
    "ScaleParams",
    "TrajectorySet",
    "load_trajectories",
    "save_trajectories",
    "__version__",
]
