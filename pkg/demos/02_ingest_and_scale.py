"""Load a trajectory CSV, smooth it, scale it to [0, 1], and round-trip back.

Run 01_simulate_particles.py first (it writes demo_trajectory.csv), or point
the loader at any long- or wide-format trajectory file.
"""

import os

import numpy as np

from latentdyn.collisim import SimConfig, run
from latentdyn.signal import SgConfig
from latentdyn.trajkit import (
    TrajectorySet,
    inverse_scale,
    load_scaler,
    load_trajectories,
    minmax_scale,
    save_scaler,
    save_trajectories,
    smooth_trajectories,
)

if not os.path.exists("demo_trajectory.csv"):
    features = run(SimConfig(n_particles=5, dt=0.005, n_steps=2000, seed=42))
    save_trajectories(TrajectorySet(features, dt=0.005), "demo_trajectory.csv", fmt="long")
    print("(generated demo_trajectory.csv)")

traj = load_trajectories("demo_trajectory.csv", dt=0.005)
print(f"loaded {traj.n_frames} frames x {traj.n_particles} particles "
      f"({traj.features.shape[1]} feature columns)")

# Light smoothing knocks down frame-to-frame jitter without moving the path.
smoothed = smooth_trajectories(traj, SgConfig(window=31, order=2))
delta = float(np.abs(smoothed.features - traj.features).max())
print(f"smoothed with a 31-point quadratic local fit; max point shift {delta:.4f}")

# Min-max scaling maps every feature column into [0, 1] and remembers how.
scaled_values, scaler = minmax_scale(smoothed.features)
print(f"scaled range: [{scaled_values.min():.3f}, {scaled_values.max():.3f}]")

save_scaler(scaler, "demo_scaler.json")
restored = inverse_scale(scaled_values, load_scaler("demo_scaler.json"))
roundtrip = float(np.abs(restored - smoothed.features).max())
print(f"saved scaler to demo_scaler.json; inverse transform error {roundtrip:.2e}")

scaled = TrajectorySet(scaled_values, dt=traj.dt)
save_trajectories(scaled, "demo_scaled.csv", fmt="wide")
print("wrote demo_scaled.csv (wide format, one column pair per particle)")
