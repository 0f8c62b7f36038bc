"""Trajectory ingestion: CSV layouts, scaling, smoothing, error reporting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentdyn.errors import ConfigurationError, DataError, ShapeError
from latentdyn.signal import SgConfig, sg_filter
from latentdyn.trajkit import (
    ScaleParams,
    TrajectorySet,
    inverse_scale,
    load_scaler,
    load_trajectories,
    minmax_scale,
    save_scaler,
    save_trajectories,
    smooth_trajectories,
)


def sample_traj(T=7, k=3, seed=0, dt=0.5):
    rng = np.random.default_rng(seed)
    return TrajectorySet(rng.uniform(size=(T, 2 * k)), dt=dt)


# ---------------------------------------------------------------------------
# container
# ---------------------------------------------------------------------------


def test_trajectoryset_defaults():
    t = TrajectorySet(np.zeros((4, 6)))
    assert t.n_frames == 4 and t.n_particles == 3
    assert t.particle_ids == ["1", "2", "3"]
    assert np.array_equal(t.frames, [0, 1, 2, 3])


def test_positions_at_reshapes():
    t = TrajectorySet(np.array([[1.0, 2.0, 3.0, 4.0]]))
    assert np.array_equal(t.positions_at(0), [[1.0, 2.0], [3.0, 4.0]])


def test_trajectoryset_validation():
    with pytest.raises(ShapeError):
        TrajectorySet(np.zeros((4, 5)))  # odd column count
    with pytest.raises(ShapeError):
        TrajectorySet(np.zeros(4))
    with pytest.raises(DataError):
        TrajectorySet(np.array([[1.0, np.nan]]))
    with pytest.raises(ConfigurationError):
        TrajectorySet(np.zeros((2, 2)), dt=0.0)
    with pytest.raises(ShapeError):
        TrajectorySet(np.zeros((2, 4)), particle_ids=["a"])
    with pytest.raises(ShapeError):
        TrajectorySet(np.zeros((2, 2)), frames=np.arange(3))


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


def test_minmax_scale_hand_example():
    x = np.array([[0.0, 10.0], [5.0, 20.0], [10.0, 30.0]])
    scaled, p = minmax_scale(x)
    assert np.allclose(scaled, [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
    assert np.array_equal(p.min, [0.0, 10.0])
    assert np.array_equal(p.max, [10.0, 30.0])


def test_minmax_constant_column_maps_to_zero_and_restores():
    x = np.array([[3.0, 1.0], [3.0, 2.0]])
    scaled, p = minmax_scale(x)
    assert np.array_equal(scaled[:, 0], [0.0, 0.0])
    assert np.allclose(inverse_scale(scaled, p), x)


def test_inverse_scale_column_mismatch():
    _, p = minmax_scale(np.zeros((3, 4)))
    with pytest.raises(ShapeError):
        inverse_scale(np.zeros((3, 2)), p)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_scale_roundtrip_and_range(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(0, 10, size=(8, 4))
    scaled, p = minmax_scale(x)
    assert scaled.min() >= 0.0 and scaled.max() <= 1.0
    assert np.allclose(inverse_scale(scaled, p), x, atol=1e-12)


def test_scaler_json_roundtrip(tmp_path):
    p = ScaleParams([0.1, -2.0], [0.9, 3.5])
    path = str(tmp_path / "scaler.json")
    save_scaler(p, path)
    q = load_scaler(path)
    assert np.array_equal(p.min, q.min) and np.array_equal(p.max, q.max)


def test_scaler_load_errors(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_scaler(str(tmp_path / "nope.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DataError, match="invalid JSON"):
        load_scaler(str(bad))
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"lo": [0], "hi": [1]}')
    with pytest.raises(DataError, match="'min' and 'max'"):
        load_scaler(str(wrong))


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------


def test_smooth_trajectories_matches_per_column_filter():
    traj = sample_traj(T=30, k=2, seed=4)
    cfg = SgConfig(window=7, order=2)
    sm = smooth_trajectories(traj, cfg)
    for j in range(4):
        assert np.allclose(sm.features[:, j], sg_filter(traj.features[:, j], cfg))
    assert sm.dt == traj.dt
    assert sm.particle_ids == traj.particle_ids
    assert np.array_equal(sm.frames, traj.frames)


# ---------------------------------------------------------------------------
# CSV round trips
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("fmt", ["long", "wide"])
def test_save_load_roundtrip_exact(tmp_path, fmt):
    traj = sample_traj(T=9, k=3, seed=1, dt=0.25)
    path = str(tmp_path / f"t_{fmt}.csv")
    save_trajectories(traj, path, fmt=fmt)
    back = load_trajectories(path, dt=0.25)
    assert np.array_equal(back.features, traj.features)  # repr round trip is exact
    assert back.particle_ids == traj.particle_ids
    assert np.array_equal(back.frames, traj.frames)
    assert back.dt == 0.25


def test_format_autodetection(tmp_path):
    traj = sample_traj(T=3, k=1)
    for fmt in ("long", "wide"):
        path = str(tmp_path / f"auto_{fmt}.csv")
        save_trajectories(traj, path, fmt=fmt)
        assert np.array_equal(load_trajectories(path, fmt="auto").features, traj.features)


def test_long_format_ids_by_first_appearance(tmp_path):
    path = tmp_path / "long.csv"
    path.write_text(
        "frame,id,x,y\n"
        "0,b,1.0,2.0\n"
        "0,a,3.0,4.0\n"
        "1,b,5.0,6.0\n"
        "1,a,7.0,8.0\n"
    )
    t = load_trajectories(str(path))
    assert t.particle_ids == ["b", "a"]
    assert np.array_equal(t.features, [[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]])


def test_long_format_unsorted_frames(tmp_path):
    path = tmp_path / "long.csv"
    path.write_text(
        "frame,id,x,y\n"
        "5,a,1.0,1.0\n"
        "2,a,0.0,0.0\n"
    )
    t = load_trajectories(str(path))
    assert np.array_equal(t.frames, [2, 5])
    assert np.array_equal(t.features[:, 0], [0.0, 1.0])


def test_wide_format_unsorted_frames(tmp_path):
    path = tmp_path / "wide.csv"
    path.write_text("frame,x_p,y_p\n3,1.0,1.5\n1,0.0,0.5\n")
    t = load_trajectories(str(path))
    assert np.array_equal(t.frames, [1, 3])
    assert np.array_equal(t.features, [[0.0, 0.5], [1.0, 1.5]])
    assert t.particle_ids == ["p"]


# ---------------------------------------------------------------------------
# malformed input reporting
# ---------------------------------------------------------------------------


def test_missing_file():
    with pytest.raises(DataError, match="not found"):
        load_trajectories("/nonexistent/path.csv")


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataError, match="empty"):
        load_trajectories(str(path))


def test_header_only_long(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("frame,id,x,y\n")
    with pytest.raises(DataError, match="no data rows"):
        load_trajectories(str(path))


def test_unknown_header(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(DataError, match="neither long"):
        load_trajectories(str(path))


def test_incomplete_grid_names_id_and_frame(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text(
        "frame,id,x,y\n"
        "0,a,1.0,1.0\n"
        "0,b,2.0,2.0\n"
        "1,a,3.0,3.0\n"
    )
    with pytest.raises(DataError, match="'b' missing at frame 1"):
        load_trajectories(str(path))


def test_duplicate_long_entry(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("frame,id,x,y\n0,a,1.0,1.0\n0,a,2.0,2.0\n")
    with pytest.raises(DataError, match="duplicate"):
        load_trajectories(str(path))


def test_duplicate_wide_frame(tmp_path):
    path = tmp_path / "dupw.csv"
    path.write_text("frame,x_a,y_a\n0,1.0,1.0\n0,2.0,2.0\n")
    with pytest.raises(DataError, match="duplicate frame 0"):
        load_trajectories(str(path))


def test_non_numeric_cell_reports_row_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("frame,id,x,y\n0,a,oops,1.0\n")
    with pytest.raises(DataError, match="row 2.*'x'.*oops"):
        load_trajectories(str(path))


def test_non_finite_cell_rejected(tmp_path):
    path = tmp_path / "inf.csv"
    path.write_text("frame,id,x,y\n0,a,inf,1.0\n")
    with pytest.raises(DataError, match="not finite"):
        load_trajectories(str(path))


def test_bad_frame_integer(tmp_path):
    path = tmp_path / "fr.csv"
    path.write_text("frame,id,x,y\n1.5,a,1.0,1.0\n")
    with pytest.raises(DataError, match="'frame' is not an integer"):
        load_trajectories(str(path))


def test_wrong_field_count_long(tmp_path):
    path = tmp_path / "n.csv"
    path.write_text("frame,id,x,y\n0,a,1.0\n")
    with pytest.raises(DataError, match="expected 4 fields"):
        load_trajectories(str(path))


def test_bad_wide_header_pairing(tmp_path):
    path = tmp_path / "wh.csv"
    path.write_text("frame,x_a,y_b\n0,1.0,2.0\n")
    with pytest.raises(DataError, match="x_<id>,y_<id>"):
        load_trajectories(str(path))


def test_wide_row_field_count(tmp_path):
    path = tmp_path / "wf.csv"
    path.write_text("frame,x_a,y_a\n0,1.0\n")
    with pytest.raises(DataError, match="expected 3 fields"):
        load_trajectories(str(path))


def test_explicit_format_mismatch(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("frame,x_a,y_a\n0,1.0,2.0\n")
    with pytest.raises(DataError, match="expected long header"):
        load_trajectories(str(path), fmt="long")


def test_unknown_format_argument(tmp_path):
    with pytest.raises(ConfigurationError, match="unknown format"):
        load_trajectories(str(tmp_path / "x.csv"), fmt="tall")
    with pytest.raises(ConfigurationError, match="unknown format"):
        save_trajectories(sample_traj(), str(tmp_path / "x.csv"), fmt="tall")
