import numpy as np
import pytest

from ralm.errors import DataError, OutOfBoundsError
from ralm.trajectory import (door_position, generate_boarding_walk, load_positions_csv,
                             sample_uniform_positions, write_positions_csv)


def test_uniform_positions(cabin):
    assert sample_uniform_positions(cabin, 0, 1) == []
    states = sample_uniform_positions(cabin, 10_000, 1)
    xy = np.array([s.position for s in states])
    assert abs(xy[:, 0].mean() - 15) < 0.3
    assert abs(xy[:, 1].mean() - 1.75) < 0.05
    assert all(cabin.contains(p) for p in xy)
    assert states[:5] == sample_uniform_positions(cabin, 5, 1)


def test_boarding_walk_starts_at_door(cabin):
    states = generate_boarding_walk(cabin, 1, 0.5, seed=3)
    assert states[0].position == door_position(cabin)
    assert states[0].time_step == 0


def test_boarding_walk_in_bounds_and_148_tags(cabin):
    states = generate_boarding_walk(cabin, 148, 0.5, seed=3)
    assert len({s.tag_id for s in states}) == 148
    assert all(cabin.contains(s.position) for s in states)
    assert states == generate_boarding_walk(cabin, 148, 0.5, seed=3)


def test_boarding_walk_steps_are_bounded(cabin):
    states = generate_boarding_walk(cabin, 5, 0.4, seed=0)
    for tag in range(5):
        path = np.array([s.position for s in states if s.tag_id == tag])
        steps = np.hypot(*np.diff(path, axis=0).T)
        assert steps.max() <= 0.4 + 1e-9


def test_csv_roundtrip_and_errors(tmp_path, cabin):
    p = tmp_path / "pos.csv"
    p.write_text("tag_id,time_step,x,y\n0,0,1.5,2.0\n")
    states = load_positions_csv(p, cabin)
    assert len(states) == 1 and states[0].position == (1.5, 2.0)

    p.write_text("tag_id,time_step,x,y\n0,0,99,0\n")
    with pytest.raises(OutOfBoundsError, match="row 1"):
        load_positions_csv(p, cabin)

    p.write_text("tag_id,time_step,x,y\n")
    assert load_positions_csv(p, cabin) == []

    p.write_text("tag_id,time_step,x,y\n0,0,1.0\n")
    with pytest.raises(DataError, match="row 1"):
        load_positions_csv(p, cabin)

    p.write_text("tag_id,time_step,x,y\n0,zero,1.0,1.0\n")
    with pytest.raises(DataError, match="malformed"):
        load_positions_csv(p, cabin)

    with pytest.raises(FileNotFoundError):
        load_positions_csv(tmp_path / "missing.csv", cabin)

    states = generate_boarding_walk(cabin, 3, 1.0, seed=1)
    write_positions_csv(states, p)
    assert load_positions_csv(p, cabin) == states
