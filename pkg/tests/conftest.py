import numpy as np
import pytest

from demokit.geometry import Pose, quat_from_axis_angle, quat_normalize


def random_pose(rng) -> Pose:
    return Pose(rng.uniform(-1, 1, 3), quat_normalize(rng.normal(size=4)))


def random_trajectory(rng, n) -> list[Pose]:
    return [random_pose(rng) for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rot_z(deg: float):
    return quat_from_axis_angle([0, 0, 1], np.deg2rad(deg))
