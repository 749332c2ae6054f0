import numpy as np
import pytest

from demokit.dataset import Episode, write_episode


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_episode(n=5, seed=0, widths=True, images_embedded=False):
    rng = np.random.default_rng(seed)
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    qpos = np.hstack([rng.uniform(-1, 1, (n, 3)), quats])
    if images_embedded:
        images = rng.integers(0, 256, (n, 8, 6, 3), dtype=np.uint8)
    else:
        images = [f"frame_{i:06d}.jpg" for i in range(n)]
    return Episode(
        qpos=qpos,
        action=qpos.copy(),
        images=images,
        gripper_width=rng.uniform(0, 80, (n, 1)) if widths else None,
    )


@pytest.fixture
def episode_batch(tmp_path):
    """A directory of 10 varied episode files."""
    d = tmp_path / "episodes"
    d.mkdir()
    for i in range(10):
        write_episode(
            d / f"episode_{i}.hdf5",
            make_episode(n=5 + i, seed=i, widths=(i % 2 == 0), images_embedded=(i % 3 == 0)),
        )
    return d
