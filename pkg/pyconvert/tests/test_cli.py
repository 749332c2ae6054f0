import h5py
import pytest
from click.testing import CliRunner

from demokit.dataset import write_episode
from pyconvert.cli import main
from conftest import make_episode


@pytest.fixture
def runner():
    return CliRunner()


class TestConvertCommand:
    def test_batch_success(self, runner, episode_batch, tmp_path):
        result = runner.invoke(
            main, ["convert", str(episode_batch), str(tmp_path / "store")]
        )
        assert result.exit_code == 0, result.output
        assert "episodes converted: 10" in result.output

    def test_corrupt_batch_exit_1(self, runner, tmp_path):
        d = tmp_path / "eps"
        d.mkdir()
        write_episode(d / "episode_0.hdf5", make_episode(n=3))
        with h5py.File(d / "episode_0.hdf5", "a") as f:
            del f["observations/qpos"]
        result = runner.invoke(main, ["convert", str(d), str(tmp_path / "store")])
        assert result.exit_code == 1
        assert "skipped episode_0.hdf5" in result.output

    def test_missing_input_exit_2(self, runner, tmp_path):
        result = runner.invoke(
            main, ["convert", str(tmp_path / "nope"), str(tmp_path / "store")]
        )
        assert result.exit_code == 2

    def test_bad_chunk_rows_exit_2(self, runner, episode_batch, tmp_path):
        result = runner.invoke(
            main,
            ["convert", str(episode_batch), str(tmp_path / "s"), "--chunk-rows", "0"],
        )
        assert result.exit_code == 2


class TestSummarizeCommand:
    def test_batch_table(self, runner, episode_batch):
        result = runner.invoke(main, ["summarize", str(episode_batch)])
        assert result.exit_code == 0, result.output
        assert "total: 10 episodes" in result.output
        assert "Pose" in result.output

    def test_empty_directory_exit_0(self, runner, tmp_path):
        result = runner.invoke(main, ["summarize", str(tmp_path)])
        assert result.exit_code == 0
        assert "total: 0 episodes" in result.output

    def test_missing_path_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["summarize", str(tmp_path / "nope")])
        assert result.exit_code == 2
