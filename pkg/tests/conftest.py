import pytest

from sobolev_ext.config import Config
from sobolev_ext.globals import Global, reset_rng


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Every test writes into its own directory with a fixed seed and no timestamps."""
    monkeypatch.setattr(Config, "out_dir", str(tmp_path / "out"))
    monkeypatch.setattr(Config, "data_dir", str(tmp_path / "data"))
    monkeypatch.setattr(Config, "deterministic", True)
    monkeypatch.setattr(Config, "seed", 0)
    monkeypatch.setattr(Config, "grids", [16, 32, 64])
    monkeypatch.setattr(Config, "p_values", [2.0])
    reset_rng(0)
    Global.cover_cache.clear()
    yield
    Global.cover_cache.clear()
