"""PINN surrogates and a hybrid PINN/multigrid solver for the 2-D Poisson equation."""

from importlib.resources import files
from pathlib import Path

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Path of a file shipped in ``pinnmg/data`` (e.g. ``pretrain.ckpt``)."""
    return Path(str(files(__package__) / "data" / name))
