"""Access to the topology files bundled as package data."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

TWO_PATH_FILE = "two_path.yaml"
METRO_FILE = "metro_35x17.yaml"


def shipped_topology_path(name: str) -> Path:
    """Filesystem path of a bundled topology file (e.g. ``metro_35x17.yaml``)."""
    resource = files("latsim").joinpath("data", "topologies", name)
    path = Path(str(resource))
    if not path.exists():
        raise FileNotFoundError(f"bundled topology '{name}' not found at {path}")
    return path
