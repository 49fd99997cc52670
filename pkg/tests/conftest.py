import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # tests import the oracles module

from latsim.datafiles import shipped_topology_path
from latsim.delays import calibrate_path
from latsim.topology import LinkSpec, NodeSpec, Role, Topology, load_topology, validate_topology


@pytest.fixture(scope="session")
def blue_model():
    """Short-path model: 44 us propagation, three hot stages summing to 19 us."""
    return calibrate_path(44.0, 19.0, 82.0, 0.937).model


@pytest.fixture(scope="session")
def green_model():
    """Long-path model: 68 us propagation, four cool stages summing to 5 us."""
    return calibrate_path(68.0, 5.0, 82.0, 0.995).model


@pytest.fixture(scope="session")
def two_path_topo():
    return load_topology(shipped_topology_path("two_path.yaml"))


@pytest.fixture(scope="session")
def metro_topo():
    return load_topology(shipped_topology_path("metro_35x17.yaml"))


def make_topology(name, nodes, links):
    """nodes: (id, role) pairs; links: (id, a, b, length, load[, service]) tuples."""
    topo = Topology(
        name,
        tuple(NodeSpec(nid, Role(role)) for nid, role in nodes),
        tuple(LinkSpec(*spec) for spec in links),
    )
    validate_topology(topo)
    return topo


@pytest.fixture
def pair_topo():
    """Single ACO-MACO pair joined by one link."""
    return make_topology(
        "pair",
        [("a", "ACO"), ("m", "MACO")],
        [("l1", "a", "m", 8.8, 0.842)],
    )
