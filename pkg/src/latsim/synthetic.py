"""Builders for the topologies shipped with the package.

The metro instance is a synthetic stand-in with the published shape
(35 ACOs, 17 MACOs) but invented lengths and loads: a MACO ring with a few
chords, ACO tails into the ring, and a load mix spanning lightly loaded to
hot links so that per-pair compliance is genuinely mixed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .topology import LinkSpec, NodeSpec, Role, Topology, save_topology, validate_topology

TWO_PATH_NAME = "two-path-demo"
METRO_NAME = "synthetic-metro-35x17"


def build_two_path_topology() -> Topology:
    """One source ACO with two disjoint chains to two MACO destinations.

    The short chain (8.8 km over 3 hot links, load 16/19) has the lower mean
    delay but the heavier tail; the long chain (13.6 km over 4 cool links,
    load 0.2) trades propagation for a far lighter tail.
    """
    nodes = [NodeSpec("src", Role.ACO)]
    links = []
    hot_load = 16.0 / 19.0  # stage mean 1/(1-load) ~ 19/3 us
    blue_nodes = ["src", "b1", "b2", "dst-short"]
    for i in range(3):
        links.append(
            LinkSpec(f"short{i + 1}", blue_nodes[i], blue_nodes[i + 1], 8.8 / 3, hot_load)
        )
    green_nodes = ["src", "g1", "g2", "g3", "dst-long"]
    for i in range(4):
        links.append(
            LinkSpec(f"long{i + 1}", green_nodes[i], green_nodes[i + 1], 13.6 / 4, 0.2)
        )
    nodes += [NodeSpec(n, Role.TRANSIT) for n in ("b1", "b2", "g1", "g2", "g3")]
    nodes += [NodeSpec("dst-short", Role.MACO), NodeSpec("dst-long", Role.MACO)]
    topo = Topology(TWO_PATH_NAME, tuple(nodes), tuple(links))
    validate_topology(topo)
    return topo


def build_synthetic_metro(
    seed: int = 7,
    aco_count: int = 35,
    maco_count: int = 17,
    hot_fraction: float = 0.16,
    warm_fraction: float = 0.26,
) -> Topology:
    """A ring-and-tails metro instance with mixed link loads.

    Loads are drawn from three bands (hot 0.80-0.93, warm 0.55-0.80, cool
    0.15-0.55) so that sparse telemetry misjudges a visible share of pairs
    while dense telemetry gets almost all of them right.
    """
    rng = np.random.default_rng(seed)
    macos = [f"m{i:02d}" for i in range(1, maco_count + 1)]
    acos = [f"a{i:02d}" for i in range(1, aco_count + 1)]
    nodes = [NodeSpec(m, Role.MACO) for m in macos] + [NodeSpec(a, Role.ACO) for a in acos]

    raw_links: list[tuple[str, str, str, float]] = []
    for i in range(maco_count):
        raw_links.append(
            (f"ring{i:02d}", macos[i], macos[(i + 1) % maco_count],
             float(rng.uniform(0.9, 1.4)))
        )
    chord_ends = [(0, 6), (2, 10), (4, 13), (8, 15), (11, 16), (1, 9)]
    for j, (p, q) in enumerate(chord_ends):
        p %= maco_count
        q %= maco_count
        if p != q:
            raw_links.append((f"chord{j}", macos[p], macos[q], float(rng.uniform(2.2, 3.4))))
    for k, a in enumerate(acos):
        hook = int(rng.integers(0, maco_count))
        raw_links.append((f"tail{k:02d}a", a, macos[hook], float(rng.uniform(0.4, 2.4))))
        if rng.random() < 0.4:
            hook2 = (hook + int(rng.integers(1, 4))) % maco_count
            raw_links.append((f"tail{k:02d}b", a, macos[hook2], float(rng.uniform(0.4, 2.4))))

    links = []
    for lid, a, b, length in raw_links:
        band = rng.random()
        if band < hot_fraction:
            load = float(rng.uniform(0.80, 0.93))
        elif band < hot_fraction + warm_fraction:
            load = float(rng.uniform(0.55, 0.80))
        else:
            load = float(rng.uniform(0.15, 0.55))
        links.append(LinkSpec(lid, a, b, length, load))

    topo = Topology(METRO_NAME, tuple(nodes), tuple(links))
    validate_topology(topo)
    return topo


def write_shipped_topologies(directory: str | Path) -> list[Path]:
    """Regenerate the topology files bundled as package data."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for topo, filename in (
        (build_two_path_topology(), "two_path.yaml"),
        (build_synthetic_metro(), "metro_35x17.yaml"),
    ):
        target = directory / filename
        save_topology(topo, target)
        written.append(target)
    return written


if __name__ == "__main__":
    for path in write_shipped_topologies(Path(__file__).parent / "data" / "topologies"):
        print(f"wrote {path}")
