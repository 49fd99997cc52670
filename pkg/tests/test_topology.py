"""Topology file format, validation, routing, and pair enumeration."""

import numpy as np
import pytest

from latsim.topology import (
    PathSpec,
    Role,
    RoutingError,
    TopologyParseError,
    TopologyValidationError,
    all_pairs,
    load_topology,
    parse_topology,
    path_length_km,
    path_nodes,
    route,
    serialize_topology,
    validate_path,
)

from conftest import make_topology
from oracles import brute_force_min_length, brute_force_route, enumerate_simple_paths

MINIMAL = """\
name: mini
nodes:
- {id: a, role: ACO}
- {id: m, role: MACO}
links:
- {id: l1, a: a, b: m, length_km: 8.8, load: 0.842}
"""


def test_minimal_file_loads():
    topo = parse_topology(MINIMAL)
    assert topo.name == "mini"
    assert len(topo.links) == 1
    link = topo.links[0]
    assert link.length_km == 8.8
    assert link.load == 0.842
    assert link.mean_service_time_us == 1.0  # default applies


def test_load_of_one_rejected():
    bad = MINIMAL.replace("load: 0.842", "load: 1.0")
    with pytest.raises(TopologyValidationError, match="l1"):
        parse_topology(bad)


@pytest.mark.parametrize("load", [0.0, -0.2, 1.5])
def test_load_out_of_range_rejected(load):
    bad = MINIMAL.replace("load: 0.842", f"load: {load}")
    with pytest.raises(TopologyValidationError, match="l1"):
        parse_topology(bad)


def test_nonpositive_length_rejected():
    bad = MINIMAL.replace("length_km: 8.8", "length_km: 0")
    with pytest.raises(TopologyValidationError, match="length_km"):
        parse_topology(bad)


def test_unknown_field_rejected():
    bad_top = MINIMAL + "extra: 1\n"
    with pytest.raises(TopologyParseError, match="extra"):
        parse_topology(bad_top)
    bad_link = MINIMAL.replace(
        "{id: l1, a: a, b: m, length_km: 8.8, load: 0.842}",
        "{id: l1, a: a, b: m, length_km: 8.8, load: 0.842, color: red}",
    )
    with pytest.raises(TopologyParseError, match="color"):
        parse_topology(bad_link)


def test_duplicate_ids_rejected():
    dup_node = MINIMAL.replace("- {id: m, role: MACO}",
                               "- {id: m, role: MACO}\n- {id: m, role: MACO}")
    with pytest.raises(TopologyValidationError, match="duplicate node id 'm'"):
        parse_topology(dup_node)


def test_dangling_endpoint_rejected():
    bad = MINIMAL.replace("b: m,", "b: ghost,")
    with pytest.raises(TopologyValidationError, match="ghost"):
        parse_topology(bad)


def test_disconnected_aco_maco_rejected():
    doc = """\
name: split
nodes:
- {id: a, role: ACO}
- {id: m, role: MACO}
- {id: x, role: TRANSIT}
links:
- {id: l1, a: a, b: x, length_km: 1.0, load: 0.5}
"""
    with pytest.raises(TopologyValidationError, match="'a' cannot reach MACO 'm'"):
        parse_topology(doc)


def test_missing_role_rejected():
    bad = MINIMAL.replace("role: ACO", "role: OFFICE")
    with pytest.raises(TopologyParseError, match="OFFICE"):
        parse_topology(bad)


def test_load_is_pure_function_of_bytes(tmp_path):
    f = tmp_path / "t.yaml"
    f.write_text(MINIMAL)
    assert load_topology(f) == load_topology(f)


def test_round_trip_identity(two_path_topo, metro_topo):
    for topo in (parse_topology(MINIMAL), two_path_topo, metro_topo):
        again = parse_topology(serialize_topology(topo))
        assert again == topo


def test_two_path_file_distances(two_path_topo):
    short = route(two_path_topo, "src", "dst-short")
    long = route(two_path_topo, "src", "dst-long")
    assert path_length_km(two_path_topo, short) == pytest.approx(8.8)
    assert path_length_km(two_path_topo, long) == pytest.approx(13.6)
    assert len(short.link_ids) == 3
    assert len(long.link_ids) == 4


# ---------------------------------------------------------------------------
# Routing


def test_route_single_link(pair_topo):
    path = route(pair_topo, "a", "m")
    assert path.link_ids == ("l1",)


def test_route_prefers_shorter_two_hop():
    topo = make_topology(
        "triangle",
        [("a", "ACO"), ("b", "MACO"), ("c", "TRANSIT")],
        [("ab", "a", "b", 3.0, 0.5), ("ac", "a", "c", 1.0, 0.5), ("cb", "c", "b", 1.0, 0.5)],
    )
    path = route(topo, "a", "b")
    assert path.link_ids == ("ac", "cb")
    assert path_length_km(topo, path) == 2.0


def test_route_tie_break_matches_brute_force():
    # two equal-length two-hop alternatives plus a longer direct link
    topo = make_topology(
        "diamond",
        [("a", "ACO"), ("e", "MACO"), ("p", "TRANSIT"), ("q", "TRANSIT"), ("r", "TRANSIT")],
        [
            ("e1", "a", "p", 1.0, 0.5),
            ("e4", "p", "e", 1.0, 0.5),
            ("e2", "a", "q", 1.0, 0.5),
            ("e3", "q", "e", 1.0, 0.5),
            ("e0", "a", "e", 3.0, 0.5),
            ("e5", "a", "r", 2.0, 0.5),
            ("e6", "r", "e", 2.0, 0.5),
        ],
    )
    expected = brute_force_route(topo, "a", "e")
    assert expected == ("e1", "e4")  # lexicographically smallest among the ties
    assert route(topo, "a", "e").link_ids == expected


def test_route_reversal_symmetry_including_ties():
    topo = make_topology(
        "rev",
        [("a", "ACO"), ("z", "MACO"), ("p", "TRANSIT"), ("q", "TRANSIT")],
        [
            ("aa", "a", "p", 1.0, 0.5),
            ("zz", "p", "z", 1.0, 0.5),
            ("bb", "a", "q", 1.0, 0.5),
            ("cc", "q", "z", 1.0, 0.5),
        ],
    )
    forward = route(topo, "a", "z")
    backward = route(topo, "z", "a")
    assert backward.link_ids == tuple(reversed(forward.link_ids))
    # the canonical direction (smaller endpoint) carries the lex rule
    assert forward.link_ids == brute_force_route(topo, "a", "z")


def _random_connected_topology(rng, n_nodes):
    nodes = [(f"n{i}", "ACO" if i == 0 else ("MACO" if i == 1 else "TRANSIT"))
             for i in range(n_nodes)]
    links = []
    # random spanning tree first, extra edges after
    for i in range(1, n_nodes):
        j = int(rng.integers(0, i))
        links.append((f"t{i}", f"n{i}", f"n{j}", float(rng.uniform(0.5, 4.0)), 0.5))
    extra = 0
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < 0.3 and not any(
                {l[1], l[2]} == {f"n{i}", f"n{j}"} for l in links
            ):
                links.append((f"x{extra}", f"n{i}", f"n{j}", float(rng.uniform(0.5, 4.0)), 0.5))
                extra += 1
    return make_topology("rand", nodes, links)


def test_route_never_beaten_by_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(8):
        topo = _random_connected_topology(rng, int(rng.integers(5, 9)))
        ids = [n.id for n in topo.nodes]
        src, dst = ids[0], ids[-1]
        found = route(topo, src, dst)
        assert path_length_km(topo, found) == pytest.approx(
            brute_force_min_length(topo, src, dst)
        )
        validate_path(topo, found)


def test_route_result_is_simple_path(metro_topo):
    path = route(metro_topo, "a01", "m09")
    validate_path(metro_topo, path)
    nodes = path_nodes(metro_topo, path)
    assert nodes[0] == "a01" and nodes[-1] == "m09"
    assert len(set(nodes)) == len(nodes)


def test_route_unknown_or_disconnected():
    topo = make_topology("zero", [("a", "ACO"), ("b", "TRANSIT")],
                         [("l", "a", "b", 1.0, 0.5)])
    with pytest.raises(RoutingError):
        route(topo, "a", "nope")
    island = make_topology(
        "island",
        [("a", "TRANSIT"), ("b", "TRANSIT"), ("c", "TRANSIT"), ("d", "TRANSIT")],
        [("l1", "a", "b", 1.0, 0.5), ("l2", "c", "d", 1.0, 0.5)],
    )
    with pytest.raises(RoutingError, match="no path"):
        route(island, "a", "c")


def test_validate_path_rejects_bad_chains(pair_topo):
    with pytest.raises(ValueError, match="unknown link"):
        validate_path(pair_topo, PathSpec("a", "m", ("ghost",)))
    with pytest.raises(ValueError):
        validate_path(pair_topo, PathSpec("a", "a", ("l1",)))


# ---------------------------------------------------------------------------
# Pair enumeration


def test_all_pairs_small():
    topo = make_topology(
        "grid",
        [("a2", "ACO"), ("a1", "ACO"), ("m2", "MACO"), ("m1", "MACO"), ("m3", "MACO")],
        [
            ("l1", "a1", "m1", 1.0, 0.5),
            ("l2", "a2", "m1", 1.0, 0.5),
            ("l3", "m1", "m2", 1.0, 0.5),
            ("l4", "m2", "m3", 1.0, 0.5),
        ],
    )
    pairs = all_pairs(topo)
    assert pairs == [
        ("a1", "m1"), ("a1", "m2"), ("a1", "m3"),
        ("a2", "m1"), ("a2", "m2"), ("a2", "m3"),
    ]


def test_all_pairs_count_35x17(metro_topo):
    assert len(all_pairs(metro_topo)) == 595
    assert len(metro_topo.nodes_with_role(Role.ACO)) == 35
    assert len(metro_topo.nodes_with_role(Role.MACO)) == 17


def test_all_pairs_no_macos():
    topo = make_topology("none", [("a", "ACO"), ("t", "TRANSIT")],
                         [("l", "a", "t", 1.0, 0.5)])
    assert all_pairs(topo) == []


def test_enumeration_oracle_sees_all_paths(pair_topo):
    assert enumerate_simple_paths(pair_topo, "a", "m") == [("l1",)]
