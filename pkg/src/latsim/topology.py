"""Metro topology model: declarative file format, validation, and routing.

A topology file is a UTF-8 YAML document with exactly these fields:

    name: <string>
    nodes:
      - id: <string>            # unique
        role: ACO | MACO | TRANSIT
    links:
      - id: <string>            # unique
        a: <node id>
        b: <node id>
        length_km: <float > 0>
        load: <float in (0, 1)>
        mean_service_time_us: <float > 0>   # optional, default 1.0

Links are undirected and carry one symmetric load. Unknown fields are
rejected. ``load_topology -> serialize_topology -> load_topology`` is the
identity.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path

import yaml


class TopologyError(Exception):
    """Base class for topology file problems."""


class TopologyParseError(TopologyError):
    """Malformed document: bad YAML, missing/unknown fields, wrong types."""


class TopologyValidationError(TopologyError):
    """Well-formed document violating a semantic invariant."""


class RoutingError(Exception):
    """No path exists between the requested endpoints."""


class Role(str, Enum):
    ACO = "ACO"
    MACO = "MACO"
    TRANSIT = "TRANSIT"


@dataclass(frozen=True)
class NodeSpec:
    id: str
    role: Role


@dataclass(frozen=True)
class LinkSpec:
    id: str
    a: str
    b: str
    length_km: float
    load: float
    mean_service_time_us: float = 1.0


@dataclass(frozen=True)
class Topology:
    name: str
    nodes: tuple[NodeSpec, ...]
    links: tuple[LinkSpec, ...]

    @cached_property
    def node_by_id(self) -> dict[str, NodeSpec]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def link_by_id(self) -> dict[str, LinkSpec]:
        return {l.id: l for l in self.links}

    @cached_property
    def adjacency(self) -> dict[str, tuple[tuple[str, str], ...]]:
        """node id -> tuple of (neighbor id, link id), in file order."""
        adj: dict[str, list[tuple[str, str]]] = {n.id: [] for n in self.nodes}
        for l in self.links:
            adj[l.a].append((l.b, l.id))
            adj[l.b].append((l.a, l.id))
        return {k: tuple(v) for k, v in adj.items()}

    def nodes_with_role(self, role: Role) -> list[str]:
        return sorted(n.id for n in self.nodes if n.role is role)


@dataclass(frozen=True)
class PathSpec:
    source: str
    destination: str
    link_ids: tuple[str, ...]


# ---------------------------------------------------------------------------
# Parsing

_NODE_FIELDS = {"id", "role"}
_LINK_FIELDS = {"id", "a", "b", "length_km", "load", "mean_service_time_us"}
_TOP_FIELDS = {"name", "nodes", "links"}


def _require_mapping(obj, what: str) -> dict:
    if not isinstance(obj, dict):
        raise TopologyParseError(f"{what} must be a mapping, got {type(obj).__name__}")
    return obj


def _require_str(obj, what: str) -> str:
    if not isinstance(obj, str) or not obj:
        raise TopologyParseError(f"{what} must be a non-empty string")
    return obj


def _require_number(obj, what: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise TopologyParseError(f"{what} must be a number")
    return float(obj)


def _reject_unknown(mapping: dict, allowed: set[str], what: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise TopologyParseError(f"unknown field(s) {unknown} in {what}")


def parse_topology(text: str) -> Topology:
    """Parse and validate a topology document from a string."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise TopologyParseError(f"invalid YAML: {exc}") from exc
    doc = _require_mapping(doc, "topology document")
    _reject_unknown(doc, _TOP_FIELDS, "topology document")
    for fld in _TOP_FIELDS:
        if fld not in doc:
            raise TopologyParseError(f"missing top-level field '{fld}'")
    name = _require_str(doc["name"], "name")

    if not isinstance(doc["nodes"], list):
        raise TopologyParseError("nodes must be a list")
    nodes = []
    for i, raw in enumerate(doc["nodes"]):
        raw = _require_mapping(raw, f"nodes[{i}]")
        _reject_unknown(raw, _NODE_FIELDS, f"nodes[{i}]")
        nid = _require_str(raw.get("id"), f"nodes[{i}].id")
        role_text = _require_str(raw.get("role"), f"node '{nid}' role")
        try:
            role = Role(role_text)
        except ValueError:
            raise TopologyParseError(
                f"node '{nid}' has unknown role '{role_text}' "
                f"(expected one of {[r.value for r in Role]})"
            ) from None
        nodes.append(NodeSpec(nid, role))

    if not isinstance(doc["links"], list):
        raise TopologyParseError("links must be a list")
    links = []
    for i, raw in enumerate(doc["links"]):
        raw = _require_mapping(raw, f"links[{i}]")
        _reject_unknown(raw, _LINK_FIELDS, f"links[{i}]")
        lid = _require_str(raw.get("id"), f"links[{i}].id")
        links.append(
            LinkSpec(
                id=lid,
                a=_require_str(raw.get("a"), f"link '{lid}' endpoint a"),
                b=_require_str(raw.get("b"), f"link '{lid}' endpoint b"),
                length_km=_require_number(raw.get("length_km"), f"link '{lid}' length_km"),
                load=_require_number(raw.get("load"), f"link '{lid}' load"),
                mean_service_time_us=_require_number(
                    raw.get("mean_service_time_us", 1.0), f"link '{lid}' mean_service_time_us"
                ),
            )
        )

    topo = Topology(name=name, nodes=tuple(nodes), links=tuple(links))
    validate_topology(topo)
    return topo


def load_topology(path: str | Path) -> Topology:
    """Load and validate a topology file."""
    p = Path(path)
    return parse_topology(p.read_text(encoding="utf-8"))


def validate_topology(topo: Topology) -> None:
    """Check all topology invariants; raise TopologyValidationError on the first violation."""
    seen_nodes: set[str] = set()
    for n in topo.nodes:
        if n.id in seen_nodes:
            raise TopologyValidationError(f"duplicate node id '{n.id}'")
        seen_nodes.add(n.id)
    seen_links: set[str] = set()
    for l in topo.links:
        if l.id in seen_links:
            raise TopologyValidationError(f"duplicate link id '{l.id}'")
        seen_links.add(l.id)
        for end in (l.a, l.b):
            if end not in seen_nodes:
                raise TopologyValidationError(f"link '{l.id}' references unknown node '{end}'")
        if l.a == l.b:
            raise TopologyValidationError(f"link '{l.id}' is a self-loop on '{l.a}'")
        if not l.length_km > 0:
            raise TopologyValidationError(f"link '{l.id}' length_km must be > 0, got {l.length_km}")
        if not 0 < l.load < 1:
            raise TopologyValidationError(
                f"link '{l.id}' load must lie strictly inside (0, 1), got {l.load}"
            )
        if not l.mean_service_time_us > 0:
            raise TopologyValidationError(
                f"link '{l.id}' mean_service_time_us must be > 0, got {l.mean_service_time_us}"
            )
    _check_aco_maco_connectivity(topo)


def _check_aco_maco_connectivity(topo: Topology) -> None:
    # Union of links partitions nodes into components; every ACO must share
    # a component with every MACO.
    component: dict[str, int] = {}
    current = 0
    for n in topo.nodes:
        if n.id in component:
            continue
        stack = [n.id]
        component[n.id] = current
        while stack:
            u = stack.pop()
            for v, _lid in topo.adjacency[u]:
                if v not in component:
                    component[v] = current
                    stack.append(v)
        current += 1
    acos = topo.nodes_with_role(Role.ACO)
    macos = topo.nodes_with_role(Role.MACO)
    for a in acos:
        for m in macos:
            if component[a] != component[m]:
                raise TopologyValidationError(
                    f"ACO '{a}' cannot reach MACO '{m}' (disconnected topology)"
                )


# ---------------------------------------------------------------------------
# Serialization

def serialize_topology(topo: Topology) -> str:
    """Render a topology as a canonical YAML document (load round-trips)."""
    doc = {
        "name": topo.name,
        "nodes": [{"id": n.id, "role": n.role.value} for n in topo.nodes],
        "links": [
            {
                "id": l.id,
                "a": l.a,
                "b": l.b,
                "length_km": l.length_km,
                "load": l.load,
                "mean_service_time_us": l.mean_service_time_us,
            }
            for l in topo.links
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def save_topology(topo: Topology, path: str | Path) -> None:
    Path(path).write_text(serialize_topology(topo), encoding="utf-8")


# ---------------------------------------------------------------------------
# Routing

def route(topo: Topology, source: str, destination: str) -> PathSpec:
    """Shortest path by total length_km between two nodes.

    Ties are broken by the lexicographically smallest link-id sequence, read
    from the lexicographically smaller endpoint so that route(a, b) and
    route(b, a) always traverse the same links in reverse.
    """
    for node in (source, destination):
        if node not in topo.node_by_id:
            raise RoutingError(f"unknown node '{node}'")
    if source == destination:
        return PathSpec(source, destination, ())
    start, goal = (source, destination) if source <= destination else (destination, source)
    links = _dijkstra_lex(topo, start, goal)
    if links is None:
        raise RoutingError(f"no path between '{source}' and '{destination}'")
    if start != source:
        links = tuple(reversed(links))
    return PathSpec(source, destination, links)


def _dijkstra_lex(topo: Topology, start: str, goal: str) -> tuple[str, ...] | None:
    # Labels are (total length, link-id sequence); lexicographic comparison of
    # the sequences applies only between equal totals. Positive lengths make
    # label-setting correct for this composite order.
    counter = itertools.count()
    best: dict[str, tuple[float, tuple[str, ...]]] = {start: (0.0, ())}
    heap: list[tuple[float, tuple[str, ...], int, str]] = [(0.0, (), next(counter), start)]
    done: set[str] = set()
    while heap:
        dist, seq, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == goal:
            return seq
        for v, lid in topo.adjacency[u]:
            if v in done:
                continue
            link = topo.link_by_id[lid]
            cand = (dist + link.length_km, seq + (lid,))
            if v not in best or cand < best[v]:
                best[v] = cand
                heapq.heappush(heap, (cand[0], cand[1], next(counter), v))
    return None


def path_nodes(topo: Topology, path: PathSpec) -> tuple[str, ...]:
    """Node sequence visited by a path, source first."""
    nodes = [path.source]
    for lid in path.link_ids:
        link = topo.link_by_id[lid]
        prev = nodes[-1]
        if link.a == prev:
            nodes.append(link.b)
        elif link.b == prev:
            nodes.append(link.a)
        else:
            raise ValueError(f"link '{lid}' does not touch node '{prev}'")
    if nodes[-1] != path.destination:
        raise ValueError("path does not end at its destination")
    return tuple(nodes)


def path_length_km(topo: Topology, path: PathSpec) -> float:
    return sum(topo.link_by_id[lid].length_km for lid in path.link_ids)


def validate_path(topo: Topology, path: PathSpec) -> None:
    """Check the simple-path invariants of a PathSpec against a topology."""
    for lid in path.link_ids:
        if lid not in topo.link_by_id:
            raise ValueError(f"unknown link id '{lid}'")
    nodes = path_nodes(topo, path)  # raises if links do not chain
    if len(set(nodes)) != len(nodes):
        raise ValueError("path revisits a node")


def all_pairs(topo: Topology) -> list[tuple[str, str]]:
    """All (ACO, MACO) pairs, sorted by node id on both sides."""
    return [
        (a, m)
        for a in topo.nodes_with_role(Role.ACO)
        for m in topo.nodes_with_role(Role.MACO)
    ]
