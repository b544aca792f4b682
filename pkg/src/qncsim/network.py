"""Directed lossless sensor networks and random deployment generation.

A deployment is a directed multigraph whose edges carry real-valued
contents toward a single gateway (decoder) node.  Random deployments
draw each edge uniformly over ordered node pairs (no self-loops,
parallel edges allowed) and are rejection-sampled until every node has
a directed path to the gateway; otherwise some messages could never
influence a measurement.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError

MAX_DEPLOYMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class Edge:
    """One directed lossless link with a positive capacity in bits per use."""

    id: int
    tail: int
    head: int
    capacity_bits: float = 1.0

    def __post_init__(self):
        if self.tail == self.head:
            raise ConfigError(f"edge {self.id}: self-loop at node {self.tail}")
        if not self.capacity_bits > 0:
            raise ConfigError(f"edge {self.id}: capacity must be positive")


@dataclass(frozen=True)
class NetworkGraph:
    """Directed multigraph with a designated gateway node.

    Nodes are 0..node_count-1, edges are indexed 0..len(edges)-1 in the
    order given.  Immutable after construction; incoming/outgoing edge
    lists are precomputed and shared safely across threads.
    """

    node_count: int
    edges: tuple[Edge, ...]
    gateway: int
    seed: int | None = None
    _in: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _out: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.node_count
        if n < 2:
            raise ConfigError("a network needs at least two nodes")
        if not 0 <= self.gateway < n:
            raise ConfigError(f"gateway {self.gateway} outside 0..{n - 1}")
        object.__setattr__(self, "edges", tuple(self.edges))
        incoming: list[list[int]] = [[] for _ in range(n)]
        outgoing: list[list[int]] = [[] for _ in range(n)]
        for expected, e in enumerate(self.edges):
            if e.id != expected:
                raise ConfigError(f"edge ids must be 0..{len(self.edges) - 1} in order")
            if not (0 <= e.tail < n and 0 <= e.head < n):
                raise ConfigError(f"edge {e.id}: endpoint outside 0..{n - 1}")
            incoming[e.head].append(e.id)
            outgoing[e.tail].append(e.id)
        if not incoming[self.gateway]:
            raise ConfigError("gateway has no incoming edge")
        object.__setattr__(self, "_in", tuple(tuple(v) for v in incoming))
        object.__setattr__(self, "_out", tuple(tuple(v) for v in outgoing))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def incoming_edges(self, node: int) -> tuple[int, ...]:
        """Edge ids with head at `node`, ascending."""
        self._check_node(node)
        return self._in[node]

    def outgoing_edges(self, node: int) -> tuple[int, ...]:
        """Edge ids with tail at `node`, ascending."""
        self._check_node(node)
        return self._out[node]

    def tails(self) -> np.ndarray:
        """Tail node of every edge, as an int array indexed by edge id."""
        return np.array([e.tail for e in self.edges], dtype=np.intp)

    def capacities(self) -> np.ndarray:
        return np.array([e.capacity_bits for e in self.edges], dtype=float)

    def all_reach_gateway(self) -> bool:
        """True when every node has a directed path to the gateway."""
        seen = [False] * self.node_count
        seen[self.gateway] = True
        queue = deque([self.gateway])
        while queue:
            v = queue.popleft()
            for e in self._in[v]:
                u = self.edges[e].tail
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
        return all(seen)

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.node_count:
            raise ConfigError(f"node {node} outside 0..{self.node_count - 1}")


@dataclass(frozen=True)
class DeploymentConfig:
    """Parameters of a random deployment.

    `capacity` is either a constant (bits per link use, same on every
    edge) or a callable `(rng, count) -> array` drawing per-edge values.
    """

    node_count: int
    edge_count: int
    capacity: float | Callable[[np.random.Generator, int], np.ndarray] = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.node_count < 2:
            raise ConfigError("node_count must be at least 2")
        if self.edge_count < self.node_count - 1:
            raise ConfigError(
                "edge_count below node_count - 1 cannot connect every node"
            )


def generate_deployment(cfg: DeploymentConfig) -> NetworkGraph:
    """Draw a random deployment matching `cfg`.

    Each edge is an ordered node pair drawn uniformly without self-loops
    (parallel edges permitted); the gateway is drawn uniformly.  Samples
    are rejected until every node reaches the gateway, up to
    MAX_DEPLOYMENT_ATTEMPTS, after which the config is declared
    infeasible.  Deterministic given cfg.seed.
    """
    rng = np.random.default_rng(cfg.seed)
    n, k = cfg.node_count, cfg.edge_count
    for _ in range(MAX_DEPLOYMENT_ATTEMPTS):
        gateway = int(rng.integers(n))
        tails = rng.integers(n, size=k)
        # Uniform head among the n-1 nodes other than the tail.
        heads = rng.integers(n - 1, size=k)
        heads = np.where(heads >= tails, heads + 1, heads)
        if callable(cfg.capacity):
            caps = np.asarray(cfg.capacity(rng, k), dtype=float)
        else:
            caps = np.full(k, float(cfg.capacity))
        edges = tuple(
            Edge(i, int(tails[i]), int(heads[i]), float(caps[i])) for i in range(k)
        )
        if not any(e.head == gateway for e in edges):
            continue
        graph = NetworkGraph(n, edges, gateway, seed=cfg.seed)
        if graph.all_reach_gateway():
            return graph
    raise ConfigError(
        f"no connected deployment found in {MAX_DEPLOYMENT_ATTEMPTS} attempts "
        f"(n={n}, edges={k})"
    )


def save_graph(graph: NetworkGraph, path: str) -> None:
    """Write a graph as text: a header line, then one line per edge.

    Format: `nodes=<n> edges=<m> gateway=<v> seed=<s>` followed by
    `id tail head capacity` rows.  Capacities use 17 significant digits
    so the round trip through `load_graph` is lossless.
    """
    lines = [
        f"nodes={graph.node_count} edges={graph.edge_count} "
        f"gateway={graph.gateway} seed={'none' if graph.seed is None else graph.seed}"
    ]
    for e in graph.edges:
        lines.append(f"{e.id} {e.tail} {e.head} {e.capacity_bits:.17g}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def load_graph(path: str) -> NetworkGraph:
    """Read a graph written by `save_graph`."""
    with open(path, "r", encoding="utf-8") as handle:
        raw = [line.strip() for line in handle if line.strip()]
    if not raw:
        raise ConfigError(f"{path}: empty graph file")
    header = dict(item.split("=", 1) for item in raw[0].split())
    try:
        n = int(header["nodes"])
        m = int(header["edges"])
        gateway = int(header["gateway"])
        seed = None if header["seed"] == "none" else int(header["seed"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: bad header {raw[0]!r}") from exc
    if len(raw) - 1 != m:
        raise ConfigError(f"{path}: header says {m} edges, found {len(raw) - 1}")
    edges = []
    for line in raw[1:]:
        eid, tail, head, cap = line.split()
        edges.append(Edge(int(eid), int(tail), int(head), float(cap)))
    return NetworkGraph(n, tuple(edges), gateway, seed=seed)


def incoming_edges(graph: NetworkGraph, node: int) -> tuple[int, ...]:
    """Module-level alias of NetworkGraph.incoming_edges."""
    return graph.incoming_edges(node)


def outgoing_edges(graph: NetworkGraph, node: int) -> tuple[int, ...]:
    """Module-level alias of NetworkGraph.outgoing_edges."""
    return graph.outgoing_edges(node)
