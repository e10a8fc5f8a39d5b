"""Waypoint graph the UAV flies on: RSU locations with weighted edges."""

from __future__ import annotations

from dataclasses import dataclass

from twinmig.simcore.geometry import Position, distance
from twinmig.simcore.nodes import EdgeNode


@dataclass
class GraphNode:
    id: int
    pos: Position
    load: float = 0.0


class RoutingGraph:
    """Undirected graph with nonnegative edge weights (energy units)."""

    def __init__(self, nodes: list[GraphNode], edges: list[tuple[int, int, float]]):
        self.nodes: dict[int, GraphNode] = {n.id: n for n in nodes}
        if len(self.nodes) != len(nodes):
            raise ValueError("duplicate node ids")
        self.adj: dict[int, list[tuple[int, float]]] = {n.id: [] for n in nodes}
        for a, b, w in edges:
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a}, {b}) references an unknown node")
            if w < 0:
                raise ValueError(f"edge ({a}, {b}) has negative weight {w}")
            self.adj[a].append((b, w))
            self.adj[b].append((a, w))
        for nid in self.adj:
            self.adj[nid].sort()

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes

    def neighbors(self, node_id: int) -> list[tuple[int, float]]:
        return self.adj[node_id]

    def straight_distance(self, a: int, b: int) -> float:
        return distance(self.nodes[a].pos, self.nodes[b].pos)

    def set_loads(self, loads: dict[int, float]) -> None:
        for nid, value in loads.items():
            self.nodes[nid].load = value

    @classmethod
    def rsu_grid(cls, rsus: list[EdgeNode], move_energy_per_m: float,
                 neighbor_radius_m: float) -> "RoutingGraph":
        """Connect RSUs whose straight-line distance is within neighbor_radius_m.

        Edge weight is the move energy of the hop, so path costs are joules.
        """
        nodes = [GraphNode(id=r.id, pos=r.pos, load=r.workload_cycles) for r in rsus]
        edges = []
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                d = distance(a.pos, b.pos)
                if 0 < d <= neighbor_radius_m:
                    edges.append((a.id, b.id, move_energy_per_m * d))
        return cls(nodes, edges)
