"""Exact solver for the small balanced transportation problem.

Successive shortest paths on the bipartite flow network
source -> supply_i -> demand_j -> sink. Middle arcs have unlimited
capacity, so every augmentation saturates a supply or demand arc and the
solver terminates after at most m+n augmentations. Capacities stay in
their original float units: each residual is an exact subtraction of the
pushed amount, which keeps row/column marginals correct to machine
precision (no integer quantization step).

Shortest paths use Dijkstra over Johnson-style reduced costs, clamped at
zero. The clamp matters: a residual arc paired with its own reverse is an
exact zero cycle, but float rounding can make it appear negative by an
ulp, and a label-correcting search then chases that phantom cycle forever.
Reduced costs keep every arc nonnegative, and Dijkstra's pop-once order
makes predecessor chains acyclic by construction.
"""

from __future__ import annotations

import numpy as np


def solve_transport(
    supply: np.ndarray, demand: np.ndarray, cost: np.ndarray
) -> tuple[np.ndarray, float]:
    """Minimize sum(flow * cost) subject to the supply/demand marginals.

    Returns (flow matrix, total cost). ``supply`` and ``demand`` must be
    nonnegative with (nearly) equal sums; the solver moves
    min(sum supply, sum demand) units, so a stray sub-ulp imbalance in the
    inputs never deadlocks it.
    """
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = cost.shape
    if supply.shape != (m,) or demand.shape != (n,):
        raise ValueError("marginal lengths must match the cost matrix")
    if (supply < 0).any() or (demand < 0).any():
        raise ValueError("marginals must be nonnegative")
    if (cost < 0).any():
        raise ValueError("costs must be nonnegative")

    # Node layout: 0 = source, 1..m supplies, m+1..m+n demands, m+n+1 = sink.
    src = 0
    sink = m + n + 1
    node_count = m + n + 2

    flow = np.zeros((m, n), dtype=float)
    supply_left = supply.astype(float).copy()
    demand_left = demand.astype(float).copy()
    target_flow = min(float(supply.sum()), float(demand.sum()))
    moved = 0.0

    def residual_arcs() -> list[list[tuple[int, float]]]:
        """Adjacency lists of (head, cost) for every open residual arc."""
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(node_count)]
        for i in range(m):
            if supply_left[i] > 0:
                adjacency[src].append((1 + i, 0.0))
        for i in range(m):
            for j in range(n):
                adjacency[1 + i].append((1 + m + j, float(cost[i, j])))
                if flow[i, j] > 0:
                    adjacency[1 + m + j].append((1 + i, -float(cost[i, j])))
        for j in range(n):
            if demand_left[j] > 0:
                adjacency[1 + m + j].append((sink, 0.0))
        return adjacency

    potential = np.zeros(node_count)
    while moved < target_flow and abs(target_flow - moved) > 1e-15:
        adjacency = residual_arcs()
        dist = np.full(node_count, np.inf)
        prev = np.full(node_count, -1, dtype=int)
        done = np.zeros(node_count, dtype=bool)
        dist[src] = 0.0
        for _ in range(node_count):
            candidates = np.where(~done & np.isfinite(dist))[0]
            if len(candidates) == 0:
                break
            node = int(candidates[np.argmin(dist[candidates])])
            done[node] = True
            for head, arc_cost in adjacency[node]:
                reduced = max(0.0, arc_cost + potential[node] - potential[head])
                if not done[head] and dist[node] + reduced < dist[head]:
                    dist[head] = dist[node] + reduced
                    prev[head] = node
        if not np.isfinite(dist[sink]):
            break  # remaining marginals are zero-capacity dust
        potential += np.where(np.isfinite(dist), dist, dist[sink])

        path = []
        node = sink
        while node != src:
            path.append((prev[node], node))
            node = prev[node]
        path.reverse()

        push = target_flow - moved
        for tail, head in path:
            if tail == src:
                push = min(push, supply_left[head - 1])
            elif head == sink:
                push = min(push, demand_left[tail - m - 1])
            elif tail > m:  # reverse arc capacity = current flow
                push = min(push, flow[head - 1, tail - m - 1])
        if push <= 0:
            break
        for tail, head in path:
            if tail == src:
                supply_left[head - 1] -= push
            elif head == sink:
                demand_left[tail - m - 1] -= push
            elif tail <= m:
                flow[tail - 1, head - m - 1] += push
            else:
                flow[head - 1, tail - m - 1] -= push
        moved += push

    total_cost = float((flow * cost).sum())
    return flow, total_cost
