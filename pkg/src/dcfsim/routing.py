"""Static minimum-hop routing over the fixed topology."""

from __future__ import annotations

from collections import deque


class RoutingError(ValueError):
    """Raised at build time for unreachable flow endpoints."""


def compute_routes(adjacency):
    """Precompute next hops for every reachable (node, destination) pair.

    adjacency maps node id -> iterable of neighbour ids. Routes are
    minimum-hop; ties are broken by the lowest next-hop node id, so the
    table is a pure function of the adjacency. Returns a dict keyed by
    (node, destination).
    """
    nodes = sorted(adjacency)
    neighbours = {n: sorted(adjacency[n]) for n in nodes}
    next_hop = {}
    for dst in nodes:
        # BFS distances toward dst.
        dist = {dst: 0}
        frontier = deque([dst])
        while frontier:
            cur = frontier.popleft()
            for nb in neighbours[cur]:
                if nb not in dist:
                    dist[nb] = dist[cur] + 1
                    frontier.append(nb)
        for n in nodes:
            if n == dst or n not in dist:
                continue
            want = dist[n] - 1
            for nb in neighbours[n]:  # sorted, so lowest id wins ties
                if dist.get(nb) == want:
                    next_hop[(n, dst)] = nb
                    break
    return next_hop


def require_route(next_hop, src, dst):
    hop = next_hop.get((src, dst))
    if hop is None:
        raise RoutingError(f"no route from node {src} to node {dst}")
    return hop


def path(next_hop, src, dst, max_hops=None):
    """Walk the table from src to dst; raises RoutingError on a missing
    entry or a loop (guards the loop-free invariant)."""
    hops = []
    cur = src
    limit = max_hops if max_hops is not None else len(next_hop) + 1
    while cur != dst:
        if len(hops) > limit:
            raise RoutingError(f"routing loop walking {src} -> {dst}")
        cur = require_route(next_hop, cur, dst)
        hops.append(cur)
    return hops
