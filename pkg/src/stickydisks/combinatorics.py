"""Laman sparsity and planarity of embedded contact graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TooLarge
from .packing import ContactGraph, DiskPacking

ORACLE_MAX_N = 16
GEOM_EPS = 1e-12


@dataclass(frozen=True)
class SparsityReport:
    is_laman_sparse: bool
    is_laman_graph: bool
    violating_subgraph: Optional[tuple] = None  # sorted vertex tuple
    violating_edges: Optional[int] = None


def _induced_edge_count(graph: ContactGraph, verts) -> int:
    s = set(verts)
    return sum(1 for i, j in graph.edges if i in s and j in s)


class _PebbleGame:
    """(2,3)-pebble game state. Searches visit out-neighbours in increasing index order."""

    def __init__(self, n):
        self.pebbles = [2] * n
        self.out = [[] for _ in range(n)]

    def _search(self, root, blocked):
        """DFS from root for a free pebble; returns (path or None, visited)."""
        visited = {root} | set(blocked)
        parent = {root: None}
        stack = [root]
        while stack:
            u = stack.pop()
            if u != root and self.pebbles[u] > 0:
                path = [u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1], visited
            # reversed so that the lowest index is popped first
            for w in sorted(self.out[u], reverse=True):
                if w not in visited:
                    visited.add(w)
                    parent[w] = u
                    stack.append(w)
        return None, visited

    def _gather(self, root, blocked):
        path, visited = self._search(root, blocked)
        if path is None:
            return False, visited
        # move the pebble back along the path, reversing each edge
        for a, b in zip(path, path[1:]):
            self.out[a].remove(b)
            self.out[b].append(a)
        self.pebbles[path[-1]] -= 1
        self.pebbles[root] += 1
        return True, visited

    def reach(self, roots):
        seen = set(roots)
        stack = list(roots)
        while stack:
            u = stack.pop()
            for w in self.out[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def insert(self, u, v):
        """Try to insert edge uv; returns True if it is independent."""
        while self.pebbles[u] + self.pebbles[v] < 4:
            if self.pebbles[u] < 2:
                ok, _ = self._gather(u, [v])
            else:
                ok, _ = self._gather(v, [u])
            if not ok:
                return False
        self.pebbles[u] -= 1
        self.out[u].append(v)
        return True


def pebble_game_2_3(graph: ContactGraph) -> SparsityReport:
    """Run the (2,3)-pebble game over the edges in listed order.

    On the first rejected edge the witness is the set of vertices reachable
    from its endpoints in the pebble orientation, a block spanning 2n'-3
    accepted edges plus the rejected one.
    """
    game = _PebbleGame(graph.n)
    for u, v in graph.edges:
        if not game.insert(u, v):
            verts = tuple(sorted(game.reach([u, v])))
            return SparsityReport(False, False, verts, _induced_edge_count(graph, verts))
    return SparsityReport(True, graph.m == 2 * graph.n - 3)


def subgraph_oracle(graph: ContactGraph) -> SparsityReport:
    """Exhaustive check of m' <= 2n' - 3 over all vertex subsets of size >= 2.

    The reported witness is a smallest violating subset (ties broken by
    bitmask order).
    """
    n = graph.n
    if n > ORACLE_MAX_N:
        raise TooLarge(f"subgraph enumeration limited to n <= {ORACLE_MAX_N}, got {n}")
    masks = np.arange(1 << n, dtype=np.int64)
    size = np.zeros(masks.shape, dtype=np.int64)
    for v in range(n):
        size += (masks >> v) & 1
    count = np.zeros(masks.shape, dtype=np.int64)
    for i, j in graph.edges:
        count += ((masks >> i) & 1) & ((masks >> j) & 1)
    bad = (size >= 2) & (count > 2 * size - 3)
    if not bad.any():
        return SparsityReport(True, graph.m == 2 * n - 3)
    cand = np.flatnonzero(bad)
    best = cand[np.lexsort((cand, size[cand]))[0]]
    verts = tuple(v for v in range(n) if (best >> v) & 1)
    return SparsityReport(False, False, verts, int(count[best]))


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def embedding_is_planar(packing: DiskPacking, graph: ContactGraph, eps: float = GEOM_EPS) -> bool:
    """True iff the straight-line drawing of ``graph`` at the packing centers is non-crossing.

    Orientation tests use an area threshold of ``eps`` times the squared
    longest edge, so the answer is scale invariant.
    """
    p = packing.centers
    n = packing.n
    # distinct points
    d = np.linalg.norm(p[:, None] - p[None, :], axis=-1)
    scale = float(d.max()) if n > 1 else 1.0
    iu = np.triu_indices(n, 1)
    if n > 1 and d[iu].min() <= eps * scale:
        return False
    e = graph.edge_array()
    if len(e) == 0:
        return True
    a, b = p[e[:, 0]], p[e[:, 1]]
    L = np.linalg.norm(b - a, axis=1)
    thr = eps * float(L.max()) ** 2

    # a vertex strictly inside a non-incident segment
    ab = b - a
    for k in range(n):
        rel = p[k] - a
        cross = ab[:, 0] * rel[:, 1] - ab[:, 1] * rel[:, 0]
        t = (rel * ab).sum(axis=1)
        inside = (np.abs(cross) <= thr) & (t > 0) & (t < L**2)
        inside &= (e[:, 0] != k) & (e[:, 1] != k)
        if inside.any():
            return False

    # proper crossings between edges without a shared endpoint
    m = len(e)
    for s in range(m - 1):
        i, j = e[s]
        o = np.arange(s + 1, m)
        o = o[(e[o, 0] != i) & (e[o, 0] != j) & (e[o, 1] != i) & (e[o, 1] != j)]
        if len(o) == 0:
            continue
        c, dd = p[e[o, 0]], p[e[o, 1]]
        o1 = _orient(p[i], p[j], c.T)
        o2 = _orient(p[i], p[j], dd.T)
        o3 = _orient(c.T, dd.T, p[i])
        o4 = _orient(c.T, dd.T, p[j])
        strict = (np.abs(o1) > thr) & (np.abs(o2) > thr) & (np.abs(o3) > thr) & (np.abs(o4) > thr)
        if np.any(strict & (o1 * o2 < 0) & (o3 * o4 < 0)):
            return False
    return True
