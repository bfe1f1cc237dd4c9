"""Disk packings, tolerances, contact graphs and the packing JSON format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    EmptyPacking,
    IndexOutOfRange,
    InvalidTolerance,
    MultiEdge,
    NonpositiveRadius,
    OverlapError,
    PackingFormatError,
    SelfLoop,
)


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances for contact classification and rank decisions."""

    contact: float = 1e-9
    rank: float = 1e-8

    def __post_init__(self):
        for name in ("contact", "rank"):
            v = getattr(self, name)
            if not (0.0 < v < 1e-3):
                raise InvalidTolerance(f"{name} tolerance must lie in (0, 1e-3), got {v!r}")


DEFAULT_TOL = Tolerances()


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiskPacking:
    """Centers (n x 2) and radii (n,) of a planar disk arrangement.

    Construction only checks shapes. Use :func:`validate` for the packing
    conditions (n >= 2, positive radii, disjoint interiors).
    """

    centers: np.ndarray
    radii: np.ndarray
    boundary: Optional[tuple] = None

    def __post_init__(self):
        c = _frozen(self.centers)
        r = _frozen(self.radii)
        if c.ndim != 2 or c.shape[1] != 2:
            raise PackingFormatError(f"centers must have shape (n, 2), got {c.shape}")
        if r.ndim != 1 or r.shape[0] != c.shape[0]:
            raise PackingFormatError("radii must be a vector with one entry per center")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)
        if self.boundary is not None:
            b = tuple(int(i) for i in self.boundary)
            if len(b) != 3 or any(not 0 <= i < len(r) for i in b):
                raise PackingFormatError(f"boundary must name 3 disk indices, got {b}")
            object.__setattr__(self, "boundary", b)

    @property
    def n(self) -> int:
        return self.radii.shape[0]

    def as_vector(self) -> np.ndarray:
        """The point (p, r) in R^{3n}, positions interleaved x, y per disk."""
        return np.concatenate([self.centers.ravel(), self.radii])

    @classmethod
    def from_vector(cls, x, boundary=None) -> "DiskPacking":
        x = np.asarray(x, dtype=float)
        n = x.shape[0] // 3
        return cls(x[: 2 * n].reshape(n, 2), x[2 * n :], boundary)

    def with_centers(self, centers) -> "DiskPacking":
        return DiskPacking(centers, self.radii, self.boundary)

    def subset(self, indices: Sequence[int]) -> "DiskPacking":
        idx = list(indices)
        boundary = None
        if self.boundary is not None and all(b in idx for b in self.boundary):
            boundary = tuple(idx.index(b) for b in self.boundary)
        return DiskPacking(self.centers[idx], self.radii[idx], boundary)

    def pairwise_gaps(self) -> np.ndarray:
        """Signed gaps ||p_i - p_j|| - (r_i + r_j) for all pairs; zero diagonal."""
        d = np.linalg.norm(self.centers[:, None, :] - self.centers[None, :, :], axis=-1)
        g = d - (self.radii[:, None] + self.radii[None, :])
        np.fill_diagonal(g, 0.0)
        return g

    def relative_gaps(self) -> np.ndarray:
        s = self.radii[:, None] + self.radii[None, :]
        return self.pairwise_gaps() / s


def _normalize_edges(n: int, edges: Iterable) -> tuple:
    out = []
    seen = set()
    for e in edges:
        i, j = (int(v) for v in e)
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) outside vertex range 0..{n - 1}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise MultiEdge(f"repeated edge {key}")
        seen.add(key)
        out.append(key)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ContactGraph:
    """Simple undirected graph on disk indices.

    ``gaps`` holds the n x n matrix of signed gaps when the graph came
    from a packing, and is ``None`` for hand-built graphs.
    """

    n: int
    edges: tuple
    gaps: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", _normalize_edges(self.n, self.edges))
        if self.gaps is not None:
            object.__setattr__(self, "gaps", _frozen(self.gaps))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "ContactGraph":
        return cls(int(n), tuple(edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    def neighbors(self, v: int) -> list:
        return sorted([j for i, j in self.edges if i == v] + [i for i, j in self.edges if j == v])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in set(self.edges)

    def without_edge(self, k: int) -> "ContactGraph":
        edges = self.edges[:k] + self.edges[k + 1 :]
        return ContactGraph(self.n, edges, self.gaps)

    def with_edges(self, extra: Iterable) -> "ContactGraph":
        return ContactGraph(self.n, self.edges + tuple(extra), self.gaps)

    def induced(self, indices: Sequence[int]) -> "ContactGraph":
        """Induced subgraph, relabelled to 0..len(indices)-1 in the given order."""
        pos = {v: k for k, v in enumerate(indices)}
        edges = [(pos[i], pos[j]) for i, j in self.edges if i in pos and j in pos]
        gaps = None
        if self.gaps is not None:
            idx = list(indices)
            gaps = self.gaps[np.ix_(idx, idx)]
        return ContactGraph(len(pos), tuple(edges), gaps)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    overlaps: tuple
    contacts: tuple
    min_relative_gap: float


def _check_basic(packing: DiskPacking):
    if packing.n < 2:
        raise EmptyPacking(f"a packing needs at least 2 disks, got {packing.n}")
    if not np.all(packing.radii > 0):
        bad = np.flatnonzero(~(packing.radii > 0)).tolist()
        raise NonpositiveRadius(f"nonpositive radius at indices {bad}")


def validate(packing: DiskPacking, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
    """Classify every pair as overlapping, tangent, or separated."""
    _check_basic(packing)
    rel = packing.relative_gaps()
    iu, ju = np.triu_indices(packing.n, k=1)
    g = rel[iu, ju]
    over = g < -tol.contact
    touch = np.abs(g) <= tol.contact
    overlaps = tuple(zip(iu[over].tolist(), ju[over].tolist()))
    contacts = tuple(zip(iu[touch].tolist(), ju[touch].tolist()))
    return ValidationReport(not overlaps, overlaps, contacts, float(g.min()))


def contact_graph(packing: DiskPacking, tol: Tolerances = DEFAULT_TOL) -> ContactGraph:
    report = validate(packing, tol)
    if not report.valid:
        raise OverlapError(f"overlapping pairs: {list(report.overlaps)}", report)
    return ContactGraph(packing.n, report.contacts, packing.pairwise_gaps())


def gap_vector(packing: DiskPacking, graph: ContactGraph) -> np.ndarray:
    """Residual ||p_i - p_j|| - (r_i + r_j) for each edge of ``graph``."""
    if graph.n != packing.n:
        raise IndexOutOfRange(f"graph has {graph.n} vertices, packing has {packing.n} disks")
    if graph.m == 0:
        return np.zeros(0)
    e = graph.edge_array()
    p, r = packing.centers, packing.radii
    return np.linalg.norm(p[e[:, 0]] - p[e[:, 1]], axis=1) - (r[e[:, 0]] + r[e[:, 1]])


# ---------------------------------------------------------------- JSON format


def _fmt(x) -> str:
    """17 significant digits, JSON-compatible."""
    x = float(x)
    if not np.isfinite(x):
        raise PackingFormatError(f"non-finite value {x!r} cannot be written")
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps_value(obj) -> str:
    """Serialize nested dict/list/scalars with fixed float formatting."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps_value(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps_value(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    return json.dumps(obj)


def packing_to_dict(packing: DiskPacking) -> dict:
    d = {"radii": packing.radii.tolist(), "centers": packing.centers.tolist()}
    if packing.boundary is not None:
        d["boundary"] = list(packing.boundary)
    return d


def packing_from_dict(d: dict) -> DiskPacking:
    try:
        radii = d["radii"]
        centers = d["centers"]
    except (KeyError, TypeError) as exc:
        raise PackingFormatError(f"missing field: {exc}") from exc
    try:
        return DiskPacking(np.asarray(centers, dtype=float), np.asarray(radii, dtype=float), d.get("boundary"))
    except (ValueError, TypeError) as exc:
        raise PackingFormatError(str(exc)) from exc


def dumps(packing: DiskPacking) -> str:
    return dumps_value(packing_to_dict(packing)) + "\n"


def loads(text: str) -> DiskPacking:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PackingFormatError(f"invalid JSON: {exc}") from exc
    return packing_from_dict(d)


def save(packing: DiskPacking, path) -> None:
    Path(path).write_text(dumps(packing))


def load(path) -> DiskPacking:
    return loads(Path(path).read_text())
