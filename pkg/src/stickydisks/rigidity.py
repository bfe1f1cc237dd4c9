"""Contact Jacobian, rigidity matrix, flexes and edge-length stresses.

Column layout of the contact Jacobian ``M`` is
``[p_1x, p_1y, ..., p_nx, p_ny, r_1, ..., r_n]``; the row of edge ij is the
gradient of ``||p_i - p_j||^2 - (r_i + r_j)^2`` evaluated at a contact, so
its radius entries are ``-2 ||p_i - p_j||``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentNeighbors, NotInContact, RankTolAmbiguous
from .packing import DEFAULT_TOL, ContactGraph, DiskPacking, Tolerances

AMBIGUITY_FACTOR = 10.0


@dataclass(frozen=True)
class RankInfo:
    rank: int
    singular_values: np.ndarray
    threshold: float

    @property
    def margin(self) -> float:
        """Smallest retained singular value divided by the threshold (inf if rank 0)."""
        if self.rank == 0:
            return float("inf")
        return float(self.singular_values[self.rank - 1] / self.threshold)


def numerical_rank(A: np.ndarray, tol: Tolerances = DEFAULT_TOL, strict: bool = True):
    """SVD of ``A`` with a relative rank threshold.

    Returns ``(U, s, Vt, info)`` from a full SVD. With ``strict`` a singular
    value within a factor 10 of the threshold raises RankTolAmbiguous.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.eye(A.shape[0]), np.zeros(0), np.eye(A.shape[1]), RankInfo(0, np.zeros(0), 0.0)
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return U, s, Vt, RankInfo(0, s, 0.0)
    thr = tol.rank * smax
    rank = int(np.sum(s > thr))
    if strict:
        band = (s > thr / AMBIGUITY_FACTOR) & (s < thr * AMBIGUITY_FACTOR)
        if band.any():
            raise RankTolAmbiguous(
                f"singular value(s) {s[band].tolist()} within factor {AMBIGUITY_FACTOR:g} "
                f"of rank threshold {thr:.3e}"
            )
    return U, s, Vt, RankInfo(rank, s, thr)


def _check_contacts(packing: DiskPacking, graph: ContactGraph, tol: Tolerances):
    if graph.m == 0:
        return
    e = graph.edge_array()
    p, r = packing.centers, packing.radii
    s = r[e[:, 0]] + r[e[:, 1]]
    rel = (np.linalg.norm(p[e[:, 0]] - p[e[:, 1]], axis=1) - s) / s
    bad = np.abs(rel) > tol.contact
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise NotInContact(f"edge {graph.edges[k]} has relative gap {rel[k]:.3e}")


def build_jacobian(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL,
                   check: bool = True) -> np.ndarray:
    """The m x 3n contact Jacobian."""
    if check:
        _check_contacts(packing, graph, tol)
    n = packing.n
    M = np.zeros((graph.m, 3 * n))
    p = packing.centers
    for row, (i, j) in enumerate(graph.edges):
        d = p[i] - p[j]
        M[row, 2 * i : 2 * i + 2] = 2 * d
        M[row, 2 * j : 2 * j + 2] = -2 * d
        L = np.hypot(d[0], d[1])
        M[row, 2 * n + i] = -2 * L
        M[row, 2 * n + j] = -2 * L
    return M


def rigidity_matrix(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL,
                    check: bool = True) -> np.ndarray:
    """Bar-framework rigidity matrix (m x 2n): positional block of M without the factor 2."""
    if check:
        _check_contacts(packing, graph, tol)
    R = np.zeros((graph.m, 2 * packing.n))
    p = packing.centers
    for row, (i, j) in enumerate(graph.edges):
        d = p[i] - p[j]
        R[row, 2 * i : 2 * i + 2] = d
        R[row, 2 * j : 2 * j + 2] = -d
    return R


def trivial_flex_basis(packing: DiskPacking) -> np.ndarray:
    """Rows: x-translation, y-translation, rotation about the origin (all with r' = 0)."""
    n = packing.n
    T = np.zeros((3, 2 * n))
    T[0, 0::2] = 1.0
    T[1, 1::2] = 1.0
    T[2, 0::2] = -packing.centers[:, 1]
    T[2, 1::2] = packing.centers[:, 0]
    return T


def _remove_span(K: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Orthonormal basis (rows) of the part of span(K) orthogonal to span(T)."""
    if K.shape[0] == 0:
        return K
    Q, _ = np.linalg.qr(T.T)
    Kp = K - (K @ Q) @ Q.T
    _, s, Vt = np.linalg.svd(Kp, full_matrices=False)
    keep = s > 0.5
    return Vt[keep]


@dataclass(frozen=True)
class FlexSpace:
    basis: np.ndarray  # orthonormal rows spanning ker(R)
    nontrivial: np.ndarray  # orthonormal rows, trivial motions projected out
    rank: RankInfo

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def nontrivial_dim(self) -> int:
        return self.dim - 3

    @property
    def infinitesimally_rigid(self) -> bool:
        return self.nontrivial_dim == 0


def flex_space(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> FlexSpace:
    R = rigidity_matrix(packing, graph, tol)
    _, _, Vt, info = numerical_rank(R, tol)
    K = Vt[info.rank :]
    nontriv = _remove_span(K, trivial_flex_basis(packing))
    return FlexSpace(K, nontriv, info)


def jacobian_rank(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL,
                  strict: bool = True) -> RankInfo:
    return numerical_rank(build_jacobian(packing, graph, tol), tol, strict)[3]


def edge_length_stresses(packing: DiskPacking, graph: ContactGraph,
                         tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Basis (rows) of the cokernel of M. Empty for every planar packing."""
    M = build_jacobian(packing, graph, tol)
    U, _, _, info = numerical_rank(M, tol)
    return U[:, info.rank :].T


def bar_stresses(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Basis (rows) of ordinary equilibrium stresses: the cokernel of R."""
    R = rigidity_matrix(packing, graph, tol)
    U, _, _, info = numerical_rank(R, tol)
    return U[:, info.rank :].T


def stress_residuals(packing: DiskPacking, graph: ContactGraph, omega):
    """Per-vertex residuals of the vector balance (n x 2) and the length balance (n,)."""
    omega = np.asarray(omega, dtype=float)
    n = packing.n
    vec = np.zeros((n, 2))
    length = np.zeros(n)
    p = packing.centers
    for w, (i, j) in zip(omega, graph.edges):
        d = p[i] - p[j]
        L = np.hypot(d[0], d[1])
        vec[i] += w * d
        vec[j] -= w * d
        length[i] += w * L
        length[j] += w * L
    return vec, length


def cyclic_orders(packing: DiskPacking, graph: ContactGraph) -> list:
    """For each vertex, its incident edge indices sorted by the angle of the neighbour."""
    inc = [[] for _ in range(packing.n)]
    for k, (i, j) in enumerate(graph.edges):
        inc[i].append((k, j))
        inc[j].append((k, i))
    p = packing.centers
    orders = []
    for v, items in enumerate(inc):
        if not items:
            orders.append([])
            continue
        ang = np.array([np.arctan2(*(p[w] - p[v])[::-1]) for _, w in items])
        idx = np.argsort(ang, kind="stable")
        a = np.sort(ang)
        if len(a) > 1:
            gaps = np.diff(np.append(a, a[0] + 2 * np.pi))
            if gaps.min() <= 1e-12:
                raise CoincidentNeighbors(f"two neighbours of vertex {v} share a direction")
        orders.append([items[t][0] for t in idx])
    return orders


def vertex_indices(packing: DiskPacking, graph: ContactGraph, signs, orders=None) -> np.ndarray:
    """Number of sign changes around each vertex in the embedding's cyclic order."""
    s = np.sign(np.asarray(signs, dtype=float))
    if orders is None:
        orders = cyclic_orders(packing, graph)
    out = np.zeros(packing.n, dtype=int)
    for v, seq in enumerate(orders):
        if len(seq) < 2:
            continue
        ss = s[seq]
        out[v] = int(np.count_nonzero(ss != np.roll(ss, -1)))
    return out


def index_bound_check(packing: DiskPacking, graph: ContactGraph, signs, orders=None) -> bool:
    """Sum of vertex indices is at most 4n - 8."""
    return int(vertex_indices(packing, graph, signs, orders).sum()) <= 4 * packing.n - 8


def tangent_space(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (rows) of ker(M) in R^{3n}."""
    M = build_jacobian(packing, graph, tol)
    _, _, Vt, info = numerical_rank(M, tol)
    return Vt[info.rank :]


def pi_kernel_dimension(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> int:
    """Dimension of tangent vectors with r' = 0, i.e. dim ker(R). No ambiguity error."""
    R = rigidity_matrix(packing, graph, tol)
    info = numerical_rank(R, tol, strict=False)[3]
    return 2 * packing.n - info.rank
