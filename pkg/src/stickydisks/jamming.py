"""First-order jamming of packings in a tri-cusp.

Disks named by ``packing.boundary`` (default 0, 1, 2) are the three mutually
tangent container disks. A tensegrity flex keeps the boundary triangle's
edge lengths fixed to first order and lets every other contact only open.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DegenerateGauge, LPNumericalFailure
from .lp import simplex_max
from .packing import DEFAULT_TOL, ContactGraph, DiskPacking, Tolerances
from .rigidity import build_jacobian, flex_space, numerical_rank, trivial_flex_basis


@dataclass
class TensegrityVerdict:
    jammed: bool
    witness: Optional[np.ndarray]  # n x 2 velocities, boundary pinned
    max_slack: Fraction
    stage: Optional[str] = None  # "A" (bar flex) or "B" (strict strut flex)
    slacks: dict = field(default_factory=dict)  # edge -> extension rate of the witness


def boundary_of(packing: DiskPacking) -> tuple:
    return packing.boundary if packing.boundary is not None else (0, 1, 2)


def _check_boundary(packing, graph):
    a, b, c = boundary_of(packing)
    for i, j in ((a, b), (a, c), (b, c)):
        if not graph.has_edge(i, j):
            raise DegenerateGauge(f"boundary edge {(i, j)} is not a contact")
    p = packing.centers
    area = (p[b, 0] - p[a, 0]) * (p[c, 1] - p[a, 1]) - (p[b, 1] - p[a, 1]) * (p[c, 0] - p[a, 0])
    if abs(area) <= 1e-12 * np.ptp(p[[a, b, c]]) ** 2:
        raise DegenerateGauge("boundary triangle is degenerate")


def pin_gauge(packing: DiskPacking, v) -> np.ndarray:
    """Subtract the trivial motion that fixes boundary disk a and the tangential motion of b."""
    a, b, _ = boundary_of(packing)
    p = packing.centers
    v = np.asarray(v, dtype=float).reshape(-1, 2)
    d = p[b] - p[a]
    Jd = np.array([-d[1], d[0]])
    omega = Jd @ (v[b] - v[a]) / (d @ d)
    rel = p - p[a]
    rot = np.column_stack([-rel[:, 1], rel[:, 0]])
    return v - v[a] - omega * rot


def nontrivial_norm(packing: DiskPacking, v) -> float:
    """Norm of ``v`` after removing its orthogonal projection onto the trivial motions."""
    v = np.asarray(v, dtype=float).ravel()
    Q, _ = np.linalg.qr(trivial_flex_basis(packing).T)
    return float(np.linalg.norm(v - Q @ (Q.T @ v)))


def edge_rates(packing: DiskPacking, graph: ContactGraph, v) -> np.ndarray:
    """(p_j - p_i) . (v_j - v_i) for every edge."""
    v = np.asarray(v, dtype=float).reshape(-1, 2)
    p = packing.centers
    e = graph.edge_array()
    return np.einsum("ij,ij->i", p[e[:, 1]] - p[e[:, 0]], v[e[:, 1]] - v[e[:, 0]])


def _stage_b(packing, graph):
    a, b, c = boundary_of(packing)
    tri = {tuple(sorted(e)) for e in ((a, b), (a, c), (b, c))}
    n = packing.n
    P = [(Fraction(x), Fraction(y)) for x, y in packing.centers]
    d_ab = (P[b][0] - P[a][0], P[b][1] - P[a][1])

    # free scalar unknowns: alpha (p'_b = alpha * d_ab) and x, y for other disks
    free_index = {}
    nfree = 1
    for k in range(n):
        if k not in (a, b):
            free_index[k] = nfree
            nfree += 2

    def velocity(k):
        """Velocity of disk k as {free var: (cx, cy)}."""
        if k == a:
            return {}
        if k == b:
            return {0: d_ab}
        f = free_index[k]
        return {f: (Fraction(1), Fraction(0)), f + 1: (Fraction(0), Fraction(1))}

    interior = [e for e in graph.edges if e not in tri]
    ni = len(interior)
    ncol = 2 * nfree + 2 * ni
    rows, rhs = [], []

    def edge_row(i, j):
        dx, dy = P[j][0] - P[i][0], P[j][1] - P[i][1]
        coef = [Fraction(0)] * nfree
        for k, sgn in ((j, 1), (i, -1)):
            for var, (cx, cy) in velocity(k).items():
                coef[var] += sgn * (dx * cx + dy * cy)
        row = [Fraction(0)] * ncol
        for var, cv in enumerate(coef):
            row[2 * var] = cv
            row[2 * var + 1] = -cv
        return row

    for i, j in sorted(tri):
        rows.append(edge_row(i, j))
        rhs.append(0)
    for k, (i, j) in enumerate(interior):
        row = edge_row(i, j)
        row[2 * nfree + k] = Fraction(-1)
        rows.append(row)
        rhs.append(0)
    for k in range(ni):
        row = [Fraction(0)] * ncol
        row[2 * nfree + k] = Fraction(1)
        row[2 * nfree + ni + k] = Fraction(1)
        rows.append(row)
        rhs.append(1)
    cost = [0] * (2 * nfree) + [1] * ni + [0] * ni
    res = simplex_max(cost, rows, rhs)
    if res.status != "optimal":
        raise LPNumericalFailure(f"tensegrity LP returned status {res.status}")

    val = [res.x[2 * v] - res.x[2 * v + 1] for v in range(nfree)]
    w = np.zeros((n, 2))
    for k in range(n):
        for var, (cx, cy) in velocity(k).items():
            w[k, 0] += float(val[var] * cx)
            w[k, 1] += float(val[var] * cy)
    slacks = {e: res.x[2 * nfree + k] for k, e in enumerate(interior)}
    return res.value, w, slacks


def tensegrity_flex_lp(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> TensegrityVerdict:
    """Decide infinitesimal collective jamming.

    Stage A looks for a nontrivial flex of the bar framework on all
    contacts; Stage B maximises the total strut extension rate (each capped
    at 1) with an exact rational simplex. Jammed iff both find nothing.
    """
    _check_boundary(packing, graph)
    fs = flex_space(packing, graph, tol)
    if fs.nontrivial_dim > 0:
        w = pin_gauge(packing, fs.nontrivial[0])
        w /= np.abs(w).max()
        rates = edge_rates(packing, graph, w)
        return TensegrityVerdict(False, w, Fraction(0), "A", dict(zip(graph.edges, rates.tolist())))
    value, w, slacks = _stage_b(packing, graph)
    if value > 0:
        return TensegrityVerdict(False, w, value, "B", slacks)
    return TensegrityVerdict(True, None, value, None, {})


def isostatic_count_check(packing: DiskPacking, graph: ContactGraph) -> dict:
    bound = 2 * packing.n - 2
    return {
        "m": graph.m,
        "bound": bound,
        "within_bound": graph.m <= bound,
        "isostatic": graph.m == bound,
    }


def tri_cusp_pi_kernel(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Tangent vectors (p', r') with boundary r' = 0 and interior r' proportional to r.

    Rows are an orthonormal basis in R^{3n}; for generic interior ratios the
    dimension is 2n - m + 1.
    """
    n = packing.n
    bnd = set(boundary_of(packing))
    M = build_jacobian(packing, graph, tol)
    grow = np.zeros(3 * n)
    for k in range(n):
        if k not in bnd:
            grow[2 * n + k] = packing.radii[k]
    # parametrise (p', lambda) -> (p', lambda * r_interior)
    B = np.zeros((3 * n, 2 * n + 1))
    B[: 2 * n, : 2 * n] = np.eye(2 * n)
    B[:, -1] = grow
    _, _, Vt, info = numerical_rank(M @ B, tol)
    K = Vt[info.rank :] @ B.T
    if K.shape[0] == 0:
        return K
    Qk, _ = np.linalg.qr(K.T)
    return Qk.T


def pi_kernel_scaling_check(packing: DiskPacking, graph: ContactGraph, tangent, rtol: float = 1e-9) -> bool:
    """Boundary r' vanish and interior r' are proportional to the interior radii."""
    n = packing.n
    t = np.asarray(tangent, dtype=float)
    rp = t[2 * n :]
    scale = np.linalg.norm(rp) * np.linalg.norm(packing.radii)
    if scale == 0:
        return True
    bnd = list(boundary_of(packing))
    if np.any(np.abs(rp[bnd]) > rtol * np.linalg.norm(rp)):
        return False
    inner = [k for k in range(n) if k not in bnd]
    if not inner:
        return True
    last = inner[-1]
    r = packing.radii
    cross = rp[inner] * r[last] - rp[last] * r[inner]
    return bool(np.all(np.abs(cross) <= rtol * scale))


def spine_decomposition(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL):
    """Split disks into a jammed spine and rattlers.

    Repeatedly solves the tensegrity LP on the current sub-packing and drops
    every interior disk the witness moves, until the remainder is jammed.
    Returns sorted tuples (spine, rattlers) of original indices.
    """
    bnd = boundary_of(packing)
    current = list(range(packing.n))
    while True:
        sub = packing.subset(current)
        sg = graph.induced(current)
        verdict = tensegrity_flex_lp(sub, sg, tol)
        if verdict.jammed:
            break
        mag = np.linalg.norm(verdict.witness, axis=1)
        moving = {current[k] for k in range(len(current)) if mag[k] > 1e-9 * mag.max() and current[k] not in bnd}
        if not moving:
            raise LPNumericalFailure("non-jammed verdict whose witness moves no interior disk")
        current = [v for v in current if v not in moving]
    spine = tuple(sorted(current))
    rattlers = tuple(sorted(set(range(packing.n)) - set(current)))
    return spine, rattlers
