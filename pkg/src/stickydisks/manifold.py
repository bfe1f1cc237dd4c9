"""Following flexes along the fixed-radius fiber with a predictor-corrector scheme."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ContactBroken,
    CorrectorDivergence,
    NewContact,
    NewtonDivergence,
    RigidInput,
    StratumExit,
)
from .newton import contact_residual, default_anchors, gauge_frame, gauge_free_mask, gauss_newton
from .packing import DEFAULT_TOL, ContactGraph, DiskPacking, Tolerances
from .rigidity import numerical_rank, rigidity_matrix

CORRECTOR_TOL = 1e-12
CORRECTOR_MAX_ITER = 20
MAX_STEP_FRACTION = 1e-2


@dataclass
class FlexTrajectory:
    states: list  # DiskPacking per step, states[0] is the input
    h: float
    residuals: list  # max relative edge gap per state
    newton_histories: list = field(default_factory=list)  # per corrector call, max|f| per iteration
    directions: list = field(default_factory=list)  # unit predictor that produced states[k + 1] (original frame)
    anchors: tuple = (0, 1)

    def __len__(self):
        return len(self.states)


def _sign_fix(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    return -v if v[nz[0]] < 0 else v


def _relative_edge_gaps(centers, radii, e):
    s = radii[e[:, 0]] + radii[e[:, 1]]
    return (np.linalg.norm(centers[e[:, 0]] - centers[e[:, 1]], axis=1) - s) / s


def _nonedge_mask(n, graph):
    mask = np.triu(np.ones((n, n), dtype=bool), 1)
    for i, j in graph.edges:
        mask[i, j] = False
    return mask


def _nonedge_gaps(centers, radii, mask):
    d = np.linalg.norm(centers[:, None] - centers[None, :], axis=-1)
    s = radii[:, None] + radii[None, :]
    return ((d - s) / s)[mask]


def follow_flex(packing: DiskPacking, graph: ContactGraph, steps: int, h: float,
                direction=None, tol: Tolerances = DEFAULT_TOL) -> FlexTrajectory:
    """Euler predictor along a nontrivial flex, Gauss-Newton corrector at fixed radii.

    The gauge pins the center of disk ``a`` and the motion of disk ``b``
    perpendicular to ``p_b - p_a`` (anchors as in the generators). The
    initial direction is the first kernel vector with its first nonzero
    coordinate made positive, or the projection of ``direction`` (a 2n
    vector) onto the kernel; later steps keep continuity with the previous
    direction. Leaving the contact stratum raises a StratumExit subclass
    carrying the step index and the accepted part of the trajectory
    (``exc.trajectory``).
    """
    n = packing.n
    radii = packing.radii
    if h <= 0 or h > MAX_STEP_FRACTION * float(radii.min()):
        raise ValueError(f"step h must lie in (0, {MAX_STEP_FRACTION:g} * min radius]")
    e = graph.edge_array()
    targets = radii[e[:, 0]] + radii[e[:, 1]]
    a, b = default_anchors(n, graph.edges)
    Q, origin = gauge_frame(packing.centers, a, b)
    free = gauge_free_mask(n, a, b)
    mask = _nonedge_mask(n, graph)

    def to_global(local):
        return local @ Q + origin

    def kernel(local):
        _, J = contact_residual(local, e, targets)
        _, _, Vt, info = numerical_rank(J[:, free], tol)
        return Vt[info.rank :]

    # rigidity_matrix validates that every edge is a contact
    rigidity_matrix(packing, graph, tol)
    local = (packing.centers - origin) @ Q.T
    K = kernel(local)
    if K.shape[0] == 0:
        raise RigidInput("packing has no nontrivial flex")

    if direction is None:
        t = _sign_fix(K[0])
    else:
        d = np.asarray(direction, dtype=float).reshape(n, 2) @ Q.T
        t = K.T @ (K @ d.ravel()[free])
        if np.linalg.norm(t) == 0:
            raise ValueError("direction has no component along the flex space")
    t = t / np.linalg.norm(t)

    traj = FlexTrajectory([packing], h, [float(np.abs(_relative_edge_gaps(packing.centers, radii, e)).max(initial=0.0))],
                          anchors=(a, b))
    prev_gap = _nonedge_gaps(packing.centers, radii, mask)
    x = local.ravel()[free].copy()
    base = local.ravel().copy()

    def fun(z):
        full = base.copy()
        full[free] = z
        f, J = contact_residual(full.reshape(n, 2), e, targets)
        return f, J[:, free]

    try:
        for step in range(1, steps + 1):
            full_t = np.zeros(2 * n)
            full_t[free] = t
            used = (full_t.reshape(n, 2) @ Q).ravel()
            try:
                res = gauss_newton(fun, x + h * t, CORRECTOR_TOL, CORRECTOR_MAX_ITER)
            except NewtonDivergence as exc:
                raise CorrectorDivergence(str(exc), step) from exc
            x = res.x
            base[free] = x
            local = base.reshape(n, 2).copy()
            centers = to_global(local)
            gaps = _relative_edge_gaps(centers, radii, e)
            worst = float(np.abs(gaps).max(initial=0.0))
            if worst > tol.contact:
                k = int(np.argmax(np.abs(gaps)))
                raise ContactBroken(f"edge {graph.edges[k]} has relative gap {gaps[k]:.3e}", step)
            ng = _nonedge_gaps(centers, radii, mask)
            hit = (ng < -tol.contact) | ((ng <= tol.contact) & (prev_gap > tol.contact))
            if hit.any():
                iu, ju = np.nonzero(mask)
                k = int(np.flatnonzero(hit)[0])
                raise NewContact(f"pair {(int(iu[k]), int(ju[k]))} reached relative gap {ng[k]:.3e}", step)
            prev_gap = ng
            traj.states.append(DiskPacking(centers, radii, packing.boundary))
            traj.residuals.append(worst)
            traj.newton_histories.append(res.history)
            traj.directions.append(used)

            K = kernel(local)
            t_new = K.T @ (K @ t)
            norm = np.linalg.norm(t_new)
            if norm == 0:
                raise CorrectorDivergence("flex direction lost continuity", step)
            t = t_new / norm
    except StratumExit as exc:
        exc.trajectory = traj
        raise
    return traj


def procrustes_distance(X, Y) -> float:
    """Distance between point sets after the best rotation and translation of Y onto X."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    # optimal angle for rotating Yc onto Xc
    dot = float(np.sum(Xc * Yc))
    cross = float(np.sum(Yc[:, 0] * Xc[:, 1] - Yc[:, 1] * Xc[:, 0]))
    th = np.arctan2(cross, dot)
    c, s = np.cos(th), np.sin(th)
    Yr = Yc @ np.array([[c, s], [-s, c]])
    return float(np.linalg.norm(Xc - Yr))


def displacement_profile(traj: FlexTrajectory) -> np.ndarray:
    """Rigid-motion-quotiented distance of every state from the initial one."""
    X = traj.states[0].centers
    return np.array([procrustes_distance(X, s.centers) for s in traj.states])


def nontrivial_displacement(traj: FlexTrajectory) -> float:
    if not traj.states:
        raise ValueError("empty trajectory")
    return float(displacement_profile(traj)[-1])


def fiber_dimension(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> int:
    """Dimension of ker R, the tangent space of the fixed-radius fiber (trivial motions included)."""
    R = rigidity_matrix(packing, graph, tol)
    _, _, _, info = numerical_rank(R, tol)
    return 2 * packing.n - info.rank


@dataclass(frozen=True)
class FiberReport:
    dimension: int
    expected: int  # 2n - m, the value for generic radii
    non_generic: bool


def fiber_report(packing: DiskPacking, graph: ContactGraph, tol: Tolerances = DEFAULT_TOL) -> FiberReport:
    dim = fiber_dimension(packing, graph, tol)
    expected = 2 * packing.n - graph.m
    return FiberReport(dim, expected, dim != expected)


def chain_bond_angle(traj: FlexTrajectory, pivot: int = 1, moving: int = 2) -> np.ndarray:
    """Angle of the bond pivot -> moving relative to its initial direction, per state (unwrapped)."""
    ang = []
    for s in traj.states:
        d = s.centers[moving] - s.centers[pivot]
        ang.append(np.arctan2(d[1], d[0]))
    ang = np.unwrap(np.array(ang))
    return ang - ang[0]
