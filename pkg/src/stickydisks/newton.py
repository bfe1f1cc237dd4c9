"""Gauss-Newton solves for contact equations with a pinned rigid-motion gauge."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NewtonDivergence


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    history: list = field(default_factory=list)


def gauss_newton(fun, x0, tol=1e-12, max_iter=20, min_iter=0):
    """Minimum-norm Gauss-Newton iteration for ``fun(x) -> (f, J)``.

    Stops once ``max|f| <= tol`` (after at least ``min_iter`` steps).
    ``history`` records ``max|f|`` before each step and at the end.
    """
    x = np.array(x0, dtype=float)
    history = []
    for it in range(max_iter + 1):
        f, J = fun(x)
        res = float(np.max(np.abs(f))) if f.size else 0.0
        history.append(res)
        if not np.isfinite(res) or not np.all(np.isfinite(J)):
            raise NewtonDivergence(f"non-finite residual after {it} iterations")
        if res <= tol and it >= min_iter:
            return NewtonResult(x, res, it, history)
        if it == max_iter:
            break
        try:
            dx = np.linalg.lstsq(J, -f, rcond=None)[0]
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"least-squares step failed: {exc}") from exc
        x = x + dx
    raise NewtonDivergence(f"no convergence in {max_iter} iterations (residual {history[-1]:.3e})")


def contact_residual(centers, edges, targets):
    """Edge residuals ||p_i - p_j|| - target and their Jacobian w.r.t. the 2n coordinates."""
    e = np.asarray(edges, dtype=int).reshape(-1, 2)
    n = centers.shape[0]
    d = centers[e[:, 0]] - centers[e[:, 1]]
    L = np.linalg.norm(d, axis=1)
    f = L - targets
    J = np.zeros((len(e), 2 * n))
    u = d / L[:, None]
    rows = np.arange(len(e))
    for c in range(2):
        J[rows, 2 * e[:, 0] + c] = u[:, c]
        J[rows, 2 * e[:, 1] + c] = -u[:, c]
    return f, J


def gauge_frame(centers, a, b):
    """Rotation that maps p_b - p_a onto the positive x axis, plus the origin p_a."""
    d = centers[b] - centers[a]
    c, s = d / np.hypot(d[0], d[1])
    Q = np.array([[c, s], [-s, c]])
    return Q, centers[a].copy()


def gauge_free_mask(n, a, b):
    """Free coordinates in the gauge frame: all but p_a and the y-coordinate of p_b."""
    free = np.ones(2 * n, dtype=bool)
    free[2 * a : 2 * a + 2] = False
    free[2 * b + 1] = False
    return free


def default_anchors(n, edges):
    """Anchor disk 0 and its lowest-index neighbour (disk 1 if it has none)."""
    nb = sorted([j for i, j in edges if i == 0] + [i for i, j in edges if j == 0])
    return 0, (nb[0] if nb else 1)


def solve_fixed_radii(centers, radii, edges, anchors=None, tol=1e-12, max_iter=20, min_iter=0):
    """Move centers (gauge pinned) until every edge is tangent at the given radii.

    Returns a NewtonResult whose ``x`` is the n x 2 center array in the
    original frame.
    """
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = centers.shape[0]
    e = np.asarray(edges, dtype=int).reshape(-1, 2)
    targets = radii[e[:, 0]] + radii[e[:, 1]]
    a, b = anchors if anchors is not None else default_anchors(n, edges)
    Q, origin = gauge_frame(centers, a, b)
    local = (centers - origin) @ Q.T
    free = gauge_free_mask(n, a, b)
    base = local.ravel().copy()

    def fun(x):
        full = base.copy()
        full[free] = x
        f, J = contact_residual(full.reshape(n, 2), e, targets)
        return f, J[:, free]

    out = gauss_newton(fun, base[free], tol, max_iter, min_iter)
    full = base.copy()
    full[free] = out.x
    out.x = full.reshape(n, 2) @ Q + origin
    return out
