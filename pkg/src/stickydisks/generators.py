"""Seeded constructions of test packings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ContactGraphChanged,
    NewtonDivergence,
    NoIntersection,
    NotInfRigid,
    OverlapError,
    PlacementFailure,
)
from .newton import gauss_newton, solve_fixed_radii
from .packing import DEFAULT_TOL, ContactGraph, DiskPacking, Tolerances, contact_graph
from .rigidity import flex_space


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    n: int = 10
    radius_range: tuple = (1.0, 2.0)
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    # minimum relative gap between a freshly placed disk and non-neighbours
    clearance: float = 1e-2
    max_retries: int = 64

    def __post_init__(self):
        lo, hi = self.radius_range
        if not 0 < lo < hi:
            raise ValueError(f"radius_range must satisfy 0 < r_min < r_max, got {self.radius_range}")
        if hi / lo > 10:
            raise ValueError("radius_range ratio must not exceed 10")

    def rng(self):
        return np.random.default_rng(self.seed)


def tangent_disk_position(p_a, r_a, p_b, r_b, r_new, side=1):
    """Center of a disk of radius ``r_new`` tangent to disks a and b.

    ``side=+1`` picks the solution to the left of the directed line a -> b.
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    d_vec = p_b - p_a
    d = float(np.hypot(*d_vec))
    ra, rb = r_a + r_new, r_b + r_new
    if d == 0 or d > ra + rb or d < abs(ra - rb):
        # allow roundoff at exact tangency of the two locus circles
        if d == 0 or not (np.isclose(d, ra + rb, rtol=1e-14, atol=0) or np.isclose(d, abs(ra - rb), rtol=1e-14, atol=0)):
            raise NoIntersection(f"circles of radii {ra} and {rb} at distance {d} do not meet")
    x = (ra * ra - rb * rb + d * d) / (2 * d)
    h = np.sqrt(max(ra * ra - x * x, 0.0))
    u = d_vec / d
    v = np.array([-u[1], u[0]])
    return p_a + x * u + side * h * v


def _clear_of(centers, radii, q, r, skip, clearance):
    c = np.asarray(centers)
    rr = np.asarray(radii)
    rel = (np.linalg.norm(c - q, axis=1) - (rr + r)) / (rr + r)
    rel[list(skip)] = np.inf
    return bool(rel.min() > clearance) if len(rel) else True


def _triangle(r):
    p0 = np.zeros(2)
    p1 = np.array([r[0] + r[1], 0.0])
    p2 = tangent_disk_position(p0, r[0], p1, r[1], r[2], +1)
    return [p0, p1, p2]


def sequential_packing(config: GeneratorConfig, tol: Tolerances = DEFAULT_TOL):
    """Grow a packing from a triangle by adding disks tangent to two on the outer boundary.

    Every new disk adds exactly two contacts, so m = 2n - 3.
    """
    n = config.n
    if n < 3:
        raise ValueError("sequential_packing needs n >= 3")
    rng = config.rng()
    lo, hi = config.radius_range
    radii = list(rng.uniform(lo, hi, 3))
    centers = _triangle(radii)
    edges = [(0, 1), (0, 2), (1, 2)]
    # outer boundary as a counterclockwise cycle of directed edges
    cycle = [(0, 1), (1, 2), (2, 0)]
    for k in range(3, n):
        r_new = rng.uniform(lo, hi)
        for attempt in range(config.max_retries):
            if attempt and attempt % 8 == 0:
                r_new = rng.uniform(lo, hi)
            pos = int(rng.integers(len(cycle)))
            i, j = cycle[pos]
            q = tangent_disk_position(centers[i], radii[i], centers[j], radii[j], r_new, -1)
            if _clear_of(centers, radii, q, r_new, (i, j), config.clearance):
                break
        else:
            raise PlacementFailure(f"could not place disk {k} after {config.max_retries} attempts")
        centers.append(q)
        radii.append(r_new)
        edges += [(i, k), (j, k)]
        cycle[pos : pos + 1] = [(i, k), (k, j)]
    packing = DiskPacking(np.array(centers), np.array(radii))
    graph = contact_graph(packing, tol)
    assert set(graph.edges) == {tuple(sorted(e)) for e in edges}, "unexpected contact set"
    return packing, graph


def chain_packing(config: GeneratorConfig, collinear: bool = False, tol: Tolerances = DEFAULT_TOL):
    """Path of n disks, each tangent to the previous one (m = n - 1)."""
    n = config.n
    rng = config.rng()
    lo, hi = config.radius_range
    radii = [rng.uniform(lo, hi)]
    centers = [np.zeros(2)]
    heading = 0.0
    for k in range(1, n):
        for _ in range(config.max_retries):
            r_new = rng.uniform(lo, hi)
            turn = 0.0 if collinear else rng.uniform(-np.pi / 3, np.pi / 3)
            u = np.array([np.cos(heading + turn), np.sin(heading + turn)])
            q = centers[-1] + (radii[-1] + r_new) * u
            if _clear_of(centers, radii, q, r_new, (k - 1,), config.clearance):
                heading += turn
                break
        else:
            raise PlacementFailure(f"could not place chain disk {k}")
        centers.append(q)
        radii.append(r_new)
    packing = DiskPacking(np.array(centers), np.array(radii))
    return packing, contact_graph(packing, tol)


def unit_chain(n: int = 3) -> DiskPacking:
    """Collinear chain of unit disks at (0,0), (2,0), (4,0), ..."""
    return DiskPacking(np.column_stack([2.0 * np.arange(n), np.zeros(n)]), np.ones(n))


def triangle_packing(radii=(1.0, 1.0, 1.0)) -> DiskPacking:
    return DiskPacking(np.array(_triangle(list(radii))), np.asarray(radii, dtype=float))


def hexagonal_patch(rings: int = 1, radius: float = 1.0) -> DiskPacking:
    """Equal disks on the triangular lattice within hex distance ``rings`` of the origin."""
    if rings < 1:
        raise ValueError("rings must be >= 1")
    pts = []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            if max(abs(q), abs(r), abs(q + r)) <= rings:
                pts.append((max(abs(q), abs(r), abs(q + r)), q, r))
    pts.sort()
    a = 2.0 * radius
    centers = np.array([[a * (q + r / 2.0), a * r * np.sqrt(3) / 2.0] for _, q, r in pts])
    return DiskPacking(centers, np.full(len(pts), float(radius)))


def perturb_to_generic(packing: DiskPacking, graph: ContactGraph, delta: float,
                       config: GeneratorConfig = GeneratorConfig(), tol: Tolerances = DEFAULT_TOL) -> DiskPacking:
    """Perturb radii by relative uniform noise of size ``delta`` and re-solve the contacts.

    Requires an infinitesimally rigid framework; the result keeps the exact
    contact graph or raises.
    """
    if not flex_space(packing, graph, tol).infinitesimally_rigid:
        raise NotInfRigid("perturbation needs an infinitesimally rigid packing")
    rng = config.rng()
    radii = packing.radii * (1.0 + delta * rng.uniform(-1.0, 1.0, packing.n))
    res = solve_fixed_radii(packing.centers, radii, graph.edges, tol=config.newton_tol,
                            max_iter=config.newton_max_iter)
    out = DiskPacking(res.x, radii, packing.boundary)
    try:
        g2 = contact_graph(out, tol)
    except OverlapError as exc:
        raise ContactGraphChanged(f"perturbation created overlaps {list(exc.report.overlaps)}") from exc
    if set(g2.edges) != set(graph.edges):
        added = sorted(set(g2.edges) - set(graph.edges))
        lost = sorted(set(graph.edges) - set(g2.edges))
        raise ContactGraphChanged(f"contacts added {added}, lost {lost}")
    return out


# ------------------------------------------------------------------ tri-cusp


def tri_cusp_boundary(radii) -> np.ndarray:
    return np.array(_triangle(list(radii)))


def inner_soddy_radius(r1, r2, r3) -> float:
    """Radius of the circle inside and tangent to three mutually tangent circles."""
    k1, k2, k3 = 1 / r1, 1 / r2, 1 / r3
    return 1.0 / (k1 + k2 + k3 + 2 * np.sqrt(k1 * k2 + k2 * k3 + k3 * k1))


def _in_triangle(q, tri):
    a, b, c = tri
    def o(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])
    s1, s2, s3 = o(a, b, q), o(b, c, q), o(c, a, q)
    return (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0)


def _cusp_radii(bnd, shape, t):
    return np.concatenate([bnd, t * shape])


def solve_tri_cusp(centers, boundary_radii, shape, edges, t, solve_scale=False,
                   tol=1e-12, max_iter=50):
    """Newton solve for interior centers (and optionally the interior scale ``t``).

    Boundary disks are held fixed. Interior radii are ``t * shape``.
    Returns (centers, t, NewtonResult).
    """
    centers = np.asarray(centers, dtype=float)
    bnd = np.asarray(boundary_radii, dtype=float)
    shape = np.asarray(shape, dtype=float)
    n = centers.shape[0]
    e = np.array([ed for ed in edges if not (ed[0] < 3 and ed[1] < 3)], dtype=int).reshape(-1, 2)
    interior = np.zeros(n, dtype=bool)
    interior[3:] = True
    sh = np.concatenate([np.zeros(3), shape])

    def unpack(x):
        full = centers.copy()
        full[3:] = x[: 2 * (n - 3)].reshape(-1, 2)
        tt = x[-1] if solve_scale else t
        return full, tt

    def fun(x):
        full, tt = unpack(x)
        r = _cusp_radii(bnd, shape, tt)
        d = full[e[:, 0]] - full[e[:, 1]]
        L = np.linalg.norm(d, axis=1)
        f = L - (r[e[:, 0]] + r[e[:, 1]])
        J = np.zeros((len(e), 2 * n + 1))
        with np.errstate(invalid="ignore", divide="ignore"):
            u = d / L[:, None]
        rows = np.arange(len(e))
        for c in range(2):
            J[rows, 2 * e[:, 0] + c] = u[:, c]
            J[rows, 2 * e[:, 1] + c] = -u[:, c]
        J[:, -1] = -(sh[e[:, 0]] + sh[e[:, 1]])
        cols = list(range(6, 2 * n)) + ([2 * n] if solve_scale else [])
        return f, J[:, cols]

    x0 = centers[3:].ravel()
    if solve_scale:
        x0 = np.append(x0, t)
    res = gauss_newton(fun, x0, tol, max_iter)
    full, tt = unpack(res.x)
    return full, float(tt), res


def _place_interior(rng, bcenters, bradii, shape, t, config):
    tri = bcenters
    centers = list(bcenters)
    radii = list(bradii)
    edges = [(0, 1), (0, 2), (1, 2)]
    for k in range(len(shape)):
        r_new = t * shape[k]
        cand = [(i, j, s) for i in range(len(centers)) for j in range(i + 1, len(centers)) for s in (1, -1)]
        order = rng.permutation(len(cand))
        placed = False
        for idx in order[: max(config.max_retries, 1) * 4]:
            i, j, s = cand[idx]
            try:
                q = tangent_disk_position(centers[i], radii[i], centers[j], radii[j], r_new, s)
            except NoIntersection:
                continue
            if not _in_triangle(q, tri):
                continue
            if _clear_of(centers, radii, q, r_new, (i, j), config.clearance):
                centers.append(q)
                radii.append(r_new)
                edges += [(i, 3 + k), (j, 3 + k)]
                placed = True
                break
        if not placed:
            return None
    return np.array(centers), edges


def grow_tri_cusp(centers, boundary_radii, shape, edges, t, tol: Tolerances = DEFAULT_TOL,
                  newton_tol=1e-12, max_steps=10000):
    """Scale the interior radii up (ratios fixed), keeping the listed contacts, until a new contact forms.

    Returns (centers, t, edges). If the branch folds before any new contact,
    the last state is returned with the original edge set.
    """
    bnd = np.asarray(boundary_radii, dtype=float)
    shape = np.asarray(shape, dtype=float)
    edges = [tuple(sorted(e)) for e in edges]
    eset = set(edges)
    n = len(centers)
    iu, ju = np.triu_indices(n, 1)
    nonedge = np.array([(a, b) not in eset for a, b in zip(iu, ju)])

    def min_gap(c, tt):
        p = DiskPacking(c, _cusp_radii(bnd, shape, tt))
        g = p.relative_gaps()[iu, ju]
        g = np.where(nonedge, g, np.inf)
        return g

    dt = 0.05 * t
    for _ in range(max_steps):
        if dt < 1e-12 * t:
            return centers, t, edges
        try:
            c_new, _, _ = solve_tri_cusp(centers, bnd, shape, edges, t + dt, tol=newton_tol)
        except NewtonDivergence:
            dt /= 2
            continue
        g = min_gap(c_new, t + dt)
        if g.min() > 0:
            if np.max(np.abs(c_new - centers)) > 0.25 * t * shape.min():
                dt /= 2
                continue
            centers, t = c_new, t + dt
            dt *= 1.5
            continue
        # bracket the first new contact, then solve for it exactly
        lo, hi, c_lo = t, t + dt, centers
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            c_mid, _, _ = solve_tri_cusp(c_lo, bnd, shape, edges, mid, tol=newton_tol)
            if min_gap(c_mid, mid).min() > 0:
                lo, c_lo = mid, c_mid
            else:
                hi = mid
            if hi - lo < 1e-9 * t:
                break
        g = min_gap(c_lo, lo)
        k = int(np.argmin(g))
        new_edge = (int(iu[k]), int(ju[k]))
        all_edges = edges + [new_edge]
        c_fin, t_fin, _ = solve_tri_cusp(c_lo, bnd, shape, all_edges, lo, solve_scale=True, tol=newton_tol)
        return c_fin, t_fin, all_edges
    return centers, t, edges


def tri_cusp_packing(config: GeneratorConfig, interior_n: int, boundary_radii=None,
                     grow: bool = True, tol: Tolerances = DEFAULT_TOL):
    """Packing in a tri-cusp: disks 0, 1, 2 are the mutually tangent boundary.

    Interior relative sizes are drawn from ``config.radius_range`` so the
    ratios are generic-like. Interior disks are placed tangent to two
    existing disks, then (``grow=True``) scaled up until one extra contact
    appears, giving 2n - 2 contacts for generic ratios.
    """
    if interior_n < 1:
        raise ValueError("interior_n must be >= 1")
    rng = config.rng()
    lo, hi = config.radius_range
    bnd = np.asarray(boundary_radii if boundary_radii is not None else rng.uniform(lo, hi, 3), dtype=float)
    shape = rng.uniform(lo, hi, interior_n)
    shape = shape / shape.max()
    bc = tri_cusp_boundary(bnd)
    t = inner_soddy_radius(*bnd) / (2.0 * np.sqrt(interior_n))
    placed = None
    for _ in range(config.max_retries):
        placed = _place_interior(rng, bc, bnd, shape, t, config)
        if placed is not None:
            break
        t *= 0.8
    if placed is None:
        raise PlacementFailure(f"could not place {interior_n} interior disks")
    centers, edges = placed
    if grow:
        centers, t, edges = grow_tri_cusp(centers, bnd, shape, edges, t, tol, config.newton_tol)
    packing = DiskPacking(centers, _cusp_radii(bnd, shape, t), boundary=(0, 1, 2))
    graph = contact_graph(packing, tol)
    return packing, graph


def _corner_position(bc, bnd, i, j, r):
    for side in (1, -1):
        q = tangent_disk_position(bc[i], bnd[i], bc[j], bnd[j], r, side)
        if _in_triangle(q, bc):
            return q
    raise PlacementFailure(f"no position tangent to boundary disks {i}, {j} inside the cusp")


def tri_cusp_from_seeds(boundary_radii, shape, seeds, expected_edges=None, t0=0.01,
                        tol: Tolerances = DEFAULT_TOL):
    """Grow a tri-cusp packing from hand-specified initial tangencies.

    ``seeds[k] = (i, j)`` or ``(i, j, side)`` places interior disk ``3 + k``
    tangent to disks i and j (j may be an earlier interior disk); ``side``
    picks the tangent position left (+1) or right (-1) of i -> j. The interior
    scale then grows until one more contact forms; the final state is the
    Newton solution of all tangency equations with the scale unknown. If
    ``expected_edges`` is given the resulting contact set must match it.
    """
    bnd = np.asarray(boundary_radii, dtype=float)
    shape = np.asarray(shape, dtype=float)
    bc = tri_cusp_boundary(bnd)
    centers = list(bc)
    radii = list(bnd)
    edges = [(0, 1), (0, 2), (1, 2)]
    for k, seed in enumerate(seeds):
        i, j = seed[:2]
        sides = seed[2:] or (1, -1)
        r = t0 * shape[k]
        if i < 3 and j < 3:
            q = _corner_position(bc, bnd, i, j, r)
        else:
            q = None
            for side in sides:
                cand = tangent_disk_position(centers[i], radii[i], centers[j], radii[j], r, side)
                if _in_triangle(cand, bc) and _clear_of(centers, radii, cand, r, (i, j), 0.0):
                    q = cand
                    break
            if q is None:
                raise PlacementFailure(f"cannot seed interior disk {3 + k} against {(i, j)}")
        if not _clear_of(centers, radii, q, r, (i, j), 0.0):
            raise PlacementFailure(f"seed of interior disk {3 + k} overlaps")
        centers.append(q)
        radii.append(r)
        edges += [(i, 3 + k), (j, 3 + k)]
    c, t, edges = grow_tri_cusp(np.array(centers), bnd, shape, edges, t0, tol)
    packing = DiskPacking(c, _cusp_radii(bnd, shape, t), boundary=(0, 1, 2))
    graph = contact_graph(packing, tol)
    if expected_edges is not None:
        want = {tuple(sorted(e)) for e in expected_edges}
        if set(graph.edges) != want:
            raise PlacementFailure(f"construction produced contacts {graph.edges}, expected {sorted(want)}")
    return packing, graph


FIG5_BOUNDARY = (1.0, 1.2, 0.9)

FIG5A_EDGES = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (0, 4), (2, 4), (3, 4)]
FIG5B_EDGES = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (0, 4), (1, 4), (3, 4)]


def fig5a(tol: Tolerances = DEFAULT_TOL):
    """Jammed tri-cusp packing, n = 5, 8 contacts.

    Interior disks sit in two different cusp corners (touching 0, 1 and
    0, 2) and press against each other.
    """
    return tri_cusp_from_seeds(FIG5_BOUNDARY, (1.0, 0.8), [(0, 1), (0, 2)], FIG5A_EDGES, tol=tol)


def fig5b(tol: Tolerances = DEFAULT_TOL):
    """Tri-cusp packing with 8 = 2n - 2 contacts that is not jammed.

    Both interior disks touch boundary disks 0 and 1 and each other,
    stacked in the same corner; the outer one can back out of the corner.
    """
    return tri_cusp_from_seeds(FIG5_BOUNDARY, (1.0, 0.6), [(0, 1), (0, 3, -1)], FIG5B_EDGES, tol=tol)


def symmetric_tri_cusp(radius: float = 1.0, tol: Tolerances = DEFAULT_TOL):
    """Equal boundary disks with three equal interior disks, one per corner, touching each other.

    Non-generic: 12 contacts against the generic bound 2n - 2 = 10.
    """
    return tri_cusp_from_seeds((radius,) * 3, (1.0, 1.0, 1.0), [(0, 1), (1, 2), (0, 2)], tol=tol)
