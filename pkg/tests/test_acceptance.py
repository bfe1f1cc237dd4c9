"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Lines are printed immediately (visible with ``-s``) and repeated in the
pytest terminal summary.
"""

import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from stickydisks.combinatorics import embedding_is_planar, pebble_game_2_3, subgraph_oracle
from stickydisks.errors import StickyDiskError
from stickydisks.generators import (
    GeneratorConfig,
    chain_packing,
    fig5a,
    fig5b,
    hexagonal_patch,
    perturb_to_generic,
    sequential_packing,
    tri_cusp_packing,
    unit_chain,
)
from stickydisks.jamming import edge_rates, isostatic_count_check, tensegrity_flex_lp
from stickydisks.manifold import chain_bond_angle, fiber_dimension, fiber_report, follow_flex
from stickydisks.packing import DiskPacking, contact_graph, gap_vector
from stickydisks.rigidity import (
    bar_stresses,
    build_jacobian,
    cyclic_orders,
    flex_space,
    numerical_rank,
    rigidity_matrix,
    stress_residuals,
    tangent_space,
    vertex_indices,
)

RESULTS = {}
CORPUS_SIZE = 200


@contextmanager
def criterion(number, title):
    detail = {}
    try:
        yield detail
    except BaseException:
        line = f"[FAIL] criterion {number:2d}: {title}"
        RESULTS[number] = line
        print(line)
        raise
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    line = f"[PASS] criterion {number:2d}: {title}" + (f" ({extra})" if extra else "")
    RESULTS[number] = line
    print(line)


def corpus_params(k):
    return GeneratorConfig(seed=k, n=3 + k % 38)


@pytest.fixture(scope="module")
def corpus():
    return [sequential_packing(corpus_params(k)) for k in range(CORPUS_SIZE)]


def test_criterion_01_sequential_upper_bound():
    with criterion(1, "200 sequential packings: m = 2n-3, Laman, planar, < 10 s") as d:
        t0 = time.perf_counter()
        oracle_checked = 0
        for k in range(CORPUS_SIZE):
            p, g = sequential_packing(corpus_params(k))
            n = p.n
            assert g.m == 2 * n - 3, (k, n, g.m)
            rep = pebble_game_2_3(g)
            assert rep.is_laman_sparse and rep.is_laman_graph
            if n <= 10:
                orc = subgraph_oracle(g)
                assert orc.is_laman_sparse == rep.is_laman_sparse
                assert orc.is_laman_graph == rep.is_laman_graph
                oracle_checked += 1
            assert embedding_is_planar(p, g)
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0
        d["seconds"] = f"{elapsed:.2f}"
        d["oracle_checked"] = oracle_checked


def test_criterion_02_rigidity_dichotomy(corpus):
    with criterion(2, "rank R = 2n-3 with margin >= 1e6; one contact removed gives flex dim 1") as d:
        rng = np.random.default_rng(2024)
        worst = np.inf
        for p, g in corpus:
            fs = flex_space(p, g)
            assert fs.nontrivial_dim == 0
            assert fs.rank.rank == 2 * p.n - 3
            worst = min(worst, fs.rank.margin)
            assert fs.rank.margin >= 1e6
            k = int(rng.integers(g.m))
            assert flex_space(p, g.without_edge(k)).nontrivial_dim == 1
        d["min_margin"] = f"{worst:.3g}"


def test_criterion_03_jacobian_rank_and_hex_stress(corpus):
    with criterion(3, "rank M = m with sigma_m/sigma_1 > 1e-8; hex bar stress fails length balance") as d:
        hexp = hexagonal_patch(1)
        hexg = contact_graph(hexp)
        worst = np.inf
        for p, g in corpus + [(hexp, hexg)]:
            s = np.linalg.svd(build_jacobian(p, g), compute_uv=False)
            ratio = s[g.m - 1] / s[0]
            worst = min(worst, ratio)
            assert ratio > 1e-8
        omega = bar_stresses(hexp, hexg)
        assert hexg.m == 12 > 2 * hexp.n - 3 and omega.shape[0] >= 1
        w = omega[0]
        vec, length = stress_residuals(hexp, hexg, w)
        mean_len = float(np.mean([np.linalg.norm(hexp.centers[i] - hexp.centers[j]) for i, j in hexg.edges]))
        assert np.abs(vec).max() <= 1e-9 * np.linalg.norm(w) * mean_len
        excess = float(np.abs(length).max() / (np.linalg.norm(w) * mean_len))
        assert excess > 1e-3
        d["min_sigma_ratio"] = f"{worst:.3g}"
        d["hex_length_residual"] = f"{excess:.3g}"


def test_criterion_04_index_bound():
    with criterion(4, ">= 1e4 sign vectors on >= 20 embedded frameworks: sum I <= 4n-8, I even") as d:
        rng = np.random.default_rng(4)
        frameworks = [sequential_packing(GeneratorConfig(seed=500 + k, n=4 + k)) for k in range(20)]
        frameworks += [(hexagonal_patch(1), contact_graph(hexagonal_patch(1)))]
        total = 0
        tightest = -np.inf
        for p, g in frameworks:
            orders = cyclic_orders(p, g)
            for _ in range(500):
                signs = rng.choice([-1.0, 1.0], size=g.m)
                idx = vertex_indices(p, g, signs, orders)
                assert np.all(idx % 2 == 0)
                assert idx.sum() <= 4 * p.n - 8
                tightest = max(tightest, idx.sum() - (4 * p.n - 8))
                total += 1
        assert total >= 10_000 and len(frameworks) >= 20
        d["sign_vectors"] = total
        d["max(sum I - bound)"] = int(tightest)


def test_criterion_05_fiber_dimension(corpus):
    with criterion(5, "fiber dimension = 2n-m on sequential packings and chains; hex flagged") as d:
        count = 0
        for p, g in corpus[:60]:
            assert fiber_dimension(p, g) == 2 * p.n - g.m
            count += 1
        for k in range(40):
            p, g = chain_packing(GeneratorConfig(seed=k, n=2 + k % 20))
            assert fiber_dimension(p, g) == 2 * p.n - g.m
            count += 1
        hexp = hexagonal_patch(1)
        rep = fiber_report(hexp, contact_graph(hexp))
        assert rep.non_generic and rep.dimension > rep.expected
        d["checked"] = count
        d["hex"] = f"{rep.dimension} > {rep.expected}"


def test_criterion_06_three_chain_flex():
    with criterion(6, "3-chain flex: rotation error <= 1e-6, drift <= 1e-9, radii bit-identical") as d:
        p = unit_chain(3)
        g = contact_graph(p)
        h, steps = 1e-3, 100
        traj = follow_flex(p, g, steps, h)
        assert len(traj.states) == steps + 1
        # closed form: each step turns the bond by atan(h / 2) about disk 1
        theta = steps * np.arctan(h / 2)
        sgn = np.sign(chain_bond_angle(traj)[-1])
        expected = np.array([2 + 2 * np.cos(theta), sgn * 2 * np.sin(theta)])
        err = float(np.linalg.norm(traj.states[-1].centers[2] - expected))
        assert err <= 1e-6
        assert np.allclose(traj.states[-1].centers[:2], p.centers[:2], atol=1e-12)
        drift = max(traj.residuals)
        assert drift <= 1e-9
        assert all(s.radii.tobytes() == p.radii.tobytes() for s in traj.states)
        d["error"] = f"{err:.2e}"
        d["drift"] = f"{drift:.2e}"


def test_criterion_07_fig5():
    with criterion(7, "fig5a jammed with 8 = 2n-2 contacts; fig5b not jammed with witness; < 1 s each") as d:
        tri = {(0, 1), (0, 2), (1, 2)}
        t0 = time.perf_counter()
        pa, ga = fig5a()
        va = tensegrity_flex_lp(pa, ga)
        ta = time.perf_counter() - t0
        assert pa.n == 5 and ga.m == 8 == 2 * pa.n - 2
        assert va.jammed and ta < 1.0

        t0 = time.perf_counter()
        pb, gb = fig5b()
        vb = tensegrity_flex_lp(pb, gb)
        tb = time.perf_counter() - t0
        assert gb.m == 8 and not vb.jammed and tb < 1.0
        assert vb.witness is not None
        # slacks from the exact LP
        interior = {e: s for e, s in vb.slacks.items() if e not in tri}
        assert all(s >= 0 for s in interior.values())
        assert any(s > 0 for s in interior.values())
        # and re-measured on the emitted float witness
        rates = edge_rates(pb, gb, vb.witness)
        scale = np.abs(vb.witness).max() * pb.radii.max()
        for e, r in zip(gb.edges, rates):
            if e in tri:
                assert abs(r) <= 1e-9 * scale
            else:
                assert r >= -1e-9 * scale
        assert max(r for e, r in zip(gb.edges, rates) if e not in tri) > 1e-6 * scale
        d["fig5a_s"] = f"{ta:.3f}"
        d["fig5b_s"] = f"{tb:.3f}"
        d["fig5b_total_slack"] = str(Fraction(vb.max_slack).limit_denominator(10**6))


def test_criterion_08_tri_cusp_bound():
    with criterion(8, "50 tri-cusp instances: m <= 2n-2; every jammed instance has m = 2n-2") as d:
        jammed = 0
        for k in range(50):
            p, g = tri_cusp_packing(GeneratorConfig(seed=800 + k), 1 + k % 5)
            chk = isostatic_count_check(p, g)
            assert chk["within_bound"], (k, chk)
            if tensegrity_flex_lp(p, g).jammed:
                assert chk["isostatic"], (k, chk)
                jammed += 1
        d["jammed"] = f"{jammed}/50"


def test_criterion_09_perturbation(corpus):
    with criterion(9, "perturb_to_generic(delta=1e-4) succeeds on >= 95% of 50 rigid packings") as d:
        ok = failed = 0
        for k, (p, g) in enumerate(corpus[:50]):
            try:
                q = perturb_to_generic(p, g, 1e-4, GeneratorConfig(seed=9000 + k))
            except StickyDiskError:
                failed += 1
                continue
            # never a silent contact change
            assert contact_graph(q).edges == g.edges
            assert np.abs(gap_vector(q, g)).max() <= 1e-12
            assert not np.array_equal(q.radii, p.radii)
            ok += 1
        assert ok + failed == 50 and ok >= 0.95 * 50
        d["succeeded"] = f"{ok}/50"


def _max_gap(p, g, v, s):
    n = p.n
    q = DiskPacking(p.centers + s * v[: 2 * n].reshape(n, 2), p.radii + s * v[2 * n :])
    return float(np.abs(gap_vector(q, g)).max())


def test_criterion_10_tangency_finite_differences(corpus):
    with criterion(10, "gap along tangent vectors scales as s^q, q >= 1.9 (s = 1e-3, 1e-4, 1e-5)") as d:
        ss = np.array([1e-3, 1e-4, 1e-5])
        slopes = []
        floored = 0
        for p, g in corpus[10:30]:
            scale = float(p.radii.max())
            for v in tangent_space(p, g):
                gaps = np.array([_max_gap(p, g, v, s) for s in ss])
                if gaps.max() <= 1e-13 * scale:
                    floored += 1
                    continue
                q = np.polyfit(np.log(ss), np.log(gaps), 1)[0]
                slopes.append(q)
                assert q >= 1.9
        d["vectors_fitted"] = len(slopes)
        d["at_floor"] = floored
        d["min_q"] = f"{min(slopes):.3f}"


def teardown_module(module):
    print()
    for k in sorted(RESULTS):
        print(RESULTS[k])
