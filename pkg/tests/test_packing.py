import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_rotation
from stickydisks.errors import (
    EmptyPacking,
    IndexOutOfRange,
    InvalidTolerance,
    MultiEdge,
    NonpositiveRadius,
    OverlapError,
    PackingFormatError,
    SelfLoop,
)
from stickydisks.generators import GeneratorConfig, sequential_packing
from stickydisks.packing import (
    ContactGraph,
    DiskPacking,
    Tolerances,
    contact_graph,
    dumps,
    gap_vector,
    load,
    loads,
    save,
    validate,
)


def pair(x):
    return DiskPacking([[0.0, 0.0], [x, 0.0]], [1.0, 1.0])


class TestValidate:
    def test_separated(self):
        rep = validate(pair(3.0))
        assert rep.valid and rep.contacts == () and rep.overlaps == ()

    def test_tangent(self):
        rep = validate(pair(2.0))
        assert rep.valid and rep.contacts == ((0, 1),)

    def test_overlap(self):
        rep = validate(pair(1.5))
        assert not rep.valid and rep.overlaps == ((0, 1),)
        assert rep.min_relative_gap == pytest.approx(-0.25)

    def test_single_disk(self):
        with pytest.raises(EmptyPacking):
            validate(DiskPacking([[0.0, 0.0]], [1.0]))

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_nonpositive(self, r):
        with pytest.raises(NonpositiveRadius):
            validate(DiskPacking([[0.0, 0.0], [5.0, 0.0]], [1.0, r]))

    def test_coincident_centers_are_overlaps(self):
        rep = validate(DiskPacking([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0]))
        assert rep.overlaps == ((0, 1),)

    def test_within_tolerance_counts_as_contact(self):
        tol = Tolerances()
        rep = validate(pair(2.0 * (1 - 0.5 * tol.contact)), tol)
        assert rep.valid and rep.contacts == ((0, 1),)


class TestContactGraph:
    def test_triangle(self):
        p = DiskPacking([[0, 0], [2, 0], [1, np.sqrt(3)]], [1, 1, 1])
        assert contact_graph(p).edges == ((0, 1), (0, 2), (1, 2))

    def test_hex_patch_by_hand(self):
        ang = np.arange(6) * np.pi / 3
        centers = np.vstack([[0, 0], np.column_stack([2 * np.cos(ang), 2 * np.sin(ang)])])
        p = DiskPacking(centers, np.ones(7))
        g = contact_graph(p)
        # oracle: brute-force pairwise distance comparison
        d = np.linalg.norm(centers[:, None] - centers[None], axis=-1)
        expected = {(i, j) for i in range(7) for j in range(i + 1, 7) if abs(d[i, j] - 2) < 1e-12}
        assert set(g.edges) == expected and g.m == 12

    def test_separated(self):
        assert contact_graph(pair(5.0)).m == 0

    def test_overlap_raises_with_report(self):
        with pytest.raises(OverlapError) as info:
            contact_graph(pair(1.0))
        assert info.value.report.overlaps == ((0, 1),)

    def test_gaps_recorded_for_all_pairs(self):
        g = contact_graph(pair(3.0))
        assert g.gaps[0, 1] == pytest.approx(1.0)

    def test_graph_errors(self):
        with pytest.raises(SelfLoop):
            ContactGraph(3, [(1, 1)])
        with pytest.raises(MultiEdge):
            ContactGraph(3, [(0, 1), (1, 0)])
        with pytest.raises(IndexOutOfRange):
            ContactGraph(3, [(0, 3)])

    def test_graph_helpers(self):
        g = ContactGraph(4, [(2, 1), (0, 1), (1, 3)])
        assert g.edges == ((1, 2), (0, 1), (1, 3))
        assert g.neighbors(1) == [0, 2, 3]
        assert g.degrees().tolist() == [1, 3, 1, 1]
        assert g.without_edge(0).edges == ((0, 1), (1, 3))
        sub = g.induced([3, 1, 2])
        assert sub.n == 3 and sub.edges == ((1, 2), (0, 1))


class TestGapVector:
    def test_tangent_pair(self):
        p = pair(2.0)
        assert gap_vector(p, contact_graph(p)).tolist() == [0.0]

    def test_distance_three(self):
        assert gap_vector(pair(3.0), ContactGraph(2, [(0, 1)])).tolist() == [1.0]

    def test_triangle(self, triangle):
        p, g = triangle
        assert np.allclose(gap_vector(p, g), 0, atol=1e-15)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            gap_vector(pair(2.0), ContactGraph(3, [(0, 2)]))


def test_tolerance_bounds():
    with pytest.raises(InvalidTolerance):
        Tolerances(contact=0.0)
    with pytest.raises(InvalidTolerance):
        Tolerances(rank=1e-3)
    Tolerances(contact=9.99e-4, rank=1e-12)


def test_packing_is_immutable():
    p = pair(2.0)
    with pytest.raises(ValueError):
        p.centers[0, 0] = 5.0


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 15), lam=st.floats(1e-3, 1e3))
def test_scaling_leaves_edges_unchanged(seed, n, lam):
    p, g = sequential_packing(GeneratorConfig(seed=seed, n=n))
    q = DiskPacking(lam * p.centers, lam * p.radii)
    assert contact_graph(q).edges == g.edges


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 15), shift=st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)))
def test_rigid_motion_invariance(seed, n, shift):
    p, g = sequential_packing(GeneratorConfig(seed=seed, n=n))
    Q = random_rotation(np.random.default_rng(seed))
    q = DiskPacking(p.centers @ Q.T + np.array(shift), p.radii)
    assert contact_graph(q).edges == g.edges
    scale = float(np.max(p.radii)) * (1 + np.abs(shift).max() / p.radii.min())
    assert np.allclose(gap_vector(q, g), gap_vector(p, g), rtol=0, atol=1e-12 * scale)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 20))
def test_gap_norm_bounded_by_tolerance(seed, n):
    tol = Tolerances()
    p, g = sequential_packing(GeneratorConfig(seed=seed, n=n))
    e = g.edge_array()
    bound = tol.contact * float(np.max(p.radii[e[:, 0]] + p.radii[e[:, 1]]))
    assert np.abs(gap_vector(p, g)).max() <= bound


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(finite, finite, st.floats(1e-6, 1e6)), min_size=2, max_size=20), st.booleans())
def test_json_round_trip_is_bit_exact(rows, with_boundary):
    centers = [[x, y] for x, y, _ in rows]
    radii = [r for _, _, r in rows]
    boundary = (0, 1, len(rows) - 1) if with_boundary and len(rows) >= 3 else None
    p = DiskPacking(centers, radii, boundary)
    text = dumps(p)
    q = loads(text)
    assert q.centers.tobytes() == p.centers.tobytes()
    assert q.radii.tobytes() == p.radii.tobytes()
    assert q.boundary == p.boundary
    assert dumps(q) == text


def test_json_schema_and_file_io(tmp_path, seq10):
    p, _ = seq10
    path = tmp_path / "p.json"
    save(p, path)
    d = json.loads(path.read_text())
    assert set(d) == {"radii", "centers"}
    assert load(path).centers.tobytes() == p.centers.tobytes()


@pytest.mark.parametrize("text", ["{", "[]", '{"radii": [1, 1]}', '{"radii": [1], "centers": [[0, 0], [1, 1]]}'])
def test_bad_json(text):
    with pytest.raises(PackingFormatError):
        loads(text)
