import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointaffinity import (
    BoundingBox,
    ClusterModel,
    bisector_halfspace,
    build_influence_cell,
    cell_contains,
    cell_from_box,
    chord_intersect,
    generalized_kl,
    itakura_saito,
    squared_euclidean,
    steal_owner,
)
from pointaffinity.cells import _chord_bounds
from pointaffinity.errors import (
    CoincidentSitesError,
    DomainError,
    OutsideCellError,
    ValidationError,
)

SQ = squared_euclidean()


def unit_square_cell():
    return cell_from_box(BoundingBox(np.zeros(2), np.ones(2)))


class TestBisector:
    def test_midpoint_bisector(self):
        h = bisector_halfspace([0.0, 0.0], 0.0, [2.0, 0.0], 0.0, SQ)
        np.testing.assert_array_equal(h.normal, [4.0, 0.0])
        assert h.offset == 4.0  # i.e. y1 <= 1
        assert h.contains([0.9, 5.0])
        assert not h.contains([1.1, -5.0])
        assert h.contains([1.0, 3.0])  # boundary

    def test_power_bisector(self):
        h = bisector_halfspace([0.0, 0.0], 1.0, [2.0, 0.0], 0.0, SQ)
        assert h.offset / h.normal[0] == pytest.approx(1.25, abs=1e-15)
        # independent check: power distances agree on the boundary
        for y2 in (-3.0, 0.0, 7.0):
            y = np.array([1.25, y2])
            lhs = SQ.distance(y, [0.0, 0.0]) - 1.0
            rhs = SQ.distance(y, [2.0, 0.0]) - 0.0
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_kl_bisector(self):
        kl = generalized_kl()
        e = float(np.e)
        h = bisector_halfspace([1.0, 1.0], 0.0, [e, e], 0.0, kl)
        # constraint reduces to y1 + y2 <= 2e - 2
        np.testing.assert_allclose(h.normal, [1.0, 1.0], atol=1e-15)
        assert h.offset == pytest.approx(2.0 * e - 2.0, abs=1e-12)
        # divergences really are equal on that line
        for y in ([1.0, 2.0 * e - 3.0], [e - 1.0, e - 1.0]):
            lhs = kl.distance(y, [1.0, 1.0])
            rhs = kl.distance(y, [e, e])
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_coincident_sites(self):
        with pytest.raises(CoincidentSitesError):
            bisector_halfspace([1.0, 2.0], 0.0, [1.0, 2.0], 0.0, SQ)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            bisector_halfspace([-1.0, 1.0], 0.0, [2.0, 2.0], 0.0, generalized_kl())

    def test_unweighted_boundary_through_midpoint(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x, c = rng.normal(size=2), rng.normal(size=2)
            if np.linalg.norm(x - c) < 1e-6:
                continue
            h = bisector_halfspace(x, 0.0, c, 0.0, SQ)
            mid = 0.5 * (x + c)
            assert h.normal @ mid == pytest.approx(h.offset, abs=1e-12)
            cross = h.normal[0] * (c - x)[1] - h.normal[1] * (c - x)[0]
            assert cross == pytest.approx(0.0, abs=1e-12)

    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-100, 100))
    @settings(max_examples=50, deadline=None)
    def test_weight_shift_bit_identical(self, wx, wc, shift):
        # exactly representable weights: the offset depends on w_x - w_c only
        h1 = bisector_halfspace([0.0, 1.0], float(wx), [3.0, -1.0], float(wc), SQ)
        h2 = bisector_halfspace([0.0, 1.0], float(wx + shift), [3.0, -1.0],
                                float(wc + shift), SQ)
        np.testing.assert_array_equal(h1.normal, h2.normal)
        assert h1.offset == h2.offset


class TestBuildCell:
    def test_single_competitor(self):
        model = ClusterModel([[2.0, 0.0]])
        box = BoundingBox(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        cell = build_influence_cell([0.0, 0.0], model, SQ, box)
        assert cell.n_faces == 1 + 4
        assert cell_contains(cell, [0.0, 0.0])
        assert cell_contains(cell, [0.9, 0.0])   # y1 <= 1 within the box
        assert not cell_contains(cell, [0.0, 1.5])  # outside the box

    def test_two_center_slab(self):
        model = ClusterModel([[0.0, 0.0], [10.0, 0.0]])
        box = BoundingBox(np.array([-20.0, -20.0]), np.array([20.0, 20.0]))
        cell = build_influence_cell([2.0, 0.0], model, SQ, box)
        # cell is {1 <= y1 <= 6} within the box
        assert cell_contains(cell, [1.5, 12.0])
        assert cell_contains(cell, [1.0, 0.0])
        assert cell_contains(cell, [6.0, -19.0])
        assert not cell_contains(cell, [0.9, 0.0])
        assert not cell_contains(cell, [6.1, 0.0])

    def test_query_on_representative(self):
        model = ClusterModel([[0.0, 0.0], [10.0, 0.0]])
        box = BoundingBox.from_points(model.representatives, 2.0)
        with pytest.raises(CoincidentSitesError):
            build_influence_cell([10.0, 0.0], model, SQ, box)

    def test_box_excludes_query(self):
        from pointaffinity.errors import BoxExcludesPointError
        model = ClusterModel([[0.0, 0.0]])
        box = BoundingBox(np.array([10.0, 10.0]), np.array([20.0, 20.0]))
        with pytest.raises(BoxExcludesPointError):
            build_influence_cell([0.0, 1.0], model, SQ, box)

    def test_kl_cell_has_domain_faces(self):
        model = ClusterModel([[1.0, 1.0], [4.0, 4.0]])
        box = BoundingBox(np.array([-5.0, -5.0]), np.array([10.0, 10.0]))
        cell = build_influence_cell([2.0, 2.0], model, generalized_kl(), box)
        assert cell.n_faces == 2 + 4 + 2
        assert not cell_contains(cell, [-1.0, 2.0])  # domain face cuts it

    def test_interior_point_always_contained(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            reps = rng.normal(size=(4, 3)) * 5.0
            model = ClusterModel(reps)
            x = rng.normal(size=3)
            box = BoundingBox.from_points(np.vstack([reps, x[None]]), 2.0)
            cell = build_influence_cell(x, model, SQ, box)
            assert cell_contains(cell, x)


class TestContainsAndChords:
    def test_unit_square_contains(self):
        cell = unit_square_cell()
        assert cell_contains(cell, [0.5, 0.5])
        assert not cell_contains(cell, [1.5, 0.5])
        assert cell_contains(cell, [1.0, 0.5])  # boundary is inclusive

    def test_chord_axis(self):
        cell = unit_square_cell()
        t0, t1 = chord_intersect(cell, [0.5, 0.5], [1.0, 0.0])
        assert (t0, t1) == (-0.5, 0.5)

    def test_chord_diagonal(self):
        cell = unit_square_cell()
        u = np.array([1.0, 1.0]) / np.sqrt(2.0)
        t0, t1 = chord_intersect(cell, [0.5, 0.5], u)
        assert t0 == pytest.approx(-np.sqrt(0.5), abs=1e-12)
        assert t1 == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_chord_outside(self):
        model = ClusterModel([[2.0, 0.0]])
        box = BoundingBox(np.array([-5.0, -5.0]), np.array([5.0, 5.0]))
        cell = build_influence_cell([0.0, 0.0], model, SQ, box)
        with pytest.raises(OutsideCellError):
            chord_intersect(cell, [2.0, 0.0], [1.0, 0.0])

    def test_chord_endpoints_tight(self):
        rng = np.random.default_rng(7)
        model = ClusterModel(rng.normal(size=(5, 2)) * 4.0)
        x = rng.normal(size=2) * 0.5
        box = BoundingBox.from_points(np.vstack([model.representatives, x[None]]), 2.0)
        cell = build_influence_cell(x, model, SQ, box)
        for _ in range(200):
            g = rng.normal(size=2)
            u = g / np.linalg.norm(g)
            t0, t1, i0, i1 = _chord_bounds(cell, x, u)
            assert t0 < 0.0 < t1
            for t, i in ((t0, i0), (t1, i1)):
                p = x + t * u
                viol = cell.normals @ p - cell.offsets
                assert viol.max() <= 1e-9          # still inside (tolerance)
                assert abs(viol[i]) <= 1e-9        # binding face is tight


class TestStealOwner:
    def test_nearest(self):
        model = ClusterModel([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        assert steal_owner([1.0, 2.0], model, SQ) == 0

    def test_tie_lowest_index(self):
        model = ClusterModel([[0.0, 0.0], [10.0, 0.0]])
        assert steal_owner([5.0, 0.0], model, SQ) == 0

    def test_power_weights(self):
        model = ClusterModel([[0.0, 0.0], [4.0, 0.0]], weights=[0.0, 12.0])
        # power scores: 1 vs -3
        assert steal_owner([1.0, 0.0], model, SQ) == 1

    @given(st.integers(-20, 20))
    @settings(max_examples=30, deadline=None)
    def test_weight_shift_invariance(self, shift):
        reps = [[0.0, 0.0], [3.0, 1.0], [-2.0, 4.0]]
        w = np.array([1.0, 4.0, 0.25])
        m1 = ClusterModel(reps, weights=w)
        m2 = ClusterModel(reps, weights=w + float(shift))
        rng = np.random.default_rng(11)
        for _ in range(20):
            y = rng.normal(size=2) * 5.0
            assert steal_owner(y, m1, SQ) == steal_owner(y, m2, SQ)

    def test_domain_error_bregman(self):
        model = ClusterModel([[1.0, 1.0], [2.0, 3.0]])
        with pytest.raises(DomainError):
            steal_owner([-1.0, 1.0], model, itakura_saito())


class TestCellConsistency:
    def test_cell_members_prefer_query(self):
        # every y in the cell of x satisfies D(y,x) - w_x <= D(y,c_j) - w_j
        rng = np.random.default_rng(21)
        reps = rng.normal(size=(4, 2)) * 5.0
        w = rng.uniform(0.0, 2.0, size=4)
        model = ClusterModel(reps, weights=w)
        x = rng.normal(size=2)
        x_weight = 0.5
        box = BoundingBox.from_points(np.vstack([reps, x[None]]), 2.0)
        cell = build_influence_cell(x, model, SQ, box, x_weight=x_weight)
        probes = rng.uniform(box.lo, box.hi, size=(2000, 2))
        for y in probes:
            if not cell_contains(cell, y):
                continue
            mine = SQ.distance(y, x) - x_weight
            for c, wj in zip(reps, w):
                assert mine <= SQ.distance(y, c) - wj + 1e-9


def test_halfspace_validation():
    from pointaffinity import HalfSpace
    with pytest.raises(ValidationError):
        HalfSpace([0.0, 0.0], 1.0)
    with pytest.raises(ValidationError):
        HalfSpace([1.0, np.nan], 1.0)
