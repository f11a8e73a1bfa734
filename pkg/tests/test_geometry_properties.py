"""Property tests for the set-algebra invariants.

Coordinates are drawn from a dyadic grid (multiples of 1/64) so that
deduplication and hull predicates see exactly representable values; the
identities themselves are asserted at 1e-9 as contracted.
"""

import math

from hypothesis import given, settings, strategies as st

from randset.geometry import (
    convex_hull,
    hausdorff,
    minkowski_sum,
    point_union,
    poly_cell,
    scale,
    spread_directions,
    support,
    union_of,
)

coord = st.integers(min_value=-256, max_value=256).map(lambda k: k / 64.0)
point2 = st.tuples(coord, coord)
point1 = st.tuples(coord)

DIRS2 = spread_directions(32, 2)
DIRS1 = [(1.0,), (-1.0,)]


def dirs_for(u):
    return DIRS2 if u.dim == 2 else DIRS1


@st.composite
def bounded_union(draw, dim=2):
    pts = point2 if dim == 2 else point1
    n_cells = draw(st.integers(1, 3))
    cells = []
    for _ in range(n_cells):
        verts = draw(st.lists(pts, min_size=1, max_size=4))
        cells.append(poly_cell(verts, dim=dim))
    return union_of(cells)


@settings(max_examples=150, deadline=None)
@given(bounded_union(), bounded_union())
def test_support_additivity(a, b):
    s = minkowski_sum(a, b)
    for d in dirs_for(a):
        assert abs(support(d, s) - support(d, a) - support(d, b)) <= 1e-9


@settings(max_examples=150, deadline=None)
@given(bounded_union(), st.integers(0, 64).map(lambda k: k / 16.0))
def test_support_positive_homogeneity(a, lam):
    scaled = scale(lam, a)
    for d in dirs_for(a):
        assert abs(support(d, scaled) - lam * support(d, a)) <= 1e-9


@settings(max_examples=150, deadline=None)
@given(bounded_union())
def test_support_blind_to_convexification(a):
    hull = union_of([convex_hull(a)])
    for d in dirs_for(a):
        assert support(d, a) == support(d, hull)


@st.composite
def point_cloud_union(draw, dim):
    pts = point2 if dim == 2 else point1
    return point_union(draw(st.lists(pts, min_size=1, max_size=4, unique=True)))


@settings(max_examples=100, deadline=None)
@given(point_cloud_union(2), point_cloud_union(2), point_cloud_union(2))
def test_hausdorff_metric_axioms_2d(a, b, c):
    hab, hba = hausdorff(a, b), hausdorff(b, a)
    assert hab == hba
    assert hab <= hausdorff(a, c) + hausdorff(c, b) + 1e-9
    if hab == 0.0:
        assert a == b


@settings(max_examples=100, deadline=None)
@given(point_cloud_union(1), point_cloud_union(1), point_cloud_union(1))
def test_hausdorff_metric_axioms_1d(a, b, c):
    hab = hausdorff(a, b)
    assert hab == hausdorff(b, a)
    assert hab <= hausdorff(a, c) + hausdorff(c, b) + 1e-9
    if hab == 0.0:
        assert a == b


def grid_oracle(a, b, step=1e-5):
    """O(grid^2) point-set oracle: exact pairwise distances on the atoms."""
    pa = [c.base.vertices[0] for c in a.cells]
    pb = [c.base.vertices[0] for c in b.cells]
    d_ab = max(min(math.dist(p, q) for q in pb) for p in pa)
    d_ba = max(min(math.dist(p, q) for q in pa) for p in pb)
    return max(d_ab, d_ba)


@settings(max_examples=100, deadline=None)
@given(point_cloud_union(2), point_cloud_union(2))
def test_point_union_matches_brute_oracle_2d(a, b):
    assert abs(hausdorff(a, b) - grid_oracle(a, b)) <= 1e-4


@settings(max_examples=100, deadline=None)
@given(point_cloud_union(1), point_cloud_union(1))
def test_point_union_matches_brute_oracle_1d(a, b):
    assert abs(hausdorff(a, b) - grid_oracle(a, b)) <= 1e-4
