from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normvol import linalg as la
from normvol.errors import NotPointedError, UnboundedError
from normvol.geometry import (Halfspace, Lattice, PolyhedralCone, centroid, convex_hull,
                              dual_cone, extreme_rays, hrep_to_vrep, polytope_volume)


def cube(d, side=1):
    hs = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        hs += [Halfspace(e, side), Halfspace.geq(e, 0)]
    return hrep_to_vrep(hs)


def test_extreme_rays_of_orthant():
    assert extreme_rays([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_extreme_rays_square_cone():
    # cone over a square: four facets, four rays
    rows = [(1, 0, 1), (-1, 0, 1), (0, 1, 1), (0, -1, 1)]
    assert sorted(extreme_rays(rows)) == [(-1, -1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, 1)]


def test_line_is_reported():
    with pytest.raises(NotPointedError) as e:
        extreme_rays([(1, 0)])
    assert e.value.lineality in [(0, 1), (0, -1)]


def test_unbounded_direction():
    with pytest.raises(UnboundedError):
        hrep_to_vrep([Halfspace.geq((1, 0), 0), Halfspace.geq((0, 1), 0), Halfspace((1, 0), 1)])


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_cube_volume(d):
    assert polytope_volume(cube(d, 2)) == 2 ** d
    assert len(cube(d).vertices) == 2 ** d


def test_simplex_volume_and_centroid():
    p = convex_hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert polytope_volume(p) == Fraction(1, 6)
    assert centroid(p) == (Fraction(1, 4),) * 3


def test_hull_drops_interior_points():
    pts = [(0, 0), (2, 0), (0, 2), (2, 2), (1, 1), (1, 0)]
    p = convex_hull(pts)
    assert p.vertices == ((0, 0), (0, 2), (2, 0), (2, 2))
    assert len(p.facets) == 4


def test_lattice_dual_and_covolume():
    n = Lattice.from_generators([(1, 0), (0, 1), (Fraction(1, 3), Fraction(2, 3))])
    assert n.covolume == Fraction(1, 3)
    m = n.dual()
    assert m.covolume == 3
    assert m.contains((1, 1)) and not m.contains((1, 0))
    assert n.primitive_generator((2, 4)) == (Fraction(1, 3), Fraction(2, 3))


def test_dual_cone_involution():
    c = PolyhedralCone.from_rays([(1, 0), (1, 3)])
    assert dual_cone(dual_cone(c)).same_as(c)


unimodular = st.lists(st.integers(-2, 2), min_size=3, max_size=3).map(
    lambda xs: ((1, xs[0], xs[1]), (0, 1, xs[2]), (0, 0, 1)))


@settings(max_examples=30, deadline=None)
@given(unimodular, st.permutations([0, 1, 2]))
def test_volume_unimodular_invariance(upper, perm):
    m = [upper[p] for p in perm]
    assert abs(la.int_det(m)) == 1
    pts = [(0, 0, 0), (2, 0, 0), (0, 3, 0), (0, 0, 1), (1, 1, 1)]
    p = convex_hull(pts)
    q = convex_hull([la.matvec(m, v) for v in pts])
    assert polytope_volume(p) == polytope_volume(q) == polytope_volume(p.transformed(m))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=3, max_size=9))
def test_hull_volume_matches_pick(points):
    # oracle: Pick's theorem A = I + B/2 - 1, counted by brute force
    try:
        p = convex_hull(points)
    except Exception:
        return
    inside = boundary = 0
    for x, y in product(range(-4, 5), repeat=2):
        slacks = [h.slack((x, y)) for h, _ in p.facets]
        if all(s >= 0 for s in slacks):
            if any(s == 0 for s in slacks):
                boundary += 1
            else:
                inside += 1
    assert polytope_volume(p) == inside + Fraction(boundary, 2) - 1
