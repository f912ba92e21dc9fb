import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normvol import linalg as la
from normvol import toric
from normvol.errors import DomainError, NotKltError, ValidationError
from normvol.geometry import Lattice

pos = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20)


@st.composite
def quotient_and_xi(draw):
    n = draw(st.integers(2, 3))
    r = draw(st.sampled_from([1, 2, 3, 4, 5, 7]))
    a = [draw(st.sampled_from([x for x in range(1, 9) if math.gcd(x, r) == 1])) for _ in range(n)]
    xi = [draw(pos) for _ in range(n)]
    return r, a, xi


@settings(max_examples=40, deadline=None)
@given(quotient_and_xi())
def test_volume_matches_orthant_formula(case):
    # oracle: sigma is the orthant and M has index r in Z^n, so vol = 1 / (r prod xi)
    r, a, xi = case
    s = toric.from_cyclic_quotient(r, a)
    expected = Fraction(1, r) / math.prod(xi)
    assert toric.volume(s, xi) == expected
    assert s.volume_fast(la.vector(xi)) == expected
    assert toric.log_discrepancy(s, xi) == sum(xi)


@settings(max_examples=40, deadline=None)
@given(quotient_and_xi(), pos)
def test_scale_invariance_and_homogeneity(case, c):
    r, a, xi = case
    s = toric.from_cyclic_quotient(r, a)
    cxi = [c * x for x in xi]
    assert toric.normalized_volume(s, cxi) == toric.normalized_volume(s, xi)
    assert toric.volume(s, cxi) == c ** -len(xi) * toric.volume(s, xi)


def test_float_path_agrees_with_exact():
    s = toric.from_cyclic_quotient(5, [1, 2])
    xi = (Fraction(2, 3), Fraction(1, 3))
    assert toric.normalized_volume(s, np.array([2 / 3, 1 / 3])) == pytest.approx(
        float(toric.normalized_volume(s, xi)), rel=1e-12)


@pytest.mark.parametrize("r,a,value", [(2, [1, 1], 2), (3, [1, 1], Fraction(4, 3)),
                                       (3, [1, 2], Fraction(4, 3)), (1, [1, 1, 1], 27)])
def test_symmetric_point_values(r, a, value):
    n = len(a)
    s = toric.from_cyclic_quotient(r, a)
    assert toric.normalized_volume(s, [1] * n) == value


def test_gorenstein_covector_of_non_cyclic_cone():
    # cone over the square: Gorenstein, u = (0, 0, 1)
    s = toric.ToricSingularity.from_rays(Lattice.standard(3),
                                         [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)])
    assert s.gorenstein_covector == (0, 0, 1)
    assert toric.normalized_volume(s, (0, 0, 1)) == 8


def test_not_q_gorenstein_rejected():
    with pytest.raises(NotKltError):
        toric.ToricSingularity.from_rays(Lattice.standard(3),
                                         [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 2)])


def test_pseudo_reflection_rejected():
    with pytest.raises(NotKltError):
        toric.from_cyclic_quotient(4, [2, 1])


def test_boundary_xi_rejected():
    s = toric.smooth(2)
    with pytest.raises(DomainError):
        toric.volume(s, (1, 0))


@pytest.mark.parametrize("r,a,d", [(2, [1, 1], 2), (6, [1, 5], 3), (4, [1, 1, 3], 2)])
def test_finite_cover_scaling(r, a, d):
    s = toric.from_cyclic_quotient(r, a)
    gens = list(la.identity(len(a))) + [tuple(Fraction(d * x % r, r) for x in a)]
    ratio, vol_ratio = toric.finite_cover_scaling_check(s, d, [1] * len(a),
                                                        Lattice.from_generators(gens))
    assert ratio == vol_ratio == d


def test_json_parsing():
    s = toric.toric_from_json({"cyclic_quotient": {"r": 3, "a": [1, 2]}})
    assert s.lattice.covolume == Fraction(1, 3)
    t = toric.toric_from_json({"lattice": [[1, 0], [0, 1], ["1/3", "2/3"]],
                               "cone_rays": [[1, 0], [0, 1]]})
    assert t.lattice.covolume == Fraction(1, 3)
    with pytest.raises(ValidationError):
        toric.toric_from_json({"lattice": [[1, "x"]], "cone_rays": [[1, 0]]})
