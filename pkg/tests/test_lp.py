from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normvol import linalg as la
from normvol.errors import InfeasibleError, UnboundedError
from normvol.geometry import Halfspace
from normvol.lp import lp_optimize


def brute_force(c, hs, sense):
    # oracle: enumerate every basic point and keep the feasible ones
    d = len(c)
    best = None
    for rows in combinations(hs, d):
        m = [h.normal for h in rows]
        if la.rank(m) < d:
            continue
        x = la.solve(m, [h.offset for h in rows])
        if all(h.slack(x) >= 0 for h in hs):
            v = la.dot(c, x)
            if best is None or (v > best if sense == "max" else v < best):
                best = v
    return best


def test_small_max():
    hs = [Halfspace((1, 1), 4), Halfspace((1, 3), 6), Halfspace.geq((1, 0), 0),
          Halfspace.geq((0, 1), 0)]
    value, x = lp_optimize((3, 2), hs)
    assert value == 12 and x == (4, 0)


def test_negative_offsets_need_phase_one():
    hs = [Halfspace.geq((1, 1), 2), Halfspace((1, 0), 5), Halfspace((0, 1), 5)]
    value, _ = lp_optimize((1, 1), hs, "min")
    assert value == 2


def test_infeasible_and_unbounded():
    with pytest.raises(InfeasibleError):
        lp_optimize((1,), [Halfspace((1,), 0), Halfspace.geq((1,), 1)])
    with pytest.raises(UnboundedError):
        lp_optimize((1, 0), [Halfspace((0, 1), 1)])


def test_nonnegative_mode_matches_explicit_bounds():
    hs = [Halfspace((2, 1), 7), Halfspace((1, 2), 8)]
    a = lp_optimize((1, 1), hs, nonnegative=True)[0]
    b = lp_optimize((1, 1), hs + [Halfspace.geq((1, 0), 0), Halfspace.geq((0, 1), 0)])[0]
    assert a == b == 5


coef = st.integers(-5, 5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coef, coef, st.integers(0, 9)), min_size=1, max_size=5),
       st.tuples(coef, coef), st.sampled_from(["max", "min"]))
def test_matches_vertex_enumeration(rows, c, sense):
    box = [Halfspace((1, 0), 10), Halfspace((-1, 0), 10), Halfspace((0, 1), 10),
           Halfspace((0, -1), 10)]
    hs = box + [Halfspace((a, b), off) for a, b, off in rows]
    value, x = lp_optimize(c, hs, sense)
    assert all(h.slack(x) >= 0 for h in hs)
    assert value == brute_force(la.vector(c), hs, sense) == la.dot(c, x)
    assert isinstance(value, Fraction)
