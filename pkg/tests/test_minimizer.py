from fractions import Fraction

import numpy as np
import pytest

from normvol import hypersurface as hs
from normvol import toric
from normvol.minimizer import (OptimizerConfig, enumerate_regions, minimize_hypersurface,
                               minimize_on_slice, minimize_toric, uniqueness_certificate)


def test_smooth_plane():
    rep = minimize_toric(toric.smooth(2))
    assert rep.converged and rep.unique
    assert rep.rational_candidate["value"] == 4
    assert rep.rational_candidate["direction"] == (1, 1)
    assert rep.rational_candidate["exact_stationary"]
    ok, evidence = uniqueness_certificate(rep)
    assert ok and len(evidence["probes"]) == 5


def test_one_third_one_one_certificate():
    rep = minimize_toric(toric.from_cyclic_quotient(3, [1, 1]))
    ok, evidence = uniqueness_certificate(rep)
    assert ok and all(p["strict"] for p in evidence["probes"])


def test_plateau_fixture_is_not_unique():
    # a constant objective on the slice: every restart stops where it starts
    def flat(X):
        inside = np.all(X > 0, axis=1)
        return np.where(inside, 1.0, np.inf)

    def exact(x):
        return Fraction(1) if all(v > 0 for v in x) else None

    rep = minimize_on_slice(flat, exact, (1, 1, 1), [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert not rep.unique
    ok, evidence = uniqueness_certificate(rep)
    assert not ok
    assert not any(p["strict"] for p in evidence["probes"])


def test_monotone_descent():
    rep = minimize_toric(toric.from_cyclic_quotient(5, [1, 2]))
    for r in rep.restarts:
        assert all(b <= a for a, b in zip(r.history, r.history[1:]))


def test_grid_oracle_dominance():
    # exact sweep of the A = 1 slice with denominators up to 60
    s = toric.from_cyclic_quotient(5, [1, 2])
    grid = min(toric.normalized_volume(s, (Fraction(p, 60), Fraction(60 - p, 60)))
               for p in range(1, 60))
    rep = minimize_toric(s)
    assert rep.value <= float(grid) + 1e-6
    assert rep.rational_candidate["value"] == Fraction(4, 5)


def test_slice_invariance():
    s = toric.from_cyclic_quotient(7, [1, 3])
    rep = minimize_toric(s)
    xi = rep.rational_candidate["vector"]
    assert sum(xi) == 1
    for c in (Fraction(1, 3), 5):
        assert toric.normalized_volume(s, [c * x for x in xi]) == rep.rational_candidate["value"]
    assert rep.value == pytest.approx(float(rep.rational_candidate["value"]), abs=1e-9)


def test_determinism_and_threads():
    s = toric.from_cyclic_quotient(3, [1, 2])
    a = minimize_toric(s, OptimizerConfig(seed=3)).to_json()
    b = minimize_toric(s, OptimizerConfig(seed=3)).to_json()
    c = minimize_toric(s, OptimizerConfig(seed=3, threads=4)).to_json()
    assert a == b == c


def test_three_dimensional_quotient():
    rep = minimize_toric(toric.from_cyclic_quotient(2, [1, 1, 1]))
    assert rep.rational_candidate["value"] == Fraction(27, 2)


def test_ordinary_double_point():
    rep = minimize_hypersurface(hs.a_family(2, 2))
    assert rep.rational_candidate["direction"] == (1, 1, 1)
    assert rep.rational_candidate["value"] == 2
    assert not rep.degenerate_initial_form


def test_a_family_weight():
    rep = minimize_hypersurface(hs.a_family(3, 5))
    assert rep.rational_candidate["direction"] == (2, 2, 2, 1)
    assert rep.rational_candidate["value"] == Fraction(27, 2)
    assert rep.to_json()["region"]


def test_e7_surface_weight():
    rep = minimize_hypersurface(hs.e_family("E7", 2))
    assert rep.rational_candidate["direction"] == (9, 4, 6)
    assert rep.rational_candidate["value"] == Fraction(1, 12)


def test_regions_cover_every_active_pattern():
    regions = enumerate_regions(hs.a_family(2, 3))
    assert regions
    assert any(len(r.active) == 3 for r in regions)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(tolerance=0)
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
