"""Cones over toric Fano varieties and the K-semistability test by volume minimization.

The base ``V`` is given by the rays of its fan; the fan is taken to be the
face fan of ``conv(rays)``, which is what makes ``V`` a (Q-)Fano toric
variety.  With ``-K_V = r L`` the cone ``X = C(V, L)`` has

    sigma^dual = {(m, t) : <m, rho_i> + a_i t >= 0}

where ``P_L = {m : <m, rho_i> >= -a_i}`` is the polytope of ``L``.  The
canonical valuation (blowing up the vertex) is ``xi_0 = (0, ..., 0, 1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import factorial
from typing import Sequence

from . import linalg as la
from . import toric
from .errors import GeometryError, ValidationError
from .geometry import (BoundedPolytope, Halfspace, Lattice, centroid, convex_hull,
                       hrep_to_vrep, polytope_volume)
from .minimizer import OptimizerConfig, _rationalize, minimize_toric


@dataclass(frozen=True)
class FanoConeData:
    base_rays: tuple
    r: Fraction
    shift: tuple           # m0 with 1/r + <m0, rho_i> integral
    heights: tuple         # a_i, the lifted ray heights
    polytope: BoundedPolytope  # P_L in M_V
    cone: toric.ToricSingularity
    canonical_xi: tuple

    @property
    def dim(self) -> int:
        return self.cone.dim

    @cached_property
    def degree(self) -> Fraction:
        """``L^{n-1}``, i.e. ``(n-1)!`` times the lattice volume of ``P_L``."""
        return factorial(self.dim - 1) * polytope_volume(self.polytope)


def _check_fano(rays) -> None:
    d = len(rays[0])
    for rho in rays:
        if la.primitive(rho) != tuple(int(x) for x in rho):
            raise GeometryError(f"ray {tuple(map(int, rho))} is not primitive")
    hull = convex_hull(rays)
    if hull.degenerate:
        raise GeometryError("rays do not span; the fan is not complete")
    verts = set(hull.vertices)
    for rho in rays:
        if rho not in verts:
            raise GeometryError(f"ray {tuple(map(int, rho))} is not a vertex of the ray polytope; "
                                "the fan is not Fano")
    origin = (Fraction(0),) * d
    for h, _ in hull.facets:
        if h.slack(origin) <= 0:
            raise GeometryError("origin is not interior to the ray polytope (facet normal "
                                f"{tuple(map(la.fmt, h.normal))}); the fan is not complete")


def build_cone_over_fano(rays: Sequence[Sequence[int]], r=1) -> FanoConeData:
    """The cone ``C(V, L)`` with ``-K_V = r L`` over the toric Fano ``V`` with these rays."""
    rays = [la.vector(x) for x in rays]
    if not rays:
        raise GeometryError("no rays")
    _check_fano(rays)
    r = la.as_fraction(r)
    if r <= 0:
        raise GeometryError("r must be positive")
    d = len(rays[0])
    p = r.numerator
    shift = None
    for k in product(range(p), repeat=d):
        m0 = tuple(Fraction(x, p) for x in k)
        if all((1 / r + la.dot(m0, rho)).denominator == 1 for rho in rays):
            shift = m0
            break
    if shift is None:
        raise GeometryError(f"-K_V is not divisible by r = {la.fmt(r)} in Pic(V)")
    heights = tuple(int(1 / r + la.dot(shift, rho)) for rho in rays)
    poly = hrep_to_vrep([Halfspace.geq(rho, -a) for rho, a in zip(rays, heights)])
    for v in poly.vertices:
        if any(x.denominator != 1 for x in v):
            raise GeometryError(f"L = -K_V/{la.fmt(r)} is not Cartier: P_L has the "
                                f"non-integral vertex {tuple(map(la.fmt, v))}")
    n = d + 1
    cone_rays = [tuple(rho) + (Fraction(a),) for rho, a in zip(rays, heights)]
    cone = toric.ToricSingularity.from_rays(Lattice.standard(n), cone_rays)
    canonical = (Fraction(0),) * d + (Fraction(1),)
    return FanoConeData(tuple(rays), r, shift, heights, poly, cone, canonical)


def barycenter_oracle(rays: Sequence[Sequence[int]]) -> bool:
    """True iff the anticanonical polytope of V has its barycenter at the origin."""
    rays = [la.vector(x) for x in rays]
    _check_fano(rays)
    poly = hrep_to_vrep([Halfspace.geq(rho, -1) for rho in rays])
    return all(x == 0 for x in centroid(poly))


def nef_threshold(d: FanoConeData, xi, r=None) -> Fraction:
    r = d.r if r is None else la.as_fraction(r)
    return toric.log_discrepancy(d.cone, la.vector(xi)) / r


def _relative_residual(cone, xi) -> float:
    """Exact projected gradient of vol^ on the slice through ``xi``, made scale-free."""
    u = cone.gorenstein_covector
    a = la.dot(u, xi)
    xi1 = la.scale(1 / a, xi)
    g = cone.volume_gradient_exact(xi1)
    f = cone.volume_fast(xi1)
    comps = [la.dot(g, t) for t in la.nullspace([u])]
    norm_g = sum(float(c) ** 2 for c in comps) ** 0.5
    norm_x = sum(float(c) ** 2 for c in xi1) ** 0.5
    return norm_g * norm_x / float(f)


def canonical_is_minimizer(d: FanoConeData, cfg: OptimizerConfig | None = None) -> dict:
    """Decide K-semistability of the base by whether ``xi_0`` minimizes ``vol^``."""
    cfg = cfg or OptimizerConfig()
    rep = minimize_toric(d.cone, cfg)
    canon = toric.normalized_volume(d.cone, d.canonical_xi)
    scale = max(1.0, abs(rep.value))
    gap = float(canon) - rep.value
    residual = _relative_residual(d.cone, d.canonical_xi)
    if not rep.converged:
        verdict = "inconclusive"
    elif abs(gap) < 10 * cfg.tolerance * scale and residual > cfg.tolerance:
        verdict = "inconclusive"
    elif gap <= cfg.tolerance * scale:
        verdict = "semistable"
    else:
        verdict = "unstable"
    return {"verdict": verdict, "gap": gap, "canonical_value": canon,
            "minimum": rep.value, "canonical_residual": residual, "report": rep}


# -- filtrations ------------------------------------------------------------------

def _height(xi):
    """``t(m) = <(m, 1), xi>`` as ``(linear part, constant)``."""
    return tuple(xi[:-1]), xi[-1]


def filtration_volume(d: FanoConeData, xi, t) -> Fraction:
    """``vol(F R^(t)) = (n-1)! vol{m in P_L : <(m, 1), xi> >= t}``."""
    lin, c = _height(xi)
    t = la.as_fraction(t)
    hs = list(d.polytope.halfspaces) + [Halfspace.geq(lin, t - c)]
    try:
        body = hrep_to_vrep(hs)
    except GeometryError:
        return Fraction(0)
    return factorial(d.dim - 1) * polytope_volume(body)


def _interpolate(ts, ys):
    """Exact coefficients (low to high) of the interpolating polynomial."""
    k = len(ts)
    rows = [[t ** j for j in range(k)] for t in ts]
    return la.solve(rows, ys)


@dataclass(frozen=True)
class _Pieces:
    c1: Fraction
    t_max: Fraction
    polys: tuple  # ((lo, hi, coeffs), ...) with g = poly on [lo, hi]


def _eval(cs, t):
    acc = 0
    for c in reversed(cs):
        acc = acc * t + c
    return acc


def _pieces(d: FanoConeData, xi) -> _Pieces:
    lin, c = _height(xi)
    vals = sorted({la.dot(lin, v) + c for v in d.polytope.vertices})
    c1, t_max = vals[0], vals[-1]
    if c1 <= 0:
        raise GeometryError("xi is not in the interior of the Reeb cone")
    k = d.dim  # g has degree <= n - 1 on each piece
    polys = []
    for lo, hi in zip(vals, vals[1:]):
        ts = [lo + (hi - lo) * Fraction(j, k - 1) for j in range(k)] if k > 1 else [lo]
        ys = [filtration_volume(d, xi, t) for t in ts]
        polys.append((lo, hi, _interpolate(ts, ys)))
    return _Pieces(c1, t_max, tuple(polys))


def _simpson(f, a, b, tol, depth=50):
    """Adaptive Simpson quadrature; returns ``(value, ok)``."""
    def step(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        if depth <= 0:
            return left + right, False
        if abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15, True
        lv, lok = step(a, m, fa, flm, fm, left, tol / 2, depth - 1)
        rv, rok = step(m, b, fm, frm, fb, right, tol / 2, depth - 1)
        return lv + rv, lok and rok

    fa, fb, fm = f(a), f(b), f((a + b) / 2)
    return step(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth)


def _deriv(cs):
    return tuple(j * c for j, c in enumerate(cs))[1:]


def _poly_shift(cs, a, b):
    """Coefficients in ``u`` of ``p((u - a) / b)``."""
    out = [Fraction(0)] * len(cs)
    # expand sum c_j ((u - a)/b)^j
    for j, c in enumerate(cs):
        # (u - a)^j / b^j
        term = [Fraction(1)]
        for _ in range(j):
            term = [Fraction(0)] + term
            for i in range(len(term) - 1):
                term[i] -= a * term[i + 1]
        for i, x in enumerate(term):
            out[i] += c * x / b ** j
    return out


def _int_over_power(cs, a, b, n, lo, hi) -> Fraction:
    """Exact ``int_lo^hi p(t) (a + b t)^(-n) dt`` when no logarithm appears."""
    if b == 0:
        prim = [Fraction(0)] + [c / (j + 1) for j, c in enumerate(cs)]
        return (_eval(prim, hi) - _eval(prim, lo)) / a ** n
    q = _poly_shift(cs, a, b)
    ulo, uhi = a + b * lo, a + b * hi
    total = Fraction(0)
    for k, c in enumerate(q):
        if c == 0:
            continue
        e = k - n + 1
        if e == 0:
            raise ArithmeticError("logarithmic term in an exact integral")
        total += c * (uhi ** e - ulo ** e) / e
    return total / b


def _phi_exact(pieces: _Pieces, degree, n, lam, s) -> Fraction:
    """``Phi(lam, s) = int (-g'(t)) (1 - s + lam s t)^(-n) dt`` (integrated by parts)."""
    a, b = 1 - s, lam * s
    if not pieces.polys:
        return degree / (a + b * pieces.c1) ** n
    total = Fraction(0)
    for lo, hi, cs in pieces.polys:
        dcs = tuple(-x for x in _deriv(cs))
        total += _int_over_power(dcs, a, b, n, lo, hi)
    return total


def filtration_volume_curve(d: FanoConeData, xi, t_grid: Sequence = (), tol: float = 1e-10) -> dict:
    """Samples of ``vol(F R^(t))`` and the integral formula for ``vol(xi)``.

    ``vol(xi) = L^{n-1}/c1^n - n int_{c1}^{T_max} vol(F R^(t)) t^{-n-1} dt``
    is evaluated by adaptive Simpson on each polynomial piece and also
    exactly (integration by parts), next to the direct toric volume.
    """
    xi = la.vector(xi)
    d.cone.check_interior(xi)
    n = d.dim
    pieces = _pieces(d, xi)
    L = d.degree
    integral, ok = 0.0, True
    for lo, hi, cs in pieces.polys:
        fl = [float(c) for c in cs]
        part, good = _simpson(lambda t: _eval(fl, t) * t ** (-n - 1), float(lo), float(hi),
                              tol * max(1.0, float(L)))
        integral += part
        ok = ok and good
    numeric = float(L) / float(pieces.c1) ** n - n * integral
    exact = _phi_exact(pieces, L, n, Fraction(1), Fraction(1))
    direct = toric.volume(d.cone, xi)
    samples = [(la.as_fraction(t), filtration_volume(d, xi, t)) for t in t_grid]
    return {"c1": pieces.c1, "t_max": pieces.t_max, "degree": L, "samples": samples,
            "integral": integral, "formula_volume": numeric, "exact_formula_volume": exact,
            "direct_volume": direct, "error": abs(numeric - float(direct)),
            "flagged": not ok}


@dataclass
class PhiCurve:
    lam: Fraction
    s_grid: tuple
    values: tuple
    derivative_closed_form: Fraction
    derivative_finite_difference: Fraction
    endpoints: dict
    convex: bool

    def to_json(self) -> dict:
        return {"lambda": la.fmt(self.lam),
                "s": [la.fmt(s) for s in self.s_grid],
                "phi": [la.fmt(v) for v in self.values],
                "phi_s_closed_form": la.fmt(self.derivative_closed_form),
                "phi_s_finite_difference": float(self.derivative_finite_difference),
                "endpoints": {k: (la.fmt(v) if isinstance(v, Fraction) else v)
                              for k, v in self.endpoints.items()},
                "convex": self.convex}


def lambda_star(d: FanoConeData, xi) -> Fraction:
    """``r / A(xi)``, the rescaling that puts ``xi`` on the slice of the canonical valuation."""
    return d.r / toric.log_discrepancy(d.cone, la.vector(xi))


def phi_curve(d: FanoConeData, xi, lam=None, samples: int = 11, fd_step=Fraction(1, 10 ** 6)) -> PhiCurve:
    xi = la.vector(xi)
    d.cone.check_interior(xi)
    lam = lambda_star(d, xi) if lam is None else la.as_fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    n = d.dim
    pieces = _pieces(d, xi)
    L = d.degree

    def phi(s):
        return _phi_exact(pieces, L, n, lam, s)

    grid = tuple(Fraction(j, samples - 1) for j in range(samples))
    values = tuple(phi(s) for s in grid)
    area = Fraction(0)
    for lo, hi, cs in pieces.polys:
        prim = [Fraction(0)] + [c / (j + 1) for j, c in enumerate(cs)]
        area += _eval(prim, hi) - _eval(prim, lo)
    closed = n * lam * L * (1 / lam - pieces.c1 - area / L)
    h = la.as_fraction(fd_step)
    fd = (-3 * values[0] + 4 * phi(h) - phi(2 * h)) / (2 * h)
    convex = all(2 * values[j] <= values[j - 1] + values[j + 1] + Fraction(1, 10 ** 9)
                 for j in range(1, len(values) - 1))
    endpoints = {
        "phi_at_1": values[-1],
        "lambda_pow_minus_n_vol": lam ** -n * toric.volume(d.cone, xi),
        "phi_at_0": values[0],
        "canonical_volume": toric.volume(d.cone, d.canonical_xi),
    }
    endpoints["ok"] = (endpoints["phi_at_1"] == endpoints["lambda_pow_minus_n_vol"]
                       and endpoints["phi_at_0"] == endpoints["canonical_volume"])
    return PhiCurve(lam, grid, values, closed, fd, endpoints, convex)


# -- JSON -------------------------------------------------------------------------

KSTAB_SCHEMA = {
    "type": "object",
    "required": ["fano_fan_rays"],
    "properties": {
        "fano_fan_rays": {"type": "array", "minItems": 2,
                          "items": {"type": "array", "minItems": 1, "maxItems": 7,
                                    "items": {"type": "integer"}}},
        "r": {"oneOf": [{"type": "integer", "minimum": 1},
                        {"type": "string", "pattern": r"^\s*\d+(\s*/\s*\d+)?\s*$"}]},
        "xi": {"type": "array"},
    },
}


def kstab_from_json(data) -> FanoConeData:
    if isinstance(data, str):
        data = json.loads(data)
    rays = data["fano_fan_rays"]
    if len({len(x) for x in rays}) != 1:
        raise ValidationError("rays have different lengths", "/fano_fan_rays")
    return build_cone_over_fano(rays, data.get("r", 1))


def kstab_report(d: FanoConeData, cfg: OptimizerConfig | None = None) -> dict:
    """Verdict plus the two computations of ``Phi_s(lambda*, 0)`` at the minimizer found."""
    cfg = cfg or OptimizerConfig()
    res = canonical_is_minimizer(d, cfg)
    rep = res["report"]
    if rep.rational_candidate is not None:
        xi = rep.rational_candidate["vector"]
    else:
        xi = _rationalize(rep.arg, cfg.rationalize_denominator_bound)
    curve = phi_curve(d, xi)
    return {
        "verdict": res["verdict"],
        "gap": res["gap"],
        "canonical_value": la.fmt(res["canonical_value"]),
        "minimum": res["minimum"],
        "canonical_residual": res["canonical_residual"],
        "minimizer": rep.to_json(),
        "probe_xi": [la.fmt(x) for x in xi],
        "lambda_star": la.fmt(curve.lam),
        "phi_s_closed_form": la.fmt(curve.derivative_closed_form),
        "phi_s_finite_difference": float(curve.derivative_finite_difference),
        "nef_threshold_canonical": la.fmt(nef_threshold(d, d.canonical_xi)),
    }
