"""Toric (including abelian quotient) klt singularities and their toric valuations.

A toric valuation is a vector ``xi`` in the interior of the cone ``sigma``.
With ``u`` the Gorenstein covector and ``M`` the dual lattice,

    A(xi)   = <u, xi>
    vol(xi) = n! * vol_M{ y in sigma^dual : <y, xi> <= 1 }

and the normalized volume is ``A(xi)^n * vol(xi)``.  The exact path
evaluates the slice polytope with the polyhedral routines; the fast path
(used by the optimizer, and exact when fed Fractions) sums
``|det W| / prod <w, xi>`` over a fixed simplicial subdivision of
``sigma^dual``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial, gcd
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import DomainError, GeometryError, NotKltError, ValidationError
from .geometry import (Halfspace, Lattice, PolyhedralCone, hrep_to_vrep,
                       polytope_volume, triangulate)


def _is_exact(xi) -> bool:
    return all(isinstance(x, (int, Fraction, str)) and not isinstance(x, bool) for x in xi)


@dataclass(frozen=True)
class ToricValuation:
    xi: tuple

    def __post_init__(self):
        xi = la.vector(self.xi) if _is_exact(self.xi) else tuple(float(x) for x in self.xi)
        object.__setattr__(self, "xi", xi)


def _xi(v):
    if isinstance(v, ToricValuation):
        return v.xi
    return la.vector(v) if _is_exact(v) else np.asarray(v, dtype=float)


@dataclass(frozen=True)
class ToricSingularity:
    lattice: Lattice
    cone: PolyhedralCone
    generators: tuple  # lattice-primitive ray generators
    gorenstein_covector: tuple

    @classmethod
    def from_rays(cls, lattice: Lattice, rays: Sequence[Sequence]) -> "ToricSingularity":
        cone = PolyhedralCone.from_rays(rays, lattice)
        if lattice.dim != cone.dim:
            raise GeometryError("lattice and cone dimensions differ")
        gens = tuple(lattice.primitive_generator(r) for r in cone.rays)
        return cls(lattice, cone, gens, _gorenstein_covector(gens))

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @cached_property
    def dual_lattice(self) -> Lattice:
        return self.lattice.dual()

    # -- slice polytopes -------------------------------------------------

    def check_interior(self, xi) -> None:
        if len(xi) != self.dim:
            raise ValueError(f"xi has dimension {len(xi)}, expected {self.dim}")
        for f in self.cone.facets:
            if sum(a * x for a, x in zip(f, xi)) <= 0:
                raise DomainError(f"xi={_show(xi)} is not in the interior of the Reeb cone "
                                  f"(facet normal {f})")

    def slice_polytope(self, xi, height=1):
        """``{y in sigma^dual : <y, xi> <= height}`` as an exact polytope."""
        hs = [Halfspace.geq(r, 0) for r in self.cone.rays]
        hs.append(Halfspace(la.vector(xi), height))
        return hrep_to_vrep(hs)

    @cached_property
    def _simplicial_dual(self):
        """Simplicial cones subdividing sigma^dual, as (|det W|, W) with integer W."""
        xi0 = self.cone.interior_point()
        q = self.slice_polytope(xi0)
        origin = (Fraction(0),) * self.dim
        rays = {}
        for w in self.cone.facets:
            rays[la.scale(1 / la.dot(w, xi0), w)] = w
        out = []
        for simplex in triangulate(q, reference=origin):
            ws = [rays[v] for v in simplex[1:]]
            out.append((abs(la.int_det(ws)), tuple(ws)))
        return tuple(out)

    @cached_property
    def _float_tables(self):
        dets = np.array([float(d) for d, _ in self._simplicial_dual])
        ws = np.array([[list(map(float, w)) for w in ws] for _, ws in self._simplicial_dual])
        return dets * float(self.lattice.covolume), ws

    def volume_fast(self, xi):
        """Volume via the simplicial subdivision; exact for rational input."""
        if isinstance(xi, np.ndarray) or not _is_exact(xi):
            dets, ws = self._float_tables
            pair = ws @ np.asarray(xi, dtype=float)
            if np.any(pair <= 0):
                return np.inf
            return float(np.sum(dets / np.prod(pair, axis=1)))
        xi = la.vector(xi)
        total = Fraction(0)
        for d, ws in self._simplicial_dual:
            prod = Fraction(1)
            for w in ws:
                prod *= la.dot(w, xi)
            total += d / prod
        return total * self.lattice.covolume

    def volume_gradient_exact(self, xi) -> tuple:
        """Exact gradient of the volume at a rational interior point."""
        xi = la.vector(xi)
        grad = [Fraction(0)] * self.dim
        for d, ws in self._simplicial_dual:
            pairs = [la.dot(w, xi) for w in ws]
            prod = Fraction(1)
            for p in pairs:
                prod *= p
            term = -d / prod
            for w, p in zip(ws, pairs):
                for i in range(self.dim):
                    grad[i] += term * w[i] / p
        return tuple(g * self.lattice.covolume for g in grad)

    def __repr__(self):
        return (f"ToricSingularity(dim={self.dim}, covolume={la.fmt(self.lattice.covolume)}, "
                f"generators={[tuple(map(la.fmt, g)) for g in self.generators]})")


def _show(xi):
    return "(" + ", ".join(la.fmt(x) if isinstance(x, Fraction) else repr(float(x)) for x in xi) + ")"


def _gorenstein_covector(gens) -> tuple:
    n = len(gens[0])
    idx = []
    basis = []
    for i, g in enumerate(gens):
        if la.rank(basis + [g]) > len(basis):
            basis.append(g)
            idx.append(i)
    if len(basis) < n:
        raise GeometryError("ray generators do not span")
    u = la.solve(basis, (Fraction(1),) * n)
    bad = [g for g in gens if la.dot(u, g) != 1]
    if bad:
        raise NotKltError("not Q-Gorenstein: no covector pairs to 1 with every primitive "
                          f"ray generator (fails on {tuple(map(la.fmt, bad[0]))})")
    return u


def from_cyclic_quotient(r: int, a: Sequence[int]) -> ToricSingularity:
    """The quotient ``C^n / mu_r`` acting with weights ``a``, i.e. ``1/r(a_1,...,a_n)``."""
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise NotKltError(f"group order must be a positive integer, got {r!r}")
    a = [int(x) for x in a]
    n = len(a)
    if n < 1:
        raise NotKltError("weight vector must be nonempty")
    if r > 1:
        bad = [x for x in a if gcd(x, r) != 1]
        if bad:
            raise NotKltError(
                f"1/{r}{tuple(a)} is not an isolated quotient singularity: weight {bad[0]} "
                f"is not coprime to {r} (the group contains pseudo-reflections)")
    gens = list(la.identity(n)) + [tuple(Fraction(x % r, r) for x in a)]
    lattice = Lattice.from_generators(gens)
    return ToricSingularity.from_rays(lattice, la.identity(n))


def smooth(n: int) -> ToricSingularity:
    return from_cyclic_quotient(1, [0] * n)


def log_discrepancy(s: ToricSingularity, v):
    xi = _xi(v)
    s.check_interior(xi)
    if isinstance(xi, np.ndarray):
        return float(np.dot(np.array(s.gorenstein_covector, dtype=float), xi))
    return la.dot(s.gorenstein_covector, xi)


def volume(s: ToricSingularity, v):
    """n! times the M-normalized volume of the slice of sigma^dual cut out by xi."""
    xi = _xi(v)
    s.check_interior(xi)
    if isinstance(xi, np.ndarray):
        return s.volume_fast(xi)
    p = s.slice_polytope(xi)
    return factorial(s.dim) * polytope_volume(p, s.dual_lattice)


def normalized_volume(s: ToricSingularity, v):
    xi = _xi(v)
    return log_discrepancy(s, xi) ** s.dim * volume(s, xi)


def finite_cover_scaling_check(s: ToricSingularity, d: int, v, sublattice: Lattice | None = None):
    """Compare a degree-``d`` toric cover ``X' -> X`` against ``d * vol^(X) = vol^(X')``.

    The cover replaces ``N`` by a sublattice ``N'`` of index ``d`` that
    contains every primitive ray generator (so the cover is unramified in
    codimension one and the boundary stays zero).  By default ``N'`` is the
    lattice spanned by the generators.  Returns
    ``(covolume_ratio, volume_ratio)``.
    """
    xi = la.vector(_xi(v))
    if sublattice is None:
        sublattice = Lattice.from_generators(s.generators)
    if sublattice.dim != s.dim:
        raise GeometryError("sublattice dimension mismatch")
    if not all(s.lattice.contains(sublattice.point(e)) for e in la.identity(s.dim)):
        raise GeometryError("proposed cover lattice is not a sublattice of N")
    missing = [g for g in s.generators if not sublattice.contains(g)]
    if missing:
        raise GeometryError("sublattice misses the primitive ray generator "
                            f"{tuple(map(la.fmt, missing[0]))}; the cover would ramify along a "
                            "toric divisor")
    ratio = sublattice.covolume / s.lattice.covolume
    if ratio != d:
        raise GeometryError(f"sublattice has index {la.fmt(ratio)}, not {d}")
    cover = ToricSingularity.from_rays(sublattice, s.cone.rays)
    return ratio, normalized_volume(cover, xi) / normalized_volume(s, xi)


# -- JSON -------------------------------------------------------------------

TORIC_SCHEMA = {
    "type": "object",
    "oneOf": [
        {"required": ["cyclic_quotient"]},
        {"required": ["lattice", "cone_rays"]},
    ],
    "properties": {
        "cyclic_quotient": {
            "type": "object",
            "required": ["r", "a"],
            "properties": {
                "r": {"type": "integer", "minimum": 1},
                "a": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
            },
        },
        "lattice": {"type": "array", "minItems": 1,
                    "items": {"type": "array", "items": {"$ref": "#/$defs/q"}}},
        "cone_rays": {"type": "array", "minItems": 1,
                      "items": {"type": "array", "items": {"$ref": "#/$defs/q"}}},
        "xi": {"type": "array", "items": {"$ref": "#/$defs/q"}},
    },
    "$defs": {
        "q": {"oneOf": [{"type": "integer"},
                        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]},
    },
}


def toric_from_json(data) -> ToricSingularity:
    """Build from ``{"cyclic_quotient": {...}}`` or ``{"lattice": [...], "cone_rays": [...]}``.

    ``lattice`` lists generators of N (one inner list per generator).
    """
    if isinstance(data, str):
        data = json.loads(data)
    if "cyclic_quotient" in data:
        q = data["cyclic_quotient"]
        return from_cyclic_quotient(q["r"], q["a"])
    try:
        lattice = Lattice.from_generators([la.vector(g) for g in data["lattice"]])
        rays = [la.vector(r) for r in data["cone_rays"]]
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(str(e), "/lattice") from e
    return ToricSingularity.from_rays(lattice, rays)
