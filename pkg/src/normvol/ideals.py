"""Monomial ideals over a toric singularity, in coordinates of the dual lattice M.

Exponent vectors are integer coordinates with respect to the basis of M
dual to the basis of N, so the pairing with a valuation ``xi`` is the
plain dot product with ``xi``'s N-coordinates and volumes are normalized
against the standard lattice.

Multiplicity is ``n!`` times the volume of ``sigma^dual`` minus the Newton
region; lct is the ray-scaling LP ``max{c : u in c * P(I)}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg as la
from . import toric
from .errors import GeometryError, UnboundedError, ValidationError
from .geometry import Halfspace, extreme_rays, hrep_to_vrep, polytope_volume
from .lp import lp_optimize
from .toric import ToricSingularity


class Facet(NamedTuple):
    """``<normal, y> >= offset``."""

    normal: tuple
    offset: Fraction


@dataclass(frozen=True)
class MonoidData:
    """sigma^dual intersected with M, in M-coordinates."""

    ambient: ToricSingularity

    @cached_property
    def facet_normals(self) -> tuple:
        # N-coordinates of the primitive generators are integral
        return tuple(la.primitive(self.ambient.lattice.coordinates(g))
                     for g in self.ambient.generators)

    @cached_property
    def rays(self) -> tuple:
        return tuple(extreme_rays(self.facet_normals, self.ambient.dim))

    @cached_property
    def gorenstein(self) -> tuple:
        """The Gorenstein covector u in M-coordinates."""
        return la.matvec(la.transpose(self.ambient.lattice.basis),
                         self.ambient.gorenstein_covector)

    def xi_coords(self, xi) -> tuple:
        return self.ambient.lattice.coordinates(xi)

    def contains(self, c) -> bool:
        return all(sum(a * x for a, x in zip(f, c)) >= 0 for f in self.facet_normals)

    def points_below(self, xi_n: Sequence[Fraction], bound: Fraction, strict: bool = False):
        """Integer points of sigma^dual with ``<c, xi_n> <= bound`` (``<`` if strict)."""
        n = self.ambient.dim
        hs = [Halfspace.geq(f, 0) for f in self.facet_normals] + [Halfspace(xi_n, bound)]
        box = hrep_to_vrep(hs).vertices
        lo = [int(np.floor(min(v[i] for v in box))) for i in range(n)]
        hi = [int(np.ceil(max(v[i] for v in box))) for i in range(n)]
        grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
        f = np.array(self.facet_normals, dtype=np.int64)
        pts = pts[np.all(pts @ f.T >= 0, axis=1)]
        den = 1
        for x in list(xi_n) + [bound]:
            den = np.lcm(den, x.denominator)
        xi_int = np.array([int(x * den) for x in xi_n], dtype=np.int64)
        b = int(bound * den)
        vals = pts @ xi_int
        keep = vals < b if strict else vals <= b
        return pts[keep], vals[keep], den

    @cached_property
    def hilbert_basis(self) -> tuple:
        """Minimal generators of the monoid sigma^dual cap M."""
        xi0 = la.vector(map(sum, zip(*self.facet_normals)))
        bound = sum(la.dot(r, xi0) for r in self.rays)
        pts, vals, _ = self.points_below(xi0, bound)
        order = np.argsort(vals, kind="stable")
        cands = [tuple(int(x) for x in pts[i]) for i in order if vals[i] > 0]
        basis = []
        for c in cands:
            if not any(self.contains(la.sub(c, h)) for h in basis):
                basis.append(c)
        return tuple(sorted(basis))


@lru_cache(maxsize=None)
def monoid(s: ToricSingularity) -> MonoidData:
    return MonoidData(s)


def _reduce(gens, mono: MonoidData) -> tuple:
    """Drop every generator that is a monoid multiple of another one."""
    gens = sorted(set(gens))
    if len(gens) < 2:
        return tuple(gens)
    # g divides g' iff <f, g' - g> >= 0 for every facet normal f
    pairs = np.array(gens, dtype=np.int64) @ np.array(mono.facet_normals, dtype=np.int64).T
    keep = []
    for start in range(0, len(gens), 512):
        block = pairs[start:start + 512]
        divides = np.all(pairs[None, :, :] <= block[:, None, :], axis=2)
        divides[np.arange(len(block)), np.arange(start, start + len(block))] = False
        keep.extend(start + i for i in np.flatnonzero(~divides.any(axis=1)))
    return tuple(gens[i] for i in keep)


def _on_ray(g, r) -> bool:
    """``g`` is a positive multiple of ``r``."""
    n = len(r)
    return (la.dot(r, g) > 0
            and all(r[i] * g[j] == r[j] * g[i] for i in range(n) for j in range(i + 1, n)))


@dataclass(frozen=True)
class MonomialIdeal:
    generators: tuple
    ambient: ToricSingularity

    def __init__(self, generators, ambient: ToricSingularity | None = None):
        gens = [tuple(int(x) for x in g) for g in generators]
        if not gens:
            raise ValueError("an ideal needs at least one generator")
        n = len(gens[0])
        if any(len(g) != n for g in gens):
            raise ValueError("generators must share a dimension")
        ambient = ambient or toric.smooth(n)
        if ambient.dim != n:
            raise ValueError("generator dimension does not match the ambient")
        mono = monoid(ambient)
        for g in gens:
            if not mono.contains(g):
                raise ValueError(f"exponent {g} lies outside sigma^dual")
        object.__setattr__(self, "generators", _reduce(gens, mono))
        object.__setattr__(self, "ambient", ambient)

    @classmethod
    def unit(cls, ambient: ToricSingularity) -> "MonomialIdeal":
        return cls([(0,) * ambient.dim], ambient)

    @property
    def dim(self) -> int:
        return self.ambient.dim

    @property
    def is_unit(self) -> bool:
        return self.generators == ((0,) * self.dim,)

    @property
    def monoid(self) -> MonoidData:
        return monoid(self.ambient)

    def is_m_primary(self) -> bool:
        """Every extremal ray of sigma^dual carries a generator."""
        if self.is_unit:
            return False
        for r in self.monoid.rays:
            if not any(_on_ray(g, r) for g in self.generators):
                return False
        return True

    def contains(self, alpha) -> bool:
        return any(self.monoid.contains(la.sub(alpha, g)) for g in self.generators)

    def __mul__(self, other: "MonomialIdeal") -> "MonomialIdeal":
        return MonomialIdeal([la.add(g, h) for g in self.generators for h in other.generators],
                             self.ambient)

    def __pow__(self, k: int) -> "MonomialIdeal":
        if k < 0:
            raise ValueError("negative power")
        out = MonomialIdeal.unit(self.ambient)
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self):
        return f"MonomialIdeal({list(self.generators)})"


@lru_cache(maxsize=256)
def newton_polyhedron(ideal: MonomialIdeal) -> tuple[Facet, ...]:
    """Facets of conv(generators) + sigma^dual, including unbounded ones."""
    n = ideal.dim
    rows = [r + (0,) for r in ideal.monoid.rays] + [g + (1,) for g in ideal.generators]
    facets = []
    for h in extreme_rays(rows, n + 1):
        if not any(h[:n]):
            continue
        facets.append(Facet(tuple(h[:n]), Fraction(-h[n])))
    return tuple(facets)


def _truncation(ideal: MonomialIdeal):
    mono = ideal.monoid
    xi0 = la.vector(map(sum, zip(*mono.facet_normals)))
    top = max(la.dot(g, xi0) for g in ideal.generators)
    return xi0, top


def multiplicity(ideal: MonomialIdeal) -> Fraction:
    if ideal.is_unit:
        return Fraction(0)
    if not ideal.is_m_primary():
        raise UnboundedError("ideal is not m-primary: the complement of its Newton region "
                             "is unbounded")
    mono = ideal.monoid
    xi0, top = _truncation(ideal)
    cap = Halfspace(xi0, top)
    outer = hrep_to_vrep([Halfspace.geq(f, 0) for f in mono.facet_normals] + [cap])
    inner = hrep_to_vrep([Halfspace.geq(f.normal, f.offset) for f in newton_polyhedron(ideal)]
                         + [cap])
    return factorial(ideal.dim) * (polytope_volume(outer) - polytope_volume(inner))


def lct(ideal: MonomialIdeal) -> Fraction:
    """``max{c : u in c * P(I)}`` for the Gorenstein covector ``u``."""
    if ideal.is_unit:
        raise GeometryError("the unit ideal has infinite log canonical threshold")
    u = ideal.monoid.gorenstein
    cons = [Halfspace((f.offset,), la.dot(f.normal, u))
            for f in newton_polyhedron(ideal) if f.offset > 0]
    value, _ = lp_optimize((1,), cons, "max")
    return value


def normalized_multiplicity(ideal: MonomialIdeal) -> Fraction:
    return lct(ideal) ** ideal.dim * multiplicity(ideal)


def valuative_ideal(s: ToricSingularity, xi, k) -> MonomialIdeal:
    """``{f : v_xi(f) >= k}`` via its minimal monomial generators."""
    k = la.as_fraction(k)
    xi = la.vector(xi)
    s.check_interior(xi)
    if k <= 0:
        return MonomialIdeal.unit(s)
    mono = monoid(s)
    xi_n = mono.xi_coords(xi)
    hb = mono.hilbert_basis
    reach = max(la.dot(h, xi_n) for h in hb)
    pts, vals, den = mono.points_below(xi_n, k + reach, strict=True)
    kk = int(k * den) if (k * den).denominator == 1 else None
    if kk is None:
        raise ValueError("internal: threshold not integral after scaling")
    inside = vals >= kk
    cands = pts[inside]
    cvals = vals[inside]
    f = np.array(mono.facet_normals, dtype=np.int64)
    xi_int = np.array([int(x * den) for x in xi_n], dtype=np.int64)
    minimal = np.ones(len(cands), dtype=bool)
    for h in hb:
        h = np.array(h, dtype=np.int64)
        diff = cands - h
        in_cone = np.all(diff @ f.T >= 0, axis=1)
        minimal &= ~(in_cone & (cvals - int(h @ xi_int) >= kk))
    gens = [tuple(int(x) for x in c) for c in cands[minimal]]
    return MonomialIdeal(gens, s)


class GradedFamily:
    """The valuative ideals ``a_k(xi)`` of a rational toric valuation."""

    def __init__(self, s: ToricSingularity, xi):
        self.ambient = s
        self.xi = la.vector(xi)
        s.check_interior(self.xi)
        self._cache: dict = {}

    def __getitem__(self, k) -> MonomialIdeal:
        k = la.as_fraction(k)
        if k not in self._cache:
            self._cache[k] = valuative_ideal(self.ambient, self.xi, k)
        return self._cache[k]

    def check_graded(self, k, j) -> bool:
        """``a_k * a_l`` is contained in ``a_{k+l}``."""
        target = self[la.as_fraction(k) + la.as_fraction(j)]
        return all(target.contains(la.add(g, h))
                   for g in self[k].generators for h in self[j].generators)


def convergence_report(s: ToricSingularity, xi, k_max: int | Sequence[int]):
    """Rows ``(k, A^n mult(a_k)/k^n, lct(a_k)^n mult(a_k))`` for the valuative family."""
    xi = la.vector(xi)
    n = s.dim
    a = toric.log_discrepancy(s, xi)
    target = toric.normalized_volume(s, xi)
    ks = range(1, k_max + 1) if isinstance(k_max, int) else list(k_max)
    family = GradedFamily(s, xi)
    rows = []
    for k in ks:
        ideal = family[k]
        m = multiplicity(ideal)
        rows.append({
            "k": k,
            "multiplicity": m,
            "valuative_bound": a ** n * m / Fraction(k) ** n,
            "lct_bound": lct(ideal) ** n * m,
        })
    firsts = [r["valuative_bound"] for r in rows]
    return {
        "normalized_volume": target,
        "rows": rows,
        "non_increasing": all(x >= y for x, y in zip(firsts, firsts[1:])),
        "bounded_below": all(x >= target for x in firsts),
    }


IDEAL_SCHEMA = {
    "type": "object",
    "required": ["generators"],
    "properties": {
        "generators": {"type": "array", "minItems": 1,
                       "items": {"type": "array", "minItems": 1, "items": {"type": "integer"}}},
        "ambient": {"oneOf": [
            {"type": "object", "required": ["smooth"],
             "properties": {"smooth": {"type": "integer", "minimum": 1}}},
            toric.TORIC_SCHEMA,
        ]},
    },
}


def ideal_from_json(data) -> MonomialIdeal:
    if isinstance(data, str):
        data = json.loads(data)
    amb = data.get("ambient")
    n = len(data["generators"][0])
    if amb is None:
        s = toric.smooth(n)
    elif "smooth" in amb:
        s = toric.smooth(amb["smooth"])
    else:
        s = toric.toric_from_json(amb)
    try:
        return MonomialIdeal(data["generators"], s)
    except ValueError as e:
        raise ValidationError(str(e), "/generators") from e
