"""Exact polyhedral geometry: cones, lattices, polytopes and their volumes.

Conversions between H- and V-representations go through one routine,
:func:`extreme_rays`, a double-description (Motzkin) enumeration of the
extreme rays of a pointed cone ``{x : A x >= 0}`` carried out in integer
arithmetic.  Rows and rays are kept as primitive integer vectors, which
keeps the numbers small and makes de-duplication a tuple comparison.

Halfspaces for bounded polytopes use the convention ``<a, x> <= b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial, lcm
from typing import Iterable, Sequence

from . import linalg as la
from .errors import (GeometryError, NotFullDimensionalError, NotPointedError,
                     UnboundedError)

MAX_DIM = 8


# --------------------------------------------------------------------------
# double description


def _independent_rows(rows: Sequence[tuple[int, ...]], d: int) -> list[int]:
    # incremental echelon form: reduce each row against the pivots found so far
    chosen: list[int] = []
    basis: list[tuple[int, list[Fraction]]] = []
    for i, r in enumerate(rows):
        v = [Fraction(x) for x in r]
        for c, b in basis:
            if v[c]:
                f = v[c]
                v = [x - f * y for x, y in zip(v, b)]
        c = next((j for j, x in enumerate(v) if x), None)
        if c is None:
            continue
        inv = 1 / v[c]
        basis.append((c, [x * inv for x in v]))
        chosen.append(i)
        if len(chosen) == d:
            break
    return chosen


def extreme_rays(rows: Iterable[Sequence], dim: int | None = None) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{x : <row, x> >= 0 for all rows}``.

    Rows may be rational; each is rescaled to a primitive integer vector.
    Returns primitive integer ray generators in lexicographic order.
    Raises :class:`NotPointedError` (with a lineality witness) when the
    rows do not span, i.e. the cone contains a line.
    """
    rows = [la.integer_row(r) for r in rows]
    if dim is None:
        if not rows:
            raise ValueError("dimension required for an empty system")
        dim = len(rows[0])
    if any(len(r) != dim for r in rows):
        raise ValueError("dimension mismatch among inequality rows")
    rows = [r for r in dict.fromkeys(rows) if any(r)]
    if dim == 0:
        return []
    init = _independent_rows(rows, dim)
    if len(init) < dim:
        witness = la.nullspace(rows, dim)[0] if rows else la.identity(dim)[0]
        raise NotPointedError("cone contains a line", lineality=la.primitive(witness))

    order = init + [i for i in range(len(rows)) if i not in init]
    rows = [rows[i] for i in order]
    inv = la.inverse(rows[:dim])
    rays: list[tuple[int, ...]] = []
    zeros: list[int] = []
    for j in range(dim):
        col = tuple(inv[i][j] for i in range(dim))
        rays.append(la.primitive(col))
        zeros.append(((1 << dim) - 1) & ~(1 << j))

    for k in range(dim, len(rows)):
        a = rows[k]
        vals = [sum(x * y for x, y in zip(a, r)) for r in rays]
        neg = [i for i, v in enumerate(vals) if v < 0]
        bit = 1 << k
        if not neg:
            for i, v in enumerate(vals):
                if v == 0:
                    zeros[i] |= bit
            continue
        pos = [i for i, v in enumerate(vals) if v > 0]
        new_rays, new_zeros = [], []
        for p in pos:
            for n in neg:
                common = zeros[p] & zeros[n]
                if common.bit_count() < dim - 2:
                    continue
                adjacent = True
                for i, z in enumerate(zeros):
                    if i != p and i != n and z & common == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vn = vals[p], vals[n]
                comb = tuple(vp * x - vn * y for x, y in zip(rays[n], rays[p]))
                new_rays.append(la.primitive(comb))
                new_zeros.append(common | bit)
        keep = [i for i, v in enumerate(vals) if v >= 0]
        rays = [rays[i] for i in keep] + new_rays
        zeros = [zeros[i] | (bit if vals[i] == 0 else 0) for i in keep] + new_zeros
    return sorted(set(rays))


# --------------------------------------------------------------------------
# lattices and cones


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice in Q^d generated by the columns of ``basis``."""

    basis: tuple  # rows of the d x d basis matrix

    def __post_init__(self):
        b = la.matrix(self.basis)
        object.__setattr__(self, "basis", b)
        if len(b) == 0 or any(len(r) != len(b) for r in b):
            raise GeometryError("lattice basis must be a square matrix")
        if la.det(b) == 0:
            raise GeometryError("lattice basis is singular")

    @classmethod
    def standard(cls, d: int) -> "Lattice":
        return cls(la.identity(d))

    @classmethod
    def from_generators(cls, gens: Sequence[Sequence]) -> "Lattice":
        """Lattice generated by vectors (columns), e.g. Z^n plus a glue vector."""
        return cls(la.transpose(hermite_basis([la.vector(g) for g in gens])))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def covolume(self) -> Fraction:
        return abs(la.det(self.basis))

    @cached_property
    def _inv(self):
        return la.inverse(self.basis)

    def coordinates(self, x: Sequence) -> tuple:
        """Coordinates of ``x`` with respect to the basis columns."""
        return la.matvec(self._inv, la.vector(x))

    def point(self, coords: Sequence) -> tuple:
        return la.matvec(self.basis, la.vector(coords))

    def contains(self, x: Sequence) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(x))

    def dual(self) -> "Lattice":
        """``{y : <y, x> in Z for all x in self}``; basis columns are rows of B^-1."""
        return Lattice(la.transpose(self._inv))

    def primitive_generator(self, v: Sequence) -> tuple:
        """Shortest lattice vector on the ray through ``v``."""
        c = la.primitive(self.coordinates(v))
        return self.point(c)


def hermite_basis(gens: Sequence[Sequence[Fraction]]) -> list[tuple]:
    """A basis of the Z-span of rational generators (full rank assumed)."""
    d = len(gens[0])
    den = 1
    for g in gens:
        for x in g:
            den = lcm(den, x.denominator)
    ints = [[int(x * den) for x in g] for g in gens]
    # row-style Hermite reduction via integer column operations
    rows = [list(r) for r in ints]
    basis = []
    col = 0
    while col < d:
        if not any(r[col] for r in rows):
            col += 1
            continue
        while len([r for r in rows if r[col] != 0]) > 1:
            live = sorted((r for r in rows if r[col] != 0), key=lambda r: abs(r[col]))
            piv = live[0]
            for r in live[1:]:
                q = r[col] // piv[col]
                for j in range(d):
                    r[j] -= q * piv[j]
        piv = next(r for r in rows if r[col] != 0)
        basis.append(tuple(Fraction(x, den) for x in piv))
        rows = [r for r in rows if r is not piv]
        col += 1
    if len(basis) != d:
        raise GeometryError("generators do not span a full-rank lattice")
    return basis


@dataclass(frozen=True)
class PolyhedralCone:
    """Pointed, full-dimensional cone with both representations.

    ``rays`` and ``facets`` are primitive integer vectors (with respect to
    the standard coordinates); facets are inward normals.
    """

    rays: tuple
    facets: tuple
    lattice: Lattice

    @classmethod
    def from_rays(cls, rays: Sequence[Sequence], lattice: Lattice | None = None) -> "PolyhedralCone":
        rays = [la.vector(r) for r in rays]
        if not rays:
            raise NotFullDimensionalError("a full-dimensional cone needs rays")
        d = la.check_dims(*rays)
        if d > MAX_DIM:
            raise GeometryError(f"dimension {d} exceeds cap {MAX_DIM}")
        try:
            facets = extreme_rays(rays, d)
        except NotPointedError as e:
            raise NotFullDimensionalError(
                "cone is not full-dimensional: its rays lie in a hyperplane "
                f"with normal {e.lineality}") from e
        try:
            irredundant = extreme_rays(facets, d)
        except NotPointedError as e:
            raise NotPointedError("cone is not pointed", lineality=e.lineality) from e
        return cls(tuple(irredundant), tuple(facets), lattice or Lattice.standard(d))

    @classmethod
    def from_facets(cls, facets: Sequence[Sequence], lattice: Lattice | None = None) -> "PolyhedralCone":
        facets = [la.vector(f) for f in facets]
        d = la.check_dims(*facets)
        try:
            rays = extreme_rays(facets, d)
        except NotPointedError as e:
            raise NotPointedError("cone is not pointed", lineality=e.lineality) from e
        return cls.from_rays(rays, lattice)

    @property
    def dim(self) -> int:
        return len(self.rays[0])

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        vals = [la.dot(f, x) for f in self.facets]
        return all(v > 0 for v in vals) if strict else all(v >= 0 for v in vals)

    def interior_point(self) -> tuple:
        return la.vector(map(sum, zip(*self.rays)))

    def same_as(self, other: "PolyhedralCone") -> bool:
        return set(self.rays) == set(other.rays) and set(self.facets) == set(other.facets)


def dual_cone(c: PolyhedralCone) -> PolyhedralCone:
    """``{y : <y, x> >= 0 for x in c}``, in the dual lattice."""
    if len(c.facets) < c.dim or la.rank(c.rays) < c.dim:
        raise NotFullDimensionalError("dual_cone needs a full-dimensional cone")
    if la.rank(c.facets) < c.dim:
        raise NotPointedError("dual_cone needs a pointed cone")
    return PolyhedralCone(tuple(c.facets), tuple(c.rays), c.lattice.dual())


# --------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Halfspace:
    """``<normal, x> <= offset``."""

    normal: tuple
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", la.vector(self.normal))
        object.__setattr__(self, "offset", la.as_fraction(self.offset))

    @classmethod
    def geq(cls, normal: Sequence, offset) -> "Halfspace":
        """``<normal, x> >= offset``."""
        return cls(tuple(-la.as_fraction(a) for a in normal), -la.as_fraction(offset))

    def slack(self, x: Sequence) -> Fraction:
        return self.offset - la.dot(self.normal, x)


@dataclass(frozen=True)
class BoundedPolytope:
    vertices: tuple
    halfspaces: tuple
    dim: int

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @cached_property
    def affine_dim(self) -> int:
        return _affine_dim(self.vertices)

    @property
    def degenerate(self) -> bool:
        return self.affine_dim < self.dim

    @cached_property
    def facets(self) -> list[tuple[Halfspace, frozenset]]:
        """Irredundant facets with their vertex-incidence sets."""
        out, seen = [], set()
        for h in self.halfspaces:
            tight = frozenset(i for i, v in enumerate(self.vertices) if h.slack(v) == 0)
            if tight in seen or _affine_dim([self.vertices[i] for i in tight]) != self.dim - 1:
                continue
            seen.add(tight)
            out.append((h, tight))
        return out

    def scaled(self, c) -> "BoundedPolytope":
        c = la.as_fraction(c)
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return BoundedPolytope(
            tuple(la.scale(c, v) for v in self.vertices),
            tuple(Halfspace(h.normal, c * h.offset) for h in self.halfspaces), self.dim)

    def transformed(self, m: Sequence[Sequence]) -> "BoundedPolytope":
        """Image under an invertible linear map ``x -> m x``."""
        minv_t = la.transpose(la.inverse(m))
        return BoundedPolytope(
            tuple(la.matvec(m, v) for v in self.vertices),
            tuple(Halfspace(la.matvec(minv_t, h.normal), h.offset) for h in self.halfspaces),
            self.dim)


def _affine_dim(points: Sequence[Sequence]) -> int:
    if not points:
        return -1
    p0 = points[0]
    return la.rank([la.sub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def hrep_to_vrep(halfspaces: Sequence[Halfspace], lattice: Lattice | None = None) -> BoundedPolytope:
    """Exact vertex enumeration of a bounded intersection of halfspaces.

    Homogenizes to the cone ``{(x, t) : b t - <a, x> >= 0, t >= 0}``; rays
    with ``t > 0`` are vertices, rays with ``t = 0`` are recession
    directions and make the system unbounded.
    """
    hs = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
    if not hs:
        raise UnboundedError("no halfspaces", direction=None)
    d = la.check_dims(*(h.normal for h in hs))
    if d > MAX_DIM:
        raise GeometryError(f"dimension {d} exceeds cap {MAX_DIM}")
    rows = [tuple(-a for a in h.normal) + (h.offset,) for h in hs]
    rows.append((Fraction(0),) * d + (Fraction(1),))
    try:
        rays = extreme_rays(rows, d + 1)
    except NotPointedError as e:
        direction = e.lineality[:d]
        raise UnboundedError("halfspace system contains a line", direction=direction) from e
    verts = []
    for r in rays:
        if r[-1] == 0:
            raise UnboundedError("halfspace system is unbounded",
                                 direction=tuple(Fraction(x) for x in r[:d]))
        verts.append(tuple(Fraction(x, r[-1]) for x in r[:d]))
    return BoundedPolytope(tuple(sorted(verts)), tuple(hs), d)


def convex_hull(points: Sequence[Sequence]) -> BoundedPolytope:
    """H- and V-representation of the convex hull of a full-dimensional point set."""
    pts = sorted(set(la.vector(p) for p in points))
    d = la.check_dims(*pts)
    try:
        normals = extreme_rays([p + (Fraction(1),) for p in pts], d + 1)
    except NotPointedError as e:
        raise NotFullDimensionalError("points do not affinely span") from e
    hs = [Halfspace.geq(n[:d], -Fraction(n[d])) for n in normals]
    return hrep_to_vrep(hs)


def _triangulate_face(verts, face, dim, facet_sets, apex_key, memo):
    key = (face, dim)
    if key in memo:
        return memo[key]
    if dim == 0:
        result = [(next(iter(face)),)]
    else:
        apex = min(face, key=apex_key)
        subfaces = set()
        for fs in facet_sets:
            sub = face & fs
            if apex in sub or len(sub) < dim or sub in subfaces:
                continue
            if _affine_dim([verts[i] for i in sub]) == dim - 1:
                subfaces.add(sub)
        result = []
        for sub in sorted(subfaces, key=sorted):
            for simplex in _triangulate_face(verts, sub, dim - 1, facet_sets, apex_key, memo):
                result.append((apex,) + simplex)
    memo[key] = result
    return result


def triangulate(p: BoundedPolytope, reference: Sequence | None = None) -> list[tuple]:
    """Pulling triangulation from a reference vertex (default: lexicographically first).

    Returns simplices as tuples of vertex coordinates.
    """
    if p.is_empty or p.degenerate:
        return []
    verts = p.vertices
    ref_idx = 0
    if reference is not None:
        ref = la.vector(reference)
        ref_idx = verts.index(ref)
    facet_sets = [fs for _, fs in p.facets]

    def apex_key(i):
        return (i != ref_idx, i)

    simplices = _triangulate_face(verts, frozenset(range(len(verts))), p.dim,
                                  facet_sets, apex_key, {})
    return [tuple(verts[i] for i in s) for s in simplices]


def simplex_volume(simplex: Sequence[Sequence]) -> Fraction:
    v0 = simplex[0]
    d = len(v0)
    return abs(la.det([la.sub(v, v0) for v in simplex[1:]])) / factorial(d)


def polytope_volume(p: BoundedPolytope, lattice: Lattice | None = None) -> Fraction:
    """Euclidean volume divided by the lattice covolume; 0 for degenerate polytopes."""
    if p.is_empty or p.degenerate:
        return Fraction(0)
    vol = sum((simplex_volume(s) for s in triangulate(p)), Fraction(0))
    return vol / lattice.covolume if lattice is not None else vol


def centroid(p: BoundedPolytope) -> tuple:
    """Exact barycenter of a full-dimensional polytope."""
    total = Fraction(0)
    acc = [Fraction(0)] * p.dim
    for s in triangulate(p):
        v = simplex_volume(s)
        total += v
        c = [sum(x) / len(s) for x in zip(*s)]
        acc = [a + v * x for a, x in zip(acc, c)]
    if total == 0:
        raise GeometryError("centroid of a degenerate polytope")
    return tuple(a / total for a in acc)
