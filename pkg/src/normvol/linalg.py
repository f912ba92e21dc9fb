"""Exact rational linear algebra on tuples of :class:`fractions.Fraction`.

Vectors are plain tuples of ``Fraction`` (or ``int`` for lattice points);
matrices are tuples of row tuples.  Everything here is exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Vector = tuple  # tuple[Fraction, ...]
Matrix = tuple  # tuple[Vector, ...]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to ``Fraction``.

    Floats are rejected: silently converting a binary float would
    smuggle rounding into the exact path.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, float):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, float) or type(x).__name__.startswith("float"):
        raise TypeError(f"refusing to convert float {x!r} to an exact rational")
    # numpy integers
    return Fraction(int(x))


def vector(xs: Iterable) -> Vector:
    return tuple(as_fraction(x) for x in xs)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    m = tuple(vector(r) for r in rows)
    if m and len({len(r) for r in m}) != 1:
        raise ValueError("ragged matrix")
    return m


def check_dims(*vs: Sequence) -> int:
    dims = {len(v) for v in vs}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def dot(a: Sequence, b: Sequence):
    check_dims(a, b)
    return sum((x * y for x, y in zip(a, b)), Fraction(0) if a and isinstance(a[0], Fraction) else 0)


def add(a: Sequence, b: Sequence) -> Vector:
    check_dims(a, b)
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vector:
    check_dims(a, b)
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vector:
    return tuple(c * x for x in a)


def transpose(m: Sequence[Sequence]) -> Matrix:
    return tuple(zip(*m))


def matvec(m: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in m)


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _rref(rows: Sequence[Sequence]):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    a = [[as_fraction(x) for x in r] for r in rows]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(_rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[Vector]:
    """Basis of ``{x : rows @ x = 0}``."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return list(identity(ncols))
    a, pivots = _rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -a[i][f]
        basis.append(tuple(x))
    return basis


def det(m: Sequence[Sequence]) -> Fraction:
    a = [[as_fraction(x) for x in r] for r in m]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            result = -result
        result *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return result


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant for integer matrices."""
    a = [list(map(int, r)) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def inverse(m: Sequence[Sequence]) -> Matrix:
    n = len(m)
    aug = [list(vector(r)) + list(e) for r, e in zip(m, identity(n))]
    a, pivots = _rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(r[n:]) for r in a)


def solve(m: Sequence[Sequence], b: Sequence) -> Vector:
    """Solve a nonsingular square system ``m x = b``."""
    return matvec(inverse(m), b)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray spanned by a rational vector."""
    if all(type(x) is int for x in v):
        g = reduce(gcd, v, 0)
        if g == 0:
            raise ValueError("zero vector has no primitive generator")
        return tuple(x // g for x in v)
    fr = vector(v)
    den = reduce(lcm, (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive generator")
    return tuple(x // g for x in ints)


def integer_row(v: Sequence) -> tuple[int, ...]:
    """Positive rescaling of a rational row to coprime integers (zero stays zero)."""
    if all(x == 0 for x in v):
        return tuple(0 for _ in v)
    return primitive(v)


def fmt(x) -> str:
    """Serialize a rational as ``"p/q"`` (integers as ``"p"``)."""
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
