"""Monomial weights on Newton-nondegenerate hypersurface singularities.

For ``X = {f = 0}`` in ``C^N`` (``n = N - 1``) and a positive weight ``w``,

    w(f)  = min over terms of <w, alpha>
    A(w)  = sum(w) - w(f)
    mult  = w(f) / prod(w)

and the normalized volume is ``A(w)^n * mult``.  The multiplicity formula
needs nondegeneracy, which is not decided here: either the polynomial
belongs to one of the shipped families (A_k, E_6, E_7, E_8) or the caller
asserts it.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import NotKltError, RefusedError, ValidationError
from .ideals import MonomialIdeal, lct as monomial_lct

FAMILIES = ("A_k", "E6", "E7", "E8")


@dataclass(frozen=True)
class WeightedHypersurface:
    ambient_dim: int
    terms: tuple
    nondegenerate: bool = False
    family: str | None = None
    note: str = field(default="", compare=False)

    def __post_init__(self):
        terms = tuple(tuple(int(x) for x in t) for t in self.terms)
        if not terms:
            raise ValueError("a hypersurface needs at least one term")
        if any(len(t) != self.ambient_dim for t in terms):
            raise ValueError("every exponent vector must have length ambient_dim")
        if any(x < 0 for t in terms for x in t):
            raise ValueError("exponents must be nonnegative")
        if len(set(terms)) != len(terms):
            raise ValueError("duplicate terms")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        """Dimension of the singularity, ``N - 1``."""
        return self.ambient_dim - 1

    @property
    def verified(self) -> bool:
        return self.family is not None

    def permuted(self, perm: Sequence[int]) -> "WeightedHypersurface":
        return WeightedHypersurface(self.ambient_dim,
                                    tuple(tuple(t[p] for p in perm) for t in self.terms),
                                    self.nondegenerate, self.family, self.note)


def a_family(n: int, k: int) -> WeightedHypersurface:
    """``z_1^2 + ... + z_n^2 + z_{n+1}^k``, the n-dimensional A_{k-1} singularity."""
    if n < 1 or k < 2:
        raise ValueError("need n >= 1 and k >= 2")
    N = n + 1
    terms = [tuple(2 if j == i else 0 for j in range(N)) for i in range(n)]
    terms.append(tuple(k if j == n else 0 for j in range(N)))
    return WeightedHypersurface(N, tuple(terms), True, "A_k", f"A_{k - 1} in dimension {n}")


def e_family(kind: str, dim: int) -> WeightedHypersurface:
    """E_6/E_7/E_8 in dimension ``dim >= 2``: squares plus the surface tail in the last two variables."""
    if dim < 2:
        raise ValueError("E-type singularities need dimension >= 2")
    N = dim + 1
    squares = [tuple(2 if j == i else 0 for j in range(N)) for i in range(N - 2)]
    x, y = N - 2, N - 1

    def mono(ex, ey):
        return tuple(ex if j == x else ey if j == y else 0 for j in range(N))

    tails = {"E6": [mono(3, 0), mono(0, 4)],
             "E7": [mono(3, 1), mono(0, 3)],
             "E8": [mono(3, 0), mono(0, 5)]}
    if kind not in tails:
        raise ValueError(f"unknown E-type {kind!r}")
    return WeightedHypersurface(N, tuple(squares + tails[kind]), True, kind,
                                f"{kind} in dimension {dim}")


def _w(w):
    if all(isinstance(x, (int, Fraction, str)) and not isinstance(x, bool) for x in w):
        w = la.vector(w)
        if any(x <= 0 for x in w):
            raise ValueError("weights must be strictly positive")
        return w
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    return w


def weight_of_f(h: WeightedHypersurface, w):
    """``(min_alpha <w, alpha>, minimizing terms)``."""
    w = _w(w)
    vals = [sum(a * x for a, x in zip(t, w)) for t in h.terms]
    m = min(vals)
    return m, tuple(t for t, v in zip(h.terms, vals) if v == m)


def initial_form(h: WeightedHypersurface, w) -> WeightedHypersurface:
    _, active = weight_of_f(h, w)
    return WeightedHypersurface(h.ambient_dim, active, h.nondegenerate, None,
                                "initial form")


def initial_form_degenerate(h: WeightedHypersurface, w) -> bool:
    """Flag weights whose initial form is a monomial or divisible by a variable.

    Either way ``{in_w f = 0}`` is reducible and the closed-form
    multiplicity is not justified at that weight.
    """
    active = weight_of_f(h, w)[1]
    if len(active) == 1:
        return True
    return any(all(t[i] > 0 for t in active) for i in range(h.ambient_dim))


def log_discrepancy(h: WeightedHypersurface, w):
    w = _w(w)
    a = sum(w) - weight_of_f(h, w)[0]
    if a <= 0:
        raise NotKltError(f"weight has nonpositive log discrepancy {a}; not a klt weight")
    return a


def multiplicity(h: WeightedHypersurface, w):
    if not (h.nondegenerate or h.verified):
        raise RefusedError("the closed-form multiplicity w(f)/prod(w) needs Newton "
                           "nondegeneracy; pass nondegenerate=True or use a shipped family")
    w = _w(w)
    wf = weight_of_f(h, w)[0]
    prod = Fraction(1) if not isinstance(w, np.ndarray) else 1.0
    for x in w:
        prod *= x
    return wf / prod


def normalized_volume(h: WeightedHypersurface, w):
    return log_discrepancy(h, w) ** h.dim * multiplicity(h, w)


def hypersurface_lct(h: WeightedHypersurface) -> Fraction:
    """``min(1, c)`` with ``c`` the ray-scaling LP value of the term ideal."""
    return min(Fraction(1), monomial_lct(MonomialIdeal(h.terms)))


def lct_initial_comparison(h: WeightedHypersurface, w):
    """``(lct(f), lct(in_w f), lct(f) >= lct(in_w f))``."""
    lf = hypersurface_lct(h)
    lin = hypersurface_lct(initial_form(h, w))
    return lf, lin, lf >= lin


HYPER_SCHEMA = {
    "type": "object",
    "required": ["ambient_dim", "terms"],
    "properties": {
        "ambient_dim": {"type": "integer", "minimum": 2, "maximum": 8},
        "terms": {"type": "array", "minItems": 1,
                  "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "coefficients": {"type": "array"},
        "nondegenerate": {"type": "boolean"},
        "family": {"type": "object",
                   "required": ["name"],
                   "properties": {"name": {"enum": list(FAMILIES)},
                                  "dim": {"type": "integer", "minimum": 1},
                                  "k": {"type": "integer", "minimum": 2}}},
        "weight": {"type": "array", "items": {}},
    },
}


def hypersurface_from_json(data) -> WeightedHypersurface:
    if isinstance(data, str):
        data = json.loads(data)
    fam = data.get("family")
    if fam:
        h = family(fam["name"], fam.get("dim"), fam.get("k"))
        if sorted(map(tuple, data["terms"])) != sorted(h.terms):
            raise ValidationError("terms do not match the declared family", "/terms")
        return h
    if "coefficients" in data:
        warnings.warn("coefficients are ignored: only exponents enter the formulas")
    try:
        return WeightedHypersurface(data["ambient_dim"], tuple(map(tuple, data["terms"])),
                                    bool(data.get("nondegenerate", False)))
    except ValueError as e:
        raise ValidationError(str(e), "/terms") from e


def family(name: str, dim: int | None, k: int | None = None) -> WeightedHypersurface:
    if name == "A_k":
        if dim is None or k is None:
            raise ValidationError("family A_k needs 'dim' and 'k'", "/family")
        return a_family(dim, k)
    if dim is None:
        raise ValidationError(f"family {name} needs 'dim'", "/family")
    return e_family(name, dim)
