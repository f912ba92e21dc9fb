"""Small exact linear programs over halfspace systems.

Two-phase tableau simplex in ``Fraction`` arithmetic with Bland's
(lowest-index) pivoting, so results are exact and reproducible.  Free
variables are split as ``x = x_plus - x_minus``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .errors import InfeasibleError, UnboundedError
from .geometry import Halfspace


def _pivot(t, basis, row, col):
    piv = t[row][col]
    t[row] = [x / piv for x in t[row]]
    for i in range(len(t)):
        if i != row and t[i][col] != 0:
            f = t[i][col]
            t[i] = [x - f * y for x, y in zip(t[i], t[row])]
    basis[row] = col


def _run(t, basis, cost, allowed):
    """Maximize ``cost . z``; returns None at optimum or the entering column if unbounded."""
    ncols = len(t[0]) - 1
    while True:
        entering = None
        for j in range(ncols):
            if j not in allowed or j in basis:
                continue
            rc = cost[j] - sum(cost[basis[i]] * t[i][j] for i in range(len(t)))
            if rc > 0:
                entering = j
                break
        if entering is None:
            return None
        best = None
        for i in range(len(t)):
            a = t[i][entering]
            if a > 0:
                key = (t[i][-1] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return entering
        _pivot(t, basis, best[1], entering)


def lp_optimize(objective: Sequence, halfspaces: Sequence[Halfspace], sense: str = "max",
                nonnegative: bool = False):
    """Optimize ``<objective, x>`` over ``{x : <a_i, x> <= b_i}``.

    With ``nonnegative=True`` the variables are additionally constrained to
    ``x >= 0`` (and are not split, which halves the tableau).

    Returns ``(value, argpoint)``.  Raises :class:`UnboundedError` carrying
    an improving ray, or :class:`InfeasibleError`.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    c = la.vector(objective)
    hs = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
    d = len(c)
    dm = 0 if nonnegative else d  # columns of the negative parts
    if hs:
        la.check_dims(c, *(h.normal for h in hs))
    m = len(hs)
    sign = 1 if sense == "max" else -1
    n_art = sum(1 for h in hs if h.offset < 0)
    ncols = d + dm + m + n_art
    t, basis = [], []
    art = d + dm + m
    for i, h in enumerate(hs):
        row = [Fraction(0)] * (ncols + 1)
        flip = -1 if h.offset < 0 else 1
        for j, a in enumerate(h.normal):
            row[j] = flip * a
            if dm:
                row[d + j] = -flip * a
        row[d + dm + i] = Fraction(flip)
        row[-1] = flip * h.offset
        if flip < 0:
            row[art] = Fraction(1)
            basis.append(art)
            art += 1
        else:
            basis.append(d + dm + i)
        t.append(row)

    real = set(range(d + dm + m))
    if n_art:
        cost1 = [Fraction(0)] * (d + dm + m) + [Fraction(-1)] * n_art
        _run(t, basis, cost1, set(range(ncols)))
        if sum(t[i][-1] for i in range(m) if basis[i] >= d + dm + m) != 0:
            raise InfeasibleError("halfspace system is empty")
        for i in range(len(t)):
            if basis[i] >= d + dm + m:
                col = next((j for j in sorted(real) if t[i][j] != 0), None)
                if col is not None:
                    _pivot(t, basis, i, col)
        keep = [i for i in range(len(t)) if basis[i] < d + dm + m]
        t = [t[i] for i in keep]
        basis = [basis[i] for i in keep]

    cost = [sign * x for x in c] + ([-sign * x for x in c] if dm else []) + [Fraction(0)] * (m + n_art)
    entering = _run(t, basis, cost, real)
    z = [Fraction(0)] * ncols
    for i, b in enumerate(basis):
        z[b] = t[i][-1]
    if entering is not None:
        dz = [Fraction(0)] * ncols
        dz[entering] = Fraction(1)
        for i, b in enumerate(basis):
            dz[b] = -t[i][entering]
        ray = tuple(dz[j] - (dz[d + j] if dm else 0) for j in range(d))
        raise UnboundedError(f"objective unbounded ({sense})", direction=ray)
    x = tuple(z[j] - (z[d + j] if dm else 0) for j in range(d))
    return la.dot(c, x), x
