"""Numerical minimization of the normalized volume over monomial valuations.

Toric case: the normalized volume is minimized on the slice ``A(xi) = 1``
of the Reeb cone, where it agrees with ``vol``.  Hypersurface case: the
weight simplex ``sum(w) = 1`` is cut into regions by which terms of ``f``
attain ``w(f)``; the objective is smooth on each region, so every region
gets its own descent and the best converged result wins.

The descent itself is projected gradient (the projection is just the
choice of an orthonormal tangent basis), with central finite differences,
Barzilai-Borwein step lengths and Armijo backtracking.  Steps that leave
the feasible region evaluate to ``inf`` and are backtracked away.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import hypersurface as hs
from . import linalg as la
from .errors import DomainError, InfeasibleError, NotKltError, UnboundedError
from .geometry import Halfspace
from .lp import lp_optimize
from .toric import ToricSingularity


@dataclass(frozen=True)
class OptimizerConfig:
    tolerance: float = 1e-9
    restarts: int = 16
    max_iters: int = 2000
    seed: int = 0
    rationalize_denominator_bound: int = 10 ** 4
    agreement_tolerance: float = 1e-6
    fd_step: float = 1e-6
    threads: int = 1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class RestartResult:
    arg: tuple
    value: float
    residual: float
    converged: bool
    iterations: int
    history: list = field(default_factory=list, repr=False)
    region: int | None = None


@dataclass
class MinimizerReport:
    kind: str
    arg: tuple
    value: float
    stationarity_residual: float
    converged: bool
    rational_candidate: dict | None
    unique: bool
    evidence: dict
    region: tuple | None = None
    degenerate_initial_form: bool = False
    restarts: list = field(default_factory=list, repr=False)
    # exact objective and a rational basis of the tangent space, for probes
    exact_objective: Callable | None = field(default=None, repr=False)
    tangent: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "arg": [float(x) for x in self.arg],
            "value": float(self.value),
            "stationarity_residual": float(self.stationarity_residual),
            "converged": self.converged,
            "unique": self.unique,
            "evidence": self.evidence,
        }
        rc = self.rational_candidate
        if rc is not None:
            out["rational_candidate"] = {
                "vector": [la.fmt(x) for x in rc["vector"]],
                "direction": list(rc["direction"]),
                "value": la.fmt(rc["value"]),
                "exact_stationary": rc["exact_stationary"],
            }
        else:
            out["rational_candidate"] = None
        if self.kind == "hypersurface":
            out["region"] = [list(t) for t in self.region]
            out["degenerate_initial_form"] = self.degenerate_initial_form
        return out


# -- core descent -----------------------------------------------------------------

def _orthonormal(rows) -> np.ndarray:
    """Columns spanning the same space as the given rational rows."""
    if not rows:
        return np.zeros((0, 0))
    a = np.array([[float(x) for x in r] for r in rows]).T
    q, _ = np.linalg.qr(a)
    return q


def _fd_grad(obj, x, fx, Q, h):
    k = Q.shape[1]
    steps = h * Q.T
    vals = obj(np.vstack([x + steps, x - steps]))
    fp, fm = vals[:k], vals[k:]
    g = np.zeros(k)
    both = np.isfinite(fp) & np.isfinite(fm)
    g[both] = (fp[both] - fm[both]) / (2 * h)
    only_p = np.isfinite(fp) & ~both
    g[only_p] = (fp[only_p] - fx) / h
    only_m = np.isfinite(fm) & ~both
    g[only_m] = (fx - fm[only_m]) / h
    return g


def descend(obj, x0, Q, cfg: OptimizerConfig) -> RestartResult:
    """Minimize ``obj`` on the affine space ``x0 + span(Q)`` from ``x0``.

    ``obj`` maps an ``(m, N)`` array of points to ``m`` values, with
    ``inf`` outside the feasible region.
    """
    def f(p):
        return float(obj(p[None, :])[0])

    x = np.array(x0, dtype=float)
    fx = f(x)
    if not np.isfinite(fx):
        raise DomainError("starting point is outside the feasible region")
    history = [fx]
    if Q.shape[1] == 0:
        return RestartResult(tuple(float(v) for v in x), fx, 0.0, True, 0, history)

    def residual(g):
        return float(np.linalg.norm(g) * np.linalg.norm(x) / abs(fx))

    g = _fd_grad(obj, x, fx, Q, cfg.fd_step)
    alpha = 0.1 * np.linalg.norm(x) / max(np.linalg.norm(g), 1e-300)
    res = residual(g)
    it = stalls = 0
    while it < cfg.max_iters and res > cfg.tolerance:
        it += 1
        gg = float(g @ g)
        step = alpha
        accepted = False
        for _ in range(60):
            xn = x - step * (Q @ g)
            fn = f(xn)
            if np.isfinite(fn):
                drop = 1e-4 * step * gg
                if fn <= fx - drop or (drop < 1e-15 * abs(fx) and fn <= fx):
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
        # pressed against the boundary of the region: steps no longer pay off
        stalls = stalls + 1 if fx - fn <= 1e-14 * abs(fx) else 0
        gn = _fd_grad(obj, xn, fn, Q, cfg.fd_step)
        s = -step * g
        y = gn - g
        sy = float(s @ y)
        alpha = float(s @ s) / sy if sy > 0 else 2 * step
        x, fx, g = xn, fn, gn
        history.append(fx)
        res = residual(g)
        if stalls >= 10:
            break
    return RestartResult(tuple(float(v) for v in x), float(fx), res, res <= cfg.tolerance, it,
                         history)


def _run_all(tasks, cfg):
    if cfg.threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(lambda t: t(), tasks))
    return [t() for t in tasks]


def _rationalize(x, bound):
    return tuple(Fraction(float(v)).limit_denominator(bound) for v in x)


def _max_pairwise(points) -> float:
    pts = np.array(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.max(np.linalg.norm(d, axis=2)))


def _pick(results, cfg):
    """Best converged restart; ties within tolerance go to the lexicographically smallest arg."""
    pool = [r for r in results if r.converged] or list(results)
    best = min(r.value for r in pool)
    close = [r for r in pool if r.value <= best + cfg.agreement_tolerance * max(1.0, abs(best))]
    return min(close, key=lambda r: r.arg), close, pool


# -- toric ------------------------------------------------------------------------

def minimize_on_slice(obj, exact_obj, u, generators, cfg: OptimizerConfig | None = None,
                      exact_grad=None, kind: str = "toric") -> MinimizerReport:
    """Minimize a scale-invariant objective on ``{<u, x> = 1}``.

    Starting points are Dirichlet-random convex combinations of
    ``generators`` (each assumed to pair to 1 with ``u``).  ``exact_obj``
    evaluates at rational points and returns None outside the domain.
    """
    cfg = cfg or OptimizerConfig()
    u = la.vector(u)
    tangent = la.nullspace([u])
    Q = _orthonormal(tangent)
    gens = np.array([[float(x) for x in g] for g in generators])
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

    def task(seq):
        rng = np.random.default_rng(seq)
        x0 = rng.dirichlet(np.ones(len(gens))) @ gens
        return lambda: descend(obj, x0, Q, cfg)

    results = _run_all([task(s) for s in seeds], cfg)
    best, close, pool = _pick(results, cfg)
    spread = _max_pairwise([r.arg for r in pool])
    unique = all(r.converged for r in results) and spread <= cfg.agreement_tolerance

    rational = None
    xq = _rationalize(best.arg, cfg.rationalize_denominator_bound)
    a = la.dot(u, xq)
    if a > 0:
        xq = la.scale(1 / a, xq)
        val = exact_obj(xq)
        if val is not None and float(val) <= best.value + cfg.tolerance * max(1.0, abs(best.value)):
            stationary = None
            if exact_grad is not None:
                g = exact_grad(xq)
                stationary = all(la.dot(g, t) == 0 for t in tangent)
            rational = {"vector": xq, "direction": la.primitive(xq), "value": val,
                        "exact_stationary": stationary}
    evidence = {
        "restarts": len(results),
        "converged_restarts": sum(r.converged for r in results),
        "max_pairwise_distance": spread,
        "note": "uniqueness is evidenced only within the searched class of valuations",
    }
    return MinimizerReport(kind, best.arg, best.value, best.residual, best.converged, rational,
                           unique, evidence, restarts=results, exact_objective=exact_obj,
                           tangent=tangent)


def minimize_toric(s: ToricSingularity, cfg: OptimizerConfig | None = None) -> MinimizerReport:
    n = s.dim
    u = s.gorenstein_covector
    uf = np.array([float(x) for x in u])

    dets, ws = s._float_tables

    def obj(X):
        a = X @ uf
        pair = ws @ X.T  # (cells, n, points)
        ok = np.all(pair > 0, axis=(0, 1)) & (a > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            vol = np.sum(dets[:, None] / np.prod(pair, axis=1), axis=0)
        return np.where(ok, vol * a ** n, np.inf)

    def exact(xi):
        try:
            s.check_interior(xi)
        except DomainError:
            return None
        return la.dot(u, xi) ** n * s.volume_fast(xi)

    return minimize_on_slice(obj, exact, u, s.generators, cfg,
                             exact_grad=s.volume_gradient_exact)


# -- hypersurfaces ----------------------------------------------------------------

_SCOUTS = 3
_SCOUT_MARGIN = 1e-2


@dataclass(frozen=True)
class Region:
    active: tuple          # indices of the terms attaining w(f)
    center: tuple          # rational point in the relative interior
    margin: Fraction       # how far the center is from every strict inequality
    directions: tuple      # rational basis of the region's tangent space
    strict: tuple          # rows that must pair positively with the weight


def _region(h: hs.WeightedHypersurface, active: Sequence[int]) -> Region | None:
    """Relative interior of the region where exactly ``active`` terms attain ``w(f)``."""
    N = h.ambient_dim
    t0 = h.terms[active[0]]
    ones = (Fraction(1),) * N
    eqs = [ones] + [la.sub(h.terms[t], t0) for t in active[1:]]
    strict = [la.vector(e) for e in la.identity(N)]
    strict += [la.sub(h.terms[s], t0) for s in range(len(h.terms)) if s not in active]
    strict.append(la.sub(ones, t0))  # log discrepancy > 0
    # homogeneous in w, so the origin is feasible and no phase one is needed:
    # maximize eps with strict rows >= eps and the ties as equalities
    cons = [Halfspace(tuple(-x for x in row) + (Fraction(1),), 0) for row in strict]
    cons.append(Halfspace((Fraction(0),) * N + (Fraction(1),), 1))
    for row in eqs[1:]:
        cons.append(Halfspace(tuple(row) + (Fraction(0),), 0))
        cons.append(Halfspace(tuple(-x for x in row) + (Fraction(0),), 0))
    try:
        eps, pt = lp_optimize((0,) * N + (1,), cons, nonnegative=True)
    except (InfeasibleError, UnboundedError):
        return None
    if eps <= 0:
        return None
    w = pt[:N]
    total = sum(w)
    pt = la.scale(1 / total, w)
    eps /= total
    return Region(tuple(active), pt[:N], eps, tuple(la.nullspace(eqs)), tuple(strict))


def _region_objective(h: hs.WeightedHypersurface, reg: Region):
    n = h.dim
    terms = np.array(h.terms, dtype=float)
    act = terms[list(reg.active)]
    rest = np.delete(terms, list(reg.active), axis=0)

    def obj(W):
        wf = (W @ act.T).mean(axis=1)
        ok = (W > 0).all(axis=1)
        if rest.size:
            ok &= (W @ rest.T > wf[:, None]).all(axis=1)
        a = W.sum(axis=1) - wf
        ok &= a > 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = a ** n * wf / W.prod(axis=1)
        return np.where(ok, val, np.inf)
    return obj


def _region_gradient_zero(h, reg: Region, w) -> bool:
    n = h.dim
    alpha = h.terms[reg.active[0]]
    wf = la.dot(alpha, w)
    a = sum(w) - wf
    grad = [n * (1 - al) / a + al / wf - 1 / wi for al, wi in zip(alpha, w)]
    return all(la.dot(grad, d) == 0 for d in reg.directions)


def _exact_hyper(h):
    def f(w):
        if any(x <= 0 for x in w):
            return None
        try:
            return hs.normalized_volume(h, w)
        except NotKltError:
            return None
    return f


def enumerate_regions(h: hs.WeightedHypersurface) -> list[Region]:
    m = len(h.terms)
    out = []
    for size in range(1, m + 1):
        for active in combinations(range(m), size):
            reg = _region(h, active)
            if reg is not None:
                out.append(reg)
    return out


def _region_starts(reg: Region, Q, rng, count):
    """The center plus random points found by ratio tests along random tangent directions."""
    c = np.array([float(x) for x in reg.center])
    S = np.array([[float(x) for x in row] for row in reg.strict])
    slack = S @ c
    starts = [c]
    while len(starts) < count:
        if Q.shape[1] == 0:
            starts.append(c)
            continue
        d = Q @ rng.standard_normal(Q.shape[1])
        rate = S @ d
        neg = rate < 0
        reach = float(np.min(slack[neg] / -rate[neg])) if neg.any() else 1.0
        starts.append(c + rng.uniform(0.05, 0.95) * reach * d)
    return starts


def minimize_hypersurface(h: hs.WeightedHypersurface,
                          cfg: OptimizerConfig | None = None) -> MinimizerReport:
    cfg = cfg or OptimizerConfig()
    hs.multiplicity(h, (1,) * h.ambient_dim)  # refuses early when nondegeneracy is unknown
    regions = enumerate_regions(h)
    if not regions:
        raise NotKltError("no weight has positive log discrepancy")
    setups = []
    for reg, seq in zip(regions, np.random.SeedSequence(cfg.seed).spawn(len(regions))):
        Q = _orthonormal(list(reg.directions))
        if Q.size == 0:
            Q = np.zeros((h.ambient_dim, 0))
        obj = _region_objective(h, reg)
        count = cfg.restarts if Q.shape[1] else 1
        starts = _region_starts(reg, Q, np.random.default_rng(seq), count)
        setups.append((obj, Q, starts))

    def run(pairs):
        tasks = [lambda i=i, x0=x0: descend(setups[i][0], x0, setups[i][1], cfg)
                 for i, x0 in pairs]
        out = _run_all(tasks, cfg)
        for r, (i, _) in zip(out, pairs):
            r.region = i
        return out

    # a few starts everywhere, then the full budget in the competitive regions
    first = min(cfg.restarts, _SCOUTS)
    results = run([(i, x0) for i, (_, _, st) in enumerate(setups) for x0 in st[:first]])
    best, _, _ = _pick(results, cfg)
    keen = sorted({r.region for r in results
                   if r.converged and r.value <= best.value * (1 + _SCOUT_MARGIN)})
    results += run([(i, x0) for i in keen for x0 in setups[i][2][first:]])
    best, close, pool = _pick(results, cfg)
    reg = regions[best.region]
    winners = [r for r in pool if r.value <= best.value + cfg.agreement_tolerance * max(1.0, abs(best.value))]
    spread = _max_pairwise([r.arg for r in winners])
    unique = best.converged and spread <= cfg.agreement_tolerance

    exact = _exact_hyper(h)
    ones = (Fraction(1),) * h.ambient_dim
    rational = None
    wq = _rationalize(best.arg, cfg.rationalize_denominator_bound)
    if all(x > 0 for x in wq):
        wq = la.scale(1 / sum(wq), wq)
        val = exact(wq)
        active = set(hs.weight_of_f(h, wq)[1])
        same = active == {h.terms[i] for i in reg.active}
        if val is not None and float(val) <= best.value + cfg.tolerance * max(1.0, abs(best.value)):
            rational = {"vector": wq, "direction": la.primitive(wq), "value": val,
                        "exact_stationary": same and _region_gradient_zero(h, reg, wq)}
    degenerate = hs.initial_form_degenerate(
        h, rational["vector"] if rational else [Fraction(x) for x in reg.center])
    evidence = {
        "regions": len(regions),
        "restarts": len(results),
        "converged_restarts": sum(r.converged for r in results),
        "agreeing_restarts": len(winners),
        "max_pairwise_distance": spread,
        "note": "uniqueness is evidenced only among monomial weights; global minimality over "
                "all valuations is not certified",
    }
    return MinimizerReport("hypersurface", best.arg, best.value, best.residual, best.converged,
                           rational, unique, evidence,
                           region=tuple(h.terms[i] for i in reg.active),
                           degenerate_initial_form=degenerate, restarts=results,
                           exact_objective=exact, tangent=la.nullspace([ones]))


# -- certificates -----------------------------------------------------------------

def uniqueness_certificate(report: MinimizerReport, probes: int = 5, seed: int = 0):
    """Restart agreement plus exact midpoint convexity probes around the candidate.

    Returns ``(ok, evidence)``.  Each probe picks a random rational tangent
    direction ``d`` and checks ``f(c) < (f(c + d) + f(c - d)) / 2`` exactly.
    """
    evidence = {"restarts_agree": report.unique, "probes": []}
    if report.exact_objective is None:
        return False, evidence
    if report.rational_candidate is not None:
        c = report.rational_candidate["vector"]
    else:
        c = _rationalize(report.arg, 10 ** 6)
    f = report.exact_objective
    fc = f(c)
    if fc is None:
        return False, evidence
    rng = np.random.default_rng(seed)
    size = max(abs(x) for x in c)
    ok = report.unique and bool(report.tangent)
    for _ in range(probes):
        if not report.tangent:
            break
        while True:
            coeffs = [int(k) for k in rng.integers(-3, 4, len(report.tangent))]
            if any(coeffs):
                break
        d = (Fraction(0),) * len(c)
        for k, t in zip(coeffs, report.tangent):
            d = la.add(d, la.scale(k, t))
        d = la.scale(size / (100 * max(abs(x) for x in d)), d)
        for _ in range(40):
            fp, fm = f(la.add(c, d)), f(la.sub(c, d))
            if fp is not None and fm is not None:
                break
            d = la.scale(Fraction(1, 2), d)
        else:
            ok = False
            continue
        strict = fc < (fp + fm) / 2
        ok = ok and strict
        evidence["probes"].append({"direction": [la.fmt(x) for x in d],
                                   "center": la.fmt(fc), "midpoint_average": la.fmt((fp + fm) / 2),
                                   "strict": strict})
    return ok, evidence
