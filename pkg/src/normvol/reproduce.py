"""Compiled-in registry of worked examples with golden values."""

from __future__ import annotations

from fractions import Fraction

from . import hypersurface as hs
from . import kstab, toric
from . import linalg as la
from .minimizer import OptimizerConfig, minimize_hypersurface, minimize_toric


def _row(id_, quantity, expected, computed, ok=None, note=None):
    if ok is None:
        ok = expected == computed
    row = {"id": id_, "quantity": quantity, "expected": expected, "computed": computed,
           "pass": bool(ok)}
    if note:
        row["note"] = note
    return row


def _candidate(rep):
    rc = rep.rational_candidate
    if rc is None:
        return None, repr(rep.value)
    return list(rc["direction"]), la.fmt(rc["value"])


def _quotient(id_, r, a):
    def run(cfg):
        n = len(a)
        rep = minimize_toric(toric.from_cyclic_quotient(r, a), cfg)
        direction, value = _candidate(rep)
        return [_row(id_, "normalized_volume", la.fmt(Fraction(n ** n, r)), value),
                _row(id_, "converged", True, rep.converged)]
    return run


def _hyper(id_, h, weight, value, note=None):
    def run(cfg):
        rep = minimize_hypersurface(h, cfg)
        direction, computed = _candidate(rep)
        rows = [_row(id_, "weight", list(weight), direction),
                _row(id_, "normalized_volume", value, computed),
                _row(id_, "converged", True, rep.converged)]
        if note:
            rows[-1]["note"] = note
        return rows
    return run


def _e7_dim2(cfg):
    rows = _hyper("E7-dim2", hs.e_family("E7", 2), (9, 4, 6), "1/12")(cfg)
    # the binary octahedral group has order 48; check n^n/|G| on the cyclic group of that order
    rep = minimize_toric(toric.from_cyclic_quotient(48, [1, 47]), cfg)
    rows.append(_row("E7-dim2", "toric 4/48 check", "1/12", _candidate(rep)[1],
                     note="C^2/E7 is a non-abelian quotient, so it is checked only through the "
                          "hypersurface closed form; the toric module confirms n^n/|G| for the "
                          "cyclic group of the same order 48"))
    return rows


def _cone(id_, rays, verdict, value, gap_check):
    def run(cfg):
        d = kstab.build_cone_over_fano(rays, 1)
        res = kstab.canonical_is_minimizer(d, cfg)
        gap = res["gap"]
        return [_row(id_, "verdict", verdict, res["verdict"]),
                _row(id_, "canonical_value", value, la.fmt(res["canonical_value"])),
                _row(id_, "gap", gap_check[0], repr(gap), ok=gap_check[1](gap)),
                _row(id_, "barycenter_oracle", verdict == "semistable",
                     kstab.barycenter_oracle(rays))]
    return run


REGISTRY = {
    "quotient-1/2-11": _quotient("quotient-1/2-11", 2, [1, 1]),
    "quotient-1/3-11": _quotient("quotient-1/3-11", 3, [1, 1]),
    "quotient-1/3-12": _quotient("quotient-1/3-12", 3, [1, 2]),
    "quotient-1/5-12": _quotient("quotient-1/5-12", 5, [1, 2]),
    "A_k-n3-k5": _hyper("A_k-n3-k5", hs.a_family(3, 5), (2, 2, 2, 1), "27/2"),
    "A_k-n4-k4": _hyper("A_k-n4-k4", hs.a_family(4, 4), (3, 3, 3, 3, 2), "4096/27"),
    "E7-dim2": _e7_dim2,
    "E7-dim3": _hyper("E7-dim3", hs.e_family("E7", 3), (9, 9, 4, 6), "250/27"),
    "E7-dim4": _hyper("E7-dim4", hs.e_family("E7", 4), (9, 9, 9, 5, 6), "32000/243"),
    "E7-dim5": _hyper("E7-dim5", hs.e_family("E7", 5), (3, 3, 3, 3, 2, 2), "50000/27"),
    "E7-dim6": _hyper("E7-dim6", hs.e_family("E7", 6), (4, 4, 4, 4, 4, 3, 3), "59049/2"),
    "E7-dim7": _hyper("E7-dim7", hs.e_family("E7", 7), (5, 5, 5, 5, 5, 5, 4, 4),
                      la.fmt(Fraction(28) ** 7 / 25000)),
    "P2-cone": _cone("P2-cone", [(1, 0), (0, 1), (-1, -1)], "semistable", "9",
                     ("|gap| <= 1e-8", lambda g: abs(g) <= 1e-8)),
    "BlP2-cone": _cone("BlP2-cone", [(1, 0), (1, 1), (0, 1), (-1, -1)], "unstable", "8",
                       ("gap > 1e-3", lambda g: g > 1e-3)),
}


def run(ids, cfg: OptimizerConfig | None = None) -> list[dict]:
    cfg = cfg or OptimizerConfig()
    rows = []
    for i in ids:
        rows.extend(REGISTRY[i](cfg))
    return rows
