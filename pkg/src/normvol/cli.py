"""``normvol`` command line: JSON in, JSON out.

Exit codes: 0 success, 1 a reproduction row failed, 2 invalid input,
3 the optimizer did not converge or the verdict is inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

import jsonschema

from . import hypersurface as hs
from . import ideals, kstab, toric
from . import linalg as la
from .errors import NormVolError, ValidationError
from .minimizer import OptimizerConfig, minimize_hypersurface, minimize_toric

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_UNCONVERGED = 0, 1, 2, 3


def _q(x) -> str:
    return la.fmt(Fraction(x))


def _jsonable(x):
    if isinstance(x, Fraction):
        return la.fmt(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# -- report schemas ---------------------------------------------------------------

_RAT = {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}
_MIN_REPORT = {
    "type": "object",
    "required": ["kind", "arg", "value", "stationarity_residual", "converged", "unique",
                 "rational_candidate", "evidence"],
    "properties": {
        "arg": {"type": "array", "items": {"type": "number"}},
        "value": {"type": "number"},
        "converged": {"type": "boolean"},
        "unique": {"type": "boolean"},
        "rational_candidate": {"oneOf": [
            {"type": "null"},
            {"type": "object", "required": ["vector", "direction", "value"],
             "properties": {"vector": {"type": "array", "items": _RAT},
                            "direction": {"type": "array", "items": {"type": "integer"}},
                            "value": _RAT}}]},
    },
}
REPORT_SCHEMAS = {
    "toric": {"type": "object", "required": ["command", "dim", "generators"],
              "properties": {"log_discrepancy": _RAT, "volume": _RAT,
                             "normalized_volume": _RAT, "minimizer": _MIN_REPORT}},
    "hyper": {"type": "object", "required": ["command", "ambient_dim", "terms"],
              "properties": {"normalized_volume": _RAT, "minimizer": _MIN_REPORT}},
    "ideal": {"type": "object", "required": ["command", "generators", "m_primary", "lct"],
              "properties": {"lct": _RAT,
                             "multiplicity": {"oneOf": [_RAT, {"type": "null"}]}}},
    "kstab": {"type": "object",
              "required": ["command", "verdict", "gap", "canonical_value", "barycenter_check"],
              "properties": {"verdict": {"enum": ["semistable", "unstable", "inconclusive"]},
                             "gap": {"type": "number"}, "canonical_value": _RAT,
                             "minimizer": _MIN_REPORT}},
    "reproduce": {"type": "object", "required": ["command", "rows", "all_pass"],
                  "properties": {"rows": {"type": "array", "items": {
                      "type": "object",
                      "required": ["id", "quantity", "expected", "computed", "pass"]}},
                      "all_pass": {"type": "boolean"}}},
}


# -- input handling ---------------------------------------------------------------

def _load(args, schema):
    if args.input and args.json:
        raise ValidationError("give either --input or --json, not both")
    if args.input:
        try:
            with open(args.input) as fh:
                text = fh.read()
        except OSError as e:
            raise ValidationError(f"cannot read {args.input}: {e.strerror}") from e
    elif args.json:
        text = args.json
    else:
        raise ValidationError("no input: pass --input PATH or --json '...'")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    validator = jsonschema.Draft202012Validator(schema)
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise ValidationError(err.message, pointer)
    return data


def _vector(text, flag):
    try:
        return la.vector(x.strip() for x in text.strip("() ").split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"{flag}: {e}") from e


def _config(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(tolerance=args.tolerance, restarts=args.restarts, seed=args.seed,
                               threads=args.threads, max_iters=args.max_iters)
    except ValueError as e:
        raise ValidationError(str(e)) from e


# -- subcommands ------------------------------------------------------------------

def cmd_toric(args):
    s = toric.toric_from_json(_load(args, toric.TORIC_SCHEMA))
    out = {"command": "toric", "dim": s.dim,
           "generators": [[_q(x) for x in g] for g in s.generators],
           "gorenstein_covector": [_q(x) for x in s.gorenstein_covector]}
    code = EXIT_OK
    if args.xi:
        xi = _vector(args.xi, "--xi")
        if len(xi) != s.dim:
            raise ValidationError(f"--xi has length {len(xi)}, expected {s.dim}")
        out["xi"] = [_q(x) for x in xi]
        out["log_discrepancy"] = _q(toric.log_discrepancy(s, xi))
        out["volume"] = _q(toric.volume(s, xi))
        out["normalized_volume"] = _q(toric.normalized_volume(s, xi))
    if args.minimize:
        rep = minimize_toric(s, _config(args))
        out["minimizer"] = rep.to_json()
        if not rep.converged:
            code = EXIT_UNCONVERGED
    return out, code


def _hyper_input(args):
    if args.family:
        try:
            return hs.family(args.family, args.dim, args.k)
        except ValueError as e:
            raise ValidationError(str(e), "/family") from e
    return hs.hypersurface_from_json(_load(args, hs.HYPER_SCHEMA))


def cmd_hyper(args):
    h = _hyper_input(args)
    out = {"command": "hyper", "ambient_dim": h.ambient_dim, "dim": h.dim,
           "terms": [list(t) for t in h.terms], "family": h.family,
           "nondegenerate": h.nondegenerate}
    code = EXIT_OK
    if args.weight:
        w = _vector(args.weight, "--weight")
        if len(w) != h.ambient_dim:
            raise ValidationError(f"--weight has length {len(w)}, expected {h.ambient_dim}")
        wf, active = hs.weight_of_f(h, w)
        out["weight"] = [_q(x) for x in w]
        out["weight_of_f"] = _q(wf)
        out["initial_form"] = [list(t) for t in active]
        out["log_discrepancy"] = _q(hs.log_discrepancy(h, w))
        out["multiplicity"] = _q(hs.multiplicity(h, w))
        out["normalized_volume"] = _q(hs.normalized_volume(h, w))
        out["degenerate_initial_form"] = hs.initial_form_degenerate(h, w)
        lf, lin, ok = hs.lct_initial_comparison(h, w)
        out["lct"] = {"f": _q(lf), "initial_form": _q(lin), "semicontinuity_ok": ok}
    if args.minimize:
        rep = minimize_hypersurface(h, _config(args))
        out["minimizer"] = rep.to_json()
        if not rep.converged:
            code = EXIT_UNCONVERGED
    return out, code


def cmd_ideal(args):
    data = _load(args, ideals.IDEAL_SCHEMA)
    ideal = ideals.ideal_from_json(data)
    out = {"command": "ideal", "generators": [[_q(x) for x in g] for g in ideal.generators],
           "m_primary": ideal.is_m_primary(), "lct": _q(ideals.lct(ideal))}
    if ideal.is_m_primary():
        out["multiplicity"] = _q(ideals.multiplicity(ideal))
        out["normalized_multiplicity"] = _q(ideals.normalized_multiplicity(ideal))
    else:
        out["multiplicity"] = None
    if args.xi:
        xi = _vector(args.xi, "--xi")
        if args.k is None:
            raise ValidationError("--xi needs --k for the valuative ideal sequence")
        out["convergence"] = _jsonable(ideals.convergence_report(ideal.ambient, xi, args.k))
    return out, EXIT_OK


def cmd_kstab(args):
    d = kstab.kstab_from_json(_load(args, kstab.KSTAB_SCHEMA))
    out = {"command": "kstab", "r": _q(d.r),
           "cone_generators": [[_q(x) for x in g] for g in d.cone.generators],
           "canonical_xi": [_q(x) for x in d.canonical_xi]}
    out.update(kstab.kstab_report(d, _config(args)))
    out["barycenter_check"] = kstab.barycenter_oracle(d.base_rays)
    code = EXIT_UNCONVERGED if out["verdict"] == "inconclusive" else EXIT_OK
    return out, code


def cmd_reproduce(args):
    from .reproduce import REGISTRY, run
    ids = list(REGISTRY) if args.id == "all" else [args.id]
    for i in ids:
        if i not in REGISTRY:
            raise ValidationError(f"unknown example id {i!r}; known: {', '.join(REGISTRY)}, all")
    rows = run(ids, _config(args))
    ok = all(r["pass"] for r in rows)
    return {"command": "reproduce", "rows": rows, "all_pass": ok}, EXIT_OK if ok else EXIT_FAIL


# -- output -----------------------------------------------------------------------

def _pretty(out, indent=0) -> str:
    pad = "  " * indent
    lines = []
    if out.get("command") == "reproduce" and indent == 0:
        lines.append(f"{'id':<18} {'quantity':<18} {'expected':<22} {'computed':<22} result")
        for r in out["rows"]:
            lines.append(f"{r['id']:<18} {r['quantity']:<18} {str(r['expected']):<22} "
                         f"{str(r['computed']):<22} {'pass' if r['pass'] else 'FAIL'}")
            if r.get("note"):
                lines.append(f"    note: {r['note']}")
        return "\n".join(lines)
    for k, v in out.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_pretty(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {json.dumps(v)}")
    return "\n".join(lines)


def emit(out, pretty: bool) -> str:
    return _pretty(out) if pretty else json.dumps(out, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--input", metavar="PATH", help="JSON input file")
    src.add_argument("--json", metavar="TEXT", help="inline JSON input")
    opt = common.add_argument_group("optimizer")
    opt.add_argument("--tolerance", type=float, default=1e-9)
    opt.add_argument("--restarts", type=int, default=16)
    opt.add_argument("--max-iters", type=int, default=2000, help="descent steps per restart")
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--threads", type=int, default=1, help="parallelism hint for restarts")
    common.add_argument("--pretty", action="store_true", help="human-readable output")

    p = argparse.ArgumentParser(prog="normvol",
                                description="Normalized volumes of klt singularities.")
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("toric", parents=[common], help="toric / abelian quotient singularities")
    t.add_argument("--xi", help="valuation as 'p/q,p/q,...'")
    t.add_argument("--minimize", action="store_true")
    h = sub.add_parser("hyper", parents=[common], help="weighted hypersurface singularities")
    h.add_argument("--weight", help="monomial weight as 'p/q,p/q,...'")
    h.add_argument("--minimize", action="store_true")
    h.add_argument("--family", choices=hs.FAMILIES)
    h.add_argument("--dim", type=int)
    h.add_argument("--k", type=int)
    i = sub.add_parser("ideal", parents=[common], help="monomial ideals")
    i.add_argument("--xi", help="valuation for the valuative ideal sequence")
    i.add_argument("--k", type=int, help="largest k in the valuative ideal sequence")
    sub.add_parser("kstab", parents=[common], help="K-semistability of a toric Fano base")
    r = sub.add_parser("reproduce", parents=[common], help="reproduce the shipped examples")
    r.add_argument("id", help="example id, or 'all'")
    return p


COMMANDS = {"toric": cmd_toric, "hyper": cmd_hyper, "ideal": cmd_ideal, "kstab": cmd_kstab,
            "reproduce": cmd_reproduce}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out, code = COMMANDS[args.command](args)
        for w in caught:
            print(f"warning: {w.message}", file=stderr)
    except ValidationError as e:
        print(json.dumps({"error": str(e), "pointer": e.pointer}), file=stderr)
        return EXIT_INVALID
    except NormVolError as e:
        print(json.dumps({"error": str(e), "type": type(e).__name__}), file=stderr)
        return EXIT_INVALID
    print(emit(out, args.pretty), file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
