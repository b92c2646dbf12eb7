"""Command-line entry point: ``spinorcheck {verify,relations,eval,enumerate,vertices}``.

Exit codes: 0 when every asserted check passes, 1 when an identity fails,
2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .contractions import enumerate_pair_contractions, parse_slot_spec
from .dsl import ExpressionError, default_symbols, evaluate_expression, format_expression, parse_expression
from .ew import EWParams
from .grassmann import GeneratorPool
from .relations import DegenerateSamplingError, coefficient_map
from .sampling import BOSONIC, FERMIONIC, STATISTICS, sample_random, stream
from .suite import (RELATION_FAMILIES, SUITES, IdentityReport, RelationResult, SuiteConfig,
                    _relation_check, discover, run_identity_suite)
from .tensor import DOWN, UP, ContractionError, ParityError, ShapeError, Species, Tensor, epsilon, metric, slots
from .vertices import TERMS, extract_vertices

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _stats(choice: str) -> tuple[str, ...]:
    return STATISTICS if choice == "both" else (choice,)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _summary(report: IdentityReport):
    for c in report.checks:
        mark = {True: "PASS", False: "FAIL", None: "INFO"}[c.passed]
        print(f"{mark}  {c.name:<40} {c.statistics:<10} {c.max_rel_residual:.3e} (tol {c.tol:g})", file=sys.stderr)


def cmd_verify(args) -> int:
    cfg = SuiteConfig(seed=args.seed, samples=args.samples, statistics=_stats(args.stat), tol=args.tol,
                      suite=args.suite, assume=args.assume)
    report = run_identity_suite(cfg)
    _emit(report.to_json(include_timings=not args.no_timings), args.out)
    if not args.quiet:
        _summary(report)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_relations(args) -> int:
    cfg = SuiteConfig(seed=args.seed, samples=args.samples, statistics=_stats(args.stat), assume=args.assume)
    report = IdentityReport(cfg)
    stats = [BOSONIC] if args.family in ("I", "J", "IJ", "phi4") else list(cfg.statistics)
    for stat in stats:
        try:
            basis = discover(args.family, stat, args.samples, args.seed)
        except DegenerateSamplingError as exc:
            raise UsageError(str(exc)) from exc
        report.relations.append(RelationResult(args.family, stat, basis))
        _relation_check(report, args.family, stat, basis, args.assume or stat)
    _emit(report.to_json(include_timings=False), args.out)
    if not args.quiet:
        _summary(report)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- eval ----------------------------------------------------------------------------


def _read_expressions(source: str) -> list[str]:
    path = Path(source)
    text = path.read_text(encoding="utf-8") if path.is_file() else source
    lines = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise UsageError("no expression given")
    return lines


def _load_bindings(path: str | None) -> dict[str, Tensor]:
    """JSON ``{name: {"slots": "t_ i^", "real": [...], "imag": [...]}}``; bosonic values only."""
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read bindings: {exc}") from exc
    out = {}
    for name, entry in raw.items():
        try:
            data = np.asarray(entry["real"], dtype=float) + 1j * np.asarray(entry.get("imag", 0.0), dtype=float)
            out[name] = Tensor(slots(entry["slots"]), data)
        except (KeyError, TypeError, ValueError, ShapeError) as exc:
            raise UsageError(f"binding {name!r}: {exc}") from exc
    return out


def _fixed_bindings() -> dict[str, Tensor]:
    """Metric and symplectic forms, never sampled."""
    return {
        "g": metric(UP), "gdown": metric(DOWN),
        "eps": epsilon(Species.ISOSPIN, DOWN), "epsup": epsilon(Species.ISOSPIN, UP),
        "epsS": epsilon(Species.SPINOR, DOWN), "epsSup": epsilon(Species.SPINOR, UP),
        "epsD": epsilon(Species.DOTTED, DOWN), "epsDup": epsilon(Species.DOTTED, UP),
    }


def _random_bindings(exprs, table, seed: int, given: dict) -> dict[str, Tensor]:
    """Sample every unbound symbol; conjugate symbols reuse their partner's sample."""
    used = sorted({f.symbol for e in exprs for t in e.terms for f in t.factors})
    pool = GeneratorPool()
    out = {**_fixed_bindings(), **given}
    for k, name in enumerate(used):
        if name in out or (name.endswith("bar") and name[:-3] in used):
            continue
        decl = table[name]
        stat = FERMIONIC if decl.parity == "odd" else BOSONIC
        start = pool.count
        out[name] = sample_random(decl.slots, stat, stream(seed, k, name), pool)
        partner = name + "bar"
        if partner in used and partner not in out:
            if stat == FERMIONIC:
                # independent conjugate generators for the barred sample
                pool.allocate_conjugates(list(range(start, pool.count)), partner)
                out[name] = out[name].with_generators(pool.count)
                out[partner] = out[name].conjugate(pool.involution())
            else:
                out[partner] = out[name].conjugate()
    n = pool.count
    for name, t in list(out.items()):
        out[name] = t.with_generators(n)
    return out


def _json_value(t: Tensor):
    if t.degree:
        coeffs = coefficient_map(t) if not t.rank else None
        if coeffs is None:
            return {"degree": t.degree, "note": "Grassmann-valued tensor; use rank-0 expressions"}
        return {"degree": t.degree, "terms": {str(k): [v.real, v.imag] for k, v in sorted(coeffs.items())}}
    data = np.asarray(t.data)
    return {"real": data.real.tolist(), "imag": data.imag.tolist()}


def cmd_eval(args) -> int:
    table = default_symbols(args.stat)
    sources = _read_expressions(args.expr)
    exprs = [parse_expression(s, table) for s in sources]
    bindings = _random_bindings(exprs, table, args.seed, _load_bindings(args.bind))
    results = []
    for e in exprs:
        value = evaluate_expression(e, bindings, table)
        results.append({"expression": format_expression(e, table), "free": list(e.free), "value": _json_value(value)})
    _emit(json.dumps({"version": __version__, "seed": args.seed, "results": results}, indent=2, sort_keys=True),
          args.out)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    groups, modes = parse_slot_spec(args.slots)
    if args.mode:
        modes = [args.mode] * len(groups)
    for k, scheme in enumerate(enumerate_pair_contractions(groups, modes), 1):
        print(f"{k}: {scheme}")
    return EXIT_OK


def cmd_vertices(args) -> int:
    params = EWParams(q=args.q, theta=args.theta, m=args.m, lam=args.lam)
    try:
        table = extract_vertices(args.term, params, validate=not args.no_validate, seed=args.seed)
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        table.to_csv(args.out)
    else:

        rows = table.rows()
        writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]) if rows else ["legs"])
        writer.writeheader()
        writer.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinorcheck", description="Two-spinor and electroweak identity checker.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, stat_choices=("bosonic", "fermionic", "both")):
        sp.add_argument("--stat", choices=stat_choices, default="both" if "both" in stat_choices else "bosonic")
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out")
        sp.add_argument("--assume", choices=STATISTICS,
                        help="assert the identities of this statistics instead of the sampled one")
        sp.add_argument("--quiet", action="store_true")

    v = sub.add_parser("verify", help="run identity checks and write a JSON report")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--no-timings", action="store_true", help="omit the timings block")
    common(v)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("relations", help="discover linear relations within a family")
    r.add_argument("--family", choices=RELATION_FAMILIES, required=True)
    common(r)
    r.set_defaults(func=cmd_relations)

    e = sub.add_parser("eval", help="evaluate index expressions")
    e.add_argument("--expr", required=True, help="expression text or a file with one expression per line")
    e.add_argument("--bind", help="JSON file with tensor bindings; unbound symbols are sampled")
    e.add_argument("--seed", type=int, default=42)
    e.add_argument("--stat", choices=STATISTICS, default=BOSONIC, help="statistics of the Omega symbols")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    n = sub.add_parser("enumerate", help="list pair-contraction schemes")
    n.add_argument("--slots", required=True, help="groups separated by ';', e.g. \"A,B,C,D;delta-eps:A',B',C',D'\"")
    n.add_argument("--mode", choices=("eps", "delta-eps", "g"))
    n.set_defaults(func=cmd_enumerate)

    x = sub.add_parser("vertices", help="expand a Lagrangian term into a vertex table")
    x.add_argument("--term", choices=TERMS, required=True)
    x.add_argument("--theta", type=float, default=0.5)
    x.add_argument("--q", type=float, default=0.65)
    x.add_argument("--m", type=float, default=1.0)
    x.add_argument("--lambda", dest="lam", type=float, default=0.13)
    x.add_argument("--seed", type=int, default=42)
    x.add_argument("--no-validate", action="store_true")
    x.add_argument("--out")
    x.set_defaults(func=cmd_vertices)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ExpressionError, ContractionError, ShapeError, ParityError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
