"""Command-line front end: ``wce {generators,tau,potential,operators,selfcheck}``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field as dc_field

from wce import tausolver as ts
from wce.cache import Cache
from wce.fock import FockElement, GeneratorError, verified_generators, w_generators
from wce.numfield import CycScalar, FieldError, to_float
from wce.rootdata import RootDataError, build_root_datum, parse_type
from wce.selfcheck import run_suites
from wce.twist import OperatorBank, OperatorError, TwistedOperator, operator_cache_lines, w_operator

BUILTIN_TYPES = {("A", 1), ("D", 4)}
STRATEGIES = ("builtin", "kernel_solve", "mode_construction")
REFERENCE_TYPES = {("D", 4)}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    family: str
    rank: int
    strategy: str
    truncation: int | None = None
    mode: str = "frontier"
    goals: list = dc_field(default_factory=list)
    conductor: int | None = None
    cache_dir: str | None = None
    use_cache: bool = True
    fmt: str = "table"
    form: str = "paper"
    verify: bool = False
    strict: bool = False
    reference: bool = True
    quick: bool = False
    log: bool = False
    op_index: int = 1
    op_mode: int = 0
    window: int | None = None

    @property
    def type_name(self):
        return f"{self.family}{self.rank}"


def _default_strategy(family, rank):
    return "builtin" if (family, rank) in BUILTIN_TYPES else "kernel_solve"


def make_config(args) -> RunConfig:
    try:
        family, rank = parse_type(args.type)
    except RootDataError as exc:
        raise UsageError(str(exc)) from None
    strategy = args.strategy or _default_strategy(family, rank)
    if strategy == "builtin" and (family, rank) not in BUILTIN_TYPES:
        raise UsageError(f"no builtin generators for {family}{rank}; use --strategy kernel_solve")
    if strategy == "mode_construction" and (family, rank) != ("D", 4):
        raise UsageError("--strategy mode_construction is only available for D4")
    cfg = RunConfig(command=args.command, family=family, rank=rank, strategy=strategy,
                    conductor=args.conductor, cache_dir=args.cache_dir, use_cache=not args.no_cache,
                    fmt=args.format)
    if args.conductor is not None and args.conductor < 1:
        raise UsageError("--conductor must be positive")
    if cfg.command == "generators":
        cfg.verify = args.verify
        cfg.strict = args.strict
    elif cfg.command == "tau":
        goals = []
        for g in args.goal or []:
            try:
                goals.append(ts.parse_monomial(g))
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            for i, _ in goals[-1]:
                if not 1 <= i <= rank:
                    raise UsageError(f"variable index {i} out of range for {family}{rank}")
        cfg.goals = goals
        cfg.mode = args.mode or ("goal_directed" if goals else "frontier")
        cfg.truncation = args.max_degree_num
        cfg.log = args.log
        if cfg.mode == "frontier" and goals:
            raise UsageError("--goal needs --mode goal_directed")
        if cfg.mode == "goal_directed" and not goals:
            raise UsageError("--mode goal_directed needs at least one --goal")
        if cfg.mode == "frontier" and cfg.truncation is None:
            raise UsageError("frontier mode needs --max-degree-num")
        if cfg.truncation is not None and cfg.truncation < 0:
            raise UsageError("--max-degree-num must be nonnegative")
    elif cfg.command == "potential":
        cfg.form = args.form
        cfg.reference = not args.no_reference
        if cfg.reference and (family, rank) not in REFERENCE_TYPES:
            raise UsageError(f"no reference potential for {family}{rank}; pass --no-reference")
        if cfg.form != "paper" and (family, rank) != ("D", 4):
            raise UsageError(f"--form {cfg.form} is only defined for D4")
    elif cfg.command == "operators":
        cfg.op_index = args.index
        cfg.op_mode = args.m
        if not 1 <= args.index <= rank:
            raise UsageError(f"--index must lie in 1..{rank}")
        if args.m < 0:
            raise UsageError("--m must be nonnegative")
        cfg.window = args.window
        if cfg.window is None or cfg.window < 0:
            raise UsageError("operators needs a nonnegative --window (degree numerator)")
    elif cfg.command == "selfcheck":
        cfg.quick = args.quick
    return cfg


# -- shared steps ---------------------------------------------------------------------------------

def _datum(cfg):
    try:
        return build_root_datum(cfg.family, cfg.rank, cfg.conductor)
    except (RootDataError, FieldError) as exc:
        raise UsageError(f"cannot build {cfg.type_name}: {exc}") from None


def _gen_key(cfg, datum):
    return {"kind": "generators", "type": cfg.type_name, "conductor": datum.conductor, "strategy": cfg.strategy}


def load_generators(cfg, datum, cache):
    key = _gen_key(cfg, datum)
    hit = cache.load(key)
    if hit is not None:
        gens = [FockElement.from_json(g, datum.conductor) for g in hit["generators"]]
        return gens, hit["report"], True
    gens, report = verified_generators(datum, cfg.strategy)
    rep = []
    for e in report:
        e2 = {k: v for k, v in e.items() if k != "discrepancy"}
        e2["residual_terms"] = {str(k): v for k, v in e["residual_terms"].items()}
        if "discrepancy" in e:
            e2["discrepancy"] = {str(k): r.to_json() for k, r in e["discrepancy"].items()}
        rep.append(e2)
    cache.store(key, {"generators": [g.to_json() for g in gens], "report": rep})
    return gens, rep, False


def _fmt_scalar(c: CycScalar) -> str:
    z = to_float(c)
    approx = f"{z.real:.12g}" if abs(z.imag) < 1e-12 else f"{z.real:.12g}{z.imag:+.12g}i"
    return f"{c}  ~ {approx}"


def _emit(cfg, obj, table_lines, out):
    if cfg.fmt == "json":
        out.write(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    else:
        out.write("\n".join(table_lines) + "\n")


# -- commands ---------------------------------------------------------------------------------------

def cmd_generators(cfg, cache, out):
    datum = _datum(cfg)
    try:
        gens, report, _ = load_generators(cfg, datum, cache)
    except GeneratorError as exc:
        out.write(f"generator construction failed: {exc}\n")
        return 1
    status = 0
    replaced = [e for e in report if e.get("replaced_by")]
    if cfg.verify:
        from wce.fock import verify_in_W

        for i, w in enumerate(gens, start=1):
            ok, res = verify_in_W(datum, w)
            if not ok:
                status = 1
                out.write(f"w_{i} FAILS screening: {res}\n")
    if cfg.strict and replaced:
        status = 1
    lines = [f"# {datum.name} strategy={cfg.strategy} conductor={datum.conductor}"]
    for i, (w, e) in enumerate(zip(gens, report), start=1):
        degs = w.degrees()
        tag = "verified" if e["verified"] else f"replaced by {e['replaced_by']} (source residual terms " \
                                              f"{e['residual_terms']})"
        lines.append(f"w_{i}: degree {degs[0] if len(degs) == 1 else degs}, {len(w)} terms, {tag}")
        lines.append(f"  {w!r}")
        if e.get("discrepancy"):
            for k, r in e["discrepancy"].items():
                lines.append(f"  residual of screening {k} on the {cfg.strategy} w_{i}: "
                             f"{FockElement.from_json(r, datum.conductor)!r}")
    obj = {"type": datum.name, "strategy": cfg.strategy, "conductor": datum.conductor,
           "generators": [g.to_json() for g in gens], "report": report}
    _emit(cfg, obj, lines, out)
    return status


def cmd_tau(cfg, cache, out):
    datum = _datum(cfg)
    gens, _, _ = load_generators(cfg, datum, cache)
    key = {"kind": "tau", "type": cfg.type_name, "conductor": datum.conductor, "strategy": cfg.strategy,
           "mode": cfg.mode, "truncation": cfg.truncation,
           "goals": [ts.format_t_monomial(g) for g in cfg.goals]}
    hit = cache.load(key)
    if hit is not None:
        tau = ts.TauSeries.from_json(hit)
    else:
        solver = ts.TauSolver(datum, gens)
        try:
            tau = ts.solve_tau(datum, truncation=cfg.truncation or 0, mode=cfg.mode, targets=cfg.goals,
                               solver=solver)
        except ts.SolverError as exc:
            out.write(f"solver error: {exc}\n")
            return 1
        if cfg.mode == "goal_directed":
            # keep the dependency cone, which is closed under taking divisors for the log
            needed = set()
            for g in cfg.goals:
                needed.update(ts.submultisets(g))
            for m in needed:
                solver.coeff(m)
            tau = ts.TauSeries({m: c for m, c in solver.known.items() if c}, datum.h, tau.truncation,
                               datum.family, datum.rank, datum.exponents, datum.conductor)
        cache.store(key, tau.to_json())
    lines = [f"# tau for {datum.name}, mode {cfg.mode}, truncation {tau.truncation}/{datum.h}"]
    obj = {"tau": tau.to_json()}
    if cfg.mode == "goal_directed":
        F = ts.log_coefficients(tau.__getitem__, cfg.goals)
        goal_rows = []
        for g in cfg.goals:
            row = {"monomial": ts.format_t_monomial(g), "tau": tau[g].serialize(), "log": F[g].serialize()}
            try:
                row["genus"] = ts.genus_of(datum, g)
            except ts.GenusError:
                row["genus"] = None
            goal_rows.append(row)
            lines.append(f"{ts.format_t_monomial(g)}: tau = {_fmt_scalar(tau[g])}; log tau = {_fmt_scalar(F[g])}")
        obj["goals"] = goal_rows
    else:
        for m, c in sorted(tau.coeffs.items(), key=lambda kv: (ts._deg_h(tau, kv[0]), kv[0])):
            lines.append(f"tau {ts.format_t_monomial(m)} = {_fmt_scalar(c)}")
        if cfg.log:
            try:
                F = ts.log_series(datum, tau)
            except ts.GenusError as exc:
                out.write(f"genus rule violated: {exc}\n")
                return 1
            obj["log"] = F.to_json()
            for m, c in sorted(F.coeffs.items(), key=lambda kv: (ts._deg_h(F, kv[0]), kv[0])):
                lines.append(f"log {ts.format_t_monomial(m)} = {_fmt_scalar(c)}  [genus {F.genus[m]}]")
    _emit(cfg, obj, lines, out)
    return 0


FORM_NAMES = {"paper": ["v1", "v2", "v3", "v4"], "dubrovin": ["v1", "v2", "v3", "v4"],
              "fjrw": ["t1", "tX", "tY", "tX2"]}


def _potential_key(cfg, datum):
    return {"kind": "potential", "type": cfg.type_name, "conductor": datum.conductor, "strategy": cfg.strategy}


def compute_potential(cfg, datum, cache):
    key = _potential_key(cfg, datum)
    hit = cache.load(key)
    if hit is not None:
        return {tuple(e): CycScalar.deserialize(v) for e, v in hit}
    gens, _, _ = load_generators(cfg, datum, cache)
    solver = ts.TauSolver(datum, gens)
    pot = ts.frobenius_potential(datum, solver)
    cache.store(key, [[list(e), v.serialize()] for e, v in sorted(pot.items())])
    return pot


def cmd_potential(cfg, cache, out):
    datum = _datum(cfg)
    t0 = time.perf_counter()
    try:
        pot = compute_potential(cfg, datum, cache)
    except ts.SolverError as exc:
        out.write(f"solver error: {exc}\n")
        return 1
    elapsed = time.perf_counter() - t0
    status = 0
    weights = [datum.h + 1 - m for m in datum.exponents]
    wdvv = ts.wdvv_check(pot, datum.rank, datum.conductor)
    qh = ts.is_quasi_homogeneous(pot, weights)
    if not (wdvv and qh):
        status = 1
    diffs = []
    if cfg.reference:
        ref = ts.d4_reference_potential(datum.conductor)
        diffs = ts.compare_potentials(pot, ref)
        if diffs:
            status = 1
    shown = pot
    names = [f"v{k + 1}" for k in range(datum.rank)]
    if cfg.form == "dubrovin":
        shown = ts.dubrovin_form(pot, datum.conductor)
    elif cfg.form == "fjrw":
        shown = ts.fjrw_form(pot, datum.conductor)
        names = FORM_NAMES["fjrw"]
        if cfg.reference:
            fd = ts.compare_potentials(shown, ts.fjrw_reference(datum.conductor))
            if fd:
                status = 1
                diffs += [("fjrw",) + d for d in fd]
    lines = [f"# genus-0 primary potential of {datum.name} ({cfg.form} form), {elapsed:.2f}s"]
    for e in sorted(shown, key=lambda e: (sum(e), e)):
        mono = " ".join(f"{names[k]}" + (f"^{x}" if x > 1 else "") for k, x in enumerate(e) if x)
        lines.append(f"{mono}: {_fmt_scalar(shown[e])}")
    lines.append(f"WDVV: {'true' if wdvv else 'false'}")
    lines.append(f"quasi-homogeneous (weights {weights}): {'true' if qh else 'false'}")
    if cfg.reference:
        lines.append("reference: " + ("exact match" if not diffs else f"MISMATCH at {len(diffs)} monomials"))
        for d in diffs:
            lines.append(f"  {d}")
    obj = {"type": datum.name, "form": cfg.form, "variables": names,
           "potential": [[list(e), shown[e].serialize()] for e in sorted(shown)],
           "wdvv": wdvv, "quasi_homogeneous": qh,
           "reference_match": (not diffs) if cfg.reference else None,
           "differences": [[str(x) for x in d] for d in diffs]}
    _emit(cfg, obj, lines, out)
    return status


def cmd_operators(cfg, cache, out):
    datum = _datum(cfg)
    key = {"kind": "operator", "type": cfg.type_name, "conductor": datum.conductor, "strategy": cfg.strategy,
           "i": cfg.op_index, "m": cfg.op_mode, "window": cfg.window}
    hit = cache.load(key)
    if hit is not None:
        op = TwistedOperator.from_json(hit)
    else:
        gens, _, _ = load_generators(cfg, datum, cache)
        try:
            op = w_operator(datum, gens, cfg.op_index, cfg.op_mode, cfg.window)
        except OperatorError as exc:
            out.write(f"operator error: {exc}\n")
            return 1
        cache.store(key, op.to_json())
    _emit(cfg, op.to_json(), operator_cache_lines(datum, cfg.strategy, op), out)
    return 0


def cmd_selfcheck(cfg, cache, out):
    datum = _datum(cfg)
    gens, report, _ = load_generators(cfg, datum, cache)
    results = run_suites(datum, gens, quick=cfg.quick)
    if cache.rejected:
        out.write(f"rejected {len(cache.rejected)} corrupt cache file(s); recomputed\n")
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.ok]
    lines.append(f"{len(results) - len(failed)}/{len(results)} suites passed")
    obj = {"type": datum.name, "results": [{"name": r.name, "ok": r.ok, "detail": r.detail} for r in results]}
    _emit(cfg, obj, lines, out)
    return 1 if failed else 0


COMMANDS = {"generators": cmd_generators, "tau": cmd_tau, "potential": cmd_potential,
            "operators": cmd_operators, "selfcheck": cmd_selfcheck}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--type", required=True, help="root system, e.g. A1, D4, E6")
    common.add_argument("--strategy", choices=STRATEGIES, help="generator source (default: builtin when available)")
    common.add_argument("--conductor", type=int, help="cyclotomic conductor override")
    common.add_argument("--cache-dir", help="cache directory (default: $WCE_CACHE_DIR or ~/.cache/wce)")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("--format", choices=("table", "json"), default="table")

    p = argparse.ArgumentParser(prog="wce", description="W-constraints of simple singularities, exactly.")
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generators", parents=[common], help="build and verify the W-algebra generators")
    g.add_argument("--verify", action="store_true", help="re-run the screening check on the final generators")
    g.add_argument("--strict", action="store_true", help="fail if any generator had to be replaced")
    t = sub.add_parser("tau", parents=[common], help="solve the constraints for tau")
    t.add_argument("--max-degree-num", type=int, help="truncation degree as a numerator over h")
    t.add_argument("--goal", action="append", help='target monomial such as "(1,0)^2 (4,0)"')
    t.add_argument("--mode", choices=("frontier", "goal_directed"))
    t.add_argument("--log", action="store_true", help="also print log tau with genus tags")
    pot = sub.add_parser("potential", parents=[common], help="genus-0 primary potential")
    pot.add_argument("--form", choices=("paper", "dubrovin", "fjrw"), default="paper")
    pot.add_argument("--no-reference", action="store_true", help="skip the comparison with the stored potential")
    o = sub.add_parser("operators", parents=[common], help="dump the terms of W_{i,m}")
    o.add_argument("--index", "-i", type=int, default=1)
    o.add_argument("--m", type=int, default=0)
    o.add_argument("--window", type=int, help="annihilation degree bound (numerator over h)")
    s = sub.add_parser("selfcheck", parents=[common], help="run the invariant suites")
    s.add_argument("--quick", action="store_true")
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        cache = Cache(cfg.cache_dir, enabled=cfg.use_cache)
        return COMMANDS[cfg.command](cfg, cache, out)
    except UsageError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
