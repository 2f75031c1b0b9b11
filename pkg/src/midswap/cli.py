"""Command-line front end.

Subcommands: herald, sweep, distill, range, verify, bound.  Tables go to
stdout as CSV (or JSON); diagnostics go to stderr.  Exit codes: 0 success,
1 quantitative failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.stats import qmc

from .distill import RATE_CONVENTION, pump, pumped_max_range, pumped_rate
from .fock_oracle import oracle_herald
from .herald import Encoding, LinkParams, NoHeraldError, ParameterError, herald
from .metrics import evaluate, repeaterless_bound
from .optimize import (
    GammaPolicy,
    InfeasibleError,
    NoRootError,
    db_to_eta,
    default_distillation_gamma,
    eta_lim,
    eta_to_db,
    max_range,
    optimize_gamma,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
VERIFY_TOL = 1e-10

DEFAULTS = dict(
    encoding="single",
    eta_d=1.0,
    pd=0.0,
    vis=1.0,
    eps=0.0,
    parity=0,
    rounds=0,
    engine="exact",
    grid=200,
    seed=0,
    jobs=1,
    points=21,
    scale="linear",
    axis="total_eta_db",
)
LOSS_KEYS = ("eta", "eta_db", "eta_half_db")
GAMMA_KEYS = ("gamma", "gamma_opt", "target_fidelity")
SWEEP_AXES = ("total_eta_db", "half_eta_db", "p_d", "vis", "eps", "gamma")
METRIC_COLUMNS = ("p_succ", "fidelity", "hashing", "rate", "d2")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    return "%.12g" % x


def json_safe(x):
    """NaN becomes null and infinities become strings so the output is strict JSON."""
    if isinstance(x, dict):
        return {k: json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_safe(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _add_point_flags(p, loss=True):
    p.add_argument("--encoding", choices=[e.value for e in Encoding], default=None)
    if loss:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--eta", type=float, help="total transmissivity")
        g.add_argument("--eta-db", type=float, help="total loss in dB")
        g.add_argument("--eta-half-db", type=float, help="half-channel loss in dB")
    p.add_argument("--eta-d", type=float, help="detector efficiency")
    p.add_argument("--pd", type=float, help="excess noise per detector")
    p.add_argument("--vis", type=float, help="visibility |V|")
    p.add_argument("--eps", type=float, help="carrier phase variance per side")
    p.add_argument("--parity", type=int, choices=[0, 1])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, help="fixed single-rail gamma")
    g.add_argument("--gamma-opt", choices=["rate", "hashing", "fidelity"], help="optimize gamma")
    g.add_argument("--target-fidelity", type=float, help="maximize rate subject to F >= target")


def _add_common(p):
    p.add_argument("--format", choices=["csv", "json", "text"], default=None)
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--jobs", type=int, help="worker processes for grids")


def _add_axis_flags(p, axis=True):
    if axis:
        p.add_argument("--axis", choices=SWEEP_AXES)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--scale", choices=["linear", "log", "db"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="midswap", description="Heralded memory-memory entanglement via photonic swaps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("herald", help="state and figures of merit at one point")
    _add_point_flags(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="figures of merit along one parameter axis")
    _add_point_flags(p)
    _add_axis_flags(p)
    p.add_argument("--outputs", help="comma list from " + ",".join(METRIC_COLUMNS))
    _add_common(p)

    p = sub.add_parser("distill", help="per-round pumping results along the loss axis")
    _add_point_flags(p, loss=False)
    _add_axis_flags(p, axis=False)
    p.add_argument("--rounds", type=int)
    p.add_argument("--engine", choices=["exact", "map"])
    _add_common(p)

    p = sub.add_parser("range", help="maximum range and eta_lim")
    _add_point_flags(p, loss=False)
    p.add_argument("--rounds", type=int, help="also report the range after this many rounds")
    p.add_argument("--engine", choices=["exact", "map"])
    p.add_argument("--pd-list", type=_float_list, help="grid of P_d values for eta_lim contours")
    p.add_argument("--vis-list", type=_float_list, help="grid of |V| values for eta_lim contours")
    _add_common(p)

    p = sub.add_parser("verify", help="analytic states against the Fock-space oracle")
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    _add_common(p)

    p = sub.add_parser("bound", help="repeaterless bound")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eta", type=float)
    g.add_argument("--eta-db", type=float)
    g.add_argument("--eta-half-db", type=float)
    _add_axis_flags(p, axis=False)
    _add_common(p)
    return parser


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def apply_config(args, parser_for_command) -> None:
    """Fill flags not given on the command line from ``args.config``."""
    if not getattr(args, "config", None):
        return
    actions = {a.dest: a for a in parser_for_command._actions}
    cfg = read_config(args.config)
    for group in (LOSS_KEYS, GAMMA_KEYS):
        if any(getattr(args, k, None) is not None for k in group):
            for k in group:
                cfg.pop(k, None)
        elif sum(k in cfg for k in group) > 1:
            raise UsageError(f"config sets more than one of {group}")
    for key, raw in cfg.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is not None:
            continue
        action = actions[key]
        try:
            value = action.type(raw) if action.type else raw
        except ValueError as exc:
            raise UsageError(f"config {key}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config {key}: {value!r} not in {list(action.choices)}")
        setattr(args, key, value)


def resolve_defaults(args) -> None:
    for k, v in DEFAULTS.items():
        if getattr(args, k, "absent") is None:
            setattr(args, k, v)


def loss_eta(args, required=True):
    if getattr(args, "eta", None) is not None:
        return args.eta
    if getattr(args, "eta_db", None) is not None:
        return db_to_eta(args.eta_db)
    if getattr(args, "eta_half_db", None) is not None:
        return db_to_eta(2 * args.eta_half_db)
    if required:
        raise UsageError("one of --eta, --eta-db, --eta-half-db is required")
    return None


def base_params(args, eta=1.0) -> LinkParams:
    return LinkParams.symmetric(
        eta,
        gamma=args.gamma if getattr(args, "gamma", None) is not None else 0.5,
        eta_d=args.eta_d,
        p_d=args.pd,
        vis=args.vis,
        eps=args.eps,
        encoding=args.encoding,
        parity=args.parity,
    )


def gamma_policy(args):
    if getattr(args, "target_fidelity", None) is not None:
        return GammaPolicy.target_fidelity(args.target_fidelity)
    if getattr(args, "gamma_opt", None):
        return GammaPolicy(args.gamma_opt)
    return None


def evaluate_point(params: LinkParams, policy):
    """Metrics at one point, optimizing gamma when a policy is given."""
    gamma = None
    if policy is not None and params.encoding is Encoding.SINGLE_RAIL:
        gamma, m = optimize_gamma(params, policy)
    else:
        m = evaluate(herald(params), params.eta_total, params.parity)
    return gamma, m


def _loss_columns(eta):
    db = eta_to_db(eta)
    return {"eta_total": eta, "eta_total_db": db, "eta_half_db": db / 2}


def _nan_metrics():
    return {k: math.nan for k in METRIC_COLUMNS}


def _sweep_row(job):
    axis, value, params, policy = job
    row = {axis: value, **_loss_columns(params.eta_total)}
    warn = None
    try:
        gamma, m = evaluate_point(params, policy)
        row["gamma"] = gamma if gamma is not None else (params.gamma_a if params.encoding is Encoding.SINGLE_RAIL else math.nan)
        row.update(p_succ=m.p_succ, fidelity=m.fidelity, hashing=m.hashing, rate=m.rate, d2=m.d2_bound)
    except (InfeasibleError, NoHeraldError) as exc:
        row["gamma"] = math.nan
        row.update(_nan_metrics())
        row["d2"] = repeaterless_bound(params.eta_total)
        warn = f"{axis}={fmt(value)}: {exc}"
    return row, warn


def _parallel_map(fn, jobs, n_jobs):
    if n_jobs and n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def axis_values(start, stop, points, scale):
    if points is None or points < 2:
        raise UsageError("--points must be at least 2")
    if start is None or stop is None:
        raise UsageError("--start and --stop are required")
    if scale == "linear":
        return list(np.linspace(start, stop, points))
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise UsageError("log scale needs positive bounds")
        return list(np.geomspace(start, stop, points))
    # bounds given in dB of the (transmissivity-like) parameter
    return [db_to_eta(x) for x in np.linspace(start, stop, points)]


def _point_on_axis(base: LinkParams, axis, value, eta):
    if axis == "total_eta_db":
        return base.with_eta(db_to_eta(value))
    if axis == "half_eta_db":
        return base.with_eta(db_to_eta(2 * value))
    p = base.with_eta(eta)
    if axis == "p_d":
        return p.replace(p_d=value)
    if axis == "vis":
        return p.replace(vis=value)
    if axis == "eps":
        return p.replace(eps=value)
    return p.with_gamma(value)


def emit_table(rows, columns, fmt_name, out):
    if fmt_name == "json":
        json.dump(json_safe([{c: r.get(c, math.nan) for c in columns} for r in rows]), out, indent=1, allow_nan=False)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c, math.nan)) for c in columns])


def cmd_herald(args, out, err):
    eta = loss_eta(args)
    params = base_params(args, eta)
    policy = gamma_policy(args)
    gamma, m = evaluate_point(params, policy)
    if gamma is not None:
        params = params.with_gamma(gamma)
    state = herald(params).state.matrix
    record = dict(
        encoding=params.encoding.value,
        parity=params.parity,
        gamma=params.gamma_a if params.encoding is Encoding.SINGLE_RAIL else None,
        **_loss_columns(eta),
        p_succ=m.p_succ,
        fidelity=m.fidelity,
        hashing=m.hashing,
        rate=m.rate,
        d2=m.d2_bound,
    )
    if args.format == "json":
        record["state_real"] = state.real.tolist()
        record["state_imag"] = state.imag.tolist()
        json.dump(json_safe(record), out, indent=1, allow_nan=False)
        out.write("\n")
    elif args.format == "csv":
        emit_table([record], list(record), "csv", out)
    else:
        for k, v in record.items():
            out.write(f"{k:>13} {fmt(v) if not isinstance(v, str) else v}\n")
        out.write("state (real)\n")
        out.write(np.array2string(state.real, precision=6, suppress_small=True) + "\n")
        if np.abs(state.imag).max() > 0:
            out.write("state (imag)\n")
            out.write(np.array2string(state.imag, precision=6, suppress_small=True) + "\n")
    return EXIT_OK


def cmd_sweep(args, out, err):
    axis = args.axis
    policy = gamma_policy(args)
    eta = loss_eta(args, required=axis not in ("total_eta_db", "half_eta_db"))
    values = axis_values(args.start, args.stop, args.points, args.scale)
    base = base_params(args, eta if eta is not None else 1.0)
    try:
        jobs = [(axis, v, _point_on_axis(base, axis, v, eta), policy) for v in values]
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    results = _parallel_map(_sweep_row, jobs, args.jobs)
    for _, warn in results:
        if warn:
            err.write(f"warning: infeasible point, {warn}\n")
    outputs = _float_free_list(args.outputs) if args.outputs else list(METRIC_COLUMNS)
    bad = [o for o in outputs if o not in METRIC_COLUMNS]
    if bad:
        raise UsageError(f"unknown outputs {bad}")
    columns = ["eta_total", "eta_total_db", "eta_half_db"]
    if axis not in columns and axis != "half_eta_db":
        columns.insert(0, axis)
    if args.encoding == "single":
        columns.append("gamma")
    columns += outputs
    emit_table([r for r, _ in results], columns, args.format or "csv", out)
    return EXIT_OK


def _float_free_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _distill_rows(job):
    params, policy, rounds, engine = job
    rows = []
    base = _loss_columns(params.eta_total)
    try:
        gamma, _ = evaluate_point(params, policy)
        if gamma is not None:
            params = params.with_gamma(gamma)
        outcome = herald(params)
        sched = pump(outcome, rounds, engine, params.parity)
    except (InfeasibleError, NoHeraldError, ArithmeticError) as exc:
        return [dict(base, round=k, **_nan_metrics()) for k in range(rounds + 1)], str(exc)
    states = [sched.initial.state] + [r.output_state for r in sched.per_round]
    probs = [r.p_round for r in sched.per_round]
    for k, state in enumerate(states):
        m = evaluate(type(outcome)(state, outcome.p_succ), params.eta_total, 0)
        rows.append(
            dict(
                base,
                round=k,
                gamma=params.gamma_a if params.encoding is Encoding.SINGLE_RAIL else math.nan,
                p_round=probs[k - 1] if k else 1.0,
                fidelity=m.fidelity,
                hashing=m.hashing,
                rate=pumped_rate(m.hashing, outcome.p_succ, probs[:k]),
                d2=m.d2_bound,
                approximate=int(sched.approximate),
            )
        )
    return rows, None


def cmd_distill(args, out, err):
    if not 0 <= args.rounds <= 15:
        raise UsageError("--rounds must lie in [0, 15]")
    policy = gamma_policy(args)
    base = base_params(args)
    if base.encoding is Encoding.SINGLE_RAIL and policy is None and args.gamma is None:
        base = base.with_gamma(default_distillation_gamma())
    values = axis_values(args.start, args.stop, args.points, args.scale)
    etas = values if args.scale == "db" else [db_to_eta(v) for v in values]
    jobs = [(base.with_eta(e), policy, args.rounds, args.engine) for e in etas]
    results = _parallel_map(_distill_rows, jobs, args.jobs)
    rows = []
    for r, warn in results:
        if warn:
            err.write(f"warning: {warn}\n")
        rows.extend(r)
    columns = ["eta_total", "eta_total_db", "eta_half_db", "round", "gamma", "p_round", "fidelity", "hashing", "rate", "d2", "approximate"]
    emit_table(rows, columns, args.format or "csv", out)
    if args.engine == "map":
        err.write("note: map engine projects onto the Bell-diagonal part; results are approximate\n")
    err.write(f"rate convention: {RATE_CONVENTION}\n")
    return EXIT_OK


def _range_report(params: LinkParams, rounds, engine):
    row = {"encoding": params.encoding.value, "p_d": params.p_d, "vis": params.vis}
    try:
        r = max_range(params)
        row["max_range_db"] = r.loss_db
        row["max_range_half_db"] = r.loss_db / 2
        row["gamma_policy"] = "hashing" if params.encoding is Encoding.SINGLE_RAIL else "fixed"
    except NoRootError:
        row["max_range_db"] = "unbounded within scan"
    try:
        lim = eta_lim(params)
        row["eta_lim_db"] = lim.loss_db
        row["eta_lim_half_db"] = lim.loss_db / 2
    except NoRootError:
        row["eta_lim_db"] = "unbounded within scan"
    if rounds:
        try:
            hi = row["eta_lim_db"] + 2 if isinstance(row["eta_lim_db"], float) else 150.0
            row[f"range_{rounds}_rounds_db"] = pumped_max_range(params, rounds, engine=engine, db_range=(0.0, hi)).loss_db
        except NoRootError:
            row[f"range_{rounds}_rounds_db"] = "unbounded within scan"
    return row


def _range_job(job):
    return _range_report(*job)


def cmd_range(args, out, err):
    base = base_params(args)
    encodings = [Encoding(args.encoding)] if args.encoding_given else list(Encoding)
    jobs = []
    pds = args.pd_list or [base.p_d]
    viss = args.vis_list or [base.vis]
    for enc in encodings:
        for pd in pds:
            for v in viss:
                try:
                    jobs.append((base.replace(encoding=enc, p_d=pd, vis=v), args.rounds, args.engine))
                except ParameterError as exc:
                    raise UsageError(str(exc)) from None
    rows = _parallel_map(_range_job, jobs, args.jobs)
    columns = []
    for r in rows:
        columns += [c for c in r if c not in columns]
    if args.format in ("csv", "json"):
        emit_table(rows, columns, args.format, out)
    else:
        for r in rows:
            out.write("  ".join(f"{k}={fmt(v)}" for k, v in r.items()) + "\n")
    return EXIT_OK


def verify_grid(n: int, seed: int):
    """Latin-hypercube points over (eta_A, eta_B, eta_d, P_d, |V|, eps, gamma_A, gamma_B, m)."""
    u = qmc.LatinHypercube(d=9, seed=seed).random(n)
    pts = []
    for row in u:
        ea, eb, ed = 0.01 + 0.99 * row[:3]
        pts.append(
            dict(
                eta_a=float(ea),
                eta_b=float(eb),
                eta_d=float(ed),
                p_d=float(0.2 * row[3]),
                vis=float(row[4]),
                eps=float(0.5 * row[5]),
                gamma_a=float(0.01 + 0.98 * row[6]),
                gamma_b=float(0.01 + 0.98 * row[7]),
                parity=int(row[8] >= 0.5),
            )
        )
    return pts


def verify_point(job):
    point, encoding = job
    p = LinkParams(encoding=encoding, **point)
    a, o = herald(p), oracle_herald(p)
    return max(float(np.abs(a.state.matrix - o.state.matrix).max()), abs(a.p_succ - o.p_succ))


def cmd_verify(args, out, err):
    if args.grid < 1:
        raise UsageError("--grid must be >= 1")
    pts = verify_grid(args.grid, args.seed)
    failed = False
    report = []
    for enc in Encoding:
        devs = _parallel_map(verify_point, [(p, enc) for p in pts], args.jobs)
        worst = int(np.argmax(devs))
        ok = devs[worst] <= VERIFY_TOL
        failed |= not ok
        report.append(dict(encoding=enc.value, points=len(pts), max_deviation=devs[worst], passed=ok, worst_point=pts[worst]))
    if args.format == "json":
        json.dump(json_safe(report), out, indent=1, allow_nan=False)
        out.write("\n")
    else:
        for r in report:
            status = "PASS" if r["passed"] else "FAIL"
            out.write(f"{status} {r['encoding']:<6} points={r['points']} max_deviation={r['max_deviation']:.3e}\n")
            if not r["passed"]:
                out.write(f"  worst point: {r['worst_point']}\n")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_bound(args, out, err):
    eta = loss_eta(args, required=False)
    if eta is not None:
        rows = [dict(**_loss_columns(eta), d2=repeaterless_bound(eta))]
    else:
        values = axis_values(args.start, args.stop, args.points, args.scale)
        etas = values if args.scale == "db" else [db_to_eta(v) for v in values]
        rows = [dict(**_loss_columns(e), d2=repeaterless_bound(e)) for e in etas]
    emit_table(rows, ["eta_total", "eta_total_db", "eta_half_db", "d2"], args.format or "csv", out)
    return EXIT_OK


COMMANDS = dict(herald=cmd_herald, sweep=cmd_sweep, distill=cmd_distill, range=cmd_range, verify=cmd_verify, bound=cmd_bound)


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        args.encoding_given = getattr(args, "encoding", None) is not None
        apply_config(args, sub)
        args.encoding_given = args.encoding_given or getattr(args, "encoding", None) is not None
        resolve_defaults(args)
        return COMMANDS[args.command](args, out, err)
    except (UsageError, ParameterError) as exc:
        err.write(f"midswap {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except NoRootError as exc:
        err.write(f"midswap {args.command}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
