"""Command-line front end.

    coarsening-lab <experiment> [--config FILE] [--seed S --replicas N
                                 --out PATH --threads K] [--dump-defaults]
    coarsening-lab rate    --q Q [--eps-min A --eps-max B --points N]
    coarsening-lab fredholm --q Q --m M --t T [quadrature overrides]
    coarsening-lab renorm  --d D --C C --gamma G --eps0 E --L0 L --k-max K

Exit codes: 0 success, 2 precondition error, 3 workload-guard refusal.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments
from .fredholm import WorkloadError, default_quadrature, prob_xm_positive
from .rate import RateParams, rate_table
from .renorm import ScheduleParams, check_conditions, schedule, time_constraint_holds


def _experiment_parser(sub, name):
    p = sub.add_parser(name, help=f"run the {name} experiment")
    p.add_argument("--config", help="JSON file of spec overrides (params/replicas/master_seed)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV output path (JSON sidecar alongside)")
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--dump-defaults", action="store_true", help="print the annotated default config and exit")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coarsening-lab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in experiments.RUNNERS:
        _experiment_parser(sub, name)

    pr = sub.add_parser("rate", help="rate-function table as CSV")
    pr.add_argument("--q", type=float, required=True)
    pr.add_argument("--eps-min", type=float, default=1e-3)
    pr.add_argument("--eps-max", type=float, default=0.9)
    pr.add_argument("--points", type=int, default=50)

    pf = sub.add_parser("fredholm", help="exact tail probability as JSON")
    pf.add_argument("--q", type=float, required=True)
    pf.add_argument("--m", type=int, required=True)
    pf.add_argument("--t", type=float, required=True)
    pf.add_argument("--r", type=float, default=None)
    pf.add_argument("--r-prime", type=float, default=None)
    pf.add_argument("--big-r", type=float, default=None, help="mu-contour radius")
    pf.add_argument("--n-zeta", type=int, default=128)
    pf.add_argument("--n-eta", type=int, default=64)
    pf.add_argument("--n-mu", type=int, default=64)
    pf.add_argument("--n-max", type=int, default=3)
    pf.add_argument("--eps", type=float, default=None, help="use saddle radii for this eps")

    pn = sub.add_parser("renorm", help="schedule table as CSV with a JSON condition footer")
    pn.add_argument("--d", type=int, default=2)
    pn.add_argument("--C", type=float, default=1.0)
    pn.add_argument("--gamma", type=float, default=1.0)
    pn.add_argument("--eps0", type=float, default=1e-3)
    pn.add_argument("--L0", type=int, default=4)
    pn.add_argument("--k-max", type=int, default=5)
    pn.add_argument("--alpha", type=float, default=1.0)
    pn.add_argument("--delta", type=float, default=0.0)
    pn.add_argument("--chi", type=float, default=None)
    pn.add_argument("--eps-prime", type=float, default=None, help="condition report at this eps'")
    return ap


def _cmd_experiment(args) -> int:
    name = args.command
    if args.dump_defaults:
        d = experiments.DEFAULTS[name]
        print(json.dumps({"name": name, **d}, indent=2, sort_keys=True))
        return 0
    spec = experiments.default_spec(name)
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            cfg = json.load(f)
        spec.params.update({k: v for k, v in cfg.get("params", {}).items() if not k.startswith("_")})
        spec.replicas = int(cfg.get("replicas", spec.replicas))
        spec.master_seed = int(cfg.get("master_seed", spec.master_seed))
    if args.seed is not None:
        spec.master_seed = args.seed
    if args.replicas is not None:
        spec.replicas = args.replicas
    if args.threads:
        spec.threads = args.threads
    spec.out = args.out
    result = experiments.run(spec)
    if not args.out:
        sys.stdout.write(result.to_csv())
    else:
        print(f"wrote {args.out} (+ .json sidecar); wall clock {result.wall_clock_s:.2f}s")
    return 0


def _cmd_rate(args) -> int:
    params = RateParams.from_q(args.q)
    eps_grid = np.geomspace(args.eps_min, args.eps_max, args.points)
    print("eps,phi_hat,phi_plus,zeta1,zeta2,s_second_1,s_second_2")
    for row in rate_table(eps_grid, params):
        print(",".join(repr(row[k]) for k in
                       ("eps", "phi_hat", "phi_plus", "zeta1", "zeta2", "s_second_1", "s_second_2")))
    return 0


def _cmd_fredholm(args) -> int:
    params = RateParams.from_q(args.q)
    quad = default_quadrature(params, eps=args.eps, n_zeta=args.n_zeta, n_eta=args.n_eta,
                              n_mu=args.n_mu, n_max=args.n_max)
    overrides = {}
    if args.r is not None:
        overrides["r"] = args.r
    if args.r_prime is not None:
        overrides["r_prime"] = args.r_prime
    if args.big_r is not None:
        overrides["R"] = args.big_r
    if overrides:
        from dataclasses import replace

        quad = replace(quad, **overrides)
        quad.validate(params.tau)
    res = prob_xm_positive(args.m, args.t, params, quad)
    print(json.dumps({
        "q": args.q, "m": args.m, "t": args.t,
        "p": res.p, "raw_re": res.raw.real, "imag_residue": res.imag_residue,
        "tail_bound": res.det_tail_bound, "tail_estimate": res.det_tail_estimate,
        "quadrature": {"r": quad.r, "r_prime": quad.r_prime, "R": quad.R,
                        "n_zeta": quad.n_zeta, "n_eta": quad.n_eta, "n_mu": quad.n_mu,
                        "n_max": quad.n_max},
    }, indent=2))
    return 0


def _cmd_renorm(args) -> int:
    params = ScheduleParams(d=args.d, C=args.C, gamma=args.gamma, eps0=args.eps0, L0=args.L0,
                            k_max=args.k_max, alpha=args.alpha, delta=args.delta, chi=args.chi)
    rows = schedule(params)
    cols = ["k", "eps_k", "log_eps_k", "n_k", "l_k", "L_k", "t_k", "T_k",
            "master_bound_k", "log_master_bound_k", "floors_exact", "underflowed"]
    print(",".join(cols))
    for r in rows:
        f = r.as_floats()
        print(",".join(repr(f[c]) if isinstance(f[c], float) else str(f[c]) for c in cols))
    D, chi = params.derived_constants()
    eps_prime = args.eps_prime if args.eps_prime is not None else args.eps0
    conds = check_conditions(eps_prime, args.d, D, chi, args.gamma, args.C, rows)
    footer = {
        "D": D, "chi": chi, "eps_prime": eps_prime,
        "conditions": [{"name": c.name, "ok": c.ok, "lhs": c.lhs, "rhs": c.rhs} for c in conds],
        "induction_ok": [
            {"k": rows[k].k, "master_bound_leq_next_eps": rows[k].master_bound.leq_log(rows[k + 1].eps.log),
             "time_constraint": time_constraint_holds(rows[k + 1], args.d)}
            for k in range(len(rows) - 1)
        ],
    }
    print(json.dumps(footer, indent=2))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rate":
            return _cmd_rate(args)
        if args.command == "fredholm":
            return _cmd_fredholm(args)
        if args.command == "renorm":
            return _cmd_renorm(args)
        return _cmd_experiment(args)
    except WorkloadError as exc:
        print(f"workload refused: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError) as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
