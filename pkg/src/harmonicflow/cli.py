"""Command-line entry points: run | verify | sweep | compare | serve."""

import argparse
import json
import sys

from . import flow as fl
from . import snapshots as snap
from . import verify as vf
from .errors import FlowNotConverged, HarmonicFlowError
from .pipeline import build_pipeline


def _csv_floats(text):
    return tuple(float(x) for x in text.split(","))


def _add_config_flags(p):
    p.add_argument("--config", help="JSON run-config file; flags override its fields")
    p.add_argument("--genus", type=int)
    p.add_argument("--domain-lengths", type=_csv_floats, metavar="L1,L2,...")
    p.add_argument("--domain-twists", type=_csv_floats, metavar="T1,T2,...")
    p.add_argument("--target-lengths", type=_csv_floats, metavar="L1,L2,...")
    p.add_argument("--target-twists", type=_csv_floats, metavar="T1,T2,...")
    p.add_argument("--depth", type=int)
    p.add_argument("--steiner", type=int, dest="steiner_per_side")
    p.add_argument("--method", choices=fl.METHODS)
    p.add_argument("--stepsize", type=float)
    p.add_argument("--tol", type=float, dest="tolerance")
    p.add_argument("--max-iter", type=int, dest="max_iterations")
    p.add_argument("--stride", type=int, dest="snapshot_stride")
    p.add_argument("--out")
    p.add_argument("--port", type=int)
    p.add_argument("--seed", type=int)


def _build_config(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for key in snap.RunConfig.__dataclass_fields__:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return snap.RunConfig.from_dict(data)


def cmd_run(args):
    config = _build_config(args)
    pl = build_pipeline(
        config.genus,
        config.domain_lengths,
        config.domain_twists,
        config.target_lengths,
        config.target_twists,
        depth=config.depth,
        steiner_per_side=config.steiner_per_side,
    )
    cons = pl.constants()
    stepsize = config.stepsize
    if config.method == "fixed" and stepsize is None:
        stepsize = pl.engine.jacobi_stepsize()
    cfg = fl.FlowConfig(
        method=config.method,
        stepsize=stepsize,
        tolerance=config.tolerance,
        max_iterations=config.max_iterations,
        snapshot_stride=config.snapshot_stride,
    )
    cfg._beta = cons.beta
    status = 0
    try:
        snapshots, _ = fl.run_flow(pl.engine, cfg, pl.f0_local)
    except FlowNotConverged as exc:
        snapshots, _ = exc.trajectory
        print(f"FlowNotConverged: {exc}", file=sys.stderr)
        status = 1
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(snap.format_header(config, pl.graph.num_vertices) + "\n")
            for state in snapshots:
                fh.write(snap.format_record(state, pl.engine.globalize(state.points)) + "\n")
    final = snapshots[-1]
    print(f"vertices          {pl.graph.num_vertices}")
    print(f"alpha             {cons.alpha:.6e}")
    print(f"beta              {cons.beta:.6e}")
    print(f"q (at 1/beta)     {cons.q!r}")
    print(f"iterations        {final.iteration}")
    print(f"final energy      {final.energy:.12f}")
    print(f"final tension     {final.tension_norm:.3e}")
    if config.out:
        print(f"snapshots         {config.out} ({len(snapshots)} records)")
    return status


SUITES = ("geometry", "barycenter", "representation", "mesh", "meanvalue")


def cmd_verify(args):
    from . import suites

    selected = args.suites or ["all"]
    if "all" in selected:
        selected = list(SUITES)
    unknown = set(selected) - set(SUITES)
    if unknown:
        print(f"unknown suite(s): {sorted(unknown)}; choose from {SUITES}", file=sys.stderr)
        return 2
    failed = 0
    for name in selected:
        rows = getattr(suites, f"suite_{name}")(seed=args.seed or 0)
        for row in rows:
            flag = "PASS" if row.passed else "FAIL"
            print(f"[{flag}] {row.name}: {row.detail}")
            failed += 0 if row.passed else 1
    return 1 if failed else 0


def cmd_sweep(args):
    config = _build_config(args)
    fracs = tuple(float(x) for x in (args.fractions or "0.2,0.4,0.6,0.8,1.0").split(","))
    if not fracs:
        print("empty stepsize list", file=sys.stderr)
        return 2
    res = vf.stepsize_sweep(
        config.domain_lengths,
        config.domain_twists,
        config.target_lengths,
        config.target_twists,
        stepsize_fractions=fracs,
        genus=config.genus,
        depth=config.depth,
        steiner_per_side=config.steiner_per_side,
    )
    lines = ["stepsize iterations converged"]
    for e in res.entries:
        lines.append(f"{e.stepsize!r} {e.iterations} {int(e.converged)}")
    lines.append(f"fit C1={res.c1!r} C2={res.c2!r} R2={res.r_squared!r}")
    text = "\n".join(lines)
    print(text)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_compare(args):
    config = _build_config(args)
    ells = tuple(float(x) for x in (args.ells or "2.5,1.5,0.5,0.2").split(","))
    family = [
        (tuple(config.target_lengths[:-1]) + (ell,), config.target_twists) for ell in ells
    ]
    table = vf.method_comparison(
        config.domain_lengths,
        config.domain_twists,
        family,
        genus=config.genus,
        depth=config.depth,
        steiner_per_side=config.steiner_per_side,
        fixed_budget=args.fixed_budget,
    )
    lines = ["lengths method iterations converged final_energy final_tension"]
    for key, (pl, runs) in table.items():
        for name, r in runs.items():
            lines.append(
                f"{','.join(repr(v) for v in key)} {name} {r.iterations} "
                f"{int(r.converged)} {r.final_energy!r} {r.final_tension!r}"
            )
    text = "\n".join(lines)
    print(text)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_serve(args):
    from . import service

    config = _build_config(args)
    port = config.port or 8631
    try:
        httpd, svc = service.make_server(config, port=port)
    except OSError as exc:
        print(f"cannot bind port {port}: {exc}", file=sys.stderr)
        return 1
    print(f"serving on http://127.0.0.1:{port}  (endpoints: /geometry /stream /control)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        svc.reset()
        httpd.server_close()
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="harmonicflow",
        description="Discrete equivariant harmonic maps between hyperbolic surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full pipeline once")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run numerical certification suites")
    p_verify.add_argument("suites", nargs="*", help=f"suites: {', '.join(SUITES)} or all")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="iteration counts against the stepsize")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--fractions", help="comma list of fractions of 1/beta")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare the minimization methods")
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--ells", help="comma list of third-curve target lengths")
    p_cmp.add_argument("--fixed-budget", type=int, default=200_000)
    p_cmp.set_defaults(func=cmd_compare)

    p_serve = sub.add_parser("serve", help="serve live flow state to the companion UI")
    _add_config_flags(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except HarmonicFlowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
