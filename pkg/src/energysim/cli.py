"""Command line entry point: energysim gen|bfs|diameter|mincut|stmincut|primitives|check."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .constants import DEFAULT_PROFILE, load_profile
from .instances import GeneratorSpec, generate, save_graph

FAMILIES = ("planar_cluster", "toroidal_cluster", "disjointness", "k2delta", "kn", "kn_minus_e",
            "random_connected", "grid", "path", "star", "cycle")


def _profile_overrides() -> dict:
    prof = load_profile()
    base = DEFAULT_PROFILE.to_dict()
    return {k: v for k, v in prof.to_dict().items() if base[k] != v}


def _gen_params(args) -> dict:
    p = {}
    for kv in args.param or ():
        k, _, v = kv.partition("=")
        try:
            p[k] = json.loads(v)
        except json.JSONDecodeError:
            p[k] = v
    if args.n is not None:
        key = {"k2delta": "delta", "path": "n", "grid": "rows"}.get(args.family, "n")
        p.setdefault(key, args.n)
    return p


def _instance(args) -> dict:
    if args.graph:
        return {"file": args.graph}
    if not args.family:
        raise harness.UsageError("give --graph FILE or --family NAME")
    return {"generator": {"family": args.family, "params": _gen_params(args), "seed": args.gen_seed},
            "vary_seed": bool(args.vary_seed)}


def _add_common(p):
    p.add_argument("--graph", help="graph file (first line 'n m', then one 'u v' per edge)")
    p.add_argument("--family", choices=FAMILIES, help="generate the instance instead of loading it")
    p.add_argument("--n", type=int, help="size parameter for --family")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra generator parameter")
    p.add_argument("--gen-seed", type=int, default=0)
    p.add_argument("--vary-seed", action="store_true", help="regenerate the instance with each trial seed")
    p.add_argument("--model", choices=("cd", "nocd"), default="nocd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", help="write the JSON report here (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="energysim", description="Energy-aware radio network simulator")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a generated graph and its metadata sidecar")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--param", action="append", metavar="KEY=VALUE")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="graph file; metadata goes to OUT.json")

    b = sub.add_parser("bfs", help="distributed BFS against the BFS oracle")
    _add_common(b)
    b.add_argument("--source", type=int, default=0)

    d = sub.add_parser("diameter", help="diameter pipeline")
    _add_common(d)
    d.add_argument("--mode", choices=("offline", "distributed", "check"), default="distributed")

    m = sub.add_parser("mincut", help="global minimum cut pipeline")
    _add_common(m)
    m.add_argument("--mode", choices=("offline", "distributed"), default="distributed")
    m.add_argument("--kstar", type=int, default=None)

    s = sub.add_parser("stmincut", help="approximate s-t minimum cut pipeline")
    _add_common(s)
    s.add_argument("--mode", choices=("offline", "distributed"), default="distributed")
    s.add_argument("--s", type=int)
    s.add_argument("--t", type=int)
    s.add_argument("--epsilon", type=float, default=0.25)
    s.add_argument("--kstar", type=int, default=None)

    p = sub.add_parser("primitives", help="SR-comm success rates on an engineered star cluster")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--model", choices=("cd", "nocd"), default="nocd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--variant", action="append", choices=harness.VARIANTS)
    p.add_argument("--csv", help="also write the flat CSV table here")
    p.add_argument("--out")

    c = sub.add_parser("check", help="structure bounds and the G* diameter equality")
    _add_common(c)
    return ap


def _spec(args) -> harness.ExperimentSpec:
    opts = {}
    problem = {"check": "structure-check"}.get(args.cmd, args.cmd)
    if args.cmd == "bfs":
        opts["source"] = args.source
    if args.cmd in ("diameter", "mincut", "stmincut"):
        opts["mode"] = args.mode
    if getattr(args, "kstar", None) is not None:
        opts["kstar"] = args.kstar
    if args.cmd == "stmincut":
        opts["epsilon"] = args.epsilon
        if args.s is not None and args.t is not None:
            opts["s"], opts["t"] = args.s, args.t
    return harness.ExperimentSpec(problem, _instance(args), args.model, _profile_overrides(),
                                  args.trials, args.seed, options=opts)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.cmd == "gen":
            spec = GeneratorSpec(args.family, _gen_params(args), args.seed)
            g, meta = generate(spec)
            save_graph(g, args.out)
            Path(str(args.out) + ".json").write_text(json.dumps(harness._plain(meta), sort_keys=True, indent=1))
            print(f"wrote {args.out} (n={g.n}, m={g.m})")
            return 0
        if args.cmd == "primitives":
            spec = harness.ExperimentSpec("primitive-suite", {"n": args.n}, args.model, _profile_overrides(),
                                          args.trials, args.seed, options={"variants": args.variant})
            rep = harness.run_experiment(spec)
            if args.csv:
                Path(args.csv).write_text(harness.primitive_csv(rep.rows))
            _emit(rep.to_json() + "\n", args.out)
            return 0
        rep = harness.run_experiment(_spec(args))
        _emit(rep.to_json() + "\n", args.out)
        agg = rep.aggregates
        if agg.get("trials"):
            print(f"{args.cmd}: {agg['trials']} trials, success rate {agg['success_rate']:.3f}", file=sys.stderr)
        return 0
    except (harness.UsageError, ValueError, OSError) as e:
        print(f"energysim: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
