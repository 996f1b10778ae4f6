"""Experiment runner: seeded trials, oracle verdicts, deterministic JSON/CSV reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import oracles
from . import primitives as P
from .bfs import bfs
from .constants import DEFAULT_PROFILE, ConstantsProfile
from .decomposition import decompose_offline, verify_structure
from .diameter import (compare_params, diameter_distributed, diameter_offline, gstar_equality_check,
                       params_offline)
from .graph import Graph
from .instances import GeneratorSpec, generate, load_graph
from .mincut import (global_mincut_distributed, global_mincut_pipeline_offline, st_mincut_distributed,
                     st_mincut_pipeline_offline)
from .radio import CollisionModel, ModelConfig, RadioNetwork

SCHEMA = 1
PROBLEMS = ("bfs", "diameter", "mincut", "stmincut", "primitive-suite", "structure-check")


class UsageError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    problem: str
    instance: dict  # {"generator": {family, params, seed}} or {"file": path}; "vary_seed" re-seeds per trial
    model: str = "nocd"
    profile: dict = field(default_factory=dict)  # overrides of the default constants
    trials: int = 1
    seed: int = 0
    seeds: Optional[list] = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise UsageError(f"unknown problem {self.problem!r}; expected one of {', '.join(PROBLEMS)}")
        CollisionModel(self.model)
        if self.trials < 0:
            raise UsageError("trials must be >= 0")

    def trial_seeds(self) -> list:
        if self.seeds is not None:
            return sorted(int(s) for s in self.seeds)
        return [self.seed + i for i in range(self.trials)]

    def constants(self) -> ConstantsProfile:
        return DEFAULT_PROFILE.replace(**self.profile) if self.profile else DEFAULT_PROFILE

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(**d)


@dataclass
class RunReport:
    spec: dict
    rows: list
    aggregates: dict
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return {"schema": self.schema, "spec": self.spec, "rows": self.rows, "aggregates": self.aggregates}

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=1)

    def to_csv(self) -> str:
        keys = sorted({k for r in self.rows for k, v in r.items() if not isinstance(v, (dict, list))})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r.get(k, "") for k in keys})
        return buf.getvalue()


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    return x


# ------------------------------------------------------------------ instances and rows

def build_instance(inst: dict, trial_seed: int) -> tuple:
    if "file" in inst:
        return load_graph(inst["file"]), {"file": str(inst["file"])}
    gen = dict(inst["generator"])
    seed = trial_seed if inst.get("vary_seed") else int(gen.get("seed", 0))
    return generate(GeneratorSpec(gen["family"], gen.get("params", {}), seed))


def energy_histogram(energy: np.ndarray, bins: int = 10) -> dict:
    e = np.asarray(energy, dtype=np.float64)
    if e.size == 0 or e.max() <= 0:
        return {"edges": [0, 0], "counts": [int(e.size)]}
    counts, edges = np.histogram(e, bins=bins, range=(0.0, float(e.max())))
    return {"edges": [int(round(x)) for x in edges], "counts": counts.tolist()}


def _row(seed, correct, res, **extra) -> dict:
    r = {"seed": seed, "correct": bool(correct), "rounds": int(res.rounds), "max_energy": int(res.max_energy),
         "energy_histogram": energy_histogram(res.energy), "bytes_sent": int(res.bytes_sent),
         "stage_energy": dict(res.stage_energy)}
    r.update(extra)
    return r


def _trial_bfs(g, meta, seed, model, prof, opt):
    s = int(opt.get("source", 0))
    res = bfs(g, s, ModelConfig(model, seed), prof, check_lemmas=opt.get("check_lemmas", True))
    truth = oracles.bfs_oracle(g, s)
    ok = res.dist.tolist() == truth
    return _row(seed, ok, res, n=g.n, landmarks=res.landmarks, overflow=res.overflow,
                hitting_ok=res.hitting_ok, max_congestion=res.max_congestion, wave_capacity=res.M)


def _trial_diameter(g, meta, seed, model, prof, opt):
    mode = opt.get("mode", "distributed")
    truth = oracles.diameter_oracle(g)
    if mode == "offline":
        d = diameter_offline(g)
        return {"seed": seed, "correct": d == truth, "n": g.n, "answer": d}
    if mode == "check":
        c = gstar_equality_check(g, meta.get("certified_genus"))
        return {"seed": seed, "correct": c.ok and c.diameter == truth, "n": g.n, **c.to_dict()}
    res = diameter_distributed(g, ModelConfig(model, seed), prof)
    off = params_offline(g, decompose_offline(g))
    diff = compare_params(res.learned, off)
    ok = bool((res.outputs == truth).all())
    return _row(seed, ok, res, n=g.n, answer=res.answer, param_mismatches=len(diff),
                structure_mismatches=sum(res.struct_mismatches.values()), parameter_calls=res.parameter_calls)


def _trial_mincut(g, meta, seed, model, prof, opt):
    kstar = int(opt.get("kstar", prof.kstar))
    truth = oracles.global_cut_oracle(g)
    if opt.get("mode", "distributed") == "offline":
        a = global_mincut_pipeline_offline(g, kstar)
        return {"seed": seed, "correct": a == truth, "n": g.n, "answer": a, "oracle": truth,
                "kstar_valid": truth <= kstar}
    res = global_mincut_distributed(g, ModelConfig(model, seed), prof, kstar=kstar)
    ok = bool((res.outputs == truth).all())
    return _row(seed, ok, res, n=g.n, answer=res.answer, oracle=truth, kstar_valid=truth <= kstar)


def _st_pair(g, meta, opt):
    if "s" in opt and "t" in opt:
        return int(opt["s"]), int(opt["t"])
    hubs = meta.get("hubs") or []
    if len(hubs) >= 2:
        return hubs[0], hubs[-1]
    return 0, g.n - 1


def _trial_stmincut(g, meta, seed, model, prof, opt):
    s, t = _st_pair(g, meta, opt)
    eps = float(opt.get("epsilon", 0.25))
    truth = oracles.st_cut_oracle(g, s, t)
    if opt.get("mode", "distributed") == "offline":
        a = st_mincut_pipeline_offline(g, s, t)
        return {"seed": seed, "correct": a == truth, "n": g.n, "s": s, "t": t, "answer": a, "oracle": truth}
    res = st_mincut_distributed(g, s, t, eps, ModelConfig(model, seed), prof)
    lo, hi = (1 - eps) * truth, (1 + eps) * truth
    ok = bool(((res.outputs >= lo - 1e-9) & (res.outputs <= hi + 1e-9)).all())
    return _row(seed, ok, res, n=g.n, s=s, t=t, answer=float(res.answer), oracle=truth, epsilon=eps)


def _trial_structure(g, meta, seed, model, prof, opt):
    dec = decompose_offline(g)
    genus = meta.get("certified_genus") or 0
    rep = verify_structure(g, dec, genus, prof.dstar)
    row = {"seed": seed, "correct": rep.ok, "n": g.n, **rep.to_dict()}
    if opt.get("gstar", True):
        c = gstar_equality_check(g, genus)
        row["gstar_ok"] = c.ok
        row["correct"] = rep.ok and c.ok
    return row


TRIALS = {"bfs": _trial_bfs, "diameter": _trial_diameter, "mincut": _trial_mincut,
          "stmincut": _trial_stmincut, "structure-check": _trial_structure}


def aggregate(rows: list) -> dict:
    if not rows:
        return {"trials": 0, "success_rate": None, "median_energy": None, "max_energy": None}
    energies = [r["max_energy"] for r in rows if "max_energy" in r]
    out = {"trials": len(rows), "success_rate": sum(bool(r["correct"]) for r in rows) / len(rows)}
    out["median_energy"] = float(np.median(energies)) if energies else None
    out["max_energy"] = int(max(energies)) if energies else None
    return out


def run_experiment(spec: ExperimentSpec) -> RunReport:
    prof = spec.constants()
    model = CollisionModel(spec.model)
    if spec.problem == "primitive-suite":
        rows = primitive_suite(spec.instance.get("n", 256), spec.trial_seeds(), model, prof,
                               spec.options.get("variants"))
        return RunReport(spec.to_dict(), rows, {"trials": len(spec.trial_seeds()), "variants": len(rows)})
    fn = TRIALS[spec.problem]
    rows = []
    cache = None
    for seed in spec.trial_seeds():
        if cache is None or spec.instance.get("vary_seed"):
            cache = build_instance(spec.instance, seed)
        g, meta = cache
        rows.append(fn(g, meta, seed, model, prof, spec.options))
    return RunReport(spec.to_dict(), rows, aggregate(rows))


# ------------------------------------------------------------------ scaling fit

def fit_energy_scaling(ns, energies, log_power: int = 3) -> tuple:
    """Least-squares slope of log(E / log2(n)^p) against log n.  Returns (exponent, residual)."""
    ns = np.asarray(ns, dtype=np.float64)
    e = np.asarray(energies, dtype=np.float64)
    if ns.size < 2:
        raise ValueError("need at least two sizes")
    y = np.log(e / np.log2(ns) ** log_power)
    x = np.log(ns)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), resid


def scaling_series(reports: list) -> tuple:
    ns, es = [], []
    for rep in reports:
        n = rep.rows[0]["n"]
        ns.append(n)
        es.append(rep.aggregates["median_energy"])
    return fit_energy_scaling(ns, es)


# ------------------------------------------------------------------ primitive suite

def star_cluster(n: int) -> tuple:
    """Centers joined in a path, each with its own leaves; returns (graph, centers, leaves per center)."""
    k = max(1, math.isqrt(n))
    size = n // k
    es, centers, leaves = [], [], {}
    v = 0
    for i in range(k):
        c = v
        centers.append(c)
        extra = size + (1 if i < n - k * size else 0)
        leaves[c] = list(range(c + 1, c + extra))
        es += [(c, x) for x in leaves[c]]
        v = c + extra
        if i:
            es.append((centers[i - 1], c))
    return Graph.from_edges(n, es), centers, leaves


VARIANTS = ("sr_comm", "sr_comm_all", "sr_comm_multi", "sr_comm_min", "sr_comm_apx")


def primitive_trial(variant: str, g: Graph, centers, leaves, seed: int, model, prof) -> tuple:
    """One engineered run; returns (every receiver correct, max energy, rounds)."""
    rng = np.random.default_rng([seed, 7])
    net = RadioNetwork(g, ModelConfig(model, seed))
    senders = {c: [x for x in leaves[c] if rng.random() < 0.5] for c in centers}
    S = sorted(x for c in centers for x in senders[c])
    ok = True
    if variant == "sr_comm":
        got = P.sr_comm(net, S, centers, {u: u for u in S}, prof)
        for c in centers:
            if senders[c]:
                ok &= c in got and got[c][1] in senders[c]
            else:
                ok &= c not in got
    elif variant == "sr_comm_all":
        dp = max(len(v) for v in leaves.values())
        got = P.sr_comm_all(net, S, centers, {u: u for u in S}, dp, prof)
        for c in centers:
            ok &= set(got[c]) == set(senders[c])
    elif variant == "sr_comm_multi":
        M = 4
        hold = {u: {(c, int(rng.integers(M)))} for c in centers for u in senders[c]}
        for c in centers:
            for u in senders[c]:
                if rng.random() < 0.3:
                    hold[u].add((c, int(rng.integers(M))))
        msgs = sorted({m for ms in hold.values() for m in ms})
        seeds = {m: int(s) for m, s in zip(msgs, rng.integers(0, 2**63, size=len(msgs)))}
        got = P.sr_comm_multi(net, hold, centers, seeds, M, prof)
        for c in centers:
            ok &= got[c] == {m for u in senders[c] for m in hold[u]}
    elif variant == "sr_comm_min":
        K = 16
        keys = {u: int(rng.integers(1, K + 1)) for u in S}
        got = P.sr_comm_min(net, S, centers, keys, {u: u for u in S}, K, prof)
        for c in centers:
            if senders[c]:
                best = min(keys[u] for u in senders[c])
                ok &= c in got and got[c][1] == best and keys[got[c][2]] == best and got[c][2] in senders[c]
            else:
                ok &= c not in got
    elif variant == "sr_comm_apx":
        eps = 0.5
        got = P.sr_comm_apx(net, S, centers, {u: 1 for u in S}, 1, eps, prof)
        for c in centers:
            true = len(senders[c])
            ok &= (1 - eps) * true <= got[c] <= (1 + eps) * true
    else:
        raise UsageError(f"unknown primitive variant {variant!r}")
    return bool(ok), int(net.ledger.energy().max()), int(net.ledger.round_count)


def primitive_suite(n: int, seeds, model, prof, variants=None) -> list:
    g, centers, leaves = star_cluster(int(n))
    rows = []
    for var in variants or VARIANTS:
        res = [primitive_trial(var, g, centers, leaves, s, model, prof) for s in seeds]
        if not res:
            rows.append({"variant": var, "n": g.n, "delta": g.max_degree, "trials": 0,
                         "success_rate": None, "energy": None, "rounds": None})
            continue
        rows.append({"variant": var, "n": g.n, "delta": g.max_degree, "trials": len(res),
                     "success_rate": sum(r[0] for r in res) / len(res),
                     "energy": float(np.median([r[1] for r in res])),
                     "rounds": float(np.median([r[2] for r in res]))})
    return rows


def primitive_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "delta", "variant", "energy", "rounds", "success_rate"],
                       lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
