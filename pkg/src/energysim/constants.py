"""Explicit constants standing in for the asymptotic Θ(·) factors."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class ConstantsProfile:
    # SR-comm repetitions, each multiplied by ceil(log2 n)
    rep_logn: int = 4
    rep_all: int = 4
    rep_multi: int = 6
    # decay sweeps per SR-comm^multi iteration (the outer loop already repeats log n times)
    multi_inner_sweeps: int = 2
    # approximate counting: C in both phases, and the validity constants
    rep_apx: int = 4
    apx_phase2_C: int = 32
    eps0: float = 0.02
    N0: int = 562_500
    c0: float = 15.0
    # BFS
    bfs_C: float = 2.0
    bfs_cM: float = 4.0
    # labeling charge: listen slots = charge * ceil(log2 Δ) * ceil(log2 n)^2
    labeling_charge: int = 1
    # bound on |N(v) ∩ V_H| used as Δ' when learning hub adjacency (|V_H| <= 6 sqrt n for g <= 1)
    hub_neighbor_mult: int = 6
    kstar: int = 6
    dstar: int = 7

    def __post_init__(self):
        for f in ("rep_logn", "rep_all", "rep_multi", "multi_inner_sweeps", "rep_apx", "apx_phase2_C"):
            if getattr(self, f) < 1:
                raise ValueError(f"{f} must be >= 1")
        if not (0 < self.eps0 <= 1):
            raise ValueError("eps0 must lie in (0, 1]")

    def replace(self, **kw) -> "ConstantsProfile":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_PROFILE = ConstantsProfile()


def parse_profile(text: str, base: ConstantsProfile = DEFAULT_PROFILE) -> ConstantsProfile:
    """Parse `key = value` lines; `#` starts a comment."""
    types = {f.name: f.type for f in dataclasses.fields(ConstantsProfile)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"line {lineno}: unknown constant {key!r}")
        kw[key] = float(val) if types[key] in ("float", float) else int(val)
    return base.replace(**kw)


def load_profile(path: Optional[str] = None) -> ConstantsProfile:
    path = path or os.environ.get("ENERGYSIM_PROFILE")
    if not path:
        return DEFAULT_PROFILE
    return parse_profile(Path(path).read_text())
