"""Sweep runner: grids over (N, D, eta, objective) with deterministic output.

Each point is an independent, seeded computation, so results do not depend
on how points are spread over worker processes. Output rows are sorted by
(N, D, eta, objective) before anything is written.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import CapabilityError, DomainError, OptimizationFailed
from .mps import to_text
from .optimize import (
    DIRECT_MAX_N,
    KIND_ALIASES,
    ObjectiveSpec,
    OptimizerOptions,
    optimize_direct,
    optimize_mps,
)

CSV_COLUMNS = (
    "N",
    "D",
    "eta",
    "objective",
    "objective_value",
    "delta_phi",
    "shot_noise_bound",
    "asymptotic_bound",
    "converged",
    "iterations",
    "seed",
    "wall_time_s",
)
WORKERS_ENV = "MPSMETRO_MAX_WORKERS"
SKIPPED = "skipped"


@dataclass(frozen=True)
class SweepSpec:
    n_list: tuple
    d_list: tuple
    eta_list: tuple
    objectives: tuple = ("qfi",)
    options: OptimizerOptions = field(default_factory=OptimizerOptions)
    direct: bool = False
    gauge: str | None = None
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    timing: bool = True
    dump_states: bool = False
    direct_max_n: int = DIRECT_MAX_N

    def __post_init__(self):
        for name in ("n_list", "d_list", "eta_list", "objectives"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise DomainError(f"{name} must not be empty")
            object.__setattr__(self, name, vals)
        if any(int(n) < 1 for n in self.n_list):
            raise DomainError("all N must be positive")
        if any(int(d) < 1 for d in self.d_list):
            raise DomainError("all D must be >= 1 (use direct for the reference)")
        if any(not 0.0 < float(e) <= 1.0 for e in self.eta_list):
            raise DomainError("all eta must lie in (0, 1]")
        short = {v: k for k, v in KIND_ALIASES.items()}
        names = []
        for kind in self.objectives:
            name = kind if kind in KIND_ALIASES else short.get(kind)
            if name is None:
                raise DomainError(f"unknown objective {kind!r} (use qfi or ramsey)")
            names.append(name)
        object.__setattr__(self, "objectives", tuple(names))
        if self.format not in ("csv", "json"):
            raise DomainError(f"unknown format {self.format!r}")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


@dataclass
class SweepRecord:
    N: int
    D: int
    eta: float
    objective: str
    objective_value: float
    delta_phi: float
    shot_noise_bound: float
    asymptotic_bound: float
    converged: object  # bool, or "skipped" when the point was not computed
    iterations: int
    seed: int
    wall_time_s: float
    state_text: str | None = field(default=None, repr=False)

    def row(self) -> dict:
        return {name: getattr(self, name) for name in CSV_COLUMNS}


def shot_noise_bound(N: int, eta: float) -> float:
    return 1.0 / math.sqrt(eta * N)


def asymptotic_bound(N: int, eta: float) -> float:
    return math.sqrt((1.0 - eta) / (eta * N))


def sweep_points(spec: SweepSpec) -> list[tuple]:
    """All ``(N, D, eta, objective)`` points in output order; ``D = 0`` is direct."""
    ds = ([0] if spec.direct else []) + sorted({int(d) for d in spec.d_list})
    pts = {
        (int(n), d, float(e), kind)
        for n in spec.n_list
        for d in ds
        for e in spec.eta_list
        for kind in spec.objectives
    }
    return sorted(pts)


def _gauge_for(kind, gauge):
    # a gauge given for the sweep applies where the objective admits it
    if gauge is None:
        return None
    if KIND_ALIASES[kind] == "approx_qfi_max":
        return "real_nonneg"
    return gauge


def run_point(point, options: OptimizerOptions, gauge=None, timing=True,
              direct_max_n=DIRECT_MAX_N, keep_state=False) -> SweepRecord:
    N, D, eta, kind = point
    objective = ObjectiveSpec(kind, eta, _gauge_for(kind, gauge))
    bounds = (shot_noise_bound(N, eta), asymptotic_bound(N, eta))
    t0 = time.perf_counter()
    try:
        if D == 0:
            res = optimize_direct(N, objective, options, max_n=direct_max_n)
        else:
            res = optimize_mps(N, D, objective, options)
    except (CapabilityError, OptimizationFailed):
        return SweepRecord(N, D, eta, kind, math.nan, math.nan, *bounds, SKIPPED, 0,
                           options.seed, 0.0)
    elapsed = time.perf_counter() - t0 if timing else 0.0
    text = to_text(res.best_params) if keep_state and D > 0 else None
    return SweepRecord(N, D, eta, kind, res.objective_value, res.delta_phi, *bounds,
                       res.converged, res.iterations, options.seed, elapsed, text)


def worker_count(requested: int) -> int:
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        requested = min(requested, max(int(cap), 1))
    return max(requested, 1)


def run_sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Evaluate every sweep point and return records in sorted order.

    Writes ``spec.out`` (and ``<out>.states`` when ``dump_states``) if an
    output path is set.
    """
    if spec.out is not None:
        parent = os.path.dirname(os.path.abspath(spec.out))
        if not os.access(parent, os.W_OK):
            raise OSError(f"output directory not writable: {parent}")
    points = sweep_points(spec)
    args = (spec.options, spec.gauge, spec.timing, spec.direct_max_n, spec.dump_states)
    workers = worker_count(spec.workers)
    if workers == 1 or len(points) == 1:
        records = [run_point(p, *args) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_point, p, *args) for p in points]
            records = [f.result() for f in futures]
    records.sort(key=lambda r: (r.N, r.D, r.eta, r.objective))
    if spec.out is not None:
        with open(spec.out, "w", newline="") as fh:
            fh.write(format_records(records, spec.format))
        if spec.dump_states:
            with open(spec.out + ".states", "w") as fh:
                fh.write(format_states(records))
    return records


def _cell(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def format_records(records, fmt: str = "csv") -> str:
    if fmt == "json":
        rows = []
        for r in records:
            row = r.row()
            for k, v in row.items():
                if isinstance(v, float) and math.isnan(v):
                    row[k] = None
            rows.append(row)
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_cell(v) for v in r.row().values()])
    return buf.getvalue()


def format_states(records) -> str:
    blocks = []
    for r in records:
        if r.state_text:
            blocks.append(f"# N={r.N} D={r.D} eta={r.eta!r} objective={r.objective}\n{r.state_text}")
    return "".join(blocks)


def sandwich_violations(records, tol: float = 1e-9) -> list[SweepRecord]:
    """MPS rows whose delta_phi beats the direct optimum of the same run."""
    direct = {
        (r.N, r.eta, r.objective): r.delta_phi
        for r in records
        if r.D == 0 and r.converged != SKIPPED
    }
    bad = []
    for r in records:
        ref = direct.get((r.N, r.eta, r.objective))
        if r.D > 0 and ref is not None and r.delta_phi < ref - tol:
            bad.append(r)
    return bad


# ------------------------------------------------------------ config files

_LIST_KEYS = {"n": "n_list", "d": "d_list", "eta": "eta_list", "objective": "objectives"}
_OPT_KEYS = {
    "starts": ("starts", int),
    "seed": ("seed", int),
    "tol": ("rel_tol", float),
    "max_iters": ("max_iters", int),
    "init_spread": ("init_spread", float),
    "method": ("method", str),
}


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"not a boolean: {text!r}")


def parse_config(text: str) -> SweepSpec:
    """Parse ``key = value`` lines; lists are comma separated, ``#`` comments."""
    lists, opts, extra = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        items = [v.strip() for v in value.split(",") if v.strip()]
        if key in ("n", "d"):
            lists[_LIST_KEYS[key]] = tuple(int(v) for v in items)
        elif key == "eta":
            lists["eta_list"] = tuple(float(v) for v in items)
        elif key == "objective":
            lists["objectives"] = tuple(items)
        elif key in _OPT_KEYS:
            name, conv = _OPT_KEYS[key]
            opts[name] = conv(value)
        elif key in ("direct", "timing", "dump_states"):
            extra[key] = _parse_bool(value)
        elif key in ("workers", "direct_max_n"):
            extra[key] = int(value)
        elif key in ("gauge", "out", "format"):
            extra[key] = value or None
        else:
            raise DomainError(f"line {lineno}: unknown key {key!r}")
    missing = {"n_list", "d_list", "eta_list"} - lists.keys()
    if missing:
        raise DomainError(f"config lacks required keys: {sorted(missing)}")
    return SweepSpec(options=OptimizerOptions(**opts), **lists, **extra)


def serialize_config(spec: SweepSpec) -> str:
    o = spec.options
    lines = [
        "n = " + ", ".join(str(n) for n in spec.n_list),
        "d = " + ", ".join(str(d) for d in spec.d_list),
        "eta = " + ", ".join(repr(float(e)) for e in spec.eta_list),
        "objective = " + ", ".join(spec.objectives),
        f"direct = {'true' if spec.direct else 'false'}",
        f"starts = {o.starts}",
        f"seed = {o.seed}",
        f"tol = {o.rel_tol!r}",
        f"max_iters = {o.max_iters}",
        f"init_spread = {o.init_spread!r}",
        f"method = {o.method}",
        f"format = {spec.format}",
        f"workers = {spec.workers}",
        f"timing = {'true' if spec.timing else 'false'}",
        f"dump_states = {'true' if spec.dump_states else 'false'}",
        f"direct_max_n = {spec.direct_max_n}",
    ]
    if spec.gauge:
        lines.append(f"gauge = {spec.gauge}")
    if spec.out:
        lines.append(f"out = {spec.out}")
    return "\n".join(lines) + "\n"
