"""Instance ingestion, generators, and the benchmark runner.

ORLIB ingestion note: the capacity token of each facility and the demand
token of each client are parsed and DISCARDED (uncapacitated semantics,
costs taken verbatim).  Some ORLIB mirrors ship demand-scaled costs; no
demand multiplication is ever applied here.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import os
import time
from dataclasses import dataclass, fields

import numpy as np

from . import portfolio as _portfolio
from . import primal_dual as _pd
from . import rounding as _rounding
from .core import Instance, IntegralSolution
from .errors import MalformedToken, TooLarge, TruncatedFile
from .lp import solve_relaxation

CSV_HEADER = [
    "instance",
    "algo",
    "params",
    "seed",
    "facility_cost",
    "connection_cost",
    "total",
    "lp_obj",
    "ratio_lp",
    "ratio_opt",
    "trials",
    "mean",
    "stddev",
    "wall_ms",
]


# ---------------------------------------------------------------------------
# File formats


class _Tokens:
    def __init__(self, text: str):
        self._toks = text.split()
        self._pos = 0

    def next_float(self) -> float:
        if self._pos >= len(self._toks):
            raise TruncatedFile("unexpected end of file")
        tok = self._toks[self._pos]
        self._pos += 1
        try:
            return float(tok)
        except ValueError:
            raise MalformedToken(f"expected a number, got {tok!r}") from None

    def next_int(self) -> int:
        value = self.next_float()
        if value != int(value):
            raise MalformedToken(f"expected an integer, got {value}")
        return int(value)


def parse_orlib(text: str) -> Instance:
    """Parse the whitespace-tokenized ORLIB uncapacitated format."""
    toks = _Tokens(text)
    m = toks.next_int()
    n = toks.next_int()
    if m < 1 or n < 1:
        raise MalformedToken(f"invalid dimensions {m} x {n}")
    f = np.empty(m)
    for i in range(m):
        toks.next_float()  # capacity, discarded
        f[i] = toks.next_float()
    c = np.empty((m, n))
    for j in range(n):
        toks.next_float()  # demand, discarded
        for i in range(m):
            c[i, j] = toks.next_float()
    return Instance(facility_costs=f, connection_costs=c)


def emit_orlib(instance: Instance) -> str:
    """Serialize in the ORLIB layout (capacities and demands written as 0)."""
    out = io.StringIO()
    out.write(f"{instance.num_facilities} {instance.num_clients}\n")
    for fi in instance.facility_costs:
        out.write(f"0 {fi!r}\n")
    for j in range(instance.num_clients):
        out.write("0\n")
        out.write(" ".join(repr(float(v)) for v in instance.connection_costs[:, j]))
        out.write("\n")
    return out.getvalue()


def parse_json(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedToken(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or "facility_costs" not in data or "connection_costs" not in data:
        raise MalformedToken("JSON instance needs facility_costs and connection_costs")
    return Instance(
        facility_costs=data["facility_costs"], connection_costs=data["connection_costs"]
    )


def emit_json(instance: Instance) -> str:
    return json.dumps(
        {
            "facility_costs": [float(v) for v in instance.facility_costs],
            "connection_costs": [[float(v) for v in row] for row in instance.connection_costs],
        },
        indent=2,
    )


# ---------------------------------------------------------------------------
# Generators


def gen_euclidean(m: int, n: int, cost_range=(0.1, 1.0), seed: int = 0) -> Instance:
    """Facilities and clients uniform in the unit square; metric by construction."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 17]))
    facilities = rng.random((m, 2))
    clients = rng.random((n, 2))
    c = np.sqrt(((facilities[:, None, :] - clients[None, :, :]) ** 2).sum(axis=2))
    lo, hi = cost_range
    f = rng.uniform(lo, hi, size=m)
    return Instance(facility_costs=f, connection_costs=c)


def gen_regular(m: int, n: int, seed: int = 0) -> Instance:
    """Instances where every facility is equidistant from each client.

    Each client sits at the center of a ring through all facilities, so
    whatever the LP optimum fractionally opens for it is at one single
    distance and the irregularity measure vanishes.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 23]))
    radii = rng.uniform(0.1, 1.0, size=n)
    c = np.tile(radii, (m, 1))
    f = rng.uniform(0.1, 1.0, size=m)
    return Instance(facility_costs=f, connection_costs=c)


# ---------------------------------------------------------------------------
# Benchmark runner


@dataclass(frozen=True)
class BenchRow:
    instance: str
    algo: str
    params: str
    seed: int
    facility_cost: float
    connection_cost: float
    total: float
    lp_obj: float
    ratio_lp: float
    ratio_opt: float | None
    trials: int
    mean: float
    stddev: float
    wall_ms: float


def _load_config_instance(spec: dict) -> tuple[str, Instance]:
    kind = spec.get("kind", "euclidean")
    if kind == "file":
        path = spec["path"]
        text = open(path).read()
        inst = parse_orlib(text) if spec.get("format", "orlib") == "orlib" else parse_json(text)
        return spec.get("name", os.path.basename(path)), inst
    m, n, seed = int(spec["m"]), int(spec["n"]), int(spec.get("seed", 0))
    if kind == "euclidean":
        lo, hi = spec.get("cost_range", (0.1, 1.0))
        inst = gen_euclidean(m, n, (lo, hi), seed)
    elif kind == "regular":
        inst = gen_regular(m, n, seed)
    else:
        raise MalformedToken(f"unknown instance kind {kind!r}")
    return spec.get("name", f"{kind}-{m}x{n}-s{seed}"), inst


def _run_algo(
    instance: Instance, algo: dict, base_seed: int
) -> tuple[IntegralSolution, int, float, float]:
    """Returns (best solution, trials, mean, stddev) for one grid cell."""
    kind = algo["algo"]
    trials = int(algo.get("trials", 1))
    if kind == "jms":
        sol = _pd.jms(instance)
        return sol, 1, sol.total_cost, 0.0
    if kind == "myz":
        sol = _pd.myz(instance, float(algo.get("delta", 1.504)))
        return sol, 1, sol.total_cost, 0.0
    if kind == "exact":
        sol = _portfolio.brute_force_opt(instance)
        return sol, 1, sol.total_cost, 0.0
    if kind == "best-of":
        sol = _portfolio.best_of(instance, trials, base_seed)
        return sol, trials, sol.total_cost, 0.0
    if kind == "a2":
        sols = [_portfolio.a2_randomized(instance, int(s)) for s in _cell_seeds(base_seed, trials)]
    elif kind == "a1":
        gamma = float(algo.get("gamma", _portfolio.balanced_gamma()))
        context = _rounding.prepare(instance, gamma)
        sols = [
            _rounding.round_context(context, _rounding.trial_rng(s, 0))
            for s in _cell_seeds(base_seed, trials)
        ]
    else:
        raise MalformedToken(f"unknown algorithm {kind!r}")
    totals = np.array([s.total_cost for s in sols])
    best = sols[int(np.argmin(totals))]
    std = float(totals.std(ddof=1)) if trials > 1 else 0.0
    return best, trials, float(totals.mean()), std


def _cell_seeds(base_seed: int, trials: int):
    return [base_seed + t for t in range(trials)]


def _format_params(algo: dict) -> str:
    parts = []
    for key in sorted(algo):
        if key in ("algo", "trials"):
            continue
        parts.append(f"{key}={algo[key]:.6g}" if isinstance(algo[key], float) else f"{key}={algo[key]}")
    return ";".join(parts)


def _bench_cell(name, instance, algo, base_seed, oracle_max_m, timing) -> BenchRow:
    start = time.perf_counter()
    primal, _ = solve_relaxation(instance)
    sol, trials, mean, std = _run_algo(instance, algo, base_seed)
    wall_ms = (time.perf_counter() - start) * 1000.0 if timing else 0.0
    ratio_opt = None
    if instance.num_facilities <= oracle_max_m:
        opt = _portfolio.brute_force_opt(instance)
        ratio_opt = sol.total_cost / opt.total_cost
    return BenchRow(
        instance=name,
        algo=algo["algo"],
        params=_format_params(algo),
        seed=base_seed,
        facility_cost=sol.facility_cost,
        connection_cost=sol.connection_cost,
        total=sol.total_cost,
        lp_obj=primal.objective,
        ratio_lp=sol.total_cost / primal.objective,
        ratio_opt=ratio_opt,
        trials=trials,
        mean=mean,
        stddev=std,
        wall_ms=wall_ms,
    )


def run_bench(config: dict) -> list[BenchRow]:
    """Execute the configured (instance x algorithm) grid.

    Cells run concurrently, capped by the UFL_THREADS environment
    variable; rows are sorted by (instance, algo, params) before being
    returned so output is deterministic for a fixed config seed (enable
    "timing": false to make the CSV byte-identical across runs).
    """
    base_seed = int(config.get("seed", 0))
    oracle_max_m = int(config.get("oracle_max_m", 0))
    timing = bool(config.get("timing", True))
    instances = [_load_config_instance(spec) for spec in config["instances"]]
    algos = config["algorithms"]

    cells = []
    for name, inst in instances:
        for algo in algos:
            cells.append((name, inst, algo))

    max_workers = int(os.environ.get("UFL_THREADS", "0")) or min(8, os.cpu_count() or 1)
    rows = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [
            pool.submit(_bench_cell, name, inst, algo, base_seed, oracle_max_m, timing)
            for name, inst, algo in cells
        ]
        for fut in futures:
            rows.append(fut.result())
    rows.sort(key=lambda r: (r.instance, r.algo, r.params))
    return rows


def write_csv(rows: list[BenchRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        record = []
        for field in fields(BenchRow):
            value = getattr(row, field.name)
            if value is None:
                record.append("")
            elif isinstance(value, float):
                record.append(repr(value))
            else:
                record.append(str(value))
        writer.writerow(record)
