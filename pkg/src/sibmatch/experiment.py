"""Batch harness: sweep market configurations, run algorithms, tabulate.

For every (n, phi) cell the harness generates ``trials`` instances with
per-instance seeds derived by hashing (base seed, n, phi, trial), runs
each requested algorithm, and aggregates success counts, failure-kind
histograms, and wall-clock times of the successful runs (the timer wraps
the algorithm call only; generation and verification are outside it).

Every heuristic success is verified against the matching stability
predicate before it is counted: ESDA successes must be stable, SDA
successes ABH-stable.  The exact solver rows are produced by the
backtracking oracle and are skipped above ``exact_cap`` children, where
exhaustive search is hopeless.

Reports render to CSV or a markdown table with a fixed column order, so
two runs with the same spec are byte-identical apart from the timing
columns.
"""

from __future__ import annotations

import hashlib
import json
import statistics
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from sibmatch.algorithms import run_da, run_esda, run_sc, run_sda
from sibmatch.market import MarketConfig, gen_instance
from sibmatch.model import Instance
from sibmatch.solver import SearchBudget, find_stable
from sibmatch.stability import is_stable

ALGORITHMS = ("da", "sc", "sda", "esda", "exact-ours", "exact-abh")

__all__ = ["ALGORITHMS", "CellStats", "ExperimentReport", "SweepSpec", "instance_seed", "render_report", "run_sweep"]


@dataclass(frozen=True)
class SweepSpec:
    """One experiment grid: sizes x phis x algorithms, ``trials`` each.

    ``base`` holds MarketConfig overrides applied to every cell (alpha,
    sigma, preference lengths, ...); n, phi, and seed come from the grid.
    """

    sizes: tuple[int, ...]
    phis: tuple[float, ...]
    trials: int = 100
    algorithms: tuple[str, ...] = ("esda",)
    base: dict = field(default_factory=dict)
    seed: int = 0
    exact_cap: int = 60
    exact_max_nodes: int = 500_000
    exact_max_millis: int = 10_000

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for phi in self.phis:
            if not 0.0 <= phi <= 1.0:
                raise ValueError(f"phi {phi} outside [0, 1]")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        for key in self.base:
            if key in ("n", "phi", "seed"):
                raise ValueError(f"base may not override {key!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        known = {
            "sizes", "phis", "trials", "algorithms", "base", "seed",
            "exact_cap", "exact_max_nodes", "exact_max_millis",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown spec keys: {sorted(unknown)}")
        out = dict(data)
        out["sizes"] = tuple(out.get("sizes", ()))
        out["phis"] = tuple(float(p) for p in out.get("phis", ()))
        if "algorithms" in out:
            out["algorithms"] = tuple(out["algorithms"])
        return cls(**out)

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "phis": list(self.phis),
            "trials": self.trials,
            "algorithms": list(self.algorithms),
            "base": dict(self.base),
            "seed": self.seed,
            "exact_cap": self.exact_cap,
            "exact_max_nodes": self.exact_max_nodes,
            "exact_max_millis": self.exact_max_millis,
        }


@dataclass
class CellStats:
    """Aggregated outcomes of one (n, phi, algorithm) cell."""

    successes: int = 0
    trials: int = 0
    times: list[float] = field(default_factory=list)
    failures: Counter = field(default_factory=Counter)
    skipped: bool = False


@dataclass
class ExperimentReport:
    spec: SweepSpec
    cells: dict[tuple[int, float, str], CellStats]


def instance_seed(seed: int, n: int, phi: float, trial: int) -> int:
    """Stable cross-platform per-instance seed."""
    key = f"{seed}|{n}|{phi:.9f}|{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def _market_config(spec_base: dict, n: int, phi: float, seed: int) -> MarketConfig:
    base = dict(spec_base)
    if "capacity_profile" in base:
        base["capacity_profile"] = tuple(base["capacity_profile"])
    return MarketConfig(n=n, phi=phi, seed=seed, **base)


def _run_algorithm(algo: str, instance: Instance, spec: SweepSpec, n: int):
    """One timed run.  Returns (success, elapsed_seconds, failure_kind)."""
    if algo.startswith("exact-"):
        if n > spec.exact_cap:
            return None, 0.0, None
        budget = SearchBudget(spec.exact_max_nodes, spec.exact_max_millis)
        start = time.perf_counter()
        result = find_stable(instance, algo.removeprefix("exact-"), budget)
        elapsed = time.perf_counter() - start
        if result.found:
            return True, elapsed, None
        return False, elapsed, result.status
    if algo == "da":
        start = time.perf_counter()
        run_da(instance)
        return True, time.perf_counter() - start, None
    runner = {"sc": run_sc, "sda": run_sda, "esda": run_esda}[algo]
    start = time.perf_counter()
    outcome = runner(instance)
    elapsed = time.perf_counter() - start
    if outcome.succeeded:
        mode = "abh" if algo == "sda" else "ours"
        if algo in ("sda", "esda") and not is_stable(instance, outcome.matching, mode):
            return False, elapsed, "stability-violation"
        return True, elapsed, None
    return False, elapsed, outcome.failure.kind


def _run_trial(args) -> list[tuple[int, float, str, int, object, float, object]]:
    """Worker: run all requested algorithms on one generated instance."""
    spec_dict, n, phi, trial = args
    spec = SweepSpec.from_dict(spec_dict)
    rows = []
    try:
        cfg = _market_config(spec.base, n, phi, instance_seed(spec.seed, n, phi, trial))
        instance = gen_instance(cfg)
    except Exception as exc:  # config errors propagate, per-instance faults isolate
        raise RuntimeError(f"generation failed for n={n} phi={phi} trial={trial}: {exc}")
    for algo in spec.algorithms:
        try:
            success, elapsed, failure = _run_algorithm(algo, instance, spec, n)
        except Exception:
            success, elapsed, failure = False, 0.0, "harness-error"
        rows.append((n, phi, algo, trial, success, elapsed, failure))
    return rows


def run_sweep(spec: SweepSpec, jobs: int = 1) -> ExperimentReport:
    """Run the whole grid; deterministic given the spec (timings aside)."""
    tasks = [
        (spec.to_dict(), n, phi, trial)
        for n in spec.sizes
        for phi in spec.phis
        for trial in range(spec.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_trial = list(pool.map(_run_trial, tasks, chunksize=4))
    else:
        per_trial = [_run_trial(t) for t in tasks]

    cells: dict[tuple[int, float, str], CellStats] = {}
    for n in spec.sizes:
        for phi in spec.phis:
            for algo in spec.algorithms:
                cells[(n, phi, algo)] = CellStats(
                    skipped=algo.startswith("exact-") and n > spec.exact_cap
                )
    for rows in per_trial:
        for n, phi, algo, _, success, elapsed, failure in rows:
            cell = cells[(n, phi, algo)]
            if success is None:
                continue
            cell.trials += 1
            if success:
                cell.successes += 1
                cell.times.append(elapsed)
            else:
                cell.failures[failure] += 1
    return ExperimentReport(spec=spec, cells=cells)


CSV_COLUMNS = ("n", "phi", "algorithm", "success", "time_mean_s", "time_std_s", "failures")


def _cell_row(key, cell: CellStats) -> list[str]:
    n, phi, algo = key
    if cell.skipped:
        return [str(n), f"{phi:g}", algo, "skipped", "", "", ""]
    mean = f"{statistics.fmean(cell.times):.4f}" if cell.times else "nan"
    std = (
        f"{statistics.stdev(cell.times):.4f}"
        if len(cell.times) > 1
        else ("0.0000" if cell.times else "nan")
    )
    failures = "|".join(f"{k}:{v}" for k, v in sorted(cell.failures.items()))
    return [
        str(n),
        f"{phi:g}",
        algo,
        f"{cell.successes}/{cell.trials}",
        mean,
        std,
        failures,
    ]


def render_report(report: ExperimentReport, fmt: str = "csv") -> str:
    """Render with the fixed column order; one row per grid cell."""
    keys = [
        (n, phi, algo)
        for n in report.spec.sizes
        for phi in report.spec.phis
        for algo in report.spec.algorithms
    ]
    rows = [_cell_row(k, report.cells[k]) for k in keys]
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = ["| " + " | ".join(CSV_COLUMNS) + " |"]
        lines.append("|" + "|".join(" --- " for _ in CSV_COLUMNS) + "|")
        lines += ["| " + " | ".join(cell or "-" for cell in r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def spec_from_json(text: str | bytes) -> SweepSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid spec JSON: {exc}") from exc
    return SweepSpec.from_dict(data)
