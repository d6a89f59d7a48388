"""Experiment driver: ratio sweeps, Monte-Carlo event rates, CSV reports.

Offline sweeps solve each instance with the configured algorithms and
report the ratio against the exact optimum; online sweeps rerun the
three-phase algorithm over seeded random arrival orders (20 per instance
by default) and aggregate the empirical ratios.  Everything is
deterministic given the config and master seed: the RNG for (instance
``i``, permutation ``k``) is ``default_rng(SeedSequence([master_seed, i,
k]))``, and the Monte-Carlo estimators use ``SeedSequence([seed, t])``
per trial.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceLimitError
from .exact import exact_bnb, exact_enumerate
from .fptas import fptas_solve
from .gen import GenConfig, generate
from .greedy import greedy_cardinality
from .model import Instance, Solution, load_instance, objective
from .online import (
    OfflineSolver,
    OnlineParams,
    OnlineTrace,
    make_solver,
    observe_phases,
    phase_boundaries,
    preset_params,
    run_online,
)

_BETA_TOL = 1e-9


@dataclass(frozen=True)
class AlgoSpec:
    """An offline algorithm reference: name plus its parameters."""

    algo: str
    eps: float | None = None

    @property
    def label(self) -> str:
        if self.algo == "fptas":
            return f"fptas(eps={self.eps:g})"
        return self.algo

    def solve(self, inst: Instance) -> Solution:
        if self.algo == "greedy":
            return greedy_cardinality(inst)[0]
        if self.algo == "fptas":
            if self.eps is None:
                raise ValueError("fptas needs eps")
            return fptas_solve(inst, self.eps)
        if self.algo == "exact-enum":
            return exact_enumerate(inst)
        if self.algo == "exact-bnb":
            return exact_bnb(inst)
        raise ValueError(f"unknown algorithm {self.algo!r}")


@dataclass(frozen=True)
class GenSweep:
    """Cartesian generation sweep over (n, cardinality rule, seed)."""

    dataset: str
    n_values: tuple[int, ...]
    cards: tuple[int | str, ...]
    seeds: tuple[int, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str  # "offline" | "online"
    files: tuple[str, ...] = ()
    sweep: GenSweep | None = None
    algorithms: tuple[AlgoSpec, ...] = ()
    solver: AlgoSpec = AlgoSpec("greedy")
    params: OnlineParams | str = "auto"
    permutations: int = 20
    master_seed: int = 0
    record_runtime: bool = True
    greedy_tail: bool = False

    def to_dict(self) -> dict:
        out: dict = {"mode": self.mode, "master_seed": self.master_seed,
                     "record_runtime": self.record_runtime}
        if self.files:
            out["instances"] = {"files": list(self.files)}
        if self.sweep is not None:
            out["instances"] = {
                "dataset": self.sweep.dataset,
                "n": list(self.sweep.n_values),
                "card": list(self.sweep.cards),
                "seeds": list(self.sweep.seeds),
            }
        if self.mode == "offline":
            out["algorithms"] = [
                {"algo": a.algo, **({"eps": a.eps} if a.eps is not None else {})}
                for a in self.algorithms
            ]
        else:
            out["solver"] = {
                "algo": self.solver.algo,
                **({"eps": self.solver.eps} if self.solver.eps is not None else {}),
            }
            out["permutations"] = self.permutations
            out["greedy_tail"] = self.greedy_tail
            if isinstance(self.params, str):
                out["params"] = self.params
            else:
                out["params"] = {
                    "c": self.params.c,
                    "d": self.params.d,
                    "beta": self.params.beta,
                }
        return out


def config_from_dict(data: dict) -> ExperimentConfig:
    """Parse the documented JSON config schema (see README)."""
    mode = data.get("mode", "offline")
    source = data.get("instances", {})
    files: tuple[str, ...] = tuple(source.get("files", ()))
    sweep = None
    if "dataset" in source:
        sweep = GenSweep(
            dataset=source["dataset"],
            n_values=tuple(int(v) for v in source["n"]),
            cards=tuple(source["card"]),
            seeds=tuple(int(s) for s in source["seeds"]),
        )
    def algo_spec(entry: dict) -> AlgoSpec:
        return AlgoSpec(entry["algo"], entry.get("eps"))

    params: OnlineParams | str = "auto"
    raw_params = data.get("params", "auto")
    if isinstance(raw_params, dict):
        params = OnlineParams(
            c=float(raw_params["c"]),
            d=float(raw_params["d"]),
            beta=float(raw_params["beta"]),
        )
    return ExperimentConfig(
        mode=mode,
        files=files,
        sweep=sweep,
        algorithms=tuple(algo_spec(e) for e in data.get("algorithms", ())),
        solver=algo_spec(data["solver"]) if "solver" in data else AlgoSpec("greedy"),
        params=params,
        permutations=int(data.get("permutations", 20)),
        master_seed=int(data.get("master_seed", 0)),
        record_runtime=bool(data.get("record_runtime", True)),
        greedy_tail=bool(data.get("greedy_tail", False)),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def resolve_instances(cfg: ExperimentConfig) -> list[tuple[Instance, int]]:
    """Materialize the instance list as (instance, governing seed) pairs."""
    out: list[tuple[Instance, int]] = []
    for path in cfg.files:
        out.append((load_instance(path), cfg.master_seed))
    if cfg.sweep is not None:
        for n in cfg.sweep.n_values:
            for card in cfg.sweep.cards:
                for seed in cfg.sweep.seeds:
                    inst = generate(GenConfig(cfg.sweep.dataset, n, card, seed))
                    out.append((inst, seed))
    return out


@dataclass(frozen=True)
class ReportRow:
    """One experiment record; aggregate rows additionally carry the
    standard error and the count of zero-utility runs."""

    instance: str
    n: int
    C: int
    algorithm: str
    params: str
    objective: float | None
    optimum: float | None
    ratio: float | None
    runtime_ms: float | None
    seed: int
    perm_index: int | None = None
    ratio_stderr: float | None = None
    zero_utility_runs: int | None = None
    error: str | None = None


CSV_COLUMNS = (
    "instance", "n", "C", "algorithm", "params", "objective", "optimum",
    "ratio", "runtime_ms", "seed", "perm_index", "ratio_stderr",
    "zero_utility_runs", "error",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(rows: Sequence[ReportRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in CSV_COLUMNS])


def read_report(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def aggregate_rows(rows: Iterable[ReportRow]) -> list[dict]:
    """Plot-ready aggregation keyed by (n, C, algorithm): mean ratio and a
    90% normal-approximation confidence interval over per-run rows."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        if row.error or row.ratio is None or row.zero_utility_runs is not None:
            continue  # skip error rows and aggregate rows
        groups.setdefault((row.n, row.C, row.algorithm), []).append(row.ratio)
    out = []
    for (n, C, algorithm), ratios in sorted(groups.items()):
        arr = np.asarray(ratios)
        mean = float(arr.mean())
        stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        out.append(
            {
                "n": n,
                "C": C,
                "algorithm": algorithm,
                "runs": arr.size,
                "mean_ratio": mean,
                "ci90_lo": mean - 1.645 * stderr,
                "ci90_hi": mean + 1.645 * stderr,
            }
        )
    return out


def write_aggregate(rows: Sequence[ReportRow], path: str | Path) -> None:
    aggs = aggregate_rows(rows)
    cols = ("n", "C", "algorithm", "runs", "mean_ratio", "ci90_lo", "ci90_hi")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for agg in aggs:
            writer.writerow([_fmt(agg[c]) for c in cols])


def write_outputs(cfg: ExperimentConfig, rows: Sequence[ReportRow], out: str | Path) -> None:
    """Write the row CSV plus the aggregate CSV and the config sidecar."""
    out = Path(out)
    write_report(rows, out)
    write_aggregate(rows, out.with_suffix(".agg.csv"))
    with open(out.with_suffix(".config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")


def _elapsed_ms(cfg: ExperimentConfig, t0: float) -> float | None:
    return (time.perf_counter() - t0) * 1e3 if cfg.record_runtime else None


def _optimum(inst: Instance) -> tuple[float | None, str | None]:
    try:
        best = exact_bnb(inst)
    except ResourceLimitError as exc:
        return None, f"oracle-budget: {exc}"
    return objective(inst, best).objective, None


def run_offline_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    """Solve every instance with every configured algorithm.

    The optimum denominator always comes from branch-and-bound; budget
    overruns become error rows and the run continues.
    """
    rows: list[ReportRow] = []
    for inst, seed in resolve_instances(cfg):
        optimum, err = _optimum(inst)
        for spec in cfg.algorithms:
            if err is not None:
                rows.append(ReportRow(inst.name, inst.n, inst.C, spec.label, "",
                                      None, None, None, None, seed, error=err))
                continue
            t0 = time.perf_counter()
            try:
                sol = spec.solve(inst)
            except ResourceLimitError as exc:
                rows.append(ReportRow(inst.name, inst.n, inst.C, spec.label, "",
                                      None, optimum, None, None, seed,
                                      error=f"solver-budget: {exc}"))
                continue
            elapsed = _elapsed_ms(cfg, t0)
            stats = objective(inst, sol)
            error = None if stats.feasible else "infeasible: " + "; ".join(stats.violations)
            ratio = stats.objective / optimum if optimum else None
            rows.append(ReportRow(inst.name, inst.n, inst.C, spec.label, "",
                                  stats.objective, optimum, ratio, elapsed, seed,
                                  error=error))
    return rows


def check_run_feasibility(
    inst: Instance, sol: Solution, trace: OnlineTrace, params: OnlineParams
) -> list[str]:
    """Feasibility violations of one online run (empty when clean).

    Checks the weight, cardinality, and per-item capacity limits plus the
    scaled-take cap of every knapsack-phase step (tail takes exempt).
    """
    stats = objective(inst, sol)
    violations = list(stats.violations)
    for step in trace.steps:
        if step.phase != "knapsack" or step.tail:
            continue
        if step.taken > params.beta * (step.solver_x or 0.0) + _BETA_TOL:
            violations.append(
                f"step {step.step}: took {step.taken} > beta * {step.solver_x}"
            )
    return violations


def _permutation(inst: Instance, master_seed: int, inst_index: int, k: int) -> list[str]:
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, inst_index, k]))
    ids = sorted(item.id for item in inst.items)
    return [ids[i] for i in rng.permutation(len(ids))]


def run_online_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    """Per instance: K seeded arrival orders, one row each, plus an
    aggregate row carrying the mean ratio, its standard error, and the
    number of zero-utility runs."""
    rows: list[ReportRow] = []
    for inst_index, (inst, seed) in enumerate(resolve_instances(cfg)):
        optimum, err = _optimum(inst)
        if err is not None:
            rows.append(ReportRow(inst.name, inst.n, inst.C, "online", "",
                                  None, None, None, None, seed, error=err))
            continue
        params = (
            preset_params(inst.C, inst.n) if cfg.params == "auto" else cfg.params
        )
        solver = make_solver(cfg.solver.algo, cfg.solver.eps)
        param_str = (
            f"c={params.c:g},d={params.d:g},beta={params.beta:g},"
            f"solver={solver.name},alpha={solver.alpha:.6f}"
        )
        label = f"online[{solver.name}]"
        ratios: list[float] = []
        objectives: list[float] = []
        zero_runs = 0
        total_ms = 0.0
        for k in range(cfg.permutations):
            arrival = _permutation(inst, cfg.master_seed, inst_index, k)
            t0 = time.perf_counter()
            sol, trace = run_online(
                inst, arrival, params, solver, greedy_tail=cfg.greedy_tail
            )
            elapsed = _elapsed_ms(cfg, t0)
            total_ms += elapsed or 0.0
            violations = check_run_feasibility(inst, sol, trace, params)
            value = objective(inst, sol).objective
            ratio = value / optimum if optimum else None
            ratios.append(ratio)
            objectives.append(value)
            if value == 0.0:
                zero_runs += 1
            rows.append(ReportRow(
                inst.name, inst.n, inst.C, label, param_str, value, optimum,
                ratio, elapsed, seed, perm_index=k,
                error="; ".join(violations) if violations else None,
            ))
        arr = np.asarray(ratios)
        stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        rows.append(ReportRow(
            inst.name, inst.n, inst.C, label, param_str,
            float(np.mean(objectives)), optimum, float(arr.mean()),
            total_ms if cfg.record_runtime else None, cfg.master_seed,
            ratio_stderr=stderr, zero_utility_runs=zero_runs,
        ))
    return rows


def run_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    if cfg.mode == "offline":
        return run_offline_experiment(cfg)
    if cfg.mode == "online":
        return run_online_experiment(cfg)
    raise ValueError(f"unknown experiment mode {cfg.mode!r}")


@dataclass(frozen=True)
class EventRates:
    """Monte-Carlo rates of the two phase-transition events."""

    xi_rate: float
    secretary_top_pick_rate: float


def estimate_event_probabilities(
    inst: Instance, params: OnlineParams, trials: int, seed: int
) -> EventRates:
    """Estimate, over seeded random arrival orders, how often the
    secretary phase takes nothing (so the knapsack phase starts with full
    capacities) and how often it takes the globally best item.

    Only the first two phases are simulated; both events are decided
    before the knapsack phase starts.
    """
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    cn, dn = phase_boundaries(params, inst.n)
    ids = sorted(item.id for item in inst.items)
    best_id = min(ids, key=lambda j: (-inst.item(j).total_utility, j))
    nothing = 0
    top_picked = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        arrival = [ids[i] for i in rng.permutation(len(ids))]
        _, picked, _ = observe_phases(inst, arrival, cn, dn)
        if picked is None:
            nothing += 1
        if picked == best_id:
            top_picked += 1
    return EventRates(
        xi_rate=nothing / trials, secretary_top_pick_rate=top_picked / trials
    )
