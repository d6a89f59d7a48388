"""Three-phase online algorithm for the random-order arrival model.

Items arrive one at a time; decisions are irrevocable.  With phase
boundaries ``c`` and ``d`` (fractions of ``n``) the algorithm first only
observes total utilities (sampling), then takes at most one whole item
beating the best sampled utility (secretary), and finally re-solves the
offline problem on every prefix and takes a ``beta``-scaled share of the
newcomer's allocation while capacity lasts (knapsack phase).

``bound_objective`` evaluates the closed-form lower bound on the
asymptotic expected ratio per unit of sub-solver guarantee ``alpha``;
``preset_params`` returns the published parameter choices for the small,
large, and general cardinality regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .model import TOL, Instance, Solution

_FLOOR_GUARD = 1e-9


@dataclass(frozen=True)
class OnlineParams:
    """Phase fractions ``0 <= c <= d <= 1`` and take-scale ``beta`` in (0,1)."""

    c: float
    d: float
    beta: float
    preset: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.c <= self.d <= 1.0:
            raise ValueError(f"need 0 <= c <= d <= 1, got c={self.c}, d={self.d}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"need 0 < beta < 1, got beta={self.beta}")


@dataclass(frozen=True)
class OfflineSolver:
    """A deterministic, permutation-invariant offline solver with guarantee
    ``alpha``: its objective is at least ``alpha`` times the optimum."""

    name: str
    alpha: float
    solve_fn: Callable[[Instance], Solution]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def solve(self, inst: Instance) -> Solution:
        sol = self._cache.get(inst)
        if sol is None:
            sol = self.solve_fn(inst)
            self._cache[inst] = sol
        return sol


def make_solver(kind: str, eps: float | None = None) -> OfflineSolver:
    """Build the offline sub-solver: ``exact``, ``greedy`` or ``fptas``."""
    from . import exact, fptas, greedy

    if kind == "exact":
        return OfflineSolver("exact", 1.0, exact.exact_bnb)
    if kind == "greedy":
        return OfflineSolver(
            "greedy", 1.0 - math.exp(-1.0), lambda i: greedy.greedy_cardinality(i)[0]
        )
    if kind == "fptas":
        if eps is None:
            raise ValueError("the fptas solver needs eps")
        return OfflineSolver(
            f"fptas(eps={eps:g})", 1.0 - eps, lambda i: fptas.fptas_solve(i, eps)
        )
    raise ValueError(f"unknown solver kind {kind!r}")


@dataclass(frozen=True)
class StepRecord:
    step: int
    phase: str
    item_id: str
    solver_x: float | None
    taken: float
    weight_left: float
    cardinality_left: int
    tail: bool = False


@dataclass(frozen=True)
class OnlineTrace:
    """Per-arrival record of one run; phases split at ``sampling_end`` and
    ``secretary_end`` (inclusive step indices)."""

    sampling_end: int
    secretary_end: int
    steps: tuple[StepRecord, ...]


def phase_boundaries(params: OnlineParams, n: int) -> tuple[int, int]:
    """Last sampling step ``floor(c n)`` and last secretary step ``floor(d n)``."""
    cn = int(math.floor(params.c * n + _FLOOR_GUARD))
    dn = int(math.floor(params.d * n + _FLOOR_GUARD))
    return cn, dn


def observe_phases(
    inst: Instance, arrival: Sequence[str], cn: int, dn: int
) -> tuple[float, str | None, int | None]:
    """Replay the sampling and secretary phases only.

    Returns the sampling threshold and the id/step of the (single)
    secretary-phase take, or ``None`` when nothing beats the threshold.
    Comparisons are strict, so total-utility ties never trigger a take.
    """
    r_star = 0.0
    for l in range(1, cn + 1):
        r_star = max(r_star, inst.item(arrival[l - 1]).total_utility)
    for l in range(cn + 1, dn + 1):
        item = inst.item(arrival[l - 1])
        if item.total_utility > r_star:
            return r_star, item.id, l
    return r_star, None, None


def _sub_instance(inst: Instance, ids: Sequence[str]) -> Instance:
    ordered = sorted(ids)
    return Instance(
        name=f"{inst.name}#prefix{len(ordered)}",
        W=inst.W,
        C=inst.C,
        items=tuple(inst.item(j) for j in ordered),
    )


def run_online(
    inst: Instance,
    arrival: Sequence[str],
    params: OnlineParams,
    solver: OfflineSolver,
    *,
    greedy_tail: bool = False,
) -> tuple[Solution, OnlineTrace]:
    """Run one arrival sequence through the three phases.

    ``arrival`` must be a permutation of the instance's item ids.  The
    sub-solver always sees the arrived item set sorted by id, so its
    answer depends on the set only.  With ``greedy_tail`` the final
    arrival is filled up to the residual capacity instead of the scaled
    share (off by default).  The returned solution is always feasible.
    """
    ids = sorted(item.id for item in inst.items)
    if sorted(arrival) != ids:
        raise ValueError("arrival order is not a permutation of the item ids")
    n = inst.n
    cn, dn = phase_boundaries(params, n)
    _, picked_id, picked_step = observe_phases(inst, arrival, cn, dn)

    w_left = float(inst.W)
    c_left = inst.C
    utilization: dict[str, float] = {}
    steps: list[StepRecord] = []
    for l in range(1, dn + 1):
        item_id = arrival[l - 1]
        taken = 0.0
        if l == picked_step:
            taken = inst.item(item_id).total_weight
            utilization[item_id] = taken
            w_left -= min(taken, w_left)
            c_left -= 1
        phase = "sampling" if l <= cn else "secretary"
        steps.append(StepRecord(l, phase, item_id, None, taken, w_left, c_left))
    assert picked_id is None or picked_id in utilization

    for l in range(dn + 1, n + 1):
        item_id = arrival[l - 1]
        prefix_solution = solver.solve(_sub_instance(inst, arrival[:l]))
        solver_x = float(prefix_solution.utilization.get(item_id, 0.0))
        taken = 0.0
        tail = False
        if greedy_tail and l == n:
            if w_left > TOL and c_left >= 1:
                taken = min(inst.item(item_id).total_weight, w_left)
                tail = True
        elif solver_x > 0.0 and w_left > TOL and c_left >= 1:
            taken = min(params.beta * solver_x, w_left)
        if taken > 0.0:
            utilization[item_id] = taken
            w_left -= taken
            c_left -= 1
        steps.append(
            StepRecord(l, "knapsack", item_id, solver_x, taken, w_left, c_left, tail)
        )
    return Solution(utilization=utilization), OnlineTrace(cn, dn, tuple(steps))


def bound_objective(
    c: float, d: float, beta: float, C: float, variant: str = "general"
) -> float:
    """Closed-form asymptotic lower bound on the expected ratio per unit
    ``alpha`` (vanishing terms excluded).

    ``C`` may be ``math.inf``, which drops the secretary term.  ``c`` must
    be positive (the secretary term is undefined at 0) and at most ``d``.
    The ``large_C`` variant applies when the cardinality capacity cannot
    bind during the knapsack phase (``C >= d*n``).
    """
    if not 0.0 < c <= d <= 1.0:
        raise ValueError(f"need 0 < c <= d <= 1, got c={c}, d={d}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"need 0 < beta < 1, got beta={beta}")
    if C < 1:
        raise ValueError(f"need C >= 1, got {C}")
    secretary = 0.0 if math.isinf(C) else (c / C) * math.log(d / c)
    key = variant.lower()
    if key == "general":
        knapsack = (1.0 - d) * (2.0 - beta) / (1.0 - beta) + math.log(d) / (1.0 - beta)
    elif key == "large_c":
        knapsack = (1.0 - d) / (1.0 - beta) + beta * math.log(d) / (1.0 - beta)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return secretary + (c / d) * beta * knapsack


#: Published parameter choices: (c, d, beta) by cardinality regime.
PRESETS = {
    "small-cardinality": OnlineParams(0.3775, 0.915, 0.79, "small-cardinality"),
    "large-cardinality": OnlineParams(0.431, 0.431, 0.431, "large-cardinality"),
    "general": OnlineParams(0.695, 0.695, 0.560, "general"),
}


def preset_params(C: int, n: int) -> OnlineParams:
    """Pick the parameter preset for the given capacities.

    ``C = 2`` gets the small-cardinality tuning, ``C >= 0.569 n`` the
    large-cardinality one, anything else the general tuning.
    """
    if C < 1 or n < 1:
        raise ValueError(f"need C >= 1 and n >= 1, got C={C}, n={n}")
    if C == 2:
        return PRESETS["small-cardinality"]
    if C >= 0.569 * n:
        return PRESETS["large-cardinality"]
    return PRESETS["general"]
