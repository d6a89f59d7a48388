"""Domain types for the continuous knapsack problem with a cardinality cap.

An instance consists of items with concave piecewise-linear utility
functions, described by a list of linear segments ("components"), a weight
capacity ``W`` shared by all items, and a cap ``C`` on the number of items
with positive utilization.  Utilization is measured in weight units: an
item consuming ``x`` weight units fills its components in list order.

All types are immutable after construction; every operation here is a pure
function of its inputs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import ValidationError

log = logging.getLogger(__name__)

#: Absolute tolerance for all feasibility and density comparisons.
TOL = 1e-9


def _require_positive_finite(value: float, what: str) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{what} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Component:
    """One linear segment of an item's utility function.

    ``weight`` is the segment's capacity in the same units as the knapsack
    capacity ``W``; ``utility`` is the total utility gained by consuming
    the whole segment.  The utility per weight unit is ``density``.
    """

    weight: float
    utility: float

    def __post_init__(self) -> None:
        _require_positive_finite(self.weight, "component weight")
        _require_positive_finite(self.utility, "component utility")

    @property
    def density(self) -> float:
        return self.utility / self.weight


@dataclass(frozen=True)
class Item:
    """An item with a concave piecewise-linear utility function.

    Components fill in list order, so their densities must be
    (strictly, up to ``TOL``) decreasing; ``validate_instance`` checks
    this.
    """

    id: str
    components: tuple[Component, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValidationError(f"item {self.id!r} has no components")

    @property
    def total_weight(self) -> float:
        """Item capacity: the sum of component weights."""
        return float(sum(c.weight for c in self.components))

    @property
    def total_utility(self) -> float:
        """Utility of consuming the whole item."""
        return float(sum(c.utility for c in self.components))

    @cached_property
    def _breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        # Cumulative (weight, utility) pairs, starting at the origin.
        w = np.concatenate([[0.0], np.cumsum([c.weight for c in self.components])])
        u = np.concatenate([[0.0], np.cumsum([c.utility for c in self.components])])
        return w, u


@dataclass(frozen=True)
class Instance:
    """A problem instance: items plus the weight and cardinality capacities."""

    name: str
    W: float
    C: int
    items: tuple[Item, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        """Total number of components across all items."""
        return sum(len(item.components) for item in self.items)

    @cached_property
    def items_by_id(self) -> Mapping[str, Item]:
        return {item.id: item for item in self.items}

    def item(self, item_id: str) -> Item:
        try:
            return self.items_by_id[item_id]
        except KeyError:
            raise KeyError(f"unknown item id {item_id!r}") from None


@dataclass(frozen=True)
class Solution:
    """Per-item utilization in weight units.

    ``per_component`` optionally records how the utilization splits across
    an item's components (filled by :func:`canonicalize`); when present,
    consumption is sequential: a later component is positive only if all
    earlier components of the same item are full.
    """

    utilization: Mapping[str, float]
    per_component: Mapping[tuple[str, int], float] | None = None

    def support(self, tol: float = TOL) -> tuple[str, ...]:
        """Ids of items with utilization above ``tol``."""
        return tuple(j for j, x in self.utilization.items() if x > tol)


@dataclass(frozen=True)
class SolutionStats:
    """Objective and feasibility summary of a solution against an instance."""

    objective: float
    weight_used: float
    cardinality_used: int
    partial_component_count: int
    feasible: bool
    violations: tuple[str, ...] = field(default_factory=tuple)


def eval_utility(item: Item, x: float) -> float:
    """Utility of consuming ``x`` weight units of ``item``.

    Components fill in list order; the result is piecewise linear, concave
    and nondecreasing in ``x``.  ``x`` may exceed the item capacity by at
    most ``TOL`` (it is clamped); anything beyond that is a domain error.
    """
    if x < -TOL:
        raise ValueError(f"negative utilization {x!r} for item {item.id!r}")
    cap = item.total_weight
    if x > cap + TOL:
        raise ValueError(
            f"utilization {x!r} exceeds capacity {cap!r} of item {item.id!r}"
        )
    x = min(max(x, 0.0), cap)
    total = 0.0
    for comp in item.components:
        if x >= comp.weight:
            total += comp.utility
            x -= comp.weight
        else:
            if x > 0.0:
                total += comp.density * x
            break
    return total


def eval_utility_many(item: Item, xs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`eval_utility` for utilizations already in range."""
    w, u = item._breakpoints
    return np.interp(np.clip(xs, 0.0, w[-1]), w, u)


def validate_instance(inst: Instance) -> Instance:
    """Check instance invariants, truncating over-wide items to ``W``.

    Raises :class:`ValidationError` when densities are not strictly
    decreasing within an item (beyond ``TOL``), when item ids repeat, or
    when the capacities are nonsensical.  Items whose total weight exceeds
    ``W`` are cut back (trailing components dropped or shortened at
    constant density) and a warning is logged; the instance is otherwise
    returned unchanged.  Ties between total utilities are permitted: all
    comparisons elsewhere break them deterministically by item id.
    """
    _require_positive_finite(inst.W, "knapsack capacity W")
    if inst.C < 1:
        raise ValidationError(f"cardinality capacity C must be >= 1, got {inst.C}")
    if not inst.items:
        raise ValidationError("instance has no items")
    seen: set[str] = set()
    for item in inst.items:
        if item.id in seen:
            raise ValidationError(f"duplicate item id {item.id!r}")
        seen.add(item.id)
        for i in range(1, len(item.components)):
            lo, hi = item.components[i], item.components[i - 1]
            if lo.density > hi.density + TOL:
                raise ValidationError(
                    f"item {item.id!r}: densities must be decreasing, but "
                    f"component {i} has density {lo.density!r} > {hi.density!r}"
                )

    new_items = []
    truncated = []
    for item in inst.items:
        if item.total_weight <= inst.W + TOL:
            new_items.append(item)
            continue
        kept: list[Component] = []
        budget = inst.W
        for comp in item.components:
            if budget <= TOL:
                break
            if comp.weight <= budget:
                kept.append(comp)
                budget -= comp.weight
            else:
                # Shorten the boundary component at constant density.
                kept.append(Component(weight=budget, utility=comp.density * budget))
                budget = 0.0
        new_items.append(replace(item, components=tuple(kept)))
        truncated.append(item.id)
    if truncated:
        log.warning(
            "instance %s: truncated items %s to the knapsack capacity W=%s",
            inst.name,
            truncated,
            inst.W,
        )
        return replace(inst, items=tuple(new_items))
    return inst


def canonicalize(inst: Instance, sol: Solution) -> Solution:
    """Fill ``per_component`` by consuming each item's components in order.

    Requires the solution to be feasible at item level (``0 <= x_j`` and
    ``x_j`` at most the item capacity, up to ``TOL``).
    """
    per_component: dict[tuple[str, int], float] = {}
    utilization: dict[str, float] = {}
    for item_id, x in sol.utilization.items():
        item = inst.item(item_id)
        if x < -TOL or x > item.total_weight + TOL:
            raise ValueError(
                f"utilization {x!r} of item {item_id!r} out of [0, capacity]"
            )
        x = min(max(x, 0.0), item.total_weight)
        utilization[item_id] = x
        rest = x
        for i, comp in enumerate(item.components):
            take = min(comp.weight, rest)
            if take <= 0.0:
                break
            per_component[(item_id, i)] = take
            rest -= take
    return Solution(utilization=utilization, per_component=per_component)


def objective(inst: Instance, sol: Solution) -> SolutionStats:
    """Score a solution: objective value plus feasibility bookkeeping.

    Infeasibility does not raise; it is reported through ``feasible`` and
    ``violations``.  Utility is evaluated with utilization clamped to the
    item capacity.  Unknown item ids do raise.
    """
    violations: list[str] = []
    total = 0.0
    weight_used = 0.0
    cardinality = 0
    partials = 0
    for item_id, x in sol.utilization.items():
        item = inst.item(item_id)
        if x < -TOL:
            violations.append(f"item {item_id}: negative utilization {x}")
        cap = item.total_weight
        if x > cap + TOL:
            violations.append(f"item {item_id}: utilization {x} > capacity {cap}")
        clamped = min(max(x, 0.0), cap)
        weight_used += x
        if x > TOL:
            cardinality += 1
        rest = clamped
        for comp in item.components:
            take = min(comp.weight, rest)
            if take <= 0.0:
                break
            total += comp.utility if take == comp.weight else comp.density * take
            if TOL < take < comp.weight - TOL:
                partials += 1
            rest -= take
    if weight_used > inst.W + TOL:
        violations.append(f"weight used {weight_used} > W={inst.W}")
    if cardinality > inst.C:
        violations.append(f"{cardinality} items used > C={inst.C}")
    return SolutionStats(
        objective=total,
        weight_used=weight_used,
        cardinality_used=cardinality,
        partial_component_count=partials,
        feasible=not violations,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    return {
        "name": inst.name,
        "W": inst.W,
        "C": inst.C,
        "items": [
            {
                "id": item.id,
                "components": [
                    {"weight": c.weight, "utility": c.utility}
                    for c in item.components
                ],
            }
            for item in inst.items
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        items = tuple(
            Item(
                id=str(entry["id"]),
                components=tuple(
                    Component(
                        weight=float(c["weight"]), utility=float(c["utility"])
                    )
                    for c in entry["components"]
                ),
            )
            for entry in data["items"]
        )
        return Instance(
            name=str(data["name"]), W=float(data["W"]), C=int(data["C"]), items=items
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance data: {exc}") from exc


def save_instance(inst: Instance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def solution_to_dict(sol: Solution, instance_name: str) -> dict:
    return {"instance": instance_name, "utilization": dict(sol.utilization)}


def solution_from_dict(data: dict) -> Solution:
    return Solution(
        utilization={str(j): float(x) for j, x in data["utilization"].items()}
    )


def save_solution(sol: Solution, instance_name: str, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(solution_to_dict(sol, instance_name), fh, indent=2)
        fh.write("\n")


def load_solution(path: str) -> Solution:
    with open(path, encoding="utf-8") as fh:
        return solution_from_dict(json.load(fh))
