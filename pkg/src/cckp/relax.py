"""Exact solver for the problem with the cardinality constraint dropped.

Without the cardinality cap the problem is a classic fractional knapsack
over all components: sort by density, fill until the capacity runs out.
``g_value`` exposes the resulting set function (optimal value restricted
to an item subset), which is monotone submodular and drives both the
greedy solver and the branch-and-bound upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .model import TOL, Instance, Solution

#: A subset of item ids; must not contain duplicates.
SubsetRef = Sequence[str]


@dataclass(frozen=True)
class RankedComponent:
    """A component in the canonical greedy order (density descending)."""

    item_id: str
    component_index: int
    density: float
    weight: float


class ComponentTable:
    """All components of an instance, presorted for greedy filling.

    Ordering is by density descending with ties broken by (item id,
    component index) ascending, so every fill computed from the table is
    deterministic.  The arrays are shared, read-only views used by the
    relaxation, the greedy solver and branch-and-bound.
    """

    def __init__(self, inst: Instance):
        rows = []
        for pos, item in enumerate(inst.items):
            for ci, comp in enumerate(item.components):
                rows.append((-comp.density, item.id, ci, pos, comp.weight, comp.utility))
        rows.sort()
        self.instance = inst
        self.W = float(inst.W)
        self.n_items = inst.n
        self.item_ids: tuple[str, ...] = tuple(item.id for item in inst.items)
        self.id_to_pos = {item.id: pos for pos, item in enumerate(inst.items)}
        self.density = np.array([-r[0] for r in rows])
        self.weight = np.array([r[4] for r in rows])
        self.utility = np.array([r[5] for r in rows])
        self.item_pos = np.array([r[3] for r in rows], dtype=np.intp)
        self.comp_index = np.array([r[2] for r in rows], dtype=np.intp)
        for arr in (self.density, self.weight, self.utility, self.item_pos, self.comp_index):
            arr.setflags(write=False)

    def ranked_components(self) -> list[RankedComponent]:
        return [
            RankedComponent(
                item_id=self.item_ids[self.item_pos[i]],
                component_index=int(self.comp_index[i]),
                density=float(self.density[i]),
                weight=float(self.weight[i]),
            )
            for i in range(len(self.weight))
        ]

    def mask_for(self, subset: Iterable[str]) -> np.ndarray:
        """Boolean item mask for a subset of ids; rejects unknowns and dups."""
        mask = np.zeros(self.n_items, dtype=bool)
        for item_id in subset:
            pos = self.id_to_pos.get(item_id)
            if pos is None:
                raise KeyError(f"unknown item id {item_id!r}")
            if mask[pos]:
                raise ValueError(f"duplicate item id {item_id!r} in subset")
            mask[pos] = True
        return mask

    def fills_for_masks(self, masks: np.ndarray) -> np.ndarray:
        """Greedy per-component fills for a batch of item masks.

        ``masks`` has shape (k, n_items); the result has shape
        (k, n_components) in table order.
        """
        sel = masks[:, self.item_pos]
        w = np.where(sel, self.weight, 0.0)
        prefix = np.cumsum(w, axis=1) - w
        return np.minimum(w, np.clip(self.W - prefix, 0.0, None))

    def values_for_masks(self, masks: np.ndarray) -> np.ndarray:
        """Optimal relaxed objective for each item mask in the batch."""
        fills = self.fills_for_masks(masks)
        # Exact component utility when a component is completely filled,
        # density-prorated otherwise.
        vals = np.where(fills == self.weight, self.utility, self.density * fills)
        return vals.sum(axis=1)


@lru_cache(maxsize=128)
def component_table(inst: Instance) -> ComponentTable:
    return ComponentTable(inst)


def solve_relaxed(inst: Instance, subset: Iterable[str] | None = None) -> Solution:
    """Optimal solution with the cardinality constraint dropped.

    Fills the subset's components in density order until ``W`` is
    exhausted; at most one component ends up partially consumed.  With
    ``subset=None`` all items participate.  The returned cardinality may
    exceed ``C``.
    """
    table = component_table(inst)
    if subset is None:
        mask = np.ones(table.n_items, dtype=bool)
    else:
        mask = table.mask_for(subset)
    fills = table.fills_for_masks(mask[None, :])[0]
    utilization: dict[str, float] = {}
    per_component: dict[tuple[str, int], float] = {}
    for i in np.flatnonzero(fills > 0.0):
        item_id = table.item_ids[table.item_pos[i]]
        per_component[(item_id, int(table.comp_index[i]))] = float(fills[i])
        utilization[item_id] = utilization.get(item_id, 0.0) + float(fills[i])
    return Solution(utilization=utilization, per_component=per_component)


def g_value(inst: Instance, subset: Iterable[str]) -> float:
    """Optimal relaxed objective restricted to ``subset`` (0 for empty)."""
    table = component_table(inst)
    mask = table.mask_for(subset)
    return float(table.values_for_masks(mask[None, :])[0])


def marginal_gain(inst: Instance, subset: Iterable[str], item_id: str) -> float:
    """Increase of :func:`g_value` from adding ``item_id`` to ``subset``."""
    table = component_table(inst)
    mask = table.mask_for(subset)
    pos = table.id_to_pos.get(item_id)
    if pos is None:
        raise KeyError(f"unknown item id {item_id!r}")
    if mask[pos]:
        raise ValueError(f"item {item_id!r} already in subset")
    masks = np.vstack([mask, mask])
    masks[1, pos] = True
    before, after = table.values_for_masks(masks)
    return float(after - before)
