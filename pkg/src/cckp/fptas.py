"""Dynamic-programming approximation scheme with a discretized value axis.

For each designated item ``j`` the solver considers solutions where only
``j`` may end on a partially consumed component.  Every other item is
represented by "elements": all-or-nothing prefixes of its component list.
A table ``d[l][v]`` holds the minimal weight needed to reach discretized
value level ``v`` using ``l`` elements (at most one element per item);
afterwards each surviving state is extended with a continuous tail of
``j``.  Rounding element values down to a grid of step
``K = eps * max_element_value / C`` loses less than ``eps * OPT`` in
total, which yields the ``1 - eps`` guarantee.

:func:`dp_exact_small` runs the same recursion on exact (integer-scaled)
values instead of a lossy grid, giving a second, independent exact oracle
for instances with small integral utilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError
from .model import Instance, Item, Solution, eval_utility, eval_utility_many

_SNAP = 1e-9


@dataclass(frozen=True)
class Element:
    """Full utilization of the first ``prefix_len`` components of an item."""

    item_id: str
    prefix_len: int
    weight: float
    value: float


@dataclass(frozen=True)
class ValueGrid:
    """Discretization of the value axis: step ``K`` and level count."""

    step: float
    levels: int


def _grid_level(value: float, step: float) -> int:
    """Round ``value/step`` down, snapping to the nearest integer when the
    quotient is within floating-point noise of it."""
    q = value / step
    r = round(q)
    if abs(q - r) <= _SNAP * max(1.0, abs(r)):
        return int(r)
    return int(math.floor(q))


def item_elements(item: Item) -> list[Element]:
    """The component prefixes of one item, in increasing prefix length."""
    out = []
    weight = 0.0
    value = 0.0
    for k, comp in enumerate(item.components, start=1):
        weight += comp.weight
        value += comp.utility
        out.append(Element(item.id, k, weight, value))
    return out


def value_grid(inst: Instance, epsilon: float) -> ValueGrid:
    """Grid used by :func:`fptas_solve`: ``K = eps * mu_max / C`` where
    ``mu_max`` is the largest element value across all items."""
    mu_max = max(item.total_utility for item in inst.items)
    step = epsilon * mu_max / inst.C
    total = sum(el.value for item in inst.items for el in item_elements(item))
    return ValueGrid(step=step, levels=int(math.ceil(total / step)) + 1)


class _ItemBlock:
    """Per-item element data for the DP, levels already on the grid."""

    def __init__(self, item: Item, step: float):
        els = item_elements(item)
        self.item_id = item.id
        self.weights = np.array([e.weight for e in els])
        self.values = np.array([e.value for e in els])
        self.levels = [_grid_level(e.value, step) for e in els]


def _run_dp(
    blocks: list[_ItemBlock], W: float, C: int
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Fill the min-weight table over all blocks.

    Returns the final ``(C+1, levels)`` table plus the table snapshot at
    the start of each block (needed to walk solutions back).  Elements of
    one item exclude each other, so every include-transition reads the
    snapshot taken before the item's block; skipping carries the running
    table forward unchanged.
    """
    levels = 1 + sum(max(b.levels) for b in blocks) if blocks else 1
    sentinel = W + 1.0
    d = np.full((C + 1, levels), sentinel)
    d[0, 0] = 0.0
    starts: list[np.ndarray] = []
    for block in blocks:
        start = d.copy()
        starts.append(start)
        for w_e, v_e in zip(block.weights, block.levels):
            if v_e >= levels:
                continue
            for l in range(1, C + 1):
                src = start[l - 1, : levels - v_e] + w_e
                np.minimum(d[l, v_e:], src, out=d[l, v_e:])
    return d, starts


def _walk_back(
    final: np.ndarray,
    starts: list[np.ndarray],
    blocks: list[_ItemBlock],
    l: int,
    v: int,
) -> tuple[dict[str, float], float]:
    """Recover a min-weight solution for table state ``(l, v)``.

    Returns the per-item utilization of the chosen elements and their
    exact (unrounded) total value.
    """
    utilization: dict[str, float] = {}
    exact_total = 0.0
    current = final[l, v]
    for b in range(len(blocks) - 1, -1, -1):
        start = starts[b]
        if start[l, v] == current:
            continue
        block = blocks[b]
        for w_e, v_e, mu_e in zip(block.weights, block.levels, block.values):
            if l >= 1 and v_e <= v and start[l - 1, v - v_e] + w_e == current:
                utilization[block.item_id] = float(w_e)
                exact_total += float(mu_e)
                l -= 1
                v -= v_e
                current = start[l, v]
                break
        else:
            raise AssertionError("inconsistent DP table during walk-back")
    return utilization, exact_total


def _solve_with_step(inst: Instance, step: float) -> Solution:
    """Run the per-item DP + continuous extension for a given grid step."""
    W = float(inst.W)
    C = inst.C
    items = sorted(inst.items, key=lambda it: it.id)
    all_blocks = {item.id: _ItemBlock(item, step) for item in items}

    best_value = -1.0
    best_sol: Solution = Solution(utilization={})
    for j in items:
        blocks = [all_blocks[it.id] for it in items if it.id != j.id]
        final, starts = _run_dp(blocks, W, C)
        level_axis = np.arange(final.shape[1])

        # Best state of this subproblem by grid score: continuous
        # extension of j for l < C, no extension once C items are used.
        cand: tuple[float, int, int, float] | None = None
        for l in range(C + 1):
            feasible = final[l] <= W
            if not feasible.any():
                continue
            if l < C:
                ext = np.where(
                    feasible, np.minimum(W - final[l], j.total_weight), 0.0
                )
                gain = eval_utility_many(j, ext)
            else:
                ext = np.zeros(final.shape[1])
                gain = ext
            scores = np.where(feasible, level_axis * step + gain, -np.inf)
            v = int(np.argmax(scores))
            if cand is None or scores[v] > cand[0]:
                cand = (float(scores[v]), l, v, float(ext[v]))
        if cand is None:
            continue

        _, l, v, ext = cand
        utilization, exact_total = _walk_back(final, starts, blocks, l, v)
        if ext > _SNAP:
            utilization[j.id] = ext
            exact_total += eval_utility(j, ext)
        if exact_total > best_value:
            best_value = exact_total
            best_sol = Solution(utilization=utilization)
    return best_sol


def fptas_solve(
    inst: Instance, epsilon: float, *, state_budget: float = 5e8
) -> Solution:
    """Solve to within a factor ``1 - epsilon`` of the optimum.

    ``epsilon`` must lie in (0, 1).  Instances whose discretized state
    space ``levels * m * C`` exceeds ``state_budget`` are rejected with a
    :class:`ResourceLimitError`.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon!r}")
    grid = value_grid(inst, epsilon)
    states = grid.levels * inst.m * inst.C
    if states > state_budget:
        raise ResourceLimitError(
            f"{states} DP states exceed the state budget of {state_budget:g}"
        )
    return _solve_with_step(inst, grid.step)


def dp_exact_small(inst: Instance, scale: float = 1.0) -> Solution:
    """Exact optimum through the same DP on an exact integer value grid.

    Requires all component utilities to be integral after multiplying by
    ``scale`` (at most 1e4), with total scaled value at most 1e6; the
    grid then loses nothing and the result is exact.
    """
    if not 0.0 < scale <= 1e4:
        raise ValueError(f"scale must be in (0, 1e4], got {scale!r}")
    total = 0.0
    for item in inst.items:
        for comp in item.components:
            scaled = comp.utility * scale
            if abs(scaled - round(scaled)) > 1e-6:
                raise ValueError(
                    f"component utility {comp.utility!r} of item {item.id!r} "
                    f"is not integral at scale {scale!r}"
                )
            total += round(scaled)
    if total > 1e6:
        raise ValueError(f"total scaled value {total:g} exceeds 1e6")
    return _solve_with_step(inst, 1.0 / scale)
