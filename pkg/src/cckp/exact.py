"""Exact optimum oracles at desk scale.

Two routes to ground truth, cross-checked in the test suite:

* :func:`exact_enumerate` scans every item subset of size at most ``C``
  and solves the cardinality-free relaxation on each.  For a fixed
  support the cardinality constraint is inactive, so the best subset
  yields the true optimum.
* :func:`exact_bnb` searches the same space with depth-first
  branch-and-bound.  Nodes are pruned with the cheapest valid upper
  bound available: the relaxed value of (decided-in + undecided), a
  submodular top-k marginal bound, and a Lagrangian dual bound that
  prices the weight and cardinality constraints simultaneously.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError
from .greedy import greedy_cardinality
from .model import Instance, Solution, objective
from .relax import ComponentTable, component_table, solve_relaxed

_TOL = 1e-9
_CHUNK = 4096


def _best_solution(inst: Instance, mask: np.ndarray, table: ComponentTable) -> Solution:
    subset = sorted(table.item_ids[p] for p in np.flatnonzero(mask))
    return solve_relaxed(inst, subset)


def exact_enumerate(inst: Instance, *, subset_budget: int = 10**7) -> Solution:
    """Optimal solution by enumerating all supports of size at most ``C``.

    Subsets are scanned by size, then lexicographically by item id, and
    the first maximizer wins, so the returned solution is deterministic.
    Raises :class:`ResourceLimitError` when the subset count exceeds the
    budget.
    """
    table = component_table(inst)
    n = inst.n
    kmax = min(inst.C, n)
    count = sum(math.comb(n, k) for k in range(kmax + 1))
    if count > subset_budget:
        raise ResourceLimitError(
            f"{count} subsets exceed the enumeration budget of {subset_budget}"
        )
    order = sorted(range(n), key=lambda p: table.item_ids[p])
    best_val = 0.0
    best_mask = np.zeros(n, dtype=bool)
    for k in range(1, kmax + 1):
        combos = itertools.combinations(order, k)
        while True:
            chunk = list(itertools.islice(combos, _CHUNK))
            if not chunk:
                break
            masks = np.zeros((len(chunk), n), dtype=bool)
            rows = np.repeat(np.arange(len(chunk)), k)
            masks[rows, np.array(chunk).ravel()] = True
            vals = table.values_for_masks(masks)
            i = int(np.argmax(vals))
            if float(vals[i]) > best_val + _TOL:
                best_val = float(vals[i])
                best_mask = masks[i]
    return _best_solution(inst, best_mask, table)


@dataclass
class BnbNode:
    """A branch-and-bound node: membership decided for the first items
    of the static branching order, the rest undecided."""

    decided_in: np.ndarray
    decided_out: np.ndarray
    frontier: int
    upper_bound: float | None = None


class _DualBound:
    """Lagrangian dual bound over a grid of weight prices.

    For weight price ``lam`` an item's best detached value is
    ``h_j(lam) = sum_i w_i * max(density_i - lam, 0)``.  For any
    ``lam >= 0`` and cardinality price ``mu >= 0``,

        lam*W + mu*k + sum_in h_j(lam) + sum_und max(h_j(lam) - mu, 0)

    upper-bounds every completion of the node that adds at most ``k``
    undecided items (weak duality).  ``mu`` is chosen optimally per
    ``lam`` (k-th largest h among the undecided); ``lam`` ranges over
    all component densities, where the dual function has its kinks.
    """

    def __init__(self, table: ComponentTable):
        lam = np.unique(np.concatenate([[0.0], table.density]))
        gaps = np.clip(table.density[:, None] - lam[None, :], 0.0, None)
        per_comp = table.weight[:, None] * gaps
        H = np.zeros((table.n_items, lam.size))
        np.add.at(H, table.item_pos, per_comp)
        self.lam_W = lam * table.W
        self.H = H

    def bound(self, in_mask: np.ndarray, und_mask: np.ndarray, k: int) -> float:
        vals = self.lam_W + self.H[in_mask].sum(axis=0)
        Hu = self.H[und_mask]
        u = Hu.shape[0]
        if k > 0 and u > 0:
            if k >= u:
                vals = vals + Hu.sum(axis=0)
            else:
                mu = np.clip(np.partition(Hu, u - k, axis=0)[u - k, :], 0.0, None)
                vals = vals + mu * k + np.clip(Hu - mu, 0.0, None).sum(axis=0)
        return float(vals.min())


def exact_bnb(inst: Instance, *, node_budget: int = 10**7) -> Solution:
    """Optimal solution by branch-and-bound over item inclusion.

    The incumbent starts from the greedy solution; branching follows the
    static item order of decreasing singleton relaxed value (ties by id).
    A node closes when its bound cannot beat the incumbent by more than
    1e-9 or when ``C`` items are decided in.  Raises
    :class:`ResourceLimitError` past ``node_budget`` nodes.
    """
    table = component_table(inst)
    n = inst.n
    C = inst.C

    greedy_sol, _ = greedy_cardinality(inst)
    inc_val = objective(inst, greedy_sol).objective
    inc_mask = np.zeros(n, dtype=bool)
    for item_id in greedy_sol.support():
        inc_mask[table.id_to_pos[item_id]] = True

    singles = table.values_for_masks(np.eye(n, dtype=bool))
    order = sorted(range(n), key=lambda p: (-singles[p], table.item_ids[p]))
    order = np.array(order, dtype=np.intp)
    dual = _DualBound(table)

    nodes = 0
    stack = [BnbNode(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool), 0)]
    while stack:
        node = stack.pop()
        nodes += 1
        if nodes > node_budget:
            raise ResourceLimitError(
                f"branch-and-bound exceeded the node budget of {node_budget}"
            )
        in_mask, out_mask = node.decided_in, node.decided_out
        in_count = int(in_mask.sum())
        if in_count >= C or node.frontier >= n:
            val = float(table.values_for_masks(in_mask[None, :])[0])
            if val > inc_val + _TOL:
                inc_val, inc_mask = val, in_mask
            continue
        k = C - in_count
        und = ~(in_mask | out_mask)
        und_pos = np.flatnonzero(und)
        u = und_pos.size

        # One batch: marginal of each undecided item, G(in), G(in + und).
        rows = np.broadcast_to(in_mask, (u + 2, n)).copy()
        rows[np.arange(u), und_pos] = True
        rows[u] = in_mask
        rows[u + 1] = in_mask | und
        vals = table.values_for_masks(rows)
        marginals = vals[:u] - vals[u]
        bound_union = float(vals[u + 1])
        kk = min(k, u)
        bound_topk = float(vals[u]) + float(
            np.sum(np.partition(marginals, -kk)[-kk:])
        )

        # Primal heuristic: complete with the k best marginals.
        heur_mask = in_mask.copy()
        heur_mask[und_pos[np.argsort(-marginals)[:k]]] = True
        heur_val = float(table.values_for_masks(heur_mask[None, :])[0])
        if heur_val > inc_val + _TOL:
            inc_val, inc_mask = heur_val, heur_mask

        ub = min(bound_union, bound_topk)
        if ub > inc_val + _TOL:
            ub = min(ub, dual.bound(in_mask, und, k))
        node.upper_bound = ub
        if ub <= inc_val + _TOL:
            continue

        branch = int(order[node.frontier])  # first items of `order` are decided
        with_out = out_mask.copy()
        with_out[branch] = True
        with_in = in_mask.copy()
        with_in[branch] = True
        frontier = node.frontier + 1
        stack.append(BnbNode(in_mask, with_out, frontier))
        stack.append(BnbNode(with_in, out_mask, frontier))  # include first

    return _best_solution(inst, inc_mask, table)
