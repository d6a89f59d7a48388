"""Seeded instance generators for the benchmark datasets.

Dataset A items have two components with utilities drawn from U[10, 25]
and weights from U[5, 20]; the higher utility is paired with the lower
weight so densities decrease within each item.  Dataset B appends one
dominant item whose two components span the whole knapsack.

Draw order is fixed and documented so instances are reproducible from
(dataset, n, cardinality rule, seed): for each item in index order the
generator draws utility, utility', weight, weight' (four uniforms); the
dataset-B extra weight is drawn last.  The RNG is NumPy's default
64-bit generator (PCG64) seeded with the config seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Component, Instance, Item, validate_instance

#: Cardinality menu used by the benchmark sweeps.
CARD_RULES = ("2", "30%", "60%")


def resolve_cardinality(rule: int | str, n: int) -> int:
    """Cardinality capacity for a rule: an explicit int or '30%'/'60%' of n."""
    if isinstance(rule, str) and rule.endswith("%"):
        frac = float(rule[:-1]) / 100.0
        return max(1, int(math.floor(frac * n + 1e-9)))
    C = int(rule)
    if C < 1:
        raise ValueError(f"cardinality capacity must be >= 1, got {C}")
    return C


@dataclass(frozen=True)
class GenConfig:
    dataset: str
    n: int
    card: int | str
    seed: int

    def cardinality(self) -> int:
        return resolve_cardinality(self.card, self.n)


def _item_id(index: int) -> str:
    return f"i{index:04d}"


def _draw_base_items(rng: np.random.Generator, count: int) -> list[Item]:
    items = []
    for idx in range(count):
        u1 = rng.uniform(10.0, 25.0)
        u2 = rng.uniform(10.0, 25.0)
        w1 = rng.uniform(5.0, 20.0)
        w2 = rng.uniform(5.0, 20.0)
        items.append(
            Item(
                id=_item_id(idx),
                components=(
                    Component(weight=min(w1, w2), utility=max(u1, u2)),
                    Component(weight=max(w1, w2), utility=min(u1, u2)),
                ),
            )
        )
    return items


def _capacity_for(items: list[Item]) -> float:
    weights = [item.total_weight for item in items]
    return max(0.3 * sum(weights), 1.0 + max(weights))


def gen_dataset_a(cfg: GenConfig) -> Instance:
    """Generate a dataset-A instance; deterministic given the seed."""
    if cfg.dataset != "A":
        raise ValueError(f"expected dataset 'A', got {cfg.dataset!r}")
    if cfg.n < 1:
        raise ValueError("dataset A needs n >= 1")
    rng = np.random.default_rng(cfg.seed)
    items = _draw_base_items(rng, cfg.n)
    W = _capacity_for(items)
    C = cfg.cardinality()
    inst = Instance(
        name=f"A-n{cfg.n}-C{C}-s{cfg.seed}", W=W, C=C, items=tuple(items)
    )
    return validate_instance(inst)


def gen_dataset_b(cfg: GenConfig) -> Instance:
    """Generate a dataset-B instance: dataset-A items plus a dominant item.

    The first n-1 items and the capacity W are exactly those of dataset A
    on n-1 items.  The last item has a first component of weight ``a``
    drawn from U[5, 0.49 W] with utility ``10 a`` (density 10, above every
    base-item density) and a second component covering the rest of the
    knapsack with utility ``7 a``.
    """
    if cfg.dataset != "B":
        raise ValueError(f"expected dataset 'B', got {cfg.dataset!r}")
    if cfg.n < 2:
        raise ValueError("dataset B needs n >= 2")
    rng = np.random.default_rng(cfg.seed)
    items = _draw_base_items(rng, cfg.n - 1)
    W = _capacity_for(items)
    if 0.49 * W < 5.0:
        raise ValueError(f"capacity W={W} too small to draw the dominant item")
    a = rng.uniform(5.0, 0.49 * W)
    items.append(
        Item(
            id=_item_id(cfg.n - 1),
            components=(
                Component(weight=a, utility=10.0 * a),
                Component(weight=W - a, utility=7.0 * a),
            ),
        )
    )
    C = cfg.cardinality()
    inst = Instance(
        name=f"B-n{cfg.n}-C{C}-s{cfg.seed}", W=W, C=C, items=tuple(items)
    )
    return validate_instance(inst)


def generate(cfg: GenConfig) -> Instance:
    if cfg.dataset == "A":
        return gen_dataset_a(cfg)
    if cfg.dataset == "B":
        return gen_dataset_b(cfg)
    raise ValueError(f"unknown dataset {cfg.dataset!r}")
