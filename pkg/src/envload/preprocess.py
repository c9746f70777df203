"""Thermal-load labeling, train/test split, and feature normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import ClassLabel, Dataset, FeatureId
from .sampling import Xoshiro256pp


@dataclass(frozen=True)
class Thresholds:
    """Class boundaries in kWh/m2: load <= low_max is LOW, >= high_min HIGH."""

    low_max: float = 75.0
    high_min: float = 90.0

    def __post_init__(self) -> None:
        if not self.low_max < self.high_min:
            raise ValueError(
                f"low_max must be < high_min, got {self.low_max} >= {self.high_min}"
            )


def label_load(load: float, thresholds: Thresholds = Thresholds()) -> ClassLabel:
    """HIGH iff load >= high_min, LOW iff load <= low_max, MEDIUM otherwise."""
    if not math.isfinite(load):
        raise ValueError(f"load must be finite, got {load}")
    if load >= thresholds.high_min:
        return ClassLabel.HIGH
    if load <= thresholds.low_max:
        return ClassLabel.LOW
    return ClassLabel.MEDIUM


def label_dataset(dataset: Dataset, thresholds: Thresholds = Thresholds()) -> Dataset:
    """Label every row from its load; all rows must carry loads."""
    if not dataset.has_loads():
        raise ValueError("cannot label: not every row has a load")
    return dataset.with_labels(
        [label_load(row.load, thresholds) for row in dataset.rows]  # type: ignore[arg-type]
    )


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.35
    seed: int = 42
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(dataset: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    """Partition into (train, test) with |train| = round(n * train_fraction).

    The stratified mode allocates per-class counts by largest remainder, so
    class proportions carry over as exactly as integer counts allow. Row
    order within each part follows the original dataset. Deterministic in
    cfg.seed.
    """
    labels = dataset.labels()
    if any(lbl is None for lbl in labels):
        raise ValueError("cannot split: not every row is labeled")
    n = len(dataset)
    if n < 2:
        raise ValueError(f"need at least 2 rows to split, got {n}")
    n_train_total = _round_half_up(n * cfg.train_fraction)
    n_train_total = min(max(n_train_total, 1), n - 1)

    rng = Xoshiro256pp(cfg.seed)
    if cfg.stratified:
        train_idx = _stratified_train_indices(labels, n_train_total, cfg, rng)
    else:
        order = rng.shuffled(list(range(n)))
        train_idx = set(order[:n_train_total])

    train = dataset.select([i for i in range(n) if i in train_idx])
    test = dataset.select([i for i in range(n) if i not in train_idx])
    return train, test


def _stratified_train_indices(
    labels: list, n_train_total: int, cfg: SplitConfig, rng: Xoshiro256pp
) -> set[int]:
    present = [lbl for lbl in ClassLabel if lbl in labels]
    by_class = {lbl: [i for i, y in enumerate(labels) if y == lbl] for lbl in present}

    quotas = {lbl: len(by_class[lbl]) * cfg.train_fraction for lbl in present}
    counts = {lbl: int(math.floor(quotas[lbl])) for lbl in present}
    shortfall = n_train_total - sum(counts.values())
    # distribute leftovers by largest fractional remainder, ties by class order
    order = sorted(present, key=lambda lbl: (-(quotas[lbl] - counts[lbl]), lbl))
    i = 0
    while shortfall > 0:
        counts[order[i % len(order)]] += 1
        shortfall -= 1
        i += 1
    while shortfall < 0:  # floating-point dust; shave from smallest remainders
        counts[order[(i - 1) % len(order)]] -= 1
        shortfall += 1
        i -= 1

    train_idx: set[int] = set()
    for lbl in present:
        pool = by_class[lbl]
        take = counts[lbl]
        if take <= 0 or take >= len(pool):
            raise ValueError(
                f"stratified split leaves class {lbl.csv_value!r} with an empty "
                f"train or test part ({take} of {len(pool)} rows)"
            )
        shuffled = rng.shuffled(pool)
        train_idx.update(shuffled[:take])
    return train_idx


@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-score context fitted on training rows.

    Uses population (1/n) standard deviation. Constant features (std 0)
    map to 0.
    """

    means: tuple[float, ...]
    std_devs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.means) != len(FeatureId) or len(self.std_devs) != len(FeatureId):
            raise ValueError(f"need exactly {len(FeatureId)} (mean, std) pairs")
        if any(s < 0.0 for s in self.std_devs):
            raise ValueError("std_dev must be >= 0")


def fit_normalizer(train: Dataset) -> Normalizer:
    if len(train) == 0:
        raise ValueError("cannot fit normalizer on an empty training set")
    x = train.feature_matrix()
    means = x.mean(axis=0)
    stds = x.std(axis=0)  # population (1/n) std
    return Normalizer(tuple(float(m) for m in means), tuple(float(s) for s in stds))


def apply_normalizer(norm: Normalizer, dataset: Dataset) -> Dataset:
    """Transform every row with the fitted training statistics."""
    x = dataset.feature_matrix()
    means = np.array(norm.means)
    stds = np.array(norm.std_devs)
    safe = np.where(stds > 0.0, stds, 1.0)
    z = (x - means) / safe
    z[:, stds == 0.0] = 0.0
    return dataset.with_features(z)
