"""Synthetic clustered data and the hand-built block adjacency matrix.

The generated dataset stacks a few Gaussian clusters side by side
(columns are samples), appends pure-noise feature rows, min-max
normalizes the whole matrix into [0, 1], and finally scrambles each
noise row so it carries no cluster signal.  The companion adjacency
matrix is block diagonal: samples of the same cluster are randomly
connected, samples of different clusters never are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SyntheticSpec",
    "BlockAdjacencySpec",
    "generate_synthetic",
    "generate_block_adjacency",
]


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape and randomness of one synthetic dataset.

    ``means`` holds one scalar per cluster; every signal coordinate of a
    cluster is normal with that mean and unit variance.  ``noise_rows``
    extra rows are standard normal and column-shuffled after
    normalization.
    """

    samples_per_cluster: int = 50
    signal_features: int = 17
    noise_rows: int = 3
    means: tuple[float, ...] = (-2.0, 0.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        if self.samples_per_cluster < 1:
            raise ValueError(f"samples_per_cluster must be positive, got {self.samples_per_cluster}")
        if self.signal_features < 1:
            raise ValueError(f"signal_features must be positive, got {self.signal_features}")
        if self.noise_rows < 0:
            raise ValueError(f"noise_rows must be nonnegative, got {self.noise_rows}")
        if len(self.means) < 1:
            raise ValueError("means must list at least one cluster mean")
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))

    @property
    def n_clusters(self) -> int:
        return len(self.means)

    @property
    def n_samples(self) -> int:
        return self.n_clusters * self.samples_per_cluster

    @property
    def n_features(self) -> int:
        return self.signal_features + self.noise_rows


@dataclass(frozen=True)
class BlockAdjacencySpec:
    """Within-cluster random connectivity for the hand-built graph."""

    block_sizes: tuple[int, ...] = (50, 50, 50)
    within_block_density: float = 0.5
    weight_low: float = 0.5
    weight_high: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if len(self.block_sizes) < 1 or any(s < 1 for s in self.block_sizes):
            raise ValueError(f"block_sizes must be positive integers, got {self.block_sizes}")
        if not 0.0 < self.within_block_density <= 1.0:
            raise ValueError(
                f"within_block_density must lie in (0, 1], got {self.within_block_density}"
            )
        if not 0.0 < self.weight_low <= self.weight_high:
            raise ValueError(
                f"need 0 < weight_low <= weight_high, got {self.weight_low}, {self.weight_high}"
            )
        object.__setattr__(self, "block_sizes", tuple(int(s) for s in self.block_sizes))


def generate_synthetic(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw one dataset; returns ``(x, labels)``.

    ``x`` is features x samples with every entry in [0, 1]; ``labels``
    gives the generating cluster of each column.  Bitwise reproducible
    for a fixed spec.
    """
    rng = np.random.default_rng(spec.seed)
    blocks = [
        rng.normal(loc=mean, scale=1.0, size=(spec.signal_features, spec.samples_per_cluster))
        for mean in spec.means
    ]
    x = np.hstack(blocks)
    labels = np.repeat(np.arange(spec.n_clusters), spec.samples_per_cluster)
    if spec.noise_rows > 0:
        noise = rng.standard_normal((spec.noise_rows, spec.n_samples))
        x = np.vstack([x, noise])

    lo = x.min()
    span = x.max() - lo
    if span > 0.0:
        x = (x - lo) / span
    else:  # constant matrix; map to zeros rather than divide by zero
        x = np.zeros_like(x)

    # Scramble the noise rows after normalization so their values keep
    # the [0, 1] scale but lose any residual column structure.
    for i in range(spec.signal_features, spec.n_features):
        x[i] = rng.permutation(x[i])
    return x, labels


def generate_block_adjacency(spec: BlockAdjacencySpec) -> np.ndarray:
    """Random symmetric block-diagonal adjacency with a zero diagonal.

    Within each block, every strictly-upper-triangular cell is connected
    with probability ``within_block_density`` and weighted uniformly
    from ``[weight_low, weight_high]``; the lower triangle mirrors it.
    Entries between blocks are exactly zero.
    """
    rng = np.random.default_rng(spec.seed)
    n = sum(spec.block_sizes)
    a = np.zeros((n, n))
    offset = 0
    for size in spec.block_sizes:
        coin = rng.random((size, size))
        weights = rng.uniform(spec.weight_low, spec.weight_high, size=(size, size))
        upper = np.triu(np.where(coin < spec.within_block_density, weights, 0.0), k=1)
        a[offset : offset + size, offset : offset + size] = upper + upper.T
        offset += size
    return a
