"""Bin partitions over predicted uncertainty, shared by ENCE, UCE and QCE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EQUAL_COUNT_BY_SIGMA = "equal-count-by-sigma"
EQUAL_WIDTH_BY_VARIANCE = "equal-width-by-variance"


@dataclass(frozen=True, eq=False)
class BinPartition:
    """Disjoint, non-empty index sets covering ``0..N-1``.

    ``n_bins`` is the number of surviving (non-empty) bins, which can be
    smaller than the requested count for equal-width partitions.
    """

    bins: tuple[np.ndarray, ...]
    strategy: str

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([b.size for b in self.bins])

    @property
    def n_samples(self) -> int:
        return int(self.sizes.sum())


def _check_n_bins(n_bins) -> int:
    if int(n_bins) != n_bins or n_bins < 1:
        raise ValueError(f"n_bins must be a positive integer, got {n_bins!r}")
    return int(n_bins)


def partition_equal_count_by_sigma(sigma, n_bins: int = 10) -> BinPartition:
    """Sort by sigma (stable) and split into ``n_bins`` near-equal chunks.

    The first ``N mod n_bins`` bins hold one extra sample.
    """
    sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
    n_bins = _check_n_bins(n_bins)
    if n_bins > sigma.size:
        raise ValueError(f"n_bins={n_bins} exceeds the number of samples {sigma.size}")
    order = np.argsort(sigma, kind="stable")
    # np.array_split gives the leading N mod n_bins chunks the extra element
    bins = tuple(np.sort(chunk) for chunk in np.array_split(order, n_bins))
    for b in bins:
        b.flags.writeable = False
    return BinPartition(bins, EQUAL_COUNT_BY_SIGMA)


def partition_equal_width_by_variance(variance, n_bins: int = 10) -> BinPartition:
    """Split ``[min var, max var]`` into equal-width bins and drop empty ones.

    Bins are left-closed; the last bin also includes the maximum. Identical
    variances collapse to a single bin.
    """
    variance = np.asarray(variance, dtype=np.float64).reshape(-1)
    n_bins = _check_n_bins(n_bins)
    if variance.size == 0:
        raise ValueError("cannot partition an empty sample")
    lo, hi = variance.min(), variance.max()
    if hi <= lo:
        everything = np.arange(variance.size)
        everything.flags.writeable = False
        return BinPartition((everything,), EQUAL_WIDTH_BY_VARIANCE)
    inner_edges = lo + (hi - lo) * np.arange(1, n_bins) / n_bins
    assignment = np.searchsorted(inner_edges, variance, side="right")
    bins = []
    for j in range(n_bins):
        members = np.flatnonzero(assignment == j)
        if members.size:
            members.flags.writeable = False
            bins.append(members)
    return BinPartition(tuple(bins), EQUAL_WIDTH_BY_VARIANCE)
