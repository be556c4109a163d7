"""Empirical mutual information over contingency tables, in bits."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class EmptyTable(ValueError):
    """The contingency table holds no observations."""


def mutual_information(joint_counts: Sequence[Sequence[float]]) -> float:
    """I(X, Y) of the empirical joint distribution of a count table.

    Cells are normalized by the grand total; zero-count cells contribute
    nothing.  Logarithms are base 2, so a perfectly dependent 2x2 diagonal
    table scores exactly 1 bit.  Counts must be non-negative.
    """
    table = np.asarray(joint_counts, dtype=float)
    if table.ndim != 2:
        raise ValueError("joint_counts must be a 2-D table")
    if (table < 0).any():
        raise ValueError("joint_counts must be non-negative")
    total = table.sum()
    if total == 0:
        raise EmptyTable("contingency table has no observations")
    p = table / total
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    info = 0.0
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            pij = p[i, j]
            if pij > 0.0:
                info += pij * math.log2(pij / (px[i] * py[j]))
    # Gibbs' inequality guarantees non-negativity; clamp float dust.
    return max(info, 0.0)
