"""Exact-Jaccard reference path and approximation-error metrics.

Everything here works on full signatures, bypassing the sketches, so the
hashed pipeline can be checked against ground truth on inputs small
enough to afford it.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .matching import CostMatrix, Matching
from .signatures import SignatureMatrix


def exact_cost_matrix(
    m_a: SignatureMatrix, m_b: SignatureMatrix, reps_a, reps_b
) -> CostMatrix:
    """Exact Jaccard distances between the two layers' representative rows."""
    if m_a.n_samples != m_b.n_samples:
        raise ShapeError(
            f"signature matrices disagree on sample count: "
            f"{m_a.n_samples} vs {m_b.n_samples}"
        )
    reps_a = list(reps_a)
    reps_b = list(reps_b)
    inter = np.bitwise_count(m_a.bits[reps_a][:, None, :] & m_b.bits[reps_b][None, :, :]).sum(
        axis=2
    )
    union = np.bitwise_count(m_a.bits[reps_a][:, None, :] | m_b.bits[reps_b][None, :, :]).sum(
        axis=2
    )
    with np.errstate(invalid="ignore"):
        costs = np.where(union == 0, 0.0, 1.0 - inter / np.maximum(union, 1))
    return CostMatrix(costs, reps_a, reps_b)


def approximation_errors(exact: CostMatrix, approx: CostMatrix) -> tuple[float, float]:
    """MAE and RMSE over every cell of the two cost matrices."""
    if exact.costs.shape != approx.costs.shape:
        raise ShapeError(
            f"cost matrices differ in shape: {exact.costs.shape} vs {approx.costs.shape}"
        )
    diff = exact.costs - approx.costs
    mae = float(np.abs(diff).mean())
    rmse = float(np.sqrt((diff**2).mean()))
    return mae, rmse


def matching_agreement(m1: Matching, m2: Matching) -> float:
    """Fraction of (row, col) pairs present in both matchings."""
    pairs1 = m1.pair_set()
    pairs2 = m2.pair_set()
    if not pairs1 and not pairs2:
        return 1.0
    denom = max(len(pairs1), len(pairs2))
    return len(pairs1 & pairs2) / denom
