"""Optimal neuron assignment between two layers and the layer distance.

The cost of pairing neuron u with neuron v is the sketch-estimated Jaccard
distance between their active-sample sets. A minimum-cost assignment over
the representatives of both layers (Kuhn-Munkres, rectangular) pairs each
neuron of the smaller side; the layer distance is the mean cost of those
pairs. Neuron order never matters: permuting a layer permutes cost-matrix
rows, which leaves the optimal total unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .canonicalize import canonicalize_network
from .errors import EmptyMatching, EmptyMatrix, FamilyMismatch, ShapeError
from .model_io import Network
from .sampling import SampleSet
from .signatures import classify_neurons, compute_signature_matrix
from .sketching import MinHashSketch, sketch_layer


@dataclass(frozen=True)
class CostMatrix:
    costs: np.ndarray  # (n_a, n_b) in [0, 1]
    row_ids: list[int]  # original neuron indices, layer A
    col_ids: list[int]  # original neuron indices, layer B

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=np.float64)
        if c.ndim != 2:
            raise ShapeError("cost matrix must be 2-D")
        if c.shape != (len(self.row_ids), len(self.col_ids)):
            raise ShapeError(
                f"cost matrix {c.shape} inconsistent with "
                f"{len(self.row_ids)}x{len(self.col_ids)} ids"
            )
        if c.size and (c.min() < 0.0 or c.max() > 1.0):
            raise ValueError("costs must lie in [0, 1]")
        c.setflags(write=False)
        object.__setattr__(self, "costs", c)


@dataclass(frozen=True)
class Matching:
    pairs: list[tuple[int, int, float]]  # (row_id, col_id, cost)
    total_cost: float

    def pair_set(self) -> set[tuple[int, int]]:
        return {(u, v) for u, v, _ in self.pairs}


@dataclass(frozen=True)
class ValidationReport:
    mae: float
    rmse: float
    exact_layer_distance: float
    agreement: float
    exact_matching: Matching


@dataclass(frozen=True)
class LayerComparisonReport:
    layer_distance: float
    matching: Matching
    cost_matrix: CostMatrix
    filter_a: dict
    filter_b: dict
    unmatched_a: list[int]
    unmatched_b: list[int]
    params: dict
    validation: ValidationReport | None = None

    def to_json_dict(self) -> dict:
        doc = {
            "layer_distance": self.layer_distance,
            "pairs": [
                {"a": u, "b": v, "cost": c} for u, v, c in self.matching.pairs
            ],
            "unmatched_a": list(self.unmatched_a),
            "unmatched_b": list(self.unmatched_b),
            "filters": {"a": self.filter_a, "b": self.filter_b},
            "params": dict(self.params),
        }
        if self.validation is not None:
            doc["validation"] = {
                "mae": self.validation.mae,
                "rmse": self.validation.rmse,
                "exact_layer_distance": self.validation.exact_layer_distance,
                "agreement": self.validation.agreement,
            }
        return doc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def _stack_sketches(sketches: dict[int, MinHashSketch]) -> tuple[list[int], np.ndarray, tuple]:
    ids = sorted(sketches)
    values = np.stack([sketches[j].values for j in ids])
    first = sketches[ids[0]]
    return ids, values, (first.k, first.master_seed)


def build_cost_matrix(
    sketches_a: dict[int, MinHashSketch], sketches_b: dict[int, MinHashSketch]
) -> CostMatrix:
    """Pairwise sketch distances between two layers' representatives."""
    if not sketches_a or not sketches_b:
        raise EmptyMatrix("both layers need at least one sketched neuron")
    for side in (sketches_a, sketches_b):
        families = {(s.k, s.master_seed) for s in side.values()}
        if len(families) > 1:
            raise FamilyMismatch("sketch set mixes hash families")
    row_ids, va, fam_a = _stack_sketches(sketches_a)
    col_ids, vb, fam_b = _stack_sketches(sketches_b)
    if fam_a != fam_b:
        raise FamilyMismatch(f"layer sketches use different families: {fam_a} vs {fam_b}")
    k = fam_a[0]
    costs = (va[:, None, :] != vb[None, :, :]).sum(axis=2) / k
    return CostMatrix(costs, row_ids, col_ids)


def solve_assignment(c: CostMatrix) -> Matching:
    """Minimum-total-cost pairing of min(n_a, n_b) neurons."""
    if c.costs.size == 0:
        raise EmptyMatrix("cannot assign on an empty cost matrix")
    rows, cols = scipy.optimize.linear_sum_assignment(c.costs)
    pairs = [
        (c.row_ids[r], c.col_ids[col], float(c.costs[r, col]))
        for r, col in zip(rows, cols)
    ]
    total = float(c.costs[rows, cols].sum())
    return Matching(pairs, total)


def layer_distance(matching: Matching) -> float:
    """Mean cost over the matched pairs."""
    if not matching.pairs:
        raise EmptyMatching("layer distance needs at least one matched pair")
    return matching.total_cost / len(matching.pairs)


def compare_layers(
    net_a: Network,
    net_b: Network,
    layer_index: int,
    samples: SampleSet,
    family,
    exact: bool = False,
    n_threads: int = 1,
) -> LayerComparisonReport:
    """Full pipeline: canonicalize, signatures, filter, sketch, assign.

    With exact=True the same representatives are also compared through
    their full signatures, and the report gains the approximation-error
    block (MAE/RMSE, exact optimal distance, pair agreement).
    """
    for name, net in (("a", net_a), ("b", net_b)):
        if not 0 <= layer_index < len(net.layers):
            raise ShapeError(f"net {name} has no layer {layer_index}")
    canon_a, _ = canonicalize_network(net_a)
    canon_b, _ = canonicalize_network(net_b)
    layer_a = canon_a.layers[layer_index]
    layer_b = canon_b.layers[layer_index]
    if layer_a.d_in != layer_b.d_in:
        raise ShapeError(
            f"layer {layer_index} input widths differ: {layer_a.d_in} vs {layer_b.d_in}"
        )

    m_a = compute_signature_matrix(layer_a, samples, n_threads=n_threads)
    m_b = compute_signature_matrix(layer_b, samples, n_threads=n_threads)
    report_a = classify_neurons(m_a)
    report_b = classify_neurons(m_b)
    sketches_a = sketch_layer(m_a, report_a, family)
    sketches_b = sketch_layer(m_b, report_b, family)

    costs = build_cost_matrix(sketches_a, sketches_b)
    matching = solve_assignment(costs)
    distance = layer_distance(matching)

    matched_a = {u for u, _, _ in matching.pairs}
    matched_b = {v for _, v, _ in matching.pairs}
    params = {
        "layer_index": layer_index,
        "n_samples": samples.n_samples,
        "sample_seed": samples.seed,
        "sample_strategy": samples.strategy,
        "k": family.k,
        "master_seed": family.master_seed,
    }

    validation = None
    if exact:
        from .validation import approximation_errors, exact_cost_matrix, matching_agreement

        exact_costs = exact_cost_matrix(
            m_a, m_b, costs.row_ids, costs.col_ids
        )
        mae, rmse = approximation_errors(exact_costs, costs)
        exact_matching = solve_assignment(exact_costs)
        validation = ValidationReport(
            mae=mae,
            rmse=rmse,
            exact_layer_distance=layer_distance(exact_matching),
            agreement=matching_agreement(matching, exact_matching),
            exact_matching=exact_matching,
        )

    return LayerComparisonReport(
        layer_distance=distance,
        matching=matching,
        cost_matrix=costs,
        filter_a=report_a.summary(),
        filter_b=report_b.summary(),
        unmatched_a=sorted(set(costs.row_ids) - matched_a),
        unmatched_b=sorted(set(costs.col_ids) - matched_b),
        params=params,
        validation=validation,
    )
