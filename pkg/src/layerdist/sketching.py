"""MinHash sketches over active-sample index sets.

Each of the K coordinates applies its own hash h_t(s) = (a_t * (s + 1) + b_t)
mod p with p = 2^61 - 1 to every active sample index and keeps the minimum.
Two sets' sketches agree on a coordinate with probability equal to their
Jaccard index, so the fraction of disagreeing coordinates estimates the
Jaccard distance without touching the full signatures.

The multiply-add family was chosen over explicit permutations because it
is O(1) per element, seedable, and bit-exact to reimplement in any
language; (s + 1) keeps index 0 away from the multiplicative fixed point.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySetError, FamilyMismatch, ParseError
from .rng import bulk_u64
from .signatures import NeuronFilterReport, SignatureMatrix

MERSENNE_P = (1 << 61) - 1

_P = np.uint64(MERSENNE_P)
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK29 = np.uint64((1 << 29) - 1)
_SHIFT29 = np.uint64(29)
_SHIFT32 = np.uint64(32)
_SHIFT61 = np.uint64(61)

# hash jobs are chunked so the (k, m) intermediate stays near this many cells
_CHUNK_CELLS = 1 << 22

# sketch_layer hashes the whole sample range up front when the (k, n_samples)
# table fits in this many cells (~256 MB of u64)
_PRECOMPUTE_CELLS = 1 << 25


def _fold_mod_p(v: np.ndarray) -> np.ndarray:
    # valid for v < 2^63: one fold then a conditional subtract; the subtract
    # is branchless because v - p wraps above v whenever v < p
    v = (v & _P) + (v >> _SHIFT61)
    return np.minimum(v, v - _P)


def _mulmod_p(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(a * x) mod p for a < p and x < 2^32, without 128-bit arithmetic.

    Split a = a_hi * 2^32 + a_lo; both partial products fit in uint64, and
    the a_hi part folds through 2^61 = 1 (mod p).
    """
    a_hi = a >> _SHIFT32
    a_lo = a & _MASK32
    lo = a_lo * x
    hi = a_hi * x
    hi_mod = ((hi & _MASK29) << _SHIFT32) + (hi >> _SHIFT29)
    lo_mod = (lo & _P) + (lo >> _SHIFT61)
    return _fold_mod_p(_fold_mod_p(lo_mod) + _fold_mod_p(hi_mod))


def required_hashes(alpha: float, delta_j: float, n_samples: int | None = None) -> int:
    """Sketch length guaranteeing order preservation at confidence 1 - alpha.

    Distance pairs separated by at least delta_j keep their relative order
    with probability >= 1 - 2 exp(-K delta_j^2 / 2); solving for K gives
    K >= 2 ln(2 / alpha) / delta_j^2. Signatures over n samples cannot
    resolve distance gaps below 1/n, so asking for one warns rather than
    fails: the result is still a valid K, just for an unreachable gap.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < delta_j <= 1.0:
        raise DomainError(f"delta_j must lie in (0, 1], got {delta_j}")
    if n_samples is not None and delta_j < 1.0 / n_samples:
        warnings.warn(
            f"delta_j={delta_j} is below the 1/{n_samples} resolution of the "
            f"signatures; distances that close are indistinguishable anyway",
            stacklevel=2,
        )
    return math.ceil(2.0 * math.log(2.0 / alpha) / delta_j**2)


@dataclass(frozen=True)
class HashFamily:
    k: int
    master_seed: int
    a: np.ndarray  # (k,) uint64 in [1, p-1]
    b: np.ndarray  # (k,) uint64 in [0, p-1]

    def hash_indices(self, indices: np.ndarray) -> np.ndarray:
        """Hash sample indices with every coordinate; returns a (k, m) matrix."""
        idx = np.asarray(indices)
        if idx.size and int(idx.max()) >= (1 << 32) - 1:
            raise DomainError("sample indices must fit in 32 bits")
        x = idx.astype(np.uint64) + np.uint64(1)
        return _fold_mod_p(_mulmod_p(self.a[:, None], x[None, :]) + self.b[:, None])


def build_hash_family(k: int, master_seed: int) -> HashFamily:
    """Derive the k (a_t, b_t) pairs from one splitmix64 stream."""
    if k < 1:
        raise DomainError("k must be positive")
    draws = bulk_u64(master_seed, 2 * k)
    a = draws[0::2] % np.uint64(MERSENNE_P - 1) + np.uint64(1)
    b = draws[1::2] % _P
    a.setflags(write=False)
    b.setflags(write=False)
    return HashFamily(k, master_seed, a, b)


@dataclass(frozen=True)
class MinHashSketch:
    values: np.ndarray  # (k,) uint64
    k: int
    master_seed: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.uint64)
        if v.shape != (self.k,):
            raise ValueError(f"expected {self.k} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def sketch(active_indices: np.ndarray, family) -> MinHashSketch:
    """Coordinate-wise minima of the hashed active-sample indices."""
    idx = np.asarray(active_indices)
    if idx.size == 0:
        raise EmptySetError("cannot sketch an empty set; filter dead neurons first")
    values = np.full(family.k, np.iinfo(np.uint64).max, dtype=np.uint64)
    step = max(1, _CHUNK_CELLS // family.k)
    for lo in range(0, idx.size, step):
        h = family.hash_indices(idx[lo : lo + step])
        np.minimum(values, h.min(axis=1), out=values)
    return MinHashSketch(values, family.k, family.master_seed)


def estimate_distance(a: MinHashSketch, b: MinHashSketch) -> float:
    """Fraction of disagreeing coordinates; unbiased for the Jaccard distance."""
    if a.k != b.k or a.master_seed != b.master_seed:
        raise FamilyMismatch(
            f"sketches come from different families: "
            f"(k={a.k}, seed={a.master_seed}) vs (k={b.k}, seed={b.master_seed})"
        )
    return float(np.count_nonzero(a.values != b.values)) / a.k


def sketch_layer(
    m: SignatureMatrix, report: NeuronFilterReport, family
) -> dict[int, MinHashSketch]:
    """Sketch exactly the filter report's representative neurons.

    When the full (k, n_samples) hash table fits in memory it is computed
    once and each neuron reduces over its active columns; otherwise each
    neuron hashes its own active indices. Both paths yield identical
    sketches.
    """
    sketches: dict[int, MinHashSketch] = {}
    if report.representatives and family.k * m.n_samples <= _PRECOMPUTE_CELLS:
        table = family.hash_indices(np.arange(m.n_samples))
        active = m.to_bool_matrix()
        top = np.iinfo(np.uint64).max
        for j in report.representatives:
            values = np.minimum.reduce(
                table, axis=1, where=active[j][None, :], initial=top
            )
            sketches[j] = MinHashSketch(values, family.k, family.master_seed)
        return sketches
    for j in report.representatives:
        sketches[j] = sketch(m.active_indices(j), family)
    return sketches


def save_sketches(sketches: dict[int, MinHashSketch], path) -> None:
    if sketches:
        first = next(iter(sketches.values()))
        k, seed = first.k, first.master_seed
        for s in sketches.values():
            if s.k != k or s.master_seed != seed:
                raise FamilyMismatch("sketch set mixes hash families")
    else:
        raise ValueError("refusing to write an empty sketch file")
    doc = {
        "k": k,
        "master_seed": seed,
        "sketches": {str(j): [int(v) for v in s.values] for j, s in sorted(sketches.items())},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_sketches(path) -> dict[int, MinHashSketch]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from None
    try:
        k = int(doc["k"])
        seed = int(doc["master_seed"])
        entries = doc["sketches"].items()
    except (KeyError, TypeError, AttributeError):
        raise ParseError(f"{path}: missing k / master_seed / sketches") from None
    out = {}
    for key, values in entries:
        out[int(key)] = MinHashSketch(np.array(values, dtype=np.uint64), k, seed)
    return out
