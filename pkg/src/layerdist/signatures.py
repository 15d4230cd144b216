"""Sampled activation signatures: bit matrix, neuron filtering, exact Jaccard.

Row j of the matrix records, for every probe point, whether neuron j's
pre-activation is strictly positive. Points exactly on the hyperplane
count as inactive. Rows are packed 64 samples per little-endian word so
intersection/union counts reduce to AND/OR plus popcount.

The binary file format ("SASM") is: magic ``SASM``, u32 neuron count,
u64 sample count (both little-endian), then per neuron ceil(n/64)
little-endian u64 words with zero padding bits.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ShapeError
from .model_io import Layer
from .sampling import SampleSet

MAGIC = b"SASM"


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean matrix into little-endian u64 words, rows padded with zeros."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if bits.ndim != 2:
        raise ShapeError("expected a 2-D boolean matrix")
    packed = np.packbits(bits, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    if pad:
        packed = np.pad(packed, ((0, 0), (0, pad)))
    return np.ascontiguousarray(packed).view("<u8")


def unpack_bits(words: np.ndarray, n_samples: int) -> np.ndarray:
    """Inverse of pack_bits; returns a boolean matrix of width n_samples."""
    raw = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :n_samples].astype(bool)


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


@dataclass(frozen=True)
class SignatureMatrix:
    bits: np.ndarray  # (n_neurons, n_words), uint64
    n_neurons: int
    n_samples: int

    def __post_init__(self):
        words = np.asarray(self.bits, dtype=np.uint64)
        expected = (self.n_samples + 63) // 64
        if words.shape != (self.n_neurons, expected):
            raise ShapeError(
                f"expected {self.n_neurons}x{expected} words, got {words.shape}"
            )
        words.setflags(write=False)
        object.__setattr__(self, "bits", words)

    def row(self, j: int) -> np.ndarray:
        if not 0 <= j < self.n_neurons:
            raise IndexError(f"neuron index {j} out of range 0..{self.n_neurons - 1}")
        return self.bits[j]

    def row_popcount(self, j: int) -> int:
        return popcount(self.row(j))

    def active_indices(self, j: int) -> np.ndarray:
        """Sorted sample indices on which neuron j is active."""
        return np.nonzero(unpack_bits(self.row(j)[None, :], self.n_samples)[0])[0]

    def to_bool_matrix(self) -> np.ndarray:
        return unpack_bits(self.bits, self.n_samples)


@dataclass(frozen=True)
class NeuronFilterReport:
    dead: list[int]
    always_active: list[int]
    duplicate_groups: list[list[int]]  # groups of size >= 2, members ascending
    representatives: list[int]  # unique non-trivial neurons, ascending

    def summary(self) -> dict:
        return {
            "dead": list(self.dead),
            "always_active": list(self.always_active),
            "duplicate_groups": [list(g) for g in self.duplicate_groups],
            "n_representatives": len(self.representatives),
        }


def compute_signature_matrix(
    layer: Layer, samples: SampleSet, n_threads: int = 1
) -> SignatureMatrix:
    """Threshold each neuron's pre-activation on every probe point and pack.

    Neuron rows are independent, so the work is split into row blocks when
    n_threads > 1; the output is identical for any thread count.
    """
    if layer.d_in != samples.d_in:
        raise ShapeError(
            f"layer expects {layer.d_in}-D inputs but samples are {samples.d_in}-D"
        )
    n = layer.n_neurons
    n_words = (samples.n_samples + 63) // 64
    words = np.empty((n, n_words), dtype=np.uint64)
    points_t = samples.points.T

    def fill(lo: int, hi: int) -> None:
        z = layer.weights[lo:hi] @ points_t + layer.bias[lo:hi, None]
        words[lo:hi] = pack_bits(z > 0.0)

    n_threads = max(1, min(int(n_threads), n))
    if n_threads == 1:
        fill(0, n)
    else:
        block = -(-n // n_threads)
        spans = [(lo, min(lo + block, n)) for lo in range(0, n, block)]
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(lambda span: fill(*span), spans))
    return SignatureMatrix(words, n, samples.n_samples)


def activation_frequency(m: SignatureMatrix) -> np.ndarray:
    """Fraction of probe points activating each neuron."""
    return np.bitwise_count(m.bits).sum(axis=1) / m.n_samples


def classify_neurons(m: SignatureMatrix) -> NeuronFilterReport:
    """Split neurons into dead / always-active / duplicate groups / representatives."""
    counts = np.bitwise_count(m.bits).sum(axis=1)
    dead = [int(j) for j in np.nonzero(counts == 0)[0]]
    always = [int(j) for j in np.nonzero(counts == m.n_samples)[0]]
    trivial = set(dead) | set(always)

    by_row: dict[bytes, list[int]] = {}
    for j in range(m.n_neurons):
        if j in trivial:
            continue
        by_row.setdefault(m.bits[j].tobytes(), []).append(j)

    groups = sorted(members for members in by_row.values() if len(members) > 1)
    representatives = sorted(members[0] for members in by_row.values())
    return NeuronFilterReport(dead, always, groups, representatives)


def exact_jaccard_distance(m: SignatureMatrix, j: int, l: int) -> float:
    """1 - |intersection| / |union| of the two active-sample sets.

    Two empty sets are identical (distance 0); one empty versus one
    non-empty set shares nothing (distance 1).
    """
    row_j, row_l = m.row(j), m.row(l)
    inter = popcount(row_j & row_l)
    union = popcount(row_j | row_l)
    if union == 0:
        return 0.0
    return 1.0 - inter / union


def save_signature_matrix(m: SignatureMatrix, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", m.n_neurons, m.n_samples))
        fh.write(m.bits.astype("<u8").tobytes())


def load_signature_matrix(path) -> SignatureMatrix:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != MAGIC:
            raise ParseError(f"{path}: not a signature matrix file")
        n_neurons, n_samples = struct.unpack("<IQ", header[4:])
        n_words = (n_samples + 63) // 64
        payload = fh.read()
    expected = n_neurons * n_words * 8
    if len(payload) != expected:
        raise ParseError(f"{path}: expected {expected} payload bytes, got {len(payload)}")
    words = np.frombuffer(payload, dtype="<u8").reshape(n_neurons, n_words).astype(np.uint64)
    mask = np.uint64((1 << (n_samples % 64)) - 1) if n_samples % 64 else None
    if mask is not None and n_words and (words[:, -1] & ~mask).any():
        raise ParseError(f"{path}: nonzero padding bits")
    return SignatureMatrix(words, n_neurons, n_samples)
