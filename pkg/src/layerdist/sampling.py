"""Probe-sample generation and statistical sample sizing.

The minimum sample size comes from a uniform-convergence bound for
half-space indicator frequencies: with N points, every one of n_neurons
empirical activation frequencies is within epsilon of its true
probability with confidence 1 - delta once

    N >= (1/eps^2) * ((d_in + 1) * ln(2 e N / (d_in + 1)) + ln(2 n_neurons / delta))

holds. The inequality is transcendental in N and is solved by fixed-point
iteration. Probe points are generated either i.i.d. uniform or by Latin
Hypercube Sampling over an axis-aligned box.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, DomainError, NonConvergence, ParseError
from .rng import SplitMix64, bulk_floats, derive_stream

STRATEGIES = ("uniform", "lhs", "external")

MAX_SOLVER_STEPS = 10_000


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray  # (n_samples, d_in), float64
    bounds: list[tuple[float, float]]  # per-dimension (low, high)
    seed: int
    strategy: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise BoundsError("sample set needs at least one point")
        if pts.shape[1] != len(self.bounds):
            raise BoundsError(f"{pts.shape[1]}-D points but {len(self.bounds)} bounds")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def d_in(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class VcQuery:
    d_in: int
    n_neurons: int
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.d_in < 1 or self.n_neurons < 1:
            raise DomainError("d_in and n_neurons must be positive")
        if not (0.0 < self.epsilon < 1.0 and 0.0 < self.delta < 1.0):
            raise DomainError("epsilon and delta must lie strictly inside (0, 1)")


def sample_bound_rhs(n: float, q: VcQuery) -> float:
    """Right-hand side of the sample-size inequality, evaluated at n."""
    d1 = q.d_in + 1
    return (d1 * math.log(2.0 * math.e * n / d1) + math.log(2.0 * q.n_neurons / q.delta)) / (
        q.epsilon**2
    )


def solve_min_samples(q: VcQuery) -> int:
    """Smallest integer N with N >= sample_bound_rhs(N)."""
    n = max(1, math.ceil((q.d_in + 1) / q.epsilon**2))
    for _ in range(MAX_SOLVER_STEPS):
        n_next = math.ceil(sample_bound_rhs(n, q))
        if abs(n_next - n) <= 1:
            n = max(n, n_next)
            break
        n = n_next
    else:
        raise NonConvergence(f"no fixed point after {MAX_SOLVER_STEPS} iterations: {q}")
    # the fixed point can overshoot by a step; pin down the exact threshold
    while n > 1 and (n - 1) >= sample_bound_rhs(n - 1, q):
        n -= 1
    while n < sample_bound_rhs(n, q):
        n += 1
    return n


def _check_bounds(bounds) -> list[tuple[float, float]]:
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if not bounds:
        raise BoundsError("need at least one dimension")
    for d, (lo, hi) in enumerate(bounds):
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise BoundsError(f"dimension {d}: bounds must be finite")
        if lo >= hi:
            raise BoundsError(f"dimension {d}: low {lo} must be below high {hi}")
    return bounds


def generate_uniform(n: int, bounds, seed: int) -> SampleSet:
    """n i.i.d. uniform points in the box; dimension d uses PRNG stream d."""
    if n < 1:
        raise BoundsError("n must be positive")
    bounds = _check_bounds(bounds)
    cols = []
    for d, (lo, hi) in enumerate(bounds):
        u = bulk_floats(derive_stream(seed, d), n)
        cols.append(lo + (hi - lo) * u)
    return SampleSet(np.column_stack(cols), bounds, seed, "uniform")


def generate_lhs(n: int, bounds, seed: int) -> SampleSet:
    """Latin Hypercube sample: per dimension, one point in each of n strata.

    Dimension d draws its n in-stratum jitters as draws 0..n-1 of stream d,
    then shuffles the stratum order with the same stream continued.
    """
    if n < 1:
        raise BoundsError("n must be positive")
    bounds = _check_bounds(bounds)
    cols = []
    for d, (lo, hi) in enumerate(bounds):
        stream_seed = derive_stream(seed, d)
        jitter = bulk_floats(stream_seed, n)
        perm = SplitMix64(stream_seed, offset=n).permutation(n)
        unit = (perm + jitter) / n
        cols.append(lo + (hi - lo) * unit)
    return SampleSet(np.column_stack(cols), bounds, seed, "lhs")


def load_samples(path) -> SampleSet:
    """Read points from CSV (one point per row); bounds become column min/max."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"{path}: ragged row {lineno} ({len(row)} != {width} columns)")
    points = np.array(rows, dtype=np.float64)
    if not np.isfinite(points).all():
        raise ParseError(f"{path}: non-finite value")
    bounds = [(float(points[:, d].min()), float(points[:, d].max())) for d in range(width)]
    return SampleSet(points, bounds, seed=0, strategy="external")


def save_samples(samples: SampleSet, path) -> None:
    """Write points as CSV with full round-trip float precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in samples.points:
            writer.writerow([repr(float(v)) for v in row])
