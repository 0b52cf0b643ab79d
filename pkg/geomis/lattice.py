"""
The lattice spanned by v_1 = (4+delta) e_1 and v_i = -(2+delta/2) e_1 + 2*sqrt(3) e_i (i >= 2).

Distinct lattice points are more than 4 apart, so the unit balls centred at lattice points
(their union is the coverage region) are pairwise far from each other.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import pdist
from scipy.special import gamma

from geomis.errors import UsageError
from geomis.geometry import Point, distance

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
ROW_STEP = 2 * SQRT3
DEFAULT_DELTA = 0.01

CoeffVector = tuple[int, ...]


@dataclass(frozen=True)
class LatticeParams:
    dim: int = 3
    delta: float = DEFAULT_DELTA

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise UsageError(f"Lattice dimension must be at least 2, got {self.dim}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise UsageError(f"delta must be positive, got {self.delta}")

    @property
    def period(self) -> float:
        """Length of v_1, the period along the first axis."""
        return 4 + self.delta

    @property
    def half_step(self) -> float:
        """Every first coordinate of a lattice point is a multiple of this."""
        return 2 + self.delta / 2

    @property
    def basis(self) -> tuple[Point, ...]:
        vectors = [Point([self.period] + [0.0] * (self.dim - 1))]
        for i in range(1, self.dim):
            coords = [0.0] * self.dim
            coords[0] = -self.half_step
            coords[i] = ROW_STEP
            vectors.append(Point(coords))
        return tuple(vectors)

    @property
    def period_vectors(self) -> tuple[Point, ...]:
        """Axis-aligned translations mapping the lattice onto itself: (4+delta) e_1 and 4*sqrt(3) e_i."""
        vectors = []
        for i in range(self.dim):
            coords = [0.0] * self.dim
            coords[i] = self.period if i == 0 else 2 * ROW_STEP
            vectors.append(Point(coords))
        return tuple(vectors)

    @property
    def fundamental_volume(self) -> float:
        return self.period * ROW_STEP ** (self.dim - 1)


@dataclass(frozen=True)
class SampleBox:
    """Axis-aligned box with side 4+delta along the first axis and 2*sqrt(3) along the others."""

    origin: Point
    params: LatticeParams

    def __post_init__(self) -> None:
        if self.origin.dim != self.params.dim:
            raise UsageError(f"Box origin has dimension {self.origin.dim}, lattice has {self.params.dim}")

    @property
    def extents(self) -> tuple[float, ...]:
        return (self.params.period,) + (ROW_STEP,) * (self.params.dim - 1)

    @property
    def volume(self) -> float:
        return math.prod(self.extents)


class VolumeEstimate(NamedTuple):
    fraction: float
    stderr: float
    volume: float
    volume_stderr: float


def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / float(gamma(dim / 2 + 1))


def _check_coords(params: LatticeParams, dim: int) -> None:
    if dim != params.dim:
        raise UsageError(f"Dimension mismatch: lattice has dimension {params.dim}, got {dim}")


def lattice_point(params: LatticeParams, coeffs: CoeffVector) -> Point:
    """Return sum(a_i * v_i) for integer coefficients a_i."""
    _check_coords(params, len(coeffs))
    a = [int(x) for x in coeffs]
    first = params.half_step * (2 * a[0] - sum(a[1:]))
    return Point([first] + [ROW_STEP * x for x in a[1:]])


def _round_row(x: float) -> int:
    # x = z*sqrt(3) + y with y in [0, sqrt(3)); even z keeps z, odd z rounds up
    z = math.floor(x / SQRT3)
    return z // 2 if z % 2 == 0 else (z + 1) // 2


def _round_first(params: LatticeParams, x: float, parity: int) -> int:
    """Multiplier m of half_step nearest to x among those with m = parity (mod 2)."""
    z = math.floor(x / params.half_step)
    return z if (z - parity) % 2 == 0 else z + 1


def _coeffs_from(first_multiplier: int, rows: list[int]) -> CoeffVector:
    # first coordinate = half_step * (2*a_1 - sum(rows))
    return ((first_multiplier + sum(rows)) // 2, *rows)


def parity_round(params: LatticeParams, c: Point) -> tuple[Point, CoeffVector]:
    """
    Constant-time parity rounding of a point onto the lattice.

    Each axis i >= 2 is rounded to a multiple of 2*sqrt(3); the parity of the resulting
    coefficients fixes the parity of the first-axis multiplier of 2+delta/2, which is then
    rounded within that parity class. When some lattice point lies within distance 1 of c
    it is the point returned here.
    """
    _check_coords(params, c.dim)
    rows = [_round_row(x) for x in c.coords[1:]]
    m = _round_first(params, c[0], sum(rows) % 2)
    coeffs = _coeffs_from(m, rows)
    return lattice_point(params, coeffs), coeffs


def closest_lattice_point(params: LatticeParams, c: Point) -> tuple[Point, CoeffVector]:
    """
    Return a lattice point closest to c and its coefficient vector.

    Starts from parity_round and only replaces it by a strictly closer candidate among the
    2^(d-1) choices of bracketing multiples of 2*sqrt(3) on the axes i >= 2.
    """
    best, best_coeffs = parity_round(params, c)
    best_dist = distance(best, c)
    brackets = [(math.floor(x / ROW_STEP), math.floor(x / ROW_STEP) + 1) for x in c.coords[1:]]
    for rows in itertools.product(*brackets):
        m = _round_first(params, c[0], sum(rows) % 2)
        coeffs = _coeffs_from(m, list(rows))
        candidate = lattice_point(params, coeffs)
        dist = distance(candidate, c)
        if dist < best_dist:
            best, best_coeffs, best_dist = candidate, coeffs, dist
    return best, best_coeffs


def is_covered(params: LatticeParams, c: Point) -> bool:
    """Whether some lattice point lies within (closed) distance 1 of c."""
    p, _ = closest_lattice_point(params, c)
    return distance(p, c) <= 1.0


def covered_mask(params: LatticeParams, points: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Vectorised coverage test for an (n, dim) array, using the parity rounding."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != params.dim:
        raise UsageError(f"Expected an (n, {params.dim}) array, got shape {points.shape}")
    z = np.floor(points[:, 1:] / SQRT3).astype(np.int64)
    rows = np.where(z % 2 == 0, z // 2, (z + 1) // 2)
    parity = rows.sum(axis=1) % 2
    z1 = np.floor(points[:, 0] / params.half_step).astype(np.int64)
    m = np.where((z1 - parity) % 2 == 0, z1, z1 + 1)
    nearest = np.empty_like(points)
    nearest[:, 0] = m * params.half_step
    nearest[:, 1:] = rows * ROW_STEP
    return np.sqrt(((points - nearest) ** 2).sum(axis=1)) <= 1.0


def brute_force_nearest(params: LatticeParams, c: Point, window: int = 3) -> tuple[float, list[CoeffVector]]:
    """
    Exhaustive nearest-point search over a coefficient window around c.

    The window is [-window, window]^d around the anchor coefficients of c (rows rounded
    to the nearest multiple of 2*sqrt(3), first coefficient matching c's first coordinate),
    which amounts to translating c into one fundamental domain first.

    Returns:
        The minimum distance and every coefficient vector attaining it (within 1e-12).
    """
    _check_coords(params, c.dim)
    anchor_rows = [round(x / ROW_STEP) for x in c.coords[1:]]
    anchor_first = round((c[0] / params.half_step + sum(anchor_rows)) / 2)
    anchor = (anchor_first, *anchor_rows)
    offsets = np.array(list(itertools.product(range(-window, window + 1), repeat=params.dim)), dtype=np.int64)
    coeffs = offsets + np.array(anchor, dtype=np.int64)
    points = _points_from_coeffs(params, coeffs)
    dists = np.sqrt(((points - np.array(c.coords)) ** 2).sum(axis=1))
    best = float(dists.min())
    winners = [tuple(int(a) for a in row) for row in coeffs[dists <= best + 1e-12]]
    return best, winners


def _points_from_coeffs(params: LatticeParams, coeffs: NDArray[np.int64]) -> NDArray[np.float64]:
    points = np.empty(coeffs.shape, dtype=np.float64)
    points[:, 0] = params.half_step * (2 * coeffs[:, 0] - coeffs[:, 1:].sum(axis=1))
    points[:, 1:] = ROW_STEP * coeffs[:, 1:]
    return points


def min_pairwise_distance(params: LatticeParams, window: int) -> float:
    """Minimum distance between distinct lattice points with coefficients in [-window, window]^d."""
    if window < 1:
        raise UsageError(f"window must be at least 1, got {window}")
    coeffs = np.array(list(itertools.product(range(-window, window + 1), repeat=params.dim)), dtype=np.int64)
    return float(pdist(_points_from_coeffs(params, coeffs)).min())


def mc_volume_fraction(
    params: LatticeParams, box: SampleBox, samples: int, seed: int, chunk: int = 1 << 18
) -> VolumeEstimate:
    """
    Hit-or-miss estimate of the covered fraction of a box.

    Args:
        params: The lattice.
        box: Box to sample uniformly.
        samples: Number of uniform samples, at least 1.
        seed: Seed of the private generator.
        chunk: Samples drawn per vectorised batch.

    Returns:
        The covered fraction with its binomial standard error, and the same scaled to a volume.
    """
    if samples < 1:
        raise UsageError(f"samples must be at least 1, got {samples}")
    if box.params != params:
        raise UsageError("Sample box was built for a different lattice")
    rng = np.random.default_rng(seed)
    low = np.array(box.origin.coords)
    extents = np.array(box.extents)
    hits = 0
    remaining = samples
    while remaining > 0:
        size = min(chunk, remaining)
        points = low + rng.random((size, params.dim)) * extents
        hits += int(covered_mask(params, points).sum())
        remaining -= size
    fraction = hits / samples
    stderr = math.sqrt(fraction * (1 - fraction) / samples)
    logger.debug("Monte Carlo box %s: %d/%d covered", box.origin, hits, samples)
    return VolumeEstimate(fraction, stderr, fraction * box.volume, stderr * box.volume)


def _sigmas(estimate: VolumeEstimate, expected: float) -> float:
    gap = abs(estimate.volume - expected)
    if estimate.volume_stderr > 0:
        return gap / estimate.volume_stderr
    return 0.0 if gap == 0 else math.inf


def volume_estimates_agree(estimates: Sequence[VolumeEstimate], expected: float) -> bool:
    """
    Whether independent volume estimates are consistent with ``expected``.

    At most one estimate in ten may lie beyond 3 standard errors, and none beyond 4.
    """
    sigmas = [_sigmas(e, expected) for e in estimates]
    return all(s <= 4 for s in sigmas) and sum(s > 3 for s in sigmas) <= len(sigmas) // 10
