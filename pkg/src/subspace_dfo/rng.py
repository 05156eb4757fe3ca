"""Seeded sampling of unit directions and orthonormal subspace bases.

Randomness is threaded through :class:`RngStream` values rather than shared
generator objects.  A stream is an immutable (seed, spawn path) pair: the same
stream always reproduces the same draws, and child streams obtained through
:func:`split_stream` are statistically independent of each other and of their
parent.  This makes replicated experiments bit-reproducible and lets parallel
workers own disjoint streams without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError

_UINT64_MAX = 2**64 - 1

# Re-draw guard for the measure-zero event of a numerically zero Gaussian draw.
_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class RngStream:
    """Value-like handle for a reproducible random stream.

    ``seed`` is the user-facing 64-bit seed; ``stream`` is the spawn path of
    indices accumulated by :func:`split_stream`.  Generators are materialized
    on demand from a counter-based bit generator (Philox keyed through
    ``SeedSequence``), so holding or copying a stream never consumes state.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not (0 <= int(self.seed) <= _UINT64_MAX):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if any(k < 0 for k in self.stream):
            raise ValueError(f"stream indices must be nonnegative, got {self.stream}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))


def split_stream(rng: RngStream, k: int) -> RngStream:
    """Return the k-th child stream of ``rng``.

    Children with distinct ``k`` are independent; the same ``k`` always
    returns the same child.
    """
    if k < 0:
        raise ValueError(f"substream index must be nonnegative, got {k}")
    return RngStream(rng.seed, rng.stream + (int(k),))


@dataclass(frozen=True)
class UnitVector:
    """A point on the unit sphere in R^d."""

    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 1 or coords.size < 1:
            raise InvalidDimensionError("unit vector needs at least one coordinate")
        norm = float(np.linalg.norm(coords))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"coordinates are not unit norm: |v| = {norm!r}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def d(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class SubspaceBasis:
    """A d-by-p matrix with orthonormal columns spanning a p-dimensional subspace."""

    columns: np.ndarray

    def __post_init__(self) -> None:
        cols = np.asarray(self.columns, dtype=float)
        if cols.ndim != 2:
            raise InvalidDimensionError("basis must be a 2-d array of column vectors")
        d, p = cols.shape
        if p < 1 or p > d:
            raise InvalidDimensionError(f"need 1 <= p <= d, got p={p}, d={d}")
        defect = float(np.max(np.abs(cols.T @ cols - np.eye(p))))
        if defect > 1e-10:
            raise ValueError(f"columns are not orthonormal: defect {defect!r}")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def d(self) -> int:
        return self.columns.shape[0]

    @property
    def p(self) -> int:
        return self.columns.shape[1]


def sample_unit_vector(d: int, rng: RngStream) -> UnitVector:
    """Draw a uniformly distributed point on the unit sphere in R^d.

    A standard Gaussian vector is normalized, which is rotation invariant.
    """
    if d < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {d}")
    gen = rng.generator()
    while True:
        z = gen.standard_normal(d)
        norm = float(np.linalg.norm(z))
        if norm >= _NORM_FLOOR:
            return UnitVector(z / norm)


def sample_stiefel(d: int, p: int, rng: RngStream) -> SubspaceBasis:
    """Draw a uniformly (rotation-invariantly) distributed orthonormal d-by-p basis.

    A d-by-p standard Gaussian matrix is reduced by thin QR and each column is
    multiplied by the sign of the corresponding diagonal entry of the
    triangular factor.  The sign correction is required for exact uniformity;
    plain QR output is biased because the factorization pins the diagonal
    signs.
    """
    if d < 1 or p < 1 or p > d:
        raise InvalidDimensionError(f"need 1 <= p <= d, got p={p}, d={d}")
    gen = rng.generator()
    a = gen.standard_normal((d, p))
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diagonal(r)).copy()
    signs[signs == 0.0] = 1.0
    return SubspaceBasis(q * signs)
