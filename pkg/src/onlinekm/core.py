"""Shared domain types: datasets, cost models, stream orders and seeded RNGs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ProtocolError(RuntimeError):
    """A clusterer was driven outside its streaming contract."""


class ConfigError(ValueError):
    """An algorithm or experiment configuration is unusable."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a configured or numeric limit."""


class DatasetFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """An indexed, read-only collection of points in R^dim.

    Points are rows of a float64 array. Equal-valued rows at different
    indices are distinct points.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"expected a non-empty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i):
        return self.points[i]

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(self.points[np.asarray(indices, dtype=np.intp)])

    def in_order(self, order: "StreamOrder") -> np.ndarray:
        """Points rearranged into arrival order."""
        if len(order) != self.n:
            raise ValueError(f"order has length {len(order)}, dataset has {self.n} points")
        return self.points[order.perm]

    @classmethod
    def load(cls, path: str | Path) -> "Dataset":
        return cls(parse_points(Path(path).read_text().splitlines()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(format_points(self.points))


def parse_points(lines: Iterable[str]) -> np.ndarray:
    """Parse comma-separated coordinates, one point per line.

    Blank lines are skipped. Errors carry the 1-based line number.
    """
    rows: list[list[float]] = []
    dim = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise DatasetFormatError(lineno, f"cannot parse {line!r} as comma-separated floats") from None
        if not all(math.isfinite(v) for v in row):
            raise DatasetFormatError(lineno, "non-finite coordinate")
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise DatasetFormatError(lineno, f"expected {dim} coordinates, found {len(row)}")
        rows.append(row)
    if not rows:
        raise DatasetFormatError(0, "no points found")
    return np.array(rows, dtype=np.float64)


def format_points(points: np.ndarray) -> str:
    # repr() round-trips float64 exactly
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in np.atleast_2d(points))


# ---------------------------------------------------------------------------
# Cost models
# ---------------------------------------------------------------------------


class CostKind(str, enum.Enum):
    SQUARED_EUCLIDEAN = "squared_euclidean"
    EUCLIDEAN = "euclidean"
    L1 = "l1"
    LP_TO_THE_P = "lp"


@dataclass(frozen=True)
class CostModel:
    """A dissimilarity ``d(x, y)`` together with its triangle constant D.

    ``d(u, v) <= D * (d(u, w) + d(w, v))`` holds for every triple when
    ``triangle_constant`` is left at its default for the kind.
    """

    kind: CostKind = CostKind.SQUARED_EUCLIDEAN
    p: float = 2.0
    triangle_constant: float | None = None

    def __post_init__(self):
        kind = CostKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is CostKind.SQUARED_EUCLIDEAN or kind is CostKind.EUCLIDEAN:
            object.__setattr__(self, "p", 2.0)
        elif kind is CostKind.L1:
            object.__setattr__(self, "p", 1.0)
        elif not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError(f"p must be a finite real >= 1, got {self.p}")
        if self.triangle_constant is None:
            object.__setattr__(self, "triangle_constant", self.default_triangle_constant())

    @classmethod
    def squared_euclidean(cls) -> "CostModel":
        return cls(CostKind.SQUARED_EUCLIDEAN)

    @classmethod
    def euclidean(cls) -> "CostModel":
        return cls(CostKind.EUCLIDEAN)

    @classmethod
    def l1(cls) -> "CostModel":
        return cls(CostKind.L1)

    @classmethod
    def lp_to_the_p(cls, p: float) -> "CostModel":
        return cls(CostKind.LP_TO_THE_P, p=float(p))

    @classmethod
    def parse(cls, spec: "str | dict | CostModel") -> "CostModel":
        """Build a model from ``"squared_euclidean"``, ``"l1"``, ``"euclidean"``,
        ``"lp:3"`` or ``{"kind": "lp", "p": 3}``."""
        if isinstance(spec, CostModel):
            return spec
        if isinstance(spec, dict):
            return cls(CostKind(spec["kind"]), p=float(spec.get("p", 2.0)))
        name, _, arg = str(spec).partition(":")
        if name == "lp":
            if not arg:
                raise ValueError("lp model needs an exponent, e.g. 'lp:3'")
            return cls.lp_to_the_p(float(arg))
        return cls(CostKind(name))

    def default_triangle_constant(self) -> float:
        if self.kind is CostKind.SQUARED_EUCLIDEAN:
            return 2.0
        if self.kind is CostKind.LP_TO_THE_P:
            return 2.0 ** (self.p - 1.0)
        return 1.0

    @property
    def minkowski_p(self) -> float:
        return self.p

    @property
    def name(self) -> str:
        if self.kind is CostKind.LP_TO_THE_P:
            return f"lp:{self.p!r}"
        return self.kind.value

    def distance(self, x: np.ndarray, y: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape:
            raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
        # same reduction as the vectorized paths, so scalar and batch results agree bitwise
        return float(self._reduce(x - y))

    def to_point(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Distances from every row of ``X`` to the single point ``y``."""
        diff = np.asarray(X, dtype=np.float64) - np.asarray(y, dtype=np.float64)
        return self._reduce(diff)

    def rowwise(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """``d(X[i], Y[i])`` for matching rows."""
        return self._reduce(np.asarray(X, dtype=np.float64) - np.asarray(Y, dtype=np.float64))

    def pairwise(self, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
        """Full ``(len(X), len(Y))`` distance matrix."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if X.shape[1] != Y.shape[1]:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
        out = np.empty((X.shape[0], Y.shape[0]))
        for j in range(Y.shape[0]):
            out[:, j] = self._reduce(X - Y[j])
        return out

    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind is CostKind.SQUARED_EUCLIDEAN:
            return np.einsum("...i,...i->...", diff, diff)
        if kind is CostKind.EUCLIDEAN:
            return np.sqrt(np.einsum("...i,...i->...", diff, diff))
        if kind is CostKind.L1:
            return np.abs(diff).sum(axis=-1)
        return (np.abs(diff) ** self.p).sum(axis=-1)


SQUARED_EUCLIDEAN = CostModel.squared_euclidean()


def distance(model: CostModel, x, y) -> float:
    """``d(x, y)`` under ``model``; raises ValueError on dimension mismatch."""
    return model.distance(x, y)


def check_triangle_constant(model: CostModel, points: Dataset | np.ndarray, tol: float = 0.0) -> bool:
    """Exhaustively test ``d(u,v) <= D (d(u,w) + d(w,v)) + tol`` over all triples.

    O(n^3); meant for small test sets.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    pts = points.points if isinstance(points, Dataset) else np.atleast_2d(points)
    P = model.pairwise(pts)
    D = model.triangle_constant
    for u in range(P.shape[0]):
        # best detour through any w, for every v at once
        via = (P[u][:, None] + P).min(axis=0)
        if np.any(P[u] > D * via + tol):
            return False
    return True


# ---------------------------------------------------------------------------
# Randomness and stream orders
# ---------------------------------------------------------------------------


GENERATOR_NAME = "numpy.PCG64 seeded by SeedSequence(seed, spawn_key=(stream_id, *path))"


class Rng:
    """A seeded, splittable random stream.

    ``(seed, stream_id)`` fully determines the draws. Independent sub-streams
    come from :meth:`child`, which extends the SeedSequence spawn key, so
    trial ``i`` can use ``Rng(seed, i)`` regardless of which worker runs it.
    An instance is owned by one consumer; do not share it across threads.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0, path: tuple[int, ...] = ()):
        if not (0 <= seed < 2**64 and 0 <= stream_id < 2**64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "Rng":
        return Rng(self.seed, self.stream_id, self.path + (index,))

    def integers(self, low: int, high: int | None = None) -> int:
        return int(self.generator.integers(low, high))

    def random(self, size=None):
        return self.generator.random(size)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"


class OrderKind(str, enum.Enum):
    AS_GIVEN = "given"
    UNIFORM_RANDOM = "random"
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class StreamOrder:
    """Arrival order: ``perm[t]`` is the dataset index arriving at time t."""

    perm: np.ndarray
    kind: OrderKind = OrderKind.EXPLICIT
    seed: int | None = None
    stream_id: int | None = None

    def __post_init__(self):
        perm = np.array(self.perm, dtype=np.intp, copy=True).ravel()
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("perm must be a permutation of 0..n-1")
        perm.flags.writeable = False
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "kind", OrderKind(self.kind))

    def __len__(self) -> int:
        return self.perm.size

    def __eq__(self, other) -> bool:
        return isinstance(other, StreamOrder) and np.array_equal(self.perm, other.perm)

    @classmethod
    def as_given(cls, n: int) -> "StreamOrder":
        return cls(np.arange(n), OrderKind.AS_GIVEN)

    @classmethod
    def explicit(cls, perm: Sequence[int]) -> "StreamOrder":
        return cls(np.asarray(perm), OrderKind.EXPLICIT)

    @property
    def provenance(self) -> str:
        if self.kind is OrderKind.UNIFORM_RANDOM:
            return f"random:{self.seed}:{self.stream_id}"
        return self.kind.value


def uniform_permutation(n: int, rng: Rng) -> StreamOrder:
    """A uniformly random arrival order of ``n`` points (Fisher-Yates)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    perm = rng.generator.permutation(n)
    return StreamOrder(perm, OrderKind.UNIFORM_RANDOM, seed=rng.seed, stream_id=rng.stream_id)
