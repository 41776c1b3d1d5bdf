"""Online no-substitution clusterers.

Every clusterer sees one point at a time and must answer, before the next
point is revealed, whether that point becomes a center. Answers are final.

The shared contract is small::

    clusterer = MaxDistanceClusterer(model)
    decision = clusterer.observe(x)      # one call per arrival, in order
    clusterer.finish()                   # end of stream

:func:`run_stream` drives a clusterer over an iterable and records an
:class:`OnlineTrace`.
"""

from __future__ import annotations

import enum
import logging
import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import ConfigError, CostModel, ProtocolError, Rng, SQUARED_EUCLIDEAN
from .offline import OfflineConfig, offline_cluster

log = logging.getLogger(__name__)


class Reason(enum.Enum):
    FIRST_POINT = "FirstPoint"
    RANDOM_INDEX = "RandomIndex"
    DOUBLING_PICK = "DoublingPick"
    CLOSE_POINT = "ClosePoint"
    FAR_POINT = "FarPoint"
    MAX_DISTANCE = "MaxDistance"
    FFT_SELECTED = "FftSelected"
    INITIAL_K = "InitialK"
    TAKE_ALL = "TakeAll"
    SKIP = "Skip"


class Decision(NamedTuple):
    take: bool
    reason: Reason

    @classmethod
    def taken(cls, reason: Reason) -> "Decision":
        if reason is Reason.SKIP:
            raise ValueError("a taken point needs a non-skip reason")
        return cls(True, reason)


SKIP = Decision(False, Reason.SKIP)


class OnlineTrace:
    """Append-only record of the decisions made over one stream.

    ``center_indices`` are arrival positions (0-based); ``centers`` holds the
    corresponding points.
    """

    def __init__(self, dim: int | None = None):
        self._reasons: list[Reason] = []
        self._center_idx: list[int] = []
        self._center_blocks: list[np.ndarray] = []  # (m, dim) blocks of taken points
        self.dim = dim

    def __len__(self) -> int:
        return len(self._reasons)

    def record(self, decision: Decision, point) -> None:
        if decision.take == (decision.reason is Reason.SKIP):
            raise ValueError(f"inconsistent decision {decision}")
        if decision.take:
            self._center_idx.append(len(self._reasons))
            self._center_blocks.append(np.array(point, dtype=np.float64).reshape(1, -1))
        self._reasons.append(decision.reason)

    def extend(self, reasons: Sequence[Reason], points: np.ndarray) -> None:
        base = len(self._reasons)
        taken = [i for i, r in enumerate(reasons) if r is not Reason.SKIP]
        if taken:
            self._center_idx.extend(base + i for i in taken)
            block = np.asarray(points, dtype=np.float64)[taken]
            self._center_blocks.append(block.reshape(len(taken), -1))
        self._reasons.extend(reasons)

    @property
    def decisions(self) -> tuple[Decision, ...]:
        return tuple(SKIP if r is Reason.SKIP else Decision(True, r) for r in self._reasons)

    @property
    def reasons(self) -> tuple[Reason, ...]:
        return tuple(self._reasons)

    @property
    def center_indices(self) -> tuple[int, ...]:
        return tuple(self._center_idx)

    @property
    def centers(self) -> np.ndarray:
        if not self._center_blocks:
            return np.empty((0, self.dim or 0))
        if len(self._center_blocks) > 1:
            self._center_blocks = [np.concatenate(self._center_blocks)]
        return self._center_blocks[0].copy()

    @property
    def n_centers(self) -> int:
        return len(self._center_idx)


class OnlineClusterer:
    """Base class. Subclasses implement :meth:`observe`."""

    name = "base"

    def __init__(self):
        self.t = 0  # arrivals seen so far

    def observe(self, x: np.ndarray) -> Decision:
        raise NotImplementedError

    def finish(self) -> None:
        """Called once after the last arrival."""

    def observe_many(self, X: np.ndarray) -> list[Reason]:
        """Decide a block of consecutive arrivals.

        Equivalent to calling :meth:`observe` on each row in turn. Subclasses
        may vectorize, as long as every decision depends only on its prefix.
        """
        return [self.observe(x).reason for x in X]


def run_stream(clusterer: OnlineClusterer, stream: Iterable) -> OnlineTrace:
    """Feed ``stream`` one point at a time and record every decision.

    The next point is pulled from the iterator only after the decision for
    the previous one has been recorded.
    """
    trace = OnlineTrace()
    for x in stream:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if trace.dim is None:
            trace.dim = x.shape[0]
        decision = clusterer.observe(x)
        if not isinstance(decision, Decision):
            raise ProtocolError(f"{type(clusterer).__name__}.observe returned {decision!r}")
        trace.record(decision, x)
    clusterer.finish()
    return trace


def run_stream_blocked(clusterer: OnlineClusterer, points: np.ndarray, block: int = 1 << 16) -> OnlineTrace:
    """Like :func:`run_stream` for an in-memory array, using :meth:`observe_many`."""
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    trace = OnlineTrace(dim=X.shape[1])
    for start in range(0, X.shape[0], block):
        chunk = X[start:start + block]
        reasons = clusterer.observe_many(chunk)
        if len(reasons) != chunk.shape[0]:
            raise ProtocolError("observe_many must return one decision per arrival")
        trace.extend(reasons, chunk)
    clusterer.finish()
    return trace


# ---------------------------------------------------------------------------
# Reference clusterer
# ---------------------------------------------------------------------------


class TakeAllClusterer(OnlineClusterer):
    """Takes every arrival. Cost 0, n centers; a plumbing reference."""

    name = "take_all"

    def observe(self, x):
        self.t += 1
        return Decision(True, Reason.TAKE_ALL)

    def observe_many(self, X):
        self.t += len(X)
        return [Reason.TAKE_ALL] * len(X)


# ---------------------------------------------------------------------------
# k = 1
# ---------------------------------------------------------------------------


class FirstPointClusterer(OnlineClusterer):
    """Take the first arrival and nothing else (k=1, random order)."""

    name = "first_point"

    def observe(self, x):
        self.t += 1
        return Decision(True, Reason.FIRST_POINT) if self.t == 1 else SKIP

    def observe_many(self, X):
        out = [Reason.SKIP] * len(X)
        if self.t == 0 and len(X):
            out[0] = Reason.FIRST_POINT
        self.t += len(X)
        return out


class RandomIndexClusterer(OnlineClusterer):
    """Take exactly the arrival at a position drawn uniformly up front (k=1, n known)."""

    name = "random_index"

    def __init__(self, n: int, rng: Rng):
        super().__init__()
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.pick = rng.integers(0, n)

    def observe(self, x):
        if self.t >= self.n:
            raise ProtocolError(f"stream is longer than the declared n={self.n}")
        take = self.t == self.pick
        self.t += 1
        return Decision(True, Reason.RANDOM_INDEX) if take else SKIP


class DoublingClusterer(OnlineClusterer):
    """Guess-and-double for k=1 when n is unknown and the order is arbitrary.

    Epochs have lengths ``ceil(c^0), ceil(c^1), ...``; within each epoch one
    position is drawn uniformly and exactly that arrival is taken. ``c`` below
    2 is raised to 2.
    """

    name = "doubling"

    def __init__(self, c: float, rng: Rng):
        super().__init__()
        if not c > 1:
            raise ValueError(f"c must exceed 1, got {c}")
        self.c = max(float(c), 2.0)
        self.rng = rng
        self.guess = 1.0          # n', kept real
        self.epoch_start = 0      # arrivals before the current epoch ("last")
        self.epoch_len = 1
        self.pick = 1             # 1-based position inside the epoch
        self.epochs_started = 1

    def observe(self, x):
        self.t += 1
        pos = self.t - self.epoch_start
        decision = Decision(True, Reason.DOUBLING_PICK) if pos == self.pick else SKIP
        if pos == self.epoch_len:
            self.epoch_start += self.epoch_len
            self.guess *= self.c
            self.epoch_len = math.ceil(self.guess)
            self.pick = self.rng.integers(1, self.epoch_len + 1)
            self.epochs_started += 1
        return decision


# ---------------------------------------------------------------------------
# k >= 2, random order, n known
# ---------------------------------------------------------------------------


def close_threshold(k: int) -> int:
    """Close centers allowed per reference center: ``ceil(3 k ln(40 k))``."""
    return math.ceil(3 * k * math.log(40 * k))


class ThreePhaseClusterer(OnlineClusterer):
    """Observe, calibrate, then take close and far points (k >= 2, n known, random order).

    Phase 1 buffers the first ``m1`` arrivals and clusters them offline into
    reference centers. Phase 2 watches the next ``m2`` arrivals and records,
    per reference center, the largest distance among the arrivals assigned
    to it (``r_max``, 0 if none). Phase 3 takes an arrival if it lies farther
    than ``r_max`` from its reference center, or if that center has taken at
    most ``close_threshold`` close points so far.

    By default ``m1 = n // (100 k)`` and ``m2 = n // (10**5 k**3)``; passing
    ``alpha``/``alpha2`` sets them to ``floor(alpha n)``/``floor(alpha2 n)``.
    With ``take_first_point`` the very first arrival is also taken.
    """

    name = "three_phase"

    def __init__(
        self,
        n: int,
        k: int,
        offline_cfg: OfflineConfig = OfflineConfig(),
        model: CostModel = SQUARED_EUCLIDEAN,
        rng: Rng | None = None,
        alpha: float | None = None,
        alpha2: float | None = None,
        take_first_point: bool = True,
    ):
        super().__init__()
        if k < 2:
            raise ValueError("three-phase clustering needs k >= 2")
        if (alpha is None) != (alpha2 is None):
            raise ConfigError("alpha and alpha2 must be overridden together")
        self.n, self.k = int(n), int(k)
        if alpha is None:
            self.m1 = self.n // (100 * self.k)
            self.m2 = self.n // (10**5 * self.k**3)
        else:
            if not (0 < alpha < 1 and 0 <= alpha2 < 1):
                raise ConfigError("alpha must lie in (0, 1) and alpha2 in [0, 1)")
            self.m1 = math.floor(alpha * self.n)
            self.m2 = math.floor(alpha2 * self.n)
        if self.m1 < self.k:
            raise ConfigError(
                f"phase 1 would hold {self.m1} points, fewer than k={self.k}; "
                f"n={self.n} is too small for the default constants, pass alpha/alpha2"
            )
        if self.m1 + self.m2 > self.n:
            raise ConfigError("phase 1 and phase 2 together exceed n")
        if self.m2 == 0:
            log.warning("phase 2 is empty (n=%d, k=%d): every r_max is 0", self.n, self.k)
        self.offline_cfg = offline_cfg
        self.model = model
        self.rng = rng if rng is not None else Rng(0)
        self.take_first_point = take_first_point
        self.close_threshold = close_threshold(self.k)
        self._buffer: list[np.ndarray] = []
        self.reference_centers: np.ndarray | None = None
        self.r_max = np.zeros(self.k)
        self.centers_counter = np.zeros(self.k, dtype=np.int64)

    @property
    def phase(self) -> int:
        """Phase the next arrival falls into."""
        if self.t < self.m1:
            return 1
        if self.t < self.m1 + self.m2:
            return 2
        return 3

    def _nearest(self, x) -> tuple[int, float]:
        d = self.model.to_point(self.reference_centers, x)
        i = int(np.argmin(d))  # first minimum: lowest index on ties
        return i, float(d[i])

    def _close_phase1(self):
        M1 = np.vstack(self._buffer)
        self._buffer = []
        self.reference_centers = offline_cluster(M1, self.k, self.offline_cfg, self.model, self.rng)

    def observe(self, x):
        if self.t >= self.n:
            raise ProtocolError(f"stream is longer than the declared n={self.n}")
        t = self.t
        self.t += 1
        if t < self.m1:
            self._buffer.append(np.array(x, dtype=np.float64))
            if t == self.m1 - 1:
                self._close_phase1()
            if t == 0 and self.take_first_point:
                return Decision(True, Reason.FIRST_POINT)
            return SKIP
        i, d = self._nearest(x)
        if t < self.m1 + self.m2:
            if d > self.r_max[i]:
                self.r_max[i] = d
            return SKIP
        far = d > self.r_max[i]
        close = self.centers_counter[i] <= self.close_threshold
        if close:
            self.centers_counter[i] += 1
        if far:
            return Decision(True, Reason.FAR_POINT)
        if close:
            return Decision(True, Reason.CLOSE_POINT)
        return SKIP

    def observe_many(self, X):
        X = np.atleast_2d(X)
        out: list[Reason] = []
        pos = 0
        total = X.shape[0]
        if self.t + total > self.n:
            raise ProtocolError(f"stream is longer than the declared n={self.n}")
        # phase 1 is inherently sequential bookkeeping; phases 2 and 3 vectorize
        while pos < total and self.t < self.m1:
            out.append(self.observe(X[pos]).reason)
            pos += 1
        if pos < total and self.t < self.m1 + self.m2:
            stop = min(total, pos + self.m1 + self.m2 - self.t)
            block = X[pos:stop]
            owner, dist = self._nearest_block(block)
            np.maximum.at(self.r_max, owner, dist)
            out.extend([Reason.SKIP] * block.shape[0])
            self.t += block.shape[0]
            pos = stop
        if pos < total:
            block = X[pos:]
            owner, dist = self._nearest_block(block)
            far = dist > self.r_max[owner]
            close = np.zeros(block.shape[0], dtype=bool)
            for i in range(self.k):
                mine = np.flatnonzero(owner == i)
                # the r-th arrival at center i (0-based) sees counter start + r until the cap
                room = max(0, self.close_threshold + 1 - int(self.centers_counter[i]))
                close[mine[:room]] = True
                self.centers_counter[i] += min(room, mine.size)
            codes = np.where(far, 2, np.where(close, 1, 0))
            lookup = (Reason.SKIP, Reason.CLOSE_POINT, Reason.FAR_POINT)
            out.extend(lookup[c] for c in codes.tolist())
            self.t += block.shape[0]
        return out

    def _nearest_block(self, block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        D = np.column_stack([self.model.to_point(block, c) for c in self.reference_centers])
        owner = np.argmin(D, axis=1)
        return owner, D[np.arange(D.shape[0]), owner]

    def finish(self):
        if self.t != self.n:
            raise ProtocolError(f"stream ended after {self.t} arrivals, declared n={self.n}")


# ---------------------------------------------------------------------------
# k >= 2, random order, n unknown
# ---------------------------------------------------------------------------


class MaxDistanceClusterer(OnlineClusterer):
    """Take the first arrival, then every arrival strictly farther from it
    than all earlier ones (k=2)."""

    name = "max_distance"

    def __init__(self, model: CostModel = SQUARED_EUCLIDEAN):
        super().__init__()
        self.model = model
        self.anchor: np.ndarray | None = None
        self.max_dis = 0.0
        self.max_dis_history: list[float] = []

    def observe(self, x):
        self.t += 1
        if self.anchor is None:
            self.anchor = np.array(x, dtype=np.float64)
            return Decision(True, Reason.FIRST_POINT)
        d = self.model.distance(x, self.anchor)
        if d > self.max_dis:
            self.max_dis = d
            self.max_dis_history.append(d)
            return Decision(True, Reason.MAX_DISTANCE)
        return SKIP

    def observe_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        reasons = [Reason.SKIP] * X.shape[0]
        if X.shape[0] == 0:
            return reasons
        start = 0
        if self.anchor is None:
            self.observe(X[0])
            reasons[0] = Reason.FIRST_POINT
            start = 1
        d = self.model.to_point(X[start:], self.anchor)
        # running maximum before each arrival, seeded with the current max_dis
        before = np.maximum.accumulate(np.concatenate([[self.max_dis], d]))[:-1]
        for i in np.flatnonzero(d > before):
            reasons[start + i] = Reason.MAX_DISTANCE
            self.max_dis_history.append(float(d[i]))
        if self.max_dis_history:
            self.max_dis = self.max_dis_history[-1]
        self.t += X.shape[0] - start
        return reasons


def farthest_first_traversal(M, s_index: int, k: int, model: CostModel = SQUARED_EUCLIDEAN) -> list[int]:
    """Greedy k-center selection starting from ``M[s_index]``.

    Each round adds the point of ``M`` outside the selection whose distance
    to the selection is largest; ties go to the lowest index. Returns indices
    into ``M`` in insertion order.
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if not 1 <= k <= M.shape[0]:
        raise ValueError(f"k must lie in 1..{M.shape[0]}, got {k}")
    return _fft(M, s_index, k, model, model.to_point(M, M[s_index]))


def _fft(M: np.ndarray, s_index: int, k: int, model: CostModel, from_anchor: np.ndarray) -> list[int]:
    selected = [s_index]
    gap = from_anchor.astype(np.float64, copy=True)
    gap[s_index] = -np.inf
    for _ in range(1, k):
        v = int(np.argmax(gap))
        selected.append(v)
        if len(selected) < k:
            np.minimum(gap, model.to_point(M, M[v]), out=gap)
        gap[v] = -np.inf
    return selected


class FFTClusterer(OnlineClusterer):
    """Take the first k arrivals, then each arrival that lands in the
    farthest-first traversal of everything seen so far, started from the
    first arrival (k >= 2, n unknown, random order).

    Membership is by arrival index, so duplicates are distinct points.
    """

    name = "fft"

    def __init__(self, k: int, model: CostModel = SQUARED_EUCLIDEAN):
        super().__init__()
        if k < 2:
            raise ValueError("k must be at least 2")
        self.k = int(k)
        self.model = model
        self._mem: np.ndarray | None = None
        self._anchor_dist: np.ndarray | None = None

    @property
    def memory(self) -> np.ndarray:
        return self._mem[: self.t]

    @property
    def anchor(self) -> np.ndarray | None:
        return None if self._mem is None else self._mem[0]

    def _append(self, x):
        if self._mem is None:
            self._mem = np.empty((64, x.shape[0]))
            self._anchor_dist = np.empty(64)
        if self.t == self._mem.shape[0]:
            self._mem = np.concatenate([self._mem, np.empty_like(self._mem)])
            self._anchor_dist = np.concatenate([self._anchor_dist, np.empty_like(self._anchor_dist)])
        self._mem[self.t] = x
        self._anchor_dist[self.t] = self.model.distance(x, self._mem[0])
        self.t += 1

    def observe(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        self._append(x)
        t = self.t - 1
        if t < self.k:
            return Decision(True, Reason.INITIAL_K)
        S = _fft(self._mem[: self.t], 0, self.k, self.model, self._anchor_dist[: self.t])
        return Decision(True, Reason.FFT_SELECTED) if t in S else SKIP
