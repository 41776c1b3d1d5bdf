"""Adversarial lower-bound datasets and benign synthetic instances.

The adversarial generators are deterministic; each comes with a validator
that checks the inequality the lower-bound argument relies on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dataset, ResourceLimitError, Rng, StreamOrder

SLACK = 1e-3  # strict inequalities are met with a (1 + SLACK) margin


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    dataset: Dataset
    intended_order: StreamOrder
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def values(self) -> np.ndarray:
        """Coordinates of a 1-D instance in intended order."""
        return self.dataset.in_order(self.intended_order)[:, 0]

    def save(self, path: str | Path) -> Path:
        """Write the points file and a ``<path>.meta.json`` sidecar.

        The points are written in intended order, so reloading yields an
        as-given order equal to it.
        """
        path = Path(path)
        Dataset(self.dataset.in_order(self.intended_order)).save(path)
        meta = sidecar_path(path)
        meta.write_text(json.dumps(self.metadata, indent=2, sort_keys=True) + "\n")
        return meta

    @classmethod
    def load(cls, path: str | Path) -> "GeneratedInstance":
        path = Path(path)
        data = Dataset.load(path)
        meta_file = sidecar_path(path)
        meta = json.loads(meta_file.read_text()) if meta_file.exists() else {"generator": "file", "params": {}, "n": data.n}
        return cls(data, StreamOrder.as_given(data.n), meta)


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def _metadata(generator: str, params: dict, n: int, k_hint: int | None, **extra) -> dict:
    meta = {"generator": generator, "params": params, "n": n, "k_hint": k_hint}
    meta.update(extra)
    return meta


def gen_geometric_groups(c: float, max_n: int) -> GeneratedInstance:
    """Value ``i`` repeated ``floor((7c)^i)`` times for ``i = 1, 2, ...``.

    The last group is cut so the total is exactly ``max_n``. Groups arrive
    from the smallest value to the largest.
    """
    if c < 1:
        raise ValueError("c must be at least 1")
    if max_n < 1:
        raise ValueError("max_n must be positive")
    sizes: list[int] = []
    remaining = max_n
    i = 1
    while remaining > 0:
        full = math.floor((7 * c) ** i)
        sizes.append(min(full, remaining))
        remaining -= sizes[-1]
        i += 1
    truncated = sizes[-1] < math.floor((7 * c) ** len(sizes))
    values = np.repeat(np.arange(1, len(sizes) + 1, dtype=np.float64), sizes)
    meta = _metadata("geometric_groups", {"c": c, "max_n": max_n}, max_n, 1,
                     group_sizes=sizes, truncated=truncated)
    return GeneratedInstance(Dataset(values), StreamOrder.as_given(max_n), meta)


def _check_finite(values: list[float], sq_sum: float, name: str, c: float):
    if not (math.isfinite(values[-1]) and math.isfinite(sq_sum)):
        raise ResourceLimitError(
            f"{name}: float64 overflow at point {len(values)}; the largest feasible n for c={c} is {len(values) - 1}"
        )


def gen_increasing_gaps(c: float, n: int) -> GeneratedInstance:
    """Increasing 1-D points whose every new gap dwarfs the earlier mass.

    ``x1 = 0``, ``x2 = 1`` and ``x_{t+1} = x_t + (1 + SLACK) sqrt(c * sum_{s=2..t} x_s^2)``.
    Streamed as given, skipping the newest point costs more than ``c``
    times the optimum of the prefix.

    Raises:
        ResourceLimitError: if the sequence overflows float64 before ``n`` points.
    """
    if not c > 1:
        raise ValueError("c must exceed 1")
    if n < 2:
        raise ValueError("n must be at least 2")
    xs = [0.0, 1.0]
    sq = 1.0  # sum of x_s^2 for s >= 2
    while len(xs) < n:
        xs.append(xs[-1] + (1 + SLACK) * math.sqrt(c * sq))
        sq += xs[-1] * xs[-1]
        _check_finite(xs, sq, "increasing_gaps", c)
    meta = _metadata("increasing_gaps", {"c": c, "n": n}, n, 2)
    return GeneratedInstance(Dataset(np.array(xs)), StreamOrder.as_given(n), meta)


def validate_increasing_gaps(instance: GeneratedInstance | Sequence[float], c: float) -> bool:
    """Check ``(x_t - x_{t-1})^2 > c * sum_{s=2..t-1} x_s^2`` for every t >= 3 (1-based)."""
    x = instance.values if isinstance(instance, GeneratedInstance) else np.asarray(instance, dtype=np.float64).ravel()
    sq = 0.0
    for t in range(2, x.size):  # 0-based t is the 1-based t* = t + 1
        sq += x[t - 1] ** 2
        if not (x[t] - x[t - 1]) ** 2 > c * sq:
            return False
    return True


def gen_k_maximal_series(c: float, k: int, n: int) -> GeneratedInstance:
    """Increasing series with ``(w_{i+1} - w_i)^2 > c * sum_{j<=i} (w_i - w_j)^2``.

    Meant to be streamed in uniformly random order; ``k`` is recorded as a hint.
    """
    if not c > 1:
        raise ValueError("c must exceed 1")
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ValueError("n must be at least k")
    ws = [0.0, 1.0][:n]
    while len(ws) < n:
        w = np.asarray(ws)
        with np.errstate(over="ignore"):
            spread = float(((w[-1] - w) ** 2).sum())
        ws.append(ws[-1] + (1 + SLACK) * math.sqrt(c * spread))
        _check_finite(ws, spread, "k_maximal_series", c)
    meta = _metadata("k_maximal_series", {"c": c, "k": k, "n": n}, n, k)
    return GeneratedInstance(Dataset(np.array(ws)), StreamOrder.as_given(n), meta)


def validate_k_maximal_series(instance: GeneratedInstance | Sequence[float], c: float) -> bool:
    w = instance.values if isinstance(instance, GeneratedInstance) else np.asarray(instance, dtype=np.float64).ravel()
    for i in range(1, w.size):
        spread = float(((w[i - 1] - w[:i]) ** 2).sum())
        if not (w[i] - w[i - 1]) ** 2 > c * spread:
            return False
    return True


def gen_separated_blobs(
    k: int,
    per_cluster: int | Sequence[int],
    separation: float,
    spread: float,
    dim: int,
    rng: Rng,
) -> GeneratedInstance:
    """``k`` uniform balls of radius ``spread`` whose centers are at least
    ``separation`` apart.

    Centers sit on a line in 1-D; in higher dimension center ``j`` is
    ``separation * (j // dim + 1) * e_{j mod dim}``. ``per_cluster`` may be a
    single size or one size per cluster.
    """
    if k < 1 or dim < 1 or not separation > 0 or not spread > 0:
        raise ValueError("k, dim, separation and spread must be positive")
    sizes = [int(per_cluster)] * k if np.isscalar(per_cluster) else [int(s) for s in per_cluster]
    if len(sizes) != k or min(sizes) < 1:
        raise ValueError("need one positive size per cluster")
    centers = np.zeros((k, dim))
    for j in range(k):
        if dim == 1:
            centers[j, 0] = j * separation
        else:
            centers[j, j % dim] = separation * (j // dim + 1)
    gen = rng.generator
    blocks, labels = [], []
    for j, size in enumerate(sizes):
        direction = gen.standard_normal((size, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = spread * gen.random(size) ** (1.0 / dim)
        blocks.append(centers[j] + direction * radius[:, None])
        labels.extend([j] * size)
    points = np.vstack(blocks)
    params = {"k": k, "per_cluster": sizes, "separation": separation, "spread": spread,
              "dim": dim, "seed": rng.seed, "stream_id": rng.stream_id}
    meta = _metadata("separated_blobs", params, points.shape[0], k,
                     centers=centers.tolist(), labels=labels)
    return GeneratedInstance(Dataset(points), StreamOrder.as_given(points.shape[0]), meta)


GENERATORS = {
    "geometric_groups": gen_geometric_groups,
    "increasing_gaps": gen_increasing_gaps,
    "k_maximal_series": gen_k_maximal_series,
    "separated_blobs": gen_separated_blobs,
}


def generate(name: str, params: dict) -> GeneratedInstance:
    """Build an instance from a generator name and JSON-style parameters.

    ``separated_blobs`` takes ``seed`` (and optional ``stream_id``) in place of an Rng.
    """
    if name not in GENERATORS:
        raise KeyError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    params = dict(params)
    if name == "separated_blobs":
        params["rng"] = Rng(int(params.pop("seed", 0)), int(params.pop("stream_id", 0)))
    return GENERATORS[name](**params)
