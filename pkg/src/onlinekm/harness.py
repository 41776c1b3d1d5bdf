"""Trial and experiment runner with CSV/JSON reports.

A trial streams one instance in one order through one clusterer, then
scores the taken centers against a baseline over the full dataset: the
exact optimum when the subset count fits the budget, otherwise an offline
clustering of the full data.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import GENERATOR_NAME, ConfigError, CostModel, Dataset, ResourceLimitError, Rng, StreamOrder, uniform_permutation
from .cost import DEFAULT_ORACLE_BUDGET, brute_force_opt, clustering_cost, n_subsets
from .instances import GeneratedInstance, generate
from .offline import OfflineConfig, offline_cluster
from .online import (
    DoublingClusterer,
    FFTClusterer,
    FirstPointClusterer,
    MaxDistanceClusterer,
    OnlineClusterer,
    OnlineTrace,
    RandomIndexClusterer,
    TakeAllClusterer,
    ThreePhaseClusterer,
    run_stream_blocked,
)

CSV_HEADER = (
    "trial_id", "seed", "n", "k", "algorithm", "order", "centers_taken",
    "alg_cost", "baseline_cost", "baseline_kind", "ratio", "runtime_ms",
)
DEFAULT_THRESHOLDS = (1.0, 1.5, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0, 20100.0)
BASELINE_STREAM = 2**63  # Rng stream id reserved for the offline baseline


def harmonic_number(m: int) -> float:
    return math.fsum(1.0 / i for i in range(1, m + 1))


def harmonic_reference(n: int, k: int) -> float:
    """Expected center count used as the reference for the unknown-n algorithms.

    ``k + k (H_n - H_k)``; for ``k = 1`` this returns ``1 + H_{n-1}``, the
    count for the max-distance rule. Computed by direct summation.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if k == 1:
        return 1.0 + harmonic_number(n - 1)
    return k + k * math.fsum(1.0 / j for j in range(k + 1, n + 1))


# ---------------------------------------------------------------------------
# Algorithms
# ---------------------------------------------------------------------------


ALGORITHMS = ("take_all", "first_point", "random_index", "doubling", "three_phase", "max_distance", "fft")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ConfigError(f"algorithm.name: unknown algorithm {self.name!r}; choose from {list(ALGORITHMS)}")
        if self.name in ("three_phase", "fft") and "k" not in self.params:
            raise ConfigError(f"algorithm.params.k: required for {self.name}")
        if self.name == "doubling" and "c" not in self.params:
            raise ConfigError("algorithm.params.c: required for doubling")

    @property
    def k(self) -> int:
        """Number of clusters the baseline is computed for."""
        if self.name in ("three_phase", "fft"):
            return int(self.params["k"])
        if self.name == "max_distance":
            return 2
        return int(self.params.get("k", 1))

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        args = ";".join(f"{key}={self.params[key]}" for key in sorted(self.params) if key != "offline")
        return f"{self.name}({args})"

    def build(self, n: int, model: CostModel, rng: Rng) -> OnlineClusterer:
        p = self.params
        if self.name == "take_all":
            return TakeAllClusterer()
        if self.name == "first_point":
            return FirstPointClusterer()
        if self.name == "random_index":
            return RandomIndexClusterer(n, rng)
        if self.name == "doubling":
            return DoublingClusterer(float(p["c"]), rng)
        if self.name == "max_distance":
            return MaxDistanceClusterer(model)
        if self.name == "fft":
            return FFTClusterer(int(p["k"]), model)
        return ThreePhaseClusterer(
            n, int(p["k"]), OfflineConfig(**p.get("offline", {})), model, rng,
            alpha=p.get("alpha"), alpha2=p.get("alpha2"),
            take_first_point=bool(p.get("take_first_point", True)),
        )


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


class BaselineKind(str, enum.Enum):
    EXACT_ORACLE = "ExactOracle"
    OFFLINE_BASELINE = "OfflineBaseline"


@dataclass(frozen=True)
class Baseline:
    cost: float
    kind: BaselineKind


def compute_baseline(
    dataset: Dataset,
    k: int,
    model: CostModel,
    budget: int = DEFAULT_ORACLE_BUDGET,
    rng: Rng | None = None,
) -> Baseline:
    """Exact optimum if C(n, k) fits ``budget``, else offline clustering (8 restarts)."""
    k = min(k, dataset.n)
    if n_subsets(dataset.n, k) <= budget:
        try:
            return Baseline(brute_force_opt(dataset, k, model, budget).cost, BaselineKind.EXACT_ORACLE)
        except ResourceLimitError:
            pass
    centers = offline_cluster(dataset, k, OfflineConfig(restarts=8, exact_threshold=0), model,
                              rng if rng is not None else Rng(0, BASELINE_STREAM))
    return Baseline(clustering_cost(dataset, centers, model), BaselineKind.OFFLINE_BASELINE)


def cost_ratio(alg_cost: float, baseline_cost: float) -> float:
    if baseline_cost == 0:
        return 1.0 if alg_cost == 0 else math.inf
    return alg_cost / baseline_cost


@dataclass(frozen=True)
class TrialResult:
    trial_id: int
    seed: int
    n: int
    k: int
    algorithm: str
    order: str
    centers_taken: int
    alg_cost: float
    baseline_cost: float
    baseline_kind: BaselineKind
    ratio: float
    runtime_ms: float

    def to_row(self) -> list[str]:
        return [
            str(self.trial_id), str(self.seed), str(self.n), str(self.k), self.algorithm, self.order,
            str(self.centers_taken), _fmt(self.alg_cost), _fmt(self.baseline_cost),
            BaselineKind(self.baseline_kind).value, _fmt(self.ratio), _fmt(self.runtime_ms),
        ]

    @classmethod
    def from_row(cls, row: dict) -> "TrialResult":
        return cls(
            int(row["trial_id"]), int(row["seed"]), int(row["n"]), int(row["k"]), row["algorithm"],
            row["order"], int(row["centers_taken"]), float(row["alg_cost"]), float(row["baseline_cost"]),
            BaselineKind(row["baseline_kind"]), float(row["ratio"]), float(row["runtime_ms"]),
        )


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def stream_instance(
    instance: GeneratedInstance | Dataset,
    order: StreamOrder,
    algorithm: AlgorithmSpec,
    model: CostModel,
    rng: Rng,
) -> OnlineTrace:
    """Run one clusterer over ``instance`` in ``order`` and return its trace."""
    dataset = instance.dataset if isinstance(instance, GeneratedInstance) else instance
    points = dataset.in_order(order)
    clusterer = algorithm.build(dataset.n, model, rng)
    return run_stream_blocked(clusterer, points)


def run_trial(
    instance: GeneratedInstance | Dataset,
    order: StreamOrder,
    algorithm: AlgorithmSpec,
    model: CostModel,
    rng: Rng,
    *,
    baseline: Baseline | None = None,
    budget: int = DEFAULT_ORACLE_BUDGET,
    trial_id: int = 0,
    seed: int = 0,
    timing: bool = True,
) -> TrialResult:
    """Stream, then score the taken centers over the full dataset.

    The cost is evaluated once, after the stream ends, against every point.
    ``baseline`` may be passed in to reuse it across trials on one instance.
    """
    dataset = instance.dataset if isinstance(instance, GeneratedInstance) else instance
    if len(order) != dataset.n:
        raise ValueError(f"order has length {len(order)}, instance has {dataset.n} points")
    start = time.perf_counter()
    trace = stream_instance(dataset, order, algorithm, model, rng)
    alg_cost = clustering_cost(dataset, trace.centers, model) if trace.n_centers else math.inf
    elapsed = (time.perf_counter() - start) * 1e3 if timing else 0.0
    if baseline is None:
        baseline = compute_baseline(dataset, algorithm.k, model, budget)
    return TrialResult(
        trial_id=trial_id, seed=seed, n=dataset.n, k=algorithm.k, algorithm=algorithm.label,
        order=order.provenance, centers_taken=trace.n_centers, alg_cost=alg_cost,
        baseline_cost=baseline.cost, baseline_kind=baseline.kind,
        ratio=cost_ratio(alg_cost, baseline.cost), runtime_ms=round(elapsed, 3),
    )


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Validated experiment configuration (see :meth:`from_dict` for the JSON shape)."""

    algorithm: AlgorithmSpec
    instance: dict
    model: CostModel = field(default_factory=CostModel.squared_euclidean)
    order: str = "random"
    trials: int = 1
    seed: int = 0
    baseline_budget: int = DEFAULT_ORACLE_BUDGET
    output: str | None = None
    workers: int = 1
    timing: bool = True
    success_thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        """Parse::

            {"algorithm": {"name": "fft", "params": {"k": 3}},
             "instance": {"generator": "separated_blobs", "params": {...}} | {"file": "pts.txt"},
             "model": "squared_euclidean", "order": "random" | "given",
             "trials": 200, "seed": 1, "baseline_budget": 10000000, "output": "out/"}

        Raises:
            ConfigError: naming the offending field path.
        """
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        alg = raw.get("algorithm")
        if not isinstance(alg, dict) or "name" not in alg:
            raise ConfigError("algorithm: expected an object with a 'name'")
        params = alg.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("algorithm.params: expected an object")
        algorithm = AlgorithmSpec(str(alg["name"]), dict(params))

        inst = raw.get("instance")
        if not isinstance(inst, dict) or not ("file" in inst or "generator" in inst):
            raise ConfigError("instance: expected {'file': ...} or {'generator': ..., 'params': {...}}")
        try:
            model = CostModel.parse(raw.get("model", "squared_euclidean"))
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"model: {exc}") from None
        order = raw.get("order", "random")
        if order not in ("given", "random"):
            raise ConfigError(f"order: expected 'given' or 'random', got {order!r}")
        ints = {}
        for name, default, lo in (("trials", 1, 1), ("seed", 0, 0), ("baseline_budget", DEFAULT_ORACLE_BUDGET, 0), ("workers", 1, 1)):
            value = raw.get(name, default)
            if isinstance(value, bool) or not isinstance(value, int) or value < lo:
                raise ConfigError(f"{name}: expected an integer >= {lo}, got {value!r}")
            ints[name] = value
        thresholds = raw.get("success_thresholds", DEFAULT_THRESHOLDS)
        try:
            thresholds = tuple(float(a) for a in thresholds)
        except (TypeError, ValueError):
            raise ConfigError("success_thresholds: expected a list of numbers") from None
        return cls(algorithm=algorithm, instance=dict(inst), model=model, order=order,
                   output=raw.get("output"), timing=bool(raw.get("timing", True)),
                   success_thresholds=thresholds, **ints)

    def to_dict(self) -> dict:
        return {
            "algorithm": {"name": self.algorithm.name, "params": self.algorithm.params},
            "instance": self.instance,
            "model": self.model.name,
            "order": self.order,
            "trials": self.trials,
            "seed": self.seed,
            "baseline_budget": self.baseline_budget,
            "output": self.output,
            "workers": self.workers,
            "timing": self.timing,
            "success_thresholds": list(self.success_thresholds),
        }

    def resolve_instance(self) -> GeneratedInstance:
        inst = self.instance
        try:
            if "file" in inst:
                return GeneratedInstance.load(inst["file"])
            return generate(inst["generator"], inst.get("params", {}))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"instance: {exc}") from None


def _success_rate(ratios: np.ndarray, a: float) -> float:
    return float(np.count_nonzero(ratios <= a) / ratios.size)


def _stats(values: np.ndarray) -> dict:
    # order statistics (no interpolation) stay defined when ratios are infinite
    q = lambda p: float(np.percentile(values, p, method="inverted_cdf"))  # noqa: E731
    return {"mean": float(np.mean(values)), "median": q(50), "p90": q(90), "p99": q(99)}


def aggregate(rows: list[TrialResult], thresholds=DEFAULT_THRESHOLDS) -> dict:
    centers = np.array([r.centers_taken for r in rows], dtype=np.float64)
    ratios = np.array([r.ratio for r in rows], dtype=np.float64)
    return {
        "trials": len(rows),
        "centers_taken": _stats(centers),
        "ratio": _stats(ratios),
        "success_rate": {repr(float(a)): _success_rate(ratios, a) for a in thresholds},
    }


def _encode(obj: Any) -> Any:
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    return obj


def _decode(obj: Any) -> Any:
    if obj == "inf" or obj == "-inf":
        return float(obj)
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


class ReportError(ValueError):
    pass


@dataclass
class ExperimentReport:
    config: dict
    rows: list[TrialResult]
    aggregates: dict

    def success_rate(self, a: float) -> float:
        """Fraction of trials whose cost ratio is at most ``a``."""
        return _success_rate(np.array([r.ratio for r in self.rows]), a)

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow(r.to_row())
        return buf.getvalue()

    def json_text(self) -> str:
        doc = {"config": self.config, "rng": GENERATOR_NAME, "aggregates": self.aggregates}
        return json.dumps(_encode(doc), indent=2, sort_keys=True) + "\n"

    def write(self, directory: str | Path) -> tuple[Path, Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / "report.csv", out / "report.json"
        csv_path.write_text(self.csv_text())
        json_path.write_text(self.json_text())
        return csv_path, json_path

    @classmethod
    def load(cls, directory: str | Path) -> "ExperimentReport":
        """Read a written report and verify its aggregates against its rows.

        Raises:
            ReportError: if the header is wrong or the stored aggregates differ
                from those recomputed from the rows.
        """
        out = Path(directory)
        with open(out / "report.csv", newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ReportError(f"unexpected CSV header {reader.fieldnames}")
            rows = [TrialResult.from_row(r) for r in reader]
        doc = json.loads((out / "report.json").read_text())
        thresholds = doc["config"].get("success_thresholds", DEFAULT_THRESHOLDS)
        recomputed = json.loads(json.dumps(_encode(aggregate(rows, thresholds))))
        if recomputed != doc["aggregates"]:
            raise ReportError("stored aggregates do not match the rows")
        return cls(doc["config"], rows, _decode(doc["aggregates"]))


# per-process state for pooled trials
_WORKER: dict = {}


def _init_worker(cfg: ExperimentConfig, instance: GeneratedInstance, baseline: Baseline):
    _WORKER.update(cfg=cfg, instance=instance, baseline=baseline)


def _trial(trial_id: int, cfg: ExperimentConfig, instance: GeneratedInstance, baseline: Baseline) -> TrialResult:
    trial_rng = Rng(cfg.seed, trial_id)
    if cfg.order == "random":
        order = uniform_permutation(instance.n, trial_rng.child(0))
    else:
        order = instance.intended_order
    return run_trial(instance, order, cfg.algorithm, cfg.model, trial_rng.child(1), baseline=baseline,
                     trial_id=trial_id, seed=cfg.seed, timing=cfg.timing)


def _pooled_trial(trial_id: int) -> TrialResult:
    return _trial(trial_id, _WORKER["cfg"], _WORKER["instance"], _WORKER["baseline"])


def run_experiment(config: ExperimentConfig | dict, instance: GeneratedInstance | None = None) -> ExperimentReport:
    """Run ``config.trials`` independent trials and aggregate them.

    Trial ``i`` draws its order from ``Rng(seed, i).child(0)`` and its
    algorithm randomness from ``Rng(seed, i).child(1)``, so results do not
    depend on ``workers``. Rows come back in trial order.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    if instance is None:
        instance = cfg.resolve_instance()
    baseline = compute_baseline(instance.dataset, cfg.algorithm.k, cfg.model, cfg.baseline_budget,
                                Rng(cfg.seed, BASELINE_STREAM))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(cfg, instance, baseline)) as pool:
            rows = list(pool.map(_pooled_trial, range(cfg.trials)))
    else:
        rows = [_trial(i, cfg, instance, baseline) for i in range(cfg.trials)]
    report = ExperimentReport(cfg.to_dict(), rows, aggregate(rows, cfg.success_thresholds))
    if cfg.output:
        report.write(cfg.output)
    return report
