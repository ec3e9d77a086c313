"""Seeded Monte Carlo driver for the power, relay-location, and
convergence experiments.

Every (grid point, trial) pair owns an independent RNG substream derived
from the root seed, so results are bit-reproducible and independent of
worker scheduling; all schemes share the channel realization of their
(grid point, trial) pair, which keeps scheme comparisons paired. The grid
is kept sorted so permuting the input order cannot relabel substreams.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .baselines import run_baseline
from .config import SystemConfig
from .core import ChannelSet, RateReport
from .channel import sample_channel_set
from .errors import ConfigError, DomainError
from .wmmse import run_wmmse

SCHEMES = ("wmmse", "rzf", "zf")
SWEEP_KINDS = ("power", "relay_location", "iterations")

CSV_HEADER = "sweep_value,scheme,mean_sum_rate_bps_hz,stderr,trials"


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: a grid of sweep values, trials per point, schemes."""

    kind: str = "power"
    grid: tuple = ()
    trials: int = 50
    seed: int = 1234
    schemes: tuple = SCHEMES
    base: SystemConfig = field(default_factory=SystemConfig)

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigError(f"sweep kind must be one of {SWEEP_KINDS}, got {self.kind!r}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            grid = DEFAULT_GRIDS[self.kind]
        object.__setattr__(self, "grid", tuple(sorted(grid)))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        schemes = tuple(s.lower() for s in self.schemes)
        for s in schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; expected subset of {SCHEMES}")
        if self.kind == "iterations" and schemes != ("wmmse",):
            schemes = ("wmmse",)
        object.__setattr__(self, "schemes", schemes)
        if self.kind == "relay_location":
            for v in self.grid:
                if not 0.0 < v <= 1.0:
                    raise ConfigError(
                        f"relay-location grid values must lie in (0, 1], got {v}")


DEFAULT_GRIDS = {
    "power": tuple(float(p) for p in range(0, 45, 5)),
    "relay_location": tuple(round(0.1 * i, 10) for i in range(1, 11)),
    "iterations": (0.001, 0.01, 0.1),
}


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    scheme: str
    mean_sum_rate: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    metadata: dict

    def write_csv(self, path) -> None:
        lines = [CSV_HEADER]
        for row in self.rows:
            lines.append(f"{row.sweep_value!r},{row.scheme},"
                         f"{row.mean_sum_rate!r},{row.stderr!r},{row.trials}")
        _atomic_write(path, "\n".join(lines) + "\n")

    def write_json(self, path) -> None:
        _atomic_write(path, json.dumps(self.metadata, indent=2, sort_keys=True) + "\n")


def _atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(cfg: SystemConfig, spec: SweepSpec) -> str:
    """Short stable digest of the fully resolved configuration."""
    payload = {"system": asdict(cfg), "sweep": {
        "kind": spec.kind, "grid": spec.grid, "trials": spec.trials,
        "seed": spec.seed, "schemes": spec.schemes}}
    text = json.dumps(payload, sort_keys=True, default=float)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def result_basename(spec: SweepSpec) -> str:
    return f"{spec.kind}_{config_hash(spec.base, spec)}"


def trial_rng(seed: int, grid_index: int, trial_index: int) -> np.random.Generator:
    """Independent substream for one (grid point, trial) pair."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(grid_index), int(trial_index)]))


def run_trial(scheme: str, ch: ChannelSet, cfg: SystemConfig) -> RateReport:
    """Evaluate one scheme on one channel realization."""
    scheme = scheme.lower()
    if scheme == "wmmse":
        return run_wmmse(ch, cfg).report
    if scheme in ("zf", "rzf"):
        return run_baseline(scheme, ch, cfg)[1]
    raise DomainError(f"unknown scheme {scheme!r}")


def _grid_config(spec: SweepSpec, value: float) -> SystemConfig:
    if spec.kind == "power":
        return replace(spec.base, p_bs_dbm=value, p_re_dbm=value)
    if spec.kind == "relay_location":
        geo = replace(spec.base.geometry,
                      relay_distance_m=value * spec.base.geometry.d_max_m)
        return replace(spec.base, geometry=geo)
    # iterations: sweep value is the stopping tolerance
    alg = replace(spec.base.algorithm, tolerance=value)
    return replace(spec.base, algorithm=alg)


def _sweep_work_item(args):
    spec, grid_index, trial_index = args
    cfg = _grid_config(spec, spec.grid[grid_index])
    ch = sample_channel_set(trial_rng(spec.seed, grid_index, trial_index), cfg)
    return {scheme: run_trial(scheme, ch, cfg).sum_rate for scheme in spec.schemes}


def _map_items(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _mean_stderr(values) -> tuple:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def _metadata(spec: SweepSpec, extra: dict | None = None) -> dict:
    meta = {
        "kind": spec.kind,
        "grid": list(spec.grid),
        "trials": spec.trials,
        "seed": spec.seed,
        "schemes": list(spec.schemes),
        "config": asdict(spec.base),
        "config_hash": config_hash(spec.base, spec),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "code_version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta


def _run_value_sweep(spec: SweepSpec, workers: int) -> SweepResult:
    items = [(spec, gi, ti)
             for gi in range(len(spec.grid)) for ti in range(spec.trials)]
    outputs = _map_items(_sweep_work_item, items, workers)
    by_point = {}
    for (_, gi, ti), rates in zip(items, outputs):
        for scheme, rate in rates.items():
            by_point.setdefault((gi, scheme), [None] * spec.trials)[ti] = rate
    rows = []
    for gi, value in enumerate(spec.grid):
        for scheme in spec.schemes:
            mean, err = _mean_stderr(by_point[(gi, scheme)])
            rows.append(SweepRow(sweep_value=value, scheme=scheme,
                                 mean_sum_rate=mean, stderr=err, trials=spec.trials))
    return SweepResult(rows=tuple(rows), metadata=_metadata(spec))


def sweep_power(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Mean sum rate per scheme across a joint P_bs = P_re grid (dBm)."""
    if spec.kind != "power":
        raise ConfigError(f"sweep_power requires kind='power', got {spec.kind!r}")
    return _run_value_sweep(spec, workers)


def sweep_relay_location(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Mean sum rate per scheme across normalized relay locations d_r/d_max."""
    if spec.kind != "relay_location":
        raise ConfigError(
            f"sweep_relay_location requires kind='relay_location', got {spec.kind!r}")
    return _run_value_sweep(spec, workers)


def _trace_work_item(args):
    spec, grid_index, trial_index = args
    cfg = _grid_config(spec, spec.grid[grid_index])
    ch = sample_channel_set(trial_rng(spec.seed, grid_index, trial_index), cfg)
    result = run_wmmse(ch, cfg)
    return list(result.trace.sum_rate_bps_hz), len(result.trace)


def convergence_trace(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Mean sum rate at each iteration index, one curve per tolerance value.

    Trials that stop early are padded with their final value. Rows use the
    shared sweep schema with sweep_value = iteration index and scheme
    "eps=<tolerance>"; mean stopping iterations land in the metadata.
    """
    if spec.kind != "iterations":
        raise ConfigError(
            f"convergence_trace requires kind='iterations', got {spec.kind!r}")
    items = [(spec, gi, ti)
             for gi in range(len(spec.grid)) for ti in range(spec.trials)]
    outputs = _map_items(_trace_work_item, items, workers)

    per_eps = {gi: [] for gi in range(len(spec.grid))}
    stop_iters = {gi: [] for gi in range(len(spec.grid))}
    for (_, gi, ti), (series, n_used) in zip(items, outputs):
        per_eps[gi].append(series)
        stop_iters[gi].append(n_used)

    rows = []
    mean_stop = {}
    for gi, eps in enumerate(spec.grid):
        longest = max(len(s) for s in per_eps[gi])
        padded = np.array([s + [s[-1]] * (longest - len(s)) for s in per_eps[gi]])
        label = f"eps={eps:g}"
        mean_stop[label] = float(np.mean(stop_iters[gi]))
        for it in range(longest):
            mean, err = _mean_stderr(padded[:, it])
            rows.append(SweepRow(sweep_value=float(it + 1), scheme=label,
                                 mean_sum_rate=mean, stderr=err, trials=spec.trials))
    return SweepResult(rows=tuple(rows),
                       metadata=_metadata(spec, {"mean_stopping_iteration": mean_stop}))


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Dispatch on the sweep kind."""
    if spec.kind == "power":
        return sweep_power(spec, workers)
    if spec.kind == "relay_location":
        return sweep_relay_location(spec, workers)
    return convergence_trace(spec, workers)
