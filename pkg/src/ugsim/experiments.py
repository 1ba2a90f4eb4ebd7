"""Experiment orchestration: configuration, grids, ensembles, CSV output.

One experiment per invocation. A flat key=value config file seeds the
spec, command-line flags override it, and unknown keys are hard errors.
Every realization draws its own Philox stream from the master seed via
:func:`ugsim.rng.derive_seed` (grid index, realization index), so results
are byte-identical for any worker count; all cross-realization pooling
goes through the integer-count merge law of :mod:`ugsim.metrics`.

Each CSV is written atomically (temp file, rename) and is accompanied by
a ``<stem>.meta.json`` sidecar recording the full spec, the master seed,
the generator, and the code version.
"""

from __future__ import annotations

import dataclasses
import json
import math
import multiprocessing
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .core import GameParams, LearningParams
from .lattice import LatticeConfig, run_lattice
from .metrics import (
    N_LEVELS,
    N_STATES,
    BlockSeries,
    PreferenceSnapshots,
    TransitionStats,
    TransitionWindows,
    WindowCounts,
    conditional_probabilities,
)
from .rng import GENERATOR_NAME, derive_seed
from .theory import boundary_curve
from .two_player import RoleScheme, RunConfig, run

MODES = ("run", "scan-learning", "scan-game", "transitions", "lattice", "theory-boundary")

TIME_SERIES_COLUMNS = (
    ["round"]
    + [f"f_{r}{o}" for r in ("p", "q") for o in ("l", "m", "h")]
    + [f"s{i}" for i in range(1, 10)]
    + ["deal_rate"]
    + [f"pay_{r}_{o}" for r in ("p", "q") for o in ("l", "m", "h")]
    + [f"succ_{r}_{o}" for r in ("p", "q") for o in ("l", "m", "h")]
)
HEATMAP_COLUMNS = (
    ["axis1", "axis2"]
    + [f"f_{r}{o}" for r in ("p", "q") for o in ("l", "m", "h")]
    + [f"s{i}" for i in range(1, 10)]
)
TRANSITIONS_COLUMNS = [
    "window_start",
    "window_end",
    "from_state",
    "to_state",
    "joint_p",
    "cond_p",
    "net_flow",
]
PREFERENCES_COLUMNS = ["round", "state", "role", "mass_l", "mass_m", "mass_h"]
BOUNDARY_COLUMNS = ["gamma", "alpha_boundary"]


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, value, or range)."""


def parse_grid(text: str) -> list[float]:
    """Grid axis syntax: ``a0:a1:n`` (n points, inclusive) or ``v1,v2,...``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be 'a0:a1:n', got {text!r}")
        try:
            a0, a1, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as e:
            raise ConfigError(f"bad grid {text!r}: {e}") from e
        if n < 1:
            raise ConfigError(f"grid needs at least one point, got {text!r}")
        return [float(v) for v in np.linspace(a0, a1, n)]
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as e:
        raise ConfigError(f"bad grid {text!r}: {e}") from e


def parse_windows(text: str) -> list[tuple[int, int]]:
    """Window list syntax: ``start:end[,start:end...]`` (half-open rounds)."""
    windows = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) != 2:
            raise ConfigError(f"window must be 'start:end', got {token!r}")
        try:
            start, end = int(float(parts[0])), int(float(parts[1]))
        except ValueError as e:
            raise ConfigError(f"bad window {token!r}: {e}") from e
        if not 0 <= start < end:
            raise ConfigError(f"window must satisfy 0 <= start < end, got {token!r}")
        windows.append((start, end))
    if not windows:
        raise ConfigError("empty window list")
    return windows


def _parse_bool(text: str) -> bool:
    lookup = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}
    try:
        return lookup[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"expected a boolean, got {text!r}") from None


def _parse_scheme(text: str) -> RoleScheme:
    try:
        return RoleScheme(text.strip().lower())
    except ValueError:
        raise ConfigError(
            f"scheme must be one of {[s.value for s in RoleScheme]}, got {text!r}"
        ) from None


def _parse_mode(text: str) -> str:
    text = text.strip()
    if text not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {text!r}")
    return text


@dataclass
class ExperimentSpec:
    """Everything one invocation needs; defaults mirror the documented ones."""

    mode: str = "run"
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.01
    l: float = 0.3
    h: float = 0.8
    scheme: RoleScheme = RoleScheme.ROTATING
    steps: int | None = None  # defaults to transient + window
    transient: int = 2_000_000
    window: int = 1_000
    seed: int = 1
    ensemble: int = 100
    out: str = "results"
    alpha_grid: list[float] | None = None
    gamma_grid: list[float] | None = None
    l_grid: list[float] | None = None
    h_grid: list[float] | None = None
    windows: list[tuple[int, int]] | None = None
    n: int = 50
    record_every: int = 1
    snapshot_every: int = 1_000
    preferences_conditional: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.steps is None:
            self.steps = self.transient + self.window
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.ensemble < 1:
            raise ConfigError(f"ensemble must be >= 1, got {self.ensemble}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if self.snapshot_every < 1:
            raise ConfigError(f"snapshot_every must be >= 1, got {self.snapshot_every}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.mode == "scan-learning" and not (self.alpha_grid and self.gamma_grid):
            raise ConfigError("scan-learning needs non-empty alpha_grid and gamma_grid")
        if self.mode == "scan-game" and not (self.l_grid and self.h_grid):
            raise ConfigError("scan-game needs non-empty l_grid and h_grid")
        if self.mode == "theory-boundary" and not self.gamma_grid:
            raise ConfigError("theory-boundary needs a non-empty gamma_grid")
        if self.mode == "transitions" and self.windows is None:
            self.windows = [(self.transient, self.transient + self.window)]
        # surface range violations now rather than mid-run
        try:
            self.run_config(seed=0)
            if self.mode == "lattice":
                self.lattice_config(seed=0)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def game(self, l: float | None = None, h: float | None = None) -> GameParams:
        return GameParams(l=self.l if l is None else l, h=self.h if h is None else h)

    def learn(
        self, alpha: float | None = None, gamma: float | None = None
    ) -> LearningParams:
        return LearningParams(
            alpha=self.alpha if alpha is None else alpha,
            gamma=self.gamma if gamma is None else gamma,
            epsilon=self.epsilon,
        )

    def run_config(
        self,
        seed: int,
        alpha: float | None = None,
        gamma: float | None = None,
        l: float | None = None,
        h: float | None = None,
    ) -> RunConfig:
        return RunConfig(
            game=self.game(l, h),
            learn=self.learn(alpha, gamma),
            scheme=self.scheme,
            steps=self.steps,
            transient=self.transient,
            window=self.window,
            seed=seed,
        )

    def lattice_config(self, seed: int) -> LatticeConfig:
        return LatticeConfig(
            n=self.n,
            game=self.game(),
            learn=self.learn(),
            steps=self.steps,
            transient=self.transient,
            window=self.window,
            seed=seed,
        )


_SCHEMA: dict[str, Callable[[str], Any]] = {
    "mode": _parse_mode,
    "alpha": float,
    "gamma": float,
    "epsilon": float,
    "l": float,
    "h": float,
    "scheme": _parse_scheme,
    "steps": lambda s: int(float(s)),
    "transient": lambda s: int(float(s)),
    "window": lambda s: int(float(s)),
    "seed": lambda s: int(s, 0),
    "ensemble": int,
    "out": str,
    "alpha_grid": parse_grid,
    "gamma_grid": parse_grid,
    "l_grid": parse_grid,
    "h_grid": parse_grid,
    "windows": parse_windows,
    "n": int,
    "record_every": lambda s: int(float(s)),
    "snapshot_every": lambda s: int(float(s)),
    "preferences_conditional": _parse_bool,
    "jobs": int,
}


def parse_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ExperimentSpec:
    """Build a spec from an optional key=value file plus typed overrides.

    File lines are ``key = value`` with ``#`` comments; unknown keys in
    either source are errors, never silently ignored.
    """
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                data[key] = _SCHEMA[key](value)
            except ConfigError as e:
                raise ConfigError(f"{path}:{lineno}: {e}") from e
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {e}") from e
    for key, value in (overrides or {}).items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown option {key!r}")
        if value is not None:
            data[key] = value
    try:
        return ExperimentSpec(**data)
    except ValueError as e:
        raise ConfigError(str(e)) from e


# ---------------------------------------------------------------------------
# serialization helpers


def format_number(x: Any) -> str:
    """Round-trip-exact decimal for floats, plain digits for ints."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonify(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_meta(csv_path: Path, spec: ExperimentSpec, columns: Sequence[str], **extra: Any) -> Path:
    from . import __version__

    meta = {
        "spec": _jsonify(dataclasses.asdict(spec)),
        "master_seed": spec.seed,
        "code_version": __version__,
        "rng": GENERATOR_NAME,
        "seed_derivation": "sha256('ugsim' || master || grid_index || realization)[:16] as Philox key",
        "columns": list(columns),
    }
    meta.update(_jsonify(extra))
    meta_path = csv_path.with_name(csv_path.name.removesuffix(".csv") + ".meta.json")
    _atomic_write(meta_path, json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return meta_path


# ---------------------------------------------------------------------------
# per-realization tasks (top level so they pickle for process pools)


def _guard(config, fn, *args):
    try:
        return fn(config, *args)
    except Exception as e:  # noqa: BLE001 - re-raise with the failing seed named
        raise RuntimeError(f"realization with seed {config.seed} failed: {e}") from e


def _window_task(config: RunConfig) -> np.ndarray:
    wc = WindowCounts(config.transient, config.transient + config.window)
    run(config, consumers=(wc,))
    return wc.pairs


def _blocks_task(config: RunConfig, block: int, snapshot_every: int):
    bs = BlockSeries(config.steps, block)
    snaps = PreferenceSnapshots(snapshot_every)
    run(config, consumers=(bs,), snapshotter=snaps)
    return bs.pairs, snaps


def _transitions_task(config: RunConfig, windows: tuple[tuple[int, int], ...]) -> np.ndarray:
    tw = TransitionWindows(windows)
    run(config, consumers=(tw,))
    return np.stack([s.counts for s in tw.stats])


def _lattice_blocks_task(config: LatticeConfig, block_rounds: int) -> np.ndarray:
    bs = BlockSeries(config.steps * config.n, block_rounds)
    run_lattice(config, consumers=(bs,))
    return bs.pairs


def _lattice_window_task(config: LatticeConfig) -> np.ndarray:
    wc = WindowCounts(config.transient * config.n, (config.transient + config.window) * config.n)
    run_lattice(config, consumers=(wc,))
    return wc.pairs


def _map_tasks(fn: Callable, configs: Sequence[Any], jobs: int) -> list[Any]:
    """Run one task per config, in order; workers never share state."""
    if jobs <= 1 or len(configs) <= 1:
        return [_guard(c, fn) for c in configs]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as ex:
        return list(ex.map(partial(_guard, fn=fn), configs, chunksize=1))


# ---------------------------------------------------------------------------
# row assembly


def _series_cells(pairs: np.ndarray, instances: int, values: np.ndarray) -> list[float]:
    """The 28 non-round time-series cells from pooled pair counts."""
    m = pairs.reshape(N_LEVELS, N_LEVELS)
    attempts_p = m.sum(axis=1)
    attempts_q = m.sum(axis=0)
    lower = np.tril(m)  # successes: proposer level >= responder level
    succ_p = lower.sum(axis=1)
    succ_q = lower.sum(axis=0)
    f_p = attempts_p / instances
    f_q = attempts_q / instances
    f_s = pairs / instances
    deal_rate = lower.sum() / instances
    with np.errstate(divide="ignore", invalid="ignore"):
        pay_p = np.where(attempts_p > 0, succ_p * (1.0 - values) / attempts_p, np.nan)
        pay_q = np.where(attempts_q > 0, (lower * values[:, None]).sum(axis=0) / attempts_q, np.nan)
        rate_p = np.where(attempts_p > 0, succ_p / attempts_p, np.nan)
        rate_q = np.where(attempts_q > 0, succ_q / attempts_q, np.nan)
    return [*f_p, *f_q, *f_s, deal_rate, *pay_p, *pay_q, *rate_p, *rate_q]


def _heatmap_cells(pairs: np.ndarray, instances: int) -> list[float]:
    m = pairs.reshape(N_LEVELS, N_LEVELS)
    return [*(m.sum(axis=1) / instances), *(m.sum(axis=0) / instances), *(pairs / instances)]


# ---------------------------------------------------------------------------
# mode drivers


def _drive_run(spec: ExperimentSpec, out: Path) -> list[Path]:
    configs = [
        spec.run_config(seed=derive_seed(spec.seed, 0, k)) for k in range(spec.ensemble)
    ]
    fn = partial(_blocks_task, block=spec.record_every, snapshot_every=spec.snapshot_every)
    results = _map_tasks(fn, configs, spec.jobs)
    pooled = results[0][0].copy()
    snaps = results[0][1]
    for pairs, sn in results[1:]:
        pooled += pairs
        snaps.merge(sn)

    values = spec.game().values()
    series = BlockSeries(spec.steps, spec.record_every)
    rows = []
    for b in range(pooled.shape[0]):
        instances = series.block_rounds(b) * spec.ensemble
        rows.append([b * spec.record_every, *_series_cells(pooled[b], instances, values)])
    ts_path = out / "time_series.csv"
    write_csv(ts_path, TIME_SERIES_COLUMNS, rows)
    write_meta(ts_path, spec, TIME_SERIES_COLUMNS, rows_are="block averages",
               block_rounds=spec.record_every)

    pref_rows = []
    role_names = ("proposer", "responder")
    for i, rnd in enumerate(snaps.rounds):
        masses = snaps.masses(i, conditional=spec.preferences_conditional)
        for s in range(N_STATES):
            for role in (0, 1):
                pref_rows.append([rnd, s + 1, role_names[role], *masses[role, s]])
    pref_path = out / "preferences.csv"
    write_csv(pref_path, PREFERENCES_COLUMNS, pref_rows)
    write_meta(pref_path, spec, PREFERENCES_COLUMNS,
               variant="conditional" if spec.preferences_conditional else "unconditional")
    return [ts_path, pref_path]


def _drive_scan(spec: ExperimentSpec, out: Path) -> list[Path]:
    if spec.mode == "scan-learning":
        axis1, axis2 = spec.alpha_grid, spec.gamma_grid
        axes = ("alpha", "gamma")
    else:
        axis1, axis2 = spec.l_grid, spec.h_grid
        axes = ("l", "h")

    grid: list[tuple[float, float]] = [(v1, v2) for v1 in axis1 for v2 in axis2]
    configs = []
    for g, (v1, v2) in enumerate(grid):
        for k in range(spec.ensemble):
            seed = derive_seed(spec.seed, g, k)
            if spec.mode == "scan-learning":
                configs.append(spec.run_config(seed=seed, alpha=v1, gamma=v2))
            else:
                configs.append(spec.run_config(seed=seed, l=v1, h=v2))
    results = _map_tasks(_window_task, configs, spec.jobs)

    rows = []
    instances = spec.window * spec.ensemble
    for g, (v1, v2) in enumerate(grid):
        pooled = np.zeros(N_LEVELS * N_LEVELS, dtype=np.int64)
        for k in range(spec.ensemble):
            pooled += results[g * spec.ensemble + k]
        rows.append([v1, v2, *_heatmap_cells(pooled, instances)])
    path = out / "heatmap.csv"
    write_csv(path, HEATMAP_COLUMNS, rows)
    write_meta(path, spec, HEATMAP_COLUMNS, axis1=axes[0], axis2=axes[1],
               window=[spec.transient, spec.transient + spec.window])
    return [path]


def _drive_transitions(spec: ExperimentSpec, out: Path) -> list[Path]:
    windows = tuple(spec.windows)
    configs = [
        spec.run_config(seed=derive_seed(spec.seed, 0, k)) for k in range(spec.ensemble)
    ]
    results = _map_tasks(partial(_transitions_task, windows=windows), configs, spec.jobs)
    pooled = results[0].copy()
    for counts in results[1:]:
        pooled += counts

    rows = []
    for w, (start, end) in enumerate(windows):
        counts = pooled[w]
        total = counts.sum()
        joint = counts / total if total > 0 else np.full_like(counts, np.nan, dtype=float)
        cond = conditional_probabilities(TransitionStats(counts))
        net = joint - joint.T
        for i in range(N_STATES):
            for j in range(N_STATES):
                rows.append(
                    [start, end, i + 1, j + 1, joint[i, j], cond[i, j], net[i, j]]
                )
    path = out / "transitions.csv"
    write_csv(path, TRANSITIONS_COLUMNS, rows)
    write_meta(path, spec, TRANSITIONS_COLUMNS, windows=[list(w) for w in windows])
    return [path]


def _drive_lattice(spec: ExperimentSpec, out: Path) -> list[Path]:
    configs = [
        spec.lattice_config(seed=derive_seed(spec.seed, 0, k)) for k in range(spec.ensemble)
    ]
    block_rounds = spec.record_every * spec.n
    results = _map_tasks(
        partial(_lattice_blocks_task, block_rounds=block_rounds), configs, spec.jobs
    )
    pooled = results[0].copy()
    for pairs in results[1:]:
        pooled += pairs

    values = spec.game().values()
    series = BlockSeries(spec.steps * spec.n, block_rounds)
    rows = []
    for b in range(pooled.shape[0]):
        instances = series.block_rounds(b) * spec.ensemble
        rows.append([b * spec.record_every, *_series_cells(pooled[b], instances, values)])
    path = out / "time_series.csv"
    write_csv(path, TIME_SERIES_COLUMNS, rows)
    write_meta(path, spec, TIME_SERIES_COLUMNS, rows_are="block averages over all edges",
               block_steps=spec.record_every, edges_per_step=spec.n)
    return [path]


def _drive_theory(spec: ExperimentSpec, out: Path) -> list[Path]:
    curve = boundary_curve(spec.game(), np.asarray(spec.gamma_grid))
    rows = [
        [g, math.nan if a is None else a] for g, a in zip(curve.gammas, curve.alphas)
    ]
    path = out / "boundary.csv"
    write_csv(path, BOUNDARY_COLUMNS, rows)
    write_meta(path, spec, BOUNDARY_COLUMNS)
    return [path]


def run_experiment(spec: ExperimentSpec) -> dict[str, Any]:
    """Dispatch one experiment; returns a machine-readable summary."""
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    drivers = {
        "run": _drive_run,
        "scan-learning": _drive_scan,
        "scan-game": _drive_scan,
        "transitions": _drive_transitions,
        "lattice": _drive_lattice,
        "theory-boundary": _drive_theory,
    }
    files = drivers[spec.mode](spec, out)
    return {
        "mode": spec.mode,
        "out": str(out),
        "files": [str(p) for p in files],
        "master_seed": spec.seed,
        "ensemble": spec.ensemble,
    }
