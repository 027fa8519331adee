"""Experiment configuration (JSON), manifests and result persistence.

Config document, with defaults::

    {
      "objective": {"kind": "matrix", "target": "minus_identity"},
                   # or {"kind": "matrix", "target": {"file": "Y.npy"}}
                   # or {"kind": "scalar", "loss": "quadratic", "y": -1.0}
      "grid": [{"scheme": {"kind": "xavier_gaussian"}, "k": 2, "d": 25}, ...],
                   # default: the three desk-scale multi-dimensional schemes, k = 2..5, d = 25
      "trials": 10,
      "plan": {"eta": <required>, "max_iters": 10000000, "stop_threshold": 0.1},
      "master_seed": 0,
      "thinning": {"policy": "geometric", "value": 1.05},
      "output_dir": "results",
      "parallelism": 1          # or "auto"
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from . import __version__
from .experiments import (
    ExperimentSummary,
    TrialRecord,
    export_figure2,
    summarize,
    trials_csv,
)
from .init import (
    MATRIX_KINDS,
    NEAR_IDENTITY,
    ONE_OVER_DK,
    ONE_OVER_DK_SQUARED,
    SCALAR_KINDS,
    SEED_LIMIT,
    XAVIER_GAUSSIAN,
    InitScheme,
)
from .matrix_core import MatrixTarget
from .scalar_core import ScalarLoss, StepPlan
from .util import atomic_write_text

DEFAULT_MAX_ITERS = 10**7
DEFAULT_TRIALS = 10


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str = "matrix"
    loss_kind: str = "quadratic"
    y: float = -1.0
    target_spec: Union[str, dict] = "minus_identity"
    base_dir: Optional[str] = field(default=None, compare=False)

    def loss(self) -> ScalarLoss:
        if self.loss_kind == "logistic":
            return ScalarLoss.logistic()
        return ScalarLoss.quadratic(self.y)

    def target(self, d: int) -> MatrixTarget:
        if self.target_spec == "minus_identity":
            return MatrixTarget.minus_identity(d)
        path = Path(self.target_spec["file"])
        if not path.is_absolute() and self.base_dir:
            path = Path(self.base_dir) / path
        if path.suffix == ".npy":
            Y = np.load(path)
        else:
            Y = np.asarray(json.loads(path.read_text()), dtype=np.float64)
        target = MatrixTarget(Y)
        if target.d != d:
            raise ConfigError("objective.target", f"target in {path} is {target.d}x{target.d}, grid uses d={d}")
        return target

    def to_dict(self) -> dict:
        if self.kind == "scalar":
            out = {"kind": "scalar", "loss": self.loss_kind}
            if self.loss_kind == "quadratic":
                out["y"] = self.y
            return out
        return {"kind": "matrix", "target": self.target_spec}


@dataclass(frozen=True)
class GridCell:
    scheme: InitScheme
    k: int
    d: int = 1

    def to_dict(self) -> dict:
        return {"scheme": self.scheme.to_dict(), "k": self.k, "d": self.d}


def default_grid(k_values=range(2, 6), d: int = 25) -> List[GridCell]:
    schemes = [
        InitScheme(XAVIER_GAUSSIAN),
        InitScheme(NEAR_IDENTITY, variance_rule=ONE_OVER_DK),
        InitScheme(NEAR_IDENTITY, variance_rule=ONE_OVER_DK_SQUARED),
    ]
    return [GridCell(s, k, d) for s in schemes for k in k_values]


@dataclass(frozen=True)
class ExperimentConfig:
    plan: StepPlan
    objective: ObjectiveSpec = ObjectiveSpec()
    grid: tuple = field(default_factory=lambda: tuple(default_grid()))
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    thinning: dict = field(default_factory=lambda: {"policy": "geometric", "value": 1.05})
    output_dir: str = "results"
    parallelism: Union[int, str] = 1

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.to_dict(),
            "grid": [c.to_dict() for c in self.grid],
            "trials": self.trials,
            "plan": {"eta": self.plan.eta, "max_iters": self.plan.max_iters,
                     "stop_threshold": self.plan.stop_threshold},
            "master_seed": self.master_seed,
            "thinning": dict(self.thinning),
            "output_dir": self.output_dir,
            "parallelism": self.parallelism,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# parsing


def _expect(data, key, types, path, default=None, required=False):
    if key not in data:
        if required:
            raise ConfigError(f"{path}{key}", "required field is missing")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, types):
        names = "/".join(t.__name__ for t in (types if isinstance(types, tuple) else (types,)))
        raise ConfigError(f"{path}{key}", f"expected {names}, got {type(value).__name__}")
    return value


_TOP_KEYS = {"objective", "grid", "trials", "plan", "master_seed", "thinning", "output_dir", "parallelism"}


def config_from_dict(data: dict, base_dir: Optional[str] = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")

    obj = _expect(data, "objective", dict, "", {})
    kind = _expect(obj, "kind", str, "objective.", "matrix")
    if kind == "scalar":
        loss_kind = _expect(obj, "loss", str, "objective.", "quadratic")
        if loss_kind not in ("quadratic", "logistic"):
            raise ConfigError("objective.loss", f"unknown loss {loss_kind!r}")
        y = float(_expect(obj, "y", (int, float), "objective.", -1.0))
        objective = ObjectiveSpec("scalar", loss_kind, y, "minus_identity", base_dir)
    elif kind == "matrix":
        target = obj.get("target", "minus_identity")
        if not (target == "minus_identity" or (isinstance(target, dict) and isinstance(target.get("file"), str))):
            raise ConfigError("objective.target", "expected 'minus_identity' or {\"file\": PATH}")
        objective = ObjectiveSpec("matrix", "quadratic", -1.0, target, base_dir)
    else:
        raise ConfigError("objective.kind", f"expected 'scalar' or 'matrix', got {kind!r}")

    plan_data = _expect(data, "plan", dict, "", None, required=True)
    eta = _expect(plan_data, "eta", (int, float), "plan.", required=True)
    max_iters = _expect(plan_data, "max_iters", (int, float), "plan.", DEFAULT_MAX_ITERS)
    threshold = _expect(plan_data, "stop_threshold", (int, float), "plan.", 0.1)
    if not (math.isfinite(eta) and eta >= 0):
        raise ConfigError("plan.eta", "must be a finite non-negative number")
    if max_iters != int(max_iters) or max_iters < 1:
        raise ConfigError("plan.max_iters", "must be a positive integer")
    plan = StepPlan(float(eta), int(max_iters), float(threshold))

    trials = _expect(data, "trials", int, "", DEFAULT_TRIALS)
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")

    if "grid" in data:
        raw_grid = _expect(data, "grid", list, "")
        if not raw_grid:
            raise ConfigError("grid", "must contain at least one cell")
        grid = []
        for i, cell in enumerate(raw_grid):
            p = f"grid[{i}]."
            if not isinstance(cell, dict):
                raise ConfigError(f"grid[{i}]", "expected an object")
            scheme_data = _expect(cell, "scheme", dict, p, required=True)
            try:
                scheme = InitScheme.from_dict(scheme_data)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{p}scheme", str(exc)) from None
            k = _expect(cell, "k", int, p, required=True)
            d = _expect(cell, "d", int, p, 1 if kind == "scalar" else 25)
            if k < 1:
                raise ConfigError(f"{p}k", "must be >= 1")
            if d < 1 or (kind == "scalar" and d != 1):
                raise ConfigError(f"{p}d", "must be 1 for scalar objectives" if kind == "scalar" else "must be >= 1")
            allowed = SCALAR_KINDS if kind == "scalar" else MATRIX_KINDS
            if scheme.kind not in allowed:
                raise ConfigError(f"{p}scheme.kind", f"{scheme.kind!r} cannot initialize a {kind} objective")
            grid.append(GridCell(scheme, k, d))
    else:
        if kind == "scalar":
            raise ConfigError("grid", "required for scalar objectives")
        grid = default_grid()

    seed = _expect(data, "master_seed", int, "", 0)
    if not 0 <= seed < SEED_LIMIT:
        raise ConfigError("master_seed", "must be an unsigned 64-bit integer")

    thinning = _expect(data, "thinning", dict, "", {"policy": "geometric", "value": 1.05})
    policy = thinning.get("policy", "geometric")
    if policy not in ("every", "geometric"):
        raise ConfigError("thinning.policy", "expected 'every' or 'geometric'")
    thinning = {"policy": policy, "value": thinning.get("value", 1.05 if policy == "geometric" else 1)}

    output_dir = _expect(data, "output_dir", str, "", "results")
    parallelism = data.get("parallelism", 1)
    if not (parallelism == "auto" or (isinstance(parallelism, int) and not isinstance(parallelism, bool)
                                      and parallelism >= 1)):
        raise ConfigError("parallelism", "expected a positive integer or 'auto'")

    return ExperimentConfig(plan, objective, tuple(grid), trials, seed, thinning, output_dir, parallelism)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("", f"config file {path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON ({exc})") from None
    return config_from_dict(data, base_dir=str(path.parent))


def save_config(config: ExperimentConfig, path) -> Path:
    return atomic_write_text(path, config.dumps())


# ---------------------------------------------------------------------------
# outputs


def manifest(config: ExperimentConfig, command: str, extra: Optional[dict] = None) -> dict:
    out = {
        "tool": "gdlab",
        "version": __version__,
        "command": command,
        "master_seed": config.master_seed,
        "config": config.to_dict(),
    }
    if extra:
        out.update(extra)
    return out


def write_manifest(out_dir, data: dict) -> Path:
    return atomic_write_text(Path(out_dir) / "manifest.json", json.dumps(data, indent=2, sort_keys=True) + "\n")


def save_records(records, out_dir, config: Optional[ExperimentConfig] = None,
                 command: str = "experiment") -> dict:
    """trials.csv, summary.csv, figure2.svg and manifest.json in ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = list(records)
    paths = {"trials": atomic_write_text(out_dir / "trials.csv", trials_csv(records))}
    summary: ExperimentSummary = summarize(records)
    fig = export_figure2(summary, out_dir, prefix="figure2", csv_name="summary.csv",
                         cap=config.plan.max_iters if config else None)
    paths["summary"] = fig["csv"]
    paths["figure"] = fig["svg"]
    if config is not None:
        paths["manifest"] = write_manifest(out_dir, manifest(config, command))
    return paths
