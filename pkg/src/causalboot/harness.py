"""Experiment grid: scenarios x bias levels x methods x regimes x seeds.

Each cell trains one model on a confounded draw and scores it on all
four test regimes.  Method pipelines:

* simple - features only, trained on the raw draw
* if     - features plus the scenario's observed confounder and
           mediator columns, available at test time too
* da     - stratified upsampling to balance the observed confounder,
           then features only
* cb     - identification check, importance weights, weighted
           resampling, then features only

Cells that cannot run are rows, not crashes: "na" where a method does
not apply (balancing without an observed confounder, extra-column
models under the unseen regime), "error: ..." where a pipeline raised.

Every random draw is keyed by (seed, purpose, cell coordinates), so
data seeds are method-independent and enlarging the grid never changes
existing cells.  Wall time is reported as 0: timing is hardware noise
and would break byte-identical reruns.

In sweep mode the grid's level axis carries the label-offset norm
instead of the confounder strength, which stays at its configured
value; the level column of the output holds that norm.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .bootstrap import (
    BootstrapError,
    MethodId,
    ResampleConfig,
    cb_resample,
    cb_weights,
    da_resample,
    select_features,
)
from .estimate import EstimateError
from .graph import GraphError, ScenarioId, scenario_graph
from .identify import EstimandError, Unidentifiable, identify
from .model import ModelError, TrainConfig, auc, predict_proba, train
from .rng import derive_key
from .simulate import SimConfig, SimulateError, TestRegime, simulate


class HarnessError(ValueError):
    """Invalid experiment definition."""


CSV_HEADER = (
    "scenario,method,qc,regime,seed,auc,n_train,wall_time_ms,status"
)

_REGIME_ORDER = {r: i for i, r in enumerate(TestRegime)}

# Scalar generator knobs settable as overrides and materialized into the
# resolved spec.
_SIM_KEYS = {
    "p": float,
    "q_c": float,
    "qp_c": float,
    "r0": float,
    "r1": float,
    "f10": float,
    "f11": float,
    "feature_dim": int,
    "sigma": float,
    "x_mode": str,
    "x_support": int,
}
_TRAIN_KEYS = {
    "kind": str,
    "lr": float,
    "epochs": int,
    "batch": int,
    "seed": int,
    "l2": float,
    "width": int,
}


@dataclass(frozen=True)
class ExperimentSpec:
    scenarios: tuple[ScenarioId, ...]
    qc_grid: tuple[float, ...] = (0.65, 0.75, 0.85, 0.95)
    methods: tuple[MethodId, ...] = (
        MethodId.SIMPLE,
        MethodId.IF,
        MethodId.DA,
        MethodId.CB,
    )
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    n_train: int = 2000
    n_test: int = 2000
    sim: Mapping[str, object] = field(default_factory=dict)
    train: TrainConfig = field(default_factory=TrainConfig)
    complexity_sweep: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "scenarios", tuple(ScenarioId.coerce(s) for s in self.scenarios)
        )
        object.__setattr__(
            self, "methods", tuple(MethodId.coerce(m) for m in self.methods)
        )
        object.__setattr__(self, "qc_grid", tuple(float(q) for q in self.qc_grid))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        for name in ("scenarios", "qc_grid", "methods", "seeds"):
            if not getattr(self, name):
                raise HarnessError(f"{name} must be nonempty")
        for q in self.qc_grid:
            if not 0.0 <= q <= 1.0:
                raise HarnessError(f"qc value {q!r} outside [0,1]")
        if self.n_train < 1 or self.n_test < 1:
            raise HarnessError("n_train and n_test must be positive")
        object.__setattr__(self, "sim", dict(self.sim))
        unknown = set(self.sim) - set(_SIM_KEYS)
        if unknown:
            raise HarnessError(f"unknown sim overrides {sorted(unknown)}")
        if self.complexity_sweep is not None:
            sweep = tuple(float(v) for v in self.complexity_sweep)
            if not sweep or any(v <= 0 for v in sweep):
                raise HarnessError("complexity_sweep needs positive values")
            object.__setattr__(self, "complexity_sweep", sweep)

    @property
    def levels(self) -> tuple[float, ...]:
        """The grid's level axis: offset norms in sweep mode, else q_c."""
        if self.complexity_sweep is not None:
            return self.complexity_sweep
        return self.qc_grid


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    method: str
    qc: float
    regime: str
    seed: int
    auc: float | None
    n_train: int
    wall_time_ms: int = 0
    status: str = "ok"

    def __post_init__(self):
        if self.auc is not None and not 0.0 <= self.auc <= 1.0:
            raise HarnessError(f"auc {self.auc!r} outside [0,1]")


def _sim_config(spec: ExperimentSpec, scenario, level, n) -> SimConfig:
    kw = dict(spec.sim)
    if spec.complexity_sweep is not None:
        dim = int(kw.get("feature_dim", 10))
        delta_y = np.zeros(dim)
        delta_y[0] = level
        kw["delta_y"] = delta_y
    else:
        kw["q_c"] = level
    return SimConfig(scenario=scenario, n=n, **kw)


def _na_row(scenario, method, level, regime, seed, n_train) -> ResultRow:
    return ResultRow(
        scenario=scenario.value,
        method=method.value,
        qc=level,
        regime=regime.value,
        seed=seed,
        auc=None,
        n_train=n_train,
        status="na",
    )


def _error_row(scenario, method, level, regime, seed, n_train, message):
    reason = " ".join(str(message).split())
    return ResultRow(
        scenario=scenario.value,
        method=method.value,
        qc=level,
        regime=regime.value,
        seed=seed,
        auc=None,
        n_train=n_train,
        status=f"error: {reason}",
    )


def _error_rows(scenario, method, level, seed, n_train, message):
    return [
        _error_row(scenario, method, level, regime, seed, n_train, message)
        for regime in TestRegime
    ]


_PIPELINE_ERRORS = (
    BootstrapError,
    EstimateError,
    EstimandError,
    GraphError,
    ModelError,
    SimulateError,
    HarnessError,
)


def _run_cell(spec: ExperimentSpec, scenario, method, level, seed):
    """Train once, score on all four regimes."""
    if method is MethodId.DA and scenario is ScenarioId.UNOBSERVED_CONF_MEDIATOR:
        return [
            _na_row(scenario, method, level, regime, seed, spec.n_train)
            for regime in TestRegime
        ]
    try:
        data_seed = derive_key(seed, "data", "train", scenario.value, repr(level))
        train_data = simulate(
            _sim_config(spec, scenario, level, spec.n_train),
            TestRegime.CONF,
            data_seed,
        )

        if method is MethodId.CB:
            outcome = identify(scenario_graph(scenario), ("X",), ("Y",))
            if isinstance(outcome, Unidentifiable):
                raise EstimandError(outcome.witness)
            table = cb_weights(train_data.weight_columns(), scenario)
            method_seed = derive_key(seed, "resample", scenario.value, repr(level))
            train_data = cb_resample(
                train_data, table, ResampleConfig(seed=method_seed)
            )
        elif method is MethodId.DA:
            method_seed = derive_key(seed, "balance", scenario.value, repr(level))
            train_data = da_resample(train_data, method_seed)

        feats = select_features(train_data, method, scenario)
        train_seed = derive_key(
            seed, "train", method.value, scenario.value, repr(level)
        )
        cfg = dataclasses.replace(spec.train, seed=train_seed)
        model = train(feats, train_data.y, cfg)
    except _PIPELINE_ERRORS as exc:
        return _error_rows(scenario, method, level, seed, spec.n_train, exc)

    rows = []
    for regime in TestRegime:
        if method is MethodId.IF and regime is TestRegime.UNSEEN:
            rows.append(_na_row(scenario, method, level, regime, seed, spec.n_train))
            continue
        try:
            test_seed = derive_key(
                seed, "data", "test", scenario.value, repr(level), regime.value
            )
            test_data = simulate(
                _sim_config(spec, scenario, level, spec.n_test), regime, test_seed
            )
            scores = predict_proba(model, select_features(test_data, method, scenario))
            value = auc(scores, test_data.y)
        except _PIPELINE_ERRORS as exc:
            rows.append(
                _error_row(
                    scenario, method, level, regime, seed, spec.n_train, exc
                )
            )
            continue
        rows.append(
            ResultRow(
                scenario=scenario.value,
                method=method.value,
                qc=level,
                regime=regime.value,
                seed=seed,
                auc=value,
                n_train=spec.n_train,
            )
        )
    return rows


def _worker_count() -> int:
    raw = os.environ.get("CAUSAL_BOOT_WORKERS", "")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise HarnessError(
                f"CAUSAL_BOOT_WORKERS must be an integer, got {raw!r}"
            ) from None
        if value < 1:
            raise HarnessError("CAUSAL_BOOT_WORKERS must be at least 1")
        return value
    return min(8, os.cpu_count() or 1)


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """All grid cells, canonically sorted, deterministic for a given spec."""
    cells = [
        (scenario, method, level, seed)
        for scenario in spec.scenarios
        for method in spec.methods
        for level in spec.levels
        for seed in spec.seeds
    ]
    workers = _worker_count()
    if workers == 1 or len(cells) == 1:
        batches = [_run_cell(spec, *cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(
                pool.map(lambda cell: _run_cell(spec, *cell), cells)
            )
    rows = [row for batch in batches for row in batch]
    rows.sort(
        key=lambda r: (
            r.scenario,
            r.method,
            r.qc,
            _REGIME_ORDER[TestRegime.coerce(r.regime)],
            r.seed,
        )
    )
    return rows


# --- persistence -------------------------------------------------------------

def _format_row(row: ResultRow) -> list[str]:
    return [
        row.scenario,
        row.method,
        repr(row.qc),
        row.regime,
        str(row.seed),
        "" if row.auc is None else repr(row.auc),
        str(row.n_train),
        str(row.wall_time_ms),
        row.status,
    ]


def write_results(rows, path) -> None:
    """Fixed-header CSV; floats via repr so reruns are byte-identical."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for row in rows:
        writer.writerow(_format_row(row))
    with open(path, "w", newline="") as fh:
        fh.write(buffer.getvalue())


def read_results(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER.split(","):
            raise HarnessError(f"unexpected results header {header!r}")
        rows = []
        for record in reader:
            rows.append(
                ResultRow(
                    scenario=record[0],
                    method=record[1],
                    qc=float(record[2]),
                    regime=record[3],
                    seed=int(record[4]),
                    auc=None if record[5] == "" else float(record[5]),
                    n_train=int(record[6]),
                    wall_time_ms=int(record[7]),
                    status=record[8],
                )
            )
    return rows


# --- flat key=value spec files ------------------------------------------------

def parse_spec_text(text: str) -> ExperimentSpec:
    """Flat key=value format; lists comma-separated; # starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise HarnessError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            raise HarnessError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    def pop_list(key):
        raw = values.pop(key, None)
        if raw is None:
            return None
        return [item.strip() for item in raw.split(",") if item.strip()]

    kwargs: dict = {}
    scenarios = pop_list("scenarios")
    if scenarios is None:
        raise HarnessError("spec needs a scenarios= line")
    kwargs["scenarios"] = scenarios
    for key in ("qc_grid", "seeds", "methods", "complexity_sweep"):
        items = pop_list(key)
        if items is not None:
            kwargs[key] = items
    for key in ("n_train", "n_test"):
        if key in values:
            kwargs[key] = int(values.pop(key))

    sim: dict[str, object] = {}
    train_kw: dict[str, object] = {}
    for key in list(values):
        if key.startswith("sim."):
            name = key[4:]
            if name not in _SIM_KEYS:
                raise HarnessError(f"unknown spec key {key!r}")
            sim[name] = _SIM_KEYS[name](values.pop(key))
        elif key.startswith("train."):
            name = key[6:]
            if name not in _TRAIN_KEYS:
                raise HarnessError(f"unknown spec key {key!r}")
            train_kw[name] = _TRAIN_KEYS[name](values.pop(key))
    if values:
        raise HarnessError(f"unknown spec keys {sorted(values)}")

    try:
        if kwargs.get("qc_grid") is not None:
            kwargs["qc_grid"] = [float(v) for v in kwargs["qc_grid"]]
        if kwargs.get("seeds") is not None:
            kwargs["seeds"] = [int(v) for v in kwargs["seeds"]]
        if kwargs.get("complexity_sweep") is not None:
            kwargs["complexity_sweep"] = [
                float(v) for v in kwargs["complexity_sweep"]
            ]
    except ValueError as exc:
        raise HarnessError(f"bad numeric list in spec: {exc}") from None
    if sim:
        kwargs["sim"] = sim
    if train_kw:
        kwargs["train"] = TrainConfig(**train_kw)
    return ExperimentSpec(**kwargs)


def resolved_spec_text(spec: ExperimentSpec) -> str:
    """Every knob written out, defaults included, in a fixed order."""
    lines = [
        "scenarios=" + ",".join(s.value for s in spec.scenarios),
        "qc_grid=" + ",".join(repr(q) for q in spec.qc_grid),
        "methods=" + ",".join(m.value for m in spec.methods),
        "seeds=" + ",".join(str(s) for s in spec.seeds),
        f"n_train={spec.n_train}",
        f"n_test={spec.n_test}",
    ]
    if spec.complexity_sweep is not None:
        lines.append(
            "complexity_sweep=" + ",".join(repr(v) for v in spec.complexity_sweep)
        )
    sim_defaults = {
        f.name: f.default
        for f in dataclasses.fields(SimConfig)
        if f.name in _SIM_KEYS
    }
    for name in _SIM_KEYS:
        if name == "qp_c" and name not in spec.sim:
            continue  # follows q_c unless overridden
        value = spec.sim.get(name, sim_defaults.get(name))
        if name == "q_c" and "q_c" not in spec.sim:
            continue  # grid-controlled
        lines.append(f"sim.{name}={value}")
    for name in _TRAIN_KEYS:
        value = getattr(spec.train, name)
        lines.append(f"train.{name}={value}")
    return "\n".join(lines) + "\n"
