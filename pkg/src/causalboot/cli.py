"""Command-line front end.

Subcommands: dsep (separation queries on a graph file), identify (print
the canonical estimand), bootstrap (debias a CSV dataset), simulate
(draw a synthetic CSV dataset), run (full experiment grid).

Exit codes: 0 success; 1 bad input or I/O; 2 unidentifiable query (or
unusable spec/arguments); 3 zero-support estimation failure; 4 at least
one grid cell failed.

All numeric output goes through repr of Python floats, so identical
invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .bootstrap import (
    BootstrapError,
    MethodId,
    ResampleConfig,
    cb_resample,
    cb_weights,
    da_resample,
)
from .estimate import EstimateError, KernelSpec, ZeroSupportError
from .graph import GraphError, ScenarioId, d_separated, parse_graph, scenario_graph
from .identify import EstimandError, Identified, estimand_to_text, identify
from .harness import (
    HarnessError,
    parse_spec_text,
    resolved_spec_text,
    run_experiment,
    write_results,
)
from .model import ModelError
from .simulate import Dataset, SimConfig, SimulateError, simulate

_USER_ERRORS = (
    BootstrapError,
    EstimateError,
    EstimandError,
    GraphError,
    ModelError,
    SimulateError,
    OSError,
    ValueError,
)

_DISCRETE_COLS = ("y", "u", "z", "d")


def _names(raw: str) -> tuple[str, ...]:
    return tuple(n.strip() for n in raw.split(",") if n.strip())


def _load_graph(path: str):
    return parse_graph(Path(path).read_text())


def _fmt(value) -> str:
    return repr(float(value))


# --- csv schema ---------------------------------------------------------------

def _write_dataset(path: str, data: Dataset, with_extras: bool) -> None:
    """Feature columns, label, then any observed discrete columns in the
    fixed y/u/z/d order; hidden columns last, prefixed with '_'."""
    x = data.x if data.x.ndim == 2 else data.x[:, None]
    discrete_x = np.issubdtype(x.dtype, np.integer)
    header = [f"x{j}" for j in range(x.shape[1])] + ["y"]
    extras = []
    if with_extras:
        extras = [c for c in _DISCRETE_COLS[1:] if c in data.columns]
        shadows = sorted(data.shadow)
        header += extras + [f"_{name}" for name in shadows]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(data.n):
            record = [
                str(int(v)) if discrete_x else _fmt(v) for v in x[i]
            ]
            record.append(str(int(data.y[i])))
            if with_extras:
                record += [str(int(data.columns[c][i])) for c in extras]
                record += [str(int(data.shadow[c][i])) for c in shadows]
            writer.writerow(record)


def _read_dataset(path: str) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EstimateError(f"{path} is empty") from None
        records = list(reader)

    x_names = [h for h in header if h.startswith("x")]
    if x_names != [f"x{j}" for j in range(len(x_names))] or not x_names:
        raise EstimateError(
            "feature columns must be named x0..x{d-1}, in order"
        )
    known = set(x_names) | set(_DISCRETE_COLS)
    unknown = [h for h in header if h not in known and not h.startswith("_")]
    if unknown:
        raise EstimateError(f"unknown columns {unknown}")
    if "y" not in header:
        raise EstimateError("dataset needs a y column")

    index = {name: header.index(name) for name in header}
    n = len(records)
    x = np.empty((n, len(x_names)))
    cols: dict[str, np.ndarray] = {}
    for name in _DISCRETE_COLS:
        if name in index:
            cols[name] = np.empty(n, dtype=np.int64)
    try:
        for i, record in enumerate(records):
            if len(record) != len(header):
                raise EstimateError(f"row {i + 2} has {len(record)} fields")
            for j, name in enumerate(x_names):
                x[i, j] = float(record[index[name]])
            for name in cols:
                cols[name][i] = int(record[index[name]])
    except ValueError as exc:
        raise EstimateError(f"row {i + 2}: {exc}") from None

    y = cols.pop("y")
    return Dataset(x=x, y=y, columns=cols, shadow={}, regime="conf", seed=0)


# --- subcommands ---------------------------------------------------------------

def _cmd_dsep(args) -> int:
    g = _load_graph(args.graph)
    given = _names(args.given) if args.given else ()
    result = d_separated(g, _names(args.a), _names(args.b), given)
    print("true" if result else "false")
    return 0


def _cmd_identify(args) -> int:
    g = _load_graph(args.graph)
    outcome = identify(g, _names(args.outcome), _names(args.do))
    if isinstance(outcome, Identified):
        print(estimand_to_text(outcome.estimand))
        return 0
    print(f"UNIDENTIFIABLE: {outcome.witness}")
    return 2


def _cmd_bootstrap(args) -> int:
    scenario = ScenarioId.coerce(args.scenario)
    method = MethodId.coerce(args.method)
    if method not in (MethodId.CB, MethodId.DA):
        raise BootstrapError("bootstrap method must be cb or da")
    data = _read_dataset(getattr(args, "in"))
    if method is MethodId.CB:
        outcome = identify(scenario_graph(scenario), ("X",), ("Y",))
        if not isinstance(outcome, Identified):
            print(f"UNIDENTIFIABLE: {outcome.witness}", file=sys.stderr)
            return 2
        table = cb_weights(
            data.weight_columns(), scenario, alpha=args.smoothing
        )
        config = ResampleConfig(
            seed=args.seed, kernel=KernelSpec.parse(args.kernel)
        )
        out = cb_resample(data, table, config)
    else:
        out = da_resample(data, args.seed)
    _write_dataset(args.out, out, with_extras=False)
    return 0


def _cmd_simulate(args) -> int:
    kw = {}
    for name in (
        "p",
        "q_c",
        "qp_c",
        "r0",
        "r1",
        "f10",
        "f11",
        "feature_dim",
        "sigma",
        "x_mode",
        "x_support",
    ):
        value = getattr(args, name)
        if value is not None:
            kw[name] = value
    for name in ("delta_y", "delta_u", "delta_z", "delta_v", "delta_u2"):
        raw = getattr(args, name)
        if raw is not None:
            kw[name] = np.array([float(v) for v in raw.split(",")])
    cfg = SimConfig(scenario=args.scenario, n=args.n, **kw)
    data = simulate(cfg, args.regime, args.seed)
    _write_dataset(args.out, data, with_extras=True)
    return 0


def _cmd_run(args) -> int:
    try:
        spec = parse_spec_text(Path(args.spec).read_text())
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        rows = run_experiment(spec)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_results(rows, out_dir / "results.csv")
    (out_dir / "spec.resolved.txt").write_text(resolved_spec_text(spec))
    failed = sum(1 for row in rows if row.status.startswith("error"))
    if failed:
        print(f"{failed} of {len(rows)} cells failed", file=sys.stderr)
        return 4
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-boot",
        description="Causal bootstrapping: identification, debiasing, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", help="query separation between node sets")
    p.add_argument("--graph", required=True, help="graph DSL file")
    p.add_argument("--a", required=True, help="comma-separated node names")
    p.add_argument("--b", required=True, help="comma-separated node names")
    p.add_argument("--given", default="", help="comma-separated node names")
    p.set_defaults(func=_cmd_dsep)

    p = sub.add_parser("identify", help="print the interventional estimand")
    p.add_argument("--graph", required=True, help="graph DSL file")
    p.add_argument("--outcome", required=True, help="comma-separated outcomes")
    p.add_argument("--do", required=True, help="comma-separated interventions")
    p.set_defaults(func=_cmd_identify)

    p = sub.add_parser("bootstrap", help="debias a CSV dataset by resampling")
    p.add_argument("--scenario", required=True, choices=[s.value for s in ScenarioId])
    p.add_argument("--method", required=True, help="cb or da")
    p.add_argument("--in", required=True, help="input CSV (x0..,y[,u][,z][,d])")
    p.add_argument("--out", required=True, help="output CSV (x0..,y)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--smoothing", type=float, default=0.0, help="pseudo-count")
    p.add_argument(
        "--kernel", default="delta", help="delta | gaussian | gaussian:<h>"
    )
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("simulate", help="draw a synthetic dataset to CSV")
    p.add_argument("--scenario", required=True, choices=[s.value for s in ScenarioId])
    p.add_argument("--regime", default="conf")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--qc", dest="q_c", type=float, default=None)
    p.add_argument("--qp-c", dest="qp_c", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--r0", type=float, default=None)
    p.add_argument("--r1", type=float, default=None)
    p.add_argument("--f10", type=float, default=None)
    p.add_argument("--f11", type=float, default=None)
    p.add_argument("--feature-dim", dest="feature_dim", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--x-mode", dest="x_mode", default=None, choices=["gaussian", "discrete"])
    p.add_argument("--x-support", dest="x_support", type=int, default=None)
    for name in ("delta-y", "delta-u", "delta-z", "delta-v", "delta-u2"):
        p.add_argument(
            f"--{name}",
            dest=name.replace("-", "_"),
            default=None,
            help="comma-separated floats",
        )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("run", help="run an experiment grid from a spec file")
    p.add_argument("--spec", required=True, help="flat key=value spec file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ZeroSupportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
