"""Command-line front end.

Subcommands ``simulate``, ``classify``, ``sweep``, ``unravel``, ``figure1``
and ``verify`` write CSV or JSON to a file or to stdout.  Output depends
only on the configuration (and seed), never on wall-clock time or thread
scheduling, so repeated runs are byte-identical.

Exit codes: 0 success, 1 failed verification, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import check_bloch, make_basis, reconstruct
from .errors import NumericalError, ValidationError
from .liouvillian import LindbladModel, bloch_generator, classify_phase, load_model
from .models import BUILTIN_MODELS, NAMED_KETS, NAMED_STATES, TwoLevelParams
from .propagator import assert_positive, evolve_exact, evolve_exact_grid
from .speed import SpeedTable, trajectory_speeds
from .unravel import ensemble_mean, shifted_channels

COMMANDS = ("simulate", "classify", "sweep", "unravel", "figure1")
CSV_FLOAT = "%.17g"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Everything a run depends on.

    ``dt=None`` selects ``1e-3 / max(g, gamma)``.  ``init`` is a named state
    (``up_z``, ``down_z``, ``plus_x``) or a sequence of Bloch components.
    """

    command: str = "simulate"
    model: str = "pt"
    model_file: str | None = None
    g: float = 1.0
    gamma: float = 0.5
    t_max: float = 10.0
    dt: float | None = None
    init: str | tuple[float, ...] = "up_z"
    output_format: str = "csv"
    output_path: str | None = None
    seed: int = 0
    g_grid: tuple[float, ...] = ()
    gamma_grid: tuple[float, ...] = ()
    n_traj: int = 10_000
    times: tuple[float, ...] = ()
    shift: float = 0.0
    workers: int = 1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"command: unknown command {self.command!r}")
        if self.output_format not in ("csv", "json"):
            raise ValidationError(f"output_format: expected csv or json, got {self.output_format!r}")
        if self.model_file is None and self.model not in BUILTIN_MODELS:
            raise ValidationError(f"model: unknown builtin {self.model!r} (choose from {sorted(BUILTIN_MODELS)})")
        for name in ("g", "gamma", "t_max"):
            if not _finite(getattr(self, name)):
                raise ValidationError(f"{name}: must be a finite number")
        if not self.t_max > 0:
            raise ValidationError(f"t_max: must be positive, got {self.t_max}")
        if self.dt is not None:
            if not (_finite(self.dt) and self.dt > 0):
                raise ValidationError(f"dt: must be positive, got {self.dt}")
            if self.dt > self.t_max:
                raise ValidationError(f"dt: {self.dt} exceeds t_max={self.t_max}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValidationError(f"seed: must be a non-negative integer, got {self.seed!r}")
        if self.workers < 1:
            raise ValidationError(f"workers: must be at least 1, got {self.workers}")

    def params(self, g: float | None = None, gamma: float | None = None) -> TwoLevelParams:
        g = self.g if g is None else g
        gamma = self.gamma if gamma is None else gamma
        if not g > 0:
            raise ValidationError(f"g: must be positive, got {g}")
        if not gamma >= 0:
            raise ValidationError(f"gamma: must be non-negative, got {gamma}")
        return TwoLevelParams(g, gamma)

    def step(self, g: float, gamma: float) -> float:
        dt = self.dt if self.dt is not None else 1e-3 / max(g, gamma)
        if dt > self.t_max:
            raise ValidationError(f"dt: {dt} exceeds t_max={self.t_max}")
        return dt


def _finite(x) -> bool:
    return isinstance(x, (int, float, np.floating)) and not isinstance(x, bool) and math.isfinite(x)


# ---------------------------------------------------------------------------
# Model and state resolution


def build_model(config: RunConfig, g: float | None = None, gamma: float | None = None) -> LindbladModel:
    if config.model_file is not None:
        try:
            return load_model(config.model_file)
        except OSError as exc:
            raise ValidationError(f"model_file: cannot read {config.model_file!r} ({exc.strerror})") from exc
    return BUILTIN_MODELS[config.model](config.params(g, gamma))


def resolve_init(config: RunConfig, n: int) -> np.ndarray:
    """Bloch vector of the initial state."""
    basis = make_basis(n)
    if isinstance(config.init, str):
        if n != 2 or config.init not in NAMED_STATES:
            choices = sorted(NAMED_STATES) if n == 2 else "explicit Bloch vectors only for n > 2"
            raise ValidationError(f"init: unknown state {config.init!r} ({choices})")
        return NAMED_STATES[config.init].copy()
    try:
        r = check_bloch(np.asarray(config.init, dtype=float), basis)
    except ValidationError as exc:
        raise ValidationError(f"init: {exc}") from exc
    if np.linalg.eigvalsh(reconstruct(r, basis))[0] < -1e-10:
        raise ValidationError("init: Bloch vector does not describe a positive density matrix")
    return r


def resolve_ket(config: RunConfig, n: int) -> np.ndarray:
    """Unit ket of a pure initial state (jump trajectories need pure states)."""
    if isinstance(config.init, str) and n == 2 and config.init in NAMED_KETS:
        return NAMED_KETS[config.init].copy()
    r = resolve_init(config, n)
    w, v = np.linalg.eigh(reconstruct(r, make_basis(n)))
    if abs(w[-1] - 1.0) > 1e-9:
        raise ValidationError("init: jump unravelling needs a pure initial state")
    return v[:, -1]


# ---------------------------------------------------------------------------
# Runs


def _component_names(n: int) -> list[str]:
    if n == 2:
        return ["r_x", "r_y", "r_z"]
    return [f"r_{label}" for label in make_basis(n).labels[1:]]


def speed_columns(n: int) -> list[str]:
    return ["t", "v", "v_R", "v_T", *_component_names(n), "purity"]


def table_matrix(table: SpeedTable) -> np.ndarray:
    return np.column_stack([table.t, table.v, table.v_R, table.v_T, table.r, table.purity])


def simulate_table(model: LindbladModel, r0: np.ndarray, t_max: float, dt: float) -> SpeedTable:
    traj = evolve_exact_grid(bloch_generator(model), r0, t_max, dt, model_id=model.name)
    assert_positive(traj)
    return trajectory_speeds(model, traj.times, traj.states)


def run_simulate(config: RunConfig) -> SpeedTable:
    config.validate()
    model = build_model(config)
    r0 = resolve_init(config, model.n)
    table = simulate_table(model, r0, config.t_max, config.step(config.g, config.gamma))
    emit(_speed_payload(table, model.n), config.output_format, config.output_path)
    return table


def _speed_payload(table: SpeedTable, n: int) -> tuple[list[str], np.ndarray]:
    return speed_columns(n), table_matrix(table)


def _classify_record(model: LindbladModel) -> dict:
    rec = classify_phase(model).to_dict()
    return {k: _jsonable(v) for k, v in rec.items()}


def run_classify(config: RunConfig) -> dict:
    config.validate()
    rec = _classify_record(build_model(config))
    if config.output_format == "json":
        emit_json(rec, config.output_path)
    else:
        emit((["label", "max_imag", "coalescence_gap"], [[rec["label"], rec["max_imag"], rec["coalescence_gap"]]]),
             "csv", config.output_path)
    return rec


def run_sweep(config: RunConfig) -> list[dict]:
    """Phase label at every ``(g, gamma)`` grid point, in grid order."""
    config.validate()
    if config.model_file is not None:
        raise ValidationError("model_file: sweeps need a parameterised builtin model")
    if not config.g_grid or not config.gamma_grid:
        raise ValidationError("g_grid/gamma_grid: sweep grids must be nonempty")
    points = [(g, gm) for g in config.g_grid for gm in config.gamma_grid]
    for g, gm in points:
        config.params(g, gm)

    def one(point):
        g, gm = point
        rec = _classify_record(build_model(config, g, gm))
        return {"g": g, "gamma": gm, "label": rec["label"], "max_imag": rec["max_imag"],
                "coalescence_gap": rec["coalescence_gap"]}

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = [one(p) for p in points]
    if config.output_format == "json":
        emit_json(rows, config.output_path)
    else:
        cols = ["g", "gamma", "label", "max_imag", "coalescence_gap"]
        emit((cols, [[r[c] for c in cols] for r in rows]), "csv", config.output_path)
    return rows


def run_unravel(config: RunConfig) -> list[dict]:
    """Jump-trajectory estimates of the Bloch vector next to the exact values."""
    config.validate()
    model = build_model(config)
    if config.shift:
        model = shifted_channels(model, config.shift)
    psi0 = resolve_ket(config, model.n)
    r0 = resolve_init(config, model.n)
    gen = bloch_generator(model)
    times = config.times or (config.t_max,)
    dt = config.step(config.g, config.gamma)
    names = _component_names(model.n)
    rows = []
    for t in times:
        est = ensemble_mean(model, psi0, t, dt, config.n_traj, config.seed, workers=config.workers)
        exact = evolve_exact(gen, r0, t)
        row = {"t": float(t), "n_traj": est.n_traj}
        row.update({c: float(x) for c, x in zip(names, est.bloch)})
        row.update({f"se_{c[2:]}": float(x) for c, x in zip(names, est.standard_error)})
        row.update({f"exact_{c[2:]}": float(x) for c, x in zip(names, exact)})
        rows.append(row)
    if config.output_format == "json":
        emit_json(rows, config.output_path)
    else:
        cols = list(rows[0])
        emit((cols, [[r[c] for c in cols] for r in rows]), "csv", config.output_path)
    return rows


FIGURE1_CASES = (("unbroken", 0.5), ("ep", 1.0), ("broken", 2.0))


def run_figure1(config: RunConfig) -> dict[str, SpeedTable]:
    """Speed tables at ``gamma = g/2, g, 2g``, one file per phase in ``output_path``."""
    config.validate()
    if config.model_file is not None or config.model != "pt":
        raise ValidationError("model: figure1 uses the builtin pt model")
    if config.output_path is None:
        raise ValidationError("output_path: figure1 writes three files and needs an output directory")
    out = Path(config.output_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"output_path: cannot create {out} ({exc.strerror})") from exc
    tables = {}
    for label, ratio in FIGURE1_CASES:
        g, gamma = config.g, ratio * config.g
        model = build_model(config, g, gamma)
        r0 = resolve_init(config, 2)
        table = simulate_table(model, r0, config.t_max, config.step(g, gamma))
        emit(_speed_payload(table, 2), config.output_format, out / f"figure1_{label}.{config.output_format}")
        tables[label] = table
    return tables


RUNNERS = {
    "simulate": run_simulate,
    "classify": run_classify,
    "sweep": run_sweep,
    "unravel": run_unravel,
    "figure1": run_figure1,
}


# ---------------------------------------------------------------------------
# Serialisation


def _jsonable(x):
    """Plain Python scalars; non-finite floats become ``null`` so output stays strict JSON."""
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def _csv_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return "nan"
    return CSV_FLOAT % x


def format_csv(columns, rows) -> str:
    buf = io.StringIO(newline="")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(x) for x in row) + "\n")
    return buf.getvalue()


def format_json(obj) -> str:
    return json.dumps(obj, allow_nan=False) + "\n"


def _write(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"output_path: cannot write {path} ({exc.strerror})") from exc


def emit(payload, fmt: str, path) -> None:
    columns, rows = payload
    if fmt == "csv":
        _write(format_csv(columns, rows), path)
    else:
        rows = rows.tolist() if isinstance(rows, np.ndarray) else rows
        _write(format_json({"columns": list(columns), "rows": _jsonable(rows)}), path)


def emit_json(obj, path) -> None:
    _write(format_json(_plain(obj)), path)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    return _jsonable(obj)


# ---------------------------------------------------------------------------
# Argument parsing


def _float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _init(text: str):
    if text in NAMED_STATES:
        return text
    try:
        return _float_list(text)
    except argparse.ArgumentTypeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptlindblad", description="Speeds and phases of Lindblad dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--model", default="pt", help="builtin model: pt or dephasing")
    src.add_argument("--model-file", help="model JSON file")
    common.add_argument("--g", type=float, default=1.0)
    common.add_argument("--gamma", type=float, default=0.5)
    common.add_argument("--t-max", type=float, default=10.0)
    common.add_argument("--dt", type=float, default=None, help="default 1e-3/max(g, gamma)")
    common.add_argument("--init", type=_init, default="up_z", help="up_z, down_z, plus_x or r1,r2,...")
    common.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", dest="output_path", default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)

    sub.add_parser("simulate", parents=[common], help="speed table along one trajectory")
    sub.add_parser("classify", parents=[common], help="PT phase of one parameter point")
    sw = sub.add_parser("sweep", parents=[common], help="phase labels on a (g, gamma) grid")
    sw.add_argument("--g-grid", type=_float_list, required=True)
    sw.add_argument("--gamma-grid", type=_float_list, required=True)
    un = sub.add_parser("unravel", parents=[common], help="quantum-jump estimate of the Bloch vector")
    un.add_argument("--n-traj", type=int, default=10_000)
    un.add_argument("--times", type=_float_list, default=())
    un.add_argument("--shift", type=float, default=0.0, help="add +-shift to each jump operator")
    sub.add_parser("figure1", parents=[common], help="speed tables for the three phases")
    ver = sub.add_parser("verify", help="randomised cross-checks of every invariant")
    ver.add_argument("--cases", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--workers", type=int, default=1)
    ver.add_argument("--format", dest="output_format", choices=("text", "json"), default="text")
    ver.add_argument("--out", dest="output_path", default=None)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = set(RunConfig.__dataclass_fields__)
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in keys})


def _run_verify(ns: argparse.Namespace) -> int:
    from .verify import run_property_suite

    report = run_property_suite(ns.seed, ns.cases, workers=ns.workers)
    text = format_json(report.to_dict()) if ns.output_format == "json" else report.summary()
    _write(text, ns.output_path)
    return EXIT_OK if report.passed else EXIT_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "verify":
            return _run_verify(ns)
        config = config_from_args(ns)
        RUNNERS[config.command](config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
