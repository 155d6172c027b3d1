"""Command-line harness: ``pinnmg {train,hybrid,gs,cg,bench,info}``.

Settings resolve in three layers: per-subcommand defaults, then an optional
``--config`` file of ``key=value`` lines, then explicit flags. The merged
:class:`RunConfig` is validated before any compute and serialized into the
header of every text output.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
import typing
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, data_path
from .classic import (
    Grid2D,
    cg_solve,
    gs_solve,
    source_grid,
    write_grid_csv,
    write_grid_raw,
)
from .hybrid import HybridConfig, infer_on_grid, solve_gs_vcycle, solve_hybrid
from .net import NetworkConfig, load_checkpoint, save_checkpoint
from .problems import PROBLEM_IDS, error_metrics, get_problem
from .sampling import make_training_set
from .train import CheckpointInit, TrainSchedule, XavierInit, train_pinn

log = logging.getLogger("pinnmg")

ENV_OUT = "PINNMG_OUT"
COMMANDS = ("train", "hybrid", "gs", "cg", "bench", "info")
PRESETS = ("depth-sweep", "width-pyramids", "activation-sweep", "dataset-sweep",
           "restart", "transfer", "hybrid-vs-classic")
TIERS = ("desk", "paper", "smoke")
GRID_FORMATS = ("raw", "csv", "both", "none")
GS_MAX_ITERS = 1_000_000
SUMMARY_COLUMNS = ["config_id", "final_loss", "linf", "l2", "epochs", "iters", "wall_ms"]


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = "train"
    problem: str = "foursines"
    variant: str = "literal"
    hidden: str = "50,50,50,50"
    activation: str = "tanh"
    laaf_factor: int | None = None
    precision: int = 64
    distribution: str = "sobol"
    interior: str = "64x64"
    boundary: int = 2000
    boundary_layout: str = "perimeter"
    seed: int = 0
    seeds: int = 1
    adam_epochs: int = 2000
    learning_rate: float = 1e-3
    lbfgs_epochs: int = 3000
    ftol: float = 0.0
    lbfgs_history: int = 10
    gradient_tolerance: float = 1e-9
    target_loss: float | None = None
    boundary_weight: float = 1.0
    ckpt: str | None = None
    n: int = 128
    coarse: int = 64
    fine: int = 512
    delta: float = 1e-6
    rtol: float = 1e-10
    max_iters: int | None = None
    sweeps_per_level: int = 1
    preset: str | None = None
    tier: str = "desk"
    repeats: int = 1
    grid_format: str = "raw"
    out: str = ""

    def widths(self) -> list[int]:
        return [int(w) for w in str(self.hidden).split(",") if w.strip()]

    def network(self) -> NetworkConfig:
        return NetworkConfig.mlp(self.widths(), self.activation, self.laaf_factor, self.precision)

    def schedule(self) -> TrainSchedule:
        return TrainSchedule(
            adam_epochs=self.adam_epochs, adam_learning_rate=self.learning_rate,
            lbfgs_max_epochs=self.lbfgs_epochs, ftol=self.ftol,
            lbfgs_history=self.lbfgs_history, gradient_tolerance=self.gradient_tolerance,
            target_loss=self.target_loss, boundary_weight=self.boundary_weight)

    def hybrid(self) -> HybridConfig:
        return HybridConfig(coarse=self.coarse, fine=self.fine, checkpoint=self.ckpt,
                            ftol=self.ftol, delta=self.delta, adam_epochs=self.adam_epochs,
                            lbfgs_cap=self.lbfgs_epochs, precision=self.precision,
                            sweeps_per_level=self.sweeps_per_level,
                            learning_rate=self.learning_rate,
                            max_gs_iters=self.max_iters or GS_MAX_ITERS,
                            fallback_seed=self.seed)

    def problem_obj(self):
        return get_problem(self.problem, self.variant)

    def training_set(self):
        return make_training_set(self.problem_obj(), self.distribution, self.interior,
                                 self.boundary, self.seed, self.boundary_layout)

    def serialize(self) -> list[str]:
        return [f"{f.name}={_fmt(getattr(self, f.name))}" for f in fields(self)]

    def header(self) -> str:
        lines = [f"# tool=pinnmg {__version__}"] + [f"# {kv}" for kv in self.serialize()]
        return "\n".join(lines) + "\n"

    def provenance(self) -> str:
        return f"pinnmg {__version__};" + ";".join(self.serialize())


# hybrid mirrors the six-step pipeline: fp32 training, 10 Adam, L-BFGS capped at 1000
COMMAND_DEFAULTS = {
    "hybrid": dict(precision=32, ftol=1e-4, adam_epochs=10, lbfgs_epochs=1000,
                   interior="100x100", ckpt="pretrain.ckpt"),
    "gs": dict(n=64, delta=1e-10),
    "cg": dict(n=64),
    "bench": dict(repeats=5),
}


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


_TYPES = typing.get_type_hints(RunConfig)


def _coerce(key: str, raw):
    if key not in _TYPES:
        raise UsageError(f"unknown setting {key!r}")
    if not isinstance(raw, str):
        return raw
    tp = _TYPES[key]
    args = typing.get_args(tp)
    optional = type(None) in args
    if optional and raw.strip().lower() in ("", "none"):
        return None
    base = next((a for a in args if a is not type(None)), tp) if args else tp
    try:
        if base is int:
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if base is float:
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"{key}: cannot parse {raw!r} as {base.__name__}") from exc
    return raw.strip()


def read_config_file(path) -> dict:
    """Parse flat UTF-8 ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _coerce(key, value)
    return out


def resolve_checkpoint(name: str | None) -> str | None:
    """Existing paths win; otherwise a bare name may refer to a shipped checkpoint."""
    if name is None:
        return None
    if Path(name).exists():
        return str(name)
    shipped = data_path(Path(name).name)
    if shipped.exists():
        return str(shipped)
    raise FileNotFoundError(f"checkpoint not found: {name}")


def validate(rc: RunConfig) -> RunConfig:
    """Check every module-level invariant the run will touch; return a normalized copy."""
    if rc.command not in COMMANDS:
        raise UsageError(f"unknown command {rc.command!r}")
    if rc.problem not in PROBLEM_IDS:
        raise UsageError(f"unknown problem {rc.problem!r}; choose from {', '.join(PROBLEM_IDS)}")
    rc.problem_obj()
    if rc.grid_format not in GRID_FORMATS:
        raise UsageError(f"grid_format must be one of {', '.join(GRID_FORMATS)}")
    if rc.repeats < 1 or rc.seeds < 1:
        raise UsageError("repeats and seeds must be >= 1")
    if rc.command in ("train", "bench"):
        rc.network()
        rc.schedule()
        rc.training_set()
    if rc.command == "hybrid":
        rc = replace(rc, ckpt=resolve_checkpoint(rc.ckpt))
        rc.hybrid()
        rc.training_set()
    if rc.command in ("gs", "cg") and rc.n < 2:
        raise UsageError("grid label n must be >= 2")
    if rc.command == "gs" and rc.delta <= 0:
        raise UsageError("delta must be positive")
    if rc.command == "cg" and rc.rtol <= 0:
        raise UsageError("rtol must be positive")
    if rc.command == "bench":
        if rc.preset not in PRESETS:
            raise UsageError(f"preset must be one of {', '.join(PRESETS)}")
        if rc.tier not in TIERS:
            raise UsageError(f"tier must be one of {', '.join(TIERS)}")
    if rc.command == "train" and rc.ckpt:
        rc = replace(rc, ckpt=resolve_checkpoint(rc.ckpt))
    return rc


# ---------------------------------------------------------------- outputs


def out_dir(rc: RunConfig) -> Path:
    root = Path(rc.out or os.environ.get(ENV_OUT) or "runs")
    root.mkdir(parents=True, exist_ok=True)
    return root


def write_summary(path, rows, header: str) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(header)
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k)) for k in SUMMARY_COLUMNS})


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return v


def write_grid(grid: Grid2D, directory: Path, stem: str, rc: RunConfig) -> None:
    if rc.grid_format in ("raw", "both"):
        write_grid_raw(grid, directory / f"{stem}.grid")
    if rc.grid_format in ("csv", "both"):
        write_grid_csv(grid, directory / f"{stem}.csv", header=rc.header())


def _metrics(grid: Grid2D, problem):
    if problem.exact is None:
        return None, None
    return error_metrics(grid, problem)


# ---------------------------------------------------------------- commands


def run_train(rc: RunConfig, directory: Path, config_id: str = "train") -> dict:
    problem = rc.problem_obj()
    config = rc.network()
    tset = rc.training_set()
    init = CheckpointInit(rc.ckpt) if rc.ckpt else XavierInit(rc.seed)
    t0 = time.perf_counter()
    report = train_pinn(config, init, tset, problem, rc.schedule())
    wall = 1e3 * (time.perf_counter() - t0)
    header = rc.header()
    directory.mkdir(parents=True, exist_ok=True)
    report.write_csv(directory / "history.csv", header=header)
    save_checkpoint(config, report.params,
                    f"{rc.provenance()};epochs={report.adam_epochs}+{report.lbfgs_epochs}",
                    directory / "model.ckpt")
    grid = infer_on_grid(report.params, config, rc.n, problem)
    write_grid(grid, directory, "u", rc)
    linf, l2 = _metrics(grid, problem)
    row = dict(config_id=config_id, final_loss=report.final_loss, linf=linf, l2=l2,
               epochs=report.adam_epochs + report.lbfgs_epochs, iters=report.n_evals,
               wall_ms=wall, stop=report.stop_reason, report=report)
    return row


def run_hybrid(rc: RunConfig, directory: Path, config_id: str = "hybrid") -> dict:
    problem = rc.problem_obj()
    cfg = rc.hybrid()
    tset = rc.training_set()
    directory.mkdir(parents=True, exist_ok=True)
    walls = []
    for _ in range(rc.repeats):
        grid, report, train = solve_hybrid(problem, cfg, tset)
        walls.append(report.total_ms)
    header = rc.header()
    report.write_csv(directory / "report.csv", header=header)
    report.write_jsonl(directory / "report.jsonl", header=header)
    train.write_csv(directory / "history.csv", header=header)
    save_checkpoint(train.config, train.params, rc.provenance(), directory / "trained.ckpt")
    write_grid(grid, directory, "u", rc)
    return dict(config_id=config_id, final_loss=report.final_loss, linf=report.linf, l2=report.l2,
                epochs=report.adam_epochs + report.lbfgs_epochs, iters=report.coarse_gs_iters,
                wall_ms=float(np.mean(walls)), stop=report.lbfgs_stop, report=report)


def run_gs(rc: RunConfig, directory: Path, config_id: str = "gs") -> dict:
    problem = rc.problem_obj()
    grid = Grid2D.zeros(rc.n)
    grid.set_boundary(problem.boundary)
    f = source_grid(problem, rc.n)
    walls = []
    for _ in range(rc.repeats):
        grid.values[1:-1, 1:-1] = 0.0
        t0 = time.perf_counter()
        res = gs_solve(grid, f, rc.delta, rc.max_iters or GS_MAX_ITERS)
        walls.append(1e3 * (time.perf_counter() - t0))
    directory.mkdir(parents=True, exist_ok=True)
    write_grid(grid, directory, "u", rc)
    linf, l2 = _metrics(grid, problem)
    return dict(config_id=config_id, final_loss=res.last_update, linf=linf, l2=l2, epochs=0,
                iters=res.iterations, wall_ms=float(np.mean(walls)),
                stop="delta" if res.converged else "max-iters")


def run_cg(rc: RunConfig, directory: Path, config_id: str = "cg") -> dict:
    problem = rc.problem_obj()
    f = source_grid(problem, rc.n)
    g = Grid2D.zeros(rc.n)
    g.set_boundary(problem.boundary)
    walls = []
    for _ in range(rc.repeats):
        t0 = time.perf_counter()
        res = cg_solve(f, g, rc.rtol, rc.max_iters)
        walls.append(1e3 * (time.perf_counter() - t0))
    directory.mkdir(parents=True, exist_ok=True)
    write_grid(res.grid, directory, "u", rc)
    linf, l2 = _metrics(res.grid, problem)
    rel = res.residual_norms[-1] / res.residual_norms[0] if res.residual_norms[0] else 0.0
    return dict(config_id=config_id, final_loss=rel, linf=linf, l2=l2, epochs=0,
                iters=res.iterations, wall_ms=float(np.mean(walls)),
                stop="rtol" if res.converged else "max-iters")


def run_info(path: str) -> str:
    config, params, prov = load_checkpoint(resolve_checkpoint(path), precision=64)
    lines = [
        f"checkpoint: {path}",
        f"network: {config.describe()}",
        f"layer_sizes: {','.join(map(str, config.layer_sizes))}",
        f"activation: {config.activation.value}",
        f"laaf_factor: {config.laaf_factor or 0}",
        f"parameters: {params.size}",
        f"provenance: {prov}",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------- bench


# smoke exists so the whole preset matrix can be exercised in seconds
TIER_SETTINGS = {
    "desk": dict(interior="64x64", boundary=2000, adam_epochs=500, lbfgs_epochs=1000),
    "paper": dict(interior="128x128", boundary=4000, adam_epochs=2000, lbfgs_epochs=5000),
    "smoke": dict(interior="8x8", boundary=32, adam_epochs=3, lbfgs_epochs=3),
}
SMALL_SETS = {"desk": ("1200+200", "30x40", 200), "paper": ("1200+200", "30x40", 200),
              "smoke": ("48+16", "6x8", 16)}


def tier_defaults(tier: str) -> dict:
    return dict(TIER_SETTINGS[tier])


def preset_matrix(rc: RunConfig) -> list[tuple[str, str, RunConfig]]:
    """``(config_id, kind, RunConfig)`` triples for ``rc.preset``."""
    base = replace(rc, **tier_defaults(rc.tier))
    paper = rc.tier == "paper"
    smoke = rc.tier == "smoke"
    small_label, small_shape, small_nb = SMALL_SETS[rc.tier]
    seeds = range(rc.seed, rc.seed + rc.seeds)
    out = []

    def add(cid, kind, cfg):
        for s in seeds:
            sid = f"{cid}-s{s}" if rc.seeds > 1 else cid
            out.append((sid, kind, replace(cfg, seed=s)))

    if rc.preset == "depth-sweep":
        for d in range(1, 7):
            add(f"{d}H", "train", replace(base, hidden=",".join(["50"] * d)))
    elif rc.preset == "width-pyramids":
        add("6Hx50", "train", replace(base, hidden="50,50,50,50,50,50"))
        add("ascending", "train", replace(base, hidden="10,20,40,80,160,320"))
        add("descending", "train", replace(base, hidden="320,160,80,40,20,10"))
        add("1Hx640", "train", replace(base, hidden="640"))
    elif rc.preset == "activation-sweep":
        for act in ("tanh", "sigmoid", "swish", "sine"):
            add(act, "train", replace(base, activation=act, laaf_factor=None))
        for act in ("laaf-tanh", "laaf-sigmoid", "laaf-swish"):
            for n in (5, 10):
                add(f"{act}-{n}", "train", replace(base, activation=act, laaf_factor=n))
    elif rc.preset == "dataset-sweep":
        sizes = [SMALL_SETS[rc.tier], (f"{base.interior}+{base.boundary}", base.interior, base.boundary)]
        if paper:
            sizes.insert(1, ("64x64+2000", "64x64", 2000))
        for label, shape, nb in sizes:
            for dist in ("uniform", "pseudo-random", "sobol"):
                add(f"{dist}-{label}", "train", replace(base, distribution=dist, interior=shape,
                                                        boundary=nb))
    elif rc.preset == "restart":
        small_budget = {"paper": (2000, 2500), "desk": (300, 300), "smoke": (3, 3)}[rc.tier]
        small = replace(base, interior=small_shape, boundary=small_nb,
                        adam_epochs=small_budget[0], lbfgs_epochs=small_budget[1])
        large_budget = dict(adam_epochs=10 if not smoke else 2,
                            lbfgs_epochs={"paper": 2500, "desk": 400, "smoke": 3}[rc.tier])
        add("small", "train", small)
        add("restart", "restart", replace(base, **large_budget))
        add("direct", "train", base)
    elif rc.preset == "transfer":
        tl = dict(problem="polytrig", hidden="50,50,50,50", activation="laaf-tanh", laaf_factor=5,
                  adam_epochs=10, lbfgs_epochs=base.lbfgs_epochs if smoke else (6955 if paper else 1000),
                  target_loss=None if paper else 1e-2)
        add("xavier", "train", replace(base, **tl))
        add("transfer", "train", replace(base, ckpt=resolve_checkpoint(rc.ckpt or "pretrain.ckpt"), **tl))
    elif rc.preset == "hybrid-vs-classic":
        hyb = replace(base, command="hybrid", precision=32, ftol=1e-4,
                      adam_epochs=base.adam_epochs if smoke else 10,
                      lbfgs_epochs=base.lbfgs_epochs if smoke else 1000,
                      interior=base.interior if smoke else "100x100",
                      boundary=base.boundary if smoke else 2000,
                      ckpt=resolve_checkpoint(rc.ckpt or "pretrain.ckpt"))
        fine = [(16, 64, 1e-4)] if smoke else [(64, 512, 1e-6)] + ([(128, 1024, 1e-5), (128, 1024, 1e-4)] if paper else [])
        for nc, nf, delta in fine:
            tag = f"{nc}-{nf}-d{delta:g}"
            out.append((f"hybrid-{tag}", "hybrid", replace(hyb, coarse=nc, fine=nf, delta=delta)))
            out.append((f"gs-vcycle-{tag}", "gs-vcycle", replace(hyb, coarse=nc, fine=nf, delta=delta)))
            out.append((f"cg-{nf}", "cg", replace(base, command="cg", n=nf, rtol=1e-10)))
    return out


def run_bench(rc: RunConfig, root: Path) -> list[dict]:
    base_dir = root / rc.preset
    base_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    trained: dict[int, Path] = {}
    for cid, kind, cfg in preset_matrix(rc):
        d = base_dir / cid
        log.info("bench %s: %s", rc.preset, cid)
        if kind == "train":
            row = run_train(replace(cfg, command="train"), d, cid)
            if cid.startswith("small"):
                trained[cfg.seed] = d / "model.ckpt"
        elif kind == "restart":
            row = run_train(replace(cfg, command="train", ckpt=str(trained[cfg.seed])), d, cid)
        elif kind == "hybrid":
            row = run_hybrid(cfg, d, cid)
        elif kind == "gs-vcycle":
            row = _run_gs_vcycle(cfg, d, cid)
        elif kind == "cg":
            row = run_cg(cfg, d, cid)
        else:
            raise AssertionError(kind)
        if row.get("report") is not None and kind in ("train", "restart"):
            rep = row["report"]
            first = rep.first_epoch_below(1e-2)
            row["iters"] = first if first is not None else ""
        rows.append(row)
        write_summary(base_dir / "summary.csv", rows, rc.header())
    return rows


def _run_gs_vcycle(cfg: RunConfig, d: Path, cid: str) -> dict:
    problem = cfg.problem_obj()
    walls = []
    for _ in range(cfg.repeats):
        grid, report = solve_gs_vcycle(problem, cfg.coarse, cfg.fine, cfg.delta,
                                       cfg.sweeps_per_level, cfg.max_iters or GS_MAX_ITERS)
        walls.append(report.total_ms)
    d.mkdir(parents=True, exist_ok=True)
    report.write_csv(d / "report.csv", header=cfg.header())
    write_grid(grid, d, "u", cfg)
    return dict(config_id=cid, final_loss=float("nan"), linf=report.linf, l2=report.l2, epochs=0,
                iters=report.coarse_gs_iters, wall_ms=float(np.mean(walls)))


# ---------------------------------------------------------------- argv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_FLAG_ALIASES = {"learning_rate": ["--lr"], "gradient_tolerance": ["--gtol"],
                 "ckpt": ["--checkpoint"]}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        flags = [f"--{f.name.replace('_', '-')}"] + _FLAG_ALIASES.get(f.name, [])
        common.add_argument(*flags, dest=f.name, default=argparse.SUPPRESS, metavar=f.name.upper())
    common.add_argument("--depth", type=int, default=argparse.SUPPRESS,
                        help="shorthand: DEPTH hidden layers of --width units")
    common.add_argument("--width", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=None, help="key=value settings file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="pinnmg", description="PINN and hybrid multigrid Poisson solvers")
    parser.add_argument("--version", action="version", version=f"pinnmg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("train", parents=[common], help="train a PINN")
    sub.add_parser("hybrid", parents=[common], help="PINN coarse solve + Gauss-Seidel V-cycle")
    sub.add_parser("gs", parents=[common], help="Gauss-Seidel solve on one grid")
    sub.add_parser("cg", parents=[common], help="conjugate-gradient solve on one grid")
    b = sub.add_parser("bench", parents=[common], help="run a preset sweep")
    b.add_argument("preset_pos", nargs="?", metavar="PRESET")
    i = sub.add_parser("info", parents=[common], help="describe a checkpoint")
    i.add_argument("path")
    return parser


def resolve_config(argv) -> tuple[RunConfig, argparse.Namespace]:
    ns = build_parser().parse_args(argv)
    settings = dict(COMMAND_DEFAULTS.get(ns.command, {}))
    if ns.config:
        settings.update(read_config_file(ns.config))
    flags = {k: v for k, v in vars(ns).items()
             if k in _TYPES and k != "command" and v is not None}
    settings.update({k: _coerce(k, v) for k, v in flags.items()})
    if hasattr(ns, "depth") or hasattr(ns, "width"):
        depth = getattr(ns, "depth", 4)
        width = getattr(ns, "width", 50)
        settings["hidden"] = ",".join([str(width)] * depth)
    if getattr(ns, "preset_pos", None):
        settings["preset"] = ns.preset_pos
    settings["command"] = ns.command
    return RunConfig(**settings), ns


def _print_row(row: dict) -> None:
    parts = [f"{k}={_fmt(row[k])}" for k in SUMMARY_COLUMNS + ["stop"]
             if k in row and row[k] is not None]
    print(" ".join(parts))


def _fail(exc: BaseException, code: int) -> int:
    print("pinnmg-error " + json.dumps({"type": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)
    return code


def dispatch(argv=None) -> int:
    """Run one subcommand; returns the process exit status."""
    try:
        rc, ns = resolve_config(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if rc.command == "info":
            print(run_info(ns.path))
            return 0
        rc = validate(rc)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        return _fail(exc, 2)
    try:
        root = out_dir(rc)
        if rc.command == "bench":
            rows = run_bench(rc, root)
            for row in rows:
                _print_row(row)
            print(f"summary: {root / rc.preset / 'summary.csv'}")
            return 0
        runner = {"train": run_train, "hybrid": run_hybrid, "gs": run_gs, "cg": run_cg}[rc.command]
        row = runner(rc, root)
        write_summary(root / "summary.csv", [row], rc.header())
        _print_row(row)
        return 0
    except Exception as exc:  # noqa: BLE001 - surfaced as a machine-readable line
        log.debug("failure", exc_info=True)
        return _fail(exc, 1)


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
