"""Hybrid solver: a trained surrogate supplies the coarse-grid solution, then
Gauss-Seidel refines it and an upward V-cycle (bilinear prolongation plus one
sweep per level) carries it to the fine grid.

Pipeline per solve:

1. load checkpoint weights (transfer learning)
2. a few Adam epochs
3. L-BFGS until the ftol rule fires or the epoch cap is hit
4. keep the trained surrogate (optionally save it)
5. infer on the coarse grid in training precision, widen to float64
6. Gauss-Seidel on the coarse grid to ``delta``, then prolongate + sweep per level
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .classic import Grid2D, gs_solve, gs_sweep, node_coords, prolongate, source_grid
from .net import NetworkConfig, forward, load_checkpoint, save_checkpoint, xavier_init
from .problems import Problem, error_metrics, eval_boundary
from .sampling import TrainingSet
from .train import TrainingDivergedError, TrainSchedule, train_pinn

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HybridConfig:
    coarse: int = 64
    fine: int = 512
    checkpoint: str | None = None
    ftol: float = 1e-4
    delta: float = 1e-6
    adam_epochs: int = 10
    lbfgs_cap: int = 1000
    precision: int = 32
    sweeps_per_level: int = 1
    learning_rate: float = 1e-3
    max_gs_iters: int = 1_000_000
    fallback_seed: int = 0
    save_trained: str | None = None

    def __post_init__(self):
        ratio = self.fine // self.coarse if self.coarse > 0 else 0
        if self.coarse < 2 or self.fine % self.coarse or ratio & (ratio - 1):
            raise ValueError("fine/coarse must be a power of two and coarse >= 2")
        if self.ftol <= 0 or self.delta <= 0:
            raise ValueError("ftol and delta must be positive")
        if self.precision not in (32, 64):
            raise ValueError("precision must be 32 or 64")

    @property
    def levels(self) -> list[int]:
        out, n = [], self.coarse * 2
        while n <= self.fine:
            out.append(n)
            n *= 2
        return out


@dataclass(frozen=True)
class PhaseRecord:
    phase: str
    epochs_or_iters: int
    wall_ms: float
    loss_or_residual: float


@dataclass
class SolverReport:
    adam_epochs: int = 0
    lbfgs_epochs: int = 0
    lbfgs_stop: str = ""
    coarse_gs_iters: int = 0
    sweeps_per_level: dict = field(default_factory=dict)
    phases: list[PhaseRecord] = field(default_factory=list)
    final_loss: float = float("nan")
    linf: float | None = None
    l2: float | None = None
    fell_back: bool = False

    def add(self, phase, count, wall_ms, value):
        self.phases.append(PhaseRecord(phase, int(count), float(wall_ms), float(value)))

    def phase_ms(self, prefix: str) -> float:
        return sum(p.wall_ms for p in self.phases if p.phase.startswith(prefix))

    @property
    def total_ms(self) -> float:
        return sum(p.wall_ms for p in self.phases)

    def write_csv(self, path, header: str = "") -> None:
        with Path(path).open("w", newline="") as fh:
            if header:
                fh.write(header)
            w = csv.writer(fh)
            w.writerow(["phase", "epochs_or_iters", "wall_ms", "loss_or_residual"])
            for p in self.phases:
                w.writerow([p.phase, p.epochs_or_iters, f"{p.wall_ms:.3f}", repr(p.loss_or_residual)])

    def write_jsonl(self, path, header: str = "") -> None:
        with Path(path).open("w") as fh:
            if header:
                fh.write(header)
            for p in self.phases:
                fh.write(json.dumps(asdict(p)) + "\n")


def infer_on_grid(params, config: NetworkConfig, N: int, problem: Problem) -> Grid2D:
    """Surrogate on all nodes of grid ``N`` (training precision), Dirichlet ring exact."""
    X, Y = node_coords(N)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    u = forward(params, config, pts).astype(np.float64).reshape(X.shape)
    grid = Grid2D(N, u)
    grid.set_boundary(lambda x, y: eval_boundary(problem, x, y))
    return grid


def vcycle_up(grid: Grid2D, problem: Problem, fine: int, sweeps: int = 1,
              report: SolverReport | None = None) -> Grid2D:
    """Prolongate level by level up to ``fine`` with ``sweeps`` GS sweeps per level."""
    g = lambda x, y: eval_boundary(problem, x, y)
    while grid.N < fine:
        t0 = time.perf_counter()
        grid = prolongate(grid)
        grid.set_boundary(g)
        f = source_grid(problem, grid.N)
        upd = 0.0
        for _ in range(sweeps):
            upd = gs_sweep(grid, f)
        if report is not None:
            report.sweeps_per_level[grid.N] = sweeps
            report.add(f"vcycle-{grid.N}", sweeps, 1e3 * (time.perf_counter() - t0), upd)
    return grid


def coarse_refine(grid: Grid2D, problem: Problem, delta: float, max_iters: int,
                  report: SolverReport | None = None):
    t0 = time.perf_counter()
    res = gs_solve(grid, source_grid(problem, grid.N), delta, max_iters)
    if report is not None:
        report.coarse_gs_iters = res.iterations
        report.add("gs-coarse", res.iterations, 1e3 * (time.perf_counter() - t0), res.last_update)
    return res


def solve_gs_vcycle(problem: Problem, coarse: int, fine: int, delta: float,
                    sweeps_per_level: int = 1, max_gs_iters: int = 1_000_000):
    """Baseline: zero initial guess, GS on the coarse grid, same upward V-cycle."""
    report = SolverReport()
    grid = Grid2D.zeros(coarse)
    grid.set_boundary(lambda x, y: eval_boundary(problem, x, y))
    coarse_refine(grid, problem, delta, max_gs_iters, report)
    grid = vcycle_up(grid, problem, fine, sweeps_per_level, report)
    if problem.exact is not None:
        report.linf, report.l2 = error_metrics(grid, problem)
    return grid, report


def _train(config, params, tset, problem, cfg: HybridConfig):
    schedule = TrainSchedule(adam_epochs=cfg.adam_epochs, adam_learning_rate=cfg.learning_rate,
                             lbfgs_max_epochs=cfg.lbfgs_cap, ftol=cfg.ftol)
    return train_pinn(config, params, tset, problem, schedule)


def solve_hybrid(problem: Problem, cfg: HybridConfig, tset: TrainingSet, params=None,
                 config: NetworkConfig | None = None):
    """Run the six-step pipeline; returns ``(fine grid, SolverReport, train report)``.

    ``params``/``config`` may replace the checkpoint (e.g. for in-memory runs).
    """
    report = SolverReport()
    t0 = time.perf_counter()
    if params is None:
        if cfg.checkpoint is None:
            raise ValueError("hybrid solve needs a checkpoint or explicit parameters")
        config, params, _ = load_checkpoint(cfg.checkpoint, precision=cfg.precision)
    else:
        config = config.with_precision(cfg.precision)
        params = np.asarray(params, dtype=config.dtype)
    report.add("load", 0, 1e3 * (time.perf_counter() - t0), float("nan"))

    try:
        train = _train(config, params, tset, problem, cfg)
    except TrainingDivergedError as exc:
        log.warning("training diverged (%s); retrying once from Xavier weights", exc)
        report.fell_back = True
        train = _train(config, xavier_init(config, cfg.fallback_seed), tset, problem, cfg)
    adam_recs = [r for r in train.records if r.phase == "adam"]
    lbfgs_recs = [r for r in train.records if r.phase == "lbfgs"]
    adam_end = adam_recs[-1].wall_ms if adam_recs else train.records[0].wall_ms
    report.adam_epochs = len(adam_recs)
    report.lbfgs_epochs = len(lbfgs_recs)
    report.lbfgs_stop = train.stop_reason
    report.final_loss = train.final_loss
    report.add("adam", len(adam_recs), adam_end,
               adam_recs[-1].loss if adam_recs else train.records[0].loss)
    report.add("lbfgs", len(lbfgs_recs), train.records[-1].wall_ms - adam_end, train.final_loss)
    if cfg.save_trained:
        save_checkpoint(config, train.params, f"problem={problem.tag};hybrid-trained", cfg.save_trained)

    t0 = time.perf_counter()
    grid = infer_on_grid(train.params, config, cfg.coarse, problem)
    report.add("inference", 0, 1e3 * (time.perf_counter() - t0), float("nan"))

    coarse_refine(grid, problem, cfg.delta, cfg.max_gs_iters, report)
    grid = vcycle_up(grid, problem, cfg.fine, cfg.sweeps_per_level, report)
    if problem.exact is not None:
        report.linf, report.l2 = error_metrics(grid, problem)
    return grid, report, train
