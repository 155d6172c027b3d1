"""Full-batch training: Adam warm-up followed by L-BFGS.

One epoch is one full-batch optimizer iteration. L-BFGS counts outer
iterations; line-search evaluations are tracked separately in
``TrainReport.n_evals``.
"""

from __future__ import annotations

import csv
import logging
import time
import warnings
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import line_search

from .autodiff import LossFunction
from .net import NetworkConfig, ShapeMismatchError, load_checkpoint, xavier_init
from .problems import Problem
from .sampling import TrainingSet

log = logging.getLogger(__name__)

STOP_REASONS = ("ftol", "max-epochs", "gradient-tol", "target", "line-search")


class TrainingDivergedError(RuntimeError):
    """Raised on a non-finite loss; carries the last finite state."""

    def __init__(self, message, params, history):
        super().__init__(message)
        self.params = params
        self.history = history


@dataclass(frozen=True)
class TrainSchedule:
    adam_epochs: int = 2000
    adam_learning_rate: float = 1e-3
    lbfgs_max_epochs: int = 3000
    ftol: float = 0.0
    lbfgs_history: int = 10
    wolfe: tuple[float, float] = (1e-4, 0.9)
    gradient_tolerance: float = 1e-9
    target_loss: float | None = None
    boundary_weight: float = 1.0

    def __post_init__(self):
        c1, c2 = self.wolfe
        if self.adam_learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.ftol < 0:
            raise ValueError("ftol must be >= 0")
        if self.lbfgs_history < 1:
            raise ValueError("L-BFGS history must be >= 1")
        if not 0 < c1 < c2 < 1:
            raise ValueError("Wolfe constants need 0 < c1 < c2 < 1")
        if self.adam_epochs < 0 or self.lbfgs_max_epochs < 0:
            raise ValueError("epoch counts must be >= 0")


# transfer-learning warm start: a few Adam steps are enough before L-BFGS
TRANSFER_SCHEDULE = TrainSchedule(adam_epochs=10)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    phase: str
    loss: float
    wall_ms: float


@dataclass
class TrainReport:
    records: list[EpochRecord]
    stop_reason: str
    params: np.ndarray
    config: NetworkConfig
    n_evals: int = 0
    adam_epochs: int = 0
    lbfgs_epochs: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss

    def losses(self, phase: str | None = None) -> np.ndarray:
        return np.array([r.loss for r in self.records if phase is None or r.phase == phase])

    def first_epoch_below(self, threshold: float, phase: str | None = "lbfgs") -> int | None:
        """Phase-local epoch count at which the loss first drops to ``threshold``."""
        count = 0
        for r in self.records:
            if phase is not None and r.phase != phase:
                continue
            if r.phase != "init":
                count += 1
            if r.loss <= threshold:
                return count
        return None

    def write_csv(self, path, header: str = "") -> None:
        write_history_csv(self.records, path, header)


def write_history_csv(records, path, header: str = "") -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if header:
            fh.write(header)
        w = csv.writer(fh)
        w.writerow(["epoch", "phase", "loss", "wall_ms"])
        for r in records:
            w.writerow([r.epoch, r.phase, repr(float(r.loss)), f"{r.wall_ms:.3f}"])


class _Clock:
    def __init__(self):
        self.t0 = time.perf_counter()

    def ms(self) -> float:
        return 1e3 * (time.perf_counter() - self.t0)


def ftol_reached(r_prev: float, r_next: float, ftol: float) -> bool:
    """Relative-decrease stop: ``(r_k - r_k+1) / max(|r_k|, |r_k+1|, 1) <= ftol``."""
    return (r_prev - r_next) / max(abs(r_prev), abs(r_next), 1.0) <= ftol


def _finite(x) -> bool:
    return bool(np.isfinite(x))


def adam_run(params, loss: LossFunction, epochs: int, lr: float = 1e-3, *,
             betas=(0.9, 0.999), eps=1e-8, start_epoch: int = 0, clock=None,
             records=None, callback=None):
    """Full-batch Adam. Returns ``(params, records, (loss, grad) at the result)``.

    ``callback(epoch, params, loss)`` is called after every step.
    """
    clock = clock or _Clock()
    records = [] if records is None else records
    dtype = loss.config.dtype
    theta = np.array(params, dtype=dtype)
    parts, g = loss.value_and_grad(theta)
    if not _finite(parts.total):
        raise TrainingDivergedError("non-finite initial loss", theta, records)
    if not records:
        records.append(EpochRecord(start_epoch, "init", parts.total, clock.ms()))
    b1, b2 = betas
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    for k in range(1, epochs + 1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**k)
        vhat = v / (1 - b2**k)
        new = (theta - lr * mhat / (np.sqrt(vhat) + eps)).astype(dtype)
        parts_new, g_new = loss.value_and_grad(new)
        if not (_finite(parts_new.total) and np.all(np.isfinite(g_new))):
            raise TrainingDivergedError(
                f"non-finite loss at Adam epoch {start_epoch + k}", theta, records)
        theta, parts, g = new, parts_new, g_new
        records.append(EpochRecord(start_epoch + k, "adam", parts.total, clock.ms()))
        if callback is not None:
            callback(start_epoch + k, theta, parts.total)
    return theta, records, (parts, g)


class _Cached:
    """Evaluate ``value_and_grad`` once per distinct point for the line search."""

    def __init__(self, loss: LossFunction):
        self.loss = loss
        self.key = None
        self.val = None

    def __call__(self, x):
        key = x.tobytes()
        if key != self.key:
            parts, g = self.loss.value_and_grad(x)
            self.key, self.val = key, (parts, g)
        return self.val

    def f(self, x):
        return self(x)[0].total

    def g(self, x):
        return self(x)[1]


def _two_loop(g, s_hist, y_hist, rho_hist):
    q = g.astype(np.float64)
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * np.dot(s, q)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= np.dot(s, y) / np.dot(y, y)
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def lbfgs_run(params, loss: LossFunction, schedule: TrainSchedule, *, start_epoch: int = 0,
              clock=None, records=None, state=None, callback=None):
    """L-BFGS with strong-Wolfe line search.

    Returns ``(params, records, stop_reason)``. ``state`` may pass the
    ``(LossBreakdown, grad)`` already known at ``params``.
    """
    clock = clock or _Clock()
    records = [] if records is None else records
    dtype = loss.config.dtype
    theta = np.array(params, dtype=dtype)
    cache = _Cached(loss)
    if state is None:
        parts, g = cache(theta)
    else:
        parts, g = state
        cache.key, cache.val = theta.tobytes(), state
    f = parts.total
    if not _finite(f):
        raise TrainingDivergedError("non-finite loss before L-BFGS", theta, records)
    if not records:
        records.append(EpochRecord(start_epoch, "init", f, clock.ms()))
    c1, c2 = schedule.wolfe
    m = schedule.lbfgs_history
    s_hist, y_hist, rho_hist = deque(maxlen=m), deque(maxlen=m), deque(maxlen=m)
    if schedule.target_loss is not None and f <= schedule.target_loss:
        return theta, records, "target"
    reason = "max-epochs"
    for k in range(1, schedule.lbfgs_max_epochs + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= schedule.gradient_tolerance:
            reason = "gradient-tol"
            break
        if s_hist:
            d = _two_loop(g, s_hist, y_hist, rho_hist)
        else:
            d = -g.astype(np.float64) / max(gnorm, 1.0)
        if np.dot(d, g) >= 0:
            s_hist.clear(), y_hist.clear(), rho_hist.clear()
            d = -g.astype(np.float64) / max(gnorm, 1.0)
        d = d.astype(dtype)
        with warnings.catch_warnings():
            # line-search failure is reported through alpha=None
            warnings.simplefilter("ignore", RuntimeWarning)
            alpha, *_ = line_search(cache.f, cache.g, theta, d, gfk=g, old_fval=f,
                                    c1=c1, c2=c2, maxiter=20)
        if alpha is None:
            reason = "line-search"
            break
        new = (theta + alpha * d).astype(dtype)
        parts_new, g_new = cache(new)
        f_new = parts_new.total
        if not (_finite(f_new) and np.all(np.isfinite(g_new))):
            raise TrainingDivergedError(
                f"non-finite loss at L-BFGS epoch {start_epoch + k}", theta, records)
        s = (new - theta).astype(np.float64)
        y = (g_new - g).astype(np.float64)
        sy = float(np.dot(s, y))
        if sy > 1e-12 * float(np.dot(y, y)):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
        records.append(EpochRecord(start_epoch + k, "lbfgs", f_new, clock.ms()))
        if callback is not None:
            callback(start_epoch + k, new, f_new)
        stop = ftol_reached(f, f_new, schedule.ftol)
        theta, f, g = new, f_new, g_new
        if stop:
            reason = "ftol"
            break
        if schedule.target_loss is not None and f <= schedule.target_loss:
            reason = "target"
            break
    return theta, records, reason


@dataclass(frozen=True)
class XavierInit:
    seed: int = 0


@dataclass(frozen=True)
class CheckpointInit:
    path: str


def initial_params(config: NetworkConfig, init) -> np.ndarray:
    if isinstance(init, XavierInit):
        return xavier_init(config, init.seed)
    if isinstance(init, CheckpointInit):
        ck_config, params, _ = load_checkpoint(init.path, precision=config.precision)
        if ck_config.with_precision(config.precision) != config:
            raise ShapeMismatchError(
                f"checkpoint {init.path} holds {ck_config.describe()}, "
                f"trainer expects {config.describe()}")
        return params
    params = np.asarray(init, dtype=config.dtype)
    if params.size != config.n_params:
        raise ShapeMismatchError("initial parameter vector does not match the config")
    return params.copy()


def train_pinn(config: NetworkConfig, init, tset: TrainingSet, problem: Problem,
               schedule: TrainSchedule | None = None, callback=None) -> TrainReport:
    """Adam then L-BFGS from Xavier weights, a checkpoint, or a given vector.

    With a checkpoint and no explicit schedule, 10 Adam epochs precede L-BFGS.
    """
    if schedule is None:
        schedule = TRANSFER_SCHEDULE if isinstance(init, CheckpointInit) else TrainSchedule()
    if not config.activation.smooth:
        log.warning("%s is not a consistent/convergent PINN activation; the Laplacian "
                    "of a piecewise-linear surrogate vanishes almost everywhere",
                    config.activation.value)
    loss = LossFunction(config, tset, problem, schedule.boundary_weight,
                        allow_nonsmooth=not config.activation.smooth)
    params = initial_params(config, init)
    clock = _Clock()
    records: list[EpochRecord] = []
    try:
        params, records, state = adam_run(params, loss, schedule.adam_epochs,
                                          schedule.adam_learning_rate, clock=clock,
                                          records=records, callback=callback)
        params, records, reason = lbfgs_run(params, loss, schedule,
                                            start_epoch=schedule.adam_epochs, clock=clock,
                                            records=records, state=state, callback=callback)
    except TrainingDivergedError as exc:
        exc.report = TrainReport(exc.history, "diverged", exc.params, config, loss.n_evals)
        raise
    n_adam = sum(r.phase == "adam" for r in records)
    n_lbfgs = sum(r.phase == "lbfgs" for r in records)
    return TrainReport(records, reason, params, config, loss.n_evals, n_adam, n_lbfgs)


def desk_schedule(**overrides) -> TrainSchedule:
    return replace(TrainSchedule(adam_epochs=2000, lbfgs_max_epochs=3000), **overrides)
