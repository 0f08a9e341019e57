"""Design optimizers: bound-constrained quasi-Newton, beta continuation, GA.

All optimizers maximize the figure of merit over the box ``[0, 1]^n`` and
return ``(design, RunHistory)``. Solve counts in the history come straight
from the :class:`~emtopopt.fem.SolverStats` of the objective in use.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .exceptions import ConfigurationError
from .filtering import ProjectionSpec
from .objective import Objective
from .problem import ProblemSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientConfig:
    """Settings for :func:`optimize_gradient` and :func:`run_continuation`.

    ``max_iter`` bounds accepted iterations; objective evaluations
    (including line-search trials) are capped at ``eval_cap_factor *
    max_iter``. The run also stops once the relative change of the figure of
    merit stays below ``ftol`` for ``ftol_window`` consecutive iterations.
    ``continuation`` is ``(beta_start, beta_max, beta_inc)`` or ``None``.
    """

    max_iter: int = 200
    memory: int = 10
    ftol: float = 1e-6
    ftol_window: int = 5
    gtol: float = 1e-9
    eval_cap_factor: int = 4
    beta: float = 5.0
    eta: float = 0.5
    continuation: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.continuation is not None:
            start, bmax, inc = self.continuation
            if not inc > 1:
                raise ConfigurationError(f"beta increment must exceed 1, got {inc}")
            if not start >= 1 or not bmax >= 1:
                raise ConfigurationError("continuation betas must be >= 1")


@dataclass(frozen=True)
class GAConfig:
    """Real-coded generational GA settings.

    Stops after ``generations`` generations or when the best figure of
    merit improves by less than ``stall_tol`` (relative) over
    ``stall_generations`` generations.
    """

    population_size: int = 200
    generations: int = 500
    crossover_rate: float = 0.8
    mutation_sigma: float = 0.1
    mutation_prob: float = 0.02
    elite_count: int = 2
    tournament_size: int = 3
    stall_generations: int = 50
    stall_tol: float = 1e-6
    seed: int = 1
    projection_beta: float = 1e5
    eta: float = 0.5

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ConfigurationError("elite_count must lie in [0, population_size)")
        if self.generations < 0:
            raise ConfigurationError("generations must be >= 0")


@dataclass(frozen=True)
class HistoryRecord:
    iteration: int
    phi: float
    forward_solves: int
    adjoint_solves: int
    beta: float
    seconds: float


@dataclass
class RunHistory:
    records: List[HistoryRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def phi(self) -> np.ndarray:
        return np.array([r.phi for r in self.records])

    @property
    def final(self) -> HistoryRecord:
        return self.records[-1]


class OptimizationError(RuntimeError):
    """An objective evaluation failed; ``history`` holds the records so far."""

    def __init__(self, message: str, history: RunHistory, design: np.ndarray | None = None):
        super().__init__(message)
        self.history = history
        self.design = design


class _EvalCapReached(Exception):
    pass


class _Recorder:
    def __init__(self, objective: Objective, history: RunHistory, callback, t0: float):
        self.objective = objective
        self.history = history
        self.callback = callback
        self.t0 = t0

    def __call__(self, phi: float, beta: float, iteration: int | None = None):
        st = self.objective.stats
        it = iteration if iteration is not None else (self.history.records[-1].iteration + 1 if self.history.records else 0)
        rec = HistoryRecord(it, float(phi), st.forward_solves, st.adjoint_solves, float(beta), time.perf_counter() - self.t0)
        self.history.records.append(rec)
        if self.callback is not None:
            self.callback(rec)
        return rec


def _initial(problem: ProblemSpec, dvini) -> np.ndarray:
    if dvini is None:
        return problem.initial_design()
    dv = np.asarray(dvini, dtype=float).ravel()
    if dv.size == 1:
        dv = np.full(problem.n_vars, dv[0])
    if dv.size != problem.n_vars:
        raise ConfigurationError(f"dvini has {dv.size} values, expected {problem.n_vars}")
    return np.clip(dv, 0.0, 1.0)


def _lbfgsb_stage(objective: Objective, x0: np.ndarray, cfg: GradientConfig, beta: float, record: _Recorder):
    proj = ProjectionSpec(beta, cfg.eta)
    cap = cfg.eval_cap_factor * cfg.max_iter
    state = {"evals": 0, "x": x0.copy(), "started": False}

    def fun(x):
        if state["evals"] >= cap:
            raise _EvalCapReached
        x = np.clip(x, 0.0, 1.0)
        state["evals"] += 1
        ev = objective.evaluate(x, proj, with_gradient=True)
        if not state["started"]:
            state["started"] = True
            record(ev.fom, beta)
        return -ev.fom, -ev.sens

    streak = [0]

    def callback(intermediate_result):
        x = np.clip(intermediate_result.x, 0.0, 1.0)
        phi = -float(intermediate_result.fun)
        prev = record.history.records[-1].phi
        state["x"] = x.copy()
        record(phi, beta)
        rel = abs(phi - prev) / max(abs(phi), 1e-300)
        streak[0] = streak[0] + 1 if rel < cfg.ftol else 0
        if streak[0] >= cfg.ftol_window:
            raise StopIteration

    try:
        res = minimize(
            fun,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * x0.size,
            callback=callback,
            options=dict(maxiter=cfg.max_iter, maxfun=cap, maxcor=cfg.memory, ftol=0.0, gtol=cfg.gtol),
        )
        log.debug("L-BFGS-B stage beta=%g: %s", beta, res.message)
    except _EvalCapReached:
        log.debug("evaluation cap %d reached at beta=%g", cap, beta)
    return state["x"]


def optimize_gradient(
    problem: ProblemSpec,
    cfg: GradientConfig = GradientConfig(),
    dvini=None,
    objective: Objective | None = None,
    callback: Callable[[HistoryRecord], None] | None = None,
    history: RunHistory | None = None,
):
    """Maximize the figure of merit with projected limited-memory BFGS.

    Returns ``(design, history)``; the first history record is the initial
    design, then one record per accepted iteration.
    """
    objective = objective if objective is not None else Objective(problem)
    history = history if history is not None else RunHistory()
    record = _Recorder(objective, history, callback, time.perf_counter())
    x = _initial(problem, dvini)
    try:
        x = _lbfgsb_stage(objective, x, cfg, cfg.beta, record)
    except Exception as exc:
        raise OptimizationError(f"evaluation failed: {exc}", history, x) from exc
    return x, history


def beta_schedule(beta_start: float, beta_max: float, beta_inc: float) -> List[float]:
    """Stage betas; always at least one stage."""
    betas = [float(beta_start)]
    while betas[-1] * beta_inc < beta_max:
        betas.append(betas[-1] * beta_inc)
    return betas


def run_continuation(
    problem: ProblemSpec,
    cfg: GradientConfig,
    dvini=None,
    objective: Objective | None = None,
    callback: Callable[[HistoryRecord], None] | None = None,
):
    """Warm-started gradient runs with beta multiplied by ``beta_inc`` per stage."""
    if cfg.continuation is None:
        raise ConfigurationError("continuation settings missing")
    objective = objective if objective is not None else Objective(problem)
    history = RunHistory()
    record = _Recorder(objective, history, callback, time.perf_counter())
    x = _initial(problem, dvini)
    try:
        for beta in beta_schedule(*cfg.continuation):
            x = _lbfgsb_stage(objective, x, cfg, beta, record)
    except Exception as exc:
        raise OptimizationError(f"evaluation failed: {exc}", history, x) from exc
    return x, history


def _tournament(rng: np.random.Generator, fitness: np.ndarray, size: int) -> int:
    contenders = rng.integers(0, fitness.size, size)
    return int(contenders[np.argmax(fitness[contenders])])


def optimize_ga(
    problem: ProblemSpec,
    cfg: GAConfig = GAConfig(),
    dvini=None,
    objective: Objective | None = None,
    callback: Callable[[HistoryRecord], None] | None = None,
):
    """Genetic-algorithm baseline; never computes gradients.

    Tournament selection, uniform crossover, Gaussian mutation clipped to
    ``[0, 1]`` and elitism. Every individual of every generation is solved,
    so each generation costs ``population_size`` forward solves. The first
    individual of the initial population is ``dvini``; the rest are uniform
    random. Returns the best individual ever evaluated.
    """
    objective = objective if objective is not None else Objective(problem)
    history = RunHistory()
    record = _Recorder(objective, history, callback, time.perf_counter())
    rng = np.random.default_rng(cfg.seed)
    proj = ProjectionSpec(cfg.projection_beta, cfg.eta)
    n, npop = problem.n_vars, cfg.population_size

    pop = rng.random((npop, n))
    pop[0] = _initial(problem, dvini)
    best_x, best_phi = pop[0].copy(), -np.inf

    def evaluate(population):
        return np.array([objective.evaluate(ind, proj, with_gradient=False).fom for ind in population])

    try:
        fitness = evaluate(pop)
        for gen in range(cfg.generations + 1):
            if gen > 0:
                elite = np.argsort(-fitness, kind="stable")[: cfg.elite_count]
                children = [pop[i].copy() for i in elite]
                while len(children) < npop:
                    a = pop[_tournament(rng, fitness, cfg.tournament_size)]
                    b = pop[_tournament(rng, fitness, cfg.tournament_size)]
                    if rng.random() < cfg.crossover_rate:
                        child = np.where(rng.random(n) < 0.5, a, b)
                    else:
                        child = a.copy()
                    mask = rng.random(n) < cfg.mutation_prob
                    child = np.clip(child + mask * rng.normal(0.0, cfg.mutation_sigma, n), 0.0, 1.0)
                    children.append(child)
                pop = np.array(children)
                fitness = evaluate(pop)
            i = int(np.argmax(fitness))
            if fitness[i] > best_phi:
                best_phi, best_x = float(fitness[i]), pop[i].copy()
            record(best_phi, cfg.projection_beta, iteration=gen)
            if gen >= cfg.stall_generations:
                old = history.records[gen - cfg.stall_generations].phi
                if best_phi - old <= cfg.stall_tol * max(abs(best_phi), 1e-300):
                    log.debug("GA stalled at generation %d", gen)
                    break
    except Exception as exc:
        raise OptimizationError(f"evaluation failed: {exc}", history, best_x) from exc
    return best_x, history
