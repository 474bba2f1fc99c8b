"""The outer Bayesian-optimization loop.

Initial low-discrepancy design, scheduled hyperparameter refresh, a
gamma-exploit branch that queries the posterior-mean argmax with
probability gamma, acquisition-driven querying otherwise, and a
posterior-mean recommendation after every observation. A run is a pure
function of (task, config, seed).
"""

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import acquisitions, gridopt, seeding
from .gp import GPPosterior, HyperFitConfig, KernelParams, Observation, fit_hyperparameters, fit_posterior
from .optima import SamplerConfig, sample_opt_pairs
from .tasks import Task, regrets


class Branch(Enum):
    EXPLOIT = "exploit"
    ACQUIRE = "acquire"


ACQUISITIONS = ("jes", "mes", "ei", "random")
HYPER_MODES = ("fixed", "map", "ensemble")


@dataclass(frozen=True)
class BOConfig:
    acquisition: str = "jes"
    n_init: int | None = None  # default D + 1
    n_iters: int | None = None  # default 50 * D
    n_mc_samples: int = 100
    gamma: float = 0.0
    hyper_mode: str = "fixed"
    hyper_refresh_every: int = 5
    n_hyper_sets: int = 1
    rff_features: int = 1024
    ts_grid_size: int | None = None
    ts_refine_iters: int = 5
    acq_grid_size: int = 2048
    acq_refine_iters: int = 10
    rec_grid_size: int = 2048
    rec_refine_iters: int = 10

    def __post_init__(self):
        if self.acquisition not in ACQUISITIONS:
            raise ValueError(f"acquisition must be one of {ACQUISITIONS}, got {self.acquisition!r}")
        if self.hyper_mode not in HYPER_MODES:
            raise ValueError(f"hyper_mode must be one of {HYPER_MODES}, got {self.hyper_mode!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.n_init is not None and self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.n_mc_samples < 1:
            raise ValueError("n_mc_samples must be >= 1")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    x: np.ndarray
    y: float
    branch: str  # "init" | "exploit" | "acquire"
    recommendation: np.ndarray
    simple_regret: float
    inference_regret: float
    acq_time_ms: float


@dataclass
class Trace:
    task: str
    acquisition: str
    seed: int
    n_init: int
    rows: list = field(default_factory=list)
    final_recommendation: np.ndarray | None = None


class ObjectiveError(RuntimeError):
    """Objective evaluation failed; carries the iteration and partial trace."""

    def __init__(self, iteration: int, trace: Trace, cause: Exception):
        super().__init__(f"objective evaluation failed at iteration {iteration}: {cause}")
        self.iteration = iteration
        self.partial_trace = trace


def gamma_branch(rng_draw: float, gamma: float) -> Branch:
    """Exploit iff the uniform draw falls strictly below gamma."""
    if not 0.0 <= rng_draw < 1.0:
        raise ValueError(f"rng_draw must be in [0, 1), got {rng_draw}")
    return Branch.EXPLOIT if rng_draw < gamma else Branch.ACQUIRE


def recommend(posterior: GPPosterior, bounds: np.ndarray, grid_size: int, refine_iters: int, seed) -> np.ndarray:
    """Argmax of the posterior mean over the box."""
    entropy = seed if isinstance(seed, tuple) else (seed,)

    def mean_batch(x):
        return posterior.predict_batch(x)[0]

    x, _ = gridopt.maximize(
        mean_batch, bounds, grid_size, refine_iters, entropy,
        extra_candidates=posterior.x_train if posterior.n else None,
    )
    return x


class _Standardizer:
    """Center/scale raw outputs; identity when hyperparameters are fixed."""

    def __init__(self):
        self.shift = 0.0
        self.scale = 1.0

    def refresh(self, y_raw: np.ndarray) -> None:
        self.shift = float(np.mean(y_raw))
        sd = float(np.std(y_raw))
        self.scale = sd if sd > 1e-12 else 1.0

    def apply(self, y: float) -> float:
        return (y - self.shift) / self.scale


def run_bo(task: Task, config: BOConfig, seed: int) -> Trace:
    """Execute the full optimization loop; deterministic given the seed."""
    d = task.dimension
    bounds = task.bounds
    m = config.n_init if config.n_init is not None else d + 1
    n_iters = config.n_iters if config.n_iters is not None else 50 * d
    sampler_cfg = SamplerConfig(
        n_features=config.rff_features,
        grid_size=config.ts_grid_size,
        refine_iters=config.ts_refine_iters,
    )
    trace = Trace(task=task.name, acquisition=config.acquisition, seed=seed, n_init=m)

    xs: list[np.ndarray] = []
    ys_raw: list[float] = []
    noiseless_best = -math.inf
    std = _Standardizer()

    def observe(x: np.ndarray, iteration: int) -> float:
        try:
            return task.observe(x, (seed, seeding.NOISE, iteration))
        except Exception as exc:
            raise ObjectiveError(iteration, trace, exc) from exc

    def current_data() -> list[Observation]:
        return [Observation(x, std.apply(y)) for x, y in zip(xs, ys_raw)]

    def fit_param_sets(iteration: int) -> list[KernelParams]:
        if config.hyper_mode == "fixed":
            if task.kernel_params is None:
                raise ValueError(f"task {task.name} has no generating hyperparameters for fixed mode")
            return [task.kernel_params]
        std.refresh(np.asarray(ys_raw))
        hyper_cfg = HyperFitConfig(mode=config.hyper_mode, n_sets=config.n_hyper_sets)
        return fit_hyperparameters(current_data(), bounds, hyper_cfg, (seed << 16) ^ iteration)

    def record(iteration: int, x: np.ndarray, y: float, branch: str, acq_ms: float, posteriors) -> None:
        nonlocal noiseless_best
        noiseless_best = max(noiseless_best, task.noiseless(x))
        rec = recommend(posteriors[0], bounds, config.rec_grid_size, config.rec_refine_iters,
                        (seed, seeding.ACQ_GRID, iteration, 1))
        simple, inference = regrets(task, noiseless_best, rec)
        trace.rows.append(
            TraceRow(iteration, x.copy(), y, branch, rec, simple, inference, acq_ms)
        )

    # initial design
    init_x = gridopt.sobol_points(m, bounds, (seed, seeding.INIT_DESIGN))
    for i in range(m):
        x = init_x[i]
        y = observe(x, i)
        xs.append(x)
        ys_raw.append(y)
    param_sets = fit_param_sets(0)
    init_posterior = fit_posterior(current_data(), param_sets[0])
    for i in range(m):
        record(i, xs[i], ys_raw[i], "init", 0.0, [init_posterior])

    posteriors = None
    for t in range(n_iters):
        iteration = m + t
        if config.hyper_mode != "fixed" and t % max(config.hyper_refresh_every, 1) == 0:
            param_sets = fit_param_sets(iteration)
        data = current_data()
        posteriors = [fit_posterior(data, p) for p in param_sets]

        t0 = time.perf_counter()
        draw = float(seeding.rng_from(seed, seeding.BRANCH, t).random())
        branch = gamma_branch(draw, config.gamma)
        if branch is Branch.EXPLOIT:
            x_next = recommend(posteriors[0], bounds, config.rec_grid_size, config.rec_refine_iters,
                               (seed, seeding.ACQ_GRID, iteration, 0))
        else:
            x_next = _acquire(task, config, posteriors, sampler_cfg, seed, t, iteration)
        acq_ms = (time.perf_counter() - t0) * 1e3

        y = observe(x_next, iteration)
        xs.append(x_next)
        ys_raw.append(y)
        post_new = fit_posterior(current_data(), param_sets[0])
        record(iteration, x_next, y, branch.value, acq_ms, [post_new])

    final_posterior = fit_posterior(current_data(), param_sets[0])
    trace.final_recommendation = recommend(
        final_posterior, bounds, config.rec_grid_size, config.rec_refine_iters,
        (seed, seeding.ACQ_GRID, m + n_iters, 1),
    )
    return trace


def _acquire(task, config, posteriors, sampler_cfg, seed, t, iteration):
    bounds = task.bounds
    acq = config.acquisition
    if acq == "random":
        rng = seeding.rng_from(seed, seeding.RANDOM_QUERY, t)
        return bounds[:, 0] + rng.random(task.dimension) * (bounds[:, 1] - bounds[:, 0])
    if acq == "ei":
        # incumbent: best posterior mean over observed inputs, per hyper set
        incumbents = [float(np.max(post.predict_batch(post.x_train)[0])) for post in posteriors]

        def ei_fn(x):
            vals = np.zeros(x.shape[0])
            for post, incumbent in zip(posteriors, incumbents):
                mean, var_f = post.predict_batch(x)
                vals += acquisitions.ei_batch(mean, var_f, incumbent)
            return vals / len(posteriors)

        return acquisitions.optimize_acquisition(
            ei_fn, bounds, config.acq_grid_size, config.acq_refine_iters,
            (seed, seeding.ACQ_GRID, iteration, 2),
        )

    # opt-pair based acquisitions: split the MC budget across hyper sets
    n_sets = len(posteriors)
    per_set = max(config.n_mc_samples // n_sets, 1)
    pair_sets = [
        sample_opt_pairs(post, bounds, per_set, sampler_cfg, (seed, seeding.OPT_PAIRS, t, s))
        for s, post in enumerate(posteriors)
    ]
    if acq == "mes":
        f_star_sets = [np.array([p.f_star for p in pairs]) for pairs in pair_sets]

        def mes_fn(x):
            vals = np.zeros(x.shape[0])
            for post, f_stars in zip(posteriors, f_star_sets):
                vals += acquisitions.mes_batch(post, x, f_stars)
            return vals / n_sets

        return acquisitions.optimize_acquisition(
            mes_fn, bounds, config.acq_grid_size, config.acq_refine_iters,
            (seed, seeding.ACQ_GRID, iteration, 3),
        )
    ensembles = [
        acquisitions.build_conditioned_ensemble(post, pairs)
        for post, pairs in zip(posteriors, pair_sets)
    ]

    def jes_fn(x):
        vals = np.zeros(x.shape[0])
        for ens in ensembles:
            vals += acquisitions.jes_batch(ens, x)
        return vals / n_sets

    return acquisitions.optimize_acquisition(
        jes_fn, bounds, config.acq_grid_size, config.acq_refine_iters,
        (seed, seeding.ACQ_GRID, iteration, 4),
    )
