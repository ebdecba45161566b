"""Bounded differential evolution with seeded restarts and a local polish."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import local
from .errors import InvalidBounds, NonFinite

DEFAULT_BOUND = 1e6
STRATEGIES = ("rand1bin",)


@dataclass(frozen=True)
class OptimizeConfig:
    """Differential-evolution settings.

    ``mutation_rate`` is the differential weight F applied to the member
    difference vector. ``bounds=None`` means (-1e6, 1e6) for every parameter,
    the finite stand-in for an unbounded search.
    """

    bounds: Optional[Sequence[Tuple[float, float]]] = None
    max_iter: int = 100
    restarts: int = 5
    mutation_rate: float = 0.05
    n_jobs: int = -1
    seed: int = 0
    population: Optional[int] = None
    crossover: float = 0.7
    strategy: str = "rand1bin"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be positive")
        if not (0 < self.mutation_rate <= 2):
            raise ValueError("mutation_rate must lie in (0, 2]")
        if not (0 <= self.crossover <= 1):
            raise ValueError("crossover must lie in [0, 1]")
        if self.population is not None and self.population < 4:
            raise ValueError("population must be at least 4")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.n_jobs == 0 or self.n_jobs < -1:
            raise ValueError("n_jobs must be -1 or a positive integer")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def resolved_bounds(self, p):
        if self.bounds is None:
            return np.tile([-DEFAULT_BOUND, DEFAULT_BOUND], (p, 1)).astype(float)
        b = np.asarray(self.bounds, dtype=float)
        if b.shape != (p, 2):
            raise InvalidBounds(f"expected {p} (lo, hi) pairs, got shape {b.shape}")
        if not np.all(np.isfinite(b)) or np.any(b[:, 0] >= b[:, 1]):
            raise InvalidBounds("every bound needs finite lo < hi")
        return b

    def resolved_population(self, p):
        return self.population if self.population is not None else max(15, 10 * p)

    def workers(self):
        if self.n_jobs == -1:
            return os.cpu_count() or 1
        return self.n_jobs


def restart_rng(seed, index):
    """Generator for restart ``index``; depends only on (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _evolve(obj, bounds, npop, cfg, rng):
    """One DE/rand/1/bin run. Returns (best member, best loss, generations)."""
    lo, hi = bounds[:, 0], bounds[:, 1]
    p = lo.size
    pop = lo + rng.random((npop, p)) * (hi - lo)
    fit = np.array([obj(v) for v in pop])
    idx = np.arange(npop)
    for gen in range(cfg.max_iter):
        # three distinct partners per member, all different from the member itself
        keys = rng.random((npop, npop))
        keys[idx, idx] = np.inf
        partners = np.argsort(keys, axis=1, kind="stable")[:, :3]
        mutant = pop[partners[:, 0]] + cfg.mutation_rate * (pop[partners[:, 1]] - pop[partners[:, 2]])
        cross = rng.random((npop, p)) < cfg.crossover
        cross[idx, rng.integers(0, p, npop)] = True
        trial = np.clip(np.where(cross, mutant, pop), lo, hi)
        trial_fit = np.array([obj(v) for v in trial])
        better = trial_fit <= fit
        pop[better] = trial[better]
        fit[better] = trial_fit[better]
        if not np.any(np.isfinite(fit)):
            raise NonFinite(f"no finite loss anywhere in the population after generation {gen + 1}")
    best = int(np.argmin(fit))
    return pop[best].copy(), float(fit[best]), cfg.max_iter


def global_fit(spec, d, cfg: Optional[OptimizeConfig] = None, local_cfg: Optional[local.LocalConfig] = None):
    """Fit ``spec`` to ``d`` by differential evolution followed by LM polish.

    Each of ``cfg.restarts`` runs draws from its own generator seeded by
    ``(cfg.seed, restart_index)``, so results do not depend on ``n_jobs``.
    The best polished run wins; ties go to the lowest restart index.
    """
    cfg = cfg or OptimizeConfig()
    local_cfg = local_cfg or local.LocalConfig()
    x, y = local._xy(d)
    p = spec.param_count
    bounds = cfg.resolved_bounds(p)
    npop = cfg.resolved_population(p)
    obj = local._Objective(spec, x, y, bounds)

    def run(i):
        best, best_loss, gens = _evolve(obj, bounds, npop, cfg, restart_rng(cfg.seed, i))
        polished = local.fit(spec, d, best, local_cfg, bounds=bounds)
        return i, best_loss, gens, polished

    workers = min(cfg.workers(), cfg.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, range(cfg.restarts)))
    else:
        runs = [run(i) for i in range(cfg.restarts)]
    runs.sort(key=lambda r: r[0])

    winner = min(runs, key=lambda r: (r[3].loss, r[0]))
    i, _, gens, polished = winner
    return local.FitResult(
        polished.theta_hat,
        polished.loss,
        gens,
        polished.converged,
        "differential_evolution",
        info={
            "restart": i,
            "polish_iterations": polished.iterations,
            "pre_polish_losses": [r[1] for r in runs],
            "restart_losses": [r[3].loss for r in runs],
        },
    )
