"""Binary-coded genetic algorithm: roulette selection, one-point crossover, bit flips.

Each unit's power is a gene of `bits_per_gene` bits decoded onto
[p_min, p_max], so the limit constraint holds by construction; the decoded
vector is balance-repaired before evaluation.  Fitness rescales objectives
into [0, 1] within each generation, the best individual always at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import DispatchProblem, DispatchSolution, HLike, combined_objective_batch, evaluate_dispatch
from .repair import repair_batch


@dataclass(frozen=True)
class GaConfig:
    individuals: int = 10
    generations: int = 500
    p_crossover: float = 0.96
    p_mutation: float = 0.033
    bits_per_gene: int = 16
    elitism: int = 1
    seed: int = 0
    # literal single-site reading of mutation instead of per-bit flips
    single_site_mutation: bool = False

    def __post_init__(self) -> None:
        if self.individuals < 1:
            raise ValueError(f"individuals must be >= 1, got {self.individuals}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        for name in ("p_crossover", "p_mutation"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.bits_per_gene < 4:
            raise ValueError(f"bits_per_gene must be >= 4, got {self.bits_per_gene}")
        if not 0 <= self.elitism < self.individuals:
            raise ValueError(
                f"elitism must lie in [0, individuals), got {self.elitism} of {self.individuals}"
            )


def decode(bits: np.ndarray, problem: DispatchProblem, config: GaConfig) -> np.ndarray:
    """Map a bitstring (or a population of them) onto the unit power ranges.

    Gene i, read MSB first as an unsigned integer u, decodes to
    p_i = p_min + u * (p_max - p_min) / (2^bits - 1), hitting both interval
    endpoints exactly at the all-zero and all-one genes.
    """
    n, width = problem.n_units, config.bits_per_gene
    arr = np.asarray(bits)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.shape[1] != n * width:
        raise ValueError(
            f"bitstring length {arr.shape[1]} does not match {n} units x {width} bits"
        )
    weights = 2.0 ** np.arange(width - 1, -1, -1)
    u = arr.reshape(arr.shape[0], n, width) @ weights
    lo, hi = problem.p_min_arr, problem.p_max_arr
    powers = lo + u * (hi - lo) / (2.0**width - 1.0)
    return powers[0] if single else powers


def fitness_scale(objectives: np.ndarray) -> np.ndarray:
    """(worst - obj) / (worst - best) within a generation; all-equal -> all 1."""
    worst = float(np.max(objectives))
    best = float(np.min(objectives))
    if worst == best:
        return np.ones_like(objectives)
    return (worst - objectives) / (worst - best)


def roulette_select(fitness: np.ndarray, rng: np.random.Generator) -> int:
    """Index drawn with probability fitness / sum(fitness); all-zero -> uniform."""
    total = float(fitness.sum())
    if total <= 0.0:
        return int(rng.integers(len(fitness)))
    wheel = np.cumsum(fitness)
    spin = rng.random() * total
    return int(np.searchsorted(wheel, spin, side="right").clip(max=len(fitness) - 1))


def crossover(
    parent_a: np.ndarray,
    parent_b: np.ndarray,
    rng: np.random.Generator,
    config: GaConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Single-point suffix exchange with probability p_crossover."""
    if parent_a.shape != parent_b.shape:
        raise ValueError(f"parent lengths differ: {parent_a.shape} vs {parent_b.shape}")
    child_a, child_b = parent_a.copy(), parent_b.copy()
    length = child_a.shape[0]
    if length > 1 and rng.random() < config.p_crossover:
        site = int(rng.integers(1, length))
        child_a[site:], child_b[site:] = parent_b[site:].copy(), parent_a[site:].copy()
    return child_a, child_b


def mutate(child: np.ndarray, rng: np.random.Generator, config: GaConfig) -> np.ndarray:
    """Per-bit flips at p_mutation; the single-site variant flips at most one bit."""
    if config.single_site_mutation:
        if rng.random() < config.p_mutation:
            site = int(rng.integers(child.shape[0]))
            child[site] ^= 1
        return child
    mask = rng.random(child.shape[0]) < config.p_mutation
    child[mask] ^= 1
    return child


def run(
    problem: DispatchProblem, config: Optional[GaConfig] = None, h: HLike = None
) -> tuple[DispatchSolution, np.ndarray]:
    """Full GA run; returns the best-ever dispatch and the per-generation best trace."""
    config = config or GaConfig()
    rng = np.random.default_rng(config.seed)
    length = problem.n_units * config.bits_per_gene
    population = rng.integers(0, 2, size=(config.individuals, length), dtype=np.uint8)
    best_powers: Optional[np.ndarray] = None
    best_obj = np.inf
    trace = np.empty(config.generations)
    for generation in range(config.generations):
        powers = repair_batch(problem, decode(population, problem, config))
        objectives = combined_objective_batch(problem, powers, h)
        leader = int(np.argmin(objectives))
        if objectives[leader] < best_obj:
            best_obj = float(objectives[leader])
            best_powers = powers[leader].copy()
        trace[generation] = objectives[leader]
        if generation == config.generations - 1:
            break
        population = _next_generation(population, objectives, rng, config)
    if best_powers is None:  # zero generations: fall back to the raw population
        powers = repair_batch(problem, decode(population, problem, config))
        objectives = combined_objective_batch(problem, powers, h)
        best_powers = powers[int(np.argmin(objectives))]
    return evaluate_dispatch(problem, best_powers, h), trace


def _next_generation(
    population: np.ndarray,
    objectives: np.ndarray,
    rng: np.random.Generator,
    config: GaConfig,
) -> np.ndarray:
    fitness = fitness_scale(objectives)
    order = np.argsort(objectives, kind="stable")
    survivors = [population[i].copy() for i in order[: config.elitism]]
    # the wheel is spun once per population slot, then the pool is shuffled
    # and consumed in sequential pairs
    pool = [roulette_select(fitness, rng) for _ in range(config.individuals)]
    rng.shuffle(pool)
    children: list[np.ndarray] = []
    pair = 0
    while len(survivors) + len(children) < config.individuals:
        a = population[pool[(2 * pair) % len(pool)]]
        b = population[pool[(2 * pair + 1) % len(pool)]]
        pair += 1
        child_a, child_b = crossover(a, b, rng, config)
        children.append(mutate(child_a, rng, config))
        children.append(mutate(child_b, rng, config))
    needed = config.individuals - len(survivors)
    return np.stack(survivors + children[:needed])
