"""
Elitist non-dominated sorting GA over binary site-selection chromosomes.

All objectives are minimized. The loop keeps a single seeded RNG on the
coordinator; worker processes only evaluate chromosomes, so a run is
reproducible for a given seed regardless of the worker count.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from Common.errors import ConfigError, InvalidInputError
from Objectives.fitness import NormalizationBounds, ObjectiveScores
from Optimizer import chromosome as chromo

logger = logging.getLogger(__name__)

MODE_NSGA2 = "nsga2"
MODE_WEIGHTED = "weighted"


class Evaluator(Protocol):
    forced_mask: np.ndarray

    def evaluate_genes(self, genes: np.ndarray) -> ObjectiveScores: ...

    def dominance_vector(self, scores: ObjectiveScores, pareto_weight_a: float, mode: str) -> np.ndarray: ...

    def dominance_labels(self, mode: str) -> tuple[str, ...]: ...


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1 / N
    tournament_size: int = 2
    rng_seed: int = 0
    n_max: int | None = None
    pareto_weight_a: float = 0.1
    mode: str = MODE_NSGA2
    stagnation_generations: int = 0

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ConfigError("must be even and >= 4", "ga.population_size")
        if self.generations < 0:
            raise ConfigError("must be >= 0", "ga.generations")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("must lie in [0, 1]", "ga.crossover_rate")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("must lie in [0, 1]", "ga.mutation_rate")
        if self.tournament_size < 1:
            raise ConfigError("must be >= 1", "ga.tournament_size")
        if self.n_max is not None and self.n_max < 0:
            raise ConfigError("must be >= 0", "ga.n_max")
        if not 0.0 <= self.pareto_weight_a <= 1.0:
            raise ConfigError("must lie in [0, 1]", "ga.pareto_weight_a")
        if self.mode not in (MODE_NSGA2, MODE_WEIGHTED):
            raise ConfigError(f"unknown mode {self.mode!r}", "ga.mode")
        if self.stagnation_generations < 0:
            raise ConfigError("must be >= 0", "ga.stagnation_generations")

    def per_bit_rate(self, n_sites: int) -> float:
        if self.mutation_rate is not None:
            return self.mutation_rate
        return 1.0 / n_sites if n_sites else 0.0


@dataclass
class Individual:
    chromosome: chromo.Chromosome
    scores: ObjectiveScores
    objectives: np.ndarray
    rank: int = 0
    crowding: float = 0.0


@dataclass
class ParetoFront:
    members: list[Individual]
    seed: int
    config_hash: str = ""
    bounds: NormalizationBounds = field(default_factory=NormalizationBounds)
    generations_run: int = 0
    history: list[dict] = field(default_factory=list)
    objective_labels: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.members)


def dominates(a, b) -> bool:
    """Pareto dominance for minimization."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(objectives: np.ndarray) -> np.ndarray:
    """``out[i, j]`` is True when row i dominates row j."""
    objectives = np.asarray(objectives, dtype=float)
    le = np.all(objectives[:, None, :] <= objectives[None, :, :], axis=-1)
    lt = np.any(objectives[:, None, :] < objectives[None, :, :], axis=-1)
    return le & lt


def non_dominated_sort(objectives) -> list[list[int]]:
    """
    Partition row indices into successive non-dominated fronts.

    :param objectives: shape (n, m), minimized.
    :return: fronts as ascending index lists, front 0 first.
    """
    objectives = np.atleast_2d(np.asarray(objectives, dtype=float))
    n = objectives.shape[0]
    if n == 0:
        raise InvalidInputError("cannot sort an empty population")

    dom = dominance_matrix(objectives)
    domination_count = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(domination_count == 0)
    while current.size:
        fronts.append(current.tolist())
        domination_count = domination_count - dom[current].sum(axis=0)
        domination_count[current] = -1
        current = np.flatnonzero(domination_count == 0)
    return fronts


def crowding_distance(front_objectives) -> np.ndarray:
    """
    Crowding distance of each member of one front.

    Boundary members per objective are infinite; interior members sum the
    neighbour gaps divided by that objective's spread.
    """
    values = np.atleast_2d(np.asarray(front_objectives, dtype=float))
    size, n_obj = values.shape
    distance = np.zeros(size)
    if size <= 2:
        distance[:] = np.inf
        return distance

    for m in range(n_obj):
        order = np.argsort(values[:, m], kind="stable")
        column = values[order, m]
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        spread = column[-1] - column[0]
        if spread == 0:
            continue
        distance[order[1:-1]] += (column[2:] - column[:-2]) / spread
    return distance


def tournament_select(ranks, crowding, rng: np.random.Generator, tournament_size: int = 2) -> int:
    """Index of the winner: lower rank, then larger crowding, then lower index."""
    ranks = np.asarray(ranks)
    crowding = np.asarray(crowding, dtype=float)
    contenders = rng.integers(0, ranks.size, size=tournament_size)
    return int(min(contenders, key=lambda i: (ranks[i], -crowding[i], i)))


def assign_rank_and_crowding(population: list[Individual]) -> list[list[int]]:
    objectives = np.stack([ind.objectives for ind in population])
    fronts = non_dominated_sort(objectives)
    for rank, front in enumerate(fronts):
        distances = crowding_distance(objectives[front])
        for idx, d in zip(front, distances):
            population[idx].rank = rank
            population[idx].crowding = float(d)
    return fronts


def environmental_selection(combined: list[Individual], size: int) -> list[Individual]:
    """Truncate parents + offspring to ``size`` by (rank, crowding)."""
    fronts = assign_rank_and_crowding(combined)
    survivors: list[Individual] = []
    for front in fronts:
        if len(survivors) + len(front) <= size:
            survivors.extend(combined[i] for i in front)
            continue
        remaining = size - len(survivors)
        by_crowding = sorted(front, key=lambda i: (-combined[i].crowding, i))
        survivors.extend(combined[i] for i in by_crowding[:remaining])
        break
    return survivors


_worker_evaluator = None


def _init_worker(evaluator) -> None:
    global _worker_evaluator
    _worker_evaluator = evaluator


def _evaluate_in_worker(genes: np.ndarray) -> ObjectiveScores:
    return _worker_evaluator.evaluate_genes(genes)


class _ScoreCache:
    """Evaluates each distinct gene vector once and feeds the running bounds."""

    def __init__(self, evaluator: Evaluator, pool=None):
        self.evaluator = evaluator
        self.pool = pool
        self.bounds = NormalizationBounds()
        self.scores: dict[bytes, ObjectiveScores] = {}
        self.hits = 0

    def lookup(self, chromosomes: list[chromo.Chromosome]) -> list[ObjectiveScores]:
        pending: dict[bytes, np.ndarray] = {}
        for c in chromosomes:
            key = c.key()
            if key in self.scores:
                self.hits += 1
            elif key not in pending:
                pending[key] = c.genes
        if pending:
            genes = list(pending.values())
            if self.pool is not None:
                results = self.pool.map(_evaluate_in_worker, genes)
            else:
                results = [self.evaluator.evaluate_genes(g) for g in genes]
            for key, scores in zip(pending, results):
                self.scores[key] = scores
                self.bounds.update(scores.raw())
        return [self.scores[c.key()] for c in chromosomes]


def _front_signature(population: list[Individual]) -> frozenset:
    return frozenset(tuple(ind.objectives.tolist()) for ind in population if ind.rank == 0)


def _progress_record(generation: int, population: list[Individual]) -> dict:
    front = [ind.objectives for ind in population if ind.rank == 0]
    stacked = np.stack(front)
    return {
        "gen": generation,
        "front_size": len(front),
        "best": stacked.min(axis=0).tolist(),
        "front": sorted(set(tuple(v.tolist()) for v in front)),
    }


def _final_front(population: list[Individual]) -> list[Individual]:
    seen = set()
    members = []
    for ind in population:
        if ind.rank != 0:
            continue
        key = ind.chromosome.key()
        if key in seen:
            continue
        seen.add(key)
        members.append(ind)
    members.sort(key=lambda ind: (tuple(ind.objectives.tolist()), ind.chromosome.popcount, ind.chromosome.key()))
    return members


def evolve(evaluator: Evaluator, config: GaConfig, progress_callback: Callable[[dict], None] | None = None,
           workers: int = 1, config_hash: str = "") -> ParetoFront:
    """
    Run the elitist GA and return the final rank-0 front.

    :param evaluator: Maps gene vectors to ObjectiveScores and dominance vectors.
    :param progress_callback: Receives one record per generation, generation 0 being the initial population.
    :param workers: Evaluation processes; 1 evaluates in-process.
    """
    forced_mask = np.asarray(evaluator.forced_mask, dtype=bool)
    chromo.check_cap(forced_mask, config.n_max)
    n_sites = forced_mask.size
    mutation_rate = config.per_bit_rate(n_sites)
    rng = np.random.default_rng(config.rng_seed)

    pool = None
    if workers > 1:
        pool = multiprocessing.Pool(workers, initializer=_init_worker, initargs=(evaluator,))
    cache = _ScoreCache(evaluator, pool)

    def build(chromosomes: list[chromo.Chromosome]) -> list[Individual]:
        scores = cache.lookup(chromosomes)
        return [Individual(c, s, evaluator.dominance_vector(s, config.pareto_weight_a, config.mode))
                for c, s in zip(chromosomes, scores)]

    history: list[dict] = []

    def report(generation: int, population: list[Individual]) -> None:
        record = _progress_record(generation, population)
        history.append({k: v for k, v in record.items() if k != "front"})
        if progress_callback is not None:
            progress_callback(record)
        logger.debug("gen %d: front %d, best %s, cache hits %d",
                     generation, record["front_size"], record["best"], cache.hits)

    logger.info("evolving %d sites, population %d, %d generations, seed %d",
                n_sites, config.population_size, config.generations, config.rng_seed)
    try:
        population = build(chromo.init_population(config.population_size, forced_mask, config.n_max, rng))
        assign_rank_and_crowding(population)
        report(0, population)

        signature = _front_signature(population)
        unchanged = 0
        generation = 0
        for generation in range(1, config.generations + 1):
            ranks = [ind.rank for ind in population]
            crowding = [ind.crowding for ind in population]
            offspring: list[chromo.Chromosome] = []
            while len(offspring) < config.population_size:
                p1 = population[tournament_select(ranks, crowding, rng, config.tournament_size)]
                p2 = population[tournament_select(ranks, crowding, rng, config.tournament_size)]
                c1, c2 = chromo.crossover(p1.chromosome, p2.chromosome, config.crossover_rate, rng)
                offspring.append(chromo.mutate(c1, mutation_rate, rng, config.n_max))
                offspring.append(chromo.mutate(c2, mutation_rate, rng, config.n_max))

            population = environmental_selection(population + build(offspring), config.population_size)
            report(generation, population)

            current = _front_signature(population)
            unchanged = unchanged + 1 if current == signature else 0
            signature = current
            if config.stagnation_generations and unchanged >= config.stagnation_generations:
                logger.info("front unchanged for %d generations, stopping at generation %d",
                            unchanged, generation)
                break
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    bounds = cache.bounds.freeze()
    members = _final_front(population)
    for ind in members:
        ind.scores.normalized = bounds.normalize(ind.scores.raw())
    logger.info("front of %d members after %d generations (%d evaluations)",
                len(members), generation, len(cache.scores))
    return ParetoFront(members, config.rng_seed, config_hash, bounds, generation, history,
                       tuple(evaluator.dominance_labels(config.mode)))
