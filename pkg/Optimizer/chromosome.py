"""
Binary site-selection chromosomes and the variation operators acting on them.

A chromosome carries one bit per candidate site plus the mask of deployed
sites that must stay selected. Every operator re-asserts that mask.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from Common.errors import ConfigError, InvalidInputError

logger = logging.getLogger(__name__)


@dataclass
class Chromosome:
    genes: np.ndarray
    forced_mask: np.ndarray

    def __post_init__(self):
        self.genes = np.asarray(self.genes, dtype=bool).copy()
        self.forced_mask = np.asarray(self.forced_mask, dtype=bool)
        if self.genes.ndim != 1 or self.genes.shape != self.forced_mask.shape:
            raise InvalidInputError("genes and forced_mask must be 1-D bit vectors of equal length")
        self.genes |= self.forced_mask

    def __len__(self) -> int:
        return self.genes.size

    @property
    def popcount(self) -> int:
        return int(self.genes.sum())

    def selected_indices(self) -> np.ndarray:
        return np.flatnonzero(self.genes)

    def key(self) -> bytes:
        """Hashable identity of the gene vector."""
        return np.packbits(self.genes).tobytes() + self.genes.size.to_bytes(4, "little")

    def copy(self) -> "Chromosome":
        return Chromosome(self.genes.copy(), self.forced_mask)


def check_cap(forced_mask: np.ndarray, n_max: int | None) -> None:
    forced = int(np.asarray(forced_mask, dtype=bool).sum())
    if n_max is not None and n_max < forced:
        raise ConfigError(f"n_max {n_max} is below the {forced} forced sites", "ga.n_max")


def repair(genes: np.ndarray, forced_mask: np.ndarray, n_max: int | None, rng: np.random.Generator) -> np.ndarray:
    """Drop random non-forced 1-bits until at most ``n_max`` remain."""
    genes = genes | forced_mask
    if n_max is None:
        return genes
    excess = int(genes.sum()) - n_max
    if excess <= 0:
        return genes
    removable = np.flatnonzero(genes & ~forced_mask)
    if excess > removable.size:
        raise ConfigError(f"n_max {n_max} is below the forced site count", "ga.n_max")
    drop = rng.choice(removable, size=excess, replace=False)
    genes = genes.copy()
    genes[drop] = False
    return genes


def init_population(size: int, forced_mask: np.ndarray, n_max: int | None,
                    rng: np.random.Generator) -> list[Chromosome]:
    """
    Random population whose popcounts are spread uniformly over
    [forced count, min(n_max, N)].
    """
    forced_mask = np.asarray(forced_mask, dtype=bool)
    check_cap(forced_mask, n_max)
    n_sites = forced_mask.size
    forced_count = int(forced_mask.sum())
    free = np.flatnonzero(~forced_mask)
    upper = n_sites if n_max is None else min(n_max, n_sites)

    population = []
    for _ in range(size):
        count = int(rng.integers(forced_count, upper + 1))
        genes = forced_mask.copy()
        extra = count - forced_count
        if extra > 0:
            genes[rng.choice(free, size=extra, replace=False)] = True
        population.append(Chromosome(genes, forced_mask))
    return population


def crossover(p1: Chromosome, p2: Chromosome, rate: float,
              rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    """Uniform crossover with probability ``rate``; otherwise the parents are cloned."""
    if len(p1) != len(p2):
        raise InvalidInputError("parents differ in length")
    if not np.array_equal(p1.forced_mask, p2.forced_mask):
        raise InvalidInputError("parents carry different forced masks")
    if not 0.0 <= rate <= 1.0:
        raise InvalidInputError("crossover rate must lie in [0, 1]")

    if rng.random() >= rate:
        return p1.copy(), p2.copy()

    take_first = rng.random(len(p1)) < 0.5
    c1 = np.where(take_first, p1.genes, p2.genes)
    c2 = np.where(take_first, p2.genes, p1.genes)
    return Chromosome(c1, p1.forced_mask), Chromosome(c2, p1.forced_mask)


def mutate(c: Chromosome, per_bit_rate: float, rng: np.random.Generator,
           n_max: int | None = None) -> Chromosome:
    """Independent bit flips on the non-forced sites, then the n_max repair."""
    if not 0.0 <= per_bit_rate <= 1.0:
        raise InvalidInputError("mutation rate must lie in [0, 1]")
    flips = (rng.random(len(c)) < per_bit_rate) & ~c.forced_mask
    genes = c.genes ^ flips
    genes = repair(genes, c.forced_mask, n_max, rng)
    return Chromosome(genes, c.forced_mask)
