"""
Genetic placement search.
Individuals are integer arrays holding the execution worker of every step
followed by the storage worker of every producer.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..cost.compiled import CompiledProblem
from ..errors import Infeasible
from .base import SolveRequest, SolveResult, SolveStatus, Stopwatch, result_for
from .heuristics import balanced_assignment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneticParams:
    """
    Genetic algorithm settings.

    Attributes:
        population_size: Individuals per generation
        generations: Number of generations after the initial population
        elite_count: Best individuals copied unchanged into the next generation
        mutation_share: Share of the population, taken from the worst end, exposed to mutation
        mutation_probability: Chance that an exposed individual is mutated
        tournament_size: Contestants per parent selection
    """
    population_size: int = 200
    generations: int = 20
    elite_count: int = 5
    mutation_share: float = 0.25
    mutation_probability: float = 0.5
    tournament_size: int = 2

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if not 0.0 <= self.mutation_share <= 1.0 or not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError("mutation share and probability must be within [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


def fitness(problem: CompiledProblem, population: np.ndarray) -> np.ndarray:
    """
    Inverse of the maximum path cost per individual; 0 for individuals that
    overload a worker.
    """
    code = population[:, :problem.n_steps]
    data = population[:, problem.n_steps:]
    worst, _, _ = problem.evaluate(code, data, penalized=False)
    values = 1.0 / np.maximum(worst, 1e-12)
    return np.where(problem.capacity_ok(code), values, 0.0)


class GeneticSearch:
    """State of one genetic algorithm run"""

    def __init__(self, problem: CompiledProblem, params: GeneticParams, rng: np.random.Generator):
        self.problem = problem
        self.params = params
        self.rng = rng
        self.genes = problem.n_steps + problem.n_producers
        self.evaluated = 0

    def individual(self, code: np.ndarray, data: np.ndarray) -> np.ndarray:
        return np.concatenate([np.asarray(code, dtype=int), np.asarray(data, dtype=int)])

    def random_individual(self) -> np.ndarray:
        """Balanced code assignment with step outputs kept by their code worker"""
        problem = self.problem
        try:
            code = balanced_assignment(self.rng, problem.n_steps, problem.capacity)
        except Infeasible:
            # uneven capacities: draw from the free slots instead
            slots = np.repeat(np.arange(problem.n_workers), problem.capacity)
            code = self.rng.permutation(slots)[:problem.n_steps]
        data = problem.default_data(code)
        # raw sources start next to a random consumer
        for p in range(problem.n_producers):
            if problem.producer_step[p] < 0 and problem.consumers[p]:
                data[p] = code[problem.consumers[p][self.rng.integers(len(problem.consumers[p]))]]
        return self.individual(code, data)

    def initial_population(self, seed_individual: Optional[np.ndarray]) -> np.ndarray:
        rows = [] if seed_individual is None else [seed_individual]
        while len(rows) < self.params.population_size:
            rows.append(self.random_individual())
        return np.vstack(rows)

    def evaluate(self, population: np.ndarray) -> np.ndarray:
        self.evaluated += len(population)
        return fitness(self.problem, population)

    def rank(self, population: np.ndarray, scores: np.ndarray):
        order = np.argsort(-scores, kind="stable")
        return population[order], scores[order]

    def select_parents(self, count: int) -> np.ndarray:
        """Tournament selection over a ranked population: the best ranked contestant wins"""
        contestants = self.rng.integers(0, self.params.population_size, size=(count, self.params.tournament_size))
        return contestants.min(axis=1)

    def crossover(self, population: np.ndarray, count: int) -> np.ndarray:
        """Uniform crossover: every gene comes from either parent with probability 0.5"""
        first = population[self.select_parents(count)]
        second = population[self.select_parents(count)]
        mask = self.rng.random((count, self.genes)) < 0.5
        return np.where(mask, first, second)

    def mutate(self, population: np.ndarray) -> np.ndarray:
        """Expose the worst ranked share of the population; each mutates one gene with the configured chance"""
        exposed = int(round(len(population) * self.params.mutation_share))
        if exposed == 0:
            return population
        population = population.copy()
        rows = np.arange(len(population) - exposed, len(population))
        hit = rows[self.rng.random(exposed) < self.params.mutation_probability]
        genes = self.rng.integers(0, self.genes, size=len(hit))
        workers = self.rng.integers(0, self.problem.n_workers, size=len(hit))
        population[hit, genes] = workers
        return population

    def generation(self, population: np.ndarray):
        elites = population[:self.params.elite_count]
        children = self.crossover(population, self.params.population_size - len(elites))
        merged = np.vstack([elites, children])
        population, _ = self.rank(merged, self.evaluate(merged))
        population = self.mutate(population)
        return self.rank(population, self.evaluate(population))


def solve_ga(req: SolveRequest, params: Optional[GeneticParams] = None) -> SolveResult:
    """
    Genetic algorithm placement, reproducible from the request seed.

    The previous placement, when given, joins the initial population.
    Fitness ignores the device change penalty.

    Raises:
        Infeasible: If no individual respecting capacities was ever found
    """
    params = params or GeneticParams()
    watch = Stopwatch()
    req.check_capacity()
    problem = req.compile()
    search = GeneticSearch(problem, params, np.random.default_rng(req.seed))

    seed_individual = None
    if req.previous is not None:
        try:
            seed_individual = search.individual(*problem.from_placement(req.previous))
        except KeyError:
            logger.debug("Previous placement does not match the problem, not seeding the population")

    population = search.initial_population(seed_individual)
    population, scores = search.rank(population, search.evaluate(population))
    trace = [float(scores[0])]
    first_feasible_ms = watch.elapsed_ms() if scores[0] > 0 else None
    for gen in range(params.generations):
        population, scores = search.generation(population)
        trace.append(float(scores[0]))
        if first_feasible_ms is None and scores[0] > 0:
            first_feasible_ms = watch.elapsed_ms()
        logger.debug("GA generation %d best fitness %.6g", gen + 1, scores[0])

    if scores[0] <= 0:
        raise Infeasible("Genetic search found no placement respecting worker capacities")
    best = population[0]
    return result_for(problem, best[:problem.n_steps], best[problem.n_steps:], SolveStatus.FEASIBLE, watch,
                      first_feasible_ms=first_feasible_ms, nodes=search.evaluated, trace=tuple(trace))
