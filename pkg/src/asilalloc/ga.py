"""Penalty-based genetic algorithm for cost-driven decomposition and mapping.

No scheduling: a chromosome fixes schemes and hosts only. Fitness is the
development cost plus a penalty per task that misses its PMHF budget and per
ECU whose memory is exceeded.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .decomposition import DecompositionScheme, enumerate_schemes, filter_compatible
from .instance import AllocationSolution, ProblemInstance, compute_decomposition_set
from .reliability import check_pmhf


@dataclass(frozen=True)
class GaParams:
    population: int = 100
    generations: int = 200
    tournament: int = 3
    crossover: float = 0.9
    mutation: float = 0.1
    penalty: float | None = None  # None: 10 x sum of per-task maximum costs
    seed: int = 0
    elitism: int = 1
    enforce_memory: bool = True
    enforce_localization: bool = True
    strict_pmhf: bool = False

    def __post_init__(self) -> None:
        for name in ("population", "generations", "tournament"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("crossover", "mutation"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} probability must lie in [0, 1]")
        if self.penalty is not None and not self.penalty > 0:
            raise ValueError("penalty must be positive")
        if not 0 <= self.elitism <= self.population:
            raise ValueError("elitism must lie in [0, population]")


@dataclass(frozen=True)
class TaskGene:
    task: str
    scheme: DecompositionScheme
    slots: tuple[tuple[str, int], ...]  # (ecu, level), one per replica


@dataclass(frozen=True)
class GaChromosome:
    genes: tuple[TaskGene, ...]

    def slots(self) -> list[tuple[str, str, int]]:
        """Flattened variable-length view: (task, ecu, level)."""
        return [(g.task, k, h) for g in self.genes for k, h in g.slots]


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float


@dataclass
class GaResult:
    best: GaChromosome
    best_fitness: float
    history: list[GenerationStats] = field(default_factory=list)


class GeneFactory:
    """Structurally valid genes for one instance under one parameter set."""

    def __init__(self, instance: ProblemInstance, params: GaParams):
        self.instance = instance
        self.params = params
        self.tprime = compute_decomposition_set(instance)
        self.hosts: dict[str, list] = {}
        self.library: dict[str, list[DecompositionScheme]] = {}
        for t in instance.tasks:
            hosts = [e for e in instance.ecus if t.can_run_on(e.id) or not params.enforce_localization]
            self.hosts[t.id] = hosts
            if t.id in self.tprime:
                lib = filter_compatible(enumerate_schemes(t.asil), hosts) if hosts else []
            else:
                lib = [DecompositionScheme.trivial(t.asil)] if any(e.asil >= t.asil for e in hosts) else []
            if not lib:
                raise ValueError(f"task {t.id} has no placeable decomposition scheme")
            self.library[t.id] = lib

    def _eligible(self, task: str, level: int, used: set[str]) -> list[str]:
        return [e.id for e in self.hosts[task] if int(e.asil) >= level and e.id not in used]

    def random_gene(self, task: str, rng: random.Random) -> TaskGene:
        lib = self.library[task]
        for _ in range(20 * len(lib)):
            scheme = rng.choice(lib)
            slots, used = [], set()
            for h in scheme.levels():
                options = self._eligible(task, h, used)
                if not options:
                    break
                k = rng.choice(options)
                used.add(k)
                slots.append((k, h))
            else:
                return TaskGene(task, scheme, tuple(slots))
        raise ValueError(f"could not place any scheme of task {task}")

    def repaired(self, task: str, scheme: DecompositionScheme, prefer: Sequence[str]) -> TaskGene | None:
        """Keep preferred hosts where they fit; otherwise take the cheapest unused compatible ECU."""
        t = self.instance.task(task)
        slots, used = [], set()
        prefer = list(prefer)
        for n, h in enumerate(scheme.levels()):
            k = prefer[n] if n < len(prefer) else None
            if k is None or k in used or k not in self._eligible(task, h, used):
                options = self._eligible(task, h, used)
                if not options:
                    return None
                k = min(options, key=lambda e: (t.dev_cost[(e, h)], e))
            used.add(k)
            slots.append((k, h))
        return TaskGene(task, scheme, tuple(slots))

    def mutate(self, gene: TaskGene, rng: random.Random) -> TaskGene:
        lib = self.library[gene.task]
        order = list(lib)
        rng.shuffle(order)
        prefer = [k for k, _ in gene.slots]
        for scheme in order:
            fixed = self.repaired(gene.task, scheme, prefer)
            if fixed is not None:
                return fixed
        return self.random_gene(gene.task, rng)

    def max_cost(self) -> float:
        total = 0.0
        for t in self.instance.tasks:
            worst = max(t.dev_cost.values(), default=0.0)
            total += worst * max(s.replicas for s in self.library[t.id])
        return total


def default_penalty(instance: ProblemInstance, params: GaParams | None = None) -> float:
    return 10.0 * GeneFactory(instance, params or GaParams()).max_cost()


def violations(chromosome: GaChromosome, instance: ProblemInstance, params: GaParams | None = None) -> tuple[int, int]:
    """(tasks missing their PMHF budget, ECUs over memory)."""
    params = params or GaParams()
    tprime = compute_decomposition_set(instance)
    rate = {e.id: e.failure_rate_per_hour for e in instance.ecus}
    pmhf_bad = 0
    usage: dict[str, float] = {}
    for g in chromosome.genes:
        t = instance.task(g.task)
        if g.task in tprime or params.strict_pmhf:
            if not check_pmhf(t.asil, [rate[k] for k, _ in g.slots], instance.lifetime_hours):
                pmhf_bad += 1
        for k, h in g.slots:
            usage[k] = usage.get(k, 0.0) + t.memory_mb_by_asil[h]
    mem_bad = 0
    if params.enforce_memory:
        mem_bad = sum(1 for e in instance.ecus if usage.get(e.id, 0.0) > e.memory_mb)
    return pmhf_bad, mem_bad


def chromosome_cost(chromosome: GaChromosome, instance: ProblemInstance) -> float:
    return sum(instance.task(g.task).dev_cost[(k, h)] for g in chromosome.genes for k, h in g.slots)


def fitness(chromosome: GaChromosome, instance: ProblemInstance, params: GaParams | None = None,
            penalty: float | None = None) -> float:
    params = params or GaParams()
    if penalty is None:
        penalty = params.penalty if params.penalty is not None else (
            default_penalty(instance, params) if instance.tasks else 0.0)
    pmhf_bad, mem_bad = violations(chromosome, instance, params)
    return chromosome_cost(chromosome, instance) + penalty * (pmhf_bad + mem_bad)


def chromosome_from_solution(instance: ProblemInstance, solution: AllocationSolution) -> GaChromosome:
    genes = []
    for t in instance.tasks:
        placed = sorted(((p.ecu, p.asil) for p in solution.placements if p.task == t.id),
                        key=lambda s: (-s[1], s[0]))
        alpha = tuple(sum(1 for _, h in placed if h == lv) for lv in range(1, 5))
        genes.append(TaskGene(t.id, DecompositionScheme(alpha), tuple(placed)))
    return GaChromosome(tuple(genes))


def crossover(a: GaChromosome, b: GaChromosome, rng: random.Random) -> tuple[GaChromosome, GaChromosome]:
    """One-point crossover on task boundaries so replica blocks stay whole."""
    n = len(a.genes)
    if n < 2:
        return a, b
    cut = rng.randint(1, n - 1)
    return (GaChromosome(a.genes[:cut] + b.genes[cut:]), GaChromosome(b.genes[:cut] + a.genes[cut:]))


def evolve(instance: ProblemInstance, params: GaParams | None = None,
           initial: Iterable[GaChromosome] = ()) -> GaResult:
    params = params or GaParams()
    rng = random.Random(params.seed)
    if not instance.tasks:
        empty = GaChromosome(())
        return GaResult(empty, 0.0, [GenerationStats(g, 0.0, 0.0) for g in range(params.generations + 1)])
    factory = GeneFactory(instance, params)
    penalty = params.penalty if params.penalty is not None else 10.0 * factory.max_cost()
    cache: dict[GaChromosome, float] = {}

    def score(c: GaChromosome) -> float:
        if c not in cache:
            cache[c] = fitness(c, instance, params, penalty)
        return cache[c]

    population = list(initial)[: params.population]
    while len(population) < params.population:
        population.append(GaChromosome(tuple(factory.random_gene(t.id, rng) for t in instance.tasks)))

    def pick() -> GaChromosome:
        contenders = [rng.randrange(len(population)) for _ in range(params.tournament)]
        return population[min(contenders, key=lambda i: (score(population[i]), i))]

    def stats(gen: int) -> GenerationStats:
        scores = [score(c) for c in population]
        return GenerationStats(gen, min(scores), sum(scores) / len(scores))

    best = min(population, key=score)
    history = [stats(0)]
    for gen in range(1, params.generations + 1):
        ranked = sorted(range(len(population)), key=lambda i: (score(population[i]), i))
        nxt = [population[i] for i in ranked[: params.elitism]]
        while len(nxt) < params.population:
            a, b = pick(), pick()
            if rng.random() < params.crossover:
                a, b = crossover(a, b, rng)
            for child in (a, b):
                genes = tuple(factory.mutate(g, rng) if rng.random() < params.mutation else g for g in child.genes)
                nxt.append(GaChromosome(genes))
        population = nxt[: params.population]
        gen_best = min(population, key=score)
        if score(gen_best) < score(best):
            best = gen_best
        history.append(stats(gen))
    return GaResult(best, score(best), history)


def write_history(history: Sequence[GenerationStats], out: TextIO | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_history(history, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["generation", "best", "mean"])
    for s in history:
        w.writerow([s.generation, f"{s.best:.6g}", f"{s.mean:.6g}"])
