from __future__ import annotations

import io
import random

import pytest

from asilalloc.decomposition import DecompositionScheme
from asilalloc.ga import (
    GaChromosome,
    GaParams,
    GeneFactory,
    TaskGene,
    chromosome_from_solution,
    crossover,
    default_penalty,
    evolve,
    fitness,
    violations,
    write_history,
)
from asilalloc.generator import GeneratorConfig, generate
from asilalloc.instance import load_case_study

from builders import ecu, instance, task

SMALL = GaParams(population=30, generations=30)


def test_optimum_chromosome_scores_its_cost(case_study, cost_report):
    best = chromosome_from_solution(case_study, cost_report.solution)
    assert violations(best, case_study) == (0, 0)
    assert fitness(best, case_study) == 98


def test_pmhf_violation_adds_one_penalty(case_study, cost_report):
    best = chromosome_from_solution(case_study, cost_report.solution)
    # T1 as D(B)+D(B) on E1 and E3 breaks the ASIL D budget
    bad_gene = TaskGene("T1", DecompositionScheme((0, 2, 0, 0)), (("E1", 2), ("E3", 2)))
    genes = (bad_gene,) + best.genes[1:]
    bad = GaChromosome(genes)
    no_mem = GaParams(enforce_memory=False)
    assert violations(bad, case_study, no_mem) == (1, 0)
    cost = sum(case_study.task(g.task).dev_cost[s] for g in genes for s in g.slots)
    assert fitness(bad, case_study, no_mem, penalty=1000.0) == pytest.approx(cost + 1000.0)


def test_memory_violation_counts_per_ecu():
    es = [ecu("E1", "B", memory=15)]
    inst = instance(es, [task("T1", "B", es), task("T2", "B", es)])
    trivial = DecompositionScheme.trivial(inst.task("T1").asil)
    chrom = GaChromosome((TaskGene("T1", trivial, (("E1", 2),)), TaskGene("T2", trivial, (("E1", 2),))))
    assert violations(chrom, inst) == (0, 1)
    assert violations(chrom, inst, GaParams(enforce_memory=False)) == (0, 0)


def test_empty_instance():
    res = evolve(instance([ecu("E1")], []), GaParams(generations=3))
    assert res.best_fitness == 0 and len(res.history) == 4


def test_deterministic_and_monotone_best():
    inst = generate(5, 4, 2, GeneratorConfig(scenario="d-on-c"))
    a, b = evolve(inst, SMALL), evolve(inst, SMALL)
    assert a.best == b.best and a.history == b.history
    best = [s.best for s in a.history]
    assert all(y <= x for x, y in zip(best, best[1:]))
    assert a.best_fitness == min(best)


def test_seeded_with_optimum_stays_there(case_study, cost_report):
    best = chromosome_from_solution(case_study, cost_report.solution)
    res = evolve(case_study, GaParams(population=20, generations=10), initial=[best] * 20)
    assert res.best_fitness == 98
    assert all(s.best == 98 for s in res.history)


def test_one_task_converges_immediately():
    es = [ecu("E1", "B"), ecu("E2", "B")]
    inst = instance(es, [task("T1", "B", es, cost={"E1": 1, "E2": 3})])
    res = evolve(inst, GaParams(population=20, generations=5))
    assert res.history[0].best == 2.0 and res.best_fitness == 2.0


def test_operators_keep_structure(case_study):
    params = GaParams()
    factory = GeneFactory(case_study, params)
    rng = random.Random(7)
    pop = [GaChromosome(tuple(factory.random_gene(t.id, rng) for t in case_study.tasks)) for _ in range(40)]
    for _ in range(200):
        a, b = crossover(rng.choice(pop), rng.choice(pop), rng)
        for child in (a, b, GaChromosome(tuple(factory.mutate(g, rng) for g in a.genes))):
            assert [g.task for g in child.genes] == case_study.task_ids
            for g in child.genes:
                hosts = [k for k, _ in g.slots]
                assert len(hosts) == len(set(hosts)) == g.scheme.replicas
                assert sorted(h for _, h in g.slots) == sorted(g.scheme.levels())
                assert g.scheme in factory.library[g.task]
                assert all(h <= int(case_study.ecu(k).asil) for k, h in g.slots)


def test_default_penalty_scale(case_study):
    assert default_penalty(case_study) == 5120


@pytest.mark.parametrize("kw", [{"population": 0}, {"mutation": 1.5}, {"crossover": -0.1},
                                {"penalty": 0.0}, {"elitism": 200}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        GaParams(**kw)


def test_history_csv(tmp_path):
    res = evolve(load_case_study(), GaParams(population=10, generations=3))
    buf = io.StringIO()
    write_history(res.history, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "generation,best,mean" and len(lines) == 5
    write_history(res.history, tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text() == buf.getvalue()
