from __future__ import annotations

import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asilalloc.generator import SCENARIOS, GeneratorConfig, edge_density, generate
from asilalloc.instance import Asil, dumps_instance, errors_only, validate_instance


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 12), m=st.integers(1, 6), seed=st.integers(0, 2**31),
       scenario=st.sampled_from(sorted(SCENARIOS)), binding=st.booleans(),
       loc=st.sampled_from([1.0, 0.5]))
def test_generated_instances_validate(n, m, seed, scenario, binding, loc):
    cfg = GeneratorConfig(scenario=scenario, binding_memory=binding, localization_probability=loc)
    inst = generate(n, m, seed, cfg)
    assert len(inst.tasks) == n and len(inst.ecus) == m
    assert errors_only(validate_instance(inst)) == []
    tasks, ecus = SCENARIOS[scenario]
    assert {t.asil for t in inst.tasks} <= set(tasks)
    assert {e.asil for e in inst.ecus} <= set(ecus)
    for t in inst.tasks:
        for e in inst.ecus:
            costs = [t.dev_cost[(e.id, h)] for h in range(1, 5)]
            assert costs[3] > costs[2] > costs[1] > costs[0] > 0
            assert costs[3] > 2 * costs[1]
            assert all(t.wcet_ms[(e.id, h)] <= t.wcet_ms[(e.id, h + 1)] for h in range(1, 4))


def test_mean_edge_density():
    dens = [edge_density(generate(8, 4, s)) for s in range(1000)]
    assert statistics.mean(dens) == pytest.approx(0.9, abs=0.02)


def test_single_task_has_no_edges():
    assert generate(1, 3, 0).edges == ()
    assert edge_density(generate(1, 3, 0)) == 0.0


def test_same_seed_same_bytes():
    cfg = GeneratorConfig(scenario="d-on-c", binding_memory=True)
    assert dumps_instance(generate(7, 4, 42, cfg)) == dumps_instance(generate(7, 4, 42, cfg))
    assert dumps_instance(generate(7, 4, 42, cfg)) != dumps_instance(generate(7, 4, 43, cfg))


def test_scenarios():
    d = generate(6, 4, 1, GeneratorConfig(scenario="d-on-c"))
    assert all(t.asil is Asil.D for t in d.tasks)
    assert [e.asil for e in d.ecus] == [Asil.C, Asil.B, Asil.B, Asil.C]
    c = generate(6, 3, 1, GeneratorConfig(scenario="c-on-b"))
    assert all(t.asil is Asil.C for t in c.tasks) and all(e.asil is Asil.B for e in c.ecus)


@pytest.mark.parametrize("kw", [{"scenario": "nope"}, {"edge_probability": 1.5},
                                {"localization_probability": 0.0}])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        GeneratorConfig(**kw)


def test_needs_a_task():
    with pytest.raises(ValueError):
        generate(0, 2, 0)
