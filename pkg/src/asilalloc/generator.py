"""Seeded random instances for scaling runs and cross-checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .instance import Asil, DependencyEdge, Ecu, ProblemInstance, Task

# Table 3 values, cycled over the generated ECUs
FAILURE_RATES = (1e-6, 2e-6, 3e-6, 8e-7)
ECU_MEMORY_MB = (8 * 1024, 8 * 1024, 2 * 1024, 16 * 1024)

#: scenario -> (task ASIL pool, ECU ASILs cycled)
SCENARIOS: dict[str, tuple[tuple[Asil, ...], tuple[Asil, ...]]] = {
    "d-on-c": ((Asil.D,), (Asil.C, Asil.B, Asil.B, Asil.C)),
    "c-on-b": ((Asil.C,), (Asil.B,)),
    "no-decomp": ((Asil.C, Asil.B), (Asil.C, Asil.B, Asil.B, Asil.C)),
}


@dataclass(frozen=True)
class GeneratorConfig:
    scenario: str = "no-decomp"
    # explicit pools override the scenario; task ASILs are drawn uniformly, ECU ASILs cycled
    task_asils: tuple[Asil, ...] | None = None
    ecu_asils: tuple[Asil, ...] | None = None
    edge_probability: float = 0.9
    wcet_range: tuple[int, int] = (1, 20)
    wcet_step: int = 2
    wcrt_range: tuple[int, int] = (1, 15)
    binding_memory: bool = False
    localization_probability: float = 1.0
    decompose_all: bool = False
    application: str = "A1"
    failure_rates: tuple[float, ...] = field(default=FAILURE_RATES)

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if not 0.0 <= self.edge_probability <= 1.0:
            raise ValueError("edge probability must lie in [0, 1]")
        if not 0.0 < self.localization_probability <= 1.0:
            raise ValueError("localization probability must lie in (0, 1]")

    def pools(self) -> tuple[tuple[Asil, ...], tuple[Asil, ...]]:
        tasks, ecus = SCENARIOS[self.scenario]
        return self.task_asils or tasks, self.ecu_asils or ecus


def _cost_ladder(rng: random.Random) -> dict[int, int]:
    a = rng.randint(1, 10)
    b = a + rng.randint(1, 5)
    c = b + rng.randint(1, 5)
    d = max(c, 2 * b) + rng.randint(1, 5)
    return {1: a, 2: b, 3: c, 4: d}


def generate(n_tasks: int, n_ecus: int, seed: int, config: GeneratorConfig | None = None) -> ProblemInstance:
    if n_tasks < 1 or n_ecus < 1:
        raise ValueError("need at least one task and one ECU")
    cfg = config or GeneratorConfig()
    rng = random.Random(seed)
    task_pool, ecu_pool = cfg.pools()

    ecus = []
    for k in range(n_ecus):
        mem = ECU_MEMORY_MB[k % len(ECU_MEMORY_MB)]
        if cfg.binding_memory:
            mem //= 8
        ecus.append(Ecu(f"E{k + 1}", ecu_pool[k % len(ecu_pool)], mem,
                        cfg.failure_rates[k % len(cfg.failure_rates)]))

    tasks = []
    for i in range(n_tasks):
        tid = f"T{i + 1}"
        asil = rng.choice(task_pool)
        if cfg.binding_memory:
            base = rng.randint(128, 768)
            memory = {h: base + 64 * (h - 1) for h in range(1, 5)}
        else:
            memory = {h: 16 * h for h in range(1, 5)}
        wcet, cost, loc = {}, {}, {}
        for e in ecus:
            w = rng.randint(*cfg.wcet_range)
            ladder = _cost_ladder(rng)
            for h in range(1, 5):
                wcet[(e.id, h)] = float(w + cfg.wcet_step * (h - 1))
                cost[(e.id, h)] = float(ladder[h])
            loc[e.id] = 1 if rng.random() < cfg.localization_probability else 0
        if not any(loc.values()):
            loc[rng.choice(ecus).id] = 1
        tasks.append(Task(tid, asil, cfg.application, memory, wcet, cost, loc))

    order = list(range(n_tasks))
    rng.shuffle(order)
    edges = []
    for a in range(n_tasks):
        for b in range(a + 1, n_tasks):
            if rng.random() < cfg.edge_probability:
                edges.append(DependencyEdge(f"T{order[a] + 1}", f"T{order[b] + 1}", float(rng.randint(*cfg.wcrt_range))))

    return ProblemInstance(tuple(ecus), tuple(tasks), tuple(edges), (cfg.application,),
                           decompose_all=cfg.decompose_all,
                           name=f"gen-{cfg.scenario}-n{n_tasks}-m{n_ecus}-s{seed}")


def edge_density(instance: ProblemInstance) -> float:
    n = len(instance.tasks)
    pairs = n * (n - 1) // 2
    return len(instance.edges) / pairs if pairs else 0.0
