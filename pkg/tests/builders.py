"""Small hand-made instances shared by the tests."""

from __future__ import annotations

from asilalloc.instance import Asil, DependencyEdge, Ecu, ProblemInstance, Task


def ecu(eid: str, asil: str = "D", memory: int = 1024, rate: float = 1e-6) -> Ecu:
    return Ecu(eid, Asil.parse(asil), memory, rate)


def task(tid: str, asil: str, ecus: list[Ecu], wcet: float | dict = 5.0, cost: float | dict = 1.0,
         memory: int = 10, loc: dict | None = None, app: str = "A1") -> Task:
    """Uniform per-level tables unless dicts keyed by ECU id are given."""
    w_tab, c_tab = {}, {}
    for e in ecus:
        w0 = wcet[e.id] if isinstance(wcet, dict) else wcet
        c0 = cost[e.id] if isinstance(cost, dict) else cost
        for h in range(1, 5):
            w_tab[(e.id, h)] = float(w0)
            c_tab[(e.id, h)] = float(c0) * h
    loc = loc if loc is not None else {e.id: 1 for e in ecus}
    return Task(tid, Asil.parse(asil), app, {h: memory for h in range(1, 5)}, w_tab, c_tab, loc)


def instance(ecus: list[Ecu], tasks: list[Task], edges: list[tuple[str, str, float]] = (),
             apps: tuple[str, ...] = ("A1",), **kw) -> ProblemInstance:
    return ProblemInstance(tuple(ecus), tuple(tasks), tuple(DependencyEdge(a, b, w) for a, b, w in edges),
                           apps, **kw)


def mixed_instance() -> ProblemInstance:
    """Exercises every constraint family: a decomposed task, a plain one, a loc=0 pair."""
    es = [ecu("E1", "B", rate=1e-6), ecu("E2", "B", rate=2e-6), ecu("E3", "A", rate=3e-6)]
    t1 = task("T1", "D", es, wcet={"E1": 4, "E2": 5, "E3": 6}, cost={"E1": 3, "E2": 2, "E3": 1})
    t2 = task("T2", "B", es, wcet=3, cost={"E1": 2, "E2": 1, "E3": 1}, loc={"E1": 1, "E2": 1, "E3": 0})
    t3 = task("T3", "B", es, wcet=2, cost=1)
    return instance(es, [t1, t2, t3], [("T1", "T2", 2.0), ("T1", "T3", 1.0)])
