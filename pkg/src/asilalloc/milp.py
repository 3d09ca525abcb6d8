"""Solver-neutral MILP model of the allocation problem.

The builder turns a :class:`ProblemInstance` into variables, tagged linear
constraints and two ordered objectives (development cost, application
makespan). Every constraint carries a tag such as ``"eq13"`` naming the
constraint family it encodes; the LP writer emits tags as comments.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .decomposition import enumerate_schemes, filter_compatible
from .instance import (
    LEVELS,
    AllocationSolution,
    ProblemInstance,
    compute_decomposition_set,
    errors_only,
    validate_instance,
)
from .reliability import log_pof_budget, log_pof_coefficient

TOL = 1e-6


class VarKind(Enum):
    BINARY = "binary"
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Priority(Enum):
    COST = "cost"
    LATENCY = "latency"

    @classmethod
    def parse(cls, value: Priority | str) -> Priority:
        if isinstance(value, Priority):
            return value
        text = str(value).lower().replace("-first", "").replace("_first", "")
        return cls(text)


@dataclass(frozen=True)
class MilpVariable:
    name: str
    kind: VarKind
    lo: float = 0.0
    hi: float = math.inf

    def __post_init__(self) -> None:
        if self.kind is VarKind.BINARY and (self.lo, self.hi) != (0.0, 1.0):
            object.__setattr__(self, "lo", 0.0)
            object.__setattr__(self, "hi", 1.0)


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", "=", ">="
    rhs: float
    tag: str

    def __post_init__(self) -> None:
        if self.sense not in ("<=", "=", ">="):
            raise ValueError(f"bad sense {self.sense!r}")
        if not all(math.isfinite(c) for _, c in self.terms) or not math.isfinite(self.rhs):
            raise ValueError(f"non-finite coefficient in {self.tag} constraint")

    def activity(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values.get(v, 0.0) for v, c in self.terms)

    def slack(self, values: Mapping[str, float]) -> float:
        """Non-negative when satisfied; equality rows report -|residual|."""
        lhs = self.activity(values)
        if self.sense == "<=":
            return self.rhs - lhs
        if self.sense == ">=":
            return lhs - self.rhs
        return -abs(lhs - self.rhs)

    def satisfied(self, values: Mapping[str, float], tol: float = TOL) -> bool:
        return self.slack(values) >= -tol * max(1.0, abs(self.rhs))


@dataclass(frozen=True)
class Objective:
    name: str  # "cost" or "makespan"
    terms: tuple[tuple[str, float], ...]

    def value(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values.get(v, 0.0) for v, c in self.terms)


@dataclass(frozen=True)
class XVar:
    name: str
    task: str
    ecu: str
    level: int
    live: bool  # False when fixed to zero by localization or ASIL compatibility
    wcet: float
    cost: float
    memory: int


@dataclass
class ModelStructure:
    """Index from domain entities to variable names, used by the solver."""

    instance: ProblemInstance
    focus_app: str
    priority: Priority
    decomposition_set: frozenset[str]
    strict_pmhf: bool
    x: dict[tuple[str, str, int], XVar] = field(default_factory=dict)
    alpha: dict[tuple[str, int], str] = field(default_factory=dict)
    tau: dict[tuple[str, str], str] = field(default_factory=dict)
    theta: dict[tuple[str, str, str], str] = field(default_factory=dict)
    phi: str = "Phi"

    def x_of_task(self, task_id: str) -> list[XVar]:
        return [v for (t, _, _), v in self.x.items() if t == task_id]


@dataclass
class MilpModel:
    variables: dict[str, MilpVariable]
    constraints: list[LinearConstraint]
    objectives: list[Objective]
    big_m: float
    structure: ModelStructure

    def tagged(self, tag: str) -> list[LinearConstraint]:
        return [c for c in self.constraints if c.tag == tag]

    def tags(self) -> set[str]:
        return {c.tag for c in self.constraints}

    def violations(self, values: Mapping[str, float], tol: float = TOL) -> list[LinearConstraint]:
        bad = [c for c in self.constraints if not c.satisfied(values, tol)]
        for v in self.variables.values():
            x = values.get(v.name, 0.0)
            if x < v.lo - tol or x > v.hi + tol:
                bad.append(LinearConstraint(((v.name, 1.0),), ">=", v.lo, "bounds"))
            elif v.kind is not VarKind.CONTINUOUS and abs(x - round(x)) > tol:
                bad.append(LinearConstraint(((v.name, 1.0),), "=", round(x), "integrality"))
        return bad


def assignment_from_solution(model: MilpModel, solution: AllocationSolution) -> dict[str, float]:
    """Variable values for a concrete allocation.

    Orderings are completed per ECU: co-hosted pairs follow their start times,
    a hosted task is ordered after a task absent from that ECU, and pairs
    absent from the ECU (or joined by a dependency) get 1 in both directions.
    """
    st = model.structure
    inst = st.instance
    values = {name: 0.0 for name in model.variables}
    start: dict[tuple[str, str], float] = {}
    for p in solution.placements:
        values[st.x[(p.task, p.ecu, p.asil)].name] = 1.0
        start[(p.task, p.ecu)] = p.start_ms
        if (p.task, p.ecu) in st.tau:
            values[st.tau[(p.task, p.ecu)]] = p.start_ms
    for (tid, h), name in st.alpha.items():
        values[name] = float(sum(1 for p in solution.placements if p.task == tid and p.asil == h))
    deps = set(inst.edge_map())
    for (i, j, k), name in st.theta.items():
        a, b = start.get((i, k)), start.get((j, k))
        if (i, j) in deps:
            val = 1
        elif a is not None and b is not None:
            val = 1 if a < b else 0
        elif a is not None:
            val = 0
        else:
            val = 1
        values[name] = float(val)
    values[st.phi] = max(solution.makespan_per_app.get(st.focus_app, 0.0), 0.0)
    return values


class InfeasibleModelError(ValueError):
    """The instance is infeasible before any search; ``task`` names the culprit."""

    def __init__(self, task: str, reason: str) -> None:
        super().__init__(f"task {task}: {reason}")
        self.task = task
        self.reason = reason


_UNSAFE = re.compile(r"[^A-Za-z0-9_]")


def _safe_names(ids: Iterable[str]) -> dict[str, str]:
    ids = list(ids)
    names = {i: _UNSAFE.sub("_", i) for i in ids}
    if len(set(names.values())) != len(ids):
        names = {i: f"{_UNSAFE.sub('_', i)}_{n}" for n, i in enumerate(ids)}
    return names


def replica_cap(instance: ProblemInstance, task_id: str, decomposition_set: set[str] | frozenset[str]) -> int:
    if task_id not in decomposition_set:
        return 1
    return min(int(instance.task(task_id).asil), len(instance.ecus))


def compute_big_m(instance: ProblemInstance, decomposition_set: set[str] | frozenset[str]) -> float:
    """Upper bound on any earliest-start schedule length, plus one."""
    total = 0.0
    for t in instance.tasks:
        wmax = max((w for (k, _), w in t.wcet_ms.items() if t.can_run_on(k)), default=0.0)
        total += replica_cap(instance, t.id, decomposition_set) * wmax
    return total + sum(e.wcrt_ms for e in instance.edges) + 1.0


def build_model(
    instance: ProblemInstance,
    focus_app: str | None = None,
    priority: Priority | str = Priority.COST,
    strict_pmhf: bool = False,
) -> MilpModel:
    problems = errors_only(validate_instance(instance))
    if problems:
        raise ValueError("invalid instance: " + "; ".join(map(str, problems)))
    priority = Priority.parse(priority)
    if focus_app is None:
        if not instance.applications:
            raise ValueError("instance has no applications")
        focus_app = instance.applications[0]
    elif focus_app not in instance.applications:
        raise ValueError(f"unknown application {focus_app!r}")

    tprime = frozenset(compute_decomposition_set(instance))
    ecus = instance.ecus
    ecu_asil = {e.id: int(e.asil) for e in ecus}
    tn = _safe_names(instance.task_ids)
    en = _safe_names(instance.ecu_ids)

    for t in instance.tasks:
        hosts = [e for e in ecus if t.can_run_on(e.id)]
        if t.id in tprime:
            if not filter_compatible(enumerate_schemes(t.asil), hosts):
                raise InfeasibleModelError(t.id, "no decomposition scheme fits the permitted ECUs")
        elif not any(int(e.asil) >= int(t.asil) for e in hosts):
            raise InfeasibleModelError(t.id, "no permitted ECU supports the task ASIL")

    big_m = compute_big_m(instance, tprime)
    st = ModelStructure(instance, focus_app, priority, tprime, strict_pmhf)
    variables: dict[str, MilpVariable] = {}
    cons: list[LinearConstraint] = []

    def add(terms: Iterable[tuple[str, float]], sense: str, rhs: float, tag: str) -> None:
        merged: dict[str, float] = {}
        for v, c in terms:
            merged[v] = merged.get(v, 0.0) + c
        cons.append(LinearConstraint(tuple((v, c) for v, c in merged.items() if c != 0.0), sense, rhs, tag))

    # mapping variables
    for t in instance.tasks:
        levels = LEVELS if t.id in tprime else (int(t.asil),)
        for e in ecus:
            for h in levels:
                name = f"x_{tn[t.id]}_{en[e.id]}_{h}"
                live = t.can_run_on(e.id) and h <= ecu_asil[e.id]
                st.x[(t.id, e.id, h)] = XVar(
                    name, t.id, e.id, h, live,
                    wcet=t.wcet_ms.get((e.id, h), 0.0) if t.can_run_on(e.id) else 0.0,
                    cost=t.dev_cost.get((e.id, h), 0.0) if t.can_run_on(e.id) else 0.0,
                    memory=t.memory_mb_by_asil[h],
                )
                variables[name] = MilpVariable(name, VarKind.BINARY)
        if t.id in tprime:
            for h in LEVELS:
                name = f"alpha_{tn[t.id]}_{h}"
                st.alpha[(t.id, h)] = name
                variables[name] = MilpVariable(name, VarKind.INTEGER, 0.0, 4.0)
        for e in ecus:
            name = f"tau_{tn[t.id]}_{en[e.id]}"
            st.tau[(t.id, e.id)] = name
            variables[name] = MilpVariable(name, VarKind.CONTINUOUS, 0.0, math.inf)
    variables[st.phi] = MilpVariable(st.phi, VarKind.CONTINUOUS, 0.0, math.inf)

    def xs(task_id: str, ecu_id: str, live_only: bool = True) -> list[XVar]:
        out = [st.x[(task_id, ecu_id, h)] for h in LEVELS if (task_id, ecu_id, h) in st.x]
        return [v for v in out if v.live] if live_only else out

    for t in instance.tasks:
        lam = int(t.asil)
        if t.id not in tprime:
            add(((st.x[(t.id, e.id, lam)].name, 1.0) for e in ecus), "=", 1.0, "eq8")
        else:
            add(((st.alpha[(t.id, h)], float(h)) for h in LEVELS), "=", float(lam), "eq9")
            for h in LEVELS:
                add([(st.x[(t.id, e.id, h)].name, 1.0) for e in ecus] + [(st.alpha[(t.id, h)], -1.0)],
                    "=", 0.0, "eq10")
            for e in ecus:
                add(((v.name, 1.0) for v in xs(t.id, e.id, live_only=False)), "<=", 1.0, "eq11")
        for e in ecus:
            for v in xs(t.id, e.id, live_only=False):
                if not t.can_run_on(e.id):
                    add(((v.name, 1.0),), "=", 0.0, "eq12")
                elif v.level > ecu_asil[e.id]:
                    if t.id in tprime:
                        add(((v.name, float(v.level)),), "<=", float(ecu_asil[e.id]), "eq15")
                    else:
                        add(((v.name, float(lam)),), "<=", float(ecu_asil[e.id]), "eq14")

    for e in ecus:
        terms = [(v.name, float(v.memory)) for v in st.x.values() if v.ecu == e.id and v.live]
        if terms:
            add(terms, "<=", float(e.memory_mb), "eq13")

    # precedence, linearized per replica placement pair
    for edge in instance.edges:
        i, j = edge.from_task, edge.to_task
        for k in ecus:
            for a in xs(i, k.id):
                for m in ecus:
                    for b in xs(j, m.id):
                        delay = a.wcet + (edge.wcrt_ms if k.id != m.id else 0.0)
                        add([(st.tau[(j, m.id)], 1.0), (st.tau[(i, k.id)], -1.0),
                             (a.name, -big_m), (b.name, -big_m)],
                            ">=", delay - 2 * big_m, "eq16" if k.id == m.id else "eq17")

    # per-ECU disjunctive ordering
    deps = set(instance.edge_map())
    ids = instance.task_ids
    for i in ids:
        for j in ids:
            if i == j:
                continue
            for e in ecus:
                name = f"theta_{tn[i]}_{tn[j]}_{en[e.id]}"
                st.theta[(i, j, e.id)] = name
                variables[name] = MilpVariable(name, VarKind.BINARY)
    for i in ids:
        for j in ids:
            if i == j:
                continue
            for e in ecus:
                th = st.theta[(i, j, e.id)]
                if (i, j) in deps:
                    add(((th, 1.0),), "=", 1.0, "eq22")
                    continue
                base = [(st.tau[(i, e.id)], 1.0), (st.tau[(j, e.id)], -1.0)]
                base += [(v.name, -v.wcet) for v in xs(j, e.id)]
                add(base + [(th, big_m)], ">=", 0.0, "eq19")
                add(base + [(th, big_m)], "<=", big_m, "eq20")
    for n, i in enumerate(ids):
        for j in ids[n + 1:]:
            for e in ecus:
                for a in xs(i, e.id):
                    for b in xs(j, e.id):
                        add([(a.name, 1.0), (b.name, 1.0),
                             (st.theta[(i, j, e.id)], 1.0), (st.theta[(j, i, e.id)], 1.0)],
                            "<=", 3.0, "eq21")

    for t in instance.tasks:
        if t.application_id != focus_app:
            continue
        for e in ecus:
            add([(st.phi, 1.0), (st.tau[(t.id, e.id)], -1.0)] + [(v.name, -v.wcet) for v in xs(t.id, e.id)],
                ">=", 0.0, "eq23")

    t_hours = instance.lifetime_hours
    for t in instance.tasks:
        if t.id not in tprime and not strict_pmhf:
            continue
        rhs = log_pof_budget(t.asil, t_hours)
        if rhs is None:
            continue
        terms = [(v.name, log_pof_coefficient(instance.ecu(v.ecu).failure_rate_per_hour, t_hours))
                 for v in st.x.values() if v.task == t.id and v.live]
        add(terms, "<=", rhs, "eq24")

    cost = Objective("cost", tuple((v.name, v.cost) for v in st.x.values() if v.live and v.cost != 0.0))
    makespan = Objective("makespan", ((st.phi, 1.0),))
    objectives = [cost, makespan] if priority is Priority.COST else [makespan, cost]

    used = {v for c in cons for v, _ in c.terms} | {v for o in objectives for v, _ in o.terms}
    variables = {n: v for n, v in variables.items() if n in used}
    st.tau = {key: n for key, n in st.tau.items() if n in used}
    st.theta = {key: n for key, n in st.theta.items() if n in used}
    return MilpModel(variables, cons, objectives, big_m, st)
