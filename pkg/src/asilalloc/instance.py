"""Domain types for tasks, ECUs and problem instances, plus instance file I/O."""

from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass, field
from enum import IntEnum
from graphlib import CycleError
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

LEVELS = (1, 2, 3, 4)
DEFAULT_LIFETIME_HOURS = 5000.0


class Asil(IntEnum):
    QM = 0
    A = 1
    B = 2
    C = 3
    D = 4

    @classmethod
    def parse(cls, value: Any) -> Asil:
        if isinstance(value, Asil):
            return value
        if isinstance(value, int):
            return cls(value)
        text = str(value).strip().upper()
        if text.startswith("ASIL"):
            text = text[4:].strip()
        try:
            return cls[text]
        except KeyError:
            raise ValueError(f"unknown ASIL {value!r}") from None


_MEM_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+)\s*(GB|MB)?\s*$", re.IGNORECASE)


def parse_memory_mb(value: Any) -> int:
    """Accept plain numbers (MB) or strings with a ``MB``/``GB`` suffix."""
    if isinstance(value, bool):
        raise ValueError(f"bad memory value {value!r}")
    if isinstance(value, (int, float)):
        mb = float(value)
    else:
        m = _MEM_RE.match(str(value))
        if not m:
            raise ValueError(f"bad memory value {value!r}")
        mb = float(m.group(1))
        if (m.group(2) or "MB").upper() == "GB":
            mb *= 1024
    if mb != int(mb):
        raise ValueError(f"memory must be a whole number of MB, got {value!r}")
    return int(mb)


@dataclass(frozen=True)
class Ecu:
    id: str
    asil: Asil
    memory_mb: int
    failure_rate_per_hour: float


@dataclass(frozen=True)
class Task:
    id: str
    asil: Asil
    application_id: str
    memory_mb_by_asil: Mapping[int, int]
    # keyed by (ecu id, level)
    wcet_ms: Mapping[tuple[str, int], float]
    dev_cost: Mapping[tuple[str, int], float]
    localization: Mapping[str, int]

    def can_run_on(self, ecu_id: str) -> bool:
        return self.localization.get(ecu_id, 0) == 1


@dataclass(frozen=True)
class DependencyEdge:
    from_task: str
    to_task: str
    wcrt_ms: float = 0.0


@dataclass(frozen=True)
class ProblemInstance:
    ecus: tuple[Ecu, ...]
    tasks: tuple[Task, ...]
    edges: tuple[DependencyEdge, ...] = ()
    applications: tuple[str, ...] = ()
    lifetime_hours: float = DEFAULT_LIFETIME_HOURS
    decompose_all: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "ecus", tuple(self.ecus))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "applications", tuple(self.applications))

    def task(self, task_id: str) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def ecu(self, ecu_id: str) -> Ecu:
        for e in self.ecus:
            if e.id == ecu_id:
                return e
        raise KeyError(ecu_id)

    @property
    def task_ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    @property
    def ecu_ids(self) -> list[str]:
        return [e.id for e in self.ecus]

    def edge_map(self) -> dict[tuple[str, str], float]:
        return {(e.from_task, e.to_task): e.wcrt_ms for e in self.edges}

    def predecessors(self) -> dict[str, list[str]]:
        preds: dict[str, list[str]] = {t.id: [] for t in self.tasks}
        for e in self.edges:
            preds.setdefault(e.to_task, []).append(e.from_task)
        return preds

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {t.id: [] for t in self.tasks}
        for e in self.edges:
            succ.setdefault(e.from_task, []).append(e.to_task)
        return succ

    def topological_order(self) -> list[str]:
        """Tasks in topological order, ties broken by declaration order.

        Raises graphlib.CycleError if the dependency graph has a cycle.
        """
        position = {tid: n for n, tid in enumerate(self.task_ids)}
        indeg = {tid: 0 for tid in self.task_ids}
        succ = self.successors()
        for e in self.edges:
            indeg[e.to_task] = indeg.get(e.to_task, 0) + 1
        ready = [(position[t], t) for t, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order: list[str] = []
        while ready:
            _, node = heapq.heappop(ready)
            order.append(node)
            for nxt in succ.get(node, []):
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heapq.heappush(ready, (position.get(nxt, len(position)), nxt))
        if len(order) != len(indeg):
            stuck = [t for t, d in indeg.items() if d > 0]
            raise CycleError("dependency graph has a cycle", stuck)
        return order

    def with_changes(self, **changes: Any) -> ProblemInstance:
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ProblemInstance(**data)

    def restricted_to(self, task_ids: Iterable[str]) -> ProblemInstance:
        """Sub-instance keeping only the given tasks and the edges among them."""
        keep = set(task_ids)
        tasks = tuple(t for t in self.tasks if t.id in keep)
        edges = tuple(e for e in self.edges if e.from_task in keep and e.to_task in keep)
        apps = tuple(a for a in self.applications if any(t.application_id == a for t in tasks))
        return self.with_changes(tasks=tasks, edges=edges, applications=apps)


@dataclass(frozen=True)
class Diagnostic:
    invariant: str
    entity: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.invariant} [{self.entity}] {self.message}"


def validate_instance(instance: ProblemInstance) -> list[Diagnostic]:
    """Check every type invariant; monotone-WCET breaches come back as warnings."""
    out: list[Diagnostic] = []

    def err(inv: str, ent: str, msg: str) -> None:
        out.append(Diagnostic(inv, ent, msg))

    ecu_ids = [e.id for e in instance.ecus]
    task_ids = [t.id for t in instance.tasks]
    for kind, ids in (("ecu", ecu_ids), ("task", task_ids), ("application", list(instance.applications))):
        seen: set[str] = set()
        for i in ids:
            if i in seen:
                err("unique ids", i, f"duplicate {kind} id")
            seen.add(i)
    if not instance.ecus:
        err("non-empty ECU set", "instance", "no ECUs defined")
    if not instance.lifetime_hours > 0:
        err("positive lifetime", "instance", f"lifetime_hours={instance.lifetime_hours}")

    for e in instance.ecus:
        if e.memory_mb <= 0:
            err("positive ECU memory", e.id, f"memory_mb={e.memory_mb}")
        if not e.failure_rate_per_hour > 0:
            err("positive failure rate", e.id, f"failure_rate_per_hour={e.failure_rate_per_hour}")
        if e.asil < Asil.A:
            err("ECU ASIL in A..D", e.id, "QM ECUs are not modeled")

    apps = set(instance.applications)
    for t in instance.tasks:
        if t.asil < Asil.A:
            err("task ASIL in A..D", t.id, "QM tasks are not modeled")
        if t.application_id not in apps:
            err("known application", t.id, f"unknown application {t.application_id!r}")
        for h in LEVELS:
            if h not in t.memory_mb_by_asil:
                err("memory defined", t.id, f"no memory for level {h}")
            elif t.memory_mb_by_asil[h] < 0:
                err("memory defined", t.id, f"negative memory for level {h}")
        if not any(t.can_run_on(k) for k in ecu_ids):
            err("localization", t.id, "task cannot run on any ECU")
        for k in ecu_ids:
            if not t.can_run_on(k):
                continue
            for h in LEVELS:
                w = t.wcet_ms.get((k, h))
                c = t.dev_cost.get((k, h))
                if w is None or not w > 0:
                    err("wcet defined", t.id, f"wcet on {k} at level {h} missing or non-positive")
                if c is None or c < 0:
                    err("cost defined", t.id, f"cost on {k} at level {h} missing or negative")
            ws = [t.wcet_ms.get((k, h)) for h in LEVELS]
            if all(w is not None for w in ws) and any(a > b for a, b in zip(ws, ws[1:])):
                out.append(Diagnostic("monotone wcet", t.id,
                                      f"wcet on {k} decreases with ASIL: {ws}", "warning"))

    known = set(task_ids)
    for e in instance.edges:
        ent = f"{e.from_task}->{e.to_task}"
        if e.from_task == e.to_task:
            err("self-dependency", ent, "a task cannot depend on itself")
        for end in (e.from_task, e.to_task):
            if end not in known:
                err("edge endpoint", ent, f"unknown task {end!r}")
        if e.wcrt_ms < 0:
            err("non-negative wcrt", ent, f"wcrt_ms={e.wcrt_ms}")
    pairs = [(e.from_task, e.to_task) for e in instance.edges]
    if len(set(pairs)) != len(pairs):
        err("unique edges", "edges", "duplicate dependency edge")

    if not any(d.invariant in ("self-dependency", "edge endpoint") for d in out):
        try:
            instance.topological_order()
        except CycleError as exc:
            cycle = exc.args[1] if len(exc.args) > 1 else []
            err("not a DAG", "->".join(map(str, cycle)) or "edges", "dependency graph has a cycle")
    return out


def errors_only(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def compute_decomposition_set(instance: ProblemInstance) -> set[str]:
    """Tasks whose ASIL exceeds every ECU's ASIL (all tasks when decompose_all)."""
    if instance.decompose_all:
        return set(instance.task_ids)
    top = max((e.asil for e in instance.ecus), default=Asil.QM)
    return {t.id for t in instance.tasks if t.asil > top}


# --- solution --------------------------------------------------------------


@dataclass(frozen=True)
class Placement:
    task: str
    ecu: str
    asil: int
    start_ms: float


@dataclass
class AllocationSolution:
    placements: list[Placement]
    scheme_per_task: dict[str, tuple[int, int, int, int]]
    cost_total: float
    makespan_per_app: dict[str, float]
    ordering: dict[tuple[str, str, str], int] = field(default_factory=dict)

    def placements_of(self, task_id: str) -> list[Placement]:
        return [p for p in self.placements if p.task == task_id]

    def to_dict(self) -> dict[str, Any]:
        return {
            "cost": self.cost_total,
            "makespan": dict(self.makespan_per_app),
            "schemes": {t: list(a) for t, a in self.scheme_per_task.items()},
            "placements": [
                {"task": p.task, "ecu": p.ecu, "asil": Asil(p.asil).name, "start_ms": p.start_ms}
                for p in self.placements
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> AllocationSolution:
        return cls(
            placements=[
                Placement(p["task"], p["ecu"], int(Asil.parse(p["asil"])), float(p["start_ms"]))
                for p in data["placements"]
            ],
            scheme_per_task={t: tuple(int(v) for v in a) for t, a in data["schemes"].items()},
            cost_total=float(data["cost"]),
            makespan_per_app={a: float(v) for a, v in data["makespan"].items()},
        )


# --- instance files --------------------------------------------------------


class InstanceFormatError(ValueError):
    """Raised for malformed instance files; ``location`` points at the bad entry."""

    def __init__(self, location: str, message: str) -> None:
        super().__init__(f"{location}: {message}")
        self.location = location


def _level_key(key: Any) -> int:
    return int(Asil.parse(int(key) if str(key).isdigit() else key))


def instance_from_dict(data: Mapping[str, Any]) -> ProblemInstance:
    def need(obj: Mapping[str, Any], key: str, where: str) -> Any:
        if key not in obj:
            raise InstanceFormatError(where, f"missing key {key!r}")
        return obj[key]

    for key in ("ecus", "tasks"):
        need(data, key, "$")
    try:
        ecus = []
        for n, e in enumerate(data["ecus"]):
            where = f"$.ecus[{n}]"
            ecus.append(Ecu(
                id=str(need(e, "id", where)),
                asil=Asil.parse(need(e, "asil", where)),
                memory_mb=parse_memory_mb(need(e, "memory", where)),
                failure_rate_per_hour=float(need(e, "failure_rate_per_hour", where)),
            ))
        ecu_ids = [e.id for e in ecus]

        tasks = []
        for n, t in enumerate(data["tasks"]):
            where = f"$.tasks[{n}]"
            tid = str(need(t, "id", where))
            memory = {_level_key(h): parse_memory_mb(v) for h, v in need(t, "memory", where).items()}
            wcet: dict[tuple[str, int], float] = {}
            cost: dict[tuple[str, int], float] = {}
            for k, row in need(t, "wcet_ms", where).items():
                for h, v in row.items():
                    wcet[(str(k), _level_key(h))] = float(v)
            for k, row in need(t, "cost", where).items():
                for h, v in row.items():
                    cost[(str(k), _level_key(h))] = float(v)
            loc_raw = t.get("localization")
            loc = {k: 1 for k in ecu_ids} if loc_raw is None else {str(k): int(v) for k, v in loc_raw.items()}
            tasks.append(Task(
                id=tid,
                asil=Asil.parse(need(t, "asil", where)),
                application_id=str(need(t, "application", where)),
                memory_mb_by_asil=memory,
                wcet_ms=wcet,
                dev_cost=cost,
                localization=loc,
            ))

        edges = []
        for n, e in enumerate(data.get("edges", [])):
            where = f"$.edges[{n}]"
            edges.append(DependencyEdge(str(need(e, "from", where)), str(need(e, "to", where)),
                                        float(e.get("wcrt_ms", 0.0))))
        apps = data.get("applications")
        if apps is None:
            apps = list(dict.fromkeys(t.application_id for t in tasks))
        return ProblemInstance(
            ecus=tuple(ecus), tasks=tuple(tasks), edges=tuple(edges),
            applications=tuple(str(a) for a in apps),
            lifetime_hours=float(data.get("lifetime_hours", DEFAULT_LIFETIME_HOURS)),
            decompose_all=bool(data.get("decompose_all", False)),
            name=str(data.get("name", "")),
        )
    except InstanceFormatError:
        raise
    except (TypeError, ValueError, AttributeError) as exc:
        raise InstanceFormatError("$", str(exc)) from exc


def _num(v: float) -> float | int:
    return int(v) if float(v).is_integer() else v


def instance_to_dict(instance: ProblemInstance) -> dict[str, Any]:
    tasks = []
    for t in instance.tasks:
        ecus_used = [e.id for e in instance.ecus if any((e.id, h) in t.wcet_ms for h in LEVELS)]
        tasks.append({
            "id": t.id,
            "asil": t.asil.name,
            "application": t.application_id,
            "memory": {Asil(h).name: t.memory_mb_by_asil[h] for h in sorted(t.memory_mb_by_asil)},
            "wcet_ms": {k: {Asil(h).name: _num(t.wcet_ms[(k, h)]) for h in LEVELS if (k, h) in t.wcet_ms}
                        for k in ecus_used},
            "cost": {k: {Asil(h).name: _num(t.dev_cost[(k, h)]) for h in LEVELS if (k, h) in t.dev_cost}
                     for k in ecus_used},
            "localization": {e.id: t.localization.get(e.id, 0) for e in instance.ecus},
        })
    data: dict[str, Any] = {}
    if instance.name:
        data["name"] = instance.name
    data.update({
        "lifetime_hours": _num(instance.lifetime_hours),
        "decompose_all": instance.decompose_all,
        "applications": list(instance.applications),
        "ecus": [{"id": e.id, "asil": e.asil.name, "memory": e.memory_mb,
                  "failure_rate_per_hour": e.failure_rate_per_hour} for e in instance.ecus],
        "tasks": tasks,
        "edges": [{"from": e.from_task, "to": e.to_task, "wcrt_ms": _num(e.wcrt_ms)} for e in instance.edges],
    })
    return data


def dumps_instance(instance: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def load_instance(path: str | Path) -> ProblemInstance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("$", "top level must be an object")
    return instance_from_dict(data)


def save_instance(instance: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance))


def case_study_path() -> Path:
    return Path(str(resources.files("asilalloc") / "data" / "case_study.json"))


def load_case_study() -> ProblemInstance:
    return load_instance(case_study_path())
