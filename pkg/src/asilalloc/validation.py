"""Direct re-check of a concrete allocation against every constraint family.

Nothing here touches the MILP: products instead of log sums, interval scans
instead of big-M rows.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

from .instance import LEVELS, AllocationSolution, ProblemInstance, compute_decomposition_set
from .reliability import check_pmhf

EPS = 1e-9


@dataclass(frozen=True)
class Violation:
    tag: str
    entity: str
    message: str

    def __str__(self) -> str:
        return f"{self.tag} [{self.entity}] {self.message}"


def validate_solution(instance: ProblemInstance, solution: AllocationSolution,
                      strict_pmhf: bool = False) -> list[Violation]:
    out: list[Violation] = []
    tprime = compute_decomposition_set(instance)
    ecus = {e.id: e for e in instance.ecus}
    tasks = {t.id: t for t in instance.tasks}
    by_task: dict[str, list] = defaultdict(list)

    for p in solution.placements:
        if p.task not in tasks or p.ecu not in ecus:
            out.append(Violation("reference", f"{p.task}@{p.ecu}", "unknown task or ECU"))
            continue
        by_task[p.task].append(p)
        if p.start_ms < -EPS:
            out.append(Violation("bounds", f"{p.task}@{p.ecu}", f"negative start {p.start_ms}"))

    for t in instance.tasks:
        placed = by_task.get(t.id, [])
        lam = int(t.asil)
        if t.id not in tprime:
            if len(placed) != 1 or placed[0].asil != lam:
                out.append(Violation("eq8", t.id, f"needs exactly one placement at level {lam}, got "
                                     f"{[(p.ecu, p.asil) for p in placed]}"))
        else:
            counts = Counter(p.asil for p in placed)
            alpha = tuple(counts.get(h, 0) for h in LEVELS)
            if sum(a * h for a, h in zip(alpha, LEVELS)) != lam or any(p.asil not in LEVELS for p in placed):
                out.append(Violation("eq9", t.id, f"replica levels {alpha} do not sum to {lam}"))
            declared = solution.scheme_per_task.get(t.id)
            if declared is not None and tuple(declared) != alpha:
                out.append(Violation("eq10", t.id, f"placements {alpha} differ from scheme {tuple(declared)}"))
        hosts = [p.ecu for p in placed]
        if len(hosts) != len(set(hosts)):
            out.append(Violation("eq11", t.id, f"replicas share an ECU: {hosts}"))
        for p in placed:
            if not t.can_run_on(p.ecu):
                out.append(Violation("eq12", f"{t.id}@{p.ecu}", "localization forbids this ECU"))
            if p.asil > int(ecus[p.ecu].asil):
                tag = "eq15" if t.id in tprime else "eq14"
                out.append(Violation(tag, f"{t.id}@{p.ecu}", f"level {p.asil} above ECU ASIL {int(ecus[p.ecu].asil)}"))
        if placed and (t.id in tprime or strict_pmhf):
            rates = [ecus[p.ecu].failure_rate_per_hour for p in placed]
            if not check_pmhf(t.asil, rates, instance.lifetime_hours):
                out.append(Violation("eq24", t.id, f"PMHF budget exceeded on {hosts}"))

    usage: dict[str, float] = defaultdict(float)
    cost = 0.0
    for p in solution.placements:
        if p.task not in tasks or p.ecu not in ecus:
            continue
        t = tasks[p.task]
        usage[p.ecu] += t.memory_mb_by_asil.get(p.asil, 0)
        cost += t.dev_cost.get((p.ecu, p.asil), math.nan)
    for k, used in usage.items():
        if used > ecus[k].memory_mb:
            out.append(Violation("eq13", k, f"memory {used:g} MB exceeds {ecus[k].memory_mb} MB"))
    if not math.isclose(cost, solution.cost_total, rel_tol=1e-9, abs_tol=1e-9):
        out.append(Violation("eq6", "cost", f"reported {solution.cost_total}, placements sum to {cost}"))

    def finish(p) -> float:
        return p.start_ms + tasks[p.task].wcet_ms.get((p.ecu, p.asil), math.nan)

    for e in instance.edges:
        for a in by_task.get(e.from_task, []):
            for b in by_task.get(e.to_task, []):
                need = finish(a) + (e.wcrt_ms if a.ecu != b.ecu else 0.0)
                if b.start_ms < need - EPS:
                    tag = "eq16" if a.ecu == b.ecu else "eq17"
                    out.append(Violation(tag, f"{e.from_task}->{e.to_task}",
                                         f"{b.task}@{b.ecu} starts {b.start_ms:g} before {need:g}"))

    per_ecu: dict[str, list] = defaultdict(list)
    for plist in by_task.values():
        for p in plist:
            per_ecu[p.ecu].append(p)
    for k, plist in per_ecu.items():
        plist.sort(key=lambda p: (p.start_ms, p.task))
        for n, a in enumerate(plist):
            for b in plist[n + 1:]:
                if b.start_ms < finish(a) - EPS and a.start_ms < finish(b) - EPS:
                    out.append(Violation("eq18", k, f"{a.task} [{a.start_ms:g},{finish(a):g}) overlaps "
                                         f"{b.task} [{b.start_ms:g},{finish(b):g})"))

    for app in instance.applications:
        ends = [finish(p) for t in instance.tasks if t.application_id == app for p in by_task.get(t.id, [])]
        if not ends or app not in solution.makespan_per_app:
            continue
        if solution.makespan_per_app[app] < max(ends) - EPS:
            out.append(Violation("eq23", app, f"makespan {solution.makespan_per_app[app]:g} below "
                                 f"last finish {max(ends):g}"))
    return out
