"""Exhaustive reference optimizer for small instances.

Enumerates schemes, injective placements and every per-ECU execution order,
evaluating the constraints directly (product-form PMHF, memory sums, interval
schedules). It shares nothing with the MILP path beyond the instance types and
the scheme enumeration.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterator, Sequence

from .decomposition import enumerate_schemes
from .instance import AllocationSolution, Placement, ProblemInstance, compute_decomposition_set
from .milp import Priority
from .reliability import check_pmhf

DEFAULT_MAX_SPACE = 10**7


class SearchSpaceTooLarge(RuntimeError):
    def __init__(self, estimate: float, limit: float) -> None:
        super().__init__(f"search space estimate {estimate:.3g} exceeds limit {limit:.3g}")
        self.estimate = estimate
        self.limit = limit


class OracleInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class _Choice:
    alpha: tuple[int, int, int, int]
    hosts: tuple[tuple[str, int], ...]  # (ecu, level)
    cost: float


@dataclass(frozen=True)
class OracleResult:
    cost_first: AllocationSolution
    latency_first: AllocationSolution
    mappings: int
    schedules: int


def task_choices(instance: ProblemInstance) -> dict[str, list[_Choice]]:
    tprime = compute_decomposition_set(instance)
    ecus = instance.ecus
    out: dict[str, list[_Choice]] = {}
    for t in instance.tasks:
        lam = int(t.asil)
        if t.id in tprime:
            level_lists = [s.levels() for s in enumerate_schemes(t.asil)]
        else:
            level_lists = [[lam]]
        seen = set()
        found = []
        for levels in level_lists:
            for hosts in itertools.permutations(ecus, len(levels)):
                pairs = tuple(sorted((e.id, h) for e, h in zip(hosts, levels)))
                if pairs in seen:
                    continue
                seen.add(pairs)
                if any(not t.can_run_on(e.id) or h > int(e.asil) for e, h in zip(hosts, levels)):
                    continue
                if t.id in tprime and not check_pmhf(t.asil, [e.failure_rate_per_hour for e in hosts],
                                                     instance.lifetime_hours):
                    continue
                alpha = tuple(levels.count(h) for h in (1, 2, 3, 4))
                found.append(_Choice(alpha, pairs, sum(t.dev_cost[(k, h)] for k, h in pairs)))
        out[t.id] = found
    return out


def estimate_space(instance: ProblemInstance) -> float:
    """Mappings times a worst-case count of per-ECU orders."""
    choices = task_choices(instance)
    mappings = math.prod(len(c) for c in choices.values())
    per_ecu: dict[str, int] = defaultdict(int)
    for tid, cs in choices.items():
        for k in {k for c in cs for k, _ in c.hosts}:
            per_ecu[k] += 1
    orders = math.prod(math.factorial(n) for n in per_ecu.values())
    return float(mappings) * float(orders)


def _orders(tasks_on: dict[str, list[str]], ancestors: dict[str, set[str]]) -> Iterator[dict[str, tuple[str, ...]]]:
    ecus = sorted(tasks_on)
    per_ecu = []
    for k in ecus:
        valid = []
        for perm in itertools.permutations(tasks_on[k]):
            # an ancestor listed after its descendant can never be scheduled
            if any(perm[a] in ancestors[perm[b]] for a in range(len(perm)) for b in range(a)):
                continue
            valid.append(perm)
        per_ecu.append(valid)
    for combo in itertools.product(*per_ecu):
        yield dict(zip(ecus, combo))


def _ancestor_sets(instance: ProblemInstance) -> dict[str, set[str]]:
    preds = instance.predecessors()
    anc: dict[str, set[str]] = {}
    for tid in instance.topological_order():
        acc: set[str] = set()
        for p in preds.get(tid, []):
            acc |= {p} | anc[p]
        anc[tid] = acc
    return anc


def _earliest(instance: ProblemInstance, mapping: dict[str, _Choice],
              order: dict[str, tuple[str, ...]]) -> dict[tuple[str, str], float] | None:
    """List-schedule every replica as early as precedences and ECU orders allow."""
    wcet = {(tid, k): instance.task(tid).wcet_ms[(k, h)] for tid, c in mapping.items() for k, h in c.hosts}
    after: dict[tuple[str, str], list[tuple[tuple[str, str], float]]] = defaultdict(list)
    nodes = list(wcet)
    for e in instance.edges:
        for ka, _ in mapping[e.from_task].hosts:
            for kb, _ in mapping[e.to_task].hosts:
                gap = wcet[(e.from_task, ka)] + (e.wcrt_ms if ka != kb else 0.0)
                after[(e.to_task, kb)].append(((e.from_task, ka), gap))
    for k, seq in order.items():
        for a, b in zip(seq, seq[1:]):
            after[(b, k)].append(((a, k), wcet[(a, k)]))
    start: dict[tuple[str, str], float] = {}
    pending = set(nodes)
    while pending:
        ready = [n for n in pending if all(p in start for p, _ in after[n])]
        if not ready:
            return None
        for n in ready:
            start[n] = max((start[p] + g for p, g in after[n]), default=0.0)
            pending.discard(n)
    return start


def _makespan(instance: ProblemInstance, focus: str, start: dict[tuple[str, str], float],
              mapping: dict[str, _Choice]) -> float:
    ends = [start[(tid, k)] + instance.task(tid).wcet_ms[(k, h)]
            for tid, c in mapping.items() if instance.task(tid).application_id == focus
            for k, h in c.hosts]
    return max(ends, default=0.0)


def _overlap_free(instance: ProblemInstance, mapping: dict[str, _Choice], start: dict[tuple[str, str], float]) -> bool:
    per: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for tid, c in mapping.items():
        for k, h in c.hosts:
            s = start[(tid, k)]
            per[k].append((s, s + instance.task(tid).wcet_ms[(k, h)]))
    for spans in per.values():
        spans.sort()
        if any(b[0] < a[1] for a, b in zip(spans, spans[1:])):
            return False
    return True


def solve_exhaustive(instance: ProblemInstance, focus_app: str | None = None,
                     max_space: float = DEFAULT_MAX_SPACE) -> OracleResult:
    """Both lexicographic optima from one enumeration."""
    estimate = estimate_space(instance)
    if estimate > max_space:
        raise SearchSpaceTooLarge(estimate, max_space)
    focus = focus_app or (instance.applications[0] if instance.applications else "")
    choices = task_choices(instance)
    ancestors = _ancestor_sets(instance)
    ids = instance.task_ids
    mem_cap = {e.id: e.memory_mb for e in instance.ecus}

    best_cost_first = None  # (cost, makespan, mapping, start)
    best_latency_first = None  # (makespan, cost, mapping, start)
    n_map = n_sched = 0
    for combo in itertools.product(*(choices[t] for t in ids)):
        mapping = dict(zip(ids, combo))
        use: dict[str, float] = defaultdict(float)
        for tid, c in mapping.items():
            for k, h in c.hosts:
                use[k] += instance.task(tid).memory_mb_by_asil[h]
        if any(use[k] > mem_cap[k] for k in use):
            continue
        n_map += 1
        cost = sum(c.cost for c in combo)
        tasks_on: dict[str, list[str]] = defaultdict(list)
        for tid, c in mapping.items():
            for k, _ in c.hosts:
                tasks_on[k].append(tid)
        best_ms, best_start = math.inf, None
        for order in _orders(tasks_on, ancestors):
            n_sched += 1
            start = _earliest(instance, mapping, order)
            if start is None or not _overlap_free(instance, mapping, start):
                continue
            ms = _makespan(instance, focus, start, mapping)
            if ms < best_ms:
                best_ms, best_start = ms, start
        if best_start is None:
            continue
        if best_cost_first is None or (cost, best_ms) < best_cost_first[:2]:
            best_cost_first = (cost, best_ms, mapping, best_start)
        if best_latency_first is None or (best_ms, cost) < best_latency_first[:2]:
            best_latency_first = (best_ms, cost, mapping, best_start)
    if best_cost_first is None:
        raise OracleInfeasible("no allocation satisfies all constraints")
    c1, m1, map1, s1 = best_cost_first
    m2, c2, map2, s2 = best_latency_first
    return OracleResult(_to_solution(map1, s1, c1, focus, m1), _to_solution(map2, s2, c2, focus, m2),
                        n_map, n_sched)


def cost_first_exhaustive(instance: ProblemInstance, focus_app: str | None = None,
                          max_orders: float = DEFAULT_MAX_SPACE) -> AllocationSolution:
    """Cost-first lexicographic optimum for instances too big for :func:`solve_exhaustive`.

    Mappings are enumerated depth-first, skipping only branches whose partial
    cost plus the cheapest remaining choices already exceeds the best complete
    cost. Every cost-tied mapping then gets the full order enumeration.
    """
    focus = focus_app or (instance.applications[0] if instance.applications else "")
    choices = task_choices(instance)
    ancestors = _ancestor_sets(instance)
    ids = instance.task_ids
    mem_cap = {e.id: e.memory_mb for e in instance.ecus}
    rest = [0.0] * (len(ids) + 1)
    for n in range(len(ids) - 1, -1, -1):
        rest[n] = rest[n + 1] + min((c.cost for c in choices[ids[n]]), default=math.inf)

    best_cost = math.inf
    tied: list[dict[str, _Choice]] = []
    picked: list[_Choice] = []
    use: dict[str, float] = defaultdict(float)

    def walk(n: int, cost: float) -> None:
        nonlocal best_cost, tied
        if cost + rest[n] > best_cost + 1e-9:
            return
        if n == len(ids):
            if cost < best_cost - 1e-9:
                best_cost, tied = cost, []
            tied.append(dict(zip(ids, picked)))
            return
        t = instance.task(ids[n])
        for c in choices[ids[n]]:
            if any(use[k] + t.memory_mb_by_asil[h] > mem_cap[k] for k, h in c.hosts):
                continue
            for k, h in c.hosts:
                use[k] += t.memory_mb_by_asil[h]
            picked.append(c)
            walk(n + 1, cost + c.cost)
            picked.pop()
            for k, h in c.hosts:
                use[k] -= t.memory_mb_by_asil[h]

    walk(0, 0.0)
    if not tied:
        raise OracleInfeasible("no allocation satisfies all constraints")
    best = None
    for mapping in tied:
        tasks_on: dict[str, list[str]] = defaultdict(list)
        for tid, c in mapping.items():
            for k, _ in c.hosts:
                tasks_on[k].append(tid)
        orders = math.prod(math.factorial(len(v)) for v in tasks_on.values())
        if orders > max_orders:
            raise SearchSpaceTooLarge(orders, max_orders)
        for order in _orders(tasks_on, ancestors):
            start = _earliest(instance, mapping, order)
            if start is None or not _overlap_free(instance, mapping, start):
                continue
            ms = _makespan(instance, focus, start, mapping)
            if best is None or ms < best[0]:
                best = (ms, mapping, start)
    ms, mapping, start = best
    return _to_solution(mapping, start, best_cost, focus, ms)


def _to_solution(mapping: dict[str, _Choice], start: dict[tuple[str, str], float], cost: float,
                 focus: str, makespan: float) -> AllocationSolution:
    placements = [Placement(tid, k, h, start[(tid, k)]) for tid, c in mapping.items() for k, h in c.hosts]
    schemes = {tid: c.alpha for tid, c in mapping.items()}
    return AllocationSolution(placements, schemes, cost, {focus: makespan}, {})


def brute_force_optimum(instance: ProblemInstance, priority: Priority | str = Priority.COST,
                        focus_app: str | None = None, max_space: float = DEFAULT_MAX_SPACE) -> AllocationSolution:
    result = solve_exhaustive(instance, focus_app, max_space)
    if Priority.parse(priority) is Priority.COST:
        return result.cost_first
    return result.latency_first


def objective_pair(solution: AllocationSolution) -> tuple[float, float]:
    """(cost, makespan) of a reported solution."""
    return solution.cost_total, next(iter(solution.makespan_per_app.values()), 0.0)


__all__: Sequence[str] = ["SearchSpaceTooLarge", "OracleInfeasible", "OracleResult", "brute_force_optimum",
                          "solve_exhaustive", "cost_first_exhaustive", "estimate_space", "task_choices", "objective_pair"]
