"""Exact branch-and-bound for models produced by :func:`asilalloc.milp.build_model`.

The search branches on decomposition schemes and replica placements task by
task (topological order), propagating the binary rows of the model (memory,
localization, ASIL compatibility, distinct ECUs, PMHF). Once every mapping
variable is fixed, start times follow from a longest-path computation over
the difference constraints that remain; ECU-sharing conflicts are settled by
a second branch-and-bound over the per-ECU ordering variables.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .decomposition import DecompositionScheme, enumerate_schemes
from .instance import LEVELS, AllocationSolution, Placement, ProblemInstance
from .milp import LinearConstraint, MilpModel, Priority, VarKind, XVar

logger = logging.getLogger(__name__)

COST_EPS = 1e-9


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float | None = None
    node_limit: int | None = None


@dataclass(frozen=True)
class SearchNode:
    """One step of the mapping search, reported to ``on_node`` observers."""

    depth: int
    task: str
    option: int
    cost_bound: float
    latency_bound: float


@dataclass
class SolveReport:
    status: Status
    solution: AllocationSolution | None = None
    objective_values: list[float] = field(default_factory=list)
    objective_names: list[str] = field(default_factory=list)
    nodes: int = 0
    wall_time: float = 0.0
    incumbents: list[list[float]] = field(default_factory=list)
    stage_nodes: list[int] = field(default_factory=list)
    values: dict[str, float] | None = None
    message: str = ""

    @property
    def cost(self) -> float | None:
        return self._objective("cost")

    @property
    def latency(self) -> float | None:
        return self._objective("makespan")

    def _objective(self, name: str) -> float | None:
        if name in self.objective_names and len(self.objective_values) == 2:
            return self.objective_values[self.objective_names.index(name)]
        if self.solution is None:
            return None
        if name == "cost":
            return self.solution.cost_total
        return next(iter(self.solution.makespan_per_app.values()), None)


@dataclass(frozen=True)
class ReplicaSet:
    """A scheme together with one ECU per replica, for a single task."""

    task: str
    scheme: DecompositionScheme
    xvars: tuple[XVar, ...]
    cost: float
    chain_wcet: float  # longest replica; successors wait for all replicas

    @property
    def placements(self) -> list[tuple[str, int]]:
        return [(v.ecu, v.level) for v in self.xvars]


# --- scheduling --------------------------------------------------------------


@dataclass
class _Replica:
    task: str
    ecu: str
    wcet: float
    focus: bool


class ScheduleProblem:
    """Replicas with fixed precedence arcs and open same-ECU conflicts."""

    def __init__(self, instance: ProblemInstance, mapping: Mapping[str, Sequence[tuple[str, float]]],
                 focus_app: str | None, ancestors: Mapping[str, set[str]] | None = None):
        # mapping: task -> [(ecu, wcet)]
        self.replicas: list[_Replica] = []
        index: dict[str, list[int]] = defaultdict(list)
        for t in instance.tasks:
            for ecu, w in mapping.get(t.id, ()):
                index[t.id].append(len(self.replicas))
                self.replicas.append(_Replica(t.id, ecu, float(w), t.application_id == focus_app))
        self.index = index
        n = len(self.replicas)
        self.fixed: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for e in instance.edges:
            for a in index.get(e.from_task, ()):
                for b in index.get(e.to_task, ()):
                    ra, rb = self.replicas[a], self.replicas[b]
                    self.fixed[a].append((b, ra.wcet + (e.wcrt_ms if ra.ecu != rb.ecu else 0.0)))
        anc = ancestors if ancestors is not None else _ancestors(instance)
        self.conflicts: list[tuple[int, int]] = []
        for a, b in itertools.combinations(range(n), 2):
            ra, rb = self.replicas[a], self.replicas[b]
            if ra.ecu != rb.ecu or ra.task == rb.task:
                continue
            if ra.task in anc[rb.task] or rb.task in anc[ra.task]:
                continue  # order already forced through precedence
            self.conflicts.append((a, b))

    def earliest(self, extra: Iterable[tuple[int, int]]) -> list[float] | None:
        """Earliest starts under fixed arcs plus ``extra`` (a before b) arcs; None on a cycle."""
        n = len(self.replicas)
        out = [list(arcs) for arcs in self.fixed]
        for a, b in extra:
            out[a].append((b, self.replicas[a].wcet))
        indeg = [0] * n
        for arcs in out:
            for b, _ in arcs:
                indeg[b] += 1
        start = [0.0] * n
        stack = [v for v in range(n) if indeg[v] == 0]
        seen = 0
        while stack:
            v = stack.pop()
            seen += 1
            for b, w in out[v]:
                if start[v] + w > start[b]:
                    start[b] = start[v] + w
                indeg[b] -= 1
                if indeg[b] == 0:
                    stack.append(b)
        return start if seen == n else None

    def makespan(self, start: Sequence[float]) -> float:
        return max((s + r.wcet for s, r in zip(start, self.replicas) if r.focus), default=0.0)

    def optimize(self, upper: float = math.inf, strict: bool = True,
                 counter: Callable[[], None] | None = None) -> tuple[float, list[float], list[tuple[int, int]]] | None:
        """Minimum focus makespan; only schedules beating ``upper`` are returned.

        With ``strict`` the result must be below ``upper`` (minus a hair),
        otherwise at most ``upper``.
        """
        best: list = [None]
        limit = [upper]
        strict_now = [strict]

        def beats(value: float) -> bool:
            slack = 1e-9 * max(1.0, abs(limit[0])) if math.isfinite(limit[0]) else 0.0
            if strict_now[0]:
                return value < limit[0] - slack
            return value <= limit[0] + slack

        def rec(chosen: list[tuple[int, int]]) -> None:
            if counter is not None:
                counter()
            start = self.earliest(chosen)
            if start is None:
                return
            ms = self.makespan(start)
            if not beats(ms):
                return
            clash = None
            for a, b in self.conflicts:
                ra, rb = self.replicas[a], self.replicas[b]
                if start[a] < start[b] + rb.wcet and start[b] < start[a] + ra.wcet:
                    clash = (a, b)
                    break
            if clash is None:
                best[0] = (ms, start, list(chosen))
                # later schedules have to improve on this one
                limit[0] = ms
                strict_now[0] = True
                return
            a, b = clash
            first, second = ((a, b), (b, a)) if start[a] <= start[b] else ((b, a), (a, b))
            rec(chosen + [first])
            rec(chosen + [second])

        rec([])
        return best[0]


def _ancestors(instance: ProblemInstance) -> dict[str, set[str]]:
    preds = instance.predecessors()
    memo: dict[str, set[str]] = {}
    for tid in instance.topological_order():
        acc: set[str] = set()
        for p in preds.get(tid, []):
            acc.add(p)
            acc |= memo[p]
        memo[tid] = acc
    return memo


def resolve_schedule(instance: ProblemInstance, mapping: Mapping[str, Sequence[tuple[str, int]]],
                     theta: Mapping[tuple[str, str, str], int], focus_app: str | None = None
                     ) -> dict[tuple[str, str], float] | None:
    """Earliest start times for a fixed mapping and fixed per-ECU orderings.

    ``mapping`` gives each task's (ecu, level) placements. ``theta[(i, j, k)]
    == 0`` means ``j`` runs before ``i`` on ``k`` (``i`` starts no earlier than
    ``j`` finishes). Returns None when the orderings contradict each other or
    the precedences.
    """
    if focus_app is None and instance.applications:
        focus_app = instance.applications[0]
    timed = {t: [(k, instance.task(t).wcet_ms[(k, h)]) for k, h in places] for t, places in mapping.items()}
    sp = ScheduleProblem(instance, timed, focus_app)
    extra = []
    where = {(sp.replicas[v].task, sp.replicas[v].ecu): v for v in range(len(sp.replicas))}
    for (i, j, k), value in theta.items():
        if (i, k) not in where or (j, k) not in where or value:
            continue
        extra.append((where[(j, k)], where[(i, k)]))
    for a, b in sp.conflicts:
        ra, rb = sp.replicas[a], sp.replicas[b]
        if theta.get((ra.task, rb.task, ra.ecu), 1) and theta.get((rb.task, ra.task, ra.ecu), 1):
            raise ValueError(f"no order between {ra.task} and {rb.task} on {ra.ecu}")
    start = sp.earliest(extra)
    if start is None:
        return None
    return {(r.task, r.ecu): s for r, s in zip(sp.replicas, start)}


# --- mapping search ------------------------------------------------------------


def _one_machine_bound(jobs: Sequence[tuple[float, float, float]], extra: tuple[float, float, float]) -> float:
    """max over release thresholds of r + later-released work + smallest tail, one ECU."""
    best = 0.0
    work = 0.0
    tail = math.inf
    for r, p, q in sorted([*jobs, extra], reverse=True):
        work += p
        if q < tail:
            tail = q
        if r + work + tail > best:
            best = r + work + tail
    return best


class _Stop(Exception):
    pass


def _task_groups(model: MilpModel) -> dict[str, set[str]]:
    st = model.structure
    groups: dict[str, set[str]] = defaultdict(set)
    for v in st.x.values():
        groups[v.task].add(v.name)
    for (task, _), name in st.alpha.items():
        groups[task].add(name)
    return groups


def enumerate_replica_sets(model: MilpModel) -> dict[str, list[ReplicaSet]]:
    """Options per task that satisfy every row confined to that task's variables."""
    st = model.structure
    inst = st.instance
    groups = _task_groups(model)
    owner = {name: task for task, names in groups.items() for name in names}
    local: dict[str, list[LinearConstraint]] = defaultdict(list)
    for c in model.constraints:
        tasks = {owner.get(v) for v, _ in c.terms}
        if len(tasks) == 1 and None not in tasks:
            local[tasks.pop()].append(c)
    cost_coef = dict(next(o for o in model.objectives if o.name == "cost").terms)
    ecu_pos = {k: n for n, k in enumerate(inst.ecu_ids)}

    options: dict[str, list[ReplicaSet]] = {}
    for t in inst.tasks:
        xv = st.x_of_task(t.id)
        if t.id in st.decomposition_set:
            schemes = enumerate_schemes(t.asil)
        else:
            schemes = [DecompositionScheme.trivial(t.asil)]
        found = []
        for scheme in schemes:
            levels = scheme.levels()
            by_level = {h: sorted((v for v in xv if v.level == h and v.live), key=lambda v: ecu_pos[v.ecu])
                        for h in set(levels)}
            for combo in _injective(levels, by_level):
                values = {name: 0.0 for name in groups[t.id]}
                for v in combo:
                    values[v.name] = 1.0
                for h in LEVELS:
                    if (t.id, h) in st.alpha:
                        values[st.alpha[(t.id, h)]] = float(scheme.alpha[h - 1])
                if all(c.satisfied(values) for c in local[t.id]):
                    combo = tuple(sorted(combo, key=lambda v: ecu_pos[v.ecu]))
                    found.append(ReplicaSet(t.id, scheme, combo,
                                            math.fsum(cost_coef.get(v.name, 0.0) for v in combo),
                                            max(v.wcet for v in combo)))
        options[t.id] = found
    return options


def _injective(levels: list[int], by_level: Mapping[int, list[XVar]]) -> Iterable[tuple[XVar, ...]]:
    """Distinct-ECU choices, one var per level entry; equal levels in ECU order."""
    def rec(n: int, used: frozenset[str], last: dict[int, int]) -> Iterable[tuple[XVar, ...]]:
        if n == len(levels):
            yield ()
            return
        h = levels[n]
        cands = by_level[h]
        for idx in range(last.get(h, -1) + 1, len(cands)):
            v = cands[idx]
            if v.ecu in used:
                continue
            for rest in rec(n + 1, used | {v.ecu}, {**last, h: idx}):
                yield (v,) + rest
    yield from rec(0, frozenset(), {})


class _Search:
    def __init__(self, model: MilpModel, limits: SolveLimits,
                 on_node: Callable[[SearchNode], None] | None):
        self.model = model
        self.st = model.structure
        self.inst = self.st.instance
        self.limits = limits
        self.on_node = on_node
        self.t0 = time.perf_counter()
        self.nodes = 0
        self.deepest = 0
        self.order = self.inst.topological_order()
        self.options = enumerate_replica_sets(model)
        self.focus = {t.id for t in self.inst.tasks if t.application_id == self.st.focus_app}
        self.preds = self.inst.predecessors()
        self.wcrt = self.inst.edge_map()
        self.ancestors = _ancestors(self.inst)
        self.pred_wcrt = {t: [(p, self.wcrt[(p, t)]) for p in self.preds.get(t, [])] for t in self.order}
        self._rows()
        self._static_bounds()

    # ---- shared rows (memory and any other cross-task binary rows) ----
    def _rows(self) -> None:
        groups = _task_groups(self.model)
        owner = {name: task for task, names in groups.items() for name in names}
        rows: list[tuple[dict[str, float], float]] = []
        for c in self.model.constraints:
            tasks = {owner.get(v) for v, _ in c.terms}
            if None in tasks or len(tasks) < 2:
                continue
            coef = dict(c.terms)
            if c.sense in ("<=", "="):
                rows.append((coef, c.rhs))
            if c.sense in (">=", "="):
                rows.append(({v: -a for v, a in coef.items()}, -c.rhs))
        self.rows = rows
        self.contrib: dict[int, dict[int, float]] = {}
        for tid, opts in self.options.items():
            for opt in opts:
                d: dict[int, float] = {}
                for r, (coef, _) in enumerate(rows):
                    s = sum(coef.get(v.name, 0.0) for v in opt.xvars)
                    # alpha variables have no cross-task rows in built models
                    if s:
                        d[r] = s
                self.contrib[id(opt)] = d
        n = len(self.order)
        self.row_suffix = [[0.0] * len(rows) for _ in range(n + 1)]
        for pos in range(n - 1, -1, -1):
            tid = self.order[pos]
            for r in range(len(rows)):
                m = min((self.contrib[id(o)].get(r, 0.0) for o in self.options[tid]), default=0.0)
                self.row_suffix[pos][r] = self.row_suffix[pos + 1][r] + m

    def _static_bounds(self) -> None:
        n = len(self.order)
        self.min_cost = {t: min((o.cost for o in opts), default=math.inf) for t, opts in self.options.items()}
        self.cost_suffix = [0.0] * (n + 1)
        for pos in range(n - 1, -1, -1):
            self.cost_suffix[pos] = self.cost_suffix[pos + 1] + self.min_cost[self.order[pos]]
        self.min_chain = {t: min((o.chain_wcet for o in opts), default=0.0) for t, opts in self.options.items()}
        succ = self.inst.successors()
        self.tail: dict[str, float] = {}
        for tid in reversed(self.order):
            best = -math.inf
            for s in succ.get(tid, []):
                through = self.min_chain[s] + max(0.0 if s in self.focus else -math.inf, self.tail[s])
                best = max(best, through)
            self.tail[tid] = best
        # time that must follow a task before the focus app can be done; None if irrelevant
        self.job_tail: dict[str, float | None] = {}
        for tid in self.order:
            q = max(0.0 if tid in self.focus else -math.inf, self.tail[tid])
            self.job_tail[tid] = q if q > -math.inf else None
        head: dict[str, float] = {}
        for tid in self.order:
            head[tid] = max((head[p] + self.min_chain[p] for p in self.preds.get(tid, [])), default=0.0)
        self.static_latency = max((head[t] + self.min_chain[t] for t in self.focus), default=0.0)

    def tick(self) -> None:
        self.nodes += 1
        if self.limits.node_limit is not None and self.nodes > self.limits.node_limit:
            raise _Stop
        if self.limits.time_limit is not None and self.nodes % 64 == 0:
            if time.perf_counter() - self.t0 > self.limits.time_limit:
                raise _Stop

    def timed_out(self) -> bool:
        return self.limits.time_limit is not None and time.perf_counter() - self.t0 > self.limits.time_limit

    def schedule(self, chosen: Mapping[str, ReplicaSet]) -> ScheduleProblem:
        mapping = {t: [(v.ecu, v.wcet) for v in opt.xvars] for t, opt in chosen.items()}
        return ScheduleProblem(self.inst, mapping, self.st.focus_app, self.ancestors)

    def run_stage(self, objective: str, cost_cap: float | None, latency_cap: float | None
                  ) -> tuple[float, dict[str, ReplicaSet], tuple | None, list[float]] | None:
        """Minimize ``objective`` ("cost" or "makespan") subject to optional caps."""
        order = self.order
        n = len(order)
        rows = self.rows
        activity = [0.0] * len(rows)
        chosen: dict[str, ReplicaSet] = {}
        finish: dict[str, list[tuple[str, float]]] = {}  # task -> [(ecu, finish)] lower bounds
        # per ECU: (release, wcet, tail) of replicas that lie on a path to the focus app
        jobs: dict[str, list[tuple[float, float, float]]] = defaultdict(list)
        best_val = [math.inf]
        best: list = [None]
        history: list[float] = []
        use_latency = objective == "makespan" or latency_cap is not None

        def sort_key(o: ReplicaSet):
            return (o.chain_wcet, o.cost) if objective == "makespan" else (o.cost, o.chain_wcet)

        ordered = {t: sorted(opts, key=sort_key) for t, opts in self.options.items()}

        def cost_ok(value: float) -> bool:
            if objective == "cost" and value >= best_val[0] - COST_EPS:
                return False
            return cost_cap is None or value <= cost_cap + COST_EPS

        def latency_ok(value: float) -> bool:
            if objective == "makespan" and value >= best_val[0] - 1e-9 * max(1.0, best_val[0]):
                return False
            return latency_cap is None or value <= latency_cap + 1e-9 * max(1.0, latency_cap)

        def leaf(cost: float) -> None:
            sched = None
            if use_latency:
                sp = self.schedule(chosen)
                if objective == "makespan":
                    res = sp.optimize(best_val[0], strict=True, counter=self.tick)
                    if res is None:
                        return
                    value = res[0]
                else:
                    res = sp.optimize(latency_cap, strict=False, counter=self.tick)
                    if res is None:
                        return
                    value = cost
                sched = (sp, res)
            else:
                value = cost
            best_val[0] = value
            best[0] = (dict(chosen), sched)
            history.append(value)

        def latency_bound(tid: str, opt: ReplicaSet) -> tuple[float, list[tuple[str, float]]]:
            fins = []
            arrivals = [(finish[p], w) for p, w in self.pred_wcrt[tid]]
            for v in opt.xvars:
                est = 0.0
                for hosts, w in arrivals:
                    for ecu, f in hosts:
                        t = f + w if ecu != v.ecu else f
                        if t > est:
                            est = t
                fins.append((v.ecu, est + v.wcet))
            return max(f for _, f in fins), fins

        def evaluate(pos: int, idx: int, opt: ReplicaSet, cost: float, lat_lb: float):
            """Child bounds, or None when the option is pruned or does not fit."""
            new_cost = cost + opt.cost
            cost_lb = new_cost + self.cost_suffix[pos + 1]
            if not cost_ok(cost_lb):
                return None
            contrib = self.contrib[id(opt)]
            for r, a in contrib.items():
                if activity[r] + a + self.row_suffix[pos + 1][r] > rows[r][1] + 1e-9 * max(1.0, abs(rows[r][1])):
                    return None
            new_lat = lat_lb
            fins: list[tuple[str, float]] = []
            if use_latency:
                tid = opt.task
                top, fins = latency_bound(tid, opt)
                if tid in self.focus:
                    new_lat = max(new_lat, top)
                if self.tail[tid] > -math.inf:
                    new_lat = max(new_lat, top + self.tail[tid])
                if not latency_ok(new_lat):
                    return None
                q = self.job_tail[tid]
                if q is not None:
                    for v, (e, f) in zip(opt.xvars, fins):
                        new_lat = max(new_lat, _one_machine_bound(jobs[e], (f - v.wcet, v.wcet, q)))
                        if not latency_ok(new_lat):
                            return None
            return idx, opt, new_cost, cost_lb, new_lat, fins

        def rec(pos: int, cost: float, lat_lb: float) -> None:
            if pos > self.deepest:
                self.deepest = pos
            if pos == n:
                leaf(cost)
                return
            tid = order[pos]
            if objective == "cost":
                children = (evaluate(pos, idx, opt, cost, lat_lb) for idx, opt in enumerate(ordered[tid]))
            else:
                # best-bound-first among siblings
                children = [c for c in (evaluate(pos, idx, opt, cost, lat_lb)
                                        for idx, opt in enumerate(ordered[tid])) if c is not None]
                children.sort(key=lambda c: (c[4], c[2]))
            for child in children:
                if child is None:
                    continue
                idx, opt, new_cost, cost_lb, new_lat, fins = child
                if not cost_ok(cost_lb):
                    if objective == "cost":
                        break  # cost-sorted options: the rest cannot do better
                    continue
                if use_latency and not latency_ok(new_lat):
                    if objective == "makespan":
                        break  # bound-sorted children
                    continue
                self.tick()
                if self.on_node is not None:
                    self.on_node(SearchNode(pos, tid, idx, cost_lb, new_lat))
                contrib = self.contrib[id(opt)]
                for r, a in contrib.items():
                    activity[r] += a
                chosen[tid] = opt
                if use_latency:
                    finish[tid] = fins
                    if self.job_tail[tid] is not None:
                        for v, (e, f) in zip(opt.xvars, fins):
                            jobs[e].append((f - v.wcet, v.wcet, self.job_tail[tid]))
                rec(pos + 1, new_cost, new_lat)
                for r, a in contrib.items():
                    activity[r] -= a
                del chosen[tid]
                if use_latency:
                    del finish[tid]
                    if self.job_tail[tid] is not None:
                        for e, _ in fins:
                            jobs[e].pop()

        self.stopped = False
        try:
            rec(0, 0.0, self.static_latency if use_latency else 0.0)
        except _Stop:
            self.stopped = True
        if best[0] is None:
            return None
        chosen_best, sched = best[0]
        return best_val[0], chosen_best, sched, history


def solve(model: MilpModel, limits: SolveLimits | None = None,
          on_node: Callable[[SearchNode], None] | None = None) -> SolveReport:
    """Lexicographic solve: stage 1 on the priority objective, stage 2 on the other."""
    limits = limits or SolveLimits()
    search = _Search(model, limits, on_node)
    names = [o.name for o in model.objectives]
    report = SolveReport(Status.INFEASIBLE, objective_names=names)

    empty = [t for t in search.order if not search.options[t]]
    if empty:
        report.message = f"task {empty[0]} has no admissible decomposition/placement"
        report.wall_time = time.perf_counter() - search.t0
        return report

    first = search.run_stage(names[0], None, None)
    stopped = search.stopped
    report.stage_nodes.append(search.nodes)
    if first is None:
        report.status = Status.TIMEOUT if stopped else Status.INFEASIBLE
        if stopped:
            report.message = "no feasible allocation found before the limit"
        else:
            stuck = search.order[min(search.deepest, len(search.order) - 1)]
            report.message = f"no feasible allocation; no admissible placement for task {stuck}"
        report.nodes = search.nodes
        report.wall_time = time.perf_counter() - search.t0
        return report
    v1, chosen, sched, hist1 = first
    report.incumbents.append(hist1)
    result = (v1, chosen, sched)
    if not stopped:
        if names[0] == "cost":
            second = search.run_stage("makespan", v1, None)
        else:
            eps = 1e-6 * abs(v1)
            second = search.run_stage("cost", None, v1 + eps)
        report.stage_nodes.append(search.nodes - report.stage_nodes[0])
        if second is not None:
            result = second[:3]
            report.incumbents.append(second[3])
        stopped = search.stopped
        report.status = Status.TIMEOUT if stopped else Status.OPTIMAL
        if second is None and not stopped:
            raise RuntimeError("stage 2 lost the stage-1 solution")
    else:
        report.status = Status.TIMEOUT

    v_last, chosen, sched = result
    if sched is None:
        sp = search.schedule(chosen)
        sched = (sp, sp.optimize(counter=None))
    values, solution = _assemble(model, chosen, sched)
    bad = model.violations(values)
    if bad:
        raise RuntimeError(f"solver produced an assignment violating {len(bad)} rows, first: {bad[0]}")
    report.values = values
    report.solution = solution
    report.objective_values = [o.value(values) for o in model.objectives]
    report.nodes = search.nodes
    report.wall_time = time.perf_counter() - search.t0
    return report


def _assemble(model: MilpModel, chosen: Mapping[str, ReplicaSet], sched) -> tuple[dict[str, float], AllocationSolution]:
    st = model.structure
    inst = st.instance
    sp, (ms, start, arcs) = sched
    values = {name: 0.0 for name in model.variables}
    placed: dict[tuple[str, str], int] = {}
    for v_idx, r in enumerate(sp.replicas):
        placed[(r.task, r.ecu)] = v_idx
    placements = []
    schemes: dict[str, tuple[int, int, int, int]] = {}
    cost = 0.0
    for tid in inst.task_ids:
        opt = chosen[tid]
        for v in opt.xvars:
            values[v.name] = 1.0
            s = start[placed[(tid, v.ecu)]]
            if (tid, v.ecu) in st.tau:
                values[st.tau[(tid, v.ecu)]] = s
            placements.append(Placement(tid, v.ecu, v.level, s))
            cost += v.cost
        for h in LEVELS:
            if (tid, h) in st.alpha:
                values[st.alpha[(tid, h)]] = float(opt.scheme.alpha[h - 1])
        schemes[tid] = opt.scheme.alpha
    for name in st.tau.values():
        values.setdefault(name, 0.0)

    deps = set(inst.edge_map())
    ordering: dict[tuple[str, str, str], int] = {}
    for (i, j, k), name in st.theta.items():
        if (i, j) in deps:
            val = 1
        else:
            a, b = placed.get((i, k)), placed.get((j, k))
            if a is not None and b is not None:
                # replicas on one ECU never overlap, so starts are distinct
                val = 1 if start[a] < start[b] else 0
            elif a is not None:
                val = 0
            else:
                val = 1
        values[name] = float(val)
        a, b = placed.get((i, k)), placed.get((j, k))
        if a is not None and b is not None:
            ordering[(i, j, k)] = val
    values[st.phi] = ms
    makespan = {st.focus_app: ms}
    solution = AllocationSolution(placements, schemes, cost, makespan, ordering)
    return values, solution
