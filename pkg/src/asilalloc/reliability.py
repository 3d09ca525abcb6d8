"""Random hardware failure metrics (PMHF) for single and redundant deployments."""

from __future__ import annotations

import logging
import math
from typing import Sequence

from .instance import Asil

logger = logging.getLogger(__name__)

#: Random hardware failure targets in failures per hour. ASIL A has none.
PMHF_TARGETS: dict[Asil, float] = {
    Asil.D: 1e-8,
    Asil.C: 1e-7,
    Asil.B: 1e-7,
}


def pof(failure_rate: float, t: float) -> float:
    """Probability of failure within ``t`` hours at a constant failure rate."""
    if not failure_rate > 0 or not t > 0:
        raise ValueError(f"failure rate and lifetime must be positive (got {failure_rate}, {t})")
    return -math.expm1(-failure_rate * t)


def pof_decomposed(ecu_failure_rates: Sequence[float], t: float) -> float:
    """Parallel-system PoF: every hosting ECU has to fail."""
    if not ecu_failure_rates:
        raise ValueError("need at least one hosting ECU")
    return math.prod(pof(rate, t) for rate in ecu_failure_rates)


def pmhf_target(asil: Asil | int) -> float | None:
    return PMHF_TARGETS.get(Asil(int(asil)))


def pof_budget(asil: Asil | int, t: float) -> float | None:
    target = pmhf_target(asil)
    return None if target is None else pof(target, t)


def check_pmhf(task_asil: Asil | int, hosting_failure_rates: Sequence[float], t: float) -> bool:
    """Product-form PMHF check against the budget of the original task ASIL."""
    budget = pof_budget(task_asil, t)
    if budget is None:
        logger.debug("no PMHF target defined for ASIL %s; check passes", Asil(int(task_asil)).name)
        return True
    return pof_decomposed(hosting_failure_rates, t) <= budget


def log_pof_coefficient(failure_rate: float, t: float) -> float:
    """ln(PoF) of one ECU; the per-replica coefficient of the linear PMHF row."""
    return math.log(pof(failure_rate, t))


def log_pof_budget(asil: Asil | int, t: float) -> float | None:
    target = pmhf_target(asil)
    return None if target is None else log_pof_coefficient(target, t)


def check_pmhf_linear(task_asil: Asil | int, hosting_failure_rates: Sequence[float], t: float) -> bool:
    """Same check as :func:`check_pmhf` in log space, as the MILP row sees it."""
    rhs = log_pof_budget(task_asil, t)
    if rhs is None:
        return True
    if not hosting_failure_rates:
        raise ValueError("need at least one hosting ECU")
    return math.fsum(log_pof_coefficient(r, t) for r in hosting_failure_rates) <= rhs
