"""ASIL decomposition schemes: integer splits of a task ASIL into redundant parts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .instance import LEVELS, Asil, Ecu


@dataclass(frozen=True, order=True)
class DecompositionScheme:
    """Counts of redundant subtasks per level, ``alpha[h-1]`` for ASIL h."""

    alpha: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.alpha) != 4 or any(a < 0 for a in self.alpha):
            raise ValueError(f"alpha must be 4 non-negative counts, got {self.alpha}")
        if sum(self.alpha) < 1:
            raise ValueError("a scheme needs at least one replica")

    @property
    def value(self) -> int:
        return sum(a * h for a, h in zip(self.alpha, LEVELS))

    @property
    def replicas(self) -> int:
        return sum(self.alpha)

    def levels(self) -> list[int]:
        """One entry per replica, highest level first."""
        return [h for h in reversed(LEVELS) for _ in range(self.alpha[h - 1])]

    @property
    def is_trivial(self) -> bool:
        return self.replicas == 1

    def __str__(self) -> str:
        parts = []
        for h in reversed(LEVELS):
            n = self.alpha[h - 1]
            if n:
                name = Asil(h).name
                parts.append(name if n == 1 else f"{n}x{name}")
        return "+".join(parts)

    @classmethod
    def trivial(cls, asil: int) -> DecompositionScheme:
        alpha = [0, 0, 0, 0]
        alpha[int(asil) - 1] = 1
        return cls(tuple(alpha))  # type: ignore[arg-type]


def enumerate_schemes(original: Asil | int) -> list[DecompositionScheme]:
    """All alpha with sum(alpha_h * h) == value(original), D-heavy schemes first."""
    value = int(original)
    if value == 0:
        raise ValueError("nothing to decompose: QM carries no safety requirement")
    if not 1 <= value <= 4:
        raise ValueError(f"ASIL value out of range: {value}")
    found = [
        DecompositionScheme(alpha)  # type: ignore[arg-type]
        for alpha in itertools.product(range(value + 1), repeat=4)
        if sum(a * h for a, h in zip(alpha, LEVELS)) == value
    ]
    found.sort(key=lambda s: s.alpha[::-1], reverse=True)
    return found


def scheme_fits(scheme: DecompositionScheme, ecu_levels: Sequence[int]) -> bool:
    """Whether the replicas can sit on pairwise distinct ECUs of sufficient ASIL."""
    if scheme.replicas > len(ecu_levels):
        return False
    for h in LEVELS:
        need = sum(scheme.alpha[g - 1] for g in LEVELS if g >= h)
        have = sum(1 for lvl in ecu_levels if lvl >= h)
        if need > have:
            return False
    return True


def filter_compatible(schemes: Iterable[DecompositionScheme], ecus: Sequence[Ecu]) -> list[DecompositionScheme]:
    if not ecus:
        raise ValueError("filter_compatible needs at least one ECU")
    levels = [int(e.asil) for e in ecus]
    return [s for s in schemes if scheme_fits(s, levels)]
