"""CPLEX-style LP text export of a :class:`MilpModel`."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, TextIO

from .milp import MilpModel, VarKind

#: Token left in stage-2 templates until the stage-1 optimum is known.
STAGE1_BOUND_PLACEHOLDER = "<STAGE1_BOUND>"

_MAX_LINE = 240


def _fmt(c: float) -> str:
    return f"{c:.17g}"


def _expr(terms: Iterable[tuple[str, float]]) -> list[str]:
    parts = []
    for n, (name, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1.0 else f"{_fmt(mag)} {name}"
        parts.append(f"{sign} {body}" if n or sign == "-" else body)
    return parts


def _wrap(head: str, parts: list[str], tail: str) -> list[str]:
    lines, cur = [], head
    for p in parts + [tail]:
        if len(cur) + len(p) + 1 > _MAX_LINE:
            lines.append(cur)
            cur = "   " + p
        else:
            cur = f"{cur} {p}" if cur else p
    lines.append(cur)
    return lines


def write_lp(model: MilpModel, out: TextIO, stage: int = 1, stage1_bound: float | str | None = None) -> None:
    """Write one lexicographic stage.

    Stage 1 minimizes the priority objective. Stage 2 minimizes the other
    objective with the priority objective bounded by ``stage1_bound``; when the
    bound is unknown the placeholder token is written instead.
    """
    if stage not in (1, 2):
        raise ValueError("stage must be 1 or 2")
    primary, secondary = model.objectives
    objective = primary if stage == 1 else secondary
    w = out.write
    inst = model.structure.instance
    w(f"\\ allocation model {inst.name or ''} stage {stage}\n".replace("  ", " "))
    w(f"\\ objectives in priority order: {primary.name}, {secondary.name}; big M = {_fmt(model.big_m)}\n")
    w("Minimize\n")
    terms = [t for t in objective.terms if t[1] != 0.0] or [(next(iter(model.variables)), 0.0)]
    obj_parts = _expr(terms) if any(c for _, c in terms) else [f"0 {terms[0][0]}"]
    for line in _wrap(f" obj_{objective.name}:", obj_parts, ""):
        w(line.rstrip() + "\n")
    w("Subject To\n")
    last_tag = None
    for n, c in enumerate(model.constraints):
        if c.tag != last_tag:
            w(f"\\ {c.tag}\n")
            last_tag = c.tag
        if not c.terms:
            w(f"\\ c{n}_{c.tag} has no variables (rhs {_fmt(c.rhs)})\n")
            continue
        for line in _wrap(f" c{n}_{c.tag}:", _expr(c.terms), f"{c.sense} {_fmt(c.rhs)}"):
            w(line + "\n")
    if stage == 2:
        bound = STAGE1_BOUND_PLACEHOLDER if stage1_bound is None else (
            stage1_bound if isinstance(stage1_bound, str) else _fmt(float(stage1_bound)))
        w(f"\\ stage1: {primary.name} held at its stage-1 optimum\n")
        parts = _expr([t for t in primary.terms if t[1] != 0.0])
        for line in _wrap(" stage1_bound:", parts, f"<= {bound}"):
            w(line + "\n")
    w("Bounds\n")
    for v in model.variables.values():
        if v.kind is VarKind.BINARY:
            continue
        hi = "+inf" if math.isinf(v.hi) else _fmt(v.hi)
        if v.lo == 0.0 and math.isinf(v.hi):
            continue
        w(f" {_fmt(v.lo)} <= {v.name} <= {hi}\n")
    generals = [v.name for v in model.variables.values() if v.kind is VarKind.INTEGER]
    binaries = [v.name for v in model.variables.values() if v.kind is VarKind.BINARY]
    if generals:
        w("General\n")
        for line in _wrap("", generals, ""):
            w(" " + line.strip() + "\n")
    if binaries:
        w("Binary\n")
        for line in _wrap("", binaries, ""):
            w(" " + line.strip() + "\n")
    w("End\n")


def export_lp(model: MilpModel, path: str | Path, stage: int = 1, stage1_bound: float | str | None = None) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        write_lp(model, fh, stage, stage1_bound)
    return path


def export_stages(model: MilpModel, out_dir: str | Path, stem: str = "model",
                  stage1_bound: float | None = None) -> tuple[Path, Path]:
    """Write ``<stem>_stage1.lp`` and the ``<stem>_stage2.lp`` template."""
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise NotADirectoryError(str(out_dir))
    first = export_lp(model, out_dir / f"{stem}_stage1.lp", 1)
    second = export_lp(model, out_dir / f"{stem}_stage2.lp", 2, stage1_bound)
    return first, second


def fill_stage1_bound(text: str, value: float) -> str:
    return text.replace(STAGE1_BOUND_PLACEHOLDER, _fmt(value))
