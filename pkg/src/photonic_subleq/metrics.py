"""Cycle time, thread throughput and instruction statistics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .assembler import CPI
from .cpu import TRACE_HEADER, TraceRecord
from .isa import RAW
from .logic import LutNetwork
from .memory import NOMINAL_C, MemoryBank


@dataclass(frozen=True)
class TimingModel:
    """Time-of-flight cycle model: the cycle lasts as long as light needs for ``l_max_m``."""

    l_max_m: float
    group_index: float = 2.0
    thread_spacing_ps: float = 1.0
    c: float = NOMINAL_C

    def __post_init__(self) -> None:
        if self.group_index < 1.0:
            raise ValueError("group index must be >= 1")
        if self.l_max_m <= 0:
            raise ValueError("l_max must be positive")


def cycle_time(model: TimingModel) -> float:
    """Cycle time in ns."""
    return model.l_max_m * model.group_index / model.c * 1e9


def throughput(model: TimingModel, thread_count: int) -> float:
    """Retired instructions per second with ``thread_count`` pipelined threads."""
    t_ns = cycle_time(model)
    if thread_count < 1:
        raise ValueError("thread_count must be >= 1")
    if thread_count * model.thread_spacing_ps > t_ns * 1000.0 * (1 + 1e-9):
        raise ValueError(
            f"{thread_count} threads at {model.thread_spacing_ps} ps do not fit a {t_ns:g} ns cycle")
    return thread_count / (t_ns * 1e-9)


def max_threads(model: TimingModel) -> int:
    return int(math.floor(cycle_time(model) * 1000.0 / model.thread_spacing_ps * (1 + 1e-9)))


def derive_l_max(network: LutNetwork | None = None, banks: Iterable[MemoryBank] = (),
                 extra_m: float = 0.0) -> float:
    """Longest path: LPU logic depth + the farthest memory round trip + fixed extras."""
    lpu = network.longest_path_m() if network is not None else 0.0
    memory = max((2.0 * b.distance_m for b in banks), default=0.0)
    return lpu + memory + extra_m


@dataclass
class InstructionStats:
    counts: dict[str, int]
    cpi: dict[str, int]
    t_ins: dict[str, int]

    @property
    def total_quads(self) -> int:
        return sum(self.t_ins.values())

    def rows(self) -> list[tuple[str, int, int, int]]:
        order = sorted(self.counts, key=lambda m: (-self.t_ins[m], m))
        return [(m, self.counts[m], self.cpi[m], self.t_ins[m]) for m in order]

    def dominant(self) -> str | None:
        rows = self.rows()
        return rows[0][0] if rows else None

    def render(self) -> str:
        lines = [f"{'mnemonic':<10}{'n_ins':>8}{'CPI':>5}{'t_ins':>8}"]
        for m, n, cpi, t in self.rows():
            lines.append(f"{m:<10}{n:>8}{cpi:>5}{t:>8}")
        return "\n".join(lines) + "\n"

    def metric_lines(self) -> list[str]:
        out = []
        for m, n, _cpi, t in self.rows():
            out.append(format_metric(f"n_ins.{m}", n, "instr"))
            out.append(format_metric(f"t_ins.{m}", t, "cycles"))
        out.append(format_metric("quads", self.total_quads, "cycles"))
        return out


def stats_report(records: Iterable[TraceRecord], debug: Sequence[str] | None = None) -> InstructionStats:
    """Attribute retired quads to their source mnemonic.

    Without a debug map every quad counts as a raw ``SUBLEQ``.  Jumps only
    land on macro boundaries, so the instruction count is the quad count
    divided by the macro's CPI (rounded up for a run cut off mid-macro).
    """
    quads: Counter[str] = Counter()
    for rec in records:
        mn = debug[rec.ip] if debug is not None else RAW
        quads["SUBLEQ" if mn == RAW else mn] += 1
    cpi = {m: CPI.get(m, 1) for m in quads}
    counts = {m: -(-q // cpi[m]) for m, q in quads.items()}
    return InstructionStats(counts, cpi, dict(quads))


def parse_trace(text: str) -> list[TraceRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or line == TRACE_HEADER:
            continue
        f = line.split(",")
        if len(f) != 11:
            raise ValueError(f"trace line {lineno}: expected 11 fields, got {len(f)}")
        records.append(TraceRecord(int(f[0]), int(f[1]), int(f[2], 16), int(f[3], 16), int(f[4], 16),
                                   int(f[5], 16), int(f[6]), int(f[7]), int(f[8]), f[9] == "1", int(f[10], 16)))
    return records


def format_metric(name: str, value, unit: str = "") -> str:
    if isinstance(value, float):
        text = f"{value:.6g}" if abs(value) >= 1e6 or (value and abs(value) < 1e-3) else f"{value:.3f}"
    else:
        text = str(value)
    return f"{name}={text} {unit}".rstrip()
