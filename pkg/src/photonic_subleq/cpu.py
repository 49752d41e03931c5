"""Cycle-level SUBLEQ machine with time-multiplexed threads.

Every live thread retires exactly one instruction per cycle.  Threads are
serviced in ascending id (their slot order in the delay line); all of them
read the state committed at the end of the previous cycle, and their
writes commit together at the cycle boundary.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, TextIO

from .isa import HALT, MachineConfig, Operand, ProgramImage, signed_leq_zero, sub_mod
from .logic import GateLevelAlu, SignalParams, propagate_levels
from .memory import (
    NOMINAL_C,
    DelayLineRegister,
    MemoryFault,
    MemoryMap,
    MemorySystem,
    default_memory_map,
)

TRACE_HEADER = "cycle,thread,ip,aA,aB,aC,valA,valB,result,branch,ip_next"


class AluMode(Enum):
    BEHAVIORAL = "behavioral"
    GATE_LEVEL = "gate"


@dataclass(frozen=True)
class ExecMode:
    alu: AluMode = AluMode.BEHAVIORAL
    signal_check: bool = False


class InstructionFault(Exception):
    def __init__(self, message: str, cycle: int, thread: int, ip: int):
        super().__init__(f"{message} [cycle={cycle}, thread={thread}, ip={ip}]")
        self.cycle, self.thread, self.ip = cycle, thread, ip


class AluMismatch(AssertionError):
    pass


class OverSubscription(ValueError):
    pass


@dataclass
class ThreadContext:
    id: int
    live: bool = False
    halted: bool = False


@dataclass(frozen=True)
class TraceRecord:
    cycle: int
    thread: int
    ip: int
    a: int
    b: int
    c: int
    val_a: int
    val_b: int
    result: int
    branch: bool
    ip_next: int

    def line(self) -> str:
        return (f"{self.cycle},{self.thread},{self.ip:x},{self.a:x},{self.b:x},{self.c:x},"
                f"{self.val_a},{self.val_b},{self.result},{int(self.branch)},{self.ip_next:x}")


@dataclass
class CycleReport:
    cycle: int
    records: list[TraceRecord]
    halted: list[int]

    @property
    def retired(self) -> int:
        return len(self.records)


@dataclass
class RunReport:
    status: str  # "halted" | "cycle-limit"
    cycles: int
    mmio: list[int]
    retired: int
    warnings: list[str] = field(default_factory=list)

    @property
    def halted(self) -> bool:
        return self.status == "halted"


class Machine:
    """Loaded image plus memory, IP delay-line register and thread contexts."""

    def __init__(self, image: ProgramImage, config: MachineConfig | None = None, *,
                 memory_map: MemoryMap | None = None, mode: ExecMode = ExecMode(),
                 cycle_time_ns: float = 1.0, fault_unwritten: bool = False,
                 trace: TextIO | None = None, keep_records: bool = True):
        image.validate()
        h = image.header
        if config is None:
            config = h.machine_config()
        if (config.word_width_bits, config.data_addr_width_bits, config.instr_addr_width_bits) != (
                h.word_width_bits, h.data_addr_width_bits, h.instr_addr_width_bits):
            raise ValueError("machine widths differ from the image header")
        config.check_timing(cycle_time_ns * 1000.0)
        self.image = image
        self.config = config
        self.width = config.word_width_bits
        self.program = image.instructions
        self.mode = mode
        self.cycle_time_ns = cycle_time_ns
        mm = memory_map or default_memory_map(config.data_addr_width_bits)
        self.memory: MemorySystem = mm.build(
            config.word_width_bits, config.data_addr_width_bits, cow_enabled=config.cow_enabled,
            rworm_mode=config.rworm_mode, fault_unwritten=fault_unwritten)
        for addr, value in image.data:
            self.memory.load(addr, value)
        # loop cut to 90% of a cycle, the rest is the tunable trim
        self.ip_reg = DelayLineRegister(config.thread_count, length_m=0.9 * cycle_time_ns * 1e-9 * NOMINAL_C / 2.0)
        self.ip_reg.tune(cycle_time_ns * 1000.0)
        self.threads = [ThreadContext(i) for i in range(config.thread_count)]
        self.cycle = 0
        self.retired = 0
        self.records: list[TraceRecord] = []
        self.keep_records = keep_records
        self.trace = trace
        self._header_written = False
        self.alu = None
        if mode.alu is AluMode.GATE_LEVEL:
            self.alu = GateLevelAlu(self.width)
            if mode.signal_check:
                params = SignalParams()
                propagate_levels(self.alu.subtractor, params.nominal, params)
                propagate_levels(self.alu.leq, params.nominal, params)

    # -- threads
    def spawn_threads(self, entry_points: Iterable[int]) -> None:
        entries = list(entry_points)
        if len(entries) > self.config.thread_count:
            raise OverSubscription(f"{len(entries)} threads requested, {self.config.thread_count} slots available")
        for tid, ip in enumerate(entries):
            self.ip_reg.load(tid, ip)
            self.threads[tid].live = True
            self.threads[tid].halted = False

    @property
    def live_threads(self) -> list[ThreadContext]:
        return [t for t in self.threads if t.live]

    # -- execution
    def _address(self, op: Operand, thread: int) -> int:
        if op.indirect:
            return self.memory.read(op.addr, thread)
        return op.addr

    def _emit(self, line: str) -> None:
        if self.trace is not None:
            if not self._header_written:
                self.trace.write(TRACE_HEADER + "\n")
                self._header_written = True
            self.trace.write(line + "\n")

    def step_cycle(self) -> CycleReport:
        live = self.live_threads
        if not live:
            raise RuntimeError("no live thread")
        records = []
        halted = []
        mem = self.memory
        for t in live:
            ip = self.ip_reg.read(t.id)
            if not 0 <= ip < len(self.program):
                raise InstructionFault(f"fetch from invalid address {ip:#x}", self.cycle, t.id, ip)
            ins = self.program[ip]
            try:
                a = self._address(ins.a, t.id)
                b = self._address(ins.b, t.id)
                c = self._address(ins.c, t.id)
                va = mem.read(a, t.id)
                vb = mem.read(b, t.id)
                r = sub_mod(va, vb, self.width)
                branch = signed_leq_zero(r, self.width)
                if self.alu is not None:
                    gr, gb = self.alu.sub(va, vb), self.alu.leq_zero(r)
                    if (gr, gb) != (r, branch):
                        raise AluMismatch(f"gate-level ALU gave {(gr, gb)}, behavioral {(r, branch)}")
                mem.write(c, r, ins.c.cow, t.id, ip)
            except MemoryFault as exc:
                mem.pending.clear()
                raise exc.with_context(self.cycle, t.id, ip)
            nxt = ins.j if branch else ip + 1
            self.ip_reg.write(t.id, nxt)
            if nxt == HALT:
                halted.append(t.id)
            records.append(TraceRecord(self.cycle, t.id, ip, a, b, c, va, vb, r, branch, nxt))
        try:
            mem.commit()
        except MemoryFault as exc:
            raise exc.with_context(cycle=self.cycle)
        self.ip_reg.tick()
        for tid in halted:
            self.threads[tid].live = False
            self.threads[tid].halted = True
        report = CycleReport(self.cycle, records, halted)
        assert report.retired == len(live), "one-cycle contract violated"
        for rec in records:
            self._emit(rec.line())
        if self.keep_records:
            self.records.extend(records)
        self.retired += len(records)
        self.cycle += 1
        mem.now_ns = self.cycle * self.cycle_time_ns
        return report

    def run(self, max_cycles: int = 100_000) -> RunReport:
        if not any(t.live or t.halted for t in self.threads):
            self.spawn_threads([0])
        while self.live_threads and self.cycle < max_cycles:
            self.step_cycle()
        status = "cycle-limit" if self.live_threads else "halted"
        self._emit(f"#{'halt' if status == 'halted' else 'limit'} cycles={self.cycle}")
        return RunReport(status, self.cycle, list(self.memory.mmio_output), self.retired,
                         list(self.memory.warnings))

    def read_word(self, addr: int) -> int:
        """Debug peek through the COW remap."""
        return self.memory.read(addr)


def run_image(image: ProgramImage, max_cycles: int = 100_000, **kwargs) -> tuple[Machine, RunReport]:
    m = Machine(image, **kwargs)
    return m, m.run(max_cycles)


def trace_text(image: ProgramImage, max_cycles: int = 100_000, entries: Iterable[int] | None = None,
               **kwargs) -> str:
    buf = io.StringIO()
    m = Machine(image, trace=buf, keep_records=False, **kwargs)
    if entries is not None:
        m.spawn_threads(entries)
    m.run(max_cycles)
    return buf.getvalue()
