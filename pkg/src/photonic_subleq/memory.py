"""ROM, resettable write-once memory with copy-on-write, and delay-line registers.

All mutation is deferred: :meth:`MemorySystem.write` only queues a write,
and :meth:`MemorySystem.commit` applies the queue at the cycle boundary.
Reads always observe the state committed by the previous cycle.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum

from .isa import RwormMode

NOMINAL_C = 3.0e8


class BankKind(Enum):
    ROM = "rom"
    RWORM = "rworm"
    VOLATILE = "volatile"


class MemoryFault(Exception):
    """Base for every memory-side fault; carries optional execution context."""

    def __init__(self, message: str, addr: int | None = None):
        super().__init__(message)
        self.message = message
        self.addr = addr
        self.cycle: int | None = None
        self.thread: int | None = None
        self.ip: int | None = None

    def with_context(self, cycle: int | None = None, thread: int | None = None, ip: int | None = None):
        if cycle is not None:
            self.cycle = cycle
        if thread is not None:
            self.thread = thread
        if ip is not None:
            self.ip = ip
        return self

    def __str__(self) -> str:
        ctx = [f"{k}={v}" for k, v in (("cycle", self.cycle), ("thread", self.thread), ("ip", self.ip)) if v is not None]
        return f"{self.message} [{', '.join(ctx)}]" if ctx else self.message


class UnmappedAddress(MemoryFault):
    pass


class UnwrittenRead(MemoryFault):
    pass


class WriteOnceViolation(MemoryFault):
    pass


class CowExhausted(MemoryFault):
    pass


class RomWrite(MemoryFault):
    pass


class WriteConflict(MemoryFault):
    pass


class ResetBusy(MemoryFault):
    pass


class ResetUnsupported(MemoryFault):
    pass


class ThreadRangeError(IndexError):
    pass


@dataclass
class MemoryBank:
    kind: BankKind
    base: int
    size: int
    distance_m: float = 0.0
    write_time_ns: float = 0.2
    reset_time_ns: float = 20.0
    reset_block: int = 64
    mmio: bool = False
    cells: list[int] = field(default_factory=list, repr=False)
    written: list[bool] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if self.size <= 0 or self.base < 0:
            raise ValueError("bank needs base >= 0 and size > 0")
        if self.reset_time_ns < 100.0 * self.write_time_ns:
            raise ValueError(
                f"reset time {self.reset_time_ns} ns is not >= 100x the write time {self.write_time_ns} ns"
            )
        if self.reset_block <= 0:
            raise ValueError("reset_block must be positive")
        self.cells = [0] * self.size
        self.written = [False] * self.size

    @property
    def end(self) -> int:
        return self.base + self.size

    def __contains__(self, addr: int) -> bool:
        return self.base <= addr < self.end


def round_trip_time(bank: MemoryBank, group_index: float = 2.0, c: float = NOMINAL_C) -> float:
    """Processor-to-cell-and-back time of flight in ns."""
    return 2.0 * bank.distance_m * group_index / c * 1e9


class CowTable:
    """Logical-address to physical-cell remap over a dedicated pool of write-once cells."""

    def __init__(self, pool: MemoryBank):
        self.pool = pool
        self.map: dict[int, int] = {}
        self.free: list[int] = list(range(pool.base, pool.end))
        heapq.heapify(self.free)
        self.generation = 0

    def resolve(self, addr: int) -> int:
        return self.map.get(addr, addr)

    def allocate(self) -> int:
        if not self.free:
            raise CowExhausted(f"COW pool of {self.pool.size} cells exhausted")
        return heapq.heappop(self.free)

    def bind(self, logical: int, physical: int) -> None:
        self.map[logical] = physical
        self.generation += 1

    def invalidate(self, start: int, end: int) -> int:
        dropped = [lg for lg, ph in self.map.items() if start <= lg < end or start <= ph < end]
        for lg in dropped:
            del self.map[lg]
        if dropped:
            self.generation += 1
        return len(dropped)

    def release(self, start: int, end: int) -> None:
        """Return reset pool cells in ``[start, end)`` to the free list."""
        free = set(self.free)
        mapped = set(self.map.values())
        for ph in range(max(start, self.pool.base), min(end, self.pool.end)):
            if ph not in free and ph not in mapped:
                heapq.heappush(self.free, ph)


@dataclass(frozen=True)
class PendingWrite:
    addr: int
    value: int
    cow: bool
    thread: int
    ip: int | None = None


@dataclass(frozen=True)
class WriteEvent:
    """One committed physical write (audit record)."""

    logical: int
    physical: int
    value: int
    thread: int
    kind: BankKind


class MemorySystem:
    """Address decoding, COW remapping and cycle-boundary commit over a set of banks."""

    def __init__(self, banks: list[MemoryBank], word_width: int, *, cow_pool: MemoryBank | None = None,
                 cow_enabled: bool = True, rworm_mode: RwormMode = RwormMode.STRICT,
                 fault_unwritten: bool = False):
        self.banks = sorted(banks, key=lambda b: b.base)
        for lo, hi in zip(self.banks, self.banks[1:]):
            if hi.base < lo.end:
                raise ValueError(f"banks at {lo.base:#x} and {hi.base:#x} overlap")
        self.word_mask = (1 << word_width) - 1
        self.cow_enabled = cow_enabled
        self.rworm_mode = rworm_mode
        self.fault_unwritten = fault_unwritten
        self.cow: CowTable | None = None
        if cow_pool is not None:
            if cow_pool.kind is not BankKind.RWORM:
                raise ValueError("the COW pool must be RWORM")
            if any(cow_pool.base < b.end and b.base < cow_pool.end for b in self.banks):
                raise ValueError("COW pool overlaps a logical bank")
            self.cow = CowTable(cow_pool)
        self.pending: list[PendingWrite] = []
        self.audit: list[WriteEvent] = []
        self.mmio_output: list[int] = []
        self.warnings: list[str] = []
        self.now_ns = 0.0
        self.busy: list[tuple[MemoryBank, int, int, float]] = []
        self._loaded: set[int] = set()

    # -- address decoding
    def bank_of(self, addr: int) -> MemoryBank:
        for bank in self.banks:
            if addr in bank:
                return bank
        if self.cow is not None and addr in self.cow.pool:
            return self.cow.pool
        raise UnmappedAddress(f"address {addr:#x} is not mapped", addr)

    def physical(self, addr: int) -> int:
        return self.cow.resolve(addr) if self.cow is not None else addr

    def _check_busy(self, phys: int) -> None:
        self.busy = [w for w in self.busy if w[3] > self.now_ns]
        for bank, start, end, until in self.busy:
            if start <= phys < end:
                raise ResetBusy(f"address {phys:#x} is resetting until {until:g} ns", phys)

    # -- image load
    def load(self, addr: int, value: int) -> None:
        """Initial contents, written before execution starts (counts as the write-once write)."""
        if addr in self._loaded:
            raise WriteOnceViolation(f"address {addr:#x} initialised twice", addr)
        bank = self.bank_of(addr)
        i = addr - bank.base
        bank.cells[i] = value & self.word_mask
        bank.written[i] = True
        self._loaded.add(addr)
        self.audit.append(WriteEvent(addr, addr, value & self.word_mask, -1, bank.kind))

    # -- access
    def read(self, addr: int, thread: int = 0) -> int:
        phys = self.physical(addr)
        bank = self.bank_of(phys)
        if self.busy:
            self._check_busy(phys)
        i = phys - bank.base
        if bank.kind is BankKind.RWORM and not bank.written[i] and self.fault_unwritten:
            raise UnwrittenRead(f"read of never-written cell {addr:#x}", addr)
        return bank.cells[i]

    def write(self, addr: int, value: int, cow: bool = False, thread: int = 0, ip: int | None = None) -> PendingWrite:
        self.bank_of(self.physical(addr))
        pw = PendingWrite(addr, value & self.word_mask, cow, thread, ip)
        self.pending.append(pw)
        return pw

    def _fault(self, exc: MemoryFault, pw: PendingWrite) -> MemoryFault:
        self.pending.clear()
        return exc.with_context(thread=pw.thread, ip=pw.ip)

    def commit(self) -> list[WriteEvent]:
        """Apply queued writes in queue order (ascending thread id)."""
        pending = sorted(self.pending, key=lambda p: p.thread)
        events: list[WriteEvent] = []
        claimed: dict[int, PendingWrite] = {}
        for pw in pending:
            phys = self.physical(pw.addr)
            bank = self.bank_of(phys)
            if self.busy:
                try:
                    self._check_busy(phys)
                except ResetBusy as exc:
                    raise self._fault(exc, pw)
            if bank.kind is BankKind.ROM:
                raise self._fault(RomWrite(f"write to ROM address {pw.addr:#x}", pw.addr), pw)
            if bank.kind is BankKind.RWORM and pw.cow and self.cow_enabled and self.cow is not None:
                try:
                    phys = self.cow.allocate()
                except CowExhausted as exc:
                    raise self._fault(exc, pw)
                self.cow.bind(pw.addr, phys)
                bank = self.cow.pool
            prior = claimed.get(phys)
            if prior is not None:
                if bank.kind is BankKind.RWORM:
                    raise self._fault(WriteConflict(
                        f"threads {prior.thread} and {pw.thread} both write RWORM cell {phys:#x}", phys), pw)
                self.warnings.append(
                    f"write conflict at {pw.addr:#x}: thread {pw.thread} overrides thread {prior.thread}")
            i = phys - bank.base
            if bank.kind is BankKind.RWORM and bank.written[i]:
                raise self._fault(WriteOnceViolation(f"second write to RWORM cell {phys:#x} (logical {pw.addr:#x})", phys), pw)
            claimed[phys] = pw
            bank.cells[i] = pw.value
            bank.written[i] = True
            if bank.mmio:
                self.mmio_output.append(pw.value)
            ev = WriteEvent(pw.addr, phys, pw.value, pw.thread, bank.kind)
            events.append(ev)
        self.pending.clear()
        self.audit.extend(events)
        return events

    # -- reset
    def reset_region(self, bank: MemoryBank, start: int, count: int) -> float:
        """Clear written flags of ``count`` cells from ``start``; returns the busy time in ns."""
        if bank.kind is not BankKind.RWORM:
            raise ResetUnsupported(f"{bank.kind.value} banks cannot be reset")
        if self.rworm_mode is RwormMode.STRICT:
            raise ResetUnsupported("reset requested in STRICT write-once mode")
        if count <= 0 or start < bank.base or start + count > bank.end:
            raise ValueError("reset range outside the bank")
        end = start + count
        for phys in range(start, end):
            bank.cells[phys - bank.base] = 0
            bank.written[phys - bank.base] = False
        if self.cow is not None:
            self.cow.invalidate(start, end)
            if bank is self.cow.pool:
                self.cow.release(start, end)
        self.audit = [ev for ev in self.audit if not start <= ev.physical < end]
        elapsed = bank.reset_time_ns * math.ceil(count / bank.reset_block)
        self.busy.append((bank, start, end, self.now_ns + elapsed))
        return elapsed

    def physical_double_writes(self) -> list[int]:
        """Physical RWORM cells written more than once since the last reset (audit)."""
        seen: dict[int, int] = {}
        for ev in self.audit:
            if ev.kind is BankKind.RWORM:
                seen[ev.physical] = seen.get(ev.physical, 0) + 1
        return sorted(p for p, n in seen.items() if n > 1)


class DelayLineRegister:
    """Waveguide loop holding one word per thread slot.

    A write made during cycle k becomes readable after :meth:`tick`, i.e.
    one loop traversal later.  ``delta_delay_ps`` trims the loop so that
    its traversal time equals the cycle time.
    """

    def __init__(self, thread_count: int, length_m: float = 0.15, group_index: float = 2.0,
                 delta_delay_ps: float = 0.0, c: float = NOMINAL_C):
        if thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        self.slots = [0] * thread_count
        self.length_m = length_m
        self.group_index = group_index
        self.delta_delay_ps = delta_delay_ps
        self.c = c
        self._pending: dict[int, int] = {}

    @property
    def thread_count(self) -> int:
        return len(self.slots)

    @property
    def traversal_ps(self) -> float:
        return self.length_m * self.group_index / self.c * 1e12 + self.delta_delay_ps

    def tune(self, cycle_time_ps: float) -> float:
        """Set the trim delay so one traversal equals one cycle; returns the trim."""
        trim = cycle_time_ps - self.length_m * self.group_index / self.c * 1e12
        if trim < -1e-9 * cycle_time_ps:
            raise ValueError("delay line longer than one cycle; shorten it")
        self.delta_delay_ps = max(trim, 0.0)
        return self.delta_delay_ps

    def slot_spacing_ps(self, cycle_time_ps: float | None = None) -> float:
        return (self.traversal_ps if cycle_time_ps is None else cycle_time_ps) / self.thread_count

    def _check(self, thread: int) -> None:
        if not 0 <= thread < len(self.slots):
            raise ThreadRangeError(f"thread {thread} outside 0..{len(self.slots) - 1}")

    def read(self, thread: int) -> int:
        self._check(thread)
        return self.slots[thread]

    def write(self, thread: int, value: int) -> None:
        self._check(thread)
        self._pending[thread] = value

    def load(self, thread: int, value: int) -> None:
        """Immediate initialisation, outside the cycle discipline."""
        self._check(thread)
        self.slots[thread] = value

    def tick(self) -> None:
        for t, v in self._pending.items():
            self.slots[t] = v
        self._pending.clear()


def register_read(reg: DelayLineRegister, thread: int) -> int:
    return reg.read(thread)


def register_write(reg: DelayLineRegister, thread: int, value: int) -> None:
    reg.write(thread, value)


@dataclass(frozen=True)
class BankSpec:
    kind: BankKind
    base: int
    size: int
    distance_m: float = 0.0
    write_time_ns: float = 0.2
    reset_time_ns: float = 20.0
    reset_block: int = 64

    def build(self, mmio: bool = False) -> MemoryBank:
        return MemoryBank(self.kind, self.base, self.size, self.distance_m, self.write_time_ns,
                          self.reset_time_ns, self.reset_block, mmio=mmio)


@dataclass(frozen=True)
class MemoryMap:
    """Declared banks plus the MMIO output window and the COW pool size.

    The COW pool is placed directly above the logical address space, so
    programs can never name a pool cell directly.
    """

    banks: tuple[BankSpec, ...]
    mmio: tuple[int, int] | None = None
    cow_pool_size: int = 1 << 16
    mmio_distance_m: float = 0.0

    def build(self, word_width: int, data_addr_width: int, *, cow_enabled: bool = True,
              rworm_mode: RwormMode = RwormMode.STRICT, fault_unwritten: bool = False) -> MemorySystem:
        space = 1 << data_addr_width
        banks = [spec.build() for spec in self.banks]
        if self.mmio is not None:
            base, size = self.mmio
            banks.append(MemoryBank(BankKind.VOLATILE, base, size, self.mmio_distance_m, mmio=True))
        for b in banks:
            if b.end > space:
                raise ValueError(f"bank at {b.base:#x} (+{b.size}) exceeds the {data_addr_width}-bit address space")
        pool = None
        if self.cow_pool_size > 0:
            distance = max((s.distance_m for s in self.banks if s.kind is BankKind.RWORM), default=0.0)
            pool = MemoryBank(BankKind.RWORM, space, self.cow_pool_size, distance)
        return MemorySystem(banks, word_width, cow_pool=pool, cow_enabled=cow_enabled,
                            rworm_mode=rworm_mode, fault_unwritten=fault_unwritten)


def default_memory_map(data_addr_width: int, kind: BankKind = BankKind.RWORM,
                       distance_m: float = 0.07) -> MemoryMap:
    """One bank over the whole space except the top cell, which is the MMIO port."""
    space = 1 << data_addr_width
    return MemoryMap((BankSpec(kind, 0, space - 1, distance_m),), mmio=(space - 1, 1))
