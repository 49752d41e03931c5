"""Machine configuration, word arithmetic and the SUBLEQ instruction quad."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

HALT = 0xFFFFFFFF
"""Jump-field sentinel that terminates the executing thread."""

RAW = "raw"


class RwormMode(enum.Enum):
    STRICT = "strict"
    RESETTABLE = "resettable"


class ConfigError(ValueError):
    """Machine configuration violates a width or timing rule."""


@dataclass(frozen=True)
class MachineConfig:
    """Widths and runtime switches of one simulated machine.

    ``data_addr_width_bits`` is independent of the word width, so a 2-bit
    machine may address a much larger data space.
    """

    word_width_bits: int = 2
    data_addr_width_bits: int = 8
    instr_addr_width_bits: int = 8
    thread_count: int = 1
    thread_spacing_ps: float = 25.0
    cow_enabled: bool = True
    rworm_mode: RwormMode = RwormMode.STRICT

    def __post_init__(self) -> None:
        if not 2 <= self.word_width_bits <= 32:
            raise ConfigError(f"word width {self.word_width_bits} outside 2..32")
        if not 1 <= self.data_addr_width_bits <= 32:
            raise ConfigError(f"data address width {self.data_addr_width_bits} outside 1..32")
        # 31 keeps the HALT sentinel outside every legal instruction address
        if not 1 <= self.instr_addr_width_bits <= 31:
            raise ConfigError(f"instruction address width {self.instr_addr_width_bits} outside 1..31")
        if self.thread_count < 1:
            raise ConfigError("thread_count must be >= 1")
        if self.thread_spacing_ps < 0:
            raise ConfigError("thread_spacing_ps must be non-negative")

    @property
    def word_mask(self) -> int:
        return (1 << self.word_width_bits) - 1

    @property
    def data_space(self) -> int:
        return 1 << self.data_addr_width_bits

    @property
    def instr_space(self) -> int:
        return 1 << self.instr_addr_width_bits

    def check_timing(self, cycle_time_ps: float, rel_tol: float = 1e-9) -> None:
        """Raise if the thread slots do not fit inside one cycle."""
        occupied = self.thread_count * self.thread_spacing_ps
        if occupied > cycle_time_ps * (1.0 + rel_tol):
            raise ConfigError(
                f"{self.thread_count} threads x {self.thread_spacing_ps} ps = {occupied} ps "
                f"exceeds the {cycle_time_ps} ps cycle"
            )


def mask(value: int, width: int) -> int:
    return value & ((1 << width) - 1)


def to_signed(value: int, width: int) -> int:
    """Two's-complement reading of a ``width``-bit word."""
    value = mask(value, width)
    if value >> (width - 1):
        return value - (1 << width)
    return value


def signed_leq_zero(word: int, width: int) -> bool:
    """True when the word is zero or has its sign bit set."""
    word = mask(word, width)
    return word == 0 or bool(word >> (width - 1))


def sub_mod(a: int, b: int, width: int) -> int:
    return (a - b) & ((1 << width) - 1)


@dataclass(frozen=True)
class Operand:
    addr: int
    indirect: bool = False
    cow: bool = False

    def __str__(self) -> str:
        inner = f"@{self.addr:#x}"
        if self.indirect:
            inner = f"[{inner}]"
        star = "*" if self.cow else ""
        return f"[{inner}{star}]"


@dataclass(frozen=True)
class Instruction:
    """``SUBLEQ [a], [b], [c], j``: mem[c] = mem[a] - mem[b]; jump to j if the result <= 0."""

    a: Operand
    b: Operand
    c: Operand
    j: int

    def __post_init__(self) -> None:
        if self.a.cow or self.b.cow:
            raise ValueError("the COW flag is only meaningful on the write operand")

    @property
    def halts(self) -> bool:
        return self.j == HALT

    def __str__(self) -> str:
        j = "HALT" if self.j == HALT else str(self.j)
        return f"SUBLEQ {self.a}, {self.b}, {self.c}, {j}"


@dataclass(frozen=True)
class ImageHeader:
    word_width_bits: int
    data_addr_width_bits: int
    instr_addr_width_bits: int

    def machine_config(self, **overrides) -> MachineConfig:
        return MachineConfig(
            word_width_bits=self.word_width_bits,
            data_addr_width_bits=self.data_addr_width_bits,
            instr_addr_width_bits=self.instr_addr_width_bits,
            **overrides,
        )


class ImageError(ValueError):
    """An image references an address or value outside its declared widths."""


@dataclass(frozen=True)
class ProgramImage:
    header: ImageHeader
    instructions: tuple[Instruction, ...] = ()
    data: tuple[tuple[int, int], ...] = ()
    debug: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "instructions", tuple(self.instructions))
        object.__setattr__(self, "data", tuple((int(a), int(v)) for a, v in self.data))
        if self.debug is None:
            object.__setattr__(self, "debug", (RAW,) * len(self.instructions))
        else:
            object.__setattr__(self, "debug", tuple(self.debug))

    def validate(self) -> "ProgramImage":
        h = self.header
        MachineConfig(h.word_width_bits, h.data_addr_width_bits, h.instr_addr_width_bits)
        n_space = 1 << h.data_addr_width_bits
        m_space = 1 << h.instr_addr_width_bits
        if len(self.instructions) > m_space:
            raise ImageError(f"{len(self.instructions)} instructions exceed the {m_space}-entry ROM")
        if len(self.debug) != len(self.instructions):
            raise ImageError("debug map must cover every instruction")
        for i, ins in enumerate(self.instructions):
            for name in "abc":
                op = getattr(ins, name)
                if not 0 <= op.addr < n_space:
                    raise ImageError(f"instruction {i}: operand {name}={op.addr:#x} outside data space")
            if ins.j != HALT and not 0 <= ins.j < m_space:
                raise ImageError(f"instruction {i}: jump target {ins.j:#x} outside ROM")
        wmax = 1 << h.word_width_bits
        for addr, value in self.data:
            if not 0 <= addr < n_space:
                raise ImageError(f"data address {addr:#x} outside data space")
            if not 0 <= value < wmax:
                raise ImageError(f"data value {value} at {addr:#x} exceeds word width")
        return self
