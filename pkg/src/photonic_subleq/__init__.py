"""Model of a time-of-flight photonic SUBLEQ processor and its toolchain.

The package covers the ISA and OSLQ image format, an assembler with macro
expansion, crossbar-LUT logic with optical signal levels, write-once
memory with copy-on-write remapping, a multithreaded cycle-level CPU, and
timing/area/instruction metrics.
"""

from .assembler import AsmError, AssemblyError, ParseError, assemble, assemble_text, disassemble, parse
from .container import decode_program, encode_program
from .cpu import AluMode, ExecMode, Machine, RunReport, run_image, trace_text
from .isa import HALT, Instruction, MachineConfig, Operand, ProgramImage, RwormMode, sub_mod
from .logic import (FULL_ADDER_MATRIX, AreaPreset, CascadeFailure, LutNetwork, area_report, build_subtractor,
                    crossbar_eval, decode_one_hot, full_adder_unit, propagate_levels, synthesize)
from .memory import BankKind, MemoryBank, MemorySystem, default_memory_map, round_trip_time
from .metrics import TimingModel, cycle_time, stats_report, throughput

__all__ = [
    "AsmError", "AssemblyError", "ParseError", "assemble", "assemble_text", "disassemble", "parse",
    "decode_program", "encode_program",
    "AluMode", "ExecMode", "Machine", "RunReport", "run_image", "trace_text",
    "HALT", "Instruction", "MachineConfig", "Operand", "ProgramImage", "RwormMode", "sub_mod",
    "FULL_ADDER_MATRIX", "AreaPreset", "CascadeFailure", "LutNetwork", "area_report", "build_subtractor",
    "crossbar_eval", "decode_one_hot", "full_adder_unit", "propagate_levels", "synthesize",
    "BankKind", "MemoryBank", "MemorySystem", "default_memory_map", "round_trip_time",
    "TimingModel", "cycle_time", "stats_report", "throughput",
]
__version__ = "0.1.0"
