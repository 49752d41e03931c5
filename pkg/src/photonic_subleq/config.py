"""Shared ``key = value`` configuration file.

Used for the memory map, thread/timing settings and photonic parameters.
Lengths are in mm, areas in mm^2, levels in dBm, losses in dB.  ``bank``
may repeat::

    bank = rworm, 0, 240, 70        # kind, base, size, distance_mm
    mmio = 255, 1                   # base, size
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .isa import RwormMode
from .logic import AreaParams, OpticalLevel, SignalParams, UnitAttrs
from .memory import NOMINAL_C, BankKind, BankSpec, MemoryMap, default_memory_map
from .metrics import TimingModel


class ConfigFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        loc = f"{source}:{line}" if line is not None else source
        super().__init__(f"{loc}: {message}")


_FLOAT_KEYS = {
    "thread_spacing_ps", "group_index", "l_max_mm", "speed_of_light", "regen_delay_mm",
    "decoder_area_sin_mm2", "decoder_area_inp_mm2", "cell_area_mm2", "optimized_sin_mm2",
    "optimized_inp_mm2", "te_per_unit", "p_high_dbm", "p_low_dbm", "min_er_db", "regen_gain_db",
    "waveguide_loss_db_per_mm", "noise_floor_dbm", "insertion_loss_db", "unit_path_mm",
    "edge_length_mm", "write_time_ns", "reset_time_ns", "cycle_time_ns",
}
_INT_KEYS = {"threads", "cow_pool", "word", "reset_block"}


@dataclass
class SimConfig:
    threads: int = 1
    thread_spacing_ps: float = 1.0
    cow: bool = True
    rworm: RwormMode = RwormMode.STRICT
    banks: list[BankSpec] = field(default_factory=list)
    mmio: tuple[int, int] | None = None
    cow_pool: int = 1 << 16
    word: int = 2
    group_index: float = 2.0
    l_max_mm: float | None = None
    cycle_time_ns: float | None = None
    speed_of_light: float = NOMINAL_C
    regen_delay_mm: float = 0.0
    decoder_area_sin_mm2: float = 9.88
    decoder_area_inp_mm2: float = 14.9
    cell_area_mm2: float = 0.12
    optimized_sin_mm2: float = 4.2
    optimized_inp_mm2: float = 3.7
    te_per_unit: float = 1500.0
    p_high_dbm: float = 0.0
    p_low_dbm: float = -10.0
    min_er_db: float = 5.0
    regen_gain_db: float = 4.0
    waveguide_loss_db_per_mm: float = 0.0
    noise_floor_dbm: float | None = None
    insertion_loss_db: float = 0.0
    unit_path_mm: float = 0.0
    edge_length_mm: float = 0.0
    write_time_ns: float = 0.2
    reset_time_ns: float = 20.0
    reset_block: int = 64

    def memory_map(self, data_addr_width: int) -> MemoryMap:
        if not self.banks and self.mmio is None:
            mm = default_memory_map(data_addr_width)
            return MemoryMap(mm.banks, mm.mmio, self.cow_pool)
        return MemoryMap(tuple(self.banks), self.mmio, self.cow_pool)

    def unit_attrs(self) -> UnitAttrs:
        return UnitAttrs(self.decoder_area_sin_mm2, self.decoder_area_inp_mm2, self.cell_area_mm2,
                         self.unit_path_mm * 1e-3, self.insertion_loss_db)

    def area_params(self) -> AreaParams:
        return AreaParams(self.optimized_sin_mm2, self.optimized_inp_mm2, self.te_per_unit)

    def signal_params(self) -> SignalParams:
        return SignalParams(OpticalLevel(self.p_high_dbm, self.p_low_dbm), self.min_er_db,
                            self.waveguide_loss_db_per_mm * 1e3, self.noise_floor_dbm)

    def timing_model(self, l_max_m: float | None = None) -> TimingModel:
        if l_max_m is None:
            if self.l_max_mm is None:
                raise ValueError("no l_max given and none derivable")
            l_max_m = self.l_max_mm * 1e-3
        return TimingModel(l_max_m, self.group_index, self.thread_spacing_ps, self.speed_of_light)


def _bool(value: str) -> bool:
    v = value.lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got {value!r}")


def parse_config(text: str, source: str = "<config>") -> SimConfig:
    cfg = SimConfig()
    known = {f.name for f in fields(SimConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError("expected 'key = value'", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "bank":
                parts = [p.strip() for p in value.split(",")]
                if not 3 <= len(parts) <= 6:
                    raise ValueError("bank = kind, base, size[, distance_mm[, write_time_ns[, reset_time_ns]]]")
                kind = BankKind(parts[0].lower())
                base, size = int(parts[1], 0), int(parts[2], 0)
                dist = float(parts[3]) * 1e-3 if len(parts) > 3 else 0.0
                wt = float(parts[4]) if len(parts) > 4 else cfg.write_time_ns
                rt = float(parts[5]) if len(parts) > 5 else cfg.reset_time_ns
                cfg.banks.append(BankSpec(kind, base, size, dist, wt, rt, cfg.reset_block))
            elif key == "mmio":
                base, size = (int(p.strip(), 0) for p in value.split(","))
                cfg.mmio = (base, size)
            elif key == "cow":
                cfg.cow = _bool(value)
            elif key == "rworm":
                cfg.rworm = RwormMode(value.lower())
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value, 0))
            elif key in _FLOAT_KEYS and key in known:
                setattr(cfg, key, float(value))
            else:
                raise ConfigFileError(f"unknown key {key!r}", lineno, source)
        except ConfigFileError:
            raise
        except ValueError as exc:
            raise ConfigFileError(f"{key}: {exc}", lineno, source) from None
    return cfg


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))
