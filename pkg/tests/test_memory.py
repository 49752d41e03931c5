import math

import pytest

from photonic_subleq.isa import RwormMode
from photonic_subleq.memory import (BankKind, BankSpec, CowExhausted, DelayLineRegister, MemoryBank, MemoryMap,
                                    MemorySystem, ResetBusy, ResetUnsupported, RomWrite, ThreadRangeError,
                                    UnmappedAddress, UnwrittenRead, WriteConflict, WriteOnceViolation,
                                    default_memory_map, register_read, register_write, round_trip_time)

C = 3.0e8


def system(kind=BankKind.RWORM, size=16, pool=8, **kw):
    banks = [MemoryBank(kind, 0, size)]
    cow_pool = MemoryBank(BankKind.RWORM, 1 << 8, pool) if pool else None
    return MemorySystem(banks, 2, cow_pool=cow_pool, **kw)


def test_reset_time_floor():
    MemoryBank(BankKind.RWORM, 0, 4, write_time_ns=0.2, reset_time_ns=20.0)
    with pytest.raises(ValueError):
        MemoryBank(BankKind.RWORM, 0, 4, write_time_ns=0.2, reset_time_ns=19.9)


def test_rom_read_and_write_rejected():
    mem = system(BankKind.ROM, pool=0)
    mem.load(3, 0b10)
    assert mem.read(3) == 0b10
    mem.write(3, 1)
    with pytest.raises(RomWrite):
        mem.commit()


def test_unmapped():
    mem = system()
    with pytest.raises(UnmappedAddress):
        mem.read(40)
    with pytest.raises(UnmappedAddress):
        mem.write(40, 1)


def test_unwritten_reads_zero_or_fault():
    assert system().read(5) == 0
    with pytest.raises(UnwrittenRead):
        system(fault_unwritten=True).read(5)


def test_parallel_reads_unlimited():
    mem = system()
    mem.load(2, 3)
    assert all(mem.read(2, thread=t % 40) == 3 for t in range(1000))


def test_write_not_visible_same_cycle():
    mem = system()
    mem.write(4, 2)
    assert mem.read(4) == 0
    mem.commit()
    assert mem.read(4) == 2


def test_write_once_without_cow():
    mem = system(cow_enabled=False)
    mem.write(1, 1)
    mem.commit()
    mem.write(1, 2)
    with pytest.raises(WriteOnceViolation):
        mem.commit()
    mem2 = system()
    mem2.write(1, 1)
    mem2.commit()
    mem2.write(1, 2, cow=False)
    with pytest.raises(WriteOnceViolation):
        mem2.commit()


def test_cow_remap():
    mem = system()
    mem.load(6, 1)
    mem.write(6, (mem.read(6) + 1) & 3, cow=True)  # INC [A] with COW
    mem.commit()
    assert mem.read(6) == 2
    assert mem.physical(6) >= 1 << 8
    mem.write(6, 3, cow=True)
    mem.commit()
    assert mem.read(6) == 3 and mem.physical_double_writes() == []


def test_cow_disabled_globally_ignores_flag():
    mem = system(cow_enabled=False)
    mem.write(6, 1, cow=True)
    mem.commit()
    assert mem.physical(6) == 6


def test_cow_exhaustion():
    mem = system(pool=2)
    for v in (1, 2):
        mem.write(0, v, cow=True)
        mem.commit()
    mem.write(0, 3, cow=True)
    with pytest.raises(CowExhausted):
        mem.commit()


def test_cow_allocation_is_deterministic():
    a, b = system(), system()
    for mem in (a, b):
        for addr in (3, 1, 3, 2):
            mem.write(addr, 1, cow=True)
            mem.commit()
    assert [a.physical(x) for x in range(4)] == [b.physical(x) for x in range(4)] == [0, 257, 259, 258]


def test_rworm_conflict_faults():
    mem = system()
    mem.write(2, 1, thread=0)
    mem.write(2, 2, thread=1)
    with pytest.raises(WriteConflict) as exc:
        mem.commit()
    assert exc.value.thread == 1


def test_volatile_conflict_highest_thread_wins():
    mem = system(BankKind.VOLATILE)
    mem.write(2, 2, thread=1)
    mem.write(2, 1, thread=0)
    mem.commit()
    assert mem.read(2) == 2 and len(mem.warnings) == 1


def test_volatile_overwrites_freely():
    mem = system(BankKind.VOLATILE)
    for v in (1, 2, 3):
        mem.write(0, v)
        mem.commit()
    assert mem.read(0) == 3


def test_mmio_stream():
    mem = default_memory_map(4).build(2, 4)
    for v in (1, 3, 0):
        mem.write(15, v)
        mem.commit()
    assert mem.mmio_output == [1, 3, 0]


def test_reset_strict_unsupported():
    mem = system()
    with pytest.raises(ResetUnsupported):
        mem.reset_region(mem.banks[0], 0, 4)


def test_reset_elapsed_and_busy_window():
    mem = system(rworm_mode=RwormMode.RESETTABLE, size=200)
    bank = mem.banks[0]
    mem.write(10, 1)
    mem.commit()
    elapsed = mem.reset_region(bank, 0, 130)
    assert elapsed == bank.reset_time_ns * math.ceil(130 / bank.reset_block) == 60.0
    assert elapsed >= 100 * bank.write_time_ns
    with pytest.raises(ResetBusy):
        mem.read(10)
    mem.write(10, 2)
    with pytest.raises(ResetBusy):
        mem.commit()
    assert mem.read(150) == 0  # outside the range stays accessible
    mem.now_ns = elapsed
    mem.write(10, 2)
    mem.commit()
    assert mem.read(10) == 2


def test_reset_drops_cow_entries():
    mem = system(rworm_mode=RwormMode.RESETTABLE)
    mem.write(3, 2, cow=True)
    mem.commit()
    assert mem.read(3) == 2
    mem.reset_region(mem.banks[0], 0, 8)
    mem.now_ns = 1e6
    assert mem.physical(3) == 3 and mem.read(3) == 0
    pool = mem.cow.pool
    first = mem.cow.map.get(3)
    mem.reset_region(pool, pool.base, pool.size)
    mem.now_ns = 2e6
    assert first is None and len(mem.cow.free) == pool.size


def test_audit_counts_double_writes_only_in_strict_sense():
    mem = system()
    for v in range(3):
        mem.write(0, v, cow=True)
        mem.commit()
    assert mem.physical_double_writes() == []
    assert sum(1 for ev in mem.audit if ev.logical == 0) == 3


def test_round_trip_examples():
    assert round_trip_time(MemoryBank(BankKind.RWORM, 0, 1, 0.07), 2.0, C) == pytest.approx(2 * 0.07 * 2.0 / C * 1e9)
    assert 0.9 <= round_trip_time(MemoryBank(BankKind.RWORM, 0, 1, 0.07)) <= 1.0
    assert round_trip_time(MemoryBank(BankKind.RWORM, 0, 1, 0.0)) == 0
    assert round_trip_time(MemoryBank(BankKind.RWORM, 0, 1, 0.035)) == pytest.approx(
        round_trip_time(MemoryBank(BankKind.RWORM, 0, 1, 0.07)) / 2)


def test_register_slots():
    reg = DelayLineRegister(4)
    register_write(reg, 3, 0b01)
    reg.tick()
    assert register_read(reg, 2) == 0 and register_read(reg, 3) == 0b01


def test_register_one_cycle_latency():
    reg = DelayLineRegister(2)
    register_write(reg, 0, 7)
    assert register_read(reg, 0) == 0
    reg.tick()
    assert register_read(reg, 0) == 7


def test_register_range():
    reg = DelayLineRegister(2)
    with pytest.raises(ThreadRangeError):
        register_read(reg, 2)
    with pytest.raises(ThreadRangeError):
        register_write(reg, -1, 0)


def test_register_tuning_and_spacing():
    reg = DelayLineRegister(40, length_m=0.12, group_index=2.0, c=C)
    trim = reg.tune(1000.0)
    assert trim == pytest.approx(1000.0 - 0.12 * 2.0 / C * 1e12)
    assert reg.traversal_ps == pytest.approx(1000.0)
    assert reg.slot_spacing_ps() == pytest.approx(25.0)
    with pytest.raises(ValueError):
        DelayLineRegister(1, length_m=0.2, c=C).tune(1000.0)


def test_register_permutation():
    values = [3, 1, 2, 0]
    perm = [2, 0, 3, 1]
    a, b = DelayLineRegister(4), DelayLineRegister(4)
    for t, v in enumerate(values):
        register_write(a, t, v)
        register_write(b, perm[t], v)
    a.tick()
    b.tick()
    assert [register_read(b, perm[t]) for t in range(4)] == [register_read(a, t) for t in range(4)]


def test_memory_map_build_and_checks():
    mm = MemoryMap((BankSpec(BankKind.ROM, 0, 8), BankSpec(BankKind.RWORM, 8, 7, 0.07)), mmio=(15, 1))
    mem = mm.build(2, 4)
    assert [b.kind for b in mem.banks] == [BankKind.ROM, BankKind.RWORM, BankKind.VOLATILE]
    assert mem.cow.pool.base == 16 and mem.cow.pool.distance_m == 0.07
    with pytest.raises(ValueError):
        MemoryMap((BankSpec(BankKind.RWORM, 0, 17),)).build(2, 4)
    with pytest.raises(ValueError):
        MemoryMap((BankSpec(BankKind.RWORM, 0, 8), BankSpec(BankKind.RWORM, 4, 8))).build(2, 4)
