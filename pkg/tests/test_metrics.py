import pytest
from hypothesis import given, strategies as st

from photonic_subleq.assembler import assemble_unit, parse
from photonic_subleq.cpu import run_image, trace_text
from photonic_subleq.logic import UnitAttrs, build_subtractor
from photonic_subleq.memory import BankKind, MemoryBank, round_trip_time
from photonic_subleq.metrics import (TimingModel, cycle_time, derive_l_max, format_metric, max_threads,
                                     parse_trace, stats_report, throughput)
from photonic_subleq.samples import multiply_source

C_EXACT = 299_792_458.0


@pytest.mark.parametrize("l,n,ns", [(0.15, 2.0, 1.0), (0.075, 2.0, 0.5)])
def test_cycle_time_examples(l, n, ns):
    assert cycle_time(TimingModel(l, n)) == pytest.approx(ns, rel=1e-12)


def test_cycle_time_exact_c_option():
    assert cycle_time(TimingModel(0.15, 2.0, c=C_EXACT)) == pytest.approx(0.15 * 2.0 / C_EXACT * 1e9)


@given(st.floats(0.001, 10.0), st.floats(1.0, 4.0), st.floats(0.1, 10.0))
def test_cycle_time_linear(l, n, k):
    base = cycle_time(TimingModel(l, n))
    assert cycle_time(TimingModel(l * k, n)) == pytest.approx(base * k, rel=1e-12)
    assert cycle_time(TimingModel(l, n * k if n * k >= 1 else n)) == pytest.approx(
        base * (k if n * k >= 1 else 1), rel=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        TimingModel(0.15, 0.9)
    with pytest.raises(ValueError):
        TimingModel(0.0)


@pytest.mark.parametrize("threads,spacing,ops", [(1000, 1.0, 1.0e12), (40, 25.0, 4.0e10), (1, 1.0, 1.0e9)])
def test_throughput_examples(threads, spacing, ops):
    assert throughput(TimingModel(0.15, 2.0, spacing), threads) == pytest.approx(ops, rel=1e-9)


@given(st.integers(1, 1000), st.floats(0.01, 5.0))
def test_throughput_times_cycle(threads, l):
    m = TimingModel(l, 2.0, thread_spacing_ps=cycle_time(TimingModel(l, 2.0)) * 1000.0 / threads)
    assert throughput(m, threads) * cycle_time(m) * 1e-9 == pytest.approx(threads, rel=1e-12)


def test_throughput_rejects_overfull_pipeline():
    with pytest.raises(ValueError):
        throughput(TimingModel(0.15, 2.0, 25.0), 41)
    assert max_threads(TimingModel(0.15, 2.0, 25.0)) == 40


def test_l_max_from_netlist_and_memory():
    net = build_subtractor(2, UnitAttrs(path_length_m=0.01), edge_length_m=0.002)
    bank = MemoryBank(BankKind.RWORM, 0, 16, 0.07)
    l_max = derive_l_max(net, [bank], extra_m=0.003)
    assert l_max == pytest.approx(net.longest_path_m() + 0.14 + 0.003)
    t = cycle_time(TimingModel(l_max, 2.0))
    assert t >= round_trip_time(bank, 2.0)


def _stats(src, max_cycles=10_000):
    img = assemble_unit(parse(src)).image
    m, _ = run_image(img, max_cycles=max_cycles, keep_records=True)
    return stats_report(m.records, img.debug), m


def test_stats_mov_add():
    # stop before HALT retires so only the four macro instructions count
    st_, m = _stats("x: .word 1\nMOV [x], [a*]\nMOV [x], [b*]\nMOV [x], [c*]\nADD [x], [x], [d*]\nHALT\n"
                    "a: .space 1\nb: .space 1\nc: .space 1\nd: .space 1", max_cycles=5)
    assert st_.counts == {"MOV": 3, "ADD": 1}
    assert st_.t_ins == {"MOV": 3, "ADD": 2}
    assert st_.total_quads == m.retired


def test_stats_empty():
    st_ = stats_report([], [])
    assert st_.rows() == [] and st_.render().splitlines() == ["mnemonic     n_ins  CPI   t_ins"]


def test_stats_raw_only_without_debug():
    img = assemble_unit(parse("x: .word 1\nMOV [x], [y*]\nHALT\ny: .space 1")).image
    m, _ = run_image(img, keep_records=True)
    assert stats_report(m.records).counts == {"SUBLEQ": 2}


def test_multiply_profile_is_add_dominated():
    st_, m = _stats(multiply_source(15, 15))
    assert st_.dominant() == "ADD"
    assert st_.total_quads == m.retired
    rows = st_.rows()
    assert [r[3] for r in rows] == sorted((r[3] for r in rows), reverse=True)


def test_parse_trace_round_trip():
    img = assemble_unit(parse(multiply_source(3, 2))).image
    m, _ = run_image(img, keep_records=True)
    assert parse_trace(trace_text(img)) == m.records


def test_format_metric():
    assert format_metric("t_cycle", 1.0, "ns") == "t_cycle=1.000 ns"
    assert format_metric("throughput", 1.0e12, "ops/s") == "throughput=1e+12 ops/s"
    assert format_metric("n", 3) == "n=3"
