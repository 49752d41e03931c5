import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import er_after_floor, full_adder
from photonic_subleq.isa import signed_leq_zero, sub_mod
from photonic_subleq.logic import (FULL_ADDER_MATRIX, AreaParams, AreaPreset, CascadeFailure, CrossbarUnit,
                                   GateLevelAlu, LogicError, LutNetwork, OneHotViolation, OpticalLevel, Regenerator,
                                   SignalParams, SynthesisError, TruthTable, UnitAttrs, area_report, build_leq_zero,
                                   build_subtractor, crossbar_eval, decode_one_hot, dump_network, full_adder_unit,
                                   load_network, parse_truth_tables, propagate_levels, synthesize, word_to_pins)

E = lambda i, n=8: tuple(int(k == i) for k in range(n))  # noqa: E731


def test_full_adder_matrix_constant():
    assert FULL_ADDER_MATRIX == ((0, 1, 1, 0, 1, 0, 0, 1), (0, 0, 0, 1, 0, 1, 1, 1),
                                 (0, 0, 0, 0, 0, 0, 0, 1), (1, 1, 1, 1, 1, 1, 1, 0))
    assert full_adder_unit().nonzero_cells == 16


@pytest.mark.parametrize("bits,index", [([0, 0, 0], 0), ([1, 1, 0], 3), ([1, 1, 1], 7)])
def test_decode_examples(bits, index):
    assert decode_one_hot(bits) == E(index)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_decode_is_one_hot(k):
    for bits in itertools.product((0, 1), repeat=k):
        x = decode_one_hot(bits)
        assert len(x) == 2 ** k and sum(x) == 1


def test_decode_width_limit():
    with pytest.raises(LogicError):
        decode_one_hot([0, 0, 0, 0])


@pytest.mark.parametrize("i,expected", [(3, (0, 1, 0, 1)), (7, (1, 1, 1, 0)), (0, (0, 0, 0, 1))])
def test_crossbar_examples(i, expected):
    assert crossbar_eval(full_adder_unit(), E(i)) == expected


def test_crossbar_columns():
    u = full_adder_unit()
    for i in range(8):
        assert crossbar_eval(u, E(i)) == tuple(row[i] for row in FULL_ADDER_MATRIX)


@pytest.mark.parametrize("x", [(0,) * 8, (1, 1, 0, 0, 0, 0, 0, 0), (0, 0, 2, 0, 0, 0, 0, 0), (1, 0, 0, 0)])
def test_crossbar_rejects_non_one_hot(x):
    with pytest.raises(OneHotViolation):
        crossbar_eval(full_adder_unit(), x)


def test_full_adder_lut_against_behaviour():
    u = full_adder_unit()
    for a, b, c in itertools.product((0, 1), repeat=3):
        s, carry, and3, nand3 = crossbar_eval(u, decode_one_hot([a, b, c]))
        assert (s, carry) == full_adder(a, b, c)
        assert and3 == (a & b & c) and nand3 == 1 - (a & b & c)


@pytest.mark.parametrize("kwargs", [dict(input_bits=4, matrix=((0,) * 16,)), dict(input_bits=1, matrix=()),
                                    dict(input_bits=1, matrix=((0, 2),)), dict(input_bits=2, matrix=((0, 1),))])
def test_unit_validation(kwargs):
    with pytest.raises(LogicError):
        CrossbarUnit(**kwargs)


# -- arithmetic networks

@pytest.mark.parametrize("width", [2, 3, 4])
def test_subtractor_exhaustive(width):
    alu = GateLevelAlu(width)
    for a in range(1 << width):
        for b in range(1 << width):
            assert alu.sub(a, b) == sub_mod(a, b, width) == (a - b) % (1 << width)


@pytest.mark.parametrize("width,a,b,d", [(2, 0b01, 0b01, 0b00), (4, 0b0000, 0b0001, 0b1111)])
def test_subtractor_examples(width, a, b, d):
    assert GateLevelAlu(width).sub(a, b) == d


def test_subtractor_width_floor():
    with pytest.raises(LogicError):
        build_subtractor(1)


def test_subtractor_uses_full_adder_units():
    net = build_subtractor(4)
    fa = [n for n in net.units if n.unit.matrix == FULL_ADDER_MATRIX]
    assert len(fa) == 4


@pytest.mark.parametrize("width", [2, 3, 4, 5, 8])
def test_leq_network_exhaustive(width):
    net = build_leq_zero(width)
    for r in range(1 << width):
        assert net.evaluate(word_to_pins("r", r, width))["leq"] == int(signed_leq_zero(r, width))


def test_network_rejects_bad_wiring():
    net = LutNetwork(["a", "b"])
    with pytest.raises(LogicError):
        net.add_unit("u", full_adder_unit(), ["a", "b"])
    with pytest.raises(LogicError):
        net.add_unit("u", full_adder_unit(), ["a", "b", "c"])
    net.add_unit("u", full_adder_unit(), ["a", "b", "1"])
    with pytest.raises(LogicError):
        net.set_output("o", "u.4")
    with pytest.raises(LogicError):
        net.add_unit("u", full_adder_unit(), ["a", "b", "0"])


def test_longest_path():
    attrs = UnitAttrs(path_length_m=0.01)
    net = LutNetwork(["a", "b", "c"])
    s, c, _, _ = net.add_unit("u0", full_adder_unit(attrs), ["a", "b", "c"], [0.02, 0.0, 0.0])
    (o,) = net.add_unit("u1", CrossbarUnit(1, ((1, 0),), attrs=attrs), [c], [0.005])
    net.set_output("o", o)
    net.set_output("s", s)
    assert net.longest_path_m() == pytest.approx(0.02 + 0.01 + 0.005 + 0.01)


# -- optical levels

def _buffer_chain(n, il=0.0, edge=0.0):
    net = LutNetwork(["x"])
    sig = "x"
    for i in range(n):
        (sig,) = net.add_unit(f"b{i}", CrossbarUnit(1, ((0, 1),), attrs=UnitAttrs(insertion_loss_db=il)), [sig], [edge])
    net.set_output("y", sig)
    return net


def test_lossless_identity():
    out = propagate_levels(_buffer_chain(1), OpticalLevel.from_er(10.0))
    assert out["y"].er_db == pytest.approx(10.0)


def test_insertion_loss_shifts_both_levels():
    out = propagate_levels(_buffer_chain(2, il=1.0), OpticalLevel(0.0, -10.0))
    assert (out["y"].p_high, out["y"].p_low) == pytest.approx((-2.0, -12.0))


def test_regenerator_gain():
    net = LutNetwork(["x"])
    net.set_output("y", net.add_regen("r", "x", Regenerator(gain_db=4.0)))
    assert propagate_levels(net, OpticalLevel.from_er(3.0))["y"].er_db == pytest.approx(7.0)
    # capped at the nominal extinction ratio
    assert propagate_levels(net, OpticalLevel.from_er(8.0))["y"].er_db == pytest.approx(10.0)


def test_closed_form_floor_single_stage():
    params = SignalParams(noise_floor_dbm=-8.0)
    net = _buffer_chain(1, il=2.0)
    got = propagate_levels(net, OpticalLevel(0.0, -10.0), params)["y"].er_db
    assert got == pytest.approx(er_after_floor(0.0, -10.0, 2.0, -8.0), rel=1e-12)


def _floor_for_final_er(stages, il, target):
    """Bisection over the background level using the closed-form stage model."""
    def final_er(floor):
        hi, lo = 0.0, -10.0
        for _ in range(stages):
            h = 10 * math.log10(10 ** ((hi - il) / 10) + 10 ** (floor / 10))
            lo = 10 * math.log10(10 ** ((lo - il) / 10) + 10 ** (floor / 10))
            hi = h
        return hi - lo
    a, b = -60.0, 0.0
    for _ in range(200):
        mid = (a + b) / 2
        if final_er(mid) > target:
            a = mid
        else:
            b = mid
    return a if final_er(a) < target else b


def test_chain_below_floor_fails():
    floor = _floor_for_final_er(3, 1.0, 4.9)
    params = SignalParams(noise_floor_dbm=floor)
    with pytest.raises(CascadeFailure) as exc:
        propagate_levels(_buffer_chain(3, il=1.0), OpticalLevel(0.0, -10.0), params)
    assert exc.value.node == "y" and exc.value.er_db == pytest.approx(4.9, abs=1e-6)
    # with a 2R stage in front of the output the chain passes
    net = _buffer_chain(3, il=1.0)
    net.set_output("y", net.add_regen("r", net.outputs["y"]))
    assert propagate_levels(net, OpticalLevel(0.0, -10.0), params)["y"].er_db >= 5.0


def test_decoder_input_below_floor_names_node():
    with pytest.raises(CascadeFailure) as exc:
        propagate_levels(_buffer_chain(2), OpticalLevel.from_er(4.0))
    assert exc.value.node == "b0"


def test_decision_level_straddle():
    # ER is fine but the whole eye sits below the decision level
    with pytest.raises(CascadeFailure):
        propagate_levels(_buffer_chain(2, edge=1.0), OpticalLevel(0.0, -10.0), SignalParams(waveguide_loss_db_per_m=6.0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(0.0, 1.5), st.floats(-30.0, -12.0), st.integers(1, 4))
def test_loss_monotone(il, extra, floor, n):
    params = SignalParams(noise_floor_dbm=floor, min_er_db=0.01)
    try:
        lo = propagate_levels(_buffer_chain(n, il=il + extra), OpticalLevel(0.0, -10.0), params)["y"].er_db
    except CascadeFailure:
        return
    hi = propagate_levels(_buffer_chain(n, il=il), OpticalLevel(0.0, -10.0), params)["y"].er_db
    assert lo <= hi + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(5.5, 10.0), st.floats(0.0, 8.0))
def test_regen_never_decreases(er, gain):
    net = _buffer_chain(1)
    before = propagate_levels(net, OpticalLevel.from_er(er))["y"].er_db
    net.set_output("y", net.add_regen("r", net.outputs["y"], Regenerator(gain_db=gain)))
    assert propagate_levels(net, OpticalLevel.from_er(er))["y"].er_db >= before - 1e-12


# -- synthesis

def _check_tables(net, tables):
    k = max(t.inputs for t in tables)
    for idx in range(1 << k):
        out = net.evaluate({f"x{i}": (idx >> i) & 1 for i in range(k)})
        for t in tables:
            assert out[t.name] == t.outputs[idx & ((1 << t.inputs) - 1)], (t.name, idx)


def test_synth_full_adder_single_unit():
    tables = [TruthTable.from_function("sum", 3, lambda a, b, c: a ^ b ^ c),
              TruthTable.from_function("carry", 3, lambda a, b, c: (a + b + c) >= 2)]
    net = synthesize(tables)
    (node,) = net.units
    assert node.unit.input_bits == 3 and node.unit.outputs == 2
    _check_tables(net, tables)


def test_synth_xor():
    net = synthesize([TruthTable("xor", 2, (0, 1, 1, 0))])
    (node,) = net.units
    assert node.unit.input_bits == 2 and len(node.unit.matrix[0]) == 4 and node.unit.nonzero_cells == 2


def test_synth_identity():
    (node,) = synthesize([TruthTable("id", 1, (0, 1))]).units
    assert node.unit.matrix == ((0, 1),)


@pytest.mark.parametrize("k", [4, 5, 6])
def test_synth_wide_functions(k):
    rng = random.Random(k)
    tables = [TruthTable(f"f{i}", k, tuple(rng.randint(0, 1) for _ in range(1 << k))) for i in range(2)]
    net = synthesize(tables)
    assert all(n.unit.input_bits <= 3 for n in net.units)
    _check_tables(net, tables)


def test_synth_capacity_and_parse_errors():
    with pytest.raises(SynthesisError):
        synthesize([TruthTable("f", 5, (0,) * 32)], max_inputs=4)
    with pytest.raises(SynthesisError):
        parse_truth_tables("f 2 : 011")
    with pytest.raises(SynthesisError):
        parse_truth_tables("f two : 0110")
    assert parse_truth_tables("# c\nsum 3 : 01101001\n")[0].outputs == (0, 1, 1, 0, 1, 0, 0, 1)


# -- area

def _fa_net(attrs=UnitAttrs()):
    net = LutNetwork(["a", "b", "c"])
    net.add_unit("fa", full_adder_unit(attrs), ["a", "b", "c"])
    return net


def test_area_testable_full_adder():
    r = area_report(_fa_net(), AreaPreset.TESTABLE)
    assert r.cells == 16 and r.crossbar_mm2 == pytest.approx(16 * 0.12)
    assert r.sin_mm2 == pytest.approx(11.80) and r.inp_mm2 == pytest.approx(14.9)


def test_area_optimized_unit():
    r = area_report(_fa_net(), AreaPreset.OPTIMIZED)
    assert (r.sin_mm2, r.inp_mm2) == (4.2, 3.7)
    assert r.density == pytest.approx(1500 / 7.9)
    assert abs(r.density - 190) / 190 < 0.005


def test_area_empty():
    r = area_report(LutNetwork())
    assert (r.sin_mm2, r.inp_mm2, r.cells, r.transistor_equiv, r.density) == (0, 0, 0, 0, 0)


@pytest.mark.parametrize("preset", list(AreaPreset))
def test_area_additive(preset):
    a, b = build_subtractor(2), build_leq_zero(3)
    ra, rb = area_report(a, preset), area_report(b, preset)
    rab = area_report(a.merged(b, "q_"), preset)
    assert rab.cells == ra.cells + rb.cells and rab.units == ra.units + rb.units
    assert rab.sin_mm2 == pytest.approx(ra.sin_mm2 + rb.sin_mm2)
    assert rab.inp_mm2 == pytest.approx(ra.inp_mm2 + rb.inp_mm2)


def test_area_params_override():
    r = area_report(_fa_net(), AreaPreset.OPTIMIZED, AreaParams(1.0, 2.0, 600))
    assert r.total_mm2 == 3.0 and r.density == 200


# -- text dump

def test_dump_round_trip():
    attrs = UnitAttrs(path_length_m=0.002, insertion_loss_db=0.5)
    net = build_subtractor(3, attrs, edge_length_m=0.001)
    net.set_output("d0r", net.add_regen("rg", net.outputs["d0"], Regenerator(3.0, 0.004)))
    again = load_network(dump_network(net))
    assert dump_network(again) == dump_network(net)
    for a, b in itertools.product(range(8), repeat=2):
        pins = {**word_to_pins("a", a, 3), **word_to_pins("b", b, 3)}
        assert again.evaluate(pins) == net.evaluate(pins)
    assert again.longest_path_m() == pytest.approx(net.longest_path_m())


def test_load_rejects_garbage():
    with pytest.raises(LogicError):
        load_network("wire a b\n")
