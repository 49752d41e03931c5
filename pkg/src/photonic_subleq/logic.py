"""Decoder + crossbar look-up-table logic.

A logic unit is a k-to-2^k one-hot decoder followed by a sparse binary
crossbar.  The decoder lights exactly one column line; each crossbar row
picks up light only where its matrix entry is 1, so every row is a
k-input truth table and all rows of a unit evaluate in parallel.

Networks of units carry optical levels (dBm) alongside the boolean values
so that loss, extinction ratio and 2R regeneration can be checked.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

MAX_UNIT_INPUTS = 3
CONST_SOURCES = ("0", "1")

FULL_ADDER_ROWS = ("SUM", "CARRY", "AND3", "NAND3")
FULL_ADDER_MATRIX = (
    (0, 1, 1, 0, 1, 0, 0, 1),
    (0, 0, 0, 1, 0, 1, 1, 1),
    (0, 0, 0, 0, 0, 0, 0, 1),
    (1, 1, 1, 1, 1, 1, 1, 0),
)


class LogicError(ValueError):
    pass


class OneHotViolation(LogicError):
    """Crossbar driven by something other than a single lit decoder line."""


class SynthesisError(LogicError):
    pass


class CascadeFailure(LogicError):
    def __init__(self, node: str, er_db: float, reason: str):
        self.node = node
        self.er_db = er_db
        super().__init__(f"{node}: {reason} (ER {er_db:.3f} dB)")


# --------------------------------------------------------------------------
# units


@dataclass(frozen=True)
class UnitAttrs:
    """Physical annotations of one decoder + crossbar unit (areas in mm^2)."""

    decoder_area_sin: float = 9.88
    decoder_area_inp: float = 14.9
    cell_area: float = 0.12
    path_length_m: float = 0.0
    insertion_loss_db: float = 0.0


@dataclass(frozen=True)
class CrossbarUnit:
    input_bits: int
    matrix: tuple[tuple[int, ...], ...]
    row_names: tuple[str, ...] = ()
    reconfigurable: bool = False
    attrs: UnitAttrs = UnitAttrs()

    def __post_init__(self) -> None:
        matrix = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", matrix)
        if not 1 <= self.input_bits <= MAX_UNIT_INPUTS:
            raise LogicError(f"unit input width {self.input_bits} outside 1..{MAX_UNIT_INPUTS}")
        if not matrix:
            raise LogicError("a crossbar needs at least one output row")
        cols = 1 << self.input_bits
        for row in matrix:
            if len(row) != cols:
                raise LogicError(f"row has {len(row)} columns, expected {cols}")
            if any(v not in (0, 1) for v in row):
                raise LogicError("crossbar entries must be 0 or 1")
        if self.row_names and len(self.row_names) != len(matrix):
            raise LogicError("row_names must name every row")

    @property
    def outputs(self) -> int:
        return len(self.matrix)

    @property
    def nonzero_cells(self) -> int:
        return sum(map(sum, self.matrix))

    def column(self, i: int) -> tuple[int, ...]:
        return tuple(row[i] for row in self.matrix)


def full_adder_unit(attrs: UnitAttrs = UnitAttrs()) -> CrossbarUnit:
    return CrossbarUnit(3, FULL_ADDER_MATRIX, FULL_ADDER_ROWS, attrs=attrs)


def decode_one_hot(bits: Sequence[int | bool], max_bits: int = MAX_UNIT_INPUTS) -> tuple[int, ...]:
    """Binary-to-one-hot decoder; ``bits[0]`` carries weight 1."""
    if len(bits) > max_bits:
        raise LogicError(f"{len(bits)} decoder inputs exceed the configured maximum {max_bits}")
    index = sum(1 << i for i, b in enumerate(bits) if b)
    out = [0] * (1 << len(bits))
    out[index] = 1
    return tuple(out)


def crossbar_eval(unit: CrossbarUnit, x: Sequence[int]) -> tuple[int, ...]:
    """Matrix-vector product of the crossbar with a one-hot column selector."""
    if len(x) != 1 << unit.input_bits:
        raise OneHotViolation(f"input has {len(x)} lines, unit expects {1 << unit.input_bits}")
    lit = [i for i, v in enumerate(x) if v]
    if len(lit) != 1 or x[lit[0]] != 1:
        raise OneHotViolation(f"{len(lit)} lines lit; exactly one expected")
    return unit.column(lit[0])


# --------------------------------------------------------------------------
# networks

_SOURCE_RE = re.compile(r"^([A-Za-z_][\w]*)\.(\d+)$")


@dataclass(frozen=True)
class Regenerator:
    """In-line 2R stage: restores power levels and improves ER by ``gain_db``."""

    gain_db: float = 4.0
    path_length_m: float = 0.0


@dataclass(frozen=True)
class Node:
    name: str
    inputs: tuple[str, ...]
    edge_lengths_m: tuple[float, ...]
    unit: CrossbarUnit | None = None
    regen: Regenerator | None = None

    @property
    def is_regen(self) -> bool:
        return self.regen is not None

    @property
    def outputs(self) -> int:
        return 1 if self.regen is not None else self.unit.outputs

    @property
    def path_length_m(self) -> float:
        return self.regen.path_length_m if self.regen is not None else self.unit.attrs.path_length_m


class LutNetwork:
    """DAG of crossbar units.

    Signals are named either by a primary input pin, a constant ``"0"`` /
    ``"1"``, or ``"<node>.<row>"``.  Nodes may only consume signals that
    already exist, so the graph is acyclic by construction; fan-out is
    unrestricted.
    """

    def __init__(self, inputs: Iterable[str] = ()):
        self.inputs: list[str] = []
        self.nodes: dict[str, Node] = {}
        self.outputs: dict[str, str] = {}
        for pin in inputs:
            self.add_input(pin)

    def add_input(self, pin: str) -> str:
        if not re.fullmatch(r"[A-Za-z_]\w*", pin) or pin in self.inputs:
            raise LogicError(f"bad or duplicate input pin {pin!r}")
        if pin in self.nodes:
            raise LogicError(f"pin {pin!r} clashes with a node name")
        self.inputs.append(pin)
        return pin

    def _check_source(self, src: str) -> None:
        if src in CONST_SOURCES or src in self.inputs:
            return
        m = _SOURCE_RE.match(src)
        if not m or m.group(1) not in self.nodes:
            raise LogicError(f"undriven signal {src!r}")
        if int(m.group(2)) >= self.nodes[m.group(1)].outputs:
            raise LogicError(f"{src!r}: node has no such output")

    def _add(self, node: Node) -> Node:
        if node.name in self.nodes or node.name in self.inputs or not re.fullmatch(r"[A-Za-z_]\w*", node.name):
            raise LogicError(f"bad or duplicate node name {node.name!r}")
        if len(node.edge_lengths_m) != len(node.inputs):
            raise LogicError("one edge length per input is required")
        for src in node.inputs:
            self._check_source(src)
        self.nodes[node.name] = node
        return node

    def add_unit(self, name: str, unit: CrossbarUnit, inputs: Sequence[str],
                 edge_lengths_m: Sequence[float] | None = None) -> list[str]:
        if len(inputs) != unit.input_bits:
            raise LogicError(f"{name}: {len(inputs)} inputs wired to a {unit.input_bits}-input unit")
        lengths = tuple(edge_lengths_m) if edge_lengths_m is not None else (0.0,) * len(inputs)
        self._add(Node(name, tuple(inputs), lengths, unit=unit))
        return [f"{name}.{r}" for r in range(unit.outputs)]

    def add_regen(self, name: str, source: str, regen: Regenerator = Regenerator(),
                  edge_length_m: float = 0.0) -> str:
        self._add(Node(name, (source,), (edge_length_m,), regen=regen))
        return f"{name}.0"

    def set_output(self, name: str, source: str) -> None:
        self._check_source(source)
        self.outputs[name] = source

    @property
    def units(self) -> list[Node]:
        return [n for n in self.nodes.values() if n.unit is not None]

    def evaluate(self, values: Mapping[str, int | bool]) -> dict[str, int]:
        """Boolean evaluation; every primary input must be given."""
        sig: dict[str, int] = {"0": 0, "1": 1}
        for pin in self.inputs:
            if pin not in values:
                raise LogicError(f"input pin {pin!r} not driven")
            sig[pin] = 1 if values[pin] else 0
        for node in self.nodes.values():
            bits = [sig[s] for s in node.inputs]
            if node.regen is not None:
                sig[f"{node.name}.0"] = bits[0]
                continue
            col = crossbar_eval(node.unit, decode_one_hot(bits))
            for r, v in enumerate(col):
                sig[f"{node.name}.{r}"] = v
        return {name: sig[src] for name, src in self.outputs.items()}

    def longest_path_m(self) -> float:
        """Longest waveguide length from any input to any output."""
        arrival: dict[str, float] = {"0": 0.0, "1": 0.0}
        arrival.update((pin, 0.0) for pin in self.inputs)
        for node in self.nodes.values():
            t = max((arrival[s] + e for s, e in zip(node.inputs, node.edge_lengths_m)), default=0.0)
            for r in range(node.outputs):
                arrival[f"{node.name}.{r}"] = t + node.path_length_m
        return max((arrival[s] for s in self.outputs.values()), default=0.0)

    def merged(self, other: "LutNetwork", prefix: str) -> "LutNetwork":
        """Disjoint union; ``other``'s names get ``prefix`` prepended."""
        out = LutNetwork(self.inputs)
        out.nodes = dict(self.nodes)
        out.outputs = dict(self.outputs)

        def ren(s: str) -> str:
            return s if s in CONST_SOURCES else prefix + s

        for pin in other.inputs:
            out.add_input(prefix + pin)
        for node in other.nodes.values():
            out._add(replace(node, name=prefix + node.name, inputs=tuple(ren(s) for s in node.inputs)))
        for name, src in other.outputs.items():
            out.set_output(prefix + name, ren(src))
        return out


# --------------------------------------------------------------------------
# optical levels


@dataclass(frozen=True)
class OpticalLevel:
    p_high: float
    p_low: float

    def __post_init__(self) -> None:
        if not self.p_high > self.p_low:
            raise LogicError(f"p_high {self.p_high} dBm must exceed p_low {self.p_low} dBm")

    @property
    def er_db(self) -> float:
        return self.p_high - self.p_low

    @classmethod
    def from_er(cls, er_db: float, p_high: float = 0.0) -> "OpticalLevel":
        return cls(p_high, p_high - er_db)


@dataclass(frozen=True)
class SignalParams:
    """Level model shared by every stage of a network.

    ``noise_floor_dbm`` adds a fixed background power (ASE and crosstalk) at
    each unit output; with it, accumulated loss erodes the extinction ratio.
    """

    nominal: OpticalLevel = OpticalLevel(0.0, -10.0)
    min_er_db: float = 5.0
    waveguide_loss_db_per_m: float = 0.0
    noise_floor_dbm: float | None = None

    @property
    def decision_dbm(self) -> float:
        return 0.5 * (self.nominal.p_high + self.nominal.p_low)


def _dbm_add(a: float, b: float) -> float:
    return 10.0 * math.log10(10.0 ** (a / 10.0) + 10.0 ** (b / 10.0))


def _regenerate(level: OpticalLevel, regen: Regenerator, params: SignalParams) -> OpticalLevel:
    nominal = params.nominal.er_db
    er = max(level.er_db, min(nominal, level.er_db + regen.gain_db))
    return OpticalLevel.from_er(er, params.nominal.p_high)


def propagate_levels(network: LutNetwork, input_level: OpticalLevel,
                     params: SignalParams = SignalParams()) -> dict[str, OpticalLevel]:
    """Carry high/low power levels through the network.

    Every input consumed by a decoder must clear the decision level (midpoint
    of the nominal levels) and ``min_er_db``; every network output must
    clear ``min_er_db``.  Violations raise :class:`CascadeFailure`.
    """
    lv: dict[str, OpticalLevel] = {pin: input_level for pin in network.inputs}
    for c in CONST_SOURCES:
        lv[c] = params.nominal
    for node in network.nodes.values():
        arriving = []
        for src, length in zip(node.inputs, node.edge_lengths_m):
            loss = length * params.waveguide_loss_db_per_m
            lvl = lv[src]
            arriving.append(OpticalLevel(lvl.p_high - loss, lvl.p_low - loss))
        if node.regen is not None:
            lv[f"{node.name}.0"] = _regenerate(arriving[0], node.regen, params)
            continue
        for src, lvl in zip(node.inputs, arriving):
            if lvl.er_db < params.min_er_db:
                raise CascadeFailure(node.name, lvl.er_db, f"input {src} below the {params.min_er_db} dB ER floor")
            if not lvl.p_high > params.decision_dbm > lvl.p_low:
                raise CascadeFailure(node.name, lvl.er_db, f"input {src} does not straddle the decision level")
        il = node.unit.attrs.insertion_loss_db
        hi = min(a.p_high for a in arriving) - il
        lo = max(a.p_low for a in arriving) - il
        if params.noise_floor_dbm is not None:
            hi = _dbm_add(hi, params.noise_floor_dbm)
            lo = _dbm_add(lo, params.noise_floor_dbm)
        if not hi > lo:
            raise CascadeFailure(node.name, hi - lo, "logic levels collapsed")
        for r in range(node.outputs):
            lv[f"{node.name}.{r}"] = OpticalLevel(hi, lo)
    result = {}
    for name, src in network.outputs.items():
        lvl = lv[src]
        if lvl.er_db < params.min_er_db:
            raise CascadeFailure(name, lvl.er_db, f"output below the {params.min_er_db} dB ER floor")
        result[name] = lvl
    return result


# --------------------------------------------------------------------------
# synthesis


@dataclass(frozen=True)
class TruthTable:
    """``outputs[i]`` is the function value at input index i = sum(x_j << j)."""

    name: str
    inputs: int
    outputs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outputs", tuple(int(v) for v in self.outputs))
        if len(self.outputs) != 1 << self.inputs:
            raise SynthesisError(f"{self.name}: {len(self.outputs)} entries for {self.inputs} inputs")
        if any(v not in (0, 1) for v in self.outputs):
            raise SynthesisError(f"{self.name}: outputs must be 0/1")

    @classmethod
    def from_function(cls, name: str, inputs: int, fn) -> "TruthTable":
        return cls(name, inputs, tuple(int(bool(fn(*((i >> j) & 1 for j in range(inputs))))) for i in range(1 << inputs)))


_MUX_ROW = tuple((i >> 2) & 1 if i & 1 else (i >> 1) & 1 for i in range(8))  # inputs (sel, lo, hi)


class _Builder:
    def __init__(self, n_inputs: int, attrs: UnitAttrs):
        self.pins = tuple(f"x{i}" for i in range(n_inputs))
        self.attrs = attrs
        self.groups: dict[tuple[str, ...], list[tuple[int, ...]]] = {}
        self.names: dict[tuple[str, ...], str] = {}

    def row(self, inputs: tuple[str, ...], tt: tuple[int, ...]) -> str:
        if inputs not in self.groups:
            self.groups[inputs] = []
            self.names[inputs] = f"u{len(self.names)}"
        rows = self.groups[inputs]
        if tt not in rows:
            rows.append(tt)
        return f"{self.names[inputs]}.{rows.index(tt)}"

    def realize(self, tt: tuple[int, ...], vars_: tuple[str, ...]) -> str:
        # drop inputs the function does not depend on
        j = 0
        while j < len(vars_):
            bit = 1 << j
            if all(tt[i] == tt[i ^ bit] for i in range(len(tt)) if not i & bit):
                tt = tuple(tt[i] for i in range(len(tt)) if not i & bit)
                vars_ = vars_[:j] + vars_[j + 1:]
            else:
                j += 1
        if not vars_:
            return str(tt[0])
        if len(vars_) <= MAX_UNIT_INPUTS:
            return self.row(vars_, tt)
        # Shannon split on the most significant input, recombined by a mux unit
        half = len(tt) // 2
        lo = self.realize(tt[:half], vars_[:-1])
        hi = self.realize(tt[half:], vars_[:-1])
        return self.row((vars_[-1], lo, hi), _MUX_ROW)

    def network(self) -> LutNetwork:
        net = LutNetwork(self.pins)
        for inputs, rows in self.groups.items():
            net.add_unit(self.names[inputs], CrossbarUnit(len(inputs), tuple(rows), attrs=self.attrs), inputs)
        return net


def synthesize(tables: Sequence[TruthTable], max_inputs: int = 8,
               attrs: UnitAttrs = UnitAttrs()) -> LutNetwork:
    """Map truth tables onto <=3-input crossbar units.

    Functions reading the same input set share one multi-output unit; wider
    functions are split by Shannon expansion with mux units.  Primary pins
    are ``x0..x{k-1}``.
    """
    if not tables:
        return LutNetwork()
    names = [t.name for t in tables]
    if len(set(names)) != len(names):
        raise SynthesisError("duplicate function names")
    k = max(t.inputs for t in tables)
    for t in tables:
        if t.inputs > max_inputs:
            raise SynthesisError(f"{t.name}: {t.inputs} inputs exceed decomposition capacity {max_inputs}")
    b = _Builder(k, attrs)
    out = {t.name: b.realize(t.outputs, b.pins[: t.inputs]) for t in tables}
    net = b.network()
    for name, src in out.items():
        net.set_output(name, src)
    return net


def parse_truth_tables(text: str) -> list[TruthTable]:
    """Parse ``name k : bitstring`` lines (``#`` starts a comment)."""
    tables = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"([A-Za-z_]\w*)\s+(\d+)\s*:\s*([01]+)", line)
        if not m:
            raise SynthesisError(f"line {lineno}: expected 'name k : bits'")
        name, k, bits = m.group(1), int(m.group(2)), m.group(3)
        try:
            tables.append(TruthTable(name, k, tuple(int(c) for c in bits)))
        except SynthesisError as exc:
            raise SynthesisError(f"line {lineno}: {exc}") from None
    return tables


# --------------------------------------------------------------------------
# arithmetic networks

NOT_MATRIX = ((1, 0),)


def build_subtractor(width: int, attrs: UnitAttrs = UnitAttrs(), edge_length_m: float = 0.0) -> LutNetwork:
    """Ripple network computing A + ~B + 1 with one full-adder crossbar per bit.

    Pins ``a0..``, ``b0..`` (bit 0 least significant); outputs ``d0..``
    plus the final carry ``cout``.
    """
    if width < 2:
        raise LogicError("subtractor width must be >= 2")
    net = LutNetwork([f"a{i}" for i in range(width)] + [f"b{i}" for i in range(width)])
    carry = "1"
    fa = full_adder_unit(attrs)
    inv = CrossbarUnit(1, NOT_MATRIX, ("NOT",), attrs=attrs)
    for i in range(width):
        (nb,) = net.add_unit(f"inv{i}", inv, [f"b{i}"], [edge_length_m])
        s, c, _, _ = net.add_unit(f"fa{i}", fa, [f"a{i}", nb, carry], [edge_length_m] * 3)
        net.set_output(f"d{i}", s)
        carry = c
    net.set_output("cout", carry)
    return net


_OR3 = tuple(0 if i == 0 else 1 for i in range(8))
_LEQ_ROW = (1, 0, 1, 1)  # inputs (any_set, sign): sign or not any_set


def build_leq_zero(width: int, attrs: UnitAttrs = UnitAttrs()) -> LutNetwork:
    """Branch test: output ``leq`` is 1 when the two's-complement input is <= 0."""
    if width < 2:
        raise LogicError("width must be >= 2")
    net = LutNetwork([f"r{i}" for i in range(width)])
    sigs = [f"r{i}" for i in range(width - 1)]
    n = 0
    while len(sigs) > 1:
        nxt = []
        for i in range(0, len(sigs), 3):
            group = sigs[i:i + 3]
            cols = 1 << len(group)
            (o,) = net.add_unit(f"or{n}", CrossbarUnit(len(group), (tuple(int(c != 0) for c in range(cols)),), attrs=attrs), group)
            n += 1
            nxt.append(o)
        sigs = nxt
    (leq,) = net.add_unit("leq", CrossbarUnit(2, (_LEQ_ROW,), ("LEQ",), attrs=attrs), [sigs[0], f"r{width - 1}"])
    net.set_output("leq", leq)
    return net


def word_to_pins(prefix: str, value: int, width: int) -> dict[str, int]:
    return {f"{prefix}{i}": (value >> i) & 1 for i in range(width)}


class GateLevelAlu:
    """Subtraction and branch test evaluated through LUT networks."""

    def __init__(self, width: int, attrs: UnitAttrs = UnitAttrs()):
        self.width = width
        self.subtractor = build_subtractor(width, attrs)
        self.leq = build_leq_zero(width, attrs)

    def sub(self, a: int, b: int) -> int:
        pins = word_to_pins("a", a, self.width)
        pins.update(word_to_pins("b", b, self.width))
        out = self.subtractor.evaluate(pins)
        return sum(out[f"d{i}"] << i for i in range(self.width))

    def leq_zero(self, r: int) -> bool:
        return bool(self.leq.evaluate(word_to_pins("r", r, self.width))["leq"])


# --------------------------------------------------------------------------
# area


class AreaPreset(Enum):
    TESTABLE = "testable"
    OPTIMIZED = "optimized"


@dataclass(frozen=True)
class AreaParams:
    optimized_sin_mm2: float = 4.2
    optimized_inp_mm2: float = 3.7
    te_per_unit: float = 1500.0


@dataclass(frozen=True)
class AreaReport:
    sin_mm2: float = 0.0
    inp_mm2: float = 0.0
    cells: int = 0
    crossbar_mm2: float = 0.0
    transistor_equiv: float = 0.0
    units: int = 0

    @property
    def total_mm2(self) -> float:
        return self.sin_mm2 + self.inp_mm2

    @property
    def density(self) -> float:
        """Transistor equivalents per mm^2 (0 for an empty network)."""
        return self.transistor_equiv / self.total_mm2 if self.total_mm2 else 0.0

    def __add__(self, other: "AreaReport") -> "AreaReport":
        return AreaReport(
            self.sin_mm2 + other.sin_mm2,
            self.inp_mm2 + other.inp_mm2,
            self.cells + other.cells,
            self.crossbar_mm2 + other.crossbar_mm2,
            self.transistor_equiv + other.transistor_equiv,
            self.units + other.units,
        )


def area_report(network: LutNetwork, preset: AreaPreset = AreaPreset.TESTABLE,
                params: AreaParams = AreaParams()) -> AreaReport:
    total = AreaReport()
    for node in network.units:
        u = node.unit
        cells = u.nonzero_cells
        xbar = cells * u.attrs.cell_area
        if preset is AreaPreset.TESTABLE:
            sin, inp = u.attrs.decoder_area_sin + xbar, u.attrs.decoder_area_inp
        else:
            sin, inp = params.optimized_sin_mm2, params.optimized_inp_mm2
        total = total + AreaReport(sin, inp, cells, xbar, params.te_per_unit, 1)
    return total


# --------------------------------------------------------------------------
# text dump


def dump_network(network: LutNetwork) -> str:
    """Line-oriented description: ``input``, ``unit``, ``regen`` and ``output`` records."""
    lines = [f"input {pin}" for pin in network.inputs]
    for node in network.nodes.values():
        srcs = " ".join(f"{s}@{e:g}" for s, e in zip(node.inputs, node.edge_lengths_m))
        if node.regen is not None:
            lines.append(f"regen {node.name} gain_db={node.regen.gain_db:g} path_m={node.regen.path_length_m:g} <- {srcs}")
            continue
        u = node.unit
        rows = ",".join("".join(map(str, r)) for r in u.matrix)
        names = ",".join(u.row_names) if u.row_names else "-"
        a = u.attrs
        lines.append(
            f"unit {node.name} k={u.input_bits} rows={rows} names={names} cells={u.nonzero_cells} "
            f"reconf={int(u.reconfigurable)} path_m={a.path_length_m:g} il_db={a.insertion_loss_db:g} <- {srcs}"
        )
    lines += [f"output {name} = {src}" for name, src in network.outputs.items()]
    return "\n".join(lines) + "\n"


def load_network(text: str, attrs: UnitAttrs = UnitAttrs()) -> LutNetwork:
    net = LutNetwork()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            kind, rest = line.split(None, 1)
            if kind == "input":
                net.add_input(rest.strip())
            elif kind == "output":
                name, src = (s.strip() for s in rest.split("=", 1))
                net.set_output(name, src)
            elif kind in ("unit", "regen"):
                head, srcs = rest.split("<-", 1)
                name, *kvs = head.split()
                kv = dict(item.split("=", 1) for item in kvs)
                pairs = [s.rsplit("@", 1) for s in srcs.split()]
                inputs = [p[0] for p in pairs]
                lengths = [float(p[1]) if len(p) > 1 else 0.0 for p in pairs]
                if kind == "regen":
                    net.add_regen(name, inputs[0], Regenerator(float(kv["gain_db"]), float(kv.get("path_m", 0))), lengths[0])
                else:
                    rows = tuple(tuple(int(c) for c in r) for r in kv["rows"].split(","))
                    names = () if kv.get("names", "-") == "-" else tuple(kv["names"].split(","))
                    ua = replace(attrs, path_length_m=float(kv.get("path_m", 0)), insertion_loss_db=float(kv.get("il_db", 0)))
                    unit = CrossbarUnit(int(kv["k"]), rows, names, bool(int(kv.get("reconf", 0))), ua)
                    net.add_unit(name, unit, inputs, lengths)
            else:
                raise LogicError(f"unknown record {kind!r}")
        except (ValueError, KeyError, IndexError) as exc:
            raise LogicError(f"line {lineno}: {exc}") from None
    return net
