"""Generators for the demonstration programs.

All of them target the 2-bit machine unless stated otherwise.  Values are
compared with the SUBLEQ branch (``<= 0``) only, so selecting among the
four 2-bit values takes a chain of up to three tests (:func:`dispatch`).
"""

from __future__ import annotations

from importlib import resources
from itertools import count


class _Labels:
    def __init__(self, prefix: str = "L"):
        self._n = count()
        self.prefix = prefix

    def __call__(self, hint: str = "") -> str:
        return f"{self.prefix}{hint}_{next(self._n)}"


def dispatch(cell: str, bodies: dict[int, list[str]], labels: _Labels, scratch: str = "tmp") -> list[str]:
    """Branch on a 2-bit cell; ``bodies[v]`` runs when the cell holds v."""
    if len({tuple(b) for b in bodies.values()}) == 1:
        return list(bodies[0])
    done, not1, not2, zero = labels("done"), labels("n1"), labels("n2"), labels("z")
    out = [f"    SUBLEQ [{cell}], [0], [{scratch}*], {not1}"]   # falls through only for 1
    out += bodies[1] + [f"    JMP {done}"]
    out += [f"{not1}: SUBLEQ [{cell}], [1], [{scratch}*], {not2}"]  # 0, 3 branch; 2 falls through
    out += bodies[2] + [f"    JMP {done}"]
    out += [f"{not2}: SUBLEQ [{cell}], [2], [{scratch}*], {zero}"]  # 0 branches; 3 falls through
    out += bodies[3] + [f"    JMP {done}"]
    out += [f"{zero}:"] + bodies[0]
    out += [f"{done}:"]
    return out


def _limbs(value: int, n: int) -> list[int]:
    return [(value >> (2 * i)) & 3 for i in range(n)]


def multiword_add_source(x: int, y: int, limbs: int = 8) -> str:
    """Add two ``2*limbs``-bit numbers on the 2-bit machine, limb by limb.

    Each limb sum goes out through MMIO, least significant first, followed
    by the final carry.
    """
    lab = _Labels()
    out = [
        f"; {2 * limbs}-bit addition with {limbs} two-bit limbs",
        ".config word=2, data=8, instr=11, cow=on",
        ".org 0",
    ]
    out += [f"a{i}: .word {v}" for i, v in enumerate(_limbs(x, limbs))]
    out += [f"b{i}: .word {v}" for i, v in enumerate(_limbs(y, limbs))]
    out += ["c: .word 0", "s: .space 1", "tmp: .space 1", ""]
    for i in range(limbs):
        out += [
            f"; limb {i}",
            f"    ADD [a{i}], [b{i}], [s*]",
            "    ADD [s], [c], [s*]",
            "    MOV [s], [MMIO]",
        ]
        # carry out: 1 if a+b >= 4, 0 if a+b <= 2, carry in unchanged if a+b == 3
        outer = {}
        for av in range(4):
            inner = {}
            for bv in range(4):
                total = av + bv
                inner[bv] = ["    MOV [1], [c*]"] if total >= 4 else [] if total == 3 else ["    MOV [0], [c*]"]
            outer[av] = dispatch(f"b{i}", inner, lab)
        out += dispatch(f"a{i}", outer, lab)
    out += ["    MOV [c], [MMIO]", "    HALT", ""]
    return "\n".join(out)


def decode_limbs(words: list[int]) -> int:
    return sum((w & 3) << (2 * i) for i, w in enumerate(words))


def _ripple(dst: list[str], src: list[str], lab: _Labels) -> list[str]:
    """dst += src over single-bit cells; each bit sum a+b+c fits one 2-bit word."""
    out = ["    MOV [0], [c*]"]
    for d, s in zip(dst, src):
        nxt, lx, ly, l0 = lab("next"), lab("x"), lab("y"), lab("z")
        out += [
            f"    ADD [{d}], [{s}], [t*]",
            "    ADD [t], [c], [t*]",
            f"    SUBLEQ [t], [1], [tmp*], {lx}",   # only t=2 falls through
            f"    MOV [0], [{d}*]", "    MOV [1], [c*]", f"    JMP {nxt}",
            f"{lx}: SUBLEQ [t], [0], [tmp*], {ly}",  # only t=1 falls through
            f"    MOV [1], [{d}*]", "    MOV [0], [c*]", f"    JMP {nxt}",
            f"{ly}: SUBLEQ [t], [2], [tmp*], {l0}",  # only t=3 falls through
            f"    MOV [1], [{d}*]", "    MOV [1], [c*]", f"    JMP {nxt}",
            f"{l0}: MOV [0], [{d}*]", "    MOV [0], [c*]",
            f"{nxt}:",
        ]
    return out


def multiply_source(x: int, y: int, bits: int = 4) -> str:
    """``x * y`` by conditional shift-and-add; the multiplicand is doubled by adding it to itself.

    Operands arrive as 2-bit limbs and are unpacked into one bit per word;
    the ``2*bits``-bit product leaves through MMIO as 2-bit limbs.
    """
    if bits % 2:
        raise ValueError("operand width must be a whole number of limbs")
    lab = _Labels()
    width = 2 * bits
    nl = bits // 2
    out = [
        f"; {bits}x{bits}-bit multiply by conditional shift-add",
        ".config word=2, data=10, instr=12, cow=on",
        ".org 0",
    ]
    out += [f"x{i}: .word {v}" for i, v in enumerate(_limbs(x, nl))]
    out += [f"y{i}: .word {v}" for i, v in enumerate(_limbs(y, nl))]
    out += [f"p{j}: .word 0" for j in range(width)]
    out += [f"m{j}: .space 1" for j in range(bits)]
    out += [f"m{j}: .word 0" for j in range(bits, width)]
    out += [f"q{j}: .space 1" for j in range(bits)]
    out += ["c: .space 1", "t: .space 1", "tmp: .space 1", ""]
    for prefix, src in (("m", "x"), ("q", "y")):
        for i in range(nl):
            out += [f"; unpack {src}{i}"]
            out += dispatch(f"{src}{i}", {
                v: [f"    MOV [{v & 1}], [{prefix}{2 * i}*]", f"    MOV [{v >> 1}], [{prefix}{2 * i + 1}*]"]
                for v in range(4)}, lab)
    acc = [f"p{j}" for j in range(width)]
    mul = [f"m{j}" for j in range(width)]
    for i in range(bits):
        skip = lab("skip")
        out += [f"; multiplier bit {i}", f"    SUBLEQ [q{i}], [0], [tmp*], {skip}"]
        out += _ripple(acc, mul, lab)
        out += [f"{skip}:"]
        if i < bits - 1:
            out += ["; double the multiplicand"] + _ripple(mul, mul, lab)
    out += ["; pack the product into 2-bit limbs"]
    for k in range(width // 2):
        out += [f"    ADD [p{2 * k + 1}], [p{2 * k + 1}], [t*]", f"    ADD [t], [p{2 * k}], [MMIO]"]
    out += ["    HALT", ""]
    return "\n".join(out)


def counters_source(threads: int = 40, reps: int = 3, word: int = 8) -> tuple[str, list[str]]:
    """One counting loop per thread over disjoint cells; returns (source, entry labels)."""
    out = [f"; {threads} independent counters", f".config word={word}, data=8, instr=9, cow=on", ".org 0"]
    for k in range(threads):
        out += [f"ctr{k}: .word 0", f"n{k}: .word {reps}"]
    entries = []
    for k in range(threads):
        entries.append(f"t{k}")
        out += [
            f"t{k}: INC [ctr{k}]",
            f"    SUBLEQ [n{k}], [1], [n{k}*], done{k}",
            f"    JMP t{k}",
            f"done{k}: HALT",
        ]
    return "\n".join(out) + "\n", entries


def sample_text(name: str) -> str:
    """Contents of a bundled ``samples/*.asm`` file."""
    return resources.files(__package__).joinpath("samples").joinpath(name).read_text(encoding="utf-8")


def sample_names() -> list[str]:
    return sorted(p.name for p in resources.files(__package__).joinpath("samples").iterdir() if p.name.endswith(".asm"))
