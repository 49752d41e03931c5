"""SUBLEQ assembler with the common-instruction macro layer.

Operand syntax::

    [x]        memory cell at label x (``[x+2]``, ``[@0x1f]`` absolute)
    [5] [-1]   a pooled constant cell holding that value
    [x*]       write target with the copy-on-write flag
    [[p]]      indirect: the cell whose address is stored at p
    [[p*]*]    indirect write target with the COW flag (inner star is
               accepted and ignored, reads always go through the remap)

Jump fields are a label, an instruction index, ``IP+n`` or ``HALT``.
Directives: ``.word addr, value`` / ``label: .word value``, ``.space n``,
``.org addr``, ``.stack base, size``, ``.config key=value, ...`` and
``.debug NAME`` (provenance of the next quad, emitted by the disassembler).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .isa import HALT, RAW, ImageError, ImageHeader, Instruction, Operand, ProgramImage


class AsmError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None, source: str = "<asm>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        loc = source
        if line is not None:
            loc += f":{line}"
            if col is not None:
                loc += f":{col}"
        super().__init__(f"{loc}: {message}")


class ParseError(AsmError):
    pass


class AssemblyError(AsmError):
    pass


# --------------------------------------------------------------------------
# source representation

Term = tuple[int, object]  # (sign, int literal or identifier)


@dataclass(frozen=True)
class OperandRef:
    kind: str  # "const" | "addr"
    terms: tuple[Term, ...] = ()
    value: int = 0
    indirect: bool = False
    star: bool = False
    inner_star: bool = False

    def render(self) -> str:
        if self.kind == "const":
            core = str(self.value)
        else:
            core = _render_terms(self.terms)
        if self.indirect:
            core = f"[{core}{'*' if self.inner_star else ''}]"
        return f"[{core}{'*' if self.star else ''}]"


@dataclass(frozen=True)
class JumpRef:
    kind: str  # "halt" | "ip" | "expr"
    offset: int = 0
    terms: tuple[Term, ...] = ()

    def render(self) -> str:
        if self.kind == "halt":
            return "HALT"
        if self.kind == "ip":
            return "IP" if self.offset == 0 else f"IP{self.offset:+d}"
        return _render_terms(self.terms)


def _render_terms(terms) -> str:
    out = ""
    for i, (sign, t) in enumerate(terms):
        tok = f"@{t:#x}" if isinstance(t, int) and i == 0 and len(terms) == 1 else str(t)
        if i == 0:
            out = ("-" if sign < 0 else "") + tok
        else:
            out += ("-" if sign < 0 else "+") + tok
    return out


@dataclass
class Line:
    lineno: int
    labels: tuple[str, ...] = ()
    mnemonic: str | None = None
    operands: tuple = ()
    directive: str | None = None
    args: tuple = ()
    provenance: str | None = None


@dataclass
class SourceUnit:
    lines: list[Line] = field(default_factory=list)
    name: str = "<asm>"

    @property
    def quad_only(self) -> bool:
        return all(l.mnemonic in (None, "SUBLEQ") for l in self.lines)


@dataclass(frozen=True)
class MacroDef:
    mnemonic: str
    arity: int
    template: tuple[str, ...]
    derived: bool = False


# Quad templates in AT&T operand order (sources first, destination last).
MACROS: dict[str, MacroDef] = {
    m.mnemonic: m
    for m in (
        MacroDef("MOV", 2, ("SUBLEQ [A], [0], [B], IP+1",)),
        MacroDef("SUB", 3, ("SUBLEQ [A], [B], [C], IP+1",)),
        MacroDef("JMP", 1, ("SUBLEQ [0], [0], [T], J",)),
        MacroDef("ADD", 3, ("SUBLEQ [0], [A], [T], IP+1", "SUBLEQ [B], [T], [C], IP+1")),
        MacroDef("INC", 1, ("SUBLEQ [A], [-1], [A*], IP+1",)),
        MacroDef("PUSH", 1, ("SUBLEQ [SP], [1], [SP*], IP+1", "SUBLEQ [A], [0], [[SP*]*], IP+1")),
        MacroDef("HALT", 0, ("SUBLEQ [0], [0], [T], HALT",)),
        # extensions built from the same patterns
        MacroDef("DEC", 1, ("SUBLEQ [A], [1], [A*], IP+1",), derived=True),
        MacroDef("POP", 1, ("SUBLEQ [[SP]], [0], [A*], IP+1", "SUBLEQ [SP], [-1], [SP*], IP+1"), derived=True),
    )
}
MNEMONICS = ("SUBLEQ",) + tuple(MACROS)
CPI = {"SUBLEQ": 1, **{m.mnemonic: len(m.template) for m in MACROS.values()}}
DIRECTIVES = (".word", ".org", ".stack", ".config", ".space", ".debug")

# --------------------------------------------------------------------------
# parsing

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_NUM = r"(?:0[xX][0-9a-fA-F]+|0[bB][01]+|\d+)"
_LITERAL_RE = re.compile(rf"^-?\s*{_NUM}$")
_TERM_RE = re.compile(rf"\s*([+-])?\s*(@?)\s*({_NUM}|{_IDENT})\s*")
_LABEL_RE = re.compile(rf"^\s*({_IDENT})\s*:")
_IND_RE = re.compile(r"^\[\s*\[\s*(.+?)\s*(\*)?\s*\]\s*(\*)?\s*\]$")
_DIR_RE = re.compile(r"^\[\s*([^\[\]]+?)\s*(\*)?\s*\]$")


def _int(tok: str) -> int:
    return int(tok, 0) if not re.fullmatch(r"0\d+", tok) else int(tok, 10)


def parse_expr(text: str) -> tuple[Term, ...]:
    text = text.strip()
    pos, terms = 0, []
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"malformed expression {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        if terms and m.group(1) is None:
            raise ValueError(f"missing operator in {text!r}")
        tok = m.group(3)
        terms.append((sign, _int(tok) if tok[0].isdigit() else tok))
        pos = m.end()
    if not terms:
        raise ValueError("empty expression")
    return tuple(terms)


def parse_operand(text: str) -> OperandRef:
    text = text.strip()
    m = _IND_RE.match(text)
    if m:
        return OperandRef("addr", parse_expr(m.group(1)), indirect=True,
                          star=bool(m.group(3)), inner_star=bool(m.group(2)))
    m = _DIR_RE.match(text)
    if not m:
        raise ValueError(f"malformed operand {text!r}")
    core = m.group(1)
    if _LITERAL_RE.match(core):
        return OperandRef("const", value=_int(core.replace(" ", "").lstrip("-")) * (-1 if core.startswith("-") else 1),
                          star=bool(m.group(2)))
    return OperandRef("addr", parse_expr(core), star=bool(m.group(2)))


def parse_jump(text: str) -> JumpRef:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1].strip()
    if text.upper() == "HALT":
        return JumpRef("halt")
    m = re.fullmatch(r"IP\s*(?:([+-])\s*(" + _NUM + r"))?", text)
    if m:
        off = _int(m.group(2)) if m.group(2) else 0
        return JumpRef("ip", -off if m.group(1) == "-" else off)
    return JumpRef("expr", terms=parse_expr(text))


def _split_args(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip() or parts:
        parts.append(cur)
    return [p.strip() for p in parts]


def parse(text: str, name: str = "<asm>") -> SourceUnit:
    unit = SourceUnit(name=name)
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split(";", 1)[0]
        labels = []
        while True:
            m = _LABEL_RE.match(body)
            if not m:
                break
            lab = m.group(1)
            if lab.upper() in MNEMONICS or lab.upper() in ("IP", "SP", "HALT"):
                raise ParseError(f"reserved word {lab!r} used as a label", lineno, m.start(1) + 1, name)
            if lab in seen:
                raise ParseError(f"duplicate label {lab!r}", lineno, m.start(1) + 1, name)
            seen.add(lab)
            labels.append(lab)
            body = body[m.end():]
        stripped = body.strip()
        if not stripped:
            if labels:
                unit.lines.append(Line(lineno, tuple(labels)))
            continue
        col = raw.find(stripped) + 1
        head, *more = stripped.split(None, 1)
        rest = more[0] if more else ""
        args = _split_args(rest)
        if head.startswith("."):
            d = head.lower()
            if d not in DIRECTIVES:
                raise ParseError(f"unknown directive {head!r}", lineno, col, name)
            unit.lines.append(Line(lineno, tuple(labels), directive=d, args=tuple(args)))
            continue
        mn = head.upper()
        if mn not in MNEMONICS:
            raise ParseError(f"unknown mnemonic {head!r}", lineno, col, name)
        arity = 4 if mn == "SUBLEQ" else MACROS[mn].arity
        if mn == "SUBLEQ" and len(args) == 3:
            args.append("IP+1")
        if len(args) != arity:
            raise ParseError(f"{mn} takes {arity} operands, got {len(args)}", lineno, col, name)
        ops = []
        for i, a in enumerate(args):
            acol = raw.find(a, col) + 1 if a else col
            try:
                if (mn == "SUBLEQ" and i == 3) or mn == "JMP":
                    ops.append(parse_jump(a))
                else:
                    ops.append(parse_operand(a))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, acol, name) from None
        unit.lines.append(Line(lineno, tuple(labels), mnemonic=mn, operands=tuple(ops)))
    return unit


# --------------------------------------------------------------------------
# configuration carried in the source


@dataclass(frozen=True)
class AsmConfig:
    word: int = 2
    data: int = 8
    instr: int = 8
    cow: bool = True


def _source_config(unit: SourceUnit) -> AsmConfig:
    cfg = {}
    for line in unit.lines:
        if line.directive != ".config":
            continue
        for arg in line.args:
            key, _, value = (s.strip() for s in arg.partition("="))
            key = key.lower()
            try:
                if key in ("word", "data", "instr"):
                    cfg[key] = int(value, 0)
                elif key == "cow":
                    if value.lower() not in ("on", "off", "1", "0", "true", "false"):
                        raise ValueError(value)
                    cfg[key] = value.lower() in ("on", "1", "true")
                else:
                    raise AssemblyError(f"unknown .config key {key!r}", line.lineno, source=unit.name)
            except ValueError:
                raise AssemblyError(f"bad value for {key}: {value!r}", line.lineno, source=unit.name) from None
    return AsmConfig(**cfg)


# --------------------------------------------------------------------------
# macro expansion

_PLACEHOLDERS = ("A", "B", "C")
_TEMPLATES = {mn: [parse(t).lines[0] for t in m.template] for mn, m in MACROS.items()}


def _single_name(ref: OperandRef) -> str | None:
    if ref.kind == "addr" and len(ref.terms) == 1 and ref.terms[0][0] == 1 and isinstance(ref.terms[0][1], str):
        return ref.terms[0][1]
    return None


def _subst(tmpl: OperandRef, params: dict, scratch: tuple[Term, ...], cow: bool, lineno: int, src: str) -> OperandRef:
    name = _single_name(tmpl)
    if name in params:
        user: OperandRef = params[name]
        if tmpl.indirect and user.indirect:
            raise AssemblyError("double indirection is not encodable", lineno, source=src)
        return replace(user, indirect=user.indirect or tmpl.indirect, star=user.star or tmpl.star)
    if name == "T":
        return OperandRef("addr", scratch, indirect=tmpl.indirect, star=tmpl.star or cow)
    if name == "SP":
        return OperandRef("addr", ((1, "SP"),), indirect=tmpl.indirect, star=tmpl.star, inner_star=tmpl.inner_star)
    return tmpl


def expand_macros(unit: SourceUnit) -> SourceUnit:
    """Rewrite every macro line as SUBLEQ quads; provenance records the macro."""
    cfg = _source_config(unit)
    has_stack = any(l.directive == ".stack" for l in unit.lines)
    out = SourceUnit(name=unit.name)
    n_scratch = 0
    pending_debug = None
    for line in unit.lines:
        if line.mnemonic in (None, "SUBLEQ"):
            if line.directive == ".debug":
                pending_debug = line.args[0] if line.args and line.args[0] else RAW
            if line.mnemonic == "SUBLEQ":
                if line.provenance is None:
                    line = replace(line, provenance=pending_debug or RAW)
                pending_debug = None
            out.lines.append(line)
            continue
        mn = line.mnemonic
        if mn in ("PUSH", "POP") and not has_stack:
            raise AssemblyError(f"{mn} needs a stack region (.stack base, size)", line.lineno, source=unit.name)
        if cfg.cow:
            scratch = ((1, f"__T{n_scratch}"),)
            n_scratch += 1
        else:
            scratch = ((1, "__T"),)
        params = dict(zip(_PLACEHOLDERS, line.operands))
        jump = line.operands[0] if mn == "JMP" else None
        for k, tline in enumerate(_TEMPLATES[mn]):
            a, b, c, j = tline.operands
            a, b, c = (_subst(op, params, scratch, cfg.cow if op is c else False, line.lineno, unit.name) for op in (a, b, c))
            if j.kind == "expr" and j.terms == ((1, "J"),):
                j = jump
            out.lines.append(Line(line.lineno, line.labels if k == 0 else (), "SUBLEQ", (a, b, c, j),
                                  provenance=pending_debug or mn))
        pending_debug = None
    return out


# --------------------------------------------------------------------------
# layout and resolution


@dataclass
class Assembly:
    image: ProgramImage
    symbols: dict[str, int]
    constants: dict[int, int]
    scratch: dict[str, int]


def _eval(terms, symbols: dict[str, int], lineno: int, src: str) -> int:
    total = 0
    for sign, t in terms:
        if isinstance(t, str):
            if t not in symbols:
                raise AssemblyError(f"unresolved label {t!r}", lineno, source=src)
            t = symbols[t]
        total += sign * t
    return total


def _representable(value: int, width: int, lineno: int, src: str) -> int:
    if not -(1 << (width - 1)) <= value < (1 << width):
        raise AssemblyError(f"constant {value} not representable in {width} bits", lineno, source=src)
    return value & ((1 << width) - 1)


def assemble_unit(unit: SourceUnit) -> Assembly:
    cfg = _source_config(unit)
    src = unit.name
    unit = expand_macros(unit)
    n_space, m_space = 1 << cfg.data, 1 << cfg.instr
    header = ImageHeader(cfg.word, cfg.data, cfg.instr)
    try:
        header.machine_config()
    except ValueError as exc:
        raise AssemblyError(str(exc), source=src) from None

    # pass 1: place instructions and data, bind labels
    symbols: dict[str, int] = {}
    code_labels: set[str] = set()
    reserved: set[int] = set()
    word_defs: list[tuple[Line, object, object]] = []  # (line, addr terms or int, value text)
    dot = 0
    pc = 0
    stack = None
    floating: list[str] = []
    for line in unit.lines:
        labels = floating + list(line.labels)
        floating = []
        if line.mnemonic == "SUBLEQ":
            for lab in labels:
                symbols[lab] = pc
                code_labels.add(lab)
            pc += 1
            continue
        d = line.directive
        if d is None or d in (".config", ".debug"):
            floating = labels
            continue
        try:
            if d == ".org":
                (arg,) = line.args
                dot = _eval(parse_expr(arg), symbols, line.lineno, src)
                floating = labels
            elif d == ".word":
                if len(line.args) == 2:
                    addr_terms = parse_expr(line.args[0])
                    word_defs.append((line, addr_terms, line.args[1]))
                    if labels:
                        raise AssemblyError("labels bind to one-argument .word only", line.lineno, source=src)
                elif len(line.args) == 1:
                    for lab in labels:
                        symbols[lab] = dot
                    word_defs.append((line, dot, line.args[0]))
                    reserved.add(dot)
                    dot += 1
                else:
                    raise AssemblyError(".word takes 'addr, value' or 'value'", line.lineno, source=src)
            elif d == ".space":
                (arg,) = line.args
                n = _int(arg)
                for lab in labels:
                    symbols[lab] = dot
                reserved.update(range(dot, dot + n))
                dot += n
            elif d == ".stack":
                base, size = (_int(a) for a in line.args)
                if size <= 0 or base + size > (1 << cfg.word):
                    raise AssemblyError(
                        f"stack [{base}, {base + size}) must lie below 2^{cfg.word} so SP can address it",
                        line.lineno, source=src)
                stack = (base, size)
                reserved.update(range(base, base + size))
                for lab in labels:
                    symbols[lab] = base
        except (TypeError, ValueError) as exc:
            if isinstance(exc, AsmError):
                raise
            raise AssemblyError(f"bad {d} arguments: {exc}", line.lineno, source=src) from None
    for lab in floating:
        symbols[lab] = pc
        code_labels.add(lab)
    if pc > m_space:
        raise AssemblyError(f"{pc} instructions overflow the {cfg.instr}-bit instruction space", source=src)

    symbols.setdefault("MMIO", n_space - 1)
    mmio = symbols["MMIO"]

    # explicit .word addresses (may reference labels)
    data: list[tuple[int, int]] = []
    for line, addr, value_text in word_defs:
        if not isinstance(addr, int):
            addr = _eval(addr, symbols, line.lineno, src)
        if not 0 <= addr < n_space:
            raise AssemblyError(f"data address {addr:#x} outside the {cfg.data}-bit space", line.lineno, source=src)
        reserved.add(addr)
        try:
            value = _eval(parse_expr(value_text), symbols, line.lineno, src)
        except ValueError as exc:
            raise AssemblyError(str(exc), line.lineno, source=src) from None
        data.append((addr, _representable(value, cfg.word, line.lineno, src)))

    # pass 2: allocator for constants, scratch and SP cells
    cursor = max([a for a in reserved if a != mmio], default=-1) + 1
    allocated: list[tuple[int, int | None]] = []

    def alloc(init: int | None) -> int:
        nonlocal cursor
        while cursor in reserved or cursor == mmio:
            cursor += 1
        if cursor >= n_space:
            raise AssemblyError(f"data allocation overflows the {cfg.data}-bit address space", source=src)
        addr = cursor
        reserved.add(addr)
        allocated.append((addr, init))
        return addr

    constants: dict[int, int] = {}
    scratch: dict[str, int] = {}
    if stack is not None:
        symbols["SP"] = alloc((stack[0] + stack[1]) & ((1 << cfg.word) - 1))

    def resolve(ref: OperandRef, lineno: int) -> Operand:
        if ref.kind == "const":
            v = _representable(ref.value, cfg.word, lineno, src)
            if v not in constants:
                constants[v] = alloc(v)
            addr = constants[v]
        else:
            name = _single_name(ref)
            if name is not None and name.startswith("__T"):
                if name not in scratch:
                    scratch[name] = alloc(None)
                addr = scratch[name]
            else:
                addr = _eval(ref.terms, symbols, lineno, src)
        if not 0 <= addr < n_space:
            raise AssemblyError(f"operand address {addr:#x} outside the {cfg.data}-bit space", lineno, source=src)
        return Operand(addr, ref.indirect, False)

    instrs: list[Instruction] = []
    debug: list[str] = []
    for line in unit.lines:
        if line.mnemonic != "SUBLEQ":
            continue
        a, b, c, j = line.operands
        ra, rb, rc = resolve(a, line.lineno), resolve(b, line.lineno), resolve(c, line.lineno)
        rc = replace(rc, cow=c.star)
        idx = len(instrs)
        if j.kind == "halt":
            target = HALT
        elif j.kind == "ip":
            target = idx + j.offset
        else:
            target = _eval(j.terms, symbols, line.lineno, src)
        if target != HALT and not 0 <= target < m_space:
            raise AssemblyError(f"jump target {target} outside the {cfg.instr}-bit instruction space",
                                line.lineno, source=src)
        instrs.append(Instruction(ra, rb, rc, target))
        debug.append(line.provenance or RAW)

    data += [(addr, init) for addr, init in allocated if init is not None]
    image = ProgramImage(header, tuple(instrs), tuple(data), tuple(debug))
    try:
        image.validate()
    except ImageError as exc:
        raise AssemblyError(str(exc), source=src) from None
    return Assembly(image, symbols, constants, scratch)


def assemble(unit: SourceUnit) -> ProgramImage:
    return assemble_unit(unit).image


def assemble_text(text: str, name: str = "<asm>") -> ProgramImage:
    return assemble(parse(text, name))


def disassemble(image: ProgramImage) -> str:
    h = image.header
    out = [f".config word={h.word_width_bits}, data={h.data_addr_width_bits}, instr={h.instr_addr_width_bits}"]
    out += [f".word @{addr:#x}, {value}" for addr, value in image.data]
    for i, (ins, prov) in enumerate(zip(image.instructions, image.debug)):
        if prov != RAW:
            out.append(f".debug {prov}")
        out.append(f"{str(ins):<48}; {i}")
    return "\n".join(out) + "\n"
