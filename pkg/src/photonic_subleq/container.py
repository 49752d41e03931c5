"""OSLQ binary program container.

Layout (little-endian)::

    header   "OSLQ" u8 version u8 word u8 data_addr u8 instr_addr u32 n_instr u32 n_data
    instr    n_instr x (u32 a, u32 b, u32 c, u32 j, u8 flags, 3 zero bytes)
    data     n_data x (u32 addr, u32 value)
    debug    optional: "ODBG" then per instruction (u8 length, utf-8 mnemonic)

The debug trailer is written only when some instruction has a provenance
other than ``raw``; readers treat a missing trailer as all-raw.
"""

from __future__ import annotations

import struct

from .isa import HALT, RAW, ImageError, ImageHeader, Instruction, Operand, ProgramImage

MAGIC = b"OSLQ"
DEBUG_MAGIC = b"ODBG"
VERSION = 1

_HEADER = struct.Struct("<4sBBBBII")
_INSTR = struct.Struct("<IIIIB3x")
_DATA = struct.Struct("<II")

HEADER_SIZE = _HEADER.size
INSTR_SIZE = _INSTR.size
DATA_SIZE = _DATA.size

A_INDIRECT = 0x01
B_INDIRECT = 0x02
C_INDIRECT = 0x04
C_COW = 0x08


class ContainerError(ValueError):
    pass


class BadMagic(ContainerError):
    pass


class VersionMismatch(ContainerError):
    pass


class TruncatedStream(ContainerError):
    pass


class AddressOutOfRange(ContainerError):
    pass


class MalformedRecord(ContainerError):
    pass


def _flags(ins: Instruction) -> int:
    f = 0
    if ins.a.indirect:
        f |= A_INDIRECT
    if ins.b.indirect:
        f |= B_INDIRECT
    if ins.c.indirect:
        f |= C_INDIRECT
    if ins.c.cow:
        f |= C_COW
    return f


def encode_program(image: ProgramImage) -> bytes:
    image.validate()
    h = image.header
    out = bytearray(
        _HEADER.pack(
            MAGIC,
            VERSION,
            h.word_width_bits,
            h.data_addr_width_bits,
            h.instr_addr_width_bits,
            len(image.instructions),
            len(image.data),
        )
    )
    for ins in image.instructions:
        out += _INSTR.pack(ins.a.addr, ins.b.addr, ins.c.addr, ins.j, _flags(ins))
    for addr, value in image.data:
        out += _DATA.pack(addr, value)
    if any(d != RAW for d in image.debug):
        out += DEBUG_MAGIC
        for d in image.debug:
            raw = d.encode("utf-8")
            if len(raw) > 255:
                raise ContainerError(f"debug entry too long: {d!r}")
            out += bytes([len(raw)]) + raw
    return bytes(out)


def _take(buf: bytes, pos: int, n: int, what: str) -> int:
    if pos + n > len(buf):
        raise TruncatedStream(f"stream ends inside {what} (need {pos + n} bytes, have {len(buf)})")
    return pos + n


def decode_program(buf: bytes) -> ProgramImage:
    buf = bytes(buf)
    if len(buf) >= 4 and buf[:4] != MAGIC:
        raise BadMagic(f"bad magic {buf[:4]!r}")
    _take(buf, 0, HEADER_SIZE, "header")
    magic, version, word, daddr, iaddr, n_instr, n_data = _HEADER.unpack_from(buf, 0)
    if version != VERSION:
        raise VersionMismatch(f"container version {version}, expected {VERSION}")
    header = ImageHeader(word, daddr, iaddr)
    pos = HEADER_SIZE
    instrs = []
    n_space = 1 << daddr
    for i in range(n_instr):
        end = _take(buf, pos, INSTR_SIZE, f"instruction record {i}")
        a, b, c, j, flags = _INSTR.unpack_from(buf, pos)
        if buf[pos + 17 : end] != b"\0\0\0" or flags & ~0x0F:
            raise MalformedRecord(f"instruction record {i} has reserved bits set")
        for name, addr in (("a", a), ("b", b), ("c", c)):
            if addr >= n_space:
                raise AddressOutOfRange(f"instruction {i}: {name}={addr:#x} exceeds {daddr}-bit data space")
        if j != HALT and j >= (1 << iaddr):
            raise AddressOutOfRange(f"instruction {i}: j={j:#x} exceeds {iaddr}-bit ROM")
        instrs.append(
            Instruction(
                Operand(a, bool(flags & A_INDIRECT)),
                Operand(b, bool(flags & B_INDIRECT)),
                Operand(c, bool(flags & C_INDIRECT), bool(flags & C_COW)),
                j,
            )
        )
        pos = end
    data = []
    for i in range(n_data):
        end = _take(buf, pos, DATA_SIZE, f"data record {i}")
        addr, value = _DATA.unpack_from(buf, pos)
        if addr >= n_space:
            raise AddressOutOfRange(f"data record {i}: address {addr:#x} exceeds {daddr}-bit data space")
        data.append((addr, value))
        pos = end
    debug = None
    if pos < len(buf):
        end = _take(buf, pos, 4, "debug trailer")
        if buf[pos:end] != DEBUG_MAGIC:
            raise MalformedRecord(f"unexpected {len(buf) - pos} trailing bytes")
        pos = end
        debug = []
        for i in range(n_instr):
            end = _take(buf, pos, 1, f"debug entry {i}")
            n = buf[pos]
            end = _take(buf, end, n, f"debug entry {i}")
            debug.append(buf[pos + 1 : end].decode("utf-8"))
            pos = end
        if pos != len(buf):
            raise MalformedRecord(f"{len(buf) - pos} bytes after debug trailer")
    image = ProgramImage(header, tuple(instrs), tuple(data), None if debug is None else tuple(debug))
    try:
        return image.validate()
    except ImageError as exc:
        raise AddressOutOfRange(str(exc)) from exc
