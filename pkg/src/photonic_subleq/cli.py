"""Command-line entry point: ``photonic-subleq {asm,disasm,run,synth,report}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import assembler, container, logic, metrics
from .config import ConfigFileError, SimConfig, load_config
from .cpu import AluMode, ExecMode, InstructionFault, Machine, trace_text
from .isa import ConfigError, ImageError, RwormMode
from .memory import MemoryFault, round_trip_time

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ASSEMBLY = 3
EXIT_FAULT = 4
EXIT_LIMIT = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_PARSE) from None


def _load_program(path: str) -> tuple[object, dict[str, int]]:
    """Image plus label table; ``.asm`` inputs are assembled on the fly."""
    if path.endswith(".asm"):
        asm = assembler.assemble_unit(assembler.parse(_read_text(path), path))
        return asm.image, asm.symbols
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_PARSE) from None
    try:
        return container.decode_program(data), {}
    except container.ContainerError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def _config(path: str | None) -> SimConfig:
    return load_config(path) if path else SimConfig()


def _parse_entries(text: str | None, symbols: dict[str, int]) -> list[int] | None:
    if not text:
        return None
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in symbols:
            out.append(symbols[tok])
        else:
            try:
                out.append(int(tok, 0))
            except ValueError:
                raise CliError(f"unknown entry point {tok!r}", EXIT_PARSE) from None
    return out


def _cycle_time_ns(cfg: SimConfig) -> float:
    if cfg.cycle_time_ns is not None:
        return cfg.cycle_time_ns
    if cfg.l_max_mm is not None:
        return metrics.cycle_time(cfg.timing_model())
    return 1.0


# -- subcommands

def cmd_asm(args) -> int:
    image = assembler.assemble_text(_read_text(args.input), args.input)
    out = args.output or str(Path(args.input).with_suffix(".oslq"))
    Path(out).write_bytes(container.encode_program(image))
    return EXIT_OK


def cmd_disasm(args) -> int:
    image, _ = _load_program(args.input)
    text = assembler.disassemble(image)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _build_machine(args, trace=None, keep_records=False):
    image, symbols = _load_program(args.image)
    cfg = _config(args.config)
    threads = args.threads if args.threads is not None else cfg.threads
    cow = cfg.cow if args.cow is None else args.cow == "on"
    rworm = RwormMode(args.rworm) if args.rworm else cfg.rworm
    mcfg = image.header.machine_config(thread_count=threads, thread_spacing_ps=cfg.thread_spacing_ps,
                                       cow_enabled=cow, rworm_mode=rworm)
    mode = ExecMode(AluMode(args.exec), args.signal_check)
    m = Machine(image, mcfg, memory_map=cfg.memory_map(mcfg.data_addr_width_bits), mode=mode,
                cycle_time_ns=_cycle_time_ns(cfg), fault_unwritten=args.fault_unwritten,
                trace=trace, keep_records=keep_records)
    entries = _parse_entries(args.entries, symbols)
    if entries is not None:
        m.spawn_threads(entries)
    return m, image


def cmd_run(args) -> int:
    fh = open(args.trace, "w", encoding="utf-8", newline="\n") if args.trace else None
    try:
        m, _ = _build_machine(args, trace=fh)
        report = m.run(args.max_cycles)
    finally:
        if fh:
            fh.close()
    print(f"status={report.status} cycles={report.cycles} retired={report.retired}")
    print("mmio=" + ",".join(str(v) for v in report.mmio))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if report.halted else EXIT_LIMIT


def cmd_synth(args) -> int:
    cfg = _config(args.params)
    try:
        tables = logic.parse_truth_tables(_read_text(args.tables))
    except logic.SynthesisError as exc:
        raise CliError(f"{args.tables}: {exc}", EXIT_PARSE) from None
    net = logic.synthesize(tables, args.max_inputs, cfg.unit_attrs())
    dump = logic.dump_network(net)
    if args.output:
        Path(args.output).write_text(dump, encoding="utf-8")
    else:
        sys.stdout.write(dump)
    _print_area(net, cfg, ("testable", "optimized"))
    return EXIT_OK


def _print_area(net, cfg: SimConfig, presets) -> dict:
    reports = {}
    for name in presets:
        r = logic.area_report(net, logic.AreaPreset(name), cfg.area_params())
        reports[name] = r
        for key, value, unit in (("units", r.units, ""), ("cells", r.cells, ""),
                                 ("crossbar", r.crossbar_mm2, "mm2"), ("sin", r.sin_mm2, "mm2"),
                                 ("inp", r.inp_mm2, "mm2"), ("total", r.total_mm2, "mm2"),
                                 ("te", r.transistor_equiv, "Te"), ("density", r.density, "Te/mm2")):
            print(metrics.format_metric(f"{name}.{key}", value, unit))
    return reports


def _network(path: str | None, cfg: SimConfig):
    if path is None:
        return None
    return logic.load_network(_read_text(path), cfg.unit_attrs())


def cmd_report(args) -> int:
    cfg = _config(args.config)
    if args.kind == "area":
        net = _network(args.network, cfg)
        if net is None:
            net = logic.LutNetwork(["a", "b", "cin"])
            net.add_unit("fa", logic.full_adder_unit(cfg.unit_attrs()), ["a", "b", "cin"])
        presets = ("testable", "optimized") if args.preset == "both" else (args.preset,)
        reports = _print_area(net, cfg, presets)
        if args.figure:
            from .plotting import area_figure
            area_figure(reports, args.figure)
    elif args.kind == "timing":
        if args.group_index is not None:
            cfg.group_index = args.group_index
        if args.l_max_mm is not None:
            cfg.l_max_mm = args.l_max_mm
        banks = [b.build() for b in cfg.banks]
        if cfg.l_max_mm is not None:
            model = cfg.timing_model()
        else:
            net = _network(args.network, cfg)
            if net is None and not banks:
                raise CliError("timing needs l_max_mm, a network or memory banks", EXIT_PARSE)
            l_max = metrics.derive_l_max(net, banks, cfg.regen_delay_mm * 1e-3)
            model = cfg.timing_model(l_max)
        threads = args.threads if args.threads is not None else cfg.threads
        print(metrics.format_metric("l_max", model.l_max_m * 1e3, "mm"))
        print(metrics.format_metric("group_index", model.group_index))
        print(metrics.format_metric("t_cycle", metrics.cycle_time(model), "ns"))
        print(metrics.format_metric("thread_spacing", model.thread_spacing_ps, "ps"))
        print(metrics.format_metric("max_threads", metrics.max_threads(model)))
        print(metrics.format_metric("threads", threads))
        print(metrics.format_metric("throughput", metrics.throughput(model, threads), "ops/s"))
        for i, b in enumerate(banks):
            print(metrics.format_metric(f"round_trip.{i}.{b.kind.value}",
                                        round_trip_time(b, model.group_index, model.c), "ns"))
        if args.figure:
            from .plotting import timing_figure
            timing_figure(model, args.figure)
    else:
        debug = None
        if args.trace:
            records = metrics.parse_trace(_read_text(args.trace))
            if args.image:
                debug = _load_program(args.image)[0].debug
        elif args.image:
            image, _ = _load_program(args.image)
            records = metrics.parse_trace(trace_text(image, args.max_cycles))
            debug = image.debug
        else:
            raise CliError("stats needs --trace or --image", EXIT_PARSE)
        st = metrics.stats_report(records, debug)
        sys.stdout.write(st.render())
        for line in st.metric_lines():
            print(line)
        if args.figure:
            from .plotting import stats_figure
            stats_figure(st, args.figure)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="photonic-subleq", description="SUBLEQ toolchain and photonic processor model")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("asm", help="assemble source into an OSLQ image")
    a.add_argument("input")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_asm)

    d = sub.add_parser("disasm", help="print an image as re-assemblable source")
    d.add_argument("input")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_disasm)

    r = sub.add_parser("run", help="execute an image or source file")
    r.add_argument("image")
    r.add_argument("--threads", type=int)
    r.add_argument("--entries", help="comma-separated entry points (labels allowed for .asm input)")
    r.add_argument("--max-cycles", type=int, default=100_000)
    r.add_argument("--cow", choices=("on", "off"))
    r.add_argument("--rworm", choices=[m.value for m in RwormMode])
    r.add_argument("--exec", choices=[m.value for m in AluMode], default=AluMode.BEHAVIORAL.value)
    r.add_argument("--signal-check", action="store_true", help="verify optical levels of the gate-level ALU")
    r.add_argument("--fault-unwritten", action="store_true", help="fault on reads of never-written cells")
    r.add_argument("--trace")
    r.add_argument("--config")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("synth", help="map truth tables onto crossbar units")
    s.add_argument("tables")
    s.add_argument("--params")
    s.add_argument("--max-inputs", type=int, default=8)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_synth)

    rep = sub.add_parser("report", help="area, timing or instruction statistics")
    rep.add_argument("kind", choices=("area", "timing", "stats"))
    rep.add_argument("--config")
    rep.add_argument("--network", help="network dump from synth")
    rep.add_argument("--preset", choices=("testable", "optimized", "both"), default="both")
    rep.add_argument("--l-max-mm", type=float)
    rep.add_argument("--group-index", type=float)
    rep.add_argument("--threads", type=int)
    rep.add_argument("--trace")
    rep.add_argument("--image")
    rep.add_argument("--max-cycles", type=int, default=100_000)
    rep.add_argument("--figure", help="also render a PNG to this path")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except assembler.ParseError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARSE
    except assembler.AssemblyError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ASSEMBLY
    except ConfigFileError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARSE
    except (MemoryFault, InstructionFault) as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except (ConfigError, ImageError, logic.LogicError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
