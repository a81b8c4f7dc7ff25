"""Command-line entry point: ``soph-lab <command> [options]``.

Artifacts live in one run directory (``--out``, default the current one)::

    domain.csv, domain.manifest.json   enumerated domain (aux = empty)
    domain-<aux>.csv                   domains for other auxiliary inputs
    config.json                        the run configuration
    k_table.csv, bb.csv, omega_<m>.csv, tn_<m>.csv, mtrace_<m>.csv
    soph_<m>.csv, statistic_<m>_<k>.csv
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .config import RunConfig
from .core import format_bits, parse_bits
from .enumerator import CorruptFileError, ResourceLimitError, SophLabError, VersionError, enumerate_domain, load_table, save_table
from .soph import Sophistication, UnknownKError, ZeroMassError, write_soph, write_statistic
from .tables import (
    ConfigMismatchError,
    Mode,
    MissingTableError,
    Tables,
    _write_csv,
    write_bb,
    write_k_table,
    write_omega,
    write_tn,
)
from .verify import CHECKS, Lab, Status, report_json, run_suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_FAILED = 4


class MissingPrerequisite(Exception):
    pass


def _domain_name(aux: str) -> str:
    return "domain.csv" if not aux else f"domain-{aux}.csv"


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("run configuration")
    g.add_argument("--lmax", type=int)
    g.add_argument("--tmax", type=int)
    g.add_argument("--ocap", type=int)
    g.add_argument("--cmax", type=int)
    g.add_argument("--mode", choices=["qp", "qk", "both"])
    g.add_argument("--omega-cutoff", choices=["literal", "none"], dest="omega_cutoff")
    g.add_argument("--workers", type=int)
    g.add_argument("--out", default=".")
    g.add_argument("--cond-sample", type=int, dest="cond_sample")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soph-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate the halting domain and persist it")
    _common(p)
    p.add_argument("--aux", default="e", help="auxiliary input (condition); 'e' for empty")

    p = sub.add_parser("tables", help="derive and persist K, m, Omega, t_n and BB tables")
    _common(p)

    p = sub.add_parser("query", help="print one quantity")
    _common(p)
    p.add_argument("what", choices=["K", "m", "omega", "tn", "bb", "bbinv", "soph", "decide"])
    p.add_argument("args", nargs="*")
    p.add_argument("--t", type=int, default=None, help="time bound (default: none)")
    p.add_argument("--c", type=int, default=None, help="slack c for k_c")
    p.add_argument("--cond", default="e", help="condition for K (needs a matching domain file)")

    p = sub.add_parser("verify", help="run the lemma checks and write a report")
    _common(p)
    p.add_argument("--suite", default="all", help="'all' or comma-separated ids: " + ",".join(CHECKS))

    p = sub.add_parser("export", help="write every CSV export")
    _common(p)
    return parser


def _load_config(args) -> RunConfig:
    base = {}
    cfg_path = Path(args.out) / "config.json"
    if args.command != "enumerate" and cfg_path.exists():
        base = json.loads(cfg_path.read_text())
        base.pop("machine", None)
    for key in ("lmax", "tmax", "ocap", "cmax", "workers", "cond_sample", "omega_cutoff"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if getattr(args, "mode", None):
        base["modes"] = ["qp", "qk"] if args.mode == "both" else [args.mode]
    base["out"] = args.out
    return RunConfig(**base)


def _save_config(config: RunConfig) -> None:
    path = Path(config.out) / "config.json"
    path.write_text(json.dumps(config.snapshot(), indent=2, sort_keys=True) + "\n")


def _load_domain(config: RunConfig, aux: str = ""):
    path = Path(config.out) / _domain_name(aux)
    if not path.exists():
        raise MissingPrerequisite(f"{path} not found; run 'soph-lab enumerate' first")
    table = load_table(path)
    want = config.with_(aux=aux).enum_config
    if table.config != want:
        raise MissingPrerequisite(f"{path} was enumerated with {table.config}, not {want}")
    return table


def cmd_enumerate(args, config: RunConfig) -> int:
    aux = parse_bits(args.aux)
    enum_cfg = config.with_(aux=aux).enum_config
    start = time.perf_counter()
    table = enumerate_domain(enum_cfg, config.workers)
    elapsed = time.perf_counter() - start
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    save_table(table, out / _domain_name(aux))
    if not aux:
        _save_config(config)
    kraft = table.kraft_sum()
    print(f"records: {len(table)}")
    print(f"kraft: {kraft} ({'<= 1' if kraft <= 1 else '> 1'})")
    print(f"hash: {table.manifest.content_hash}")
    print(f"wall: {elapsed:.2f}s")
    return EXIT_OK


def _write_tables(tables: Tables, config: RunConfig) -> list[Path]:
    out = Path(config.out)
    h = config.config_hash()
    written = [out / "k_table.csv", out / "bb.csv"]
    write_k_table(tables, written[0], h)
    write_bb(tables, written[1], h)
    for mode in config.modes:
        trace = tables.omega_trace(mode)
        paths = [out / f"omega_{mode.value}.csv", out / f"tn_{mode.value}.csv", out / f"mtrace_{mode.value}.csv"]
        write_omega(trace, paths[0], h)
        write_tn(trace, paths[1], h)
        rows = ((e.t, format_bits(e.x), e.delta) for e in tables.m_traces[mode])
        _write_csv(paths[2], h, "t,x,delta", rows, mode=mode.value)
        written += paths
    return written


def cmd_tables(args, config: RunConfig) -> int:
    tables = Tables(_load_domain(config), config.omega_cutoff)
    for path in _write_tables(tables, config):
        print(path)
    return EXIT_OK


def cmd_export(args, config: RunConfig) -> int:
    tables = Tables(_load_domain(config), config.omega_cutoff)
    written = _write_tables(tables, config)
    out = Path(config.out)
    h = config.config_hash()
    for mode in config.modes:
        soph = Sophistication(tables, mode, config.cmax, config.c_p)
        path = out / f"soph_{mode.value}.csv"
        write_soph(soph, path, h)
        written.append(path)
        for k, stat in soph.statistics().items():
            path = out / f"statistic_{mode.value}_{k}.csv"
            write_statistic(stat, path, h)
            written.append(path)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_query(args, config: RunConfig) -> int:
    domain = _load_domain(config)
    tables = Tables(domain, config.omega_cutoff)
    modes = config.modes

    def need(n):
        if len(args.args) != n:
            raise ValueError(f"query {args.what} takes {n} argument(s)")
        return args.args

    what = args.what
    if what == "K":
        (x,) = need(1)
        cond = parse_bits(args.cond)
        t = tables if not cond else Tables(_load_domain(config, cond))
        k = t.k_of(parse_bits(x), args.t)
        print("unknown" if k is None else k)
    elif what == "m":
        (x,) = need(1)
        for mode in modes:
            print(f"{mode.value}: {tables.m_of(parse_bits(x), args.t, mode)}")
    elif what == "omega":
        (n,) = need(1)
        for mode in modes:
            trace = tables.omega_trace(mode)
            print(f"{mode.value}: {format_bits(trace.prefix(int(n)))} (omega = {trace.omega_final}, nsat = {trace.n_sat})")
    elif what == "tn":
        (n,) = need(1)
        for mode in modes:
            print(f"{mode.value}: {tables.omega_trace(mode).tn(int(n))}")
    elif what == "bb":
        (n,) = need(1)
        out, steps = tables.busy_beaver(int(n))
        print(f"bbOut: {out}\nbbTime: {steps}")
    elif what == "bbinv":
        (x,) = need(1)
        v = tables.bb_inv(parse_bits(x))
        print("undefined" if v is None else v)
    elif what == "soph":
        (x,) = need(1)
        x = parse_bits(x)
        for mode in modes:
            rec = Sophistication(tables, mode, config.cmax, config.c_p).record(x)
            prefix = f"{mode.value}: " if len(modes) > 1 else ""
            kc = rec.k_c[args.c] if args.c is not None else list(rec.k_c)
            label = f"kC[{args.c}]" if args.c is not None else "kC"
            print(f"{prefix}K={rec.k_value} {label}={kc} kPrime={rec.k_prime} d={rec.sumtest_d} coarse={rec.coarse}")
    elif what == "decide":
        p, n = need(2)
        prefix = tables.omega_trace(Mode.QP).prefix(int(n))
        print(tables.decide_halting(parse_bits(p), prefix).value)
    return EXIT_OK


def cmd_verify(args, config: RunConfig) -> int:
    report_path = args.report
    ids = list(CHECKS) if args.suite == "all" else [s.strip() for s in args.suite.split(",")]
    unknown = [i for i in ids if i not in CHECKS]
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(unknown)}")
    lab = Lab(_load_domain(config), config)
    reports = run_suite(lab, ids)
    report_path.write_text(report_json(reports))
    for r in reports:
        consts = ", ".join(f"{k}={v}" for k, v in r.constants.items())
        print(f"{r.lemma_id:4s} {r.status.value:15s} {consts}")
    fails = sum(r.status is Status.FAIL for r in reports)
    print(f"report: {report_path} ({len(reports)} checks, {fails} failed)")
    return EXIT_OK


COMMANDS = {
    "enumerate": cmd_enumerate,
    "tables": cmd_tables,
    "query": cmd_query,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            # a .json --out names the report; artifacts are read from its directory
            out = Path(args.out)
            if out.suffix == ".json":
                args.report, args.out = out, str(out.parent)
            else:
                args.report = out / "report.json"
        config = _load_config(args)
        return COMMANDS[args.command](args, config)
    except (MissingPrerequisite, MissingTableError, ConfigMismatchError, FileNotFoundError) as exc:
        print(f"soph-lab: missing prerequisite: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (CorruptFileError, VersionError) as exc:
        print(f"soph-lab: unusable artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ValueError as exc:
        print(f"soph-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceLimitError, UnknownKError, ZeroMassError, SophLabError) as exc:
        print(f"soph-lab: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
