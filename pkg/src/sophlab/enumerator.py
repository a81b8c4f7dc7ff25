"""Exhaustive enumeration of the RM1 halting domain.

The search walks the binary tree of program prefixes, executing the machine
lazily: a node is expanded only when the machine asks for a bit it does not
have.  A halt records the node and closes its subtree; an abort, overflow or
exhausted budget closes it without a record.  Machine states are copied at
branch points, so no prefix is ever re-executed.
"""
from __future__ import annotations

import hashlib
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from .core import BitString, format_bits, parse_bits
from .machine import MACHINE_ID, Halted, MachineState, NeedsMoreBits, advance, in_domain, run

FORMAT_TAG = "soph-lab v1"
DEFAULT_MAX_LIVE = 2_000_000


class SophLabError(Exception):
    """Base class for errors raised by this package."""


class ResourceLimitError(SophLabError):
    pass


class CorruptFileError(SophLabError):
    pass


class VersionError(SophLabError):
    pass


class HaltRecord(NamedTuple):
    program: BitString
    output: BitString
    steps: int

    @property
    def frontier(self) -> int:
        return len(self.program)


@dataclass(frozen=True)
class EnumConfig:
    lmax: int
    tmax: int
    ocap: int = 64
    aux: BitString = ""

    def config_hash(self) -> str:
        blob = json.dumps({"machine": MACHINE_ID, **asdict(self)}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RunManifest:
    machine_id: str
    lmax: int
    tmax: int
    ocap: int
    aux: BitString
    record_count: int
    content_hash: str

    @property
    def config(self) -> EnumConfig:
        return EnumConfig(self.lmax, self.tmax, self.ocap, self.aux)


def _sort_key(rec: HaltRecord):
    return (len(rec.program), rec.program)


def _record_bytes(records: Iterable[HaltRecord]) -> bytes:
    buf = io.StringIO()
    for r in records:
        buf.write(f"{format_bits(r.program)},{format_bits(r.output)},{r.steps}\n")
    return buf.getvalue().encode("ascii")


def content_hash(records: Iterable[HaltRecord]) -> str:
    return hashlib.sha256(_record_bytes(records)).hexdigest()


@dataclass(frozen=True)
class DomainTable:
    records: tuple[HaltRecord, ...]
    manifest: RunManifest

    @classmethod
    def build(cls, config: EnumConfig, records: Iterable[HaltRecord]) -> DomainTable:
        recs = tuple(sorted(records, key=_sort_key))
        manifest = RunManifest(
            MACHINE_ID, config.lmax, config.tmax, config.ocap, config.aux, len(recs), content_hash(recs)
        )
        return cls(recs, manifest)

    @property
    def config(self) -> EnumConfig:
        return self.manifest.config

    @property
    def aux(self) -> BitString:
        return self.manifest.aux

    def programs(self) -> set[BitString]:
        return {r.program for r in self.records}

    def kraft_sum(self):
        from .core import Dyadic, dyadic_sum

        return dyadic_sum(Dyadic.unit(len(r.program)) for r in self.records)

    def __len__(self):
        return len(self.records)


def _explore(
    config: EnumConfig,
    prefix: BitString,
    state: Optional[MachineState] = None,
    max_live: int = DEFAULT_MAX_LIVE,
    stop_depth: Optional[int] = None,
) -> tuple[list[HaltRecord], list[tuple[BitString, MachineState]]]:
    """Depth-first search of the subtree under ``prefix``.

    Nodes still hungry for bits at ``stop_depth`` are returned unexpanded
    (used to cut the tree into independent subtrees).
    """
    if state is None:
        state = MachineState()
        # replay the prefix; the caller guarantees it is a live node
        outcome = advance(state, prefix, config.aux, config.tmax, config.ocap)
        if not isinstance(outcome, NeedsMoreBits):
            return ([HaltRecord(prefix, outcome.output, outcome.steps)] if isinstance(outcome, Halted) else []), []
    records: list[HaltRecord] = []
    cut: list[tuple[BitString, MachineState]] = []
    stack = [(prefix, state)]
    aux, tmax, ocap, lmax = config.aux, config.tmax, config.ocap, config.lmax
    while stack:
        bits, st = stack.pop()
        if len(bits) >= lmax:
            continue
        if stop_depth is not None and len(bits) >= stop_depth:
            cut.append((bits, st))
            continue
        # push "1" first so "0" is explored first
        for bit in "10":
            child_bits = bits + bit
            child = st.copy()
            outcome = advance(child, child_bits, aux, tmax, ocap)
            if isinstance(outcome, NeedsMoreBits):
                stack.append((child_bits, child))
            elif isinstance(outcome, Halted):
                records.append(HaltRecord(child_bits, outcome.output, outcome.steps))
        if len(stack) > max_live:
            raise ResourceLimitError(f"live frontier exceeded {max_live} nodes")
    return records, cut


def _explore_subtree(args) -> list[HaltRecord]:
    config, prefix, max_live = args
    return _explore(config, prefix, max_live=max_live)[0]


def enumerate_domain(
    config: EnumConfig,
    workers: int = 1,
    max_live: int = DEFAULT_MAX_LIVE,
    split_depth: int = 8,
) -> DomainTable:
    """All programs of length <= lmax on which RM1 halts within tmax steps
    having read exactly its own bits."""
    if config.lmax < 0 or config.tmax < 1 or workers < 1:
        raise ValueError("need lmax >= 0, tmax >= 1, workers >= 1")
    if config.lmax == 0:
        return DomainTable.build(config, [])
    root = MachineState()
    outcome = advance(root, "", config.aux, config.tmax, config.ocap)
    if not isinstance(outcome, NeedsMoreBits):
        return DomainTable.build(config, [])
    if workers == 1:
        records, _ = _explore(config, "", root, max_live)
        return DomainTable.build(config, records)
    records, cut = _explore(config, "", root, max_live, stop_depth=min(split_depth, config.lmax))
    jobs = [(config, bits, max_live) for bits, _ in cut]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_explore_subtree, jobs, chunksize=max(1, len(jobs) // (4 * workers))):
            records.extend(part)
    return DomainTable.build(config, records)


def naive_oracle(config: EnumConfig) -> DomainTable:
    """Run every bit string of length 1..lmax on its own; test reference only."""
    if config.lmax > 18:
        raise ValueError("naive oracle is limited to lmax <= 18")
    records = []
    for n in range(1, config.lmax + 1):
        for bits in itertools.product("01", repeat=n):
            p = "".join(bits)
            out = run(p, config.aux, config.tmax, config.ocap)
            if in_domain(out, p):
                records.append(HaltRecord(p, out.output, out.steps))
    return DomainTable.build(config, records)


def _header(m: RunManifest) -> str:
    return (
        f"# {FORMAT_TAG}; machine={m.machine_id}; lmax={m.lmax}; tmax={m.tmax}; "
        f"ocap={m.ocap}; aux={format_bits(m.aux)}\n"
    )


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def save_table(table: DomainTable, path) -> None:
    path = Path(path)
    m = table.manifest
    with open(path, "w", newline="\n") as fh:
        fh.write(_header(m))
        fh.write("program,output,steps\n")
        fh.write(_record_bytes(table.records).decode("ascii"))
    sidecar = {
        "machine": m.machine_id,
        "lmax": m.lmax,
        "tmax": m.tmax,
        "ocap": m.ocap,
        "aux": format_bits(m.aux),
        "records": m.record_count,
        "hash": m.content_hash,
        "config_hash": m.config.config_hash(),
    }
    manifest_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def _parse_header(line: str) -> dict:
    if not line.startswith("# "):
        raise CorruptFileError("missing header line")
    parts = [p.strip() for p in line[2:].strip().split(";")]
    if parts[0] != FORMAT_TAG:
        raise VersionError(f"unknown format tag {parts[0]!r}")
    fields = {}
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise CorruptFileError(f"bad header field {part!r}")
        fields[key] = value
    return fields


def load_table(path) -> DomainTable:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise
    lines = text.split("\n")
    if not lines or not lines[0]:
        raise CorruptFileError(f"{path}: empty file")
    fields = _parse_header(lines[0])
    if fields.get("machine") != MACHINE_ID:
        raise VersionError(f"{path}: machine {fields.get('machine')!r} is not {MACHINE_ID}")
    try:
        config = EnumConfig(int(fields["lmax"]), int(fields["tmax"]), int(fields["ocap"]), parse_bits(fields["aux"]))
    except (KeyError, ValueError) as exc:
        raise CorruptFileError(f"{path}: bad header: {exc}") from exc
    if len(lines) < 2 or lines[1] != "program,output,steps":
        raise CorruptFileError(f"{path}: missing column header")
    if lines[-1] != "":
        raise CorruptFileError(f"{path}: truncated (no trailing newline)")
    records = []
    for lineno, line in enumerate(lines[2:-1], start=3):
        try:
            prog, out, steps = line.split(",")
            records.append(HaltRecord(parse_bits(prog), parse_bits(out), int(steps)))
        except ValueError as exc:
            raise CorruptFileError(f"{path}:{lineno}: bad record {line!r}") from exc

    try:
        sidecar = json.loads(manifest_path(path).read_text())
    except FileNotFoundError as exc:
        raise CorruptFileError(f"{path}: manifest missing") from exc
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"{path}: manifest unreadable") from exc
    if sidecar.get("machine") != MACHINE_ID:
        raise VersionError(f"{path}: manifest machine {sidecar.get('machine')!r} is not {MACHINE_ID}")
    digest = content_hash(records)
    if digest != sidecar.get("hash") or len(records) != sidecar.get("records"):
        raise CorruptFileError(f"{path}: content hash mismatch")
    if sorted(records, key=_sort_key) != records:
        raise CorruptFileError(f"{path}: records out of order")
    table = DomainTable.build(config, records)
    if (table.manifest.lmax, table.manifest.tmax, table.manifest.ocap, format_bits(table.manifest.aux)) != (
        sidecar.get("lmax"),
        sidecar.get("tmax"),
        sidecar.get("ocap"),
        sidecar.get("aux"),
    ):
        raise CorruptFileError(f"{path}: header and manifest disagree")
    return table
