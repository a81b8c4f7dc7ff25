"""Quantities derived from one enumerated domain.

Everything here is relative to the restricted system the table describes:
``K`` means the shortest program inside the table, ``Omega`` is the total
mass of the table, and so on.  Times are step counts.
"""
from __future__ import annotations

import bisect
import enum
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import (
    ZERO,
    BitString,
    Dyadic,
    binary_fraction,
    dyadic_sum,
    format_bits,
    index_of,
    parse_bits,
)
from .enumerator import FORMAT_TAG, DomainTable, SophLabError
from .machine import in_domain, run


class Mode(str, enum.Enum):
    QP = "qp"  # total mass of programs producing x
    QK = "qk"  # 2^-K(x)


class Cutoff(str, enum.Enum):
    NONE = "none"
    LITERAL = "literal"  # only strings x with index_of(x) < t count at time t


class Decision(str, enum.Enum):
    HALTS = "halts"
    NOT_HALTS = "not_halts"
    INSUFFICIENT = "insufficient"


class MissingTableError(SophLabError):
    pass


class InvalidPrefixError(SophLabError):
    pass


class ConfigMismatchError(SophLabError):
    pass


@dataclass(frozen=True)
class KEntry:
    k: int
    witness: BitString
    first_time: int


@dataclass(frozen=True)
class MEvent:
    t: int
    x: BitString
    delta: Dyadic


@dataclass(frozen=True)
class OmegaTrace:
    mode: Mode
    cutoff: Cutoff
    times: tuple[int, ...]  # change points, starting at 0
    values: tuple[Dyadic, ...]  # Omega_t on [times[i], times[i+1])
    omega_final: Dyadic
    tn_values: tuple[int, ...]  # t_n for n = 0 .. n_sat + 1
    n_sat: int
    t_conv: int

    def omega_at(self, t: int) -> Dyadic:
        i = bisect.bisect_right(self.times, t) - 1
        return self.values[i] if i >= 0 else ZERO

    def tn(self, n: int) -> int:
        if n < 0:
            raise ValueError("t_n needs n >= 0")
        if n < len(self.tn_values):
            return self.tn_values[n]
        return self.t_conv

    def prefix(self, n: int) -> BitString:
        """First ``n`` binary digits of the final Omega."""
        return self.omega_final.binary_prefix(n)

    def gap(self, t: int) -> Dyadic:
        return self.omega_final - self.omega_at(t)


def _critical_times(times, values, omega) -> tuple[tuple[int, ...], int]:
    tn = []
    n = 0
    i = 0
    t_conv = times[-1]
    while True:
        bound = Dyadic.unit(n)
        while omega - values[i] > bound:
            i += 1
        tn.append(times[i])
        if times[i] == t_conv:
            break
        n += 1
    # t_n < t_conv exactly for n <= len(tn) - 2
    return tuple(tn), len(tn) - 2


class Tables:
    """K, m, Omega, t_n and Busy Beaver tables for one domain table."""

    def __init__(self, domain: DomainTable, cutoff: Cutoff = Cutoff.NONE):
        self.domain = domain
        self.condition = domain.aux
        self.lmax = domain.config.lmax
        self.cutoff = Cutoff(cutoff)

        by_output: dict[BitString, list] = defaultdict(list)
        for rec in domain.records:
            by_output[rec.output].append(rec)
        self._by_output = dict(by_output)

        # K_t(x) as a step function of t: parallel lists of (time, value)
        self._k_times: dict[BitString, list[int]] = {}
        self._k_vals: dict[BitString, list[int]] = {}
        self.k_table: dict[BitString, KEntry] = {}
        qp_events: list[MEvent] = []
        qk_events: list[MEvent] = []
        for x, recs in by_output.items():
            best = min(len(r.program) for r in recs)
            minimal = [r for r in recs if len(r.program) == best]
            witness = min(minimal, key=lambda r: r.program)
            self.k_table[x] = KEntry(best, witness.program, min(r.steps for r in minimal))

            times, vals = [], []
            current = None
            for r in sorted(recs, key=lambda r: (r.steps, len(r.program))):
                qp_events.append(MEvent(r.steps, x, Dyadic.unit(len(r.program))))
                length = len(r.program)
                if current is None or length < current:
                    old = ZERO if current is None else Dyadic.unit(current)
                    qk_events.append(MEvent(r.steps, x, Dyadic.unit(length) - old))
                    if times and times[-1] == r.steps:
                        vals[-1] = length
                    else:
                        times.append(r.steps)
                        vals.append(length)
                    current = length
            self._k_times[x] = times
            self._k_vals[x] = vals

        order = lambda e: (e.t, index_of(e.x))
        self.m_traces = {
            Mode.QP: tuple(sorted(qp_events, key=order)),
            Mode.QK: tuple(sorted(qk_events, key=order)),
        }
        self._m_cum: dict[Mode, dict[BitString, tuple[list[int], list[Dyadic]]]] = {}
        for mode, events in self.m_traces.items():
            cum: dict[BitString, tuple[list[int], list[Dyadic]]] = {}
            for ev in events:
                ts, ms = cum.setdefault(ev.x, ([], []))
                total = (ms[-1] if ms else ZERO) + ev.delta
                if ts and ts[-1] == ev.t:
                    ms[-1] = total
                else:
                    ts.append(ev.t)
                    ms.append(total)
            self._m_cum[mode] = cum

        self.bb_out = [0] * (self.lmax + 1)
        self.bb_time = [0] * (self.lmax + 1)
        for rec in domain.records:
            n = len(rec.program)
            self.bb_out[n] = max(self.bb_out[n], index_of(rec.output))
            self.bb_time[n] = max(self.bb_time[n], rec.steps)
        for n in range(1, self.lmax + 1):
            self.bb_out[n] = max(self.bb_out[n], self.bb_out[n - 1])
            self.bb_time[n] = max(self.bb_time[n], self.bb_time[n - 1])

        self._omega: dict[tuple[Mode, Cutoff], OmegaTrace] = {}

    # -- complexity and semimeasures ------------------------------------

    @property
    def outputs(self) -> list[BitString]:
        """Every string with a witness, in length-lex order."""
        return sorted(self.k_table, key=index_of)

    def k_of(self, x: BitString, t: Optional[int] = None) -> Optional[int]:
        """K_t(x); ``t=None`` means no time bound.  ``None`` when unknown."""
        if t is None:
            entry = self.k_table.get(x)
            return entry.k if entry else None
        times = self._k_times.get(x)
        if not times:
            return None
        i = bisect.bisect_right(times, t) - 1
        return self._k_vals[x][i] if i >= 0 else None

    def first_time(self, x: BitString, bound: int) -> Optional[int]:
        """Earliest t with K_t(x) <= bound."""
        for t, v in zip(self._k_times.get(x, ()), self._k_vals.get(x, ())):
            if v <= bound:
                return t
        return None

    def m_of(self, x: BitString, t: Optional[int] = None, mode: Mode = Mode.QP) -> Dyadic:
        cum = self._m_cum[Mode(mode)].get(x)
        if cum is None:
            return ZERO
        ts, ms = cum
        if t is None:
            return ms[-1]
        i = bisect.bisect_right(ts, t) - 1
        return ms[i] if i >= 0 else ZERO

    def mass_times(self, x: BitString, mode: Mode) -> list[int]:
        cum = self._m_cum[Mode(mode)].get(x)
        return list(cum[0]) if cum else []

    # -- halting probability --------------------------------------------

    def omega_trace(self, mode: Mode = Mode.QP, cutoff: Optional[Cutoff] = None) -> OmegaTrace:
        mode = Mode(mode)
        cutoff = self.cutoff if cutoff is None else Cutoff(cutoff)
        key = (mode, cutoff)
        if key not in self._omega:
            self._omega[key] = self._build_omega(mode, cutoff)
        return self._omega[key]

    def _build_omega(self, mode: Mode, cutoff: Cutoff) -> OmegaTrace:
        events = self.m_traces[mode]
        times = [0]
        values = [ZERO]
        if cutoff is Cutoff.NONE:
            running = ZERO
            for ev in events:
                running = running + ev.delta
                if times[-1] == ev.t:
                    values[-1] = running
                else:
                    times.append(ev.t)
                    values.append(running)
        else:
            # merge mass events with the activation time index_of(x) + 1 of each x
            activations = sorted((index_of(x) + 1, x) for x in self._m_cum[mode])
            mass: dict[BitString, Dyadic] = defaultdict(lambda: ZERO)
            active: set[BitString] = set()
            running = ZERO
            i = j = 0
            while i < len(events) or j < len(activations):
                t_ev = events[i].t if i < len(events) else None
                t_act = activations[j][0] if j < len(activations) else None
                t = min(v for v in (t_ev, t_act) if v is not None)
                while i < len(events) and events[i].t == t:
                    ev = events[i]
                    mass[ev.x] = mass[ev.x] + ev.delta
                    if ev.x in active:
                        running = running + ev.delta
                    i += 1
                while j < len(activations) and activations[j][0] == t:
                    x = activations[j][1]
                    active.add(x)
                    running = running + mass[x]
                    j += 1
                if times[-1] == t:
                    values[-1] = running
                else:
                    times.append(t)
                    values.append(running)
        omega = values[-1]
        tn, n_sat = _critical_times(times, values, omega)
        return OmegaTrace(mode, cutoff, tuple(times), tuple(values), omega, tn, n_sat, times[-1])

    def _check_prefix(self, prefix: BitString, trace: OmegaTrace) -> Dyadic:
        low = binary_fraction(prefix)
        if not (low <= trace.omega_final <= low + Dyadic.unit(len(prefix))):
            raise InvalidPrefixError(f"{format_bits(prefix)} is not a prefix of Omega = {trace.omega_final}")
        return low

    def omega_to_tn(self, prefix: BitString, mode: Mode = Mode.QP) -> int:
        """First time at which Omega_t reaches ``0.prefix``."""
        trace = self.omega_trace(mode, Cutoff.NONE)
        low = self._check_prefix(prefix, trace)
        for t, v in zip(trace.times, trace.values):
            if v >= low:
                return t
        raise AssertionError("final Omega is below a validated prefix")

    def decide_halting(self, p: BitString, prefix: BitString, mode: Mode = Mode.QP) -> Decision:
        """Decide whether ``p`` is in the domain from the first ``len(prefix)``
        bits of Omega, for programs shorter than the prefix."""
        if Mode(mode) is not Mode.QP:
            raise ValueError("the Omega-prefix decision needs the program-mass semimeasure (QP)")
        t = self.omega_to_tn(prefix, mode)
        if len(p) >= len(prefix):
            return Decision.INSUFFICIENT
        if t < 1:
            return Decision.NOT_HALTS
        cfg = self.domain.config
        outcome = run(p, self.condition, t, cfg.ocap)
        return Decision.HALTS if in_domain(outcome, p) else Decision.NOT_HALTS

    # -- Busy Beaver ------------------------------------------------------

    def busy_beaver(self, n: int) -> tuple[int, int]:
        """(largest output index, largest step count) over programs of length <= n."""
        if not 0 <= n <= self.lmax:
            raise ValueError(f"busy_beaver({n}) outside 0..{self.lmax}")
        return self.bb_out[n], self.bb_time[n]

    def bb_inv(self, x: BitString) -> Optional[int]:
        i = index_of(x)
        for k, v in enumerate(self.bb_out):
            if i <= v:
                return k
        return None


class TableSet:
    """Tables keyed by the auxiliary input they were enumerated with."""

    def __init__(self, *tables: Tables):
        self._by_condition = {t.condition: t for t in tables}

    def add(self, tables: Tables) -> None:
        self._by_condition[tables.condition] = tables

    def __contains__(self, condition: BitString) -> bool:
        return condition in self._by_condition

    def get(self, condition: BitString) -> Tables:
        try:
            return self._by_condition[condition]
        except KeyError:
            raise MissingTableError(f"no enumeration for condition {format_bits(condition)}") from None

    def k_of(self, x: BitString, t: Optional[int] = None, condition: BitString = "") -> Optional[int]:
        return self.get(condition).k_of(x, t)


# -- CSV exports ----------------------------------------------------------


def _write_csv(path, config_hash: str, columns: str, rows, **extra) -> None:
    fields = "".join(f"; {k}={v}" for k, v in extra.items())
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {FORMAT_TAG}; config={config_hash}{fields}\n")
        fh.write(columns + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def read_csv(path, expect_config: Optional[str] = None) -> tuple[dict, list[list[str]]]:
    """Rows of an exported CSV, after checking its config hash."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(f"# {FORMAT_TAG}"):
        raise ConfigMismatchError(f"{path}: not a {FORMAT_TAG} export")
    meta = dict(part.strip().split("=", 1) for part in lines[0][2:].split(";")[1:])
    if expect_config is not None and meta.get("config") != expect_config:
        raise ConfigMismatchError(f"{path}: config {meta.get('config')} does not match {expect_config}")
    return meta, [line.split(",") for line in lines[2:]]


def write_k_table(tables: Tables, path, config_hash: str) -> None:
    rows = (
        (format_bits(x), e.k, format_bits(e.witness), e.first_time)
        for x, e in ((x, tables.k_table[x]) for x in tables.outputs)
    )
    _write_csv(path, config_hash, "x,K,witness,firstTime", rows)


def read_k_table(path, expect_config: Optional[str] = None) -> dict[BitString, KEntry]:
    _, rows = read_csv(path, expect_config)
    return {parse_bits(x): KEntry(int(k), parse_bits(w), int(t)) for x, k, w, t in rows}


def write_omega(trace: OmegaTrace, path, config_hash: str) -> None:
    rows = zip(trace.times, trace.values)
    _write_csv(path, config_hash, "t,omega", rows, mode=trace.mode.value, cutoff=trace.cutoff.value)


def read_omega(path, expect_config: Optional[str] = None) -> list[tuple[int, Dyadic]]:
    _, rows = read_csv(path, expect_config)
    return [(int(t), Dyadic.parse(v)) for t, v in rows]


def write_tn(trace: OmegaTrace, path, config_hash: str) -> None:
    rows = enumerate(trace.tn_values)
    _write_csv(path, config_hash, "n,t_n", rows, mode=trace.mode.value, nsat=trace.n_sat)


def read_tn(path, expect_config: Optional[str] = None) -> list[int]:
    _, rows = read_csv(path, expect_config)
    return [int(t) for _, t in rows]


def write_bb(tables: Tables, path, config_hash: str) -> None:
    rows = ((n, tables.bb_out[n], tables.bb_time[n]) for n in range(tables.lmax + 1))
    _write_csv(path, config_hash, "n,bbOut,bbTime", rows)


def read_bb(path, expect_config: Optional[str] = None) -> tuple[list[int], list[int]]:
    _, rows = read_csv(path, expect_config)
    return [int(o) for _, o, _ in rows], [int(t) for _, _, t in rows]


def omega_sum(tables: Tables, mode: Mode) -> Dyadic:
    """Total mass, summed directly over strings (cross-check for traces)."""
    return dyadic_sum(tables.m_of(x, None, mode) for x in tables.k_table)
