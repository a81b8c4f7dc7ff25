"""m-sophistication, its (m, m) variant, sumtests and the P_k statistics.

All ``log k`` terms are taken as ``log_term(k) = ceil(log2(k + 1))`` so that
exponents stay integral and every sum stays exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional

from .core import BitString, Dyadic, ceil_log2, dyadic_sum, format_bits, format_rational, index_of, log_term, parse_bits
from .enumerator import SophLabError
from .tables import Mode, Tables, _write_csv, read_csv

DEFAULT_CMAX = 8


class UnknownKError(SophLabError):
    pass


class ZeroMassError(SophLabError):
    pass


class NotPrefixFreeError(SophLabError):
    pass


@dataclass(frozen=True)
class SophRecord:
    x: BitString
    k_value: int
    k_c: tuple[int, ...]
    k_prime: int
    sumtest_d: int
    coarse: int
    floor_reached: bool


@dataclass(frozen=True)
class Statistic:
    k: int
    mode: Mode
    support: tuple[tuple[BitString, Fraction], ...]
    k_upper_bound: int
    normalizer: Dyadic
    implied_n: Optional[Fraction]
    deltas: Mapping[BitString, Dyadic] = field(default_factory=dict, compare=False, repr=False)

    @property
    def empty(self) -> bool:
        return not self.support

    def probability(self, x: BitString) -> Fraction:
        return self._probs.get(x, Fraction(0))

    @cached_property
    def _probs(self) -> dict[BitString, Fraction]:
        return dict(self.support)

    def total(self) -> Fraction:
        return sum((p for _, p in self.support), Fraction(0))


@dataclass(frozen=True)
class PrefixCode:
    codewords: Mapping[BitString, BitString]

    def kraft_sum(self) -> Dyadic:
        return dyadic_sum(Dyadic.unit(len(w)) for w in self.codewords.values())

    def is_prefix_free(self) -> bool:
        return is_prefix_free(self.codewords.values())


def is_prefix_free(words) -> bool:
    words = sorted(words)
    # in sorted order a prefix sits immediately before some extension of it
    return all(not b.startswith(a) for a, b in zip(words, words[1:]))


def code_length(p: Fraction) -> int:
    """ceil(-log2 p) for 0 < p <= 1."""
    return ceil_log2(1 / Fraction(p))


class Sophistication:
    """Per-string sophistication quantities for one table and one semimeasure."""

    def __init__(self, tables: Tables, mode: Mode = Mode.QP, c_max: int = DEFAULT_CMAX, c_p: int = 0):
        self.tables = tables
        self.mode = Mode(mode)
        self.c_max = c_max
        self.c_p = c_p
        self.trace = tables.omega_trace(self.mode)
        # every quantity below is reached by k = n_sat + 1, where t_k = t_conv
        self.k_limit = self.trace.n_sat + 1
        self._records: dict[BitString, SophRecord] = {}

    def t(self, k: int) -> int:
        return self.trace.tn(k)

    def _k(self, x: BitString) -> int:
        k = self.tables.k_of(x)
        if k is None:
            raise UnknownKError(f"no witness for {format_bits(x)} within lmax={self.tables.lmax}")
        return k

    def m_soph(self, x: BitString, c: int) -> int:
        """Smallest k with K_{t_k}(x) <= K(x) + c."""
        target = self._k(x) + c
        for k in range(self.k_limit + 1):
            kt = self.tables.k_of(x, self.t(k))
            if kt is not None and kt <= target:
                return k
        raise AssertionError("K_{t_conv}(x) must equal K(x)")

    def k_floor(self, x: BitString) -> int:
        """Limit of m_soph(x, c) as c grows: first k at which x has any witness."""
        return self.m_soph(x, self.tables.lmax)

    def mm_soph(self, x: BitString) -> int:
        """Smallest k with m(x) <= 2 m_{t_k}(x)."""
        total = self.tables.m_of(x, None, self.mode)
        if not total:
            raise ZeroMassError(f"m({format_bits(x)}) = 0")
        for k in range(self.k_limit + 1):
            if total <= self.tables.m_of(x, self.t(k), self.mode).scale2(1):
                return k
        raise AssertionError("m_{t_conv}(x) must equal m(x)")

    @staticmethod
    def sumtest_from_k(k: int) -> int:
        return k - 2 * log_term(k)

    def sumtest_d(self, x: BitString) -> int:
        return self.sumtest_from_k(self.mm_soph(x))

    def coarse_msoph(self, x: BitString) -> int:
        return self.record(x).coarse

    def record(self, x: BitString) -> SophRecord:
        rec = self._records.get(x)
        if rec is None:
            kc = tuple(self.m_soph(x, c) for c in range(self.c_max + 1))
            kp = self.mm_soph(x)
            rec = SophRecord(
                x=x,
                k_value=self._k(x),
                k_c=kc,
                k_prime=kp,
                sumtest_d=self.sumtest_from_k(kp),
                coarse=min(k + c for c, k in enumerate(kc)),
                floor_reached=kc[-1] == self.k_floor(x),
            )
            self._records[x] = rec
        return rec

    def records(self) -> list[SophRecord]:
        return [self.record(x) for x in self.tables.outputs]

    # -- near-sufficient statistics -------------------------------------

    def k_upper_bound(self, k: int) -> int:
        return k + 2 * log_term(k) + self.c_p

    def statistic_pk(self, k: int) -> Statistic:
        """Mass gained between t_{k-1} and t_k, normalized to a distribution."""
        if k < 1:
            raise ValueError("P_k needs k >= 1")
        lo, hi = self.t(k - 1), self.t(k)
        deltas = {}
        for x in self.tables.outputs:
            d = self.tables.m_of(x, hi, self.mode) - self.tables.m_of(x, lo, self.mode)
            if d:
                deltas[x] = d
        z = dyadic_sum(deltas.values())
        if not z:
            return Statistic(k, self.mode, (), self.k_upper_bound(k), z, None, {})
        zf = z.as_fraction()
        support = tuple((x, d.as_fraction() / zf) for x, d in deltas.items())
        return Statistic(k, self.mode, support, self.k_upper_bound(k), z, Fraction(2**k) / zf, deltas)

    def statistics(self) -> dict[int, Statistic]:
        return {k: self.statistic_pk(k) for k in range(1, self.k_limit + 1)}

    def sufficiency_gap(self, x: BitString, statistic: Statistic) -> Optional[int]:
        """K(P) - log P(x) - K(x), with K(P) replaced by its upper bound."""
        p = statistic.probability(x)
        if not p:
            return None
        return statistic.k_upper_bound + code_length(p) - self._k(x)


def shannon_fano(statistic: Statistic) -> PrefixCode:
    """Canonical prefix code with lengths ceil(-log2 P(x)) + 1."""
    if statistic.empty:
        raise ValueError("Shannon-Fano code of an empty statistic")
    return prefix_code({x: code_length(p) + 1 for x, p in statistic.support})


def prefix_code(lengths: Mapping[BitString, int]) -> PrefixCode:
    items = sorted(lengths.items(), key=lambda kv: (kv[1], index_of(kv[0])))
    codewords = {}
    code = 0
    prev = items[0][1] if items else 0
    for x, length in items:
        code <<= length - prev
        if code >= 1 << length:
            raise ValueError("lengths violate the Kraft inequality")
        codewords[x] = format(code, f"0{length}b") if length else ""
        code += 1
        prev = length
    return PrefixCode(codewords)


def function_to_prob(g: Mapping[BitString, BitString]) -> dict[BitString, Dyadic]:
    """P(x) = sum of 2^-l(d) over d with g(d) = x and index_of(d) <= index_of(x)."""
    if not is_prefix_free(g):
        raise NotPrefixFreeError("domain of g is not prefix-free")
    masses: dict[BitString, list[Dyadic]] = {}
    for d, x in g.items():
        if index_of(d) <= index_of(x):
            masses.setdefault(x, []).append(Dyadic.unit(len(d)))
    return {x: dyadic_sum(v) for x, v in sorted(masses.items(), key=lambda kv: index_of(kv[0]))}


# -- CSV exports ----------------------------------------------------------


def write_soph(soph: Sophistication, path, config_hash: str) -> None:
    cols = ["x", "K"] + [f"kC{c}" for c in range(soph.c_max + 1)] + ["kPrime", "d", "coarse"]
    rows = (
        [format_bits(r.x), r.k_value, *r.k_c, r.k_prime, r.sumtest_d, r.coarse] for r in soph.records()
    )
    _write_csv(path, config_hash, ",".join(cols), rows, mode=soph.mode.value, cmax=soph.c_max)


def read_soph(path, expect_config: Optional[str] = None) -> dict[BitString, dict]:
    meta, rows = read_csv(path, expect_config)
    c_max = int(meta["cmax"])
    out = {}
    for row in rows:
        x = parse_bits(row[0])
        vals = [int(v) for v in row[1:]]
        out[x] = {
            "K": vals[0],
            "kC": tuple(vals[1 : c_max + 2]),
            "kPrime": vals[c_max + 2],
            "d": vals[c_max + 3],
            "coarse": vals[c_max + 4],
        }
    return out


def write_statistic(statistic: Statistic, path, config_hash: str) -> None:
    n = format_rational(statistic.implied_n) if statistic.implied_n is not None else "undefined"
    rows = ((format_bits(x), format_rational(p), n) for x, p in statistic.support)
    _write_csv(path, config_hash, "x,probability,impliedN", rows, mode=statistic.mode.value, k=statistic.k)
