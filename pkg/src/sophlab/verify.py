"""Checks of the lemma inequalities on a restricted system.

Each check returns a :class:`LemmaReport`.  Claims with no free constant
either pass exactly or fail with a counterexample; claims of the form
"there is a constant c" report the smallest c that works on this table;
asymptotic statements ("infinitely many n") are reported, never passed.
"""
from __future__ import annotations

import enum
import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .config import RunConfig
from .core import ONE, BitString, Dyadic, ceil_log2, dyadic_sum, format_bits, format_rational, index_of, log_term, string_of
from .enumerator import DomainTable, EnumConfig, SophLabError, enumerate_domain
from .soph import Sophistication, code_length, shannon_fano
from .tables import Cutoff, Decision, Mode, Tables, TableSet


class Status(str, enum.Enum):
    EXACT_PASS = "EXACT_PASS"
    CONSTANT_FOUND = "CONSTANT_FOUND"
    REPORT_ONLY = "REPORT_ONLY"
    FAIL = "FAIL"


@dataclass
class LemmaReport:
    lemma_id: str
    status: Status
    constants: dict = field(default_factory=dict)
    details: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _jsonable(
            {
                "lemma": self.lemma_id,
                "status": self.status.value,
                "constants": self.constants,
                "details": self.details,
                "notes": self.notes,
                "config": self.config,
            }
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Dyadic):
        return str(obj)
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


class Lab:
    """The main table for a run plus lazily built conditional tables."""

    def __init__(self, domain: DomainTable, config: RunConfig):
        if domain.config != config.enum_config:
            raise SophLabError("domain table was enumerated with a different configuration")
        self.domain = domain
        self.config = config
        self.tables = Tables(domain, config.omega_cutoff)
        self.table_set = TableSet(self.tables)
        self._soph: dict[Mode, Sophistication] = {}
        self._conditional: dict[BitString, Tables] = {}

    @classmethod
    def from_config(cls, config: RunConfig) -> Lab:
        return cls(enumerate_domain(config.enum_config, config.workers), config)

    def soph(self, mode: Mode) -> Sophistication:
        mode = Mode(mode)
        if mode not in self._soph:
            self._soph[mode] = Sophistication(self.tables, mode, self.config.cmax, self.config.c_p)
        return self._soph[mode]

    def conditional(self, aux: BitString) -> Tables:
        """Tables enumerated with auxiliary input ``aux`` at the reduced length."""
        if aux not in self._conditional:
            cfg = EnumConfig(self.config.cond_lmax, self.config.tmax, self.config.ocap, aux)
            self._conditional[aux] = Tables(enumerate_domain(cfg, self.config.workers))
        return self._conditional[aux]

    def conditional_k(self, x: BitString, aux: BitString) -> Optional[int]:
        return self.conditional(aux).k_of(x)

    def sample(self, pool: list[BitString], salt: str) -> list[BitString]:
        rng = random.Random(f"{self.config.seed}:{salt}")
        if len(pool) <= self.config.cond_sample:
            return list(pool)
        return sorted(rng.sample(pool, self.config.cond_sample), key=pool.index)


def _min_c(pred: Callable[[int], bool], upper: int) -> Optional[int]:
    for c in range(upper + 1):
        if pred(c):
            return c
    return None


def _at_least_zero(values) -> Optional[int]:
    values = [v for v in values if v is not None]
    if not values:
        return None
    return max(0, max(values))


def _config(lab: Lab) -> dict:
    snap = lab.config.snapshot()
    snap["config_hash"] = lab.config.config_hash()
    return snap


# -- Omega, t_n, Busy Beaver --------------------------------------------------


def check_l2(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []
    horizon = t.lmax + 2
    for mode in lab.config.modes:
        tr = t.omega_trace(mode)
        upper = horizon + tr.n_sat + 2
        worst: dict[int, tuple[int, int]] = {}
        for rec in t.domain.records:
            n = len(rec.program)
            s, v = worst.get(n, (0, 0))
            worst[n] = (max(s, rec.steps), max(v, index_of(rec.output)))
        c_time = _min_c(lambda c: all(s <= tr.tn(n + c) for n, (s, _) in worst.items()), upper)
        c_value = _min_c(lambda c: all(v <= tr.tn(n + c) for n, (_, v) in worst.items()), upper)
        constants[f"{mode.value}_time"] = c_time
        constants[f"{mode.value}_value"] = c_value
        for n in sorted(worst):
            s, v = worst[n]
            details.append(
                {
                    "mode": mode.value,
                    "length": n,
                    "max_steps": s,
                    "max_output_index": v,
                    "c_time": _min_c(lambda c: s <= tr.tn(n + c), upper),
                    "c_value": _min_c(lambda c: v <= tr.tn(n + c), upper),
                }
            )
    found = all(constants[f"{m.value}_time"] is not None for m in lab.config.modes)
    notes = ["value form compares an output index with a time; null means no c works on this table"]
    return LemmaReport("L2", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details, notes)


def check_l3(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []

    def bb(arr, i):
        return arr[min(max(i, 0), t.lmax)] if i >= 0 else 0

    for mode in lab.config.modes:
        tr = t.omega_trace(mode)
        ns = range(tr.n_sat + 1)
        upper = t.lmax + tr.n_sat + 2
        for name, arr in (("value", t.bb_out), ("time", t.bb_time)):
            left = _min_c(lambda c: all(bb(arr, n - c) <= tr.tn(n) for n in ns), upper)
            right = _min_c(lambda c: all(tr.tn(n) < bb(arr, n + 2 * log_term(n) + c) for n in ns), upper)
            constants[f"{mode.value}_{name}_left"] = left
            constants[f"{mode.value}_{name}_right"] = right
        for n in ns:
            details.append(
                {
                    "mode": mode.value,
                    "n": n,
                    "t_n": tr.tn(n),
                    "bbOut_n": bb(t.bb_out, n),
                    "bbTime_n": bb(t.bb_time, n),
                    "bbTime_n_plus_2log": bb(t.bb_time, n + 2 * log_term(n)),
                }
            )
    found = all(
        constants[f"{m.value}_{side}"] is not None for m in lab.config.modes for side in ("value_left", "time_left", "time_right")
    )
    notes = ["BB(i) for i > lmax is taken as BB(lmax); for i < 0 as 0"]
    return LemmaReport("L3", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details, notes)


def _pairs(lab: Lab):
    modes = [Mode.QP, Mode.QK]
    return [(modes[0], modes[1]), (modes[1], modes[0])]


def check_c1(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []
    for a, b in _pairs(lab):
        ta, tb = t.omega_trace(a), t.omega_trace(b)
        ns = range(ta.n_sat + 1)
        c = _min_c(lambda c: all(ta.tn(n) < tb.tn(n + 2 * log_term(n) + c) for n in ns), t.lmax + tb.n_sat + 2)
        constants[f"{a.value}_vs_{b.value}"] = c
        for n in ns:
            details.append({"from": a.value, "to": b.value, "n": n, "t_n": ta.tn(n), "t_prime_n_plus_2log": tb.tn(n + 2 * log_term(n))})
    return LemmaReport("C1", Status.REPORT_ONLY, constants, details)


def check_c3(lab: Lab) -> LemmaReport:
    constants, details = {}, []
    for a, b in _pairs(lab):
        sa, sb = lab.soph(a), lab.soph(b)
        for c in range(lab.config.cmax + 1):
            diffs = []
            for x in lab.tables.outputs:
                ka, kb = sa.record(x).k_c[c], sb.record(x).k_c[c]
                diffs.append(ka - kb - 2 * log_term(kb))
            worst = max(diffs) if diffs else None
            constants[f"{a.value}_vs_{b.value}_c{c}"] = None if worst is None else max(0, worst)
            details.append({"from": a.value, "to": b.value, "c": c, "max_excess": worst})
    return LemmaReport("C3", Status.REPORT_ONLY, constants, details)


def check_l4(lab: Lab) -> LemmaReport:
    t = lab.tables
    details = []
    agree = {}
    for a, b in _pairs(lab):
        ta, tb = t.omega_trace(a), t.omega_trace(b)
        ok = 0
        for n in range(ta.n_sat + 1):
            j = n - 2 * log_term(n)
            if j < 0:
                continue
            time = t.omega_to_tn(ta.prefix(n), a) if ta.cutoff is Cutoff.NONE else ta.tn(n)
            approx = tb.omega_at(time)
            got = approx.binary_prefix(j)
            hit = got == tb.prefix(j)
            ok += hit
            details.append(
                {"from": a.value, "to": b.value, "n": n, "j": j, "time": time, "prefix_from_time": format_bits(got), "true_prefix": format_bits(tb.prefix(j)), "agrees": hit}
            )
        agree[f"{a.value}_to_{b.value}_agreeing_rows"] = ok
    return LemmaReport("L4", Status.REPORT_ONLY, agree, details)


def check_c2(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []
    for mode in lab.config.modes:
        tr = t.omega_trace(mode)
        diffs = []
        for n in range(tr.n_sat + 1):
            pre = tr.prefix(n)
            k = t.k_of(pre)
            diff = None if k is None else k - n
            if diff is not None:
                diffs.append(diff)
            details.append({"mode": mode.value, "n": n, "prefix": format_bits(pre), "K": k, "K_minus_n": diff})
        constants[f"{mode.value}_min_K_minus_n"] = min(diffs) if diffs else None
    notes = ["rows with K = null have no witness within lmax and are vacuous"]
    return LemmaReport("C2", Status.REPORT_ONLY, constants, details, notes)


def check_t1(lab: Lab) -> LemmaReport:
    t = lab.tables
    tr = t.omega_trace(Mode.QP, cutoff=Cutoff.NONE)
    domain = t.domain.programs()
    details, errors, checked = [], [], 0
    for n in range(1, tr.n_sat + 1):
        pre = tr.prefix(n)
        for length in range(n):
            for bits in itertools.product("01", repeat=length):
                p = "".join(bits)
                got = t.decide_halting(p, pre, Mode.QP)
                want = Decision.HALTS if p in domain else Decision.NOT_HALTS
                checked += 1
                if got != want:
                    errors.append({"program": format_bits(p), "n": n, "prefix": format_bits(pre), "decided": got.value, "truth": want.value, "mode": "qp"})
        details.append({"n": n, "prefix": format_bits(pre), "time": t.omega_to_tn(pre, Mode.QP)})
    status = Status.EXACT_PASS if not errors else Status.FAIL
    return LemmaReport("T1", status, {"checked": checked, "errors": len(errors), "n_sat": tr.n_sat}, details + errors)


def check_w5(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []
    for mode in lab.config.modes:
        tr = t.omega_trace(mode)
        low = high = 0
        for n in range(1, tr.n_sat + 1):
            k = t.k_of(tr.prefix(n))
            is_low = k is not None and k <= n + 2 * log_term(log_term(n))
            is_high = k is not None and k >= n + log_term(n)
            low += is_low
            high += is_high
            details.append({"mode": mode.value, "n": n, "K": k, "low": is_low, "high": is_high})
        constants[f"{mode.value}_low_rows"] = low
        constants[f"{mode.value}_high_rows"] = high
    return LemmaReport("W5", Status.REPORT_ONLY, constants, details)


# -- m-sophistication ---------------------------------------------------------


def check_l7(lab: Lab) -> LemmaReport:
    constants, details = {}, []
    for mode in lab.config.modes:
        s = lab.soph(mode)
        per_x = []
        for x in lab.tables.outputs:
            kp = s.mm_soph(x)
            need = _min_c(lambda c: kp >= s.m_soph(x, c), lab.tables.lmax)
            per_x.append(need)
            details.append({"mode": mode.value, "x": format_bits(x), "k_prime": kp, "min_c": need})
        constants[mode.value] = None if (not per_x or None in per_x) else max(per_x)
    found = all(constants[m.value] is not None for m in lab.config.modes)
    return LemmaReport("L7", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details)


def check_l8(lab: Lab) -> LemmaReport:
    details, failures = [], []
    t = lab.tables
    for mode in lab.config.modes:
        s = lab.soph(mode)
        tr = t.omega_trace(mode)
        kp = {x: s.mm_soph(x) for x in t.outputs}
        for k in range(1, s.k_limit + 2):
            members = [x for x, v in kp.items() if v >= k]
            mass = dyadic_sum(t.m_of(x, None, mode) for x in members)
            at_tk = dyadic_sum(t.m_of(x, s.t(k), mode) for x in members)
            at_tk1 = dyadic_sum(t.m_of(x, s.t(k - 1), mode) for x in members)
            bound = Dyadic.unit(k - 1)
            row = {
                "mode": mode.value,
                "k": k,
                "size": len(members),
                "m_S_k": mass,
                "bound": bound,
                "stated": mass <= bound,
                # S_k only constrains mass at t_{k-1}, which yields twice the stated bound
                "index_shifted_bound": mass <= Dyadic.unit(k - 1).scale2(1),
                "shifted": mass - at_tk <= tr.gap(s.t(k)),
                "shifted_k_minus_1": mass - at_tk1 <= tr.gap(s.t(k - 1)),
            }
            details.append(row)
            if not all(row[key] for key in ("stated", "index_shifted_bound", "shifted", "shifted_k_minus_1")):
                failures.append({**row, "members": [format_bits(x) for x in members]})
    status = Status.EXACT_PASS if not failures else Status.FAIL
    return LemmaReport("L8", status, {"failures": len(failures)}, details + failures)


def sumtest_total(lab: Lab, mode: Mode) -> Dyadic:
    s = lab.soph(mode)
    return dyadic_sum(lab.tables.m_of(x, None, mode).scale2(s.sumtest_d(x)) for x in lab.tables.outputs)


def check_c5(lab: Lab) -> LemmaReport:
    constants, details, failures = {}, [], []
    for mode in lab.config.modes:
        total = sumtest_total(lab, mode)
        ok = total <= ONE
        constants[mode.value] = total
        details.append({"mode": mode.value, "sum": total, "pass": ok})
        if not ok:
            failures.append({"mode": mode.value, "sum": total})
    status = Status.EXACT_PASS if not failures else Status.FAIL
    return LemmaReport("C5", status, constants, details + failures)


def check_l9(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []
    sample = lab.sample(t.outputs, "L9")
    for mode in lab.config.modes:
        s = lab.soph(mode)
        for kind in ("k_prime", "k_c0"):
            diffs = []
            for x in sample:
                rec = s.record(x)
                k = rec.k_prime if kind == "k_prime" else rec.k_c[0]
                target = string_of(rec.k_value)
                kc = lab.conditional_k(target, x)
                diff = None if kc is None else kc - k - 2 * log_term(k)
                diffs.append(diff)
                details.append(
                    {"mode": mode.value, "k": kind, "x": format_bits(x), "K_x": rec.k_value, "K_of_K_given_x": kc, "k_value": k, "excess": diff}
                )
            constants[f"{mode.value}_{kind}"] = _at_least_zero(diffs)
    found = all(v is not None for v in constants.values())
    notes = [
        f"conditional enumerations at lmax={lab.config.cond_lmax} (lmax - {lab.config.cond_reduction})",
        "K(x) is encoded as a bit string via the length-lexicographic bijection",
        f"sample size {len(sample)}",
    ]
    return LemmaReport("L9", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details, notes)


def check_l11(lab: Lab) -> LemmaReport:
    t = lab.tables
    mode = Mode.QK
    s = lab.soph(mode)
    tr = t.omega_trace(mode)
    pool = [x for x in t.outputs if t.k_of(x) <= lab.config.cond_lmax]
    sample = lab.sample(pool, "L11")
    diffs, code_diffs, details = [], [], []
    for x in sample:
        rec = s.record(x)
        kp = rec.k_prime
        cond = tr.prefix(kp)
        kc = lab.conditional_k(x, cond)
        diff = None if kc is None else kc - (rec.k_value - kp)
        stat = s.statistic_pk(kp)
        p = stat.probability(x)
        ratio = p / Fraction(1, 2 ** (rec.k_value + 1))
        codeword = shannon_fano(stat).codewords[x]
        code_diff = None if kc is None else kc - len(codeword)
        diffs.append(diff)
        code_diffs.append(code_diff)
        details.append(
            {
                "x": format_bits(x),
                "K_x": rec.k_value,
                "k_prime": kp,
                "condition": format_bits(cond),
                "K_x_given_prefix": kc,
                "excess": diff,
                "P_kprime_x": p,
                "P_over_2^-(K+1)": ratio,
                "codeword_length": len(codeword),
                "K_given_minus_codeword": code_diff,
            }
        )
    constants = {"qk": _at_least_zero(diffs), "qk_vs_shannon_fano": _at_least_zero(code_diffs)}
    ratios = [r["P_over_2^-(K+1)"] for r in details]
    if ratios:
        constants["max_abs_log2_ratio"] = max(abs(ceil_log2(r)) if r >= 1 else abs(ceil_log2(1 / r)) for r in ratios)
    notes = [
        f"conditional enumerations at lmax={lab.config.cond_lmax}",
        f"sample drawn from {len(pool)} strings with K(x) <= {lab.config.cond_lmax}",
    ]
    found = constants["qk"] is not None
    return LemmaReport("L11", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details, notes)


def check_w6(lab: Lab) -> LemmaReport:
    constants, details = {}, []
    cp = lab.config.c_prime
    for mode in lab.config.modes:
        s = lab.soph(mode)
        for c in range(lab.config.cmax - cp + 1):
            best, witness = None, None
            for x in lab.tables.outputs:
                r = s.record(x)
                gap = r.k_c[c] - r.k_c[c + cp]
                if best is None or gap > best:
                    best, witness = gap, x
            n = len(witness) if witness is not None else None
            details.append(
                {"mode": mode.value, "c": c, "c_prime": cp, "max_gap": best, "witness": None if witness is None else format_bits(witness), "n_minus_2log_n": None if n is None else n - 2 * log_term(n)}
            )
            constants[f"{mode.value}_c{c}"] = best
    return LemmaReport("W6", Status.REPORT_ONLY, constants, details)


def check_w12(lab: Lab) -> LemmaReport:
    t = lab.tables
    slack = lab.config.w12_slack
    details = []
    counts = {}
    for x in t.outputs:
        n = len(x)
        if abs(t.k_of(x) - n) <= slack:
            counts[n] = counts.get(n, 0) + 1
    top = max((len(x) for x in t.outputs), default=0)
    hits = 0
    for n in range(top + 1):
        bound = Fraction(2) ** (n - 2 * log_term(n))
        cnt = counts.get(n, 0)
        hits += cnt > bound
        details.append({"n": n, "count": cnt, "bound": bound, "exceeds": cnt > bound})
    return LemmaReport("W12", Status.REPORT_ONLY, {"rows_exceeding": hits, "slack": slack}, details)


# -- statistics ---------------------------------------------------------------


def check_p3(lab: Lab) -> LemmaReport:
    constants, details = {}, []
    e = lab.config.p3_e
    for mode in lab.config.modes:
        s = lab.soph(mode)
        stats = {k: s.statistic_pk(k) for k in range(1, s.k_limit + e + 2)}
        first, second = [], []
        for x in lab.tables.outputs:
            rec = s.record(x)
            kp = rec.k_prime
            gap = s.sufficiency_gap(x, stats[kp])
            first_excess = None if gap is None else gap - 2 * log_term(kp)
            first.append(first_excess)
            kc = rec.k_c[0]
            candidates = []
            for k in range(1, kc + e + 1):
                g = s.sufficiency_gap(x, stats[k]) if k in stats else None
                if g is not None:
                    candidates.append((g - 3 * log_term(kc), k))
            best = min(candidates) if candidates else (None, None)
            second.append(best[0])
            details.append(
                {"mode": mode.value, "x": format_bits(x), "k_prime": kp, "gap_at_k_prime": gap, "first_excess": first_excess, "k_c0": kc, "best_k": best[1], "second_excess": best[0]}
            )
        constants[f"{mode.value}_first"] = _at_least_zero(first)
        constants[f"{mode.value}_second"] = _at_least_zero(second)
    found = all(v is not None for v in constants.values())
    notes = [f"K(P_k) replaced by k + 2*ceil(log2(k+1)) + {lab.config.c_p}", f"second scan over k <= k_0(x) + {e}"]
    return LemmaReport("P3", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details, notes)


def check_p2(lab: Lab) -> LemmaReport:
    t = lab.tables
    constants, details = {}, []
    slack = lab.config.p2_slack
    cp = lab.config.c_prime
    for mode in lab.config.modes:
        s = lab.soph(mode)
        stats = s.statistics()
        excess = []
        for x in t.outputs:
            bounds = [st.k_upper_bound for st in stats.values() if (g := s.sufficiency_gap(x, st)) is not None and g <= slack]
            ub = min(bounds) if bounds else None
            bb = t.bb_inv(x)
            k = s.record(x).k_c[min(cp, s.c_max)]
            diff = None if ub is None or bb is None else k - ub - bb
            excess.append(diff)
            details.append({"mode": mode.value, "x": format_bits(x), "k_c_prime": k, "soph_upper_bound": ub, "bb_inv": bb, "excess": diff})
        vals = [v for v in excess if v is not None]
        constants[mode.value] = max(vals) if vals else None
    return LemmaReport("P2", Status.REPORT_ONLY, constants, details, [f"P_k counts as sufficient when its gap is <= {slack}"])


def check_p4(lab: Lab) -> LemmaReport:
    constants, details = {}, []
    for mode in lab.config.modes:
        s = lab.soph(mode)
        total = dyadic_sum(
            lab.tables.m_of(x, None, mode).scale2(s.record(x).coarse - 4 * log_term(s.record(x).coarse))
            for x in lab.tables.outputs
        )
        c = max(0, ceil_log2(total.as_fraction())) if total else 0
        ok = total.scale2(-c) <= ONE
        constants[mode.value] = c if ok else None
        details.append({"mode": mode.value, "sum_at_c0": total, "c": c, "sum_at_c": total.scale2(-c), "pass": ok})
    found = all(v is not None for v in constants.values())
    return LemmaReport("P4", Status.CONSTANT_FOUND if found else Status.FAIL, constants, details)


CHECKS: dict[str, Callable[[Lab], LemmaReport]] = {
    "L2": check_l2,
    "L3": check_l3,
    "C1": check_c1,
    "C3": check_c3,
    "L4": check_l4,
    "C2": check_c2,
    "L7": check_l7,
    "L8": check_l8,
    "C5": check_c5,
    "L9": check_l9,
    "L11": check_l11,
    "P2": check_p2,
    "P3": check_p3,
    "P4": check_p4,
    "T1": check_t1,
    "W5": check_w5,
    "W6": check_w6,
    "W12": check_w12,
}


def check(lemma_id: str, lab: Lab) -> LemmaReport:
    try:
        fn = CHECKS[lemma_id]
    except KeyError:
        raise ValueError(f"unknown check {lemma_id!r}; known: {', '.join(CHECKS)}") from None
    report = fn(lab)
    report.config = _config(lab)
    return report


def run_suite(lab: Lab, ids=None) -> list[LemmaReport]:
    return [check(i, lab) for i in (ids or CHECKS)]


def report_json(reports: list[LemmaReport]) -> str:
    body = [r.to_json() for r in reports]
    digest = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()
    doc = {"format": "soph-lab v1 report", "reports": body, "digest": digest}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
