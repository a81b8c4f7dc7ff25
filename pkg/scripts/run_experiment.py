#!/usr/bin/env python3
"""Sweep lmax, run the check suite at each length and print a summary.

    python3 scripts/run_experiment.py --lmax 10 12 14 16 --workers 4 --out runs/

For every length this writes ``<out>/lmax<N>/report.json`` and prints one row
per length with the table size, Omega in both modes, n_sat, and the status of
each check.  The L8 column also says which k broke the stated bound, if any.
"""
import argparse
import time
from pathlib import Path

from sophlab.config import RunConfig
from sophlab.enumerator import save_table
from sophlab.tables import Mode
from sophlab.verify import CHECKS, Lab, Status, report_json, run_suite

SHORT = {Status.EXACT_PASS: "ok", Status.CONSTANT_FOUND: "c", Status.REPORT_ONLY: "r", Status.FAIL: "FAIL"}


def l8_detail(report) -> str:
    bad = sorted({(r["mode"], r["k"]) for r in report.details if not r["stated"]})
    return ",".join(f"{m}:k={k}" for m, k in bad) or "-"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lmax", type=int, nargs="+", default=[12, 14, 16])
    ap.add_argument("--tmax", type=int, default=4096)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--cond-sample", type=int, default=20)
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()

    print(f"{'lmax':>4} {'records':>7} {'omega_qp':>14} {'omega_qk':>12} {'nsat':>4} {'secs':>6}  checks  (L8 stated-bound breaks)")
    for lmax in args.lmax:
        cfg = RunConfig(lmax=lmax, tmax=args.tmax, workers=args.workers, cond_sample=args.cond_sample)
        start = time.perf_counter()
        lab = Lab.from_config(cfg)
        reports = run_suite(lab)
        secs = time.perf_counter() - start

        out = Path(args.out) / f"lmax{lmax}"
        out.mkdir(parents=True, exist_ok=True)
        save_table(lab.domain, out / "domain.csv")
        (out / "report.json").write_text(report_json(reports))

        by_id = {r.lemma_id: r for r in reports}
        qp, qk = (lab.tables.omega_trace(m) for m in (Mode.QP, Mode.QK))
        statuses = " ".join(f"{i}={SHORT[by_id[i].status]}" for i in CHECKS)
        print(
            f"{lmax:>4} {len(lab.domain):>7} {str(qp.omega_final):>14} {str(qk.omega_final):>12} "
            f"{qp.n_sat:>4} {secs:>6.1f}  {statuses}  ({l8_detail(by_id['L8'])})"
        )


if __name__ == "__main__":
    main()
