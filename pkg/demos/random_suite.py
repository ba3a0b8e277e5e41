"""A miniature benchmark run.

Generates a seeded batch of chain-heavy array formulas, runs the
cooperating solver against each engine alone, and prints the summary
table with the Gain score: positive when cooperation answers formulas
the standalone engines miss.
"""

import sys

from fdcc.bench import GenConfig, run_suite

if __name__ == "__main__":
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 24
    lengths = list(range(10, 61))
    cfgs = [GenConfig("AEUF-II", lengths[round(i * 50 / max(count - 1, 1))],
                      seed=i, dom_hi=50) for i in range(count)]
    records, summary = run_suite(cfgs, timeout=5.0)
    print(summary.table())
    lone = [r.formula_id for r in records
            if r.solver == "fdcc" and r.verdict != "TO"]
    timeouts = {r.formula_id for r in records if r.verdict == "TO"}
    if timeouts:
        print(f"\n{len(timeouts)} formula(s) timed out for at least one solver")
    print(f"\nVerdicts come with their costs in the CSV columns: rerun with")
    print(f"fdcc bench --count {count} --out suite.csv to keep the rows.")
