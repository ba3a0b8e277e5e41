"""Watch the two engines talk.

Solves the pigeonhole example with tracing on and replays the exchange
log: which equalities entered the congruence engine, which pair queries
came back answered, and which derived facts crossed into the
finite-domain store.
"""

import json
import tempfile

from fdcc import Config, parse, solve

from running_examples import PIGEON

LABELS = {
    "cc_in": "formula literal into cc",
    "pair": "critical pair answered by fd",
    "ded": "cc-derived fact into fd",
    "dec": "labelling decision",
    "back": "backtrack",
    "verdict": "verdict",
}


def describe(e: dict) -> str:
    kind = LABELS[e["ev"]]
    if e["ev"] == "cc_in":
        op = "=" if e["lit"] == "eq" else "!="
        return f"{kind}: {e['a']} {op} {e['b']}"
    if e["ev"] == "pair":
        return f"{kind}: {e['a']} vs {e['b']} -> {e['ans']}"
    if e["ev"] == "ded":
        if e["kind"] == "clique":
            return f"{kind}: alldifferent({', '.join(e['members'])})"
        op = "=" if e["kind"] == "eq" else "!="
        return f"{kind}: {e['a']} {op} {e['b']}"
    if e["ev"] == "dec":
        return f"{kind}: {e['var']} = {e['val']}"
    if e["ev"] == "verdict":
        return f"{kind}: {e['verdict']} after {e.get('decisions', 0)} decisions"
    return kind


if __name__ == "__main__":
    with tempfile.NamedTemporaryFile("r", suffix=".jsonl") as fh:
        r = solve(parse(PIGEON), Config(trace_path=fh.name))
        events = [json.loads(line) for line in fh]
    for e in events:
        print(describe(e))
    print(f"\n{r.verdict}: the derived disequalities over three index")
    print("variables ranging over two values form an impossible clique.")
