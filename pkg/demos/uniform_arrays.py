"""Arrays with one repeated element.

(declare-uniform-array C e) is an array holding the term e everywhere,
at any index, with no size at all. Reads agree with each other by
construction; a store materialises just enough cells to reason about
the written position against the constant background.
"""

from fdcc import Config, parse, solve

CASES = [
    ("two reads of a constant array always agree",
     "(declare-int e 0 9)\n(declare-uniform-array C e)\n"
     "(declare-int i 0 70000)\n(declare-int j 0 70000)\n"
     "(distinct (select C i) (select C j))\n"),
    ("the repeated element is an ordinary unknown",
     "(declare-int e 0 9)\n(declare-uniform-array C e)\n"
     "(declare-int x 0 9)\n"
     "(= (select C 51234) x)\n(distinct x 0)\n(leq (+ (* 1 x)) 1)\n"),
    ("a store dents the uniform background",
     "(declare-int e 0 9)\n(declare-uniform-array C e)\n"
     "(= (select (store C 3 7) 3) 7)\n(distinct (select C 3) 7)\n"),
]

if __name__ == "__main__":
    for title, text in CASES:
        r = solve(parse(text), Config())
        print(f"-- {title}")
        print(text.rstrip())
        line = f"=> {r.verdict}"
        if r.verdict == "sat" and r.model is not None:
            picks = {k: v for k, v in r.model.ints.items() if "%" not in k}
            line += f"   {picks}"
        print(line + "\n")
