"""Arrays whose size is itself an unknown.

(declare-array G (bounded MAX)) introduces an array of some size
1..MAX. Reads and writes at position k silently demand size > k, the
(size G) term exposes the size to arithmetic, and the model reports the
smallest size that worked.
"""

from fdcc import Config, parse, solve

CASES = [
    ("a read forces the size up",
     "(declare-array G (bounded 4) 0 3)\n(declare-int x 0 3)\n"
     "(= (select G 2) x)\n(distinct x 0)\n"),
    ("the size participates in arithmetic",
     "(declare-array G (bounded 4) 0 3)\n(declare-int s 0 9)\n"
     "(= (size G) s)\n(leq (+ (* -1 s)) -3)\n"),
    ("no admissible size at all",
     "(declare-array G (bounded 2) 0 3)\n(= (select G 2) 1)\n"),
    ("a write chain grows the frame",
     "(declare-array G (bounded 5) 0 9)\n(declare-int i 0 4)\n"
     "(= (select (store G i 7) 3) 7)\n(distinct (select G 3) 7)\n"),
]

if __name__ == "__main__":
    for title, text in CASES:
        r = solve(parse(text), Config())
        print(f"-- {title}")
        print(text.rstrip())
        print(f"=> {r.verdict}", end="")
        if r.model is not None and r.model.grow:
            for name, (size, cells) in sorted(r.model.grow.items()):
                print(f"   {name}: size {size}, cells {cells}", end="")
        print("\n")
