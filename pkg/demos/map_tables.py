"""Finite maps on top of the array fragment.

A map is a partial function from a key range to a value range. It
compiles away before solving: one array holds the values, a second 0/1
array holds key membership, reads pick up a membership side condition,
and delete clears the bit. Models come back as plain key->value tables.
"""

from fdcc import Config, parse, solve

TEXT = """\
(declare-map m 0 4 0 9)
(declare-int k 0 4)
(keys m 0)
(= (select m 0) 7)
(= (select (store m 1 3) k) 3)
(not-keys m 1)
(delete m 0 m0)
(not-keys m0 0)
"""

if __name__ == "__main__":
    print(TEXT)
    r = solve(parse(TEXT), Config())
    print(f"verdict: {r.verdict}")
    print(f"k = {r.model.ints['k']}")
    print(f"m = {r.model.maps['m']}")
    print()
    print("Key 1 is not in m, so the read through (store m 1 3) can only")
    print("return 3 at k=1; the store provides both membership and value.")
    print("The deleted view m0 is the same map minus key 0, checked by the")
    print("final atom without declaring any second map.")
