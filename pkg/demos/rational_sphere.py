"""
Colouring the rational points of the unit sphere.

Every rational unit vector in three dimensions can be written as
``(x, y, z) / n`` with a primitive integer triple having exactly one odd
entry. Colouring a vector 1 when that odd entry sits in the first slot
gives a valid KS-colouring of all rational directions, because the three
vectors of an orthogonal rational triad always carry their odd entries in
three different slots. The dense-but-rational sphere therefore escapes the
Kochen-Specker argument.

Run with ``python demos/rational_sphere.py [max_component]``.
"""
import sys
import time

from ncsim import gz

m = int(sys.argv[1]) if len(sys.argv) > 1 else 50

for raw in [("3/5", "4/5", "0"), ("2/7", "3/7", "6/7"), ("-4/9", "8/9", "1/9")]:
    v = gz.reduce(raw)
    print(f"{raw} -> {v}, odd slot {v.odd_position}, colour {gz.gz_colour(v)}")

t0 = time.perf_counter()
report = gz.verify(m)
print(f"\ncomponents <= {m}: {report.vectors} directions, {report.triads} orthogonal triads")
print(f"triads without exactly one 1: {report.violations}  ({time.perf_counter() - t0:.2f}s)")

for triad in gz.enumerate_rational_triads(7)[:5]:
    print("  " + "  ".join(f"{v}:{gz.gz_colour(v)}" for v in triad))
