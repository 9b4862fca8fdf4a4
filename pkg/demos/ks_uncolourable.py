"""
Kochen-Specker uncolourability of the shipped vector catalogues.

A KS-colouring gives every vector 0 or 1 so that each orthonormal basis in
the set contains exactly one 1. The 18-vector set in four dimensions has
nine bases and every vector lies in exactly two of them, so the number of
1s counted basis by basis would be both odd (nine bases, one each) and even
(each vector counted twice). The search below finds the same thing
mechanically, and the exhaustive count confirms it.

Run with ``python demos/ks_uncolourable.py``.
"""
import time

from ncsim import ks

for name in ("cabello18.json", "integer49.json"):
    vset = ks.load_catalogue(name)
    s = ks.build_orthogonality(vset)
    t0 = time.perf_counter()
    res = ks.search_colouring(s)
    dt = time.perf_counter() - t0
    print(f"{vset.name}: {len(vset)} vectors in dim {vset.dim}, {len(s.bases)} bases")
    print(f"  membership counts: {s.membership()}")
    print(f"  backtracking: {'uncolourable' if res.uncolourable else 'colourable'} "
          f"after {res.nodes} nodes ({dt * 1e3:.1f} ms)")
    if len(vset) <= ks.EXHAUSTIVE_LIMIT:
        print(f"  exhaustive 2^{len(vset)} check: {ks.count_colourings_exhaustive(s)} colourings")

# Dropping any single vector from the 49-vector set makes it colourable.
vset = ks.load_catalogue("integer49.json")
sub = vset.subset(range(1, len(vset)))
res = ks.search_colouring(ks.build_orthogonality(sub))
print(f"\nwithout vector 0: colourable={res.found}, "
      f"ones on {sum(res.colouring.values())} of {len(sub)} vectors")
