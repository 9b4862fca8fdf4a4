"""
The black-box contextuality test.

A box has one knob per dimension; each knob picks a catalogue direction and
each round returns one bit per knob. If a fraction epsilon of rounds fail
to show exactly one 1, and epsilon < 1/N for a family of N bases with no
KS-colouring, then no assignment of outcomes to individual knob settings
can explain the data. A box driven by a finite non-contextual sub-model
passes the test anyway: the verdict concerns the box's input-output
behaviour, not its interior. A box of independent coin flips fails.

Run with ``python demos/black_box.py``.
"""
from ncsim import ks, sbz

cat = ks.load_catalogue("cabello18.json")
triads = ks.build_orthogonality(cat).bases
schedule = sbz.default_schedule(triads, 20_000)
print(f"{cat.name}: N = {len(triads)} bases, threshold 1/N = {1 / len(triads):.4f}")

for interior, kwargs in (("ck", {"jitter_sigma": 1e-4}), ("oracle", {"jitter_sigma": 1e-4}),
                         ("toy", {}), ("oracle", {"crosstalk": 0.1})):
    box = sbz.BlackBox(interior, cat, seed=3, **kwargs)
    tr = sbz.run_box(box, schedule, triads)
    v = sbz.sbz_verdict(tr, confidence_level=0.999)
    print(f"  {interior:6s} {kwargs}: epsilon = {sbz.compute_epsilon(tr)} "
          f"(upper bound {v.interval[1]:.2e}) -> {v.verdict}")
