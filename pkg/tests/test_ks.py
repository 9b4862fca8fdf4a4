import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncsim import ks
from ncsim.io import MalformedFile
from ncsim.quantum import SIGMA_X, SIGMA_Z, projector, tensor


@pytest.fixture(scope="module")
def cabello():
    return ks.load_catalogue("cabello18.json")


@pytest.fixture(scope="module")
def int49():
    return ks.load_catalogue("integer49.json")


def test_shipped_catalogue_lists_files():
    names = ks.shipped_catalogue()
    assert {"cabello18", "integer49"} <= set(names)


def test_cabello_structure(cabello):
    s = ks.build_orthogonality(cabello)
    assert len(cabello) == 18 and cabello.dim == 4
    assert len(s.bases) == 9
    # every vector sits in exactly two bases, so an odd number of bases cannot be covered
    assert s.membership() == [2] * 18


def test_cabello_uncolourable_both_ways(cabello):
    cert = ks.certify(cabello)
    assert cert.uncolourable
    assert cert.exhaustive_colourings == 0


def test_integer49_uncolourable_and_minimal(int49):
    s = ks.build_orthogonality(int49)
    assert ks.search_colouring(s).uncolourable
    for drop in (0, 17, 48):
        keep = [i for i in range(len(int49)) if i != drop]
        sub = ks.build_orthogonality(int49.subset(keep))
        assert ks.search_colouring(sub).found


def test_exhaustive_limit(int49):
    with pytest.raises(ValueError):
        ks.count_colourings_exhaustive(ks.build_orthogonality(int49))


def test_colourable_set_returns_valid_colouring():
    vset = ks.VectorSet("axes", 3, ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1), (0, 1, -1)))
    s = ks.build_orthogonality(vset)
    res = ks.search_colouring(s)
    assert res.found
    assert ks.validate_ks_colouring(s, res.colouring)
    assert ks.count_colourings_exhaustive(s) == len(_brute(s))


def _brute(s):
    n = len(s.base)
    out = []
    for mask in range(1 << n):
        c = [(mask >> i) & 1 for i in range(n)]
        if all(sum(c[i] for i in b) == 1 for b in s.bases):
            out.append(c)
    return out


def test_validate_reports_violating_bases():
    vset = ks.VectorSet("axes", 3, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    s = ks.build_orthogonality(vset)
    verdict = ks.validate_ks_colouring(s, {0: 1, 1: 1, 2: 0})
    assert not verdict
    assert verdict.violations == ((0, 1, 2),)
    with pytest.raises(ks.PartialColouring):
        ks.validate_ks_colouring(s, {0: 1})


@pytest.mark.parametrize("data, message", [
    ({"name": "x", "dim": 3, "vectors": [[1, 0]]}, "components"),
    ({"name": "x", "dim": 3, "vectors": [[0, 0, 0]]}, "zero"),
    ({"name": "x", "dim": 2, "vectors": [[1, 1], [-2, -2]]}, "equal up to sign"),
    ({"name": "x", "dim": 2, "denominator": 5, "vectors": [[3, 3]]}, "unit"),
])
def test_invalid_catalogue_entries(data, message):
    with pytest.raises(ks.InvalidCatalogue, match=message):
        ks.VectorSet.from_dict(data)


def test_malformed_catalogue_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"name": "x", "dim": 3,\n "vectors": [1, 2')
    with pytest.raises(MalformedFile, match="line 2"):
        ks.load_catalogue(p)
    p.write_text(json.dumps({"name": "x", "dim": "three", "vectors": []}))
    with pytest.raises(MalformedFile):
        ks.load_catalogue(p)


def test_float_catalogue_uses_tolerance():
    r = 1 / np.sqrt(2)
    vset = ks.VectorSet("f", 2, ((r, r), (r, -r)))
    assert not vset.exact
    assert len(ks.build_orthogonality(vset).bases) == 1


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(0, 17), min_size=1, max_size=17))
def test_removing_vectors_never_breaks_colourability(drop):
    # any subset of a colourable set is colourable
    cab = ks.load_catalogue("cabello18.json")
    keep = [i for i in range(18) if i not in drop]
    sub = cab.subset(keep)
    s = ks.build_orthogonality(sub)
    res = ks.search_colouring(s)
    assert res.found == (ks.count_colourings_exhaustive(s) > 0)
    if res.found:
        assert ks.validate_ks_colouring(s, res.colouring)
        smaller = sub.subset(range(len(sub) - 1)) if len(sub) > 1 else sub
        assert ks.search_colouring(ks.build_orthogonality(smaller)).found


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 12))
def test_search_agrees_with_exhaustive_on_random_sets(seed, n):
    rng = np.random.default_rng(seed)
    pool = [v for v in ks.load_catalogue("integer49.json").components]
    idx = rng.choice(len(pool), size=n, replace=False)
    vset = ks.VectorSet("r", 3, tuple(pool[i] for i in idx))
    s = ks.build_orthogonality(vset)
    assert ks.search_colouring(s).found == (ks.count_colourings_exhaustive(s) > 0)


def test_search_is_deterministic(cabello):
    s = ks.build_orthogonality(cabello)
    a, b = ks.search_colouring(s), ks.search_colouring(s)
    assert (a.nodes, a.order) == (b.nodes, b.order)


def test_certification_speed(cabello):
    t = time.perf_counter()
    ks.certify(cabello)
    assert time.perf_counter() - t < 10


class TestOperatorColouring:
    def test_commuting_paulis_obey_rules(self):
        zz, xx = tensor(SIGMA_Z, SIGMA_Z), tensor(SIGMA_X, SIGMA_X)
        assert ks.validate_operator_colouring([zz, xx, zz @ xx], [1, 1, 1])
        assert ks.validate_operator_colouring([zz, xx, zz @ xx], [1, -1, -1])

    def test_product_rule_violation(self):
        zz, xx = tensor(SIGMA_Z, SIGMA_Z), tensor(SIGMA_X, SIGMA_X)
        verdict = ks.validate_operator_colouring([zz, xx, zz @ xx], [1, 1, -1])
        assert not verdict and "product" in verdict.violation

    def test_projector_square(self):
        p = projector([1, 0])
        assert ks.validate_operator_colouring([p], [1])
        assert ks.validate_operator_colouring([p, np.eye(2) - p, np.eye(2)], [1, 0, 1])
        verdict = ks.validate_operator_colouring([p, np.eye(2) - p, np.eye(2)], [1, 1, 1])
        assert not verdict and "sum" in verdict.violation

    def test_value_outside_spectrum(self):
        with pytest.raises(ValueError, match="spectrum"):
            ks.validate_operator_colouring([SIGMA_Z], [0.5])


def test_bases_as_decompositions(cabello):
    s = ks.build_orthogonality(cabello)
    decs = ks.bases_as_decompositions(s)
    assert len(decs) == 9
    assert list(decs[0].labels) == list(s.bases[0])


def test_incomplete_basis_has_no_bases():
    vset = ks.VectorSet("pair", 3, ((1, 0, 0), (0, 1, 0)))
    assert ks.build_orthogonality(vset).bases == ()


def test_identity_must_be_one():
    assert ks.validate_operator_colouring([np.eye(2)], [1])
    with pytest.raises(ValueError, match="spectrum"):
        ks.validate_operator_colouring([np.eye(2)], [-1])
    # zero projector: 0 * 0 = 0 is the only consistent value
    assert ks.validate_operator_colouring([np.zeros((2, 2))], [0])


def test_nine_operator_family_forces_equal_products():
    from ncsim.experiments import OBSERVABLES as O
    names = ["Z1", "X1", "Z2", "X2", "Z1Z2", "Z1X2", "X1Z2", "X1X2"]
    ops = [O[n] for n in names]
    for z, x in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
        # V(Z1)=V(Z2)=z, V(X1)=V(X2)=x; the product rule then fixes the rest
        good = [z, x, z, x, z * z, z * x, x * z, x * x]
        assert ks.validate_operator_colouring(ops, good)
        bad = list(good)
        bad[6] = -bad[5]  # V(X1Z2) != V(Z1X2)
        assert not ks.validate_operator_colouring(ops, bad)
