import json

import numpy as np
import pytest

from ncsim import ck, io
from ncsim.quantum import PovmDecomposition, ProjectiveDecomposition, QuantumState


def roundtrip(obj):
    return json.loads(json.dumps(obj))


def test_state_roundtrip(phi_plus):
    back = io.state_from_dict(roundtrip(io.state_to_dict(phi_plus)))
    assert np.allclose(back.rho, phi_plus.rho)
    mixed = QuantumState.maximally_mixed(3)
    assert np.allclose(io.state_from_dict(roundtrip(io.state_to_dict(mixed))).rho, mixed.rho)


def test_targets_roundtrip(contexts):
    back = io.targets_from_dict(roundtrip(io.targets_to_dict(contexts)))
    assert [d.labels for d in back] == [d.labels for d in contexts]
    assert all(np.allclose(a.stacked(), b.stacked()) for a, b in zip(back, contexts))


def test_povm_roundtrip():
    e = np.diag([0.3, 0.7]).astype(complex)
    d = PovmDecomposition((e, np.eye(2) - e), labels=("a", "b"))
    back = io.decomposition_from_dict(roundtrip(io.decomposition_to_dict(d)))
    assert back.kind == "povm" and back.labels == ("a", "b")


def test_model_roundtrip_is_exact(contexts):
    m = ck.build_submodel(contexts, 1e-3, 4)
    back = io.model_from_dict(roundtrip(io.model_to_dict(m)))
    assert (back.epsilon_r, back.build_seed) == (m.epsilon_r, m.build_seed)
    assert all(np.array_equal(a.stacked(), b.stacked())
               for a, b in zip(m.decompositions, back.decompositions))


def test_model_version_checked(contexts):
    d = io.model_to_dict(ck.build_submodel(contexts[:1], 1e-3, 0))
    d["format_version"] = 99
    with pytest.raises(io.MalformedFile, match="version"):
        io.model_from_dict(d)


@pytest.mark.parametrize("doc", [
    {"dim": 2},
    {"dim": 2, "vector": [[1, 0]]},
    {"dim": 2, "vector": [[1, 0, 0], [0, 0, 0]]},
])
def test_bad_state_documents(doc):
    with pytest.raises(io.MalformedFile):
        io.state_from_dict(doc)


def test_declared_dim_checked():
    d = io.decomposition_to_dict(ProjectiveDecomposition.from_basis(np.eye(2)))
    d["dim"] = 3
    with pytest.raises(io.MalformedFile, match="dim"):
        io.decomposition_from_dict(d)


def test_read_json_reports_position(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{\n  "a": 1,\n  "b": ]\n}')
    with pytest.raises(io.MalformedFile, match="line 3 column 8"):
        io.read_json(p)


def test_dumps_is_canonical():
    assert io.dumps({"b": 1, "a": [1.5, None]}) == '{"a":[1.5,null],"b":1}'
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})
