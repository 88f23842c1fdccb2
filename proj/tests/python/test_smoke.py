import math

import numpy as np
import pytest

import degenlab

A = [[0.0, 0.2]]
B = [[0.8, 1.0]]


def test_c_delta():
    assert degenlab.c_delta(1.0, 0.5) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert degenlab.c_delta(0.0, 0.75) == 0.0


def test_field_evaluation():
    f = degenlab.Field.sinusoid(2.0, 1.0)
    assert f(0.25) == pytest.approx(3.0)
    assert f.dim == 1
    with pytest.raises(degenlab.DomainError):
        f(2.0)


def test_heat_preserves_constants():
    m = degenlab.Model(degenlab.Field.constant(1.0), 64)
    ones = np.ones(m.size)
    assert np.allclose(m.heat(ones, 0.3), ones, atol=1e-12)
    assert m.volumes.sum() == pytest.approx(1.0)
    assert m.centers.shape == (64, 2)


def test_heat_is_symmetric_in_the_volume_inner_product():
    m = degenlab.Model(degenlab.Field.sinusoid(2.0, 1.0), 50)
    rng = np.random.default_rng(3)
    u, v = rng.standard_normal(50), rng.standard_normal(50)
    w = m.volumes
    assert np.dot(w * m.heat(u, 0.1), v) == pytest.approx(np.dot(w * u, m.heat(v, 0.1)), rel=1e-9)


def test_resolvent_solves_the_shifted_system():
    m = degenlab.Model(degenlab.Field.sinusoid(2.0, 1.0), 40)
    rng = np.random.default_rng(4)
    phi = rng.standard_normal(40)
    x = m.resolvent(phi, 2.0)
    hx = (m.stiffness @ x) / m.volumes
    assert np.allclose(hx + 2.0 * x, phi, atol=1e-10)


def test_distances():
    m = degenlab.Model(degenlab.Field.constant(1.0), 200)
    d = m.distance(A, B)
    assert abs(d["value"] - 0.6) <= 2 * m.h
    r = m.distance(A, B, mode="riemannian")
    assert abs(r["value"] - 0.6) <= 2 * m.h
    walled = degenlab.Model(degenlab.Field.degenerate(0.75), 128)
    assert math.isinf(walled.distance([[-1.0, -0.01]], [[0.01, 1.0]])["value"])


def test_dirichlet_gap():
    m = degenlab.Model(degenlab.Field.constant(1.0), 256, boundary="dirichlet")
    assert m.distance([[0.0, 0.3]], [[0.7, 1.0]], mode="d1")["value"] <= 2 * m.h


def test_leakage_vanishes_across_a_wall():
    m = degenlab.Model(degenlab.Field.degenerate(0.75), 128)
    assert m.leakage([[-1.0, 0.0]], 0.1) <= 1e-10


def test_gaussian_audit_records():
    m = degenlab.Model(degenlab.Field.constant(1.0), 128)
    records = m.gaussian_audit(A, B, [0.1, 0.05])
    certified = [r for r in records if r["kind"] == "certified"]
    assert len(certified) == 2
    assert all(r["pass"] for r in certified)


def test_bad_arguments():
    with pytest.raises(ValueError):
        degenlab.Model(degenlab.Field.constant(1.0), 16, boundary="robin")
    m = degenlab.Model(degenlab.Field.constant(1.0), 16)
    with pytest.raises(degenlab.GridMismatch):
        m.heat(np.ones(5), 0.1)


def test_scenarios():
    names = [name for name, _ in degenlab.list_scenarios()]
    assert "laplacian-interval" in names
    assert "scenario: wave-speed" in degenlab.describe("wave-speed")
    with pytest.raises(KeyError):
        degenlab.describe("missing")


def test_config_validation():
    with pytest.raises(degenlab.ConfigError, match="scenario: missing"):
        degenlab.validate_config("grid: {n: 8}\n")


def test_run(tmp_path):
    code, report = degenlab.run("dirichlet-d1-gap", grid_override=128, jobs=1, out=tmp_path)
    assert code == 0
    assert report["summary"]["certified_failures"] == 0
    assert (tmp_path / "report.json").read_text() != ""
    again_code, again = degenlab.run("dirichlet-d1-gap", grid_override=128, jobs=2)
    assert again_code == code
    assert again["records"] == report["records"]
