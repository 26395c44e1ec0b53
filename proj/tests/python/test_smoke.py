import math

import numpy as np
import pytest

import conoflow as cf


def kink():
    return cf.ConormalPotential(cf.SmoothPart.poly(-2.0), cf.SingularPart.kink(1.0))


def test_kink_flow_endpoint():
    T = math.sqrt(2.0) - 1.0 + 0.5
    tr = cf.integrate(kink(), cf.MetricModel.flat(1), cf.PhasePoint(-1.0, 1.0), T)
    end = tr.final_point
    assert abs(end.x - 1.164213562) < 1e-8
    assert abs(end.xi - 0.914213562) < 1e-8
    assert tr.points.shape == (len(tr.t), 4)
    assert any(regime == "hyperbolic-crossing" for _, _, regime in tr.regimes)


def test_potential_and_curvature():
    V = kink()
    assert V(0.5) == pytest.approx(-1.5)
    assert V.regularity == "W11"
    assert cf.mollify(V, 0.1).regularity == "Smooth"
    flat = cf.MetricModel.flat()
    line = cf.ConormalPotential(cf.SmoothPart.poly(-1.0, 1.0))
    assert cf.curvature_condition(flat, line, 0.0) == (True, False)


def test_coherent_state_and_measure():
    h = 0.01
    u = cf.coherent_state(cf.Grid.line(16.0, 2048), h, cf.PhasePoint(-1.0, 0.8), math.sqrt(h))
    assert u.norm() == pytest.approx(1.0, abs=1e-12)
    assert u.psi.shape == (2048,)
    assert cf.husimi(u, cf.PhasePoint(-1.0, 0.8)) == pytest.approx(1.0 / (2 * math.pi * h), rel=1e-10)
    box = cf.PhaseSpaceBox(cf.Interval(-2.0, 0.0), cf.Interval(0.0, 2.0))
    assert cf.box_mass(u, box) > 0.99
    v = cf.propagate(u, cf.ConormalPotential(cf.SmoothPart.zero()), 0.5)
    assert v.norm() == pytest.approx(1.0, abs=1e-10)
    assert cf.husimi_center(v).x == pytest.approx(-1.0 + 2 * 0.8 * 0.5, abs=1e-6)
    assert np.all(np.isfinite(v.psi))


def test_errors_are_typed():
    with pytest.raises(cf.ConoflowError, match="config"):
        cf.Grid.line(16.0, 1000)
    with pytest.raises(cf.ConoflowError, match="T: required"):
        cf.validate('kind = "flow"\nrho0 = { x = 1, xi = 1 }')


def test_validate_and_run(tmp_path):
    text = 'kind = "flow"\nT = 1\npotential = { smooth = "poly", v0 = -2, singular = "kink" }\nrho0 = { x = -1, xi = 1 }\n'
    canonical = cf.validate(text)
    assert cf.validate(canonical) == canonical
    report = cf.run(text, str(tmp_path))
    assert report["exit_code"] == 0
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "report.json").exists()
