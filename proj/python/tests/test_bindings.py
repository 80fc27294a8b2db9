import json

import numpy as np
import pytest

core = pytest.importorskip("conecalc", reason="native module not built")


def test_spectral_helpers():
    a = np.diag([3.0, -1.0, 2.0])
    assert np.allclose(core.eigenvalues(a), [-1.0, 2.0, 3.0])
    assert core.partial_sum(a, 1.5) == pytest.approx(-1.0 + 0.5 * 2.0)


def test_cone_bindings():
    c = core.Cone("sigma:2", 4)
    assert c.o_n_invariant
    assert c.riesz_characteristic()["value"] == pytest.approx(2.0, abs=1e-6)
    assert c.contains(np.eye(4))["member"]
    assert not c.contains(-np.eye(4))["member"]
    assert core.Cone("branch:1", 3).dual_description() == "branch:3"
    assert not core.Cone("pdelta:1", 3).pp_subset(2.01)["pass"]
    assert core.check_relation("mapb:2:3", "pp:2", 4, samples=500, seed=7)
    with pytest.raises(ValueError):
        core.Cone("nope", 3)


def test_kernel_bindings():
    x = np.array([0.6, 0.8, 0.0])
    h = core.kernel_hessian(2.5, x)
    assert core.partial_sum(h, 2.5) == pytest.approx(0.0, abs=1e-12)
    assert core.kernel_value(2.5, x) == pytest.approx(-1.0)


def test_solve_binding(examples):
    cfg = json.loads((examples / "solve_saddle.json").read_text())
    values, rep = core.solve(cfg)
    assert rep["converged"]
    xs = np.linspace(-1.0, 1.0, 65)
    exact = 0.5 * (2 * xs[:, None] ** 2 - 2 * xs[None, :] ** 2)
    assert np.abs(values - exact).max() < 1e-8
