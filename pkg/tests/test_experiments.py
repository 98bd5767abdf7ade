import math

import numpy as np
import pytest

from hybrid_sim import experiments as ex
from hybrid_sim.algebra import AlgebraParams, make_grid
from hybrid_sim.errors import ConfigurationError


def test_check_rejects_missing_and_nonfinite():
    c = ex.Check("m", "<", 1.0)
    assert c.holds(0.5) and not c.holds(1.5)
    assert not c.holds(None) and not c.holds(math.nan)
    assert ex.Check("m", ">", 1.0).holds(2.0)


def test_report_verdicts():
    r = ex.ScenarioReport("x", metrics={"a": 0.1}, checks=[ex.Check("a", "<", 1.0)])
    assert r.verdict == "pass"
    r.metrics["a"] = 2.0
    assert r.verdict == "fail"
    r.inconclusive = True
    assert r.verdict == "inconclusive" and not r.passed
    d = r.to_dict()
    assert d["checks"][0]["passed"] is False and list(d["metrics"]) == sorted(d["metrics"])


def test_registry_contents():
    assert {"qq-cc-limits", "decoupling", "hybrid-coupling", "special-hybrid", "liouville", "f-gauge",
            "pde-residuals"} <= set(ex.SCENARIOS)


def test_unknown_override_names_accepted_keys():
    with pytest.raises(ConfigurationError) as exc:
        ex.run_scenario("f-gauge", {"nonsense": 1})
    assert "nonsense" in str(exc.value) and "t_end" in str(exc.value)


def test_decoupling_parameters_come_from_the_probe():
    params = ex.scenario_parameters("decoupling")
    assert params["delta"] == 1.0 and "expect" not in params


def test_linear_specs_cover_three_limits():
    specs = ex.linear_specs(0.3)
    assert [s.algebra.a1 for s in specs.values()] == [1, 0, 0]
    assert [s.algebra.a2 for s in specs.values()] == [1, 0, 1]


def test_residual_test_states_are_contained():
    grid = make_grid({name: (32, 20.0) for name in ("x1", "chi1", "x2", "chi2")})
    for s in ex.residual_test_states(grid, AlgebraParams(0.5, 1)):
        assert s.edge_density() < 1e-9


def test_special_hybrid_states_fit_their_grid():
    grid = ex.special_hybrid_grid()
    assert grid.axis("chi2").L == 3 * grid.axis("x1").L


def test_relative_moment_errors_scale_by_ensemble():
    ens = {"x": 0.0, "p": 0.0, "xx": 4.0, "pp": 1.0, "xp": 0.0}
    grid_m = {"x": 0.2, "p": 0.1, "xx": 4.4, "pp": 1.0, "xp": 0.2}
    errs = ex.relative_moment_errors(grid_m, ens)
    assert errs["x"] == pytest.approx(0.1)
    assert errs["xx"] == pytest.approx(0.1)
    assert errs["xp"] == pytest.approx(0.1)


def test_effective_support_counts_cells():
    assert ex.effective_support(np.ones((10, 10))) == pytest.approx(100)
    rho = np.zeros(50)
    rho[3] = 1.0
    assert ex.effective_support(rho) == pytest.approx(1.0)


def test_sample_and_density_moments_agree_on_a_point_mass():
    x = np.array([-1.0, 0.0, 1.0])
    p = np.array([0.0, 2.0])
    rho = np.zeros((3, 2))
    rho[2, 1] = 1.0
    assert ex.density_moments(x, p, rho) == pytest.approx(ex.sample_moments(np.array([1.0]), np.array([2.0])))


def test_algebra_scenario_small():
    report = ex.run_scenario("algebra", {"n_states": 2})
    assert report.passed, report.to_dict()
