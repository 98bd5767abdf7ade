import math

import numpy as np
import pytest

from hybrid_sim.algebra import AlgebraParams
from hybrid_sim.errors import ConfigurationError, NumericalDomainError
from hybrid_sim.potentials import (Bilinear, Cosine, GaussianWell, Harmonic, PolynomialRawW, PolynomialSum, Quartic,
                                   RawW, WSpec, admissible_projection_exists, consistency_residual, eval_W,
                                   grad_W_x, sample_points)

QQ = AlgebraParams(1.0, 1.0)
CQ = AlgebraParams(0.0, 1.0)
LATTICE = [AlgebraParams(a1, a2) for a1 in (0.0, 0.5, 1.0) for a2 in (0.0, 0.5, 1.0)]


def test_subsystem_potentials():
    assert Harmonic(2.0, 1.0).value(3.0) == pytest.approx(4.0)
    assert Harmonic(2.0, 1.0).deriv(3.0) == pytest.approx(4.0)
    assert Quartic(1.0, 0.5).value(2.0) == pytest.approx(2.0 + 8.0)
    assert Quartic(1.0, 0.5).deriv(2.0) == pytest.approx(2.0 + 16.0)
    assert Cosine(1.5, 2.0).value(0.0) == pytest.approx(0.0)
    assert Cosine(1.5, 2.0).deriv(0.3) == pytest.approx(1.5 * 2.0 * math.sin(0.6))


@pytest.mark.parametrize("V", [Harmonic(1.3, 0.4), Quartic(0.7, 0.2), Cosine(1.1, 0.9)])
def test_potential_derivatives_match_finite_difference(V):
    x = np.linspace(-3, 3, 13)
    h = 1e-6
    np.testing.assert_allclose(V.deriv(x), (V.value(x + h) - V.value(x - h)) / (2 * h), atol=1e-7)


@pytest.mark.parametrize("base", [Bilinear(0.7), GaussianWell(0.8, 1.5, 0.3, -0.2),
                                  PolynomialSum(((1, 1, 0.4), (2, 1, -0.1), (0, 3, 0.05)))])
def test_base_partials_match_finite_difference(base):
    u1, u2, h = 0.37, -1.21, 1e-6
    d1, d2 = base.partials(u1, u2)
    assert d1 == pytest.approx((base.value(u1 + h, u2) - base.value(u1 - h, u2)) / (2 * h), abs=1e-7)
    assert d2 == pytest.approx((base.value(u1, u2 + h) - base.value(u1, u2 - h)) / (2 * h), abs=1e-7)


def test_wspec_values():
    w = WSpec.single(1.0, Bilinear(1.0))
    assert eval_W(w, QQ, (2, 7, 3, 9)) == 6.0
    assert eval_W(w, CQ, (1, 2, 5, 4)) == 15.0
    double = WSpec(((1.0, Bilinear(1.0)), (1.0, Bilinear(1.0))))
    assert eval_W(double, CQ, (1, 2, 5, 4)) == 2 * eval_W(w, CQ, (1, 2, 5, 4))


def test_wspec_gradients():
    w = WSpec.single(1.0, Bilinear(1.0))
    assert grad_W_x(w, QQ, (2, 7, 3, 9)) == (3.0, 2.0)
    assert grad_W_x(w, CQ, (1, 2, 5, 4))[0] == 5.0


def test_raw_bilinear_residual_is_a1_minus_a2():
    w = PolynomialRawW({(1, 0, 1, 0): 1.0})
    pts = sample_points(n=64)
    for alg in LATTICE:
        assert consistency_residual(w, alg, pts) == pytest.approx(abs(alg.a1 - alg.a2), abs=1e-9)


def test_raw_without_chi_dependence_is_consistent_for_equal_a():
    w = RawW(lambda x1, c1, x2, c2: np.cos(x1) * x2 ** 2)
    assert consistency_residual(w, QQ, sample_points(n=64)) < 1e-7


def test_random_wspec_members_are_consistent():
    rng = np.random.default_rng(7)
    pts = sample_points(n=64)
    for i in range(50):
        alg = LATTICE[i % len(LATTICE)]
        terms = []
        for _ in range(rng.integers(1, 4)):
            alpha = float(rng.uniform(0, 1.5))
            kind = rng.integers(3)
            if kind == 0:
                base = Bilinear(float(rng.normal()))
            elif kind == 1:
                base = GaussianWell(float(rng.normal()), float(rng.uniform(0.5, 2)), *rng.normal(size=2).tolist())
            else:
                base = PolynomialSum(((1, 1, float(rng.normal())), (2, 1, 0.1 * float(rng.normal()))))
            terms.append((alpha, base))
        assert consistency_residual(WSpec(tuple(terms)), alg, pts) < 1e-7


def test_nonfinite_derivative_reported():
    w = RawW(lambda x1, c1, x2, c2: np.log(np.abs(x1 - 1.0)) * x2)
    with pytest.raises(NumericalDomainError), np.errstate(all="ignore"):
        consistency_residual(w, CQ, [[1.0, 0.0, 2.0, 0.0]])


def test_polynomial_degree_cap():
    with pytest.raises(ConfigurationError):
        PolynomialRawW({(3, 0, 2, 0): 1.0})


def test_admissibility_verdicts():
    bad = admissible_projection_exists(PolynomialRawW({(1, 0, 1, 0): 1.0}), CQ)
    assert not bad
    assert bad.residual == pytest.approx(1.0, abs=1e-9)
    assert len(bad.witness) == 4
    hybrid = WSpec.single(0.5, Bilinear(1.0))  # (x1 + 0.5 chi1)(x2 - 0.5 chi2) for a = (0, 1)
    assert eval_W(hybrid, CQ, (1, 2, 5, 4)) == pytest.approx((1 + 1) * (5 - 2))
    assert admissible_projection_exists(hybrid, CQ)
    empty = admissible_projection_exists(WSpec(()), CQ)
    assert empty and empty.residual == 0.0


def test_sample_points_deterministic():
    np.testing.assert_array_equal(sample_points(n=64), sample_points(n=64))
    pts = sample_points(((0, 1), (2, 3), (-1, 0), (5, 6)), n=64)
    assert pts.shape == (64, 4)
    assert pts[:, 1].min() >= 2 and pts[:, 3].max() <= 6
