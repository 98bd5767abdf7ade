import math

import numpy as np
import pytest

from hybrid_sim.algebra import AlgebraParams
from hybrid_sim.errors import ConfigurationError
from hybrid_sim.experiments import linear_specs
from hybrid_sim.generator import GeneralIAS, NonInteracting
from hybrid_sim.oracles import commutator_matrix, linear_moment_oracle, linear_system, rk4_characteristics
from hybrid_sim.potentials import Cosine, GaussianWell, Harmonic, Quartic, WSpec

TIMES = np.linspace(0.0, 10.0, 41)


def test_commutator_matrix_is_antisymmetric_with_algebra_entries():
    C = commutator_matrix(AlgebraParams(0.5, 1.0))
    np.testing.assert_array_equal(C, -C.T)
    assert C[0, 1] == 0.5 and C[4, 5] == 1.0
    assert C[0, 3] == 1.0 and C[2, 1] == 1.0
    assert C[0, 2] == 0.0 and C[1, 3] == 0.0


@pytest.mark.parametrize("a", [0, 0.5, 1])
def test_uncoupled_oscillator_is_cosine(a):
    spec = NonInteracting(AlgebraParams(a, a), Harmonic(1.0), Harmonic(1.0))
    z0 = np.zeros(8)
    z0[0] = 1.0
    z = linear_moment_oracle(spec, z0, TIMES)
    np.testing.assert_allclose(z[:, 0], np.cos(TIMES), atol=1e-12)
    np.testing.assert_allclose(z[:, 1], -np.sin(TIMES), atol=1e-12)
    np.testing.assert_allclose(z[:, 4:], 0.0, atol=1e-14)


@pytest.mark.parametrize("limit", ["qq", "cc"])
def test_bilinear_coupling_normal_modes(limit):
    lam = 0.2
    spec = linear_specs(lam)[limit]
    z0 = np.zeros(8)
    z0[0] = 1.0
    z = linear_moment_oracle(spec, z0, TIMES)
    w_plus, w_minus = math.sqrt(1 + lam), math.sqrt(1 - lam)
    np.testing.assert_allclose(z[:, 0], 0.5 * (np.cos(w_plus * TIMES) + np.cos(w_minus * TIMES)), atol=1e-11)
    np.testing.assert_allclose(z[:, 4], 0.5 * (np.cos(w_plus * TIMES) - np.cos(w_minus * TIMES)), atol=1e-11)


def test_hybrid_means_leave_the_normal_modes():
    # the force on the quantum side carries chi1, which the coupling itself pumps
    lam = 0.2
    z0 = np.zeros(8)
    z0[0] = 1.0
    z = linear_moment_oracle(linear_specs(lam)["cq"], z0, TIMES)
    modes = 0.5 * (np.cos(math.sqrt(1 + lam) * TIMES) + np.cos(math.sqrt(1 - lam) * TIMES))
    assert np.max(np.abs(z[:, 0] - modes)) > 1e-2
    assert np.max(np.abs(z[:, 2])) > 1e-2


def test_zero_coupling_leaves_second_subsystem_at_rest():
    spec = linear_specs(0.0)["cq"]
    z0 = np.zeros(8)
    z0[0] = 1.0
    z = linear_moment_oracle(spec, z0, TIMES)
    np.testing.assert_allclose(z[:, 4:6], 0.0, atol=1e-14)


def test_shifted_center_gives_constant_term():
    spec = NonInteracting(AlgebraParams(1, 1), Harmonic(1.0, 2.0), Harmonic(1.0))
    A, c = linear_system(spec)
    assert c[1] == pytest.approx(2.0)
    z = linear_moment_oracle(spec, np.zeros(8), TIMES)
    np.testing.assert_allclose(z[:, 0], 2.0 * (1 - np.cos(TIMES)), atol=1e-11)


@pytest.mark.parametrize("V", [Cosine(1.0, 1.0), Quartic(1.0, 0.1)], ids=["cosine", "quartic"])
def test_refuses_nonlinear_potentials(V):
    with pytest.raises(ConfigurationError):
        linear_system(NonInteracting(AlgebraParams(1, 1), V, Harmonic(1.0)))


def test_refuses_nonlinear_interaction():
    spec = GeneralIAS(AlgebraParams(1, 1), Harmonic(1.0), Harmonic(1.0), WSpec.single(1.0, GaussianWell(0.5, 1.0)))
    with pytest.raises(ConfigurationError):
        linear_system(spec)


def test_rk4_harmonic_ensemble():
    x0 = np.array([[1.0], [0.0], [-0.5]])
    p0 = np.array([[0.0], [1.0], [0.3]])
    out = rk4_characteristics(lambda x: x, 1.0, x0, p0, 5.0, dt=1e-3, record=(0.0, 2.5, 5.0))
    for t, (x, p) in out.items():
        np.testing.assert_allclose(x, x0 * np.cos(t) + p0 * np.sin(t), atol=1e-11)
        np.testing.assert_allclose(p, p0 * np.cos(t) - x0 * np.sin(t), atol=1e-11)
