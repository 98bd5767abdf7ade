"""Randomized properties over parameters the fixed-example tests do not pin down."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hybrid_sim import io
from hybrid_sim.algebra import AlgebraParams, ObservableId, PacketSpec, State, expectation, gaussian_state, make_grid
from hybrid_sim.generator import NonInteracting, build_plan
from hybrid_sim.potentials import Bilinear, Harmonic, PolynomialSum, WSpec, consistency_residual, sample_points
from hybrid_sim.propagator import step

GRID = make_grid({"x1": (64, 24.0), "chi1": (64, 24.0)})
POINTS = sample_points(((-3.0, 3.0),) * 4, n=16, seed=1)
SETTINGS = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

a_values = st.sampled_from([0.0, 0.25, 0.5, 1.0])
small = st.floats(-1.0, 1.0, allow_nan=False)

bases = st.one_of(
    st.builds(Bilinear, small),
    st.builds(lambda c: PolynomialSum(((1, 1, c[0]), (2, 1, c[1]), (0, 3, c[2]))), st.tuples(small, small, small)),
)


@SETTINGS
@given(a1=a_values, a2=a_values, terms=st.lists(st.tuples(st.floats(0.1, 1.5), bases), min_size=1, max_size=3))
def test_every_family_member_is_consistent(a1, a2, terms):
    assert consistency_residual(WSpec(tuple(terms)), AlgebraParams(a1, a2), POINTS) < 1e-7


packets = st.builds(PacketSpec, x=st.floats(-1.5, 1.5), p=st.floats(-1.0, 1.0), chi=st.floats(-1.0, 1.0),
                    pi=st.floats(-1.0, 1.0), sigma_x=st.floats(0.8, 1.2), sigma_chi=st.floats(0.8, 1.2))


@SETTINGS
@given(a=a_values, packet=packets, dt=st.floats(0.001, 0.05))
def test_step_is_unitary_and_reversible(a, packet, dt):
    alg = AlgebraParams(a, a)
    plan = build_plan(NonInteracting(alg, Harmonic(1.0)), GRID)
    s = gaussian_state(GRID, alg, [packet])
    forward = step(s, plan, dt)
    assert abs(forward.norm() - 1.0) < 1e-12
    np.testing.assert_allclose(step(forward, plan, -dt).amplitudes, s.amplitudes, atol=1e-12)


@SETTINGS
@given(a=a_values, packet=packets, phase=st.floats(0.0, 6.28))
def test_expectations_ignore_global_phase(a, packet, phase):
    alg = AlgebraParams(a, a)
    s = gaussian_state(GRID, alg, [packet])
    rotated = State(GRID, s.amplitudes * np.exp(1j * phase))
    for obs in (ObservableId.X1, ObservableId.P1, ObservableId.CHI1, ObservableId.PI1):
        assert abs(expectation(rotated, obs, alg) - expectation(s, obs, alg)) < 1e-12


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_numbers_round_trip(v):
    assert float(io.fmt(v)) == v
