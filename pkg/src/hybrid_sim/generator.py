"""Evolution generators for each (a1, a2) regime and their split form.

Every generator built here is a sum of a position-diagonal field
(``v_phase``) and a Fourier-diagonal symbol (``t_symbol``), which is what
the Strang propagator needs. ``pde_residuals`` checks the defining
relations

    (1/i hbar) [x_j, H] = p_j / m_j
    -(1/i hbar) [p_j, H] = V_j'(x_j) + dW/dx_j

by operator application on test states.
"""
from dataclasses import dataclass, field

import numpy as np

from .algebra import ObservableId, State, apply_observable, commutator_residual, fourier_multiply
from .errors import ConfigurationError
from .potentials import ZeroV

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class FSpec:
    """Gauge function F, split into a position part and a momentum part.

    ``pos_part`` is a base function G1 evaluated at (x1 - a1 chi1, x2 - a2 chi2).
    ``mom_part`` is a polynomial G2 of (p1 - a1 pi1, p2 - a2 pi2), given as
    ``((m, n, c), ...)`` with m + n <= 2; since p_j - a_j pi_j = -i hbar d/dchi_j
    its symbol is G2(hbar k_chi1, hbar k_chi2).
    """

    pos_part: object = None
    mom_part: tuple = ()

    def __post_init__(self):
        mom = self.mom_part or ()
        if isinstance(mom, dict):
            mom = tuple((int(m), int(n), float(c)) for (m, n), c in sorted(mom.items()))
        mom = tuple((int(m), int(n), float(c)) for m, n, c in mom)
        for m, n, _ in mom:
            if m < 0 or n < 0 or m + n > 2:
                raise ConfigurationError("F momentum part is limited to degree 2", key="F")
        object.__setattr__(self, "mom_part", mom)

    @property
    def is_zero(self):
        return self.pos_part is None and not self.mom_part


# --- generator variants -----------------------------------------------------

@dataclass(frozen=True)
class NonInteracting:
    algebra: object
    v1: object = ZeroV()
    v2: object = ZeroV()
    F: FSpec = field(default_factory=FSpec)


@dataclass(frozen=True)
class GeneralIAS:
    """Both subsystems with a_j != 0 and a single-alpha interaction (the delta choice).

    The interaction enters as (1/a) W(x1 + (a - a1) chi1, x2 + (a - a2) chi2)
    with ``a`` the alpha of the single term of ``w``.
    """

    algebra: object
    v1: object
    v2: object
    w: object
    F: FSpec = field(default_factory=FSpec)


@dataclass(frozen=True)
class GradientCoupledIAS:
    """Interaction d1W(u) chi1 + d2W(u) chi2 with u = (x1 - a1 chi1, x2 - a2 chi2)."""

    algebra: object
    v1: object
    v2: object
    base: object
    F: FSpec = field(default_factory=FSpec)


@dataclass(frozen=True)
class HybridFiniteA:
    """Classical subsystem 1, quantum subsystem 2, interaction (1/a) W(x1 + a chi1, x2 + (a-1) chi2)."""

    algebra: object
    v1: object
    v2: object
    w: object
    F: FSpec = field(default_factory=FSpec)


@dataclass(frozen=True)
class ClassicalClassical:
    algebra: object
    v1: object
    v2: object = ZeroV()
    base: object = None
    F: FSpec = field(default_factory=FSpec)


@dataclass(frozen=True)
class SpecialDecoupledHybrid:
    """Hybrid whose interaction is d1W(x1, x2 - chi2) chi1 + d2W(x1, x2 - chi2) chi2."""

    algebra: object
    v1: object
    v2: object
    base: object
    F: FSpec = field(default_factory=FSpec)


VARIANTS = {
    "NonInteracting": NonInteracting,
    "GeneralIAS": GeneralIAS,
    "GradientCoupledIAS": GradientCoupledIAS,
    "HybridFiniteA": HybridFiniteA,
    "ClassicalClassical": ClassicalClassical,
    "SpecialDecoupledHybrid": SpecialDecoupledHybrid,
}


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """Generator H = v_phase (position-diagonal) + t_symbol (Fourier-diagonal).

    ``terms`` keeps the named pieces of both fields, ``forces`` holds
    V_j'(x_j) + dW/dx_j per active subsystem, evaluated independently of
    ``v_phase``.
    """

    grid: object
    algebra: object
    v_phase: np.ndarray
    t_symbol: np.ndarray
    forces: dict
    terms: dict
    spec: object = None

    def apply(self, state):
        amps = state.amplitudes
        return State(state.grid, self.v_phase * amps + fourier_multiply(self.grid, amps, self.t_symbol))

    def apply_term(self, name):
        field_, fourier = self.terms[name]

        def op(state):
            if fourier:
                return State(state.grid, fourier_multiply(self.grid, state.amplitudes, field_))
            return State(state.grid, field_ * state.amplitudes)
        return op


def _check_single_alpha(w, name):
    if w is None or len(w.terms) != 1:
        raise ConfigurationError(f"{name} needs a single-term W (one alpha)", key="W")
    return w.terms[0][0]


def validate_spec(spec, grid=None):
    """Reject parameter regimes where a variant's formula is singular or undefined."""
    alg = spec.algebra
    if isinstance(spec, GeneralIAS):
        for j in (1, 2):
            if alg.a(j) == 0:
                raise ConfigurationError(
                    f"GeneralIAS needs a{j} != 0: the 1/a{j} kinetic and potential terms are singular",
                    key=f"a{j}")
        if _check_single_alpha(spec.w, "GeneralIAS") == 0:
            raise ConfigurationError("GeneralIAS needs alpha != 0: the 1/a interaction prefactor is singular",
                                     key="alpha")
    elif isinstance(spec, HybridFiniteA):
        if (alg.a1, alg.a2) != (0, 1):
            raise ConfigurationError("HybridFiniteA requires a1 = 0, a2 = 1", key="a1")
        if _check_single_alpha(spec.w, "HybridFiniteA") == 0:
            raise ConfigurationError(
                "HybridFiniteA needs a != 0: the 1/a interaction prefactor is singular", key="alpha")
    elif isinstance(spec, ClassicalClassical):
        if (alg.a1, alg.a2) != (0, 0):
            raise ConfigurationError("ClassicalClassical requires a1 = a2 = 0", key="a1")
    elif isinstance(spec, SpecialDecoupledHybrid):
        if (alg.a1, alg.a2) != (0, 1):
            raise ConfigurationError("SpecialDecoupledHybrid requires a1 = 0, a2 = 1", key="a1")
    elif not isinstance(spec, (NonInteracting, GradientCoupledIAS)):
        raise ConfigurationError(f"unknown generator variant {type(spec).__name__}")
    if grid is not None and 2 not in grid.subsystems and _interaction_of(spec) is not None:
        raise ConfigurationError("an interaction needs both subsystems on the grid", key="grid")


def _interaction_of(spec):
    if isinstance(spec, (GeneralIAS, HybridFiniteA)):
        return spec.w
    return getattr(spec, "base", None)


def _subsystem_terms(grid, algebra, j, V):
    """Kinetic symbol and potential field of subsystem j.

    a_j == 0 is matched exactly and selects the classical pair
    p pi / m + V'(x) chi; otherwise (p^2 / 2m + V(x)) / a_j.
    """
    a, m, hbar = algebra.a(j), algebra.m(j), algebra.hbar
    x_name, chi_name = grid.subsystem_axes(j)
    kx, kchi = grid.k(x_name), grid.k(chi_name)
    x, chi = grid.coord(x_name), grid.coord(chi_name)
    if a == 0:
        return hbar ** 2 * kx * kchi / m, V.deriv(x) * chi
    return hbar ** 2 * (a * kx + kchi) ** 2 / (2 * m * a), V.value(x) / a


def f_gauge_terms(F, grid, algebra):
    """Position field G1(x1 - a1 chi1, x2 - a2 chi2) and symbol G2(hbar k_chi1, hbar k_chi2)."""
    if F is None:
        F = FSpec()
    pos = np.zeros(1)
    sym = np.zeros(1)
    full = 2 in grid.subsystems
    if F.pos_part is not None:
        u1 = grid.coord("x1") - algebra.a1 * grid.coord("chi1")
        u2 = grid.coord("x2") - algebra.a2 * grid.coord("chi2") if full else 0.0
        pos = F.pos_part.value(u1, u2)
    if F.mom_part:
        s1 = algebra.hbar * grid.k("chi1")
        s2 = algebra.hbar * grid.k("chi2") if full else 0.0
        total = 0.0
        for m, n, c in F.mom_part:
            total = total + c * s1 ** m * s2 ** n
        sym = total + 0.0 * s1
    return np.asarray(pos, dtype=float), np.asarray(sym, dtype=float)


def _interaction_terms(spec, grid):
    """Position field of the interaction and the force fields dW/dx_j."""
    alg = spec.algebra
    inter = _interaction_of(spec)
    if inter is None:
        return None, (0.0, 0.0)
    x1, chi1 = grid.coord("x1"), grid.coord("chi1")
    x2, chi2 = grid.coord("x2"), grid.coord("chi2")
    if isinstance(spec, (GeneralIAS, HybridFiniteA)):
        a = spec.w.terms[0][0]
        field_ = spec.w.value(alg, x1, chi1, x2, chi2) / a
        return field_, spec.w.grad_x(alg, x1, chi1, x2, chi2)
    # gradient-coupled forms: GradientCoupledIAS, ClassicalClassical, SpecialDecoupledHybrid
    u1 = x1 - alg.a1 * chi1
    u2 = x2 - alg.a2 * chi2
    d1, d2 = inter.partials(u1, u2)
    return d1 * chi1 + d2 * chi2, (d1, d2)


def _assemble(grid, algebra, v1, v2, F, interaction, spec):
    terms = {}
    forces = {}
    for j, V in zip(grid.subsystems, (v1, v2)):
        t, v = _subsystem_terms(grid, algebra, j, V)
        terms[f"kinetic{j}"] = (t, True)
        terms[f"potential{j}"] = (v, False)
        forces[j] = V.deriv(grid.coord(f"x{j}"))
    field_, grads = interaction if interaction is not None else (None, (0.0, 0.0))
    if field_ is not None:
        terms["interaction"] = (field_, False)
        for j in (1, 2):
            forces[j] = forces[j] + grads[j - 1]
    f_pos, f_sym = f_gauge_terms(F, grid, algebra)
    if F is not None and F.pos_part is not None:
        terms["F_pos"] = (f_pos, False)
    if F is not None and F.mom_part:
        terms["F_mom"] = (f_sym, True)

    v_phase = np.zeros(grid.shape)
    t_symbol = np.zeros(grid.shape)
    for arr, fourier in terms.values():
        if fourier:
            t_symbol = t_symbol + arr
        else:
            v_phase = v_phase + arr
    for name, arr in (("v_phase", v_phase), ("t_symbol", t_symbol)):
        if np.iscomplexobj(arr):
            if np.max(np.abs(arr.imag)) > HERMITICITY_TOL:
                raise ConfigurationError(f"{name} is not real: generator would not be Hermitian")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError(f"{name} is not finite on the grid")
    forces = {j: np.broadcast_to(np.asarray(f, dtype=float), grid.shape) for j, f in forces.items()}
    return SplitPlan(grid, algebra, np.ascontiguousarray(v_phase.real),
                     np.ascontiguousarray(t_symbol.real), forces, terms, spec)


def build_plan(spec, grid):
    """Compile a generator variant into position and Fourier tables on ``grid``."""
    validate_spec(spec, grid)
    interaction = _interaction_terms(spec, grid) if _interaction_of(spec) is not None else None
    v2 = spec.v2 if 2 in grid.subsystems else None
    return _assemble(grid, spec.algebra, spec.v1, v2, spec.F, interaction, spec)


def build_forced_plan(spec, grid, raw_w):
    """Plan of ``spec`` with its interaction replaced by a raw position-diagonal W.

    Control case for the residual checks: an inadmissible W inserted this
    way cannot satisfy the defining relations.
    """
    alg = spec.algebra
    x1, chi1 = grid.coord("x1"), grid.coord("chi1")
    x2, chi2 = grid.coord("x2"), grid.coord("chi2")
    field_ = raw_w.value(alg, x1, chi1, x2, chi2)
    grads = raw_w.grad_x(alg, x1, chi1, x2, chi2)
    return _assemble(grid, alg, spec.v1, spec.v2, spec.F, (field_, grads), spec)


RESIDUAL_KEYS = (("x", 1), ("p", 1), ("x", 2), ("p", 2))


def plan_residuals(plan, test_states):
    """Max residual of each defining relation over the test states."""
    alg = plan.algebra
    grid = plan.grid
    out = {}
    for kind, j in RESIDUAL_KEYS:
        if j not in grid.subsystems:
            continue
        worst = 0.0
        for state in test_states:
            if kind == "x":
                obs = ObservableId[f"X{j}"]
                p = ObservableId[f"P{j}"]

                def rhs(s, p=p, m=alg.m(j)):
                    return apply_observable(s, p, alg) * (1 / m)
            else:
                obs = ObservableId[f"P{j}"]
                force = plan.forces[j]

                def rhs(s, force=force):
                    return State(s.grid, -force * s.amplitudes)
            worst = max(worst, float(commutator_residual(state, plan.apply, obs, rhs, alg)))
        out[(kind, j)] = worst
    return out


def pde_residuals(spec, grid, test_states):
    return plan_residuals(build_plan(spec, grid), test_states)


def commutes_with(op, obs, test_states, algebra):
    """Largest ||[O, op] psi|| / hbar over the test states (RHS = 0)."""
    zero = lambda s: s * 0.0  # noqa: E731
    return max(float(commutator_residual(s, op, obs, zero, algebra)) for s in test_states)
