"""Grid-free reference solutions.

Nothing here touches the grid or the propagator; the only shared inputs
are configuration values (generator variant, potentials, initial means).
"""
import numpy as np
import scipy.linalg
import sympy as sp

from . import generator as gen
from . import potentials as pot
from .errors import ConfigurationError

SYMBOL_NAMES = ("x1", "p1", "chi1", "pi1", "x2", "p2", "chi2", "pi2")


def commutator_matrix(algebra, n_sub=2):
    """C with [z_i, z_j] = i hbar C_ij for z = (x, p, chi, pi) per subsystem."""
    C = np.zeros((4 * n_sub, 4 * n_sub))
    for s in range(n_sub):
        x, p, chi, pi = 4 * s, 4 * s + 1, 4 * s + 2, 4 * s + 3
        for i, j, c in ((x, p, algebra.a(s + 1)), (x, pi, 1.0), (chi, p, 1.0)):
            C[i, j] = c
            C[j, i] = -c
    return C


def _sym_V(V, x):
    if isinstance(V, pot.ZeroV):
        return sp.Integer(0)
    if isinstance(V, pot.Harmonic):
        return sp.Rational(1, 2) * sp.nsimplify(V.k) * (x - sp.nsimplify(V.center)) ** 2
    if isinstance(V, pot.Quartic) and V.lam == 0:
        return sp.Rational(1, 2) * sp.nsimplify(V.k) * x ** 2
    raise ConfigurationError(f"linear oracle refuses nonlinear potential {V!r}")


def _sym_base(base, u1, u2):
    if base is None:
        return sp.Integer(0)
    if isinstance(base, pot.Bilinear):
        return sp.nsimplify(base.lam) * u1 * u2
    if isinstance(base, pot.PolynomialSum) and all(m + n <= 2 for m, n, _ in base.coefficients):
        return sum((sp.nsimplify(c) * u1 ** m * u2 ** n for m, n, c in base.coefficients), sp.Integer(0))
    raise ConfigurationError(f"linear oracle refuses nonlinear interaction {base!r}")


def symbolic_generator(spec, n_sub=2):
    """The generator as a polynomial in the commuting-per-term symbols."""
    z = sp.symbols(SYMBOL_NAMES[: 4 * n_sub], real=True)
    alg = spec.algebra
    H = sp.Integer(0)
    Vs = (spec.v1, spec.v2)
    for s in range(n_sub):
        x, p, chi, pi = z[4 * s: 4 * s + 4]
        a, m = sp.nsimplify(alg.a(s + 1)), sp.nsimplify(alg.m(s + 1))
        V = _sym_V(Vs[s], x)
        if a == 0:
            H += p * pi / m + sp.diff(V, x) * chi
        else:
            H += (p ** 2 / (2 * m) + V) / a
    if n_sub == 2:
        x1, p1, chi1, pi1, x2, p2, chi2, pi2 = z
        a1, a2 = sp.nsimplify(alg.a1), sp.nsimplify(alg.a2)
        if isinstance(spec, (gen.GeneralIAS, gen.HybridFiniteA)):
            for alpha, base in spec.w.terms:
                al = sp.nsimplify(alpha)
                H += _sym_base(base, x1 + (al - a1) * chi1, x2 + (al - a2) * chi2) / al
        elif getattr(spec, "base", None) is not None:
            u1, u2 = sp.symbols("u1 u2", real=True)
            Wb = _sym_base(spec.base, u1, u2)
            sub = {u1: x1 - a1 * chi1, u2: x2 - a2 * chi2}
            H += sp.diff(Wb, u1).subs(sub) * chi1 + sp.diff(Wb, u2).subs(sub) * chi2
    F = spec.F
    if F is not None and not F.is_zero:
        x1, p1, chi1, pi1 = z[:4]
        a1 = sp.nsimplify(alg.a1)
        u1, w1 = x1 - a1 * chi1, p1 - a1 * pi1
        if n_sub == 2:
            x2, p2, chi2, pi2 = z[4:]
            a2 = sp.nsimplify(alg.a2)
            u2, w2 = x2 - a2 * chi2, p2 - a2 * pi2
        else:
            u2 = w2 = sp.Integer(0)
        if F.pos_part is not None:
            H += _sym_base(F.pos_part, u1, u2)
        for m_, n_, c in F.mom_part:
            H += sp.nsimplify(c) * w1 ** m_ * w2 ** n_
    return sp.expand(H), z


def linear_system(spec, n_sub=2):
    """(A, c) with d<z>/dt = A <z> + c, exact for generators quadratic in z."""
    H, z = symbolic_generator(spec, n_sub)
    poly = sp.Poly(H, *z)
    if poly.total_degree() > 2:
        raise ConfigurationError("linear oracle needs a generator at most quadratic in the basic variables")
    grad = [sp.diff(H, v) for v in z]
    M = np.array([[float(sp.diff(g, v)) for v in z] for g in grad])
    b = np.array([float(g.subs({v: 0 for v in z})) for g in grad])
    C = commutator_matrix(spec.algebra, n_sub)
    return C @ M, C @ b


def linear_moment_oracle(spec, z0, times, n_sub=2):
    """Means of (x, p, chi, pi) per subsystem at ``times`` by matrix exponential.

    Returns an array of shape (len(times), 4 * n_sub), columns ordered as
    ``SYMBOL_NAMES``.
    """
    A, c = linear_system(spec, n_sub)
    n = A.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = A
    aug[:n, n] = c
    start = np.append(np.asarray(z0, dtype=float), 1.0)
    return np.array([(scipy.linalg.expm(aug * t) @ start)[:n] for t in times])


def rk4_characteristics(force, m, x0, p0, t_end, dt=1e-3, record=()):
    """Integrate dx/dt = p/m, dp/dt = -force(x) for an ensemble with classical RK4.

    ``force`` maps an (N, d) position array to forces of the same shape.
    Returns ``{t: (x, p)}`` at the requested record times.
    """
    x = np.array(x0, dtype=float)
    p = np.array(p0, dtype=float)
    m = np.asarray(m, dtype=float)
    n_steps = int(round(t_end / dt))
    marks = {int(round(t / dt)): t for t in record}
    out = {}
    if 0 in marks:
        out[marks[0]] = (x.copy(), p.copy())
    for i in range(1, n_steps + 1):
        k1x, k1p = p / m, -force(x)
        k2x, k2p = (p + 0.5 * dt * k1p) / m, -force(x + 0.5 * dt * k1x)
        k3x, k3p = (p + 0.5 * dt * k2p) / m, -force(x + 0.5 * dt * k2x)
        k4x, k4p = (p + dt * k3p) / m, -force(x + dt * k3x)
        x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if i in marks:
            out[marks[i]] = (x.copy(), p.copy())
    return out
