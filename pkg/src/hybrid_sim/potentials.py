"""Subsystem potentials V_j, interaction potentials W and their admissibility.

An interaction potential W(x1, chi1, x2, chi2) can appear in a unitary
generator only if

    (a1 d/dx1 + d/dchi1) dW/dx2 - (a2 d/dx2 + d/dchi2) dW/dx1 = 0.

Every finite sum of base functions evaluated at the shifted arguments
``(x1 + (alpha - a1) chi1, x2 + (alpha - a2) chi2)`` satisfies this
identically, since both directional derivatives reduce to ``alpha`` times
the mixed partial of the base function. ``WSpec`` is that family with a
discrete set of alphas.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ConfigurationError, NumericalDomainError

FD_REL_STEP = 3e-4
ADMISSIBLE_TOL = 1e-6
N_ADMISSIBILITY_POINTS = 64


# --- subsystem potentials ---------------------------------------------------

@dataclass(frozen=True)
class ZeroV:
    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Harmonic:
    """V = k (x - center)^2 / 2."""

    k: float
    center: float = 0.0

    def value(self, x):
        return 0.5 * self.k * (x - self.center) ** 2

    def deriv(self, x):
        return self.k * (x - self.center)


@dataclass(frozen=True)
class Quartic:
    """V = k x^2 / 2 + lam x^4."""

    k: float
    lam: float

    def value(self, x):
        return 0.5 * self.k * x ** 2 + self.lam * x ** 4

    def deriv(self, x):
        return self.k * x + 4 * self.lam * x ** 3


@dataclass(frozen=True)
class Cosine:
    """Pendulum potential V = A (1 - cos(kappa x))."""

    A: float
    kappa: float

    def value(self, x):
        return self.A * (1 - np.cos(self.kappa * x))

    def deriv(self, x):
        return self.A * self.kappa * np.sin(self.kappa * x)


# --- base interaction functions ---------------------------------------------

@dataclass(frozen=True)
class Bilinear:
    """W(u1, u2) = lam u1 u2."""

    lam: float

    def value(self, u1, u2):
        return self.lam * u1 * u2

    def partials(self, u1, u2):
        u1, u2 = np.broadcast_arrays(u1, u2)
        return self.lam * u2, self.lam * u1


@dataclass(frozen=True)
class GaussianWell:
    """W(u1, u2) = -lam exp(-((u1 - c1)^2 + (u2 - c2)^2) / (2 sigma^2))."""

    lam: float
    sigma: float
    c1: float = 0.0
    c2: float = 0.0

    def value(self, u1, u2):
        return -self.lam * np.exp(-((u1 - self.c1) ** 2 + (u2 - self.c2) ** 2)
                                  / (2 * self.sigma ** 2))

    def partials(self, u1, u2):
        w = self.value(u1, u2)
        s2 = self.sigma ** 2
        return -(u1 - self.c1) / s2 * w, -(u2 - self.c2) / s2 * w


@dataclass(frozen=True)
class PolynomialSum:
    """W(u1, u2) = sum of c * u1^m * u2^n over ``coefficients[(m, n)] = c``, m + n <= 4."""

    coefficients: tuple  # ((m, n, c), ...)

    def __post_init__(self):
        coeffs = self.coefficients
        if isinstance(coeffs, dict):
            coeffs = tuple((int(m), int(n), float(c)) for (m, n), c in sorted(coeffs.items()))
        for m, n, _ in coeffs:
            if m < 0 or n < 0 or m + n > 4:
                raise ConfigurationError(f"monomial u1^{m} u2^{n} exceeds degree 4")
        object.__setattr__(self, "coefficients", tuple(coeffs))

    def value(self, u1, u2):
        total = 0.0
        for m, n, c in self.coefficients:
            total = total + c * u1 ** m * u2 ** n
        return total + 0.0 * (u1 + u2)

    def partials(self, u1, u2):
        d1 = 0.0 * (u1 + u2)
        d2 = 0.0 * (u1 + u2)
        for m, n, c in self.coefficients:
            if m:
                d1 = d1 + c * m * u1 ** (m - 1) * u2 ** n
            if n:
                d2 = d2 + c * n * u1 ** m * u2 ** (n - 1)
        return d1, d2


# --- interaction potentials -------------------------------------------------

@dataclass(frozen=True)
class WSpec:
    """Finite member of the admissible family: sum over ``(alpha, base)`` terms."""

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(alpha), base) for alpha, base in self.terms))

    @classmethod
    def single(cls, alpha, base):
        return cls(((alpha, base),))

    @staticmethod
    def shifted(alpha, algebra, x1, chi1, x2, chi2):
        return x1 + (alpha - algebra.a1) * chi1, x2 + (alpha - algebra.a2) * chi2

    def value(self, algebra, x1, chi1, x2, chi2):
        total = 0.0 * (x1 + chi1 + x2 + chi2)
        for alpha, base in self.terms:
            total = total + base.value(*self.shifted(alpha, algebra, x1, chi1, x2, chi2))
        return total

    def grad_x(self, algebra, x1, chi1, x2, chi2):
        zero = 0.0 * (x1 + chi1 + x2 + chi2)
        g1, g2 = zero, zero
        for alpha, base in self.terms:
            d1, d2 = base.partials(*self.shifted(alpha, algebra, x1, chi1, x2, chi2))
            g1 = g1 + d1
            g2 = g2 + d2
        return g1, g2


def _fd_step(coord):
    return FD_REL_STEP * (1 + np.abs(coord))


def _richardson(central, h):
    """Fourth-order estimate from centered differences at h and h/2."""
    return (4 * central(h / 2) - central(h)) / 3


class RawW:
    """Arbitrary candidate interaction W(x1, chi1, x2, chi2).

    ``grad_x`` may supply the analytic pair (dW/dx1, dW/dx2); without it
    centered finite differences are used.
    """

    def __init__(self, func, grad_x=None):
        self.func = func
        self._grad_x = grad_x

    def value(self, algebra, x1, chi1, x2, chi2):
        return self.func(x1, chi1, x2, chi2)

    def grad_x(self, algebra, x1, chi1, x2, chi2):
        if self._grad_x is not None:
            return self._grad_x(x1, chi1, x2, chi2)
        f = self.func
        d1 = _richardson(lambda h: (f(x1 + h, chi1, x2, chi2) - f(x1 - h, chi1, x2, chi2)) / (2 * h), _fd_step(x1))
        d2 = _richardson(lambda h: (f(x1, chi1, x2 + h, chi2) - f(x1, chi1, x2 - h, chi2)) / (2 * h), _fd_step(x2))
        return d1, d2


class PolynomialRawW(RawW):
    """Polynomial in (x1, chi1, x2, chi2) with exact first partials.

    ``monomials`` maps exponent tuples ``(e_x1, e_chi1, e_x2, e_chi2)`` to
    coefficients; total degree is capped at 4.
    """

    def __init__(self, monomials):
        self.monomials = {tuple(int(e) for e in exps): float(c) for exps, c in monomials.items()}
        for exps in self.monomials:
            if len(exps) != 4 or min(exps) < 0 or sum(exps) > 4:
                raise ConfigurationError(f"invalid monomial exponents {exps}", key="W")
        super().__init__(self._eval, self._grad)

    def _eval(self, *v):
        total = 0.0 * sum(v)
        for exps, c in self.monomials.items():
            term = c
            for value, e in zip(v, exps):
                term = term * value ** e
            total = total + term
        return total

    def _partial(self, v, axis):
        total = 0.0 * sum(v)
        for exps, c in self.monomials.items():
            if exps[axis] == 0:
                continue
            term = c * exps[axis]
            for i, (value, e) in enumerate(zip(v, exps)):
                term = term * value ** (e - 1 if i == axis else e)
            total = total + term
        return total

    def _grad(self, *v):
        return self._partial(v, 0), self._partial(v, 2)


def eval_W(w, algebra, point):
    return float(w.value(algebra, *point))


def grad_W_x(w, algebra, point):
    g1, g2 = w.grad_x(algebra, *point)
    return float(g1), float(g2)


def consistency_residual(w, algebra, sample_points):
    """Largest |(a1 d1 + dchi1) dW/dx2 - (a2 d2 + dchi2) dW/dx1| over the samples.

    The directional derivatives of the x-gradient are Richardson-extrapolated
    centered differences along (x1, chi1) = (a1, 1) and (x2, chi2) = (a2, 1).
    """
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    x1, chi1, x2, chi2 = pts.T
    h1 = _fd_step(np.maximum(np.abs(x1), np.abs(chi1)))
    h2 = _fd_step(np.maximum(np.abs(x2), np.abs(chi2)))
    a1, a2 = algebra.a1, algebra.a2
    d1_of_g2 = _richardson(lambda h: (w.grad_x(algebra, x1 + a1 * h, chi1 + h, x2, chi2)[1]
                                      - w.grad_x(algebra, x1 - a1 * h, chi1 - h, x2, chi2)[1]) / (2 * h), h1)
    d2_of_g1 = _richardson(lambda h: (w.grad_x(algebra, x1, chi1, x2 + a2 * h, chi2 + h)[0]
                                      - w.grad_x(algebra, x1, chi1, x2 - a2 * h, chi2 - h)[0]) / (2 * h), h2)
    residual = np.broadcast_to(d1_of_g2 - d2_of_g1, x1.shape)
    bad = ~np.isfinite(residual)
    if bad.any():
        raise NumericalDomainError(f"non-finite derivative at point {tuple(pts[np.argmax(bad)])}")
    return float(np.max(np.abs(residual))) if residual.size else 0.0


def sample_points(bounds=((-10.0, 10.0),) * 4, n=N_ADMISSIBILITY_POINTS, seed=0):
    """Deterministic scrambled-Sobol points in a box over (x1, chi1, x2, chi2)."""
    m = max(6, math.ceil(math.log2(n)))
    unit = qmc.Sobol(d=4, scramble=True, seed=seed).random_base2(m)[:n]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return lo + unit * (hi - lo)


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    residual: float
    witness: tuple = None

    def __bool__(self):
        return self.admissible


def admissible_projection_exists(w, algebra, bounds=((-10.0, 10.0),) * 4,
                                 n_points=N_ADMISSIBILITY_POINTS, tol=ADMISSIBLE_TOL):
    """Decide admissibility of ``w`` on a deterministic low-discrepancy sample.

    Returns a falsy Verdict with the worst point as witness when the
    consistency residual reaches ``tol`` there.
    """
    pts = sample_points(bounds, n_points)
    residuals = np.array([consistency_residual(w, algebra, p[None, :]) for p in pts])
    worst = int(np.argmax(residuals))
    if residuals[worst] < tol:
        return Verdict(True, float(residuals[worst]))
    return Verdict(False, float(residuals[worst]), tuple(float(v) for v in pts[worst]))
