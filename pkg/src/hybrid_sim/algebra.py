"""Coordinate representation of the extended operator algebra.

Each subsystem ``j`` lives on two grid axes, ``xj`` and ``chij``. On those
axes the basic variables act as

    x_j   : multiplication by x_j
    chi_j : multiplication by chi_j
    pi_j  : -i hbar d/dx_j                     (Fourier symbol hbar k_x)
    p_j   : -i hbar (a_j d/dx_j + d/dchi_j)    (Fourier symbol hbar (a_j k_x + k_chi))

which gives [x_j, p_j] = i hbar a_j, [x_j, pi_j] = [chi_j, p_j] = i hbar and
makes every other pair commute, for any value of a_j on the same grid.
"""
import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _fft
from .errors import ConfigurationError, NumericalDomainError, StaleStateError

AXIS_NAMES = ("x1", "chi1", "x2", "chi2")
SUBSYSTEM_AXES = {1: ("x1", "chi1"), 2: ("x2", "chi2")}

NORM_TOL = 1e-6


@dataclass(frozen=True)
class AlgebraParams:
    """Interpolation parameters, hbar and masses.

    ``a_j == 0`` selects a classical subsystem and ``a_j == 1`` a quantum one.
    """

    a1: float
    a2: float
    hbar: float = 1.0
    m1: float = 1.0
    m2: float = 1.0

    def __post_init__(self):
        for name in ("a1", "a2", "hbar", "m1", "m2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value}", key=name)
        for name in ("hbar", "m1", "m2"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive", key=name)

    def a(self, j):
        return self.a1 if j == 1 else self.a2

    def m(self, j):
        return self.m1 if j == 1 else self.m2


@dataclass(frozen=True)
class Axis:
    """Uniform periodic axis with ``n`` points on ``[c - L/2, c + L/2)``."""

    n: int
    L: float
    c: float = 0.0

    @property
    def spacing(self):
        return self.L / self.n

    @property
    def coords(self):
        return self.c - self.L / 2 + self.spacing * np.arange(self.n)

    @property
    def wavenumbers(self):
        # standard DFT layout: 0, 1, ..., n/2 - 1, -n/2, ..., -1 (times 2 pi / L)
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @property
    def bounds(self):
        return self.c - self.L / 2, self.c + self.L / 2


def _check_axis(name, axis):
    n = axis.n
    if not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
        raise ConfigurationError(
            f"axis {name}: point count must be a power of two >= 2, got {n}", key=name)
    if not (math.isfinite(axis.L) and axis.L > 0):
        raise ConfigurationError(f"axis {name}: length must be positive, got {axis.L}", key=name)
    if not math.isfinite(axis.c):
        raise ConfigurationError(f"axis {name}: center must be finite", key=name)


@dataclass(frozen=True)
class Grid:
    """Tensor-product grid over the active axes, in ``AXIS_NAMES`` order."""

    axes: tuple  # ((name, Axis), ...)

    @functools.cached_property
    def _lookup(self):
        return dict(self.axes)

    @property
    def names(self):
        return tuple(name for name, _ in self.axes)

    @property
    def shape(self):
        return tuple(axis.n for _, axis in self.axes)

    @property
    def ndim(self):
        return len(self.axes)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def subsystems(self):
        return tuple(j for j in (1, 2) if SUBSYSTEM_AXES[j][0] in self._lookup)

    @property
    def cell_volume(self):
        return float(np.prod([axis.spacing for _, axis in self.axes]))

    def has(self, name):
        return name in self._lookup

    def axis(self, name):
        try:
            return self._lookup[name]
        except KeyError:
            raise ConfigurationError(f"axis {name} is not active on this grid", key=name) from None

    def index(self, name):
        return self.names.index(name)

    def _broadcast(self, name, values):
        shape = [1] * self.ndim
        shape[self.index(name)] = values.size
        return values.reshape(shape)

    @functools.lru_cache(maxsize=None)
    def coord(self, name):
        """Coordinates of one axis, shaped to broadcast against the grid."""
        return self._broadcast(name, self.axis(name).coords)

    @functools.lru_cache(maxsize=None)
    def k(self, name):
        """Wavenumbers of one axis, shaped to broadcast against the Fourier grid."""
        return self._broadcast(name, self.axis(name).wavenumbers)

    def subsystem_axes(self, j):
        if j not in self.subsystems:
            raise ConfigurationError(f"subsystem {j} is not active on this grid")
        return SUBSYSTEM_AXES[j]


def make_grid(axes):
    """Build a grid from ``{axis_name: (n, L, c)}``.

    Either all four axes or only the subsystem-1 pair ``x1, chi1`` may be
    given; the latter is a reduced grid for single-system runs.
    """
    parsed = {}
    for name, desc in axes.items():
        if name not in AXIS_NAMES:
            raise ConfigurationError(f"unknown axis {name!r}", key=name)
        if isinstance(desc, Axis):
            axis = desc
        elif isinstance(desc, dict):
            axis = Axis(desc["n"], float(desc["L"]), float(desc.get("c", 0.0)))
        else:
            n, L, *rest = desc
            axis = Axis(n, float(L), float(rest[0]) if rest else 0.0)
        _check_axis(name, axis)
        parsed[name] = axis
    active = set(parsed)
    if active not in ({"x1", "chi1"}, set(AXIS_NAMES)):
        raise ConfigurationError(
            f"active axes must be all of {AXIS_NAMES} or just (x1, chi1), got {sorted(active)}")
    return Grid(tuple((name, parsed[name]) for name in AXIS_NAMES if name in parsed))


def default_grid(n=32, L=20.0, reduced=False):
    names = SUBSYSTEM_AXES[1] if reduced else AXIS_NAMES
    return make_grid({name: (n, L, 0.0) for name in names})


def edge_density_of(rho):
    peak = rho.max()
    if peak == 0:
        return 0.0
    edge = 0.0
    for ax in range(rho.ndim):
        edge = max(edge, np.take(rho, 0, axis=ax).max(), np.take(rho, -1, axis=ax).max())
    return float(edge / peak)


@dataclass(frozen=True, eq=False)
class State:
    """Complex amplitude field on a grid. Immutable; operations return new states."""

    grid: Grid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != self.grid.shape:
            amps = amps.reshape(self.grid.shape)
        if amps.flags.writeable:
            amps = amps.copy()
            amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self):
        return math.sqrt(float(np.vdot(self.amplitudes, self.amplitudes).real) * self.grid.cell_volume)

    def normalized(self):
        return State(self.grid, self.amplitudes / self.norm())

    def inner(self, other):
        """<self|other> with grid quadrature."""
        return complex(np.vdot(self.amplitudes, other.amplitudes)) * self.grid.cell_volume

    def density(self):
        return np.abs(self.amplitudes) ** 2

    def edge_density(self):
        """Largest |psi|^2 on any boundary face, relative to the peak |psi|^2."""
        return edge_density_of(self.density())

    def __add__(self, other):
        return State(self.grid, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        return State(self.grid, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar):
        return State(self.grid, self.amplitudes * scalar)

    __rmul__ = __mul__


class ObservableId(enum.Enum):
    X1 = ("x", 1)
    P1 = ("p", 1)
    CHI1 = ("chi", 1)
    PI1 = ("pi", 1)
    X2 = ("x", 2)
    P2 = ("p", 2)
    CHI2 = ("chi", 2)
    PI2 = ("pi", 2)
    X2_MINUS_CHI2 = ("x-chi", 2)

    @property
    def kind(self):
        return self.value[0]

    @property
    def subsystem(self):
        return self.value[1]

    @property
    def is_position_diagonal(self):
        return self.kind in ("x", "chi", "x-chi")

    @classmethod
    def parse(cls, text):
        try:
            return cls[text.upper()]
        except KeyError:
            raise ConfigurationError(f"unknown observable {text!r}", key="observables") from None


BASIC_OBSERVABLES = (ObservableId.X1, ObservableId.P1, ObservableId.CHI1, ObservableId.PI1,
                     ObservableId.X2, ObservableId.P2, ObservableId.CHI2, ObservableId.PI2)


def observable_field(grid, obs):
    """Position-space multiplier of a position-diagonal observable."""
    j = obs.subsystem
    x_name, chi_name = grid.subsystem_axes(j)
    if obs.kind == "x":
        return grid.coord(x_name)
    if obs.kind == "chi":
        return grid.coord(chi_name)
    if obs.kind == "x-chi":
        return grid.coord(x_name) - grid.coord(chi_name)
    raise ValueError(f"{obs} is not position-diagonal")


def observable_symbol(grid, obs, algebra):
    """Fourier symbol of a derivative observable (p_j or pi_j)."""
    j = obs.subsystem
    x_name, chi_name = grid.subsystem_axes(j)
    if obs.kind == "pi":
        return algebra.hbar * grid.k(x_name)
    if obs.kind == "p":
        return algebra.hbar * (algebra.a(j) * grid.k(x_name) + grid.k(chi_name))
    raise ValueError(f"{obs} is not a derivative operator")


def _check_finite(grid, values, what):
    values = np.asarray(values)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.unravel_index(np.argmax(np.broadcast_to(bad, grid.shape)), grid.shape)
        where = {name: float(axis.coords[i]) for (name, axis), i in zip(grid.axes, idx)}
        raise NumericalDomainError(f"non-finite {what} at {where}")


def _symbol_axes(grid, symbol):
    """Axes along which a broadcastable symbol actually varies."""
    symbol = np.asarray(symbol)
    if symbol.ndim == 0:
        return ()
    return tuple(ax for ax in range(grid.ndim) if symbol.shape[ax] > 1)


def fourier_multiply(grid, amplitudes, symbol):
    """``IDFT(symbol * DFT(amplitudes))`` over the axes the symbol depends on."""
    axes = _symbol_axes(grid, symbol)
    if not axes:
        return amplitudes * symbol
    return _fft.ifftn(symbol * _fft.fftn(amplitudes, axes=axes), axes=axes)


def apply_position_diagonal(state, f):
    """Pointwise product ``f * psi``; ``f`` may be any array broadcasting to the grid."""
    f = np.asarray(f)
    _check_finite(state.grid, f, "position-diagonal field")
    return State(state.grid, f * state.amplitudes)


def apply_derivative_operator(state, symbol):
    """Apply a Fourier-diagonal operator given by its symbol on the wavenumber grid."""
    symbol = np.asarray(symbol)
    _check_finite(state.grid, symbol, "Fourier symbol")
    return State(state.grid, fourier_multiply(state.grid, state.amplitudes, symbol))


def apply_observable(state, obs, algebra):
    if obs.is_position_diagonal:
        return State(state.grid, observable_field(state.grid, obs) * state.amplitudes)
    return apply_derivative_operator(state, observable_symbol(state.grid, obs, algebra))


def expectation(state, obs, algebra):
    """<psi|O|psi> for a normalized state.

    Derivative observables are evaluated through Parseval's identity on the
    axes of their subsystem, which makes the result real by construction.
    """
    grid = state.grid
    norm = state.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise StaleStateError(f"state norm is {norm!r}; renormalize before taking expectations")
    if obs.is_position_diagonal:
        return float(np.sum(state.density() * observable_field(grid, obs)) * grid.cell_volume)
    symbol = observable_symbol(grid, obs, algebra)
    axes = _symbol_axes(grid, symbol)
    spectrum = np.abs(_fft.fftn(state.amplitudes, axes=axes)) ** 2
    n_transformed = np.prod([grid.shape[ax] for ax in axes])
    return float(np.sum(spectrum * symbol) * grid.cell_volume / n_transformed)


@dataclass(frozen=True)
class PacketSpec:
    """Per-subsystem Gaussian initial data.

    ``sigma_x`` and ``sigma_chi`` are standard deviations of |psi|^2.
    """

    x: float = 0.0
    p: float = 0.0
    chi: float = 0.0
    pi: float = 0.0
    sigma_x: float = 1.0
    sigma_chi: float = 1.0


MARGIN_SIGMAS = 4.0


def gaussian_state(grid, algebra, packets):
    """Normalized product of Gaussian packets, one per active subsystem.

    The phase wavenumbers are ``pi/hbar`` along x and ``(p - a pi)/hbar``
    along chi, so that <p_j> and <pi_j> hit their targets.
    """
    packets = tuple(packets)
    if len(packets) != len(grid.subsystems):
        raise ConfigurationError(
            f"need {len(grid.subsystems)} packet(s) for this grid, got {len(packets)}")
    log_amp = np.zeros(grid.shape)
    phase = np.zeros(grid.shape)
    for j, packet in zip(grid.subsystems, packets):
        a = algebra.a(j)
        x_name, chi_name = SUBSYSTEM_AXES[j]
        for name, center, sigma in ((x_name, packet.x, packet.sigma_x),
                                    (chi_name, packet.chi, packet.sigma_chi)):
            if not sigma > 0:
                raise ConfigurationError(f"{name}: width must be positive", key=name)
            lo, hi = grid.axis(name).bounds
            margin = MARGIN_SIGMAS * sigma
            if center - lo < margin or hi - center < margin:
                raise ConfigurationError(
                    f"{name}: center {center} violates the containment margin; "
                    f"need {margin:g} ({MARGIN_SIGMAS:g} sigma) to each boundary of [{lo}, {hi})",
                    key=name)
        x = grid.coord(x_name)
        chi = grid.coord(chi_name)
        log_amp = log_amp - (x - packet.x) ** 2 / (4 * packet.sigma_x ** 2) \
            - (chi - packet.chi) ** 2 / (4 * packet.sigma_chi ** 2)
        beta_x = packet.pi / algebra.hbar
        beta_chi = (packet.p - a * packet.pi) / algebra.hbar
        phase = phase + beta_x * (x - packet.x) + beta_chi * (chi - packet.chi)
    amps = np.exp(log_amp + 1j * phase)
    amps /= math.sqrt(float(np.sum(np.abs(amps) ** 2)) * grid.cell_volume)
    return State(grid, amps)


class Residual(float):
    """Nonnegative residual carrying the boundary-contact flag of its test state."""

    touches_boundary = False
    edge_density = 0.0


EDGE_TOL = 1e-12


def _as_operator(op, algebra):
    if isinstance(op, ObservableId):
        return lambda s: apply_observable(s, op, algebra)
    return op


def commutator_residual(state, H_apply, obs, rhs_apply, algebra):
    """Relative residual of ``(1/i hbar)[O, H] psi = RHS psi``.

    ``H_apply`` and ``rhs_apply`` map a State to a State; ``obs`` is an
    ObservableId or such a map. The norm is relative to ``||RHS psi||``
    unless that is below 1e-12, in which case it is absolute.
    """
    O = _as_operator(obs, algebra)
    rhs_apply = _as_operator(rhs_apply, algebra)
    lhs = (O(H_apply(state)) - H_apply(O(state))) * (1 / (1j * algebra.hbar))
    rhs = rhs_apply(state)
    err = (lhs - rhs).norm()
    scale = rhs.norm()
    value = err / scale if scale >= 1e-12 else err
    out = Residual(value)
    out.edge_density = state.edge_density()
    out.touches_boundary = out.edge_density >= EDGE_TOL
    return out
