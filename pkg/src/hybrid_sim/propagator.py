"""Strang-split unitary propagation, recording and diagnostics."""
import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _fft
from .algebra import ObservableId, State, edge_density_of, observable_field, observable_symbol
from .errors import ConfigurationError, DiagnosticError

logger = logging.getLogger(__name__)

EDGE_WARN = 1e-8


@dataclass(frozen=True)
class EvolveConfig:
    dt: float = 0.005
    n_steps: int = 2000
    record_every: int = 1
    observables: tuple = None  # None: x_j and p_j of every active subsystem
    norm: bool = True
    moments: int = 0  # record <(x2 - chi2)^k> for k = 1..moments (at most 2)
    energy: bool = False
    forces: bool = False  # record <V_j' + dW/dx_j>

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive", key="dt")
        if self.n_steps < 1:
            raise ConfigurationError("n_steps must be >= 1", key="n_steps")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1", key="record_every")
        if self.moments not in (0, 1, 2):
            raise ConfigurationError("moments must be 0, 1 or 2", key="moments")
        if self.observables is not None:
            object.__setattr__(self, "observables", tuple(self.observables))

    def observables_for(self, grid):
        if self.observables is not None:
            return self.observables
        return tuple(ObservableId[f"{k}{j}"] for j in grid.subsystems for k in ("X", "P"))


@dataclass
class TimeSeries:
    """Recorded quantities; every column has one entry per entry of ``times``."""

    times: list = field(default_factory=list)
    columns: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    final_state: object = None

    def __getitem__(self, name):
        return np.asarray(self.columns[name])

    @property
    def t(self):
        return np.asarray(self.times)

    @property
    def warnings(self):
        return self.metadata.setdefault("warnings", [])


def _phase(field_, scale):
    return np.exp(-1j * scale * field_)


class _Stepper:
    """Cached split factors of one plan for one dt, stepping in a reusable buffer."""

    def __init__(self, plan, dt):
        hbar = plan.algebra.hbar
        self.plan = plan
        shape = plan.grid.shape
        self.half_v = np.broadcast_to(_phase(plan.v_phase, dt / (2 * hbar)), shape)
        self.full_v = self.half_v * self.half_v
        self.fft = _fft.InPlace(shape)
        self.kin = np.broadcast_to(_phase(plan.t_symbol, dt / hbar) * self.fft.scale, shape)

    def run(self, amps, n):
        """``n`` Strang steps, merging adjacent half potential factors."""
        buf = self.fft.buf
        np.multiply(amps, self.half_v, out=buf)
        for i in range(n):
            self.fft.forward()
            buf *= self.kin
            self.fft.backward()
            buf *= self.full_v if i < n - 1 else self.half_v
        return buf.copy()


def step(state, plan, dt):
    """One step: half potential phase, kinetic phase in Fourier space, half potential phase."""
    amps = _Stepper(plan, dt).run(state.amplitudes, 1)
    return State(state.grid, amps)


def plan_hash(plan):
    h = hashlib.sha256()
    h.update(repr(plan.spec).encode())
    h.update(repr(plan.grid).encode())
    h.update(repr(plan.algebra).encode())
    return h.hexdigest()[:16]


def _compact(f, shape):
    """(axes along which f is constant, f restricted to index 0 on those axes)."""
    f = np.asarray(f, dtype=float)
    f = f.reshape((1,) * (len(shape) - f.ndim) + f.shape)
    const = tuple(ax for ax in range(len(shape)) if f.shape[ax] == 1 or f.strides[ax] == 0)
    index = tuple(slice(0, 1) if ax in const else slice(None) for ax in range(len(shape)))
    return const, np.ascontiguousarray(np.broadcast_to(f, shape)[index])


class _Weighted:
    """Sums of weight * field for many fields, sharing marginals of the weight."""

    def __init__(self, weight):
        self.weight = weight
        self.marginals = {}

    def dot(self, compact):
        const, f = compact
        if const not in self.marginals:
            self.marginals[const] = self.weight.sum(axis=const, keepdims=True) if const else self.weight
        return float(np.vdot(self.marginals[const].ravel(), f.ravel()).real)


class _Recorder:
    def __init__(self, plan, config):
        self.plan = plan
        self.config = config
        grid = plan.grid
        shape = grid.shape
        self.dv = grid.cell_volume
        self.fields = {}
        self.symbols = {}
        for obs in config.observables_for(grid):
            if obs.is_position_diagonal:
                self.fields[obs.name.lower()] = _compact(observable_field(grid, obs), shape)
            else:
                self.symbols[obs.name.lower()] = _compact(observable_symbol(grid, obs, plan.algebra), shape)
        if config.moments:
            d = observable_field(grid, ObservableId.X2_MINUS_CHI2)
            for k in range(1, config.moments + 1):
                self.fields[f"x2_minus_chi2^{k}"] = _compact(d ** k, shape)
        if config.forces:
            for j, f in plan.forces.items():
                self.fields[f"force{j}"] = _compact(f, shape)
        if config.energy:
            self.v_phase = _compact(plan.v_phase, shape)
            self.t_symbol = _compact(plan.t_symbol, shape)
        self.columns = {name: [] for name in (*self.fields, *self.symbols)}
        if config.norm:
            self.columns["norm"] = []
        if config.energy:
            self.columns["energy"] = []
        self.fft = _fft.InPlace(shape) if (self.symbols or config.energy) else None
        self.last_edge = 0.0

    def record(self, amps):
        rho = np.abs(amps) ** 2
        w = _Weighted(rho)
        mass = float(rho.sum()) * self.dv
        for name, f in self.fields.items():
            self.columns[name].append(w.dot(f) * self.dv / mass)
        if self.symbols or self.config.energy:
            self.fft.buf[...] = amps
            self.fft.forward()
            spec = np.abs(self.fft.buf) ** 2
            ws = _Weighted(spec)
            spec_mass = float(spec.sum())
            for name, s in self.symbols.items():
                self.columns[name].append(ws.dot(s) / spec_mass)
        if self.config.energy:
            e = w.dot(self.v_phase) * self.dv / mass + ws.dot(self.t_symbol) / spec_mass
            self.columns["energy"].append(e)
        if self.config.norm:
            self.columns["norm"].append(mass ** 0.5)
        self.last_edge = edge_density_of(rho)


def evolve(state, plan, config):
    """Propagate ``config.n_steps`` steps, recording every ``record_every`` steps.

    The initial state is recorded at t = 0. A boundary-contact warning is
    attached to the metadata if the edge density exceeds 1e-8 at a record
    point; the run continues.
    """
    stepper = _Stepper(plan, config.dt)
    rec = _Recorder(plan, config)
    ts = TimeSeries(metadata={
        "spec_hash": plan_hash(plan),
        "spec": repr(plan.spec),
        "grid": {name: [axis.n, axis.L, axis.c] for name, axis in plan.grid.axes},
        "algebra": vars(plan.algebra).copy(),
        "dt": config.dt,
        "n_steps": config.n_steps,
        "record_every": config.record_every,
        "warnings": [],
    })
    amps = np.array(state.amplitudes, dtype=np.complex128)
    ts.times.append(0.0)
    rec.record(amps)
    done = 0
    warned = False
    while done < config.n_steps:
        n = min(config.record_every, config.n_steps - done)
        amps = stepper.run(amps, n)
        done += n
        ts.times.append(done * config.dt)
        rec.record(amps)
        if not warned:
            edge = rec.last_edge
            if edge > EDGE_WARN:
                msg = f"boundary contact at t={done * config.dt:g}: edge density {edge:.2e}"
                logger.warning(msg)
                ts.warnings.append(msg)
                warned = True
    ts.columns = rec.columns
    ts.final_state = State(plan.grid, amps)
    return ts


def _central_difference(values, dt):
    values = np.asarray(values)
    return (values[2:] - values[:-2]) / (2 * dt)


def ehrenfest_residuals(ts, algebra):
    """Max deviation of the recorded means from the Ehrenfest relations.

    Compares the central difference of <x_j> with <p_j>/m_j and that of
    <p_j> with -<V_j' + dW/dx_j> at interior record points. Needs X_j, P_j
    and force columns.
    """
    t = ts.t
    if t.size < 3:
        raise DiagnosticError("need at least 3 record points for central differences")
    dt = t[1] - t[0]
    out = {}
    for j in (1, 2):
        if f"x{j}" not in ts.columns:
            continue
        if f"p{j}" not in ts.columns or f"force{j}" not in ts.columns:
            raise DiagnosticError(f"subsystem {j} needs p{j} and force{j} columns")
        out[("x", j)] = float(np.max(np.abs(_central_difference(ts[f"x{j}"], dt)
                                            - ts[f"p{j}"][1:-1] / algebra.m(j))))
        out[("p", j)] = float(np.max(np.abs(_central_difference(ts[f"p{j}"], dt)
                                            + ts[f"force{j}"][1:-1])))
    return out


def conserved_moments(ts):
    """Drift of <(x2 - chi2)^k> from its initial value, and of <H> if recorded."""
    out = {}
    for k in (1, 2):
        name = f"x2_minus_chi2^{k}"
        if name in ts.columns:
            col = ts[name]
            out[name] = float(np.max(np.abs(col - col[0])))
    if "energy" in ts.columns:
        col = ts["energy"]
        out["energy"] = float(np.max(np.abs(col - col[0])))
    if "norm" in ts.columns:
        out["norm"] = float(np.max(np.abs(ts["norm"] - ts["norm"][0])))
    return out
