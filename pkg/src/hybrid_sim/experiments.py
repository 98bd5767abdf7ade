"""Named scenarios: each turns one claim about the generators into a pass/fail run.

Every scenario returns a ``ScenarioReport`` whose verdict is derived only
from the checks listed in it. Oracles (matrix exponential, characteristic
ensembles) never call the grid propagation code.

Four-axis scenarios default to n=32 points per axis on L=16 boxes and to
phase-space-round packets: width 1/sqrt(2) on both axes of a classical
subsystem, (0.6, 1.0) on (x, chi) of a quantum one. Wider boxes or
narrower packets push the Fourier content of an oscillating packet past
the Nyquist wavenumber of a 32-point axis.
"""
import inspect
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import generator as gen
from . import oracles
from . import potentials as pot
from .algebra import (AXIS_NAMES, BASIC_OBSERVABLES, AlgebraParams, ObservableId, PacketSpec, State,
                      apply_observable, commutator_residual, gaussian_state, make_grid)
from .errors import ConfigurationError
from .propagator import EvolveConfig, conserved_moments, ehrenfest_residuals, evolve

logger = logging.getLogger(__name__)

ROUND_WIDTH = 2 ** -0.5
QUANTUM_WIDTHS = (0.6, 1.0)
SCENARIO_N = 32
SCENARIO_L = 16.0

XP_OBSERVABLES = (ObservableId.X1, ObservableId.P1, ObservableId.X2, ObservableId.P2)


@dataclass(frozen=True)
class Check:
    metric: str
    op: str  # "<" or ">"
    threshold: float

    def holds(self, value):
        if value is None or not math.isfinite(value):
            return False
        return value < self.threshold if self.op == "<" else value > self.threshold


@dataclass
class ScenarioReport:
    scenario: str
    metrics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    oracle: str = ""
    artifacts: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    runtime_s: float = 0.0
    inconclusive: bool = False

    @property
    def failed_checks(self):
        return [c for c in self.checks if not c.holds(self.metrics.get(c.metric))]

    @property
    def passed(self):
        return not self.inconclusive and not self.failed_checks

    @property
    def verdict(self):
        if self.inconclusive:
            return "inconclusive"
        return "pass" if self.passed else "fail"

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "verdict": self.verdict,
            "metrics": {k: self.metrics[k] for k in sorted(self.metrics)},
            "checks": [{"metric": c.metric, "op": c.op, "threshold": c.threshold,
                        "value": self.metrics.get(c.metric), "passed": c.holds(self.metrics.get(c.metric))}
                       for c in self.checks],
            "oracle": self.oracle,
            "artifacts": sorted(self.artifacts),
            "notes": list(self.notes),
            "runtime_s": self.runtime_s,
        }


# --- shared setup -------------------------------------------------------------

def packet(a, x=0.0, p=0.0, chi=0.0, pi=0.0):
    """Initial packet with the default widths of the subsystem's regime."""
    sx, sc = (ROUND_WIDTH, ROUND_WIDTH) if a == 0 else QUANTUM_WIDTHS
    return PacketSpec(x=x, p=p, chi=chi, pi=pi, sigma_x=sx, sigma_chi=sc)


def scenario_grid(n=SCENARIO_N, L=SCENARIO_L, centers=None):
    centers = centers or {}
    return make_grid({name: (n, L, centers.get(name, 0.0)) for name in AXIS_NAMES})


def linear_specs(lam=0.2, k=1.0):
    """The three named limits with harmonic V and bilinear W."""
    V = pot.Harmonic(k)
    return {
        "qq": gen.GeneralIAS(AlgebraParams(1, 1), V, V, pot.WSpec.single(1.0, pot.Bilinear(lam))),
        "cc": gen.ClassicalClassical(AlgebraParams(0, 0), V, V, pot.Bilinear(lam)),
        "cq": gen.HybridFiniteA(AlgebraParams(0, 1), V, V, pot.WSpec.single(1.0, pot.Bilinear(lam))),
    }


def _initial(spec, grid, x1=1.0, **first):
    alg = spec.algebra
    return gaussian_state(grid, alg, [packet(alg.a1, x=x1, **first), packet(alg.a2)])


def _n_steps(t_end, dt):
    return max(1, int(round(t_end / dt)))


def _run(spec, grid, state, dt, t_end, record_every, observables=XP_OBSERVABLES, **extras):
    plan = gen.build_plan(spec, grid)
    cfg = EvolveConfig(dt=dt, n_steps=_n_steps(t_end, dt), record_every=record_every,
                       observables=observables, **extras)
    return evolve(state, plan, cfg)


def _job(args):
    spec, grid, state, dt, t_end, record_every, observables, extras = args
    ts = _run(spec, grid, state, dt, t_end, record_every, observables, **extras)
    ts.final_state = None
    return ts


def _run_many(jobs_args, jobs=1):
    """Run independent evolutions, in worker processes when ``jobs`` > 1."""
    if jobs <= 1 or len(jobs_args) <= 1:
        return [_job(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_job, jobs_args))


def _max_diff(ts_a, ts_b, names):
    return max(float(np.max(np.abs(ts_a[n] - ts_b[n]))) for n in names)


def _oracle_error(ts, spec, z0, names=("x1", "p1", "x2", "p2")):
    z = oracles.linear_moment_oracle(spec, z0, ts.t)
    cols = {n: i for i, n in enumerate(oracles.SYMBOL_NAMES)}
    return max(float(np.max(np.abs(ts[n] - z[:, cols[n]]))) for n in names)


def _start():
    return time.perf_counter()


def _finish(report, t0):
    report.runtime_s = round(time.perf_counter() - t0, 3)
    logger.info("%s: %s in %.1fs", report.scenario, report.verdict, report.runtime_s)
    return report


# --- algebra ------------------------------------------------------------------

def random_packets(rng, n_sub=2, center=1.0, momentum=1.0, widths=(0.7, 1.0)):
    out = []
    for _ in range(n_sub):
        x, chi = rng.uniform(-center, center, 2)
        p, pi = rng.uniform(-momentum, momentum, 2)
        sx, sc = rng.uniform(*widths, 2)
        out.append(PacketSpec(x=x, p=p, chi=chi, pi=pi, sigma_x=sx, sigma_chi=sc))
    return out


def _probe_grid(j, n=64, L=22.0, spectator=(2, 14.0)):
    """Fine axes for subsystem j, a coarse spectator subsystem."""
    axes = {}
    for s in (1, 2):
        size, length = (n, L) if s == j else spectator
        axes[f"x{s}"] = (size, length, 0.0)
        axes[f"chi{s}"] = (size, length, 0.0)
    return make_grid(axes)


def expected_commutator(a_obs, b_obs, algebra):
    """c in [A, B] = i hbar c for two basic observables."""
    if a_obs.subsystem != b_obs.subsystem:
        return 0.0
    j = a_obs.subsystem
    table = {("x", "p"): algebra.a(j), ("x", "pi"): 1.0, ("chi", "p"): 1.0}
    ka, kb = a_obs.kind, b_obs.kind
    if (ka, kb) in table:
        return table[(ka, kb)]
    if (kb, ka) in table:
        return -table[(kb, ka)]
    return 0.0


def run_algebra_check(n_states=20, seed=0, lattice=(0.0, 0.5, 1.0), tol=1e-8):
    """All pairwise commutators of the basic observables on random contained states."""
    t0 = _start()
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_at = None
    pairs = [(A, B) for i, A in enumerate(BASIC_OBSERVABLES) for B in BASIC_OBSERVABLES[i + 1:]]
    grids = {j: _probe_grid(j) for j in (1, 2)}
    for a1 in lattice:
        for a2 in lattice:
            alg = AlgebraParams(a1, a2)
            for _ in range(n_states):
                packets = random_packets(rng)
                for j, grid in grids.items():
                    state = gaussian_state(grid, alg, packets)
                    for A, B in pairs:
                        # each grid resolves its own subsystem; cross pairs checked on grid 1
                        if A.subsystem != B.subsystem and j != 1:
                            continue
                        if A.subsystem == B.subsystem and A.subsystem != j:
                            continue
                        c = expected_commutator(A, B, alg)
                        r = float(commutator_residual(
                            state, lambda s, B=B: apply_observable(s, B, alg), A,
                            lambda s, c=c: s * c, alg))
                        if r > worst:
                            worst, worst_at = r, (a1, a2, A.name, B.name)
    report = ScenarioReport("algebra", metrics={"max_residual": worst},
                            checks=[Check("max_residual", "<", tol)],
                            oracle="closed-form commutators of the extended algebra")
    report.notes.append(f"{n_states} random states per (a1, a2) over {list(lattice)}; worst at {worst_at}")
    return _finish(report, t0)


# --- generator identities -------------------------------------------------------

def all_variant_specs(lam=0.2, k=1.0, a_hybrid=0.5):
    """One harmonic/bilinear configuration per generator variant."""
    V = pot.Harmonic(k)
    B = pot.Bilinear(lam)
    return {
        "NonInteracting": gen.NonInteracting(AlgebraParams(1, 1), V, V),
        "GeneralIAS": gen.GeneralIAS(AlgebraParams(1, 1), V, V, pot.WSpec.single(1.0, B)),
        "GradientCoupledIAS": gen.GradientCoupledIAS(AlgebraParams(0, 1), V, V, B),
        "HybridFiniteA": gen.HybridFiniteA(AlgebraParams(0, 1), V, V, pot.WSpec.single(a_hybrid, B)),
        "ClassicalClassical": gen.ClassicalClassical(AlgebraParams(0, 0), V, V, B),
        "SpecialDecoupledHybrid": gen.SpecialDecoupledHybrid(AlgebraParams(0, 1), V, V, B),
    }


def residual_test_states(grid, algebra):
    """Two smooth contained states with small offsets in every variable.

    Unit widths balance the spatial and the spectral tails of a 32-point,
    L=20 axis; both sit near 1e-11 in amplitude.
    """
    return [
        gaussian_state(grid, algebra, [PacketSpec(x=0.1, p=0.05, chi=-0.05, pi=0.02),
                                       PacketSpec(x=-0.05, p=-0.1, chi=0.1, pi=0.0)]),
        gaussian_state(grid, algebra, [PacketSpec(x=-0.1, chi=0.1, pi=-0.05),
                                       PacketSpec(x=0.08, p=0.1, chi=-0.02)]),
    ]


def run_pde_residuals(lam=0.2, n=32, L=20.0, tol=1e-8, control_min=1e-2):
    """The four defining relations for every variant, plus the forced inadmissible control."""
    t0 = _start()
    grid = make_grid({name: (n, L, 0.0) for name in AXIS_NAMES})
    report = ScenarioReport("pde-residuals",
                            oracle="operator identities (1/i hbar)[x_j, H] = p_j/m_j and "
                                   "-(1/i hbar)[p_j, H] = V_j' + dW/dx_j")
    for name, spec in all_variant_specs(lam).items():
        res = gen.pde_residuals(spec, grid, residual_test_states(grid, spec.algebra))
        for (kind, j), r in res.items():
            metric = f"{name}.{kind}{j}"
            report.metrics[metric] = r
            report.checks.append(Check(metric, "<", tol))
    report.metrics["max_residual"] = max(report.metrics.values())
    hybrid = all_variant_specs(lam)["HybridFiniteA"]
    forced = gen.build_forced_plan(hybrid, grid, pot.PolynomialRawW({(1, 0, 1, 0): lam}))
    res = gen.plan_residuals(forced, residual_test_states(grid, hybrid.algebra))
    report.metrics["control.max"] = max(res.values())
    report.checks.append(Check("control.max", ">", control_min))
    report.notes.append("control: HybridFiniteA with lam x1 x2 inserted as a position-diagonal term")
    return _finish(report, t0)


# --- propagation scenarios ----------------------------------------------------

def limit_grid(spec, n=SCENARIO_N, L=SCENARIO_L, x1=1.0):
    """Scenario grid with half the points on the chi axis of every a = 1 subsystem.

    There chi only shifts with x (x - chi is frozen), its spectrum stays far
    below the halved Nyquist limit, and it costs half the transform work.
    chi1 is centred on the middle of its swing, x1 - x1(0).
    """
    axes = {}
    for j, c in ((1, -x1), (2, 0.0)):
        quantum = spec.algebra.a(j) == 1
        axes[f"x{j}"] = (n, L)
        axes[f"chi{j}"] = (n // 2, L, c) if quantum else (n, L)
    return make_grid(axes)


def run_qq_cc_limit_suite(lam=0.2, dt=0.005, t_end=10.0, record_every=20, n=SCENARIO_N, L=SCENARIO_L,
                          tol=1e-4, limits=("qq", "cc", "cq"), jobs=1):
    """First moments of the three limits against the matrix-exponential oracle."""
    t0 = _start()
    specs = linear_specs(lam)
    z0 = np.zeros(8)
    z0[0] = 1.0
    args = []
    for k in limits:
        grid = limit_grid(specs[k], n, L)
        args.append((specs[k], grid, _initial(specs[k], grid), dt, t_end, record_every, XP_OBSERVABLES, {}))
    report = ScenarioReport("qq-cc-limits", oracle="matrix exponential of the closed linear moment system")
    for k, ts in zip(limits, _run_many(args, jobs)):
        report.metrics[f"{k}.oracle_error"] = _oracle_error(ts, specs[k], z0)
        report.checks.append(Check(f"{k}.oracle_error", "<", tol))
        report.artifacts[k] = ts
        report.notes.extend(f"{k}: {w}" for w in ts.warnings)
    return _finish(report, t0)


def decoupling_specs(lam=0.5):
    """name -> (spec, expectation) for the unobservable-shift probe."""
    V = pot.Harmonic(1.0)
    B = pot.Bilinear(lam)
    return {
        "qq": (gen.GeneralIAS(AlgebraParams(1, 1), V, V, pot.WSpec.single(1.0, B)), "equal"),
        "cc": (gen.ClassicalClassical(AlgebraParams(0, 0), V, V, B), "equal"),
        "ias": (gen.GeneralIAS(AlgebraParams(0.5, 0.5), V, V, pot.WSpec.single(0.5, B)), "equal"),
        "hybrid": (gen.HybridFiniteA(AlgebraParams(0, 1), V, V, pot.WSpec.single(0.5, B)), "differ"),
        "hybrid-null": (gen.HybridFiniteA(AlgebraParams(0, 1), V, V, pot.WSpec.single(0.5, pot.Bilinear(0.0))),
                        "equal"),
    }


def run_decoupling_probe(spec, delta=1.0, expect="equal", dt=0.005, t_end=5.0, record_every=10,
                         n=SCENARIO_N, L=SCENARIO_L, equal_tol=1e-6, differ_min=1e-2, name="decoupling",
                         jobs=1):
    """Two runs whose initial states differ only by a shift delta of the chi1 envelope."""
    t0 = _start()
    grid = scenario_grid(n, L)
    base = _initial(spec, grid)
    shifted = _initial(spec, grid, chi=delta)
    args = [(spec, grid, s, dt, t_end, record_every, XP_OBSERVABLES, {}) for s in (base, shifted)]
    ts0, ts1 = _run_many(args, jobs)
    D = _max_diff(ts0, ts1, ("x1", "p1", "x2", "p2"))
    report = ScenarioReport(name, metrics={"D": D},
                            oracle="the same run with the chi1 envelope shifted")
    report.checks.append(Check("D", "<", equal_tol) if expect == "equal" else Check("D", ">", differ_min))
    report.artifacts = {"base": ts0, "shifted": ts1}
    report.notes.extend(ts0.warnings + ts1.warnings)
    return _finish(report, t0)


def run_decoupling_suite(variants=None, delta=1.0, lam=0.5, jobs=1, **kw):
    """Shift probe over the named variants; a1 = a2 cases must not move."""
    t0 = _start()
    specs = decoupling_specs(lam)
    variants = tuple(variants or specs)
    unknown = [v for v in variants if v not in specs]
    if unknown:
        raise ConfigurationError(f"unknown decoupling variant(s) {unknown}; choose from {sorted(specs)}",
                                 key="variant")
    report = ScenarioReport("decoupling", oracle="the same run with the chi1 envelope shifted")
    for v in variants:
        spec, expect = specs[v]
        sub = run_decoupling_probe(spec, delta, expect, name=f"decoupling.{v}", jobs=jobs, **kw)
        report.metrics[f"{v}.D"] = sub.metrics["D"]
        c = sub.checks[0]
        report.checks.append(Check(f"{v}.D", c.op, c.threshold))
        report.artifacts.update({f"{v}.{k}": ts for k, ts in sub.artifacts.items()})
        report.notes.extend(f"{v}: {w}" for w in sub.notes)
    return _finish(report, t0)


def interaction_force_ops(plan):
    """Position-diagonal operators for the interaction part of each force field."""
    spec = plan.spec
    grid = plan.grid
    _, grads = gen._interaction_terms(spec, grid)
    ops = {}
    for j, g in zip((1, 2), grads):
        g = np.broadcast_to(np.asarray(g, dtype=float), grid.shape)
        ops[j] = lambda s, g=g: State(s.grid, g * s.amplitudes)
    return ops


def integrity_residual(plan, states):
    """Largest |[p_k, dW/dx_j]| over the test states, j, k in {1, 2}."""
    alg = plan.algebra
    worst = 0.0
    for op in interaction_force_ops(plan).values():
        for k in (1, 2):
            worst = max(worst, gen.commutes_with(op, ObservableId[f"P{k}"], states, alg))
    return worst


def special_hybrid_spec(lam=0.05, k2=0.25, center2=3.5, base=None):
    return gen.SpecialDecoupledHybrid(AlgebraParams(0, 1), pot.Harmonic(1.0), pot.Harmonic(k2, center2),
                                      base or pot.Bilinear(lam))


def special_hybrid_grid(n=SCENARIO_N, L=SCENARIO_L):
    """Classical pair as usual; x2 and chi2 refined and widened.

    u = x2 - chi2 is frozen, so chi2 settles around center2 - u and
    inherits the full spread of u, while the chi-linear couplings make the
    subsystem-2 wavenumbers random-walk at a rate set by lam.
    """
    return make_grid({"x1": (n, L), "chi1": (n, L), "x2": (2 * n, 1.5 * L, 3.5), "chi2": (2 * n, 3 * L, 1.0)})


def run_special_hybrid_suite(lam=0.05, k2=0.25, dt=0.04, t_end=10.0, record_every=5, n=SCENARIO_N, L=SCENARIO_L,
                             centers=((3.0, 1.0), (4.0, 2.0), (4.0, 1.0)), drift_tol=1e-9,
                             equal_tol=1e-6, differ_min=1e-3, integrity_tol=1e-8, jobs=1):
    """Conservation of x2 - chi2, classical dependence on it alone, and momentum commutation.

    Both split factors commute with x2 - chi2, and the classical means close
    on (x1, p1, x2 - chi2) step by step, so every check here is exact in dt.
    """
    t0 = _start()
    grid = special_hybrid_grid(n, L)
    spec = special_hybrid_spec(lam, k2)
    alg = spec.algebra
    # matched to the stiffness of V2 so the packet holds its width
    w = k2 ** -0.25
    states = [gaussian_state(grid, alg, [packet(0, x=1.0), PacketSpec(x=x2, chi=chi2, sigma_x=w, sigma_chi=w)])
              for x2, chi2 in centers]
    args = [(spec, grid, s, dt, t_end, record_every, XP_OBSERVABLES, {"moments": 2}) for s in states]
    runs = _run_many(args, jobs)
    report = ScenarioReport("special-hybrid",
                            oracle="conservation law and classical force law of the special hybrid")
    drifts = [conserved_moments(ts) for ts in runs]
    report.metrics["drift_k1"] = max(d["x2_minus_chi2^1"] for d in drifts)
    report.metrics["drift_k2"] = max(d["x2_minus_chi2^2"] for d in drifts)
    report.metrics["D_equal_difference"] = _max_diff(runs[0], runs[1], ("x1", "p1"))
    report.metrics["D_unequal_difference"] = _max_diff(runs[0], runs[2], ("x1", "p1"))
    probe = make_grid({name: (32, 20.0) for name in AXIS_NAMES})
    report.metrics["integrity"] = integrity_residual(gen.build_plan(spec, probe), residual_test_states(probe, alg))
    report.checks += [Check("drift_k1", "<", drift_tol), Check("drift_k2", "<", drift_tol),
                      Check("D_equal_difference", "<", equal_tol),
                      Check("D_unequal_difference", ">", differ_min),
                      Check("integrity", "<", integrity_tol)]
    report.artifacts = {f"start_{x2:g}_{chi2:g}": ts for (x2, chi2), ts in zip(centers, runs)}
    for ts in runs:
        report.notes.extend(ts.warnings)
    return _finish(report, t0)


def run_hybrid_coupling(a=0.5, lam=0.5, dt=0.005, t_end=2.0, n=SCENARIO_N, L=SCENARIO_L,
                        ehrenfest_tol=5e-4, integrity_min=1e-3):
    """Coupled hybrid: Ehrenfest relations hold while the force sees unobservables."""
    t0 = _start()
    grid = scenario_grid(n, L)
    spec = all_variant_specs(lam, a_hybrid=a)["HybridFiniteA"]
    state = _initial(spec, grid)
    ts = _run(spec, grid, state, dt, t_end, 1, moments=1, forces=True)
    res = ehrenfest_residuals(ts, spec.algebra)
    report = ScenarioReport("hybrid-coupling", oracle="Ehrenfest relations and momentum commutation")
    report.metrics["ehrenfest_max"] = max(res.values())
    report.metrics["integrity"] = integrity_residual(gen.build_plan(spec, grid), [state])
    report.metrics["drift_k1"] = conserved_moments(ts)["x2_minus_chi2^1"]
    report.checks += [Check("ehrenfest_max", "<", ehrenfest_tol), Check("integrity", ">", integrity_min)]
    report.notes.append("drift_k1 is informational: x2 - chi2 commutes with every term when a2 = 1")
    report.notes.extend(ts.warnings)
    report.artifacts["run"] = ts
    return _finish(report, t0)


def run_ehrenfest_suite(dts=(0.02, 0.01, 0.005), t_end=0.5, lam=0.2, n=SCENARIO_N, L=SCENARIO_L,
                        tol=5e-4, order=2.0, order_tol=0.2, variants=None):
    """Ehrenfest residuals of every variant and their convergence order in dt."""
    t0 = _start()
    grid = scenario_grid(n, L)
    specs = all_variant_specs(lam)
    report = ScenarioReport("ehrenfest", oracle="central-difference Ehrenfest relations; log-log slope in dt")
    for name in variants or specs:
        spec = specs[name]
        state = _initial(spec, grid)
        maxima = []
        for dt in dts:
            ts = _run(spec, grid, state, dt, t_end, 1, forces=True)
            maxima.append(max(ehrenfest_residuals(ts, spec.algebra).values()))
        fit = float(np.polyfit(np.log(dts), np.log(maxima), 1)[0])
        i_ref = int(np.argmin(dts))
        report.metrics[f"{name}.residual"] = maxima[i_ref]
        report.metrics[f"{name}.slope"] = fit
        report.metrics[f"{name}.slope_deviation"] = abs(fit - order)
        report.checks += [Check(f"{name}.residual", "<", tol),
                          Check(f"{name}.slope_deviation", "<", order_tol)]
        report.notes.append(f"{name}: residuals {['%.3e' % m for m in maxima]} at dt {list(dts)}")
    return _finish(report, t0)


def f_gauge_choices():
    """Two distinct gauge functions (and the zero reference)."""
    return {
        "zero": gen.FSpec(),
        "well": gen.FSpec(pos_part=pot.GaussianWell(0.8, 1.5)),
        "mixed": gen.FSpec(pos_part=pot.GaussianWell(-0.5, 2.0, 0.5, -0.5), mom_part=((1, 0, 0.3), (0, 2, 0.1))),
    }


def f_gauge_grid(n=SCENARIO_N, L=SCENARIO_L, x1=1.0):
    """Scenario grid with the chi axes half as wide again.

    For a = 1 the spread of x - chi is frozen while x oscillates, so chi
    carries both; chi1 is centred on the middle of its swing, x1 - x1(0).
    The chi spectra stay far below their Nyquist limit at the coarser spacing.
    """
    return make_grid({"x1": (n, L), "chi1": (n, 1.5 * L, -x1), "x2": (n, L), "chi2": (n, 1.5 * L)})


def run_f_gauge(lam=0.2, dt=0.005, t_end=1.5, record_every=10, n=SCENARIO_N, L=SCENARIO_L, factor=2.0, jobs=1):
    """Observable trajectories under two distinct F agree within twice the splitting error."""
    t0 = _start()
    grid = f_gauge_grid(n, L)
    base = linear_specs(lam)["qq"]
    choices = f_gauge_choices()
    specs = {k: gen.GeneralIAS(base.algebra, base.v1, base.v2, base.w, F) for k, F in choices.items()}
    state = _initial(base, grid)
    names = list(specs)
    runs = dict(zip(names, _run_many(
        [(specs[k], grid, state, dt, t_end, record_every, XP_OBSERVABLES, {}) for k in names], jobs)))
    z0 = np.zeros(8)
    z0[0] = 1.0
    budget = _oracle_error(runs["zero"], base, z0)
    diff = _max_diff(runs["well"], runs["mixed"], ("x1", "p1", "x2", "p2"))
    report = ScenarioReport("f-gauge", metrics={"splitting_budget": budget, "gauge_difference": diff,
                                                "bound": factor * budget},
                            oracle="splitting error of the F = 0 run against the matrix-exponential oracle")
    report.metrics["ratio"] = diff / budget if budget > 0 else math.inf
    report.checks.append(Check("ratio", "<", factor))
    report.artifacts = runs
    for k, ts in runs.items():
        report.notes.extend(f"{k}: {w}" for w in ts.warnings)
    return _finish(report, t0)


# --- classical transport --------------------------------------------------------

def phase_space_density(state, hbar=1.0):
    """rho(x, p) of a reduced classical state, p = hbar k_chi, as (x, p, rho)."""
    grid = state.grid
    ax_x, ax_c = grid.axis("x1"), grid.axis("chi1")
    spec = np.fft.fft(state.amplitudes, axis=grid.index("chi1"))
    rho = np.abs(spec) ** 2
    rho = rho / rho.sum()
    return ax_x.coords, hbar * ax_c.wavenumbers, rho


def density_moments(x, p, rho):
    X, P = np.meshgrid(x, p, indexing="ij")
    return {"x": float(np.sum(rho * X)), "p": float(np.sum(rho * P)),
            "xx": float(np.sum(rho * X * X)), "pp": float(np.sum(rho * P * P)),
            "xp": float(np.sum(rho * X * P))}


def sample_moments(x, p):
    return {"x": float(x.mean()), "p": float(p.mean()), "xx": float((x * x).mean()),
            "pp": float((p * p).mean()), "xp": float((x * p).mean())}


def relative_moment_errors(grid_m, ens_m):
    """Errors scaled by the ensemble's own second-moment scales."""
    sx = math.sqrt(ens_m["xx"])
    sp = math.sqrt(ens_m["pp"])
    scale = {"x": sx, "p": sp, "xx": ens_m["xx"], "pp": ens_m["pp"], "xp": sx * sp}
    return {k: abs(grid_m[k] - ens_m[k]) / scale[k] for k in scale}


def effective_support(rho):
    """Participation number of the cell weights."""
    return float(rho.sum() ** 2 / np.sum(rho ** 2))


def run_liouville_check(V=None, n_ensemble=100_000, x0=0.5, p0=0.0, sigma_x=0.5, sigma_chi=1.0, n=256,
                        L=20.0, L_chi=40.0, dt=0.005, times=(2.0, 5.0), tol=2e-2, min_support=100, seed=0,
                        m=1.0):
    """Classical density transport against an ensemble of characteristics.

    The grid run uses the classical generator on a reduced (x1, chi1)
    grid; rho(x, p) is read off through the transform over chi1. The
    ensemble is drawn from the analytic initial density and pushed along
    dx/dt = p/m, dp/dt = -V'(x) with fixed-step RK4.
    """
    t0 = _start()
    V = V or pot.Cosine(1.0, 1.0)
    alg = AlgebraParams(0, 0, m1=m)
    grid = make_grid({"x1": (n, L, 0.0), "chi1": (n, L_chi, 0.0)})
    spec = gen.ClassicalClassical(alg, V)
    plan = gen.build_plan(spec, grid)
    state = gaussian_state(grid, alg, [PacketSpec(x=x0, p=p0, sigma_x=sigma_x, sigma_chi=sigma_chi)])
    report = ScenarioReport("liouville", oracle=f"{n_ensemble} RK4 characteristics, dt_ode=1e-3")
    rng = np.random.default_rng(seed)
    sigma_p = alg.hbar / (2 * sigma_chi)
    xs = rng.normal(x0, sigma_x, n_ensemble)
    ps = rng.normal(p0, sigma_p, n_ensemble)
    ens = oracles.rk4_characteristics(lambda x: V.deriv(x), m, xs, ps, max(times), record=times)
    elapsed = 0.0
    current = state
    for t in sorted(times):
        steps = _n_steps(t - elapsed, dt)
        ts = evolve(current, plan, EvolveConfig(dt=dt, n_steps=steps, record_every=steps,
                                                observables=(ObservableId.X1, ObservableId.P1)))
        report.notes.extend(f"segment starting at t={elapsed:g}: {w}" for w in ts.warnings)
        current = ts.final_state
        elapsed = t
        x, p, rho = phase_space_density(current, alg.hbar)
        support = effective_support(rho)
        report.metrics[f"t{t:g}.support"] = support
        if support < min_support:
            report.inconclusive = True
            report.notes.append(f"t={t:g}: effective support {support:.0f} cells < {min_support}")
        errs = relative_moment_errors(density_moments(x, p, rho), sample_moments(*ens[t]))
        report.metrics[f"t{t:g}.max_rel_error"] = max(errs.values())
        for k, v in errs.items():
            report.metrics[f"t{t:g}.{k}"] = v
        report.checks.append(Check(f"t{t:g}.max_rel_error", "<", tol))
    return _finish(report, t0)


# --- registry -------------------------------------------------------------------

def _decoupling_entry(variant=None, **kw):
    variants = None
    if variant:
        variants = [v.strip() for v in str(variant).split(",") if v.strip()]
    return run_decoupling_suite(variants, **kw)


SCENARIOS = {
    "qq-cc-limits": run_qq_cc_limit_suite,
    "decoupling": _decoupling_entry,
    "hybrid-coupling": run_hybrid_coupling,
    "special-hybrid": run_special_hybrid_suite,
    "liouville": run_liouville_check,
    "f-gauge": run_f_gauge,
    "pde-residuals": run_pde_residuals,
    "ehrenfest": run_ehrenfest_suite,
    "algebra": run_algebra_check,
}

ACCEPTS_JOBS = {"qq-cc-limits", "decoupling", "special-hybrid", "f-gauge"}


def run_scenario(name, overrides=None, jobs=1, variant=None):
    if name not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {name!r}; registry: {', '.join(sorted(SCENARIOS))}",
                                 key="scenario")
    kw = dict(overrides or {})
    if name in ACCEPTS_JOBS:
        kw["jobs"] = jobs
    if variant is not None:
        if name != "decoupling":
            raise ConfigurationError("--variant applies to the decoupling scenario only", key="variant")
        kw["variant"] = variant
    fn = SCENARIOS[name]
    params = inspect.signature(fn).parameters
    if not any(p.kind is p.VAR_KEYWORD for p in params.values()) or name == "decoupling":
        allowed = set(params) | ({"delta", "lam", "dt", "t_end", "record_every", "n", "L", "equal_tol",
                                  "differ_min", "jobs"} if name == "decoupling" else set())
        bad = sorted(set(kw) - allowed)
        if bad:
            raise ConfigurationError(f"unknown override(s) {bad} for {name}; accepted: {sorted(allowed)}",
                                     key="set")
    return fn(**kw)


def scenario_parameters(name):
    """Override keys a scenario accepts, with their defaults."""
    fn = SCENARIOS[name]
    if name == "decoupling":
        fn = run_decoupling_probe
    return {k: p.default for k, p in inspect.signature(fn).parameters.items()
            if p.default is not inspect.Parameter.empty and k not in ("jobs", "spec", "name", "expect")}
