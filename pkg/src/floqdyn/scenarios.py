"""Scenario presets, trajectory integration, and the energy-transfer metric.

The model family: a few-level system with a target level |b>, a hot bath
pumping the highest level(s) from the ground state, a cold bath connecting
them to |b>, and optionally a monochromatic drive coupling one level pair.

Basis ordering convention: 3-level scenarios use
{|0>, |1>, |b>} (energies 0, 3, 2.5; target index 2); 4-level scenarios use
{|0>, |1>, |2>, |b>} (energies 0, 3, 3+gap, 2.5; target index 3).

Trajectories integrate d(rho)/dt = L(t)[rho] with fixed-step RK4 on the
vectorized state.  Interaction-picture generators (Lindblad kinds) have
their recorded states transformed back to the Schrodinger picture with the
exact propagator on the sample grid; Schrodinger-picture generators
(Redfield kinds) record directly.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .baths import BathSpec, LambIntegralParams, OhmicSpec, spectral_density
from .errors import ConfigError, NumericalError, ValidationError
from .floquet import DriveSpec, FloquetDecomposition, drive_hamiltonian, floquet_decompose
from .generators import (
    CouplingChannel,
    Generator,
    GeneratorSpec,
    floquet_lindblad_generator,
    floquet_redfield_generator,
    lindblad_generator,
    redfield_generator,
)
from .operators import DensityMatrix
from .tolerances import TOLERANCES

#: Bath temperatures and Ohmic constants of the reference model (natural units).
TABLE_BATHS = {
    "hot": {"beta": 1.0 / 30.0, "j0": 4.0e-4, "omega_cutoff": np.sqrt(2.0)},
    "cold": {"beta": 1.0 / 4.0, "j0": 4.0e-3, "omega_cutoff": np.sqrt(0.2)},
}

REFERENCE_DRIVE = {"mu": 0.1, "omega": 2.25}


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully specified simulation scenario."""

    label: str
    energies: tuple[float, ...]
    target_level: int
    baths: tuple[BathSpec, ...]
    kind: str
    drive: DriveSpec | None = None
    lamb_shift: bool = True
    q_max: int = 0
    lamb_params: LambIntegralParams = LambIntegralParams()
    initial_level: int = 0
    grid_m: int = 1024
    period_nodes: int = 256
    substeps: int = 16
    dt: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        object.__setattr__(self, "baths", tuple(self.baths))
        if not (0 <= self.target_level < self.dim):
            raise ValidationError("target_level out of range")
        if not (0 <= self.initial_level < self.dim):
            raise ValidationError("initial_level out of range")
        for bath in self.baths:
            for up, lo in bath.transitions:
                if not (0 <= up < self.dim and 0 <= lo < self.dim):
                    raise ValidationError(f"bath {bath.name} transition ({up},{lo}) out of range")

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def h0(self) -> np.ndarray:
        return np.diag(np.asarray(self.energies, dtype=complex))

    @property
    def driven(self) -> bool:
        return self.drive is not None and self.drive.mu > 0

    def initial_state(self) -> DensityMatrix:
        return DensityMatrix.pure(self.dim, self.initial_level)

    def channels(self) -> tuple[CouplingChannel, ...]:
        out = []
        for bath in self.baths:
            for up, lo in bath.transitions:
                gap = abs(self.energies[up] - self.energies[lo])
                out.append(CouplingChannel(
                    bath, (up, lo), self.dim,
                    dipole=qubit_dipole_calibration(bath.spectral, gap),
                ))
        return tuple(out)

    def default_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        if self.drive is not None and self.kind.startswith("floquet"):
            # divisor of the P(t) sample grid: recorded times hit exact samples
            return (2.0 * np.pi / self.drive.omega_drive) / 256.0
        return 0.05


def qubit_dipole_calibration(spec: OhmicSpec, omega10: float) -> float:
    """Dipole magnitude making the Redfield qubit decay match the Lindblad one.

    Equating the two emission rates at the transition gap gives
    mu^2 = 6*pi^2*J(omega10)/omega10^3 in natural units.
    """
    if omega10 <= 0:
        raise ValidationError("omega10 must be positive")
    j = spectral_density(spec, omega10)
    if j < 0:
        raise ValidationError(f"spectral density negative at {omega10}")
    return float(np.sqrt(6.0 * np.pi**2 * j / omega10**3))


def _bath(name: str, transitions, overrides: dict | None = None) -> BathSpec:
    params = dict(TABLE_BATHS[name])
    if overrides:
        params.update(overrides)
    return BathSpec(
        name=name,
        beta=params["beta"],
        spectral=OhmicSpec(params["j0"], params["omega_cutoff"]),
        transitions=tuple(transitions),
    )


def build_three_level(variant: str, table2: dict | None = None,
                      kind: str | None = None, **overrides) -> ScenarioConfig:
    """3-level presets: hot bath on 0<->1, cold on b<->1, optional drive.

    variant 'v0' drives the (0, b) pair near resonance; 'v1' drives (1, b)
    off resonance; 'nondriven' has no field.  Basis order {|0>, |1>, |b>}.
    """
    table2 = table2 or {}
    hot = _bath("hot", [(1, 0)], table2.get("hot"))
    cold = _bath("cold", [(1, 2)], table2.get("cold"))
    drive = None
    q_max = 0
    if variant == "v0":
        drive = DriveSpec(REFERENCE_DRIVE["mu"], REFERENCE_DRIVE["omega"], (0, 2))
        q_max = 24
    elif variant == "v1":
        drive = DriveSpec(REFERENCE_DRIVE["mu"], REFERENCE_DRIVE["omega"], (1, 2))
        q_max = 3
    elif variant != "nondriven":
        raise ConfigError(f"unknown 3-level variant {variant!r}")
    if kind is None:
        kind = "floquet_lindblad" if drive is not None else "lindblad"
    fields = dict(
        label=f"three_level_{variant}",
        energies=(0.0, 3.0, 2.5),
        target_level=2,
        baths=(hot, cold),
        kind=kind,
        drive=drive,
        q_max=q_max,
    )
    fields.update(overrides)
    return ScenarioConfig(**fields)


def build_four_level(gap12: float, driven: bool = False, kind: str | None = None,
                     table2: dict | None = None, **overrides) -> ScenarioConfig:
    """4-level presets: hot bath on 0<->1 and 0<->2, cold on b<->1 and b<->2.

    gap12 is the |1>-|2> splitting (0 for the degenerate preset, 0.05 for
    the nondegenerate one); ``driven`` adds the (0, b) drive.  Basis order
    {|0>, |1>, |2>, |b>}.
    """
    if gap12 < 0:
        raise ConfigError("gap12 must be >= 0")
    table2 = table2 or {}
    hot = _bath("hot", [(1, 0), (2, 0)], table2.get("hot"))
    cold = _bath("cold", [(1, 3), (2, 3)], table2.get("cold"))
    drive = DriveSpec(REFERENCE_DRIVE["mu"], REFERENCE_DRIVE["omega"], (0, 3)) if driven else None
    if kind is None:
        kind = "floquet_redfield" if driven else "redfield"
    tag = "degenerate" if gap12 == 0 else "nondegenerate"
    fields = dict(
        label=f"four_level_{tag}" + ("_driven" if driven else ""),
        energies=(0.0, 3.0, 3.0 + gap12, 2.5),
        target_level=3,
        baths=(hot, cold),
        kind=kind,
        drive=drive,
        q_max=24 if driven else 0,
    )
    fields.update(overrides)
    return ScenarioConfig(**fields)


PRESETS = {
    "three_level_nondriven": lambda: build_three_level("nondriven"),
    "three_level_v0": lambda: build_three_level("v0"),
    "three_level_v1": lambda: build_three_level("v1"),
    "four_level_degenerate": lambda: build_four_level(0.0),
    "four_level_nondegenerate": lambda: build_four_level(0.05),
    "four_level_degenerate_driven": lambda: build_four_level(0.0, driven=True),
}


def decompose_scenario(config: ScenarioConfig) -> FloquetDecomposition:
    """Floquet decomposition at the scenario's drive period.

    A zero-amplitude drive is allowed (the decomposition degenerates to
    Hbar = H0, P = 1); a scenario with no drive at all has no period.
    """
    if config.drive is None:
        raise ConfigError(f"scenario {config.label!r} has no drive to decompose")
    h = drive_hamiltonian(config.h0, config.drive)
    return floquet_decompose(h, config.drive.tau, config.h0,
                             grid_m=config.grid_m, substeps=config.substeps)


def build_generator(config: ScenarioConfig,
                    decomposition: FloquetDecomposition | None = None,
                    picture: str | None = None,
                    full_secular: bool = False,
                    collective: bool = False) -> Generator:
    """Assemble the generator selected by ``config.kind``."""
    is_floquet = config.kind.startswith("floquet")
    if is_floquet and decomposition is None:
        decomposition = decompose_scenario(config)
    spec = GeneratorSpec(
        kind=config.kind,
        channels=config.channels(),
        lamb_shift=config.lamb_shift,
        floquet=decomposition if is_floquet else None,
        drive=config.drive,
        lamb_params=config.lamb_params,
        q_max=config.q_max,
        period_nodes=config.period_nodes,
    )
    h0 = config.h0
    if config.kind == "lindblad":
        return lindblad_generator(h0, spec, picture=picture or "schrodinger",
                                  collective=collective)
    if config.kind == "floquet_lindblad":
        return floquet_lindblad_generator(h0, spec)
    if config.kind == "redfield":
        return redfield_generator(h0, spec)
    return floquet_redfield_generator(h0, spec, full_secular=full_secular)


# ---------------------------------------------------------------------------
# trajectory integration


@dataclass(frozen=True)
class Trajectory:
    """Recorded Schrodinger-picture states on a uniform coarse grid."""

    times: np.ndarray
    states: np.ndarray                 # (n, d, d)
    populations: np.ndarray            # (n, d), real
    positivity_log: np.ndarray         # min eigenvalue per recorded state
    trace_errors: np.ndarray
    config: ScenarioConfig | None = None
    warnings_issued: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def coherence(self, i: int, j: int) -> np.ndarray:
        return self.states[:, i, j]

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _rk4_step_matrix(sop: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of an autonomous linear system == 4th-order Taylor map."""
    n = sop.shape[0]
    a = dt * sop
    m = np.eye(n, dtype=complex) + a
    a2 = a @ a
    m += 0.5 * a2
    a3 = a2 @ a
    m += a3 / 6.0
    m += (a3 @ a) / 24.0
    return m


def _spectral_bound(sop: np.ndarray) -> float:
    return float(np.linalg.norm(sop, 2))


def evolve(config: ScenarioConfig, t_final: float, dt: float | None = None,
           stride: int | None = None, generator: Generator | None = None,
           max_records: int = 20000, transform: bool = True) -> Trajectory:
    """Integrate the scenario's master equation with fixed-step RK4.

    Recorded states are Schrodinger picture (interaction-picture kinds are
    transformed with the exact grid-aligned propagator).  Trace drift beyond
    tolerance raises; Redfield positivity excursions beyond the soft bound
    are Warnings logged on the trajectory, and the run continues.
    """
    if generator is None:
        generator = build_generator(config)
    if dt is None:
        dt = config.default_dt()
    if dt <= 0:
        raise ValidationError("dt must be positive")
    # keep RK4 comfortably inside its stability region
    bound = _spectral_bound(generator.superop_at(0.0))
    if bound * dt > 1.5:
        dt_old = dt
        n_sub = int(np.ceil(bound * dt / 1.5))
        dt = dt / n_sub
        warnings.warn(
            f"dt={dt_old:.4g} too coarse for generator norm {bound:.3g}; using {dt:.4g}",
            RuntimeWarning, stacklevel=2,
        )
    n_steps = max(1, int(np.ceil(t_final / dt - 1e-9)))
    if stride is None:
        stride = max(1, int(np.ceil(n_steps / max_records)))
    n_rec = n_steps // stride + 1

    d = generator.dim
    rho0 = config.initial_state().matrix
    v = rho0.ravel().astype(complex)
    rec_states = np.empty((n_rec, d, d), dtype=complex)
    rec_times = np.empty(n_rec)

    static = generator.is_static
    if static:
        step_m = _rk4_step_matrix(generator.superop, dt)
        stride_m = np.linalg.matrix_power(step_m, stride)
    rec_states[0] = rho0
    rec_times[0] = 0.0
    idx = 1
    if static:
        for k in range(1, n_rec):
            v = stride_m @ v
            rec_times[k] = k * stride * dt
            rec_states[k] = v.reshape(d, d)
        idx = n_rec
    else:
        step = 0
        for k in range(1, n_rec):
            for _ in range(stride):
                t = step * dt
                l1 = generator.superop_at(t)
                lm = generator.superop_at(t + 0.5 * dt)
                l2 = generator.superop_at(t + dt)
                k1 = l1 @ v
                k2 = lm @ (v + 0.5 * dt * k1)
                k3 = lm @ (v + 0.5 * dt * k2)
                k4 = l2 @ (v + dt * k3)
                v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                step += 1
            rec_times[k] = step * dt
            rec_states[k] = v.reshape(d, d)
        idx = n_rec
    rec_states = rec_states[:idx]
    rec_times = rec_times[:idx]

    issued = []
    if transform and generator.picture == "interaction":
        if generator.propagator is None:
            raise NumericalError("interaction-picture generator lacks a propagator")
        for k in range(len(rec_times)):
            u = generator.propagator(rec_times[k])
            rec_states[k] = u @ rec_states[k] @ u.conj().T

    traces = np.einsum("tii->t", rec_states)
    trace_err = np.abs(traces - 1.0)
    if np.max(trace_err) > TOLERANCES.trace_drift:
        raise NumericalError(
            f"trace drift {np.max(trace_err):.2e} exceeds "
            f"{TOLERANCES.trace_drift:.0e}; decrease dt"
        )
    pops = np.einsum("tii->ti", rec_states).real
    min_eigs = np.array([np.linalg.eigvalsh(0.5 * (s + s.conj().T))[0] for s in rec_states])
    worst = float(min_eigs.min())
    if worst < TOLERANCES.redfield_positivity:
        msg = (f"state positivity violated beyond soft bound: min eigenvalue "
               f"{worst:.3e} < {TOLERANCES.redfield_positivity:.0e}")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        issued.append(msg)

    return Trajectory(times=rec_times, states=rec_states, populations=pops,
                      positivity_log=min_eigs, trace_errors=trace_err,
                      config=config, warnings_issued=tuple(issued))


# ---------------------------------------------------------------------------
# efficiency and diagnostics


@dataclass(frozen=True)
class EfficiencyReport:
    """Time-averaged target population up to t_final."""

    eta: float
    t_final: float
    times: np.ndarray
    integrand: np.ndarray
    cumulative: np.ndarray

    def __post_init__(self):
        if not (-1e-9 <= self.eta <= 1.0 + 1e-9):
            raise ValidationError(f"efficiency {self.eta} outside [0, 1]")


def efficiency(traj: Trajectory, target: int | None = None,
               t_final: float | None = None) -> EfficiencyReport:
    """eta(t_f) = (1/t_f) * int_0^{t_f} rho_bb(s) ds, trapezoid on the record grid."""
    if target is None:
        target = traj.config.target_level
    times = traj.times
    if t_final is None:
        t_final = float(times[-1])
    if t_final > times[-1] + 1e-9:
        raise ValidationError(f"t_final={t_final} beyond trajectory end {times[-1]}")
    mask = times <= t_final + 1e-12
    ts = times[mask]
    pb = traj.populations[mask, target]
    areas = np.concatenate([[0.0], np.cumsum(0.5 * (pb[1:] + pb[:-1]) * np.diff(ts))])
    with np.errstate(invalid="ignore", divide="ignore"):
        cumulative = np.where(ts > 0, areas / np.where(ts > 0, ts, 1.0), pb[0])
    eta = float(areas[-1] / ts[-1]) if ts[-1] > 0 else float(pb[0])
    return EfficiencyReport(eta=eta, t_final=float(ts[-1]), times=ts,
                            integrand=pb, cumulative=cumulative)


@dataclass(frozen=True)
class DiagnosticsReport:
    min_eigenvalue: float
    min_eigenvalue_series: np.ndarray
    max_trace_error: float
    coherence_norms: dict
    stationarity: float

    def rows(self):
        yield ("min_eigenvalue", self.min_eigenvalue)
        yield ("max_trace_error", self.max_trace_error)
        yield ("stationarity", self.stationarity)


def trajectory_diagnostics(traj: Trajectory, stationarity_window: int = 10) -> DiagnosticsReport:
    """Positivity, trace-drift, coherence-magnitude, and stationarity summary."""
    d = traj.dim
    coh = {}
    for i in range(d):
        for j in range(i + 1, d):
            coh[f"rho_{i}{j}"] = np.abs(traj.states[:, i, j])
    n = len(traj.times)
    w = min(stationarity_window, n - 1)
    if w >= 1:
        diff = traj.states[-1] - traj.states[-1 - w]
        stat = float(np.linalg.norm(diff))
    else:
        stat = 0.0
    return DiagnosticsReport(
        min_eigenvalue=float(traj.positivity_log.min()),
        min_eigenvalue_series=traj.positivity_log,
        max_trace_error=float(traj.trace_errors.max()),
        coherence_norms=coh,
        stationarity=stat,
    )


def scenario_with(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """dataclasses.replace wrapper so callers need not import dataclasses."""
    return replace(config, **changes)
