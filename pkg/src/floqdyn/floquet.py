"""Floquet machinery for periodically driven few-level systems.

Given a time-periodic Hamiltonian H(t) = H(t + tau), the propagator factors
as U(t,0) = P(t,0) exp(-i*Hbar*t) with Hbar Hermitian (the Floquet
Hamiltonian) and P unitary, tau-periodic, P(0,0) = 1.  This module computes:

* the monodromy U(tau,0) by RK4 integration and Hbar by the principal
  matrix logarithm, with quasienergy branches unfolded against the
  undriven reference so Hbar is continuous in the drive amplitude;
* the sampled periodic operator P(t,0) and the Fourier coefficients S(q)
  of P†(t) S P(t) for any system operator S;
* the jump-operator table S(q, omega) resolved on quasienergy gaps;
* a Magnus + Baker-Campbell-Hausdorff approximation of the propagator for
  a single cosine-driven level pair, and the fidelity benchmarks comparing
  it against the integrated propagator.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import NumericalError, ResolutionError, StepSizeError, ValidationError
from .operators import (
    Spectrum,
    hermitian_eigensystem,
    principal_unitary_log,
    require_hermitian,
    unitarity_defect,
    unitary_fidelity,
)
from .tolerances import TOLERANCES


@dataclass(frozen=True)
class DriveSpec:
    """Monochromatic cosine drive mu*cos(Omega*t) coupling one level pair."""

    mu: float
    omega_drive: float
    pair: tuple[int, int]

    def __post_init__(self):
        if self.mu < 0:
            raise ValidationError("drive amplitude must be >= 0")
        if self.omega_drive <= 0:
            raise ValidationError("drive frequency must be > 0")
        if self.pair[0] == self.pair[1]:
            raise ValidationError("drive must couple two distinct levels")
        object.__setattr__(self, "pair", tuple(self.pair))

    @property
    def tau(self) -> float:
        return 2.0 * np.pi / self.omega_drive

    def coupling_matrix(self, dim: int) -> np.ndarray:
        i, j = self.pair
        m = np.zeros((dim, dim), dtype=complex)
        m[i, j] = m[j, i] = 1.0
        return m


def drive_hamiltonian(h0, drive: DriveSpec | None):
    """Callable t -> H(t) = h0 + mu*cos(Omega*t)*(|i><j| + |j><i|)."""
    h0 = require_hermitian(h0)
    if drive is None or drive.mu == 0:
        return lambda t: h0
    x = drive.coupling_matrix(h0.shape[0])

    def h(t):
        return h0 + drive.mu * np.cos(drive.omega_drive * t) * x

    return h


# ---------------------------------------------------------------------------
# propagator integration


def _rk4_unitary_samples(h_of_t, t0: float, n_samples: int, dt_sample: float,
                         substeps: int) -> np.ndarray:
    """RK4-integrate dU/dt = -i H(t) U, returning U at n_samples+1 sample times."""
    d = np.asarray(h_of_t(t0)).shape[0]
    out = np.empty((n_samples + 1, d, d), dtype=complex)
    u = np.eye(d, dtype=complex)
    out[0] = u
    h = dt_sample / substeps
    step = 0
    for k in range(n_samples):
        for _ in range(substeps):
            t = t0 + step * h
            k1 = -1j * (h_of_t(t) @ u)
            hm = -1j * h_of_t(t + 0.5 * h)
            k2 = hm @ (u + 0.5 * h * k1)
            k3 = hm @ (u + 0.5 * h * k2)
            k4 = -1j * (h_of_t(t + h) @ (u + h * k3))
            u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            step += 1
        out[k + 1] = u
    return out


def propagate_schrodinger(h_of_t, t0: float, t1: float, steps: int) -> np.ndarray:
    """U(t1, t0) by fixed-step RK4; deterministic for fixed inputs.

    Raises :class:`StepSizeError` when the result drifts off the unitary
    manifold beyond tolerance, advising a finer step.
    """
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    u = _rk4_unitary_samples(h_of_t, t0, 1, t1 - t0, steps)[1]
    defect = unitarity_defect(u)
    if defect > TOLERANCES.propagator_unitarity:
        raise StepSizeError(
            f"propagator unitarity defect {defect:.2e} exceeds "
            f"{TOLERANCES.propagator_unitarity:.0e}; increase `steps`"
        )
    return u


# ---------------------------------------------------------------------------
# Floquet decomposition


@dataclass(frozen=True)
class FloquetDecomposition:
    """Floquet Hamiltonian, quasienergies, and the sampled periodic operator.

    ``p_samples[k]`` is P(t_k, 0) on the uniform grid t_k = k*tau/m,
    k = 0..m (both endpoints; P at k = m equals the identity up to
    integration error).  ``u_samples`` keeps the propagator on the same
    grid.  The principal-branch Floquet Hamiltonian (no unfolding) is
    retained alongside the unfolded one for gauge-invariance checks.
    """

    hbar_floquet: np.ndarray
    quasi: Spectrum
    p_samples: np.ndarray
    tau: float
    u_samples: np.ndarray = field(repr=False, default=None)
    hbar_principal: np.ndarray = field(repr=False, default=None)

    @property
    def grid_m(self) -> int:
        return self.p_samples.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.hbar_floquet.shape[0]

    @property
    def omega_drive(self) -> float:
        return 2.0 * np.pi / self.tau

    def p_at_index(self, k: int) -> np.ndarray:
        return self.p_samples[k % self.grid_m]

    def p_at(self, t: float) -> np.ndarray:
        """P(t mod tau): exact on the sample grid, geodesic interpolation off it.

        The geodesic step P_k exp(frac * log(P_k† P_{k+1})) is unitary by
        construction, so trace preservation of downstream picture transforms
        is exact even between samples.
        """
        m = self.grid_m
        pos = (t / self.tau) * m
        k = int(np.floor(pos))
        frac = pos - k
        if abs(frac) < 1e-9 * max(1.0, abs(pos)) or 1 - frac < 1e-9 * max(1.0, abs(pos)):
            return self.p_samples[int(round(pos)) % m]
        p0 = self.p_samples[k % m]
        p1 = self.p_samples[(k + 1) % m]
        step = principal_unitary_log(p0.conj().T @ p1, tol=1e-6)
        v, w = np.linalg.eigh(step)
        return p0 @ ((w * np.exp(-1j * frac * v)) @ w.conj().T)

    def propagator_at(self, t: float) -> np.ndarray:
        """U(t,0) = P(t mod tau) exp(-i*Hbar*t)."""
        phases = np.exp(-1j * self.quasi.energies * t)
        v = self.quasi.vectors
        return self.p_at(t) @ ((v * phases) @ v.conj().T)


def _unfold_quasienergies(h_principal: np.ndarray, reference: np.ndarray,
                          omega: float) -> np.ndarray:
    """Shift each quasienergy by an integer multiple of omega so that the
    branch matched (by eigenvector overlap) to reference level k lands
    within omega/2 of the reference energy."""
    spec_p = hermitian_eigensystem(h_principal)
    spec_r = hermitian_eigensystem(reference)
    overlap = np.abs(spec_r.vectors.conj().T @ spec_p.vectors) ** 2
    rows, cols = scipy.optimize.linear_sum_assignment(-overlap)
    energies = spec_p.energies.copy()
    for k, p in zip(rows, cols):
        delta = spec_r.energies[k] - spec_p.energies[p]
        n = round(delta / omega)
        if abs(abs(delta / omega - n) - 0.5) < 1e-6:
            raise NumericalError(
                f"ambiguous branch unfolding for reference level {k} "
                f"(quasienergy {spec_p.energies[p]:.6f}): both adjacent "
                "branches are equidistant"
            )
        energies[p] = spec_p.energies[p] + n * omega
    return (spec_p.vectors * energies) @ spec_p.vectors.conj().T


def floquet_decompose(h_of_t, tau: float, reference, grid_m: int = 1024,
                      substeps: int = 16, unfold: bool = True) -> FloquetDecomposition:
    """Monodromy-based Floquet decomposition of a tau-periodic Hamiltonian.

    ``reference`` is the undriven Hamiltonian used for branch unfolding;
    pass ``unfold=False`` to keep the principal branch (eigenphases of the
    monodromy in (-pi, pi]).
    """
    reference = require_hermitian(reference)
    u_samples = _rk4_unitary_samples(h_of_t, 0.0, grid_m, tau / grid_m, substeps)
    u_tau = u_samples[-1]
    defect = unitarity_defect(u_tau)
    if defect > TOLERANCES.propagator_unitarity:
        raise StepSizeError(f"monodromy unitarity defect {defect:.2e}; refine the grid")

    k_log = principal_unitary_log(u_tau, tol=1e-6)
    h_principal = k_log / tau
    omega = 2.0 * np.pi / tau
    h_bar = _unfold_quasienergies(h_principal, reference, omega) if unfold else h_principal
    quasi = hermitian_eigensystem(h_bar)

    ts = np.arange(grid_m + 1) * (tau / grid_m)
    phases = np.exp(1j * np.outer(ts, quasi.energies))  # exp(+i eps t)
    v = quasi.vectors
    rot = np.einsum("ab,tb,cb->tac", v, phases, v.conj())
    p_samples = u_samples @ rot

    worst = max(unitarity_defect(p_samples[k]) for k in range(0, grid_m + 1, max(1, grid_m // 16)))
    if worst > 1e-7:
        raise NumericalError(f"periodic operator unitarity defect {worst:.2e}")
    return FloquetDecomposition(
        hbar_floquet=h_bar,
        quasi=quasi,
        p_samples=p_samples,
        tau=tau,
        u_samples=u_samples,
        hbar_principal=h_principal,
    )


# ---------------------------------------------------------------------------
# Fourier operator coefficients and the jump table


@dataclass(frozen=True)
class FourierOperatorSet:
    """Harmonics S(q) of P†(t) S P(t) = sum_q S(q) exp(i*q*Omega*t)."""

    q_max: int
    coefficients: np.ndarray  # shape (2*q_max+1, d, d); index q_max + q
    floor: float

    def op(self, q: int) -> np.ndarray:
        if abs(q) > self.q_max:
            raise ValidationError(f"|q|={abs(q)} exceeds q_max={self.q_max}")
        return self.coefficients[self.q_max + q]

    @property
    def qs(self) -> range:
        return range(-self.q_max, self.q_max + 1)


def fourier_operator_coefficients(decomp: FloquetDecomposition, s, q_max: int,
                                  floor: float | None = None) -> FourierOperatorSet:
    """Trapezoidal (DFT) Fourier coefficients of P†(t) S P(t) on the sample grid.

    Entries with magnitude below ``floor`` are offset to zero (default from
    the central tolerance configuration).
    """
    if q_max < 0:
        raise ValidationError("q_max must be >= 0")
    m = decomp.grid_m
    if m < 8 * max(q_max, 1):
        raise ResolutionError(
            f"grid of {m} samples/period is too coarse for q_max={q_max} "
            f"(need at least {8 * q_max})"
        )
    floor = TOLERANCES.fourier_floor if floor is None else floor
    s = np.asarray(s, dtype=complex)
    p = decomp.p_samples[:m]
    rotated = np.einsum("tba,bc,tcd->tad", p.conj(), s, p)
    spectrum = np.fft.fft(rotated, axis=0) / m
    coeffs = np.empty((2 * q_max + 1, s.shape[0], s.shape[1]), dtype=complex)
    for q in range(-q_max, q_max + 1):
        c = spectrum[q % m].copy()
        c[np.abs(c) < floor] = 0.0
        coeffs[q_max + q] = c
    return FourierOperatorSet(q_max=q_max, coefficients=coeffs, floor=floor)


def static_fourier_set(s) -> FourierOperatorSet:
    """Trivial harmonic content of a static (undriven) problem: S(0) = S."""
    s = np.asarray(s, dtype=complex)
    return FourierOperatorSet(q_max=0, coefficients=s[None, :, :].copy(), floor=0.0)


@dataclass(frozen=True)
class JumpOperatorTable:
    """Operators S(q, omega) indexed by harmonic q and quasienergy gap omega.

    ``gaps`` is the clustered, sorted gap list; ``entries`` maps
    (q, gap_index) to the projected operator.  All-zero projections are
    omitted.
    """

    gaps: np.ndarray
    entries: dict
    q_max: int

    def items(self):
        for (q, gi), op in self.entries.items():
            yield q, self.gaps[gi], op

    def op(self, q: int, gap_index: int, dim: int) -> np.ndarray:
        return self.entries.get((q, gap_index), np.zeros((dim, dim), dtype=complex))

    def gap_index(self, omega: float, tol: float = 1e-9) -> int:
        idx = int(np.argmin(np.abs(self.gaps - omega)))
        if abs(self.gaps[idx] - omega) > tol:
            raise ValidationError(f"{omega} is not a tabulated gap")
        return idx


def cluster_gaps(energies: np.ndarray, gap_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """All pairwise energy differences merged into clusters of width gap_tol.

    Returns (sorted cluster means, matrix g[a,b] = cluster index of e_a - e_b).
    Ties merge to the cluster mean.
    """
    d = len(energies)
    diffs = energies[:, None] - energies[None, :]
    flat = diffs.ravel()
    order = np.argsort(flat)
    labels = np.empty(flat.shape, dtype=int)
    means = []
    start = 0
    sorted_vals = flat[order]
    for i in range(1, len(sorted_vals) + 1):
        if i == len(sorted_vals) or sorted_vals[i] - sorted_vals[i - 1] > gap_tol:
            cluster = sorted_vals[start:i]
            labels[order[start:i]] = len(means)
            means.append(cluster.mean())
            start = i
    return np.array(means), labels.reshape(d, d)


def jump_operator_table(fset: FourierOperatorSet, quasi: Spectrum,
                        gap_tol: float | None = None) -> JumpOperatorTable:
    """Resolve each S(q) onto quasienergy gaps: S(q, omega) sums the
    |eps><eps| S(q) |eps'><eps'| blocks with eps - eps' in the omega cluster."""
    gap_tol = TOLERANCES.gap_cluster if gap_tol is None else gap_tol
    gaps, labels = cluster_gaps(quasi.energies, gap_tol)
    v = quasi.vectors
    entries = {}
    for q in fset.qs:
        sq = fset.op(q)
        if not np.any(sq):
            continue
        sq_eig = v.conj().T @ sq @ v
        for gi in range(len(gaps)):
            block = np.where(labels == gi, sq_eig, 0.0)
            if not np.any(block):
                continue
            entries[(q, gi)] = v @ block @ v.conj().T
    return JumpOperatorTable(gaps=gaps, entries=entries, q_max=fset.q_max)


# ---------------------------------------------------------------------------
# Magnus + BCH approximate propagator

# BCH series for log(e^X e^Y): (coefficient, word); a word "XXY" denotes the
# right-nested commutator [X,[X,Y]].
_BCH_TERMS = (
    (1.0, "X"),
    (1.0, "Y"),
    (1.0 / 2.0, "XY"),
    (1.0 / 12.0, "XXY"),
    (1.0 / 12.0, "YYX"),
    (-1.0 / 24.0, "YXXY"),
    (-1.0 / 720.0, "YYYYX"),
    (-1.0 / 720.0, "XXXXY"),
    (1.0 / 360.0, "XYYYX"),
    (1.0 / 360.0, "YXXXY"),
    (1.0 / 120.0, "YXYXY"),
    (1.0 / 120.0, "XYXYX"),
)


def bch_compose(x: np.ndarray, y: np.ndarray, terms: int = 12) -> np.ndarray:
    """Truncated Baker-Campbell-Hausdorff series for log(e^x e^y)."""
    if not (1 <= terms <= len(_BCH_TERMS)):
        raise ValidationError(f"bch terms must be in [1, {len(_BCH_TERMS)}]")
    ops = {"X": x, "Y": y}
    total = np.zeros_like(x)
    for coeff, word in _BCH_TERMS[:terms]:
        acc = ops[word[-1]]
        for ch in word[-2::-1]:
            m = ops[ch]
            acc = m @ acc - acc @ m
        total = total + coeff * acc
    return total


def _gl_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _drive_vector(omega_gap: float, omega_drive: float, t):
    """Pauli components of the interaction-picture drive shape on the pair block."""
    t = np.asarray(t, dtype=float)
    c = np.cos(omega_drive * t)
    return np.stack([c * np.cos(omega_gap * t), -c * np.sin(omega_gap * t),
                     np.zeros_like(t)], axis=-1)


def magnus_interaction_terms(drive: DriveSpec, omega_gap: float, t: float,
                             order: int = 3, gl_points: int = 64) -> list[np.ndarray]:
    """Pauli vectors of the first Magnus integrals Lambda_n(t), n = 1..order.

    The interaction-picture drive of a single coupled pair lives in su(2),
    so nested commutators reduce to cross products of the real coefficient
    vector a(t); each nested integral is evaluated with Gauss-Legendre
    nodes per dimension.
    """
    if not (1 <= order <= 3):
        raise ValidationError("magnus order must be 1, 2, or 3")
    xi, wi = _gl_unit(gl_points)
    t1 = t * xi                      # (n,)
    w1 = t * wi
    a1 = _drive_vector(omega_gap, drive.omega_drive, t1)
    out = [np.einsum("i,ik->k", w1, a1)]
    if order == 1:
        return out

    t2 = t1[:, None] * xi[None, :]   # (n, n)
    w2 = t1[:, None] * wi[None, :]
    a2 = _drive_vector(omega_gap, drive.omega_drive, t2)
    cross12 = np.cross(a1[:, None, :], a2)           # a(t1) x a(t2)
    out.append(0.5 * np.einsum("i,ij,ijk->k", w1, w2, cross12))
    if order == 2:
        return out

    t3 = t2[..., None] * xi[None, None, :]           # (n, n, n)
    w3 = t2[..., None] * wi[None, None, :]
    a3 = _drive_vector(omega_gap, drive.omega_drive, t3)
    inner = (np.cross(a2[:, :, None, :], a3)         # a2 x a3
             )
    term1 = np.cross(a1[:, None, None, :], inner)    # a1 x (a2 x a3)
    term2 = np.cross(cross12[:, :, None, :], a3)     # (a1 x a2) x a3
    out.append((1.0 / 6.0) * np.einsum("i,ij,ijl,ijlk->k", w1, w2, w3, term1 + term2))
    return out


def _pair_paulis(dim: int, pair: tuple[int, int]):
    i, j = pair
    sx = np.zeros((dim, dim), dtype=complex)
    sy = np.zeros((dim, dim), dtype=complex)
    sz = np.zeros((dim, dim), dtype=complex)
    sx[i, j] = sx[j, i] = 1.0
    sy[i, j] = -1j
    sy[j, i] = 1j
    sz[i, i] = 1.0
    sz[j, j] = -1.0
    return sx, sy, sz


def magnus_bch_propagator(drive: DriveSpec, h0, t: float, magnus_order: int = 3,
                          bch_terms: int = 12, gl_points: int = 64) -> np.ndarray:
    """Approximate U(t,0) = exp(E) with E = BCH(-i*t*h0, Magnus exponent).

    ``h0`` must be diagonal in the level basis the drive pair refers to.
    Emits a warning (never fails) when the leading neglected BCH order is
    no longer small against the kept terms.
    """
    h0 = require_hermitian(h0)
    if np.max(np.abs(h0 - np.diag(np.diag(h0)))) > 1e-12:
        raise ValidationError("magnus_bch_propagator requires a diagonal h0")
    energies = np.diag(h0).real
    i, j = drive.pair
    omega_gap = energies[i] - energies[j]
    dim = h0.shape[0]

    theta = -1j * t * h0
    sx, sy, sz = _pair_paulis(dim, drive.pair)
    paulis = (sx, sy, sz)
    lam = np.zeros((dim, dim), dtype=complex)
    if drive.mu > 0 and t != 0:
        vecs = magnus_interaction_terms(drive, omega_gap, t, magnus_order, gl_points)
        for n, vec in enumerate(vecs, start=1):
            block = sum(vec[k] * paulis[k] for k in range(3))
            lam = lam + (-1j * drive.mu) ** n * block

    _warn_if_bch_strained(theta, lam)
    e = bch_compose(theta, lam, bch_terms)
    m = 0.5j * (e - e.conj().T)  # Hermitian generator: e = -i m up to rounding
    spec = hermitian_eigensystem(m, tol=1e-8)
    return (spec.vectors * np.exp(-1j * spec.energies)) @ spec.vectors.conj().T


def _warn_if_bch_strained(theta: np.ndarray, lam: np.ndarray):
    nt = np.linalg.norm(theta, 2)
    nl = np.linalg.norm(lam, 2)
    # crude size of the first neglected (6th) BCH order
    estimate = nt**4 * nl**2 / 1440.0
    if estimate > 1.0 and nl > 0:
        warnings.warn(
            f"BCH truncation strained: |Theta|={nt:.2f}, |Lambda|={nl:.2e}; "
            "approximation error may grow",
            RuntimeWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# fidelity benchmarks


@dataclass(frozen=True)
class BenchmarkReport:
    """Fidelity series for the Magnus+BCH propagator and P periodicity."""

    times: np.ndarray
    fidelity_propagator: np.ndarray
    fidelity_periodicity: np.ndarray
    fidelity_periodicity_magnus: np.ndarray

    def rows(self):
        for k in range(len(self.times)):
            yield (self.times[k], self.fidelity_propagator[k],
                   self.fidelity_periodicity[k], self.fidelity_periodicity_magnus[k])


def benchmark_fidelities(drive: DriveSpec, h0, decomp: FloquetDecomposition,
                         grid_points: int = 65, substeps_per_point: int = 64,
                         magnus_order: int = 3, bch_terms: int = 12,
                         exact=None) -> BenchmarkReport:
    """Fidelities F[U_approx(t), U_exact(t)] on [0, tau] and the periodicity
    fidelity F[P(t,0), P(t+tau,tau)] over two periods of data.

    ``exact`` overrides the reference propagator (a callable t -> U(t,0));
    by default the drive Hamiltonian is RK4-integrated over two periods.
    The periodicity check is reported both for the reference propagator's P
    and for the Magnus-only P (the latter probes the approximation, the
    former the decomposition itself).
    """
    h0 = require_hermitian(h0)
    tau = decomp.tau
    n = grid_points - 1
    if exact is None:
        h_of_t = drive_hamiltonian(h0, drive)
        u_two = _rk4_unitary_samples(h_of_t, 0.0, 2 * n, tau / n, substeps_per_point)
    else:
        u_two = np.array([exact(k * tau / n) for k in range(2 * n + 1)])
    ts = np.arange(grid_points) * (tau / n)

    quasi = decomp.quasi
    v = quasi.vectors

    def exp_ihbar(t):
        return (v * np.exp(1j * quasi.energies * t)) @ v.conj().T

    u_tau = u_two[n]
    fid_u = np.empty(grid_points)
    fid_p = np.empty(grid_points)
    fid_pm = np.empty(grid_points)
    u_app_tau = magnus_bch_propagator(drive, h0, tau, magnus_order, bch_terms)
    h_app = principal_unitary_log(u_app_tau, tol=1e-6) / tau
    spec_app = hermitian_eigensystem(h_app)

    def exp_ih_app(t):
        return (spec_app.vectors * np.exp(1j * spec_app.energies * t)) @ spec_app.vectors.conj().T

    for k, t in enumerate(ts):
        u_app = magnus_bch_propagator(drive, h0, t, magnus_order, bch_terms)
        fid_u[k] = unitary_fidelity(u_app, u_two[k], tol=1e-6)
        p1 = u_two[k] @ exp_ihbar(t)
        p2 = u_two[n + k] @ u_tau.conj().T @ exp_ihbar(t)
        fid_p[k] = unitary_fidelity(p1, p2, tol=1e-6)
        u_app2 = magnus_bch_propagator(drive, h0, t + tau, magnus_order, bch_terms)
        pm1 = u_app @ exp_ih_app(t)
        pm2 = u_app2 @ u_app_tau.conj().T @ exp_ih_app(t)
        fid_pm[k] = unitary_fidelity(pm1, pm2, tol=1e-6)

    return BenchmarkReport(times=ts, fidelity_propagator=fid_u,
                           fidelity_periodicity=fid_p,
                           fidelity_periodicity_magnus=fid_pm)
