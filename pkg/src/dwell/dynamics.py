"""Quench and open-system dynamics of the two-well model.

Coherent quenches are propagated exactly through the spectrum of the
post-quench Hamiltonian.  Markovian dissipation (dephasing with number
jumps, one-body loss with annihilator jumps) is integrated two independent
ways: fixed-step RK4 on the vectorized master equation, and the spectral
decomposition of the dense Liouvillian, which serves as the accuracy
reference.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from dwell.basis import (
    FockBasis,
    check_same_basis,
    full_basis,
    sector_basis,
    sector_slices,
)
from dwell.entanglement import negativity_blocks, negativity_pair
from dwell.operators import (
    ModelParams,
    OperatorMatrix,
    annihilator,
    hamiltonian,
    number_op,
)
from dwell.spectral import DensityMatrix, eigh, ground_state

MAX_SUPEROP_DIM = 10_000
DEFAULT_STEP_CAP = 0.05  # bound on h * (2||H|| + sum gamma ||L+L||)
TRACE_DRIFT_TOL = 1e-8
MAX_HALVINGS = 20


@dataclass(frozen=True)
class QuenchSpec:
    """Sudden parameter change (j0, u0) -> (je, ue) at t = 0."""

    j0: float
    u0: float
    je: float
    ue: float
    t_max: float
    samples: int

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.j0, self.u0, self.je, self.ue)):
            raise ValueError("quench parameters must be finite")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.samples < 2:
            raise ValueError("need at least two samples")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus rate-weighted jump operators."""

    hamiltonian: OperatorMatrix
    jumps: tuple
    channel: str

    def __post_init__(self):
        for op, rate in self.jumps:
            check_same_basis(self.hamiltonian.basis, op.basis)
            if rate < 0:
                raise ValueError("jump rates must be non-negative")

    @property
    def basis(self) -> FockBasis:
        return self.hamiltonian.basis


@dataclass(frozen=True)
class TimeSeries:
    """Sampled scalar observables along one trajectory."""

    times: np.ndarray
    channels: dict

    def channel(self, name: str) -> np.ndarray:
        return self.channels[name]


def dephasing_model(basis: FockBasis, params: ModelParams, gamma: float) -> LindbladModel:
    """Number-conserving dephasing: jumps n_A, n_B at equal rate gamma."""
    if basis.kind != "sector":
        raise ValueError("dephasing acts within a fixed-N sector basis")
    jumps = ((number_op(basis, "A"), gamma), (number_op(basis, "B"), gamma))
    return LindbladModel(hamiltonian(basis, params), jumps, "dephasing")


def loss_model(basis: FockBasis, params: ModelParams, gamma: float) -> LindbladModel:
    """One-body loss: jumps b_A, b_B at equal rate gamma (full basis)."""
    if basis.kind != "full":
        raise ValueError("particle loss needs the loss-truncated full basis")
    jumps = ((annihilator(basis, "A"), gamma), (annihilator(basis, "B"), gamma))
    return LindbladModel(hamiltonian(basis, params), jumps, "loss")


def _running_average(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Trapezoid running mean t^-1 int_0^t, pinned to values[0] at t = 0."""
    avg = np.empty_like(values)
    avg[0] = values[0]
    integral = np.concatenate(
        ([0.0], np.cumsum(np.diff(times) * (values[1:] + values[:-1]) / 2))
    )
    avg[1:] = integral[1:] / times[1:]
    return avg


def quench_evolve(spec: QuenchSpec, n: int, allow_degenerate: bool = False) -> TimeSeries:
    """Unitary post-quench trajectory of negativity and energy.

    The pre-quench ground state is expanded over the post-quench eigenstates
    and each coefficient picks up its own phase; all channels then follow
    from the reconstructed state at the sample times.
    """
    basis = sector_basis(n)
    psi0, degenerate = ground_state(hamiltonian(basis, ModelParams(spec.j0, spec.u0)))
    if degenerate and not allow_degenerate:
        raise ValueError(
            "initial ground state is degenerate; pass allow_degenerate=True "
            "to evolve an arbitrary member of the ground level"
        )
    h_e = hamiltonian(basis, ModelParams(spec.je, spec.ue))
    dec = eigh(h_e)
    coeff = dec.eigenvectors.conj().T @ psi0

    times = np.linspace(0.0, spec.t_max, spec.samples)
    neg = np.empty(spec.samples)
    energy = np.empty(spec.samples)
    for k, t in enumerate(times):
        psi = dec.eigenvectors @ (np.exp(-1j * dec.eigenvalues * t) * coeff)
        rho = DensityMatrix(basis, np.outer(psi, psi.conj()), validate=False)
        neg[k] = negativity_pair(rho).value
        energy[k] = float(np.real(np.vdot(psi, h_e.data @ psi)))
    channels = {
        "negativity": neg,
        "negativity_avg": _running_average(times, neg),
        "energy": energy,
    }
    return TimeSeries(times, channels)


def liouvillian(model: LindbladModel) -> np.ndarray:
    """Dense superoperator on column-stacked rho.

    rho_dot = -i[H, rho] + sum_k gamma_k (L rho L+ - {L+L, rho} / 2).
    """
    d = model.basis.dim
    if d * d > MAX_SUPEROP_DIM:
        raise ValueError(
            f"superoperator dimension {d * d} exceeds {MAX_SUPEROP_DIM}; "
            "reduce the particle number"
        )
    eye = np.eye(d)
    h = model.hamiltonian.data
    lmat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    lmat = lmat.astype(complex)
    for op, rate in model.jumps:
        l = op.data
        ldl = l.conj().T @ l
        lmat += rate * (
            np.kron(l.conj(), l)
            - 0.5 * np.kron(eye, ldl)
            - 0.5 * np.kron(ldl.T, eye)
        )
    return lmat


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d, order="F")


def _sample_channels(model: LindbladModel, times, rhos) -> dict:
    basis = model.basis
    n_s = len(times)
    neg = np.empty(n_s)
    energy = np.empty(n_s)
    trace = np.empty(n_s)
    purity = np.empty(n_s)
    herm = np.empty(n_s)
    mineig = np.empty(n_s)
    extra = {}
    slices = sector_slices(basis) if basis.kind == "full" else None
    if slices is not None:
        extra["particle_number"] = np.empty(n_s)
        for m, _ in slices:
            extra[f"pop_N{m}"] = np.empty(n_s)
            extra[f"neg_N{m}"] = np.empty(n_s)
    for k, rho in enumerate(rhos):
        herm[k] = float(np.max(np.abs(rho - rho.conj().T)))
        sym = (rho + rho.conj().T) / 2
        trace[k] = float(np.real(np.trace(rho)))
        purity[k] = float(np.real(np.trace(rho @ rho)))
        mineig[k] = float(np.linalg.eigvalsh(sym)[0])
        energy[k] = float(np.real(np.trace(rho @ model.hamiltonian.data)))
        dm = DensityMatrix(basis, sym, validate=False)
        report = negativity_pair(dm)
        neg[k] = report.value
        if slices is not None:
            blocks = dict(report.per_block)
            total = 0.0
            for m, sl in slices:
                pop = float(np.real(np.trace(rho[sl, sl])))
                extra[f"pop_N{m}"][k] = pop
                extra[f"neg_N{m}"][k] = blocks[m]
                total += m * pop
            extra["particle_number"][k] = total
    channels = {
        "negativity": neg,
        "negativity_avg": _running_average(np.asarray(times), neg),
        "energy": energy,
        "trace": trace,
        "purity": purity,
        "herm_defect": herm,
        "min_eig": mineig,
    }
    channels.update(extra)
    return channels


def _rate_scale(model: LindbladModel) -> float:
    scale = 2.0 * np.linalg.norm(model.hamiltonian.data, 2)
    for op, rate in model.jumps:
        ldl = op.data.conj().T @ op.data
        scale += rate * np.linalg.norm(ldl, 2)
    return scale


def lindblad_evolve_rk4(
    model: LindbladModel,
    rho0: DensityMatrix,
    t_max: float,
    samples: int,
    step_cap: float = DEFAULT_STEP_CAP,
) -> TimeSeries:
    """Fixed-step RK4 on the vectorized master equation.

    The step keeps h * (2||H|| + sum gamma ||L+L||) at step_cap, and is
    halved until the worst trace drift over the run is below 1e-8.
    """
    check_same_basis(model.basis, rho0.basis)
    lmat = liouvillian(model)
    d = model.basis.dim
    times = np.linspace(0.0, t_max, samples)
    dt = times[1] - times[0]
    scale = _rate_scale(model)
    n_sub = max(1, int(np.ceil(dt * scale / step_cap)))

    for attempt in range(MAX_HALVINGS + 1):
        h = dt / n_sub
        v = _vec(rho0.data).astype(complex)
        rhos = [rho0.data.astype(complex)]
        worst_drift = 0.0
        for _ in times[1:]:
            for _ in range(n_sub):
                k1 = lmat @ v
                k2 = lmat @ (v + 0.5 * h * k1)
                k3 = lmat @ (v + 0.5 * h * k2)
                k4 = lmat @ (v + h * k3)
                v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = _unvec(v, d)
            rhos.append(rho)
            worst_drift = max(worst_drift, abs(np.real(np.trace(rho)) - 1.0))
        if worst_drift <= TRACE_DRIFT_TOL:
            return TimeSeries(times, _sample_channels(model, times, rhos))
        n_sub *= 2
    raise RuntimeError(
        f"trace drift {worst_drift:.3e} after {MAX_HALVINGS} step halvings; "
        "the master equation appears ill-conditioned"
    )


def lindblad_evolve_exact(
    model: LindbladModel, rho0: DensityMatrix, t_max: float, samples: int
) -> TimeSeries:
    """Trajectory from the Liouvillian eigendecomposition.

    Falls back to repeated scaling-and-squaring exponentials if the
    eigenvector matrix is too ill-conditioned to invert reliably.
    """
    check_same_basis(model.basis, rho0.basis)
    lmat = liouvillian(model)
    d = model.basis.dim
    times = np.linspace(0.0, t_max, samples)
    v0 = _vec(rho0.data).astype(complex)

    w, vr = np.linalg.eig(lmat)
    if np.linalg.cond(vr) < 1e10:
        c0 = np.linalg.solve(vr, v0)
        rhos = [_unvec(vr @ (np.exp(w * t) * c0), d) for t in times]
    else:
        prop = expm(lmat * (times[1] - times[0]))
        rhos = [_unvec(v0, d)]
        v = v0
        for _ in times[1:]:
            v = prop @ v
            rhos.append(_unvec(v, d))
    return TimeSeries(times, _sample_channels(model, times, rhos))


def quenched_open_run(
    spec: QuenchSpec,
    channel: str,
    gamma: float,
    n: int,
    method: str = "rk4",
    allow_degenerate: bool = False,
    step_cap: float = DEFAULT_STEP_CAP,
) -> TimeSeries:
    """Quench into a dissipative channel ("dephasing" or "loss").

    Prepares the ground state of H(j0, u0), then evolves it under
    H(je, ue) plus the chosen dissipator.  Loss runs embed the fixed-N
    ground state as the top block of the loss-truncated full space.
    """
    sec = sector_basis(n)
    psi0, degenerate = ground_state(hamiltonian(sec, ModelParams(spec.j0, spec.u0)))
    if degenerate and not allow_degenerate:
        raise ValueError(
            "initial ground state is degenerate; pass allow_degenerate=True"
        )
    params_e = ModelParams(spec.je, spec.ue)
    if channel == "dephasing":
        model = dephasing_model(sec, params_e, gamma)
        rho0 = DensityMatrix.from_pure(sec, psi0)
    elif channel == "loss":
        full = full_basis(n)
        vec = np.zeros(full.dim)
        vec[: n + 1] = psi0
        model = loss_model(full, params_e, gamma)
        rho0 = DensityMatrix.from_pure(full, vec)
    else:
        raise ValueError(f"unknown channel {channel!r}")
    if method == "rk4":
        return lindblad_evolve_rk4(model, rho0, spec.t_max, spec.samples, step_cap)
    if method == "exact":
        return lindblad_evolve_exact(model, rho0, spec.t_max, spec.samples)
    raise ValueError(f"unknown method {method!r}")
