import numpy as np
import pytest

from dwell.basis import full_basis, sector_basis
from dwell.dynamics import (
    LindbladModel,
    QuenchSpec,
    dephasing_model,
    lindblad_evolve_exact,
    lindblad_evolve_rk4,
    liouvillian,
    loss_model,
    quench_evolve,
    quenched_open_run,
)
from dwell.operators import ModelParams, annihilator, hamiltonian, hopping_op, number_op
from dwell.spectral import DensityMatrix, eigh, ground_state

DEFAULT_QUENCH = QuenchSpec(0.1, 1.0, 1.0, 1.0, 50.0, 501)


def bell_state_matrix():
    return DensityMatrix(sector_basis(1), np.full((2, 2), 0.5))


def test_quench_single_particle_is_flat():
    ts = quench_evolve(QuenchSpec(0.4, 1.0, 2.0, 1.0, 20.0, 101), 1)
    assert np.max(np.abs(ts.channel("negativity") - 0.5)) <= 1e-12


def test_quench_energy_identity():
    n = 4
    spec = DEFAULT_QUENCH
    basis = sector_basis(n)
    h0 = hamiltonian(basis, ModelParams(spec.j0, spec.u0))
    psi0, _ = ground_state(h0)
    e0 = float(psi0 @ h0.data @ psi0)
    k0 = float(psi0 @ hopping_op(basis).data @ psi0)
    expected = e0 - (spec.je - spec.j0) * k0
    energy = quench_evolve(spec, n).channel("energy")
    assert abs(energy[0] - expected) <= 1e-10
    assert np.ptp(energy) <= 1e-8 * max(1.0, abs(expected))
    # raising J lowers the energy: <K> is positive on the initial ground state
    assert expected < e0


def test_quench_without_change_is_stationary():
    ts = quench_evolve(QuenchSpec(0.7, 1.0, 0.7, 1.0, 10.0, 101), 3)
    for name in ("negativity", "energy", "negativity_avg"):
        assert np.ptp(ts.channel(name)) <= 1e-10


def test_quench_running_average_stabilizes():
    ts = quench_evolve(QuenchSpec(0.1, 1.0, 1.0, 1.0, 100.0, 2001), 3)
    avg = ts.channel("negativity_avg")
    tail = avg[len(avg) // 2 :]
    assert np.ptp(tail) < 0.05 * tail.mean()


def test_quench_refuses_degenerate_start():
    spec = QuenchSpec(0.0, 1.0, 1.0, 1.0, 5.0, 11)
    with pytest.raises(ValueError, match="degenerate"):
        quench_evolve(spec, 3)
    ts = quench_evolve(spec, 3, allow_degenerate=True)
    assert len(ts.times) == 11


def test_liouvillian_closed_system_spectrum():
    basis = sector_basis(2)
    h = hamiltonian(basis, ModelParams(1.0, 0.6))
    model = LindbladModel(h, ((number_op(basis, "A"), 0.0),), "dephasing")
    lam = np.linalg.eigvals(liouvillian(model))
    vals = eigh(h).eigenvalues
    expected = sorted((-1j * (a - b) for a in vals for b in vals), key=lambda z: (z.imag, z.real))
    got = sorted(lam, key=lambda z: (z.imag, z.real))
    assert np.max(np.abs(np.array(got) - np.array(expected))) <= 1e-10


def test_liouvillian_dimension_guard():
    basis = full_basis(15)  # dim 136, superoperator 18496
    with pytest.raises(ValueError, match="superoperator"):
        liouvillian(loss_model(basis, ModelParams(1.0, 1.0), 0.1))


def test_two_level_dephasing_closed_form():
    basis = sector_basis(1)
    model = dephasing_model(basis, ModelParams(0.0, 0.0), 0.8)
    rho0 = bell_state_matrix()
    for evolve in (lindblad_evolve_rk4, lindblad_evolve_exact):
        ts = evolve(model, rho0, 5.0, 41)
        expected = 0.5 * np.exp(-0.8 * ts.times)
        assert np.max(np.abs(ts.channel("negativity") - expected)) <= 1e-8


def test_amplitude_damping_closed_form():
    basis = full_basis(1)
    model = loss_model(basis, ModelParams(0.0, 0.0), 1.3)
    vec = np.zeros(3)
    vec[basis.index((1, 0))] = 1.0
    rho0 = DensityMatrix.from_pure(basis, vec)
    for evolve in (lindblad_evolve_rk4, lindblad_evolve_exact):
        ts = evolve(model, rho0, 4.0, 41)
        expected = np.exp(-1.3 * ts.times)
        assert np.max(np.abs(ts.channel("pop_N1") - expected)) <= 1e-8
        assert np.max(np.abs(ts.channel("pop_N0") - (1 - expected))) <= 1e-8


def test_closed_limit_matches_quench_evolution():
    n, t_max, samples = 3, 10.0, 51
    spec = QuenchSpec(0.1, 1.0, 1.0, 1.0, t_max, samples)
    unitary = quench_evolve(spec, n)
    open_run = quenched_open_run(spec, "dephasing", 0.0, n)
    for name in ("negativity", "energy"):
        assert np.max(np.abs(unitary.channel(name) - open_run.channel(name))) <= 1e-6
    exact = quenched_open_run(spec, "dephasing", 0.0, n, method="exact")
    assert np.max(np.abs(exact.channel("purity") - 1.0)) <= 1e-10


def test_rk4_matches_exact_dephasing():
    spec = QuenchSpec(0.1, 1.0, 1.0, 1.0, 10.0, 51)
    a = quenched_open_run(spec, "dephasing", 1.0, 3, method="rk4")
    b = quenched_open_run(spec, "dephasing", 1.0, 3, method="exact")
    for name in ("negativity", "energy", "trace", "purity"):
        assert np.max(np.abs(a.channel(name) - b.channel(name))) <= 1e-6


def test_trajectory_invariants():
    spec = QuenchSpec(1.0, 1.0, 1.0, 1.0, 8.0, 41)
    for channel, gamma in (("dephasing", 0.7), ("loss", 0.7)):
        ts = quenched_open_run(spec, channel, gamma, 3, method="rk4")
        assert np.max(np.abs(ts.channel("trace") - 1.0)) <= 1e-8
        assert np.max(ts.channel("herm_defect")) <= 1e-9
        assert np.min(ts.channel("min_eig")) >= -1e-7


def test_dephasing_conserves_populations_when_diagonal():
    # J_e = 0: H commutes with both number operators, diagonal frozen
    basis = sector_basis(3)
    model = dephasing_model(basis, ModelParams(0.0, 1.0), 0.5)
    psi0, _ = ground_state(hamiltonian(basis, ModelParams(1.0, 1.0)))
    rho0 = DensityMatrix.from_pure(basis, psi0)
    ts = lindblad_evolve_rk4(model, rho0, 6.0, 31)
    # diagonal is frozen, so energy under the diagonal H stays constant
    assert np.ptp(ts.channel("energy")) <= 1e-9
    assert np.max(np.abs(ts.channel("trace") - 1.0)) <= 1e-10


def test_dephasing_kills_negativity():
    spec = QuenchSpec(1.0, 1.0, 1.0, 1.0, 20.0, 101)
    ts = quenched_open_run(spec, "dephasing", 1.0, 4, method="exact")
    neg = ts.channel("negativity")
    assert neg[-1] < 1e-2 * neg[0]


def test_loss_decays_particle_number():
    gamma = 0.9
    # H = 0: the total particle number decays exactly exponentially
    basis = full_basis(3)
    model = loss_model(basis, ModelParams(0.0, 0.0), gamma)
    vec = np.zeros(basis.dim)
    vec[basis.index((2, 1))] = 1.0
    ts = lindblad_evolve_rk4(model, DensityMatrix.from_pure(basis, vec), 4.0, 41)
    expected = 3 * np.exp(-gamma * ts.times)
    assert np.max(np.abs(ts.channel("particle_number") - expected)) <= 1e-6

    # with a Hamiltonian the number is still nonincreasing
    spec = QuenchSpec(1.0, 1.0, 0.1, 1.0, 10.0, 81)
    ts = quenched_open_run(spec, "loss", gamma, 3, method="exact")
    assert np.max(np.diff(ts.channel("particle_number"))) <= 1e-9
    assert ts.channel("pop_N0")[-1] > 0.99


def test_dephasing_quench_keeps_early_entanglement_high():
    # weak decoherence: for t << 1/gamma the quench still drives the
    # negativity above its initial value
    spec = QuenchSpec(0.1, 1.0, 1.0, 1.0, 2.0, 101)
    ts = quenched_open_run(spec, "dephasing", 0.1, 3, method="exact")
    neg = ts.channel("negativity")
    assert np.max(neg) > neg[0]


def test_loss_embeds_initial_sector_state():
    spec = QuenchSpec(1.0, 1.0, 0.1, 1.0, 1.0, 5)
    ts = quenched_open_run(spec, "loss", 0.5, 3, method="exact")
    basis = sector_basis(3)
    psi0, _ = ground_state(hamiltonian(basis, ModelParams(1.0, 1.0)))
    top = DensityMatrix.from_pure(basis, psi0)
    from dwell.entanglement import negativity_pair

    assert ts.channel("pop_N3")[0] == pytest.approx(1.0, abs=1e-12)
    assert ts.channel("negativity")[0] == pytest.approx(
        negativity_pair(top).value, abs=1e-12
    )


def test_model_constructors_validate():
    with pytest.raises(ValueError):
        dephasing_model(full_basis(2), ModelParams(1.0, 1.0), 0.1)
    with pytest.raises(ValueError):
        loss_model(sector_basis(2), ModelParams(1.0, 1.0), 0.1)
    basis = sector_basis(2)
    with pytest.raises(ValueError):
        LindbladModel(
            hamiltonian(basis, ModelParams(1.0, 1.0)),
            ((number_op(basis, "A"), -1.0),),
            "dephasing",
        )


def test_quench_spec_validation():
    with pytest.raises(ValueError):
        QuenchSpec(0.1, 1.0, 1.0, 1.0, -1.0, 10)
    with pytest.raises(ValueError):
        QuenchSpec(0.1, 1.0, 1.0, 1.0, 1.0, 1)
    with pytest.raises(ValueError):
        quenched_open_run(QuenchSpec(0.1, 1, 1, 1, 1, 5), "heating", 0.1, 2)
