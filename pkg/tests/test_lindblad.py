import math

import numpy as np
import pytest

from qmemwitness import (
    DensityMatrix,
    InvalidDimensionError,
    InvalidSubsystemError,
    LindbladModel,
    build_generator,
    channel_superoperator,
    choi_from_superoperator,
    entropy_triple,
    evolve,
    evolve_choi,
    max_entangled_state,
    partial_trace,
    reduced_choi_trajectory,
    von_neumann_entropy,
)
from oracles import (
    binary_entropy,
    partial_trace_out_memory_loops,
    qubit_damping_amplitude,
    qudit_generator_dense,
    random_density_matrix,
)


def extended_initial(d: int) -> DensityMatrix:
    """|Phi+>_SA (x) |0><0|_M arranged as S (x) M (x) A."""
    phi = max_entangled_state(d).data.reshape(d, d, d, d)
    mem = np.zeros((2, 2), dtype=complex)
    mem[0, 0] = 1.0
    rho = np.einsum("mn,sapq->smapnq", mem, phi)
    return DensityMatrix(rho.reshape(2 * d * d, 2 * d * d), (d, 2, d))


class TestModelValidation:
    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidDimensionError):
            LindbladModel(d=1)
        with pytest.raises(InvalidDimensionError):
            LindbladModel(d=2, omega=0.0)
        with pytest.raises(InvalidDimensionError):
            LindbladModel(d=2, gamma=-0.1)
        with pytest.raises(InvalidDimensionError):
            LindbladModel(d=2, convention="nope")


class TestGenerator:
    def test_matches_dense_oracle(self, rng):
        for d, conv in ((2, "spin"), (3, "truncated-oscillator"), (4, "spin")):
            model = LindbladModel(d=d, omega=1.0, gamma=0.05, convention=conv)
            gen = build_generator(model)
            rho = random_density_matrix(rng, [d, 2, d])
            expected = qudit_generator_dense(d, 1.0, 0.05, conv, rho)
            assert np.abs(gen(rho) - expected).max() < 1e-12

    def test_matches_oracle_on_extended_initial_state(self):
        model = LindbladModel(d=2, omega=1.0, gamma=0.05)
        rho0 = extended_initial(2)
        expected = qudit_generator_dense(2, 1.0, 0.05, "spin", rho0.data)
        assert np.abs(build_generator(model)(rho0) - expected).max() < 1e-12

    def test_traceless_and_hermiticity_preserving(self, rng):
        model = LindbladModel(d=3, omega=1.0, gamma=0.0)
        gen = build_generator(model)
        rho = random_density_matrix(rng, [3, 2, 3])
        deriv = gen(rho)
        assert abs(np.trace(deriv)) < 1e-12
        assert np.abs(deriv - deriv.conj().T).max() < 1e-12

    def test_ground_state_is_stationary(self, rng):
        d = 3
        model = LindbladModel(d=d, omega=0.7, gamma=0.4)
        ground_sm = np.zeros((2 * d, 2 * d), dtype=complex)
        ground_sm[0, 0] = 1.0
        rho = np.kron(ground_sm, random_density_matrix(rng, [d]))
        assert np.abs(build_generator(model)(rho)).max() < 1e-12

    def test_rejects_wrong_shape(self):
        model = LindbladModel(d=2)
        with pytest.raises(InvalidSubsystemError):
            build_generator(model)(np.eye(4) / 4)


class TestEvolve:
    def test_t0_returns_initial_state_exactly(self):
        model = LindbladModel(d=2, gamma=0.1)
        rho0 = extended_initial(2)
        traj = evolve(model, rho0, [0.0])
        assert np.array_equal(traj.states[0].data, rho0.data)

    def test_rabi_swap_closed_form(self):
        # gamma = 0, d = 2: the single-excitation sector oscillates at
        # frequency omega; S population follows cos^2(omega t) / 2
        model = LindbladModel(d=2, omega=1.0, gamma=0.0)
        rho0 = extended_initial(2)
        ts = np.linspace(0.0, math.pi, 41)
        traj = evolve(model, rho0, ts)
        for t, state in zip(traj.times, traj.states):
            rho_s = partial_trace(state, {0}).data
            rho_m = partial_trace(state, {1}).data
            assert abs(rho_s[1, 1].real - math.cos(t) ** 2 / 2) < 1e-8
            assert abs(rho_m[1, 1].real - math.sin(t) ** 2 / 2) < 1e-8

    def test_trace_and_positivity_along_flow(self):
        model = LindbladModel(d=3, omega=1.0, gamma=0.3)
        rho0 = extended_initial(3)
        traj = evolve(model, rho0, np.linspace(0.0, 6.0, 61))
        for state in traj.states:
            assert abs(np.trace(state.data) - 1.0) < 1e-8
            assert np.linalg.eigvalsh(state.data).min() > -1e-8

    def test_grid_validation(self):
        model = LindbladModel(d=2)
        rho0 = extended_initial(2)
        with pytest.raises(InvalidSubsystemError):
            evolve(model, rho0, [1.0, 2.0])
        with pytest.raises(InvalidSubsystemError):
            evolve(model, rho0, [0.0, 2.0, 1.0])

    def test_rejects_wrong_dims(self):
        model = LindbladModel(d=3)
        with pytest.raises(InvalidSubsystemError):
            evolve(model, extended_initial(2), [0.0, 1.0])


class TestReducedChoiTrajectory:
    def test_t0_is_max_entangled(self):
        model = LindbladModel(d=3, gamma=0.2)
        (t0, s0), = reduced_choi_trajectory(model, [0.0])
        assert t0 == 0.0
        assert np.abs(s0.data - max_entangled_state(3).data).max() < 1e-12

    def test_trace_and_untouched_ancilla(self):
        d = 3
        model = LindbladModel(d=d, omega=1.0, gamma=0.15)
        traj = reduced_choi_trajectory(model, np.linspace(0.0, 5.0, 26))
        for _, state in traj:
            assert abs(np.trace(state.data) - 1.0) < 1e-8
            anc = partial_trace(state, {1}).data
            assert np.abs(anc - np.eye(d) / d).max() < 1e-8

    def test_swap_revival_of_system_entropy(self):
        model = LindbladModel(d=2, omega=1.0, gamma=0.0)
        traj = reduced_choi_trajectory(model, np.linspace(0.0, math.pi, 81))
        s_sys = [entropy_triple(s).s_system for _, s in traj]
        assert s_sys[40] < 1e-6                      # dip at t = pi/2
        assert abs(s_sys[-1] - math.log(2)) < 1e-6   # revival at t = pi

    def test_matches_amplitude_damping_closed_form(self):
        # for d = 2 the reduced map is amplitude damping with the damped
        # exchange amplitude; entropies follow in closed form
        omega, gamma = 1.0, 0.2
        model = LindbladModel(d=2, omega=omega, gamma=gamma)
        ts = np.linspace(0.0, 8.0, 81)
        traj = reduced_choi_trajectory(model, ts)
        u = qubit_damping_amplitude(omega, gamma, ts)
        for (t, state), ut in zip(traj, u):
            trip = entropy_triple(state)
            s_sys_expected = binary_entropy(abs(ut) ** 2 / 2.0)
            neg_sa_expected = math.log(2) - binary_entropy((1.0 - abs(ut) ** 2) / 2.0)
            assert abs(trip.s_system - s_sys_expected) < 1e-7
            assert abs(trip.neg_cond_sa - neg_sa_expected) < 1e-7

    def test_memory_trace_matches_loop_oracle(self):
        model = LindbladModel(d=3, omega=1.0, gamma=0.25)
        rho0 = extended_initial(3)
        traj = evolve(model, rho0, [0.0, 1.7])
        full = traj.states[-1]
        direct = partial_trace(full, {0, 2}).data
        loops = partial_trace_out_memory_loops(full.data, 3)
        assert np.abs(direct - loops).max() < 1e-12

    def test_dense_queries_match_grid(self):
        model = LindbladModel(d=2, omega=1.0, gamma=0.1)
        grid = np.linspace(0.0, 4.0, 41)
        ev = evolve_choi(model, grid)
        st_grid = ev.states[20]
        st_query = ev.state_at(grid[20])
        assert np.abs(st_grid.data - st_query.data).max() == 0.0
        # off-grid query sits between neighbours, consistent with both
        mid = 0.5 * (grid[20] + grid[21])
        st_mid = ev.state_at(mid)
        assert abs(np.trace(st_mid.data) - 1.0) < 1e-9


class TestChannelSuperoperator:
    def test_identity_at_t0(self):
        model = LindbladModel(d=3, gamma=0.2)
        assert np.array_equal(channel_superoperator(model, 0.0), np.eye(9))

    def test_consistent_with_state_evolution(self, rng):
        d = 2
        model = LindbladModel(d=d, omega=1.0, gamma=0.3)
        t = 1.3
        sup = channel_superoperator(model, t)
        rho_s = random_density_matrix(rng, [d])
        via_superop = (sup @ rho_s.ravel()).reshape(d, d)
        # same map applied through the joint evolution with a spectator ancilla
        mem = np.zeros((2, 2), dtype=complex)
        mem[0, 0] = 1.0
        rho0 = DensityMatrix(
            np.kron(np.kron(rho_s, mem), np.eye(d) / d), (d, 2, d)
        )
        traj = evolve(model, rho0, [0.0, t])
        via_evolve = partial_trace(traj.states[-1], {0}).data
        assert np.abs(via_superop - via_evolve).max() < 1e-8

    def test_choi_positive_and_normalized(self):
        for d in (2, 3):
            model = LindbladModel(d=d, omega=1.0, gamma=0.1)
            for t in (0.4, 2.1):
                choi = choi_from_superoperator(channel_superoperator(model, t))
                assert abs(np.trace(choi) - 1.0) < 1e-8
                assert np.linalg.eigvalsh(choi).min() > -1e-8

    def test_choi_matches_extended_evolution(self):
        d = 3
        model = LindbladModel(d=d, omega=1.0, gamma=0.2)
        t = 1.1
        choi = choi_from_superoperator(channel_superoperator(model, t))
        (_, sa), = reduced_choi_trajectory(model, [0.0, t])[1:]
        assert np.abs(choi - sa.data).max() < 1e-8

    def test_rejects_negative_time(self):
        with pytest.raises(InvalidSubsystemError):
            channel_superoperator(LindbladModel(d=2), -1.0)


class TestGridConvergence:
    def test_entropy_agrees_on_shared_points_under_refinement(self):
        model = LindbladModel(d=2, omega=1.0, gamma=0.05)
        coarse = reduced_choi_trajectory(model, np.linspace(0.0, 6.0, 31))
        fine = reduced_choi_trajectory(model, np.linspace(0.0, 6.0, 61))
        for k, (t, state) in enumerate(coarse):
            s_c = von_neumann_entropy(partial_trace(state, {0}))
            s_f = von_neumann_entropy(partial_trace(fine[2 * k][1], {0}))
            assert abs(s_c - s_f) < 1e-6
