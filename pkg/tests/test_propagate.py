"""Fixed-step RK4 propagation of two-component states.

Proves:
  - pure-decay analytic law to integrator precision
  - norm conservation for constant Hermitian generators
  - matrix-exponential oracle agreement for random constant non-Hermitian
    generators, single and paired runs
  - conserved biorthogonal overlap along the swept-atom scenario
  - branch projection: exactness, reconstruction, grid mismatch rejection
  - transitionless driving keeps branch leakage tiny; the bare drive leaks
  - empirical convergence order ~4 and the 16x error drop per halving
  - population bounds, monotone decay, non-finite and bad-grid rejection
  - pointwise fallback for Hamiltonian callables that cannot broadcast
"""

import numpy as np
import pytest
import scipy.linalg

from sta import (
    NonFiniteState,
    StateTrajectory,
    adiabatic_basis,
    bare_hamiltonian,
    branch_projection,
    cd_hamiltonian,
    constant_schedule,
    convergence_order,
    mixing_angle_trajectory,
    propagate,
    propagate_pair,
)

RNG = np.random.default_rng(23)


def test_pure_decay_analytic():
    g = 2.0 * np.pi * 0.002
    s = constant_schedule(0.0, 0.0, g, window=(0.0, 80.0))
    grid = s.grid(0.01)
    traj = propagate(lambda t: bare_hamiltonian(s, t), [0.0, 1.0], grid)
    assert np.max(np.abs(traj.p2 - np.exp(-g * grid))) < 1e-9
    np.testing.assert_allclose(traj.p2[-1], 0.3659, atol=2e-4)
    assert np.all(np.diff(traj.norm2) <= 1e-15)  # monotone under pure decay


def test_constant_hermitian_norm():
    m = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    h = m + m.conj().T
    psi0 = np.array([0.6, 0.8j])
    # eigenvalues reach ~4, so dt must be small for truncation to sit below 1e-10
    traj = propagate(lambda t: h, psi0, np.linspace(0.0, 5.0, 8001))
    assert np.max(np.abs(traj.norm2 - 1.0)) < 1e-10


def test_matrix_exponential_oracle():
    h = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    psi0 = np.array([1.0, 0.5 - 0.2j], dtype=complex)
    psi0 /= np.linalg.norm(psi0)
    grid = np.linspace(0.0, 2.0, 801)
    traj = propagate(lambda t: h, psi0, grid)
    for k in (200, 800):
        exact = scipy.linalg.expm(-1j * h * grid[k]) @ psi0
        assert np.linalg.norm(traj.states[k] - exact) < 1e-8


def test_pair_overlap_random_constant():
    h = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    psi0 = np.array([1.0, -0.3 + 0.4j], dtype=complex)
    psihat0 = np.array([0.2j, 1.1], dtype=complex)
    psihat0 /= np.conj(np.vdot(psihat0, psi0))  # <psihat|psi> = 1
    grid = np.linspace(0.0, 2.0, 801)
    traj = propagate_pair(lambda t: h, psi0, psihat0, grid)
    assert np.max(np.abs(traj.biorth_overlap - 1.0)) < 1e-10
    exact = scipy.linalg.expm(-1j * h * grid[-1]) @ psi0
    exact_hat = scipy.linalg.expm(-1j * h.conj().T * grid[-1]) @ psihat0
    assert np.linalg.norm(traj.states[-1] - exact) < 1e-8
    assert np.linalg.norm(traj.adjoint_states[-1] - exact_hat) < 1e-8


def test_pair_overlap_swept_atom(atom):
    grid = atom.grid(0.005)
    basis = adiabatic_basis(atom, mixing_angle_trajectory(atom, grid))
    traj = propagate_pair(lambda t: bare_hamiltonian(atom, t),
                          basis.right[0, 0], basis.left[0, 0], grid)
    drift = np.max(np.abs(traj.biorth_overlap - traj.biorth_overlap[0]))
    assert drift < 1e-8


def test_branch_projection_exact(atom, atom_grid):
    basis = adiabatic_basis(atom, mixing_angle_trajectory(atom, atom_grid))
    traj = StateTrajectory(grid=atom_grid.copy(), states=basis.right[:, 0, :].copy())
    c = branch_projection(traj, basis)
    assert np.max(np.abs(c[:, 0] - 1.0)) < 1e-13
    assert np.max(np.abs(c[:, 1])) < 1e-13


def test_branch_projection_grid_mismatch(atom, atom_grid):
    basis = adiabatic_basis(atom, mixing_angle_trajectory(atom, atom_grid))
    other = np.linspace(0.0, 1.0, len(atom_grid))
    traj = StateTrajectory(grid=other, states=np.zeros((len(other), 2), dtype=complex))
    with pytest.raises(ValueError):
        branch_projection(traj, basis)


def test_transitionless_leakage(atom, atom_grid):
    basis = adiabatic_basis(atom, mixing_angle_trajectory(atom, atom_grid))
    corrected = propagate(lambda t: cd_hamiltonian(atom, t), basis.right[0, 0], atom_grid)
    leak = np.abs(branch_projection(corrected, basis)[:, 1])
    assert np.max(leak) < 1e-5
    bare = propagate(lambda t: bare_hamiltonian(atom, t), basis.right[0, 0], atom_grid)
    assert np.max(np.abs(branch_projection(bare, basis)[:, 1])) > 0.05


def test_projection_reconstructs_state(atom, atom_grid):
    basis = adiabatic_basis(atom, mixing_angle_trajectory(atom, atom_grid))
    traj = propagate(lambda t: cd_hamiltonian(atom, t), basis.right[0, 0], atom_grid)
    c = branch_projection(traj, basis)
    rebuilt = np.einsum("tn,tnj->tj", c, basis.right)
    assert np.max(np.abs(rebuilt - traj.states)) < 1e-10


def test_convergence_order_and_ratio(atom):
    hfun = lambda t: bare_hamiltonian(atom, t)
    order = convergence_order(hfun, [0.0, 1.0], atom.window, n0=256)
    assert 3.7 < order < 4.3
    runs = {}
    for n in (256, 512, 2048):
        runs[n] = propagate(hfun, [0.0, 1.0], np.linspace(*atom.window, n + 1)).states[-1]
    ratio = np.linalg.norm(runs[256] - runs[2048]) / np.linalg.norm(runs[512] - runs[2048])
    assert 2.0**3.7 < ratio < 2.0**4.3


def test_population_bounds(atom, atom_grid):
    traj = propagate(lambda t: bare_hamiltonian(atom, t), [0.0, 1.0], atom_grid)
    assert np.all(traj.p1 >= 0.0) and np.all(traj.p2 >= 0.0)
    assert np.all(traj.norm2 <= 1.0 + 1e-9)


def test_non_finite_state_raises():
    h = np.diag([0.0, 1e8j])  # exploding anti-damping
    with pytest.raises(NonFiniteState):
        propagate(lambda t: h, [0.0, 1.0], np.linspace(0.0, 16.0, 17))


def test_grid_validation():
    h = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        propagate(lambda t: h, [1.0, 0.0], np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        propagate(lambda t: h, [1.0, 0.0], np.array([0.0]))
    with pytest.raises(ValueError):
        propagate(lambda t: h, [1.0, 0.0], np.array([1.0, 0.5, 0.0]))


def test_scalar_only_hamiltonian_fallback(atom):
    def scalar_only(t):
        bool(t < 0)  # errors on array input, forcing the pointwise sampling path
        return bare_hamiltonian(atom, float(t))

    grid = atom.grid(0.05)
    a = propagate(scalar_only, [0.0, 1.0], grid)
    b = propagate(lambda t: bare_hamiltonian(atom, t), [0.0, 1.0], grid)
    np.testing.assert_array_equal(a.states, b.states)


def test_overlap_requires_pair(atom, atom_grid):
    traj = propagate(lambda t: bare_hamiltonian(atom, t), [0.0, 1.0], atom_grid)
    with pytest.raises(ValueError):
        traj.biorth_overlap
