"""Fixed-step RK4 propagation of two-component Schrodinger states.

Integrates i d/dt psi = H(t) psi (hbar = 1) with the classical fourth-order
Runge-Kutta rule on a fixed grid.  No step-size adaptation: determinism and
a clean convergence order matter more here than raw efficiency, and the
schedules are smooth.  The adjoint pair (psi, psi_hat) propagated under
(H, H^dag) keeps the biorthogonal overlap <psi_hat|psi> exactly constant in
exact arithmetic, which makes the overlap drift a sharp integrator check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counterdiabatic import BasisTrajectory, _refine
from .errors import NonFiniteState

__all__ = [
    "StateTrajectory",
    "propagate",
    "propagate_pair",
    "branch_projection",
    "convergence_order",
]


@dataclass(frozen=True)
class StateTrajectory:
    """States on a time grid, with the adjoint companion when pair-propagated."""

    grid: np.ndarray
    states: np.ndarray
    adjoint_states: np.ndarray | None = None

    def __post_init__(self):
        self.grid.setflags(write=False)
        self.states.setflags(write=False)
        if self.adjoint_states is not None:
            self.adjoint_states.setflags(write=False)

    @property
    def p1(self) -> np.ndarray:
        """Ground-state population |psi_1|^2."""
        return np.abs(self.states[:, 0]) ** 2

    @property
    def p2(self) -> np.ndarray:
        """Excited-state population |psi_2|^2."""
        return np.abs(self.states[:, 1]) ** 2

    @property
    def norm2(self) -> np.ndarray:
        """Squared Euclidean norm; decays under Gamma > 0, constant otherwise."""
        return self.p1 + self.p2

    @property
    def biorth_overlap(self) -> np.ndarray:
        """Conserved overlap <psi_hat(t)|psi(t)> of a propagated pair."""
        if self.adjoint_states is None:
            raise ValueError("no adjoint states: use propagate_pair")
        return np.einsum("tj,tj->t", self.adjoint_states.conj(), self.states)


def _check_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid must be a 1-d array with at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def _sample_hamiltonian(hfun, times: np.ndarray) -> np.ndarray:
    """Evaluate H on all times, batched when the callable broadcasts."""
    try:
        h = np.asarray(hfun(times), dtype=complex)
        if h.shape == (len(times), 2, 2):
            return h
    except Exception:
        pass
    out = np.empty((len(times), 2, 2), dtype=complex)
    for i, t in enumerate(times):
        out[i] = hfun(float(t))
    return out


def _rk4(a: np.ndarray, y0: np.ndarray, steps: np.ndarray, where: str) -> np.ndarray:
    """RK4 sweep for y' = A(t) y given A pre-sampled on nodes and midpoints.

    a has shape (2 n - 1, 2, 2): a[2k] at node k, a[2k+1] at the midpoint.
    Raises NonFiniteState as soon as a component stops being finite.
    """
    n = len(steps) + 1
    out = np.empty((n, 2), dtype=complex)
    y = y0
    out[0] = y
    # blow-ups surface as NonFiniteState below, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k, dt in enumerate(steps):
            a0, am, a1 = a[2 * k], a[2 * k + 1], a[2 * k + 2]
            k1 = a0 @ y
            k2 = am @ (y + (0.5 * dt) * k1)
            k3 = am @ (y + (0.5 * dt) * k2)
            k4 = a1 @ (y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            if not np.isfinite(y).all():
                raise NonFiniteState(
                    f"non-finite {where} state after step {k + 1} of {len(steps)}; "
                    "reduce dt or check the schedule"
                )
            out[k + 1] = y
    return out


def propagate(hfun, psi0, grid) -> StateTrajectory:
    """Propagate psi0 through i psi' = H(t) psi on a fixed grid.

    hfun maps time to a 2x2 array; callables that broadcast over a time
    array are sampled in one call, anything else is sampled pointwise.
    """
    grid = _check_grid(grid)
    psi0 = np.asarray(psi0, dtype=complex).reshape(2)
    a = -1j * _sample_hamiltonian(hfun, _refine(grid))
    states = _rk4(a, psi0, np.diff(grid), "forward")
    return StateTrajectory(grid=grid, states=states)


def propagate_pair(hfun, psi0, psihat0, grid) -> StateTrajectory:
    """Co-propagate psi under H and the adjoint companion psi_hat under H^dag.

    <psi_hat|psi> is a constant of motion of the exact flow, whatever the
    non-Hermitian H; its numerical drift measures integrator error.
    """
    grid = _check_grid(grid)
    psi0 = np.asarray(psi0, dtype=complex).reshape(2)
    psihat0 = np.asarray(psihat0, dtype=complex).reshape(2)
    h = _sample_hamiltonian(hfun, _refine(grid))
    steps = np.diff(grid)
    states = _rk4(-1j * h, psi0, steps, "forward")
    adjoint = _rk4(-1j * h.conj().transpose(0, 2, 1), psihat0, steps, "adjoint")
    return StateTrajectory(grid=grid, states=states, adjoint_states=adjoint)


def branch_projection(traj: StateTrajectory, basis: BasisTrajectory) -> np.ndarray:
    """Branch amplitudes c_n(t) = <l_n(t)|psi(t)> along a trajectory.

    Because the basis closes, sum_n c_n(t) r_n(t) rebuilds psi(t) exactly.
    """
    if traj.grid.shape != basis.grid.shape or not np.allclose(traj.grid, basis.grid):
        raise ValueError("trajectory and basis live on different grids")
    return np.einsum("tnj,tj->tn", basis.left.conj(), traj.states)


def convergence_order(hfun, psi0, window, n0: int = 512) -> float:
    """Empirical RK4 order from endpoint errors at n0 and 2 n0 steps.

    The reference is the 8 n0 run; returns log2(error(n0) / error(2 n0)),
    which sits near 4 inside the asymptotic regime.
    """
    t0, t1 = window
    runs = {}
    for n in (n0, 2 * n0, 8 * n0):
        grid = np.linspace(t0, t1, n + 1)
        runs[n] = propagate(hfun, psi0, grid).states[-1]
    e1 = np.linalg.norm(runs[n0] - runs[8 * n0])
    e2 = np.linalg.norm(runs[2 * n0] - runs[8 * n0])
    if e1 == 0.0 or e2 == 0.0:
        raise ValueError("errors vanished; convergence order undefined")
    return float(np.log2(e1 / e2))
