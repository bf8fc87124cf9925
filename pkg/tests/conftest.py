"""Shared fixtures: the shipped default scenarios.

Atom scenario: chirped Gaussian sweep of a decaying two-level atom,
Gamma = 2 pi x 0.002 rad/ns, Omega_0 = 2 pi x 0.1 rad/ns,
a = (2 pi)^2 x 0.01 /ns^2, b = (2 pi)^2 x 0.00025 /ns^2, window +-5/sqrt(a).

Trap scenario: harmonic expansion omega_0 = 2 pi x 250 rad/s down to
omega_f = 2 pi x 2.5 rad/s in t_f = 25 ms, mass 1.44e-25 kg, q0 = 1 um.
"""

import numpy as np
import pytest

from sta import ChirpedGaussianParams, ExpansionSpec, chirped_gaussian, plan_expansion

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def atom_params():
    return ChirpedGaussianParams(
        rabi_peak=TWO_PI * 0.1,
        width_a=TWO_PI**2 * 0.01,
        chirp_b=TWO_PI**2 * 0.00025,
        gamma=TWO_PI * 0.002,
    )


@pytest.fixture(scope="session")
def atom(atom_params):
    return chirped_gaussian(atom_params, window_factor=5.0)


@pytest.fixture(scope="session")
def atom_grid(atom):
    # dt = 0.01 ns: coarse enough to keep the suite fast, fine enough that
    # RK4 error sits far below every tolerance used here.
    return atom.grid(0.01)


@pytest.fixture(scope="session")
def expansion_spec():
    return ExpansionSpec(
        omega0=TWO_PI * 250.0,
        omegaf=TWO_PI * 2.5,
        tf=0.025,
        mass=1.44e-25,
        q0=1e-6,
        v0=0.0,
    )


@pytest.fixture(scope="session")
def expansion_plan(expansion_spec):
    return plan_expansion(expansion_spec)
