import numpy as np
import pytest

from floqent import (
    DriveParams,
    IntegratorConfig,
    KB_DEFAULT,
    QubitParams,
    SystemParams,
)


def make_params(eps1=3.331, eps2=6.662, delta1=0.1, delta2=0.15, g=0.15,
                amplitude=5.0, omega=1.0, phi0=0.0, gamma1=1e-4, gamma2=1e-4,
                gamma_phi1=0.0, gamma_phi2=0.0, temperature_mk=30.0,
                gamma_excite1=None, gamma_excite2=None):
    return SystemParams(
        qubit1=QubitParams(delta=delta1, eps=eps1, gamma_relax=gamma1,
                           gamma_excite=gamma_excite1, gamma_phi=gamma_phi1),
        qubit2=QubitParams(delta=delta2, eps=eps2, gamma_relax=gamma2,
                           gamma_excite=gamma_excite2, gamma_phi=gamma_phi2),
        g=g,
        drive=DriveParams(amplitude=amplitude, omega=omega, phi0=phi0),
        temperature=KB_DEFAULT * temperature_mk,
    )


@pytest.fixture
def fig1_params():
    """Time-dynamics reference point (strong drive, eps2 = 2*eps1)."""
    return make_params()


@pytest.fixture
def integrator():
    return IntegratorConfig()


def random_density_matrix(rng, pure=False):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    if pure:
        v = a[:, 0] / np.linalg.norm(a[:, 0])
        return np.outer(v, v.conj())
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return a + a.conj().T
