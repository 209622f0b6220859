import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from floqent import (
    KB_DEFAULT,
    QubitParams,
    SystemParams,
    DriveParams,
    check_density_matrix,
    dissipator,
    energy_gap,
    hamiltonian,
    thermal_excitation_rate,
)
from floqent.errors import NonPhysicalState
from floqent.model import (
    LOWER,
    RAISE,
    SIGMA_Z,
    basis_index,
    ket,
    lindblad_channels,
    qubit_op,
)

from conftest import make_params, random_hermitian, random_density_matrix


class TestHamiltonian:
    def test_decoupled_static_limit(self):
        p = make_params(delta1=0, delta2=0, g=0, amplitude=0, eps1=2.0, eps2=2.0,
                        gamma1=0, gamma2=0, temperature_mk=0)
        H = hamiltonian(0.7, p)
        assert_allclose(H, np.diag([-2.0, 0.0, 0.0, 2.0]), atol=1e-15)

    def test_phase_alignment_at_anchor(self):
        p = make_params(phi0=1.3)
        t = p.drive.phi0 / p.drive.omega
        H = hamiltonian(t, p)
        # cosine at maximum: diagonal built from eps_q + A exactly
        e1 = p.qubit1.eps + p.drive.amplitude
        e2 = p.qubit2.eps + p.drive.amplitude
        assert_allclose(H[0, 0], -(e1 + e2 + p.g) / 2, rtol=1e-15)

    def test_reference_corner_entry(self, fig1_params):
        # hand evaluation of the t=0 diagonal, written out independently
        expected = -(3.331 + 5.0 + 6.662 + 5.0 + 0.15) / 2.0
        assert_allclose(hamiltonian(0.0, fig1_params)[0, 0], expected, rtol=1e-14)
        assert expected == pytest.approx(-10.0715)

    def test_hermitian_and_periodic(self, fig1_params):
        rng = np.random.default_rng(3)
        T = fig1_params.drive.period
        for t in rng.uniform(0, 50, size=10):
            H = hamiltonian(t, fig1_params)
            assert np.max(np.abs(H - H.conj().T)) == 0.0
            assert np.max(np.abs(hamiltonian(t + T, fig1_params) - H)) < 1e-12


def brute_force_dissipator(rho, params):
    """Element-wise evaluation with explicit index loops (test oracle)."""
    g1, e1, p1, g2, e2, p2 = params.rates()
    ops = []
    for q, (gr, ge, gp) in ((1, (g1, e1, p1)), (2, (g2, e2, p2))):
        ops.append((gp, qubit_op(SIGMA_Z, q)))
        ops.append((gr, qubit_op(LOWER, q)))
        ops.append((ge, qubit_op(RAISE, q)))
    out = np.zeros((4, 4), dtype=complex)
    for rate, a in ops:
        if rate == 0:
            continue
        ad = a.conj().T
        for i in range(4):
            for j in range(4):
                gain = sum(a[i, k] * rho[k, l] * ad[l, j]
                           for k in range(4) for l in range(4))
                loss = sum((ad @ a)[i, k] * rho[k, j] + rho[i, k] * (ad @ a)[k, j]
                           for k in range(4))
                out[i, j] += rate * (gain - 0.5 * loss)
    return out


class TestDissipator:
    def test_zero_rates(self):
        p = make_params(gamma1=0, gamma2=0, temperature_mk=0)
        rng = np.random.default_rng(0)
        rho = random_density_matrix(rng)
        assert_allclose(dissipator(rho, p), np.zeros((4, 4)), atol=1e-15)

    def test_single_decay_channel(self):
        # relaxation of qubit 1 moves |ee> population to |ge> at rate gamma1
        p = make_params(gamma1=0.3, gamma2=0, temperature_mk=0)
        rho = np.outer(ket("ee"), ket("ee").conj())
        out = dissipator(rho, p)
        assert_allclose(out[basis_index("ge"), basis_index("ge")], 0.3, rtol=1e-14)
        assert_allclose(out[basis_index("ee"), basis_index("ee")], -0.3, rtol=1e-14)

    def test_matches_brute_force_oracle(self, fig1_params):
        rng = np.random.default_rng(42)
        p = make_params(gamma1=2e-3, gamma2=3e-3, gamma_phi1=1e-3,
                        gamma_phi2=5e-4, temperature_mk=40.0)
        for _ in range(10):
            rho = random_hermitian(rng)
            out = dissipator(rho, p)
            assert_allclose(out, brute_force_dissipator(rho, p), atol=1e-13)
            assert abs(np.trace(out)) < 1e-12

    def test_hermitian_traceless_on_random_inputs(self):
        rng = np.random.default_rng(9)
        p = make_params(gamma1=1e-2, gamma2=2e-2, gamma_phi1=3e-3,
                        gamma_phi2=1e-3, temperature_mk=60.0)
        for _ in range(100):
            out = dissipator(random_hermitian(rng), p)
            assert abs(np.trace(out)) < 1e-12
            assert np.max(np.abs(out - out.conj().T)) < 1e-13


class TestThermalRate:
    def test_zero_temperature(self):
        assert thermal_excitation_rate(1e-3, 2.0, 0.0) == 0.0

    def test_gap_equal_temperature(self):
        assert_allclose(thermal_excitation_rate(0.5, 2.0, 2.0),
                        0.5 * math.exp(-1.0), rtol=1e-15)

    def test_reference_ratio_at_30mk(self):
        # golden value computed from the configured conversion constant:
        # exp(-sqrt(3.331^2 + 0.1^2) / (0.1309/(2 pi) * 30))
        tau = KB_DEFAULT * 30.0
        ratio = thermal_excitation_rate(1.0, math.hypot(3.331, 0.1), tau)
        assert_allclose(ratio, 4.834446319289404e-03, rtol=1e-12)

    def test_derived_rate_through_system(self, fig1_params):
        tau = fig1_params.temperature
        expected = 1e-4 * math.exp(-math.hypot(3.331, 0.1) / tau)
        assert_allclose(fig1_params.gamma_excite(1), expected, rtol=1e-14)

    def test_explicit_rate_overrides(self):
        p = make_params(gamma_excite1=7e-5)
        assert p.gamma_excite(1) == 7e-5

    def test_invalid_gap(self):
        with pytest.raises(ValueError):
            thermal_excitation_rate(1.0, 0.0, 1.0)


class TestEnergyGap:
    def test_limits(self):
        assert energy_gap(QubitParams(delta=0.4, eps=0.0)) == 0.4
        assert energy_gap(QubitParams(delta=0.0, eps=1.7)) == 1.7
        assert energy_gap(QubitParams(delta=4.0, eps=3.0)) == 5.0


class TestValidation:
    def test_parameter_guards(self):
        with pytest.raises(ValueError):
            QubitParams(delta=-0.1, eps=1.0)
        with pytest.raises(ValueError):
            QubitParams(delta=0.1, eps=1.0, gamma_relax=-1.0)
        with pytest.raises(ValueError):
            DriveParams(amplitude=1.0, omega=0.0)
        with pytest.raises(ValueError):
            make_params(temperature_mk=-1.0)

    def test_phi0_wrapped(self):
        d = DriveParams(amplitude=1.0, omega=1.0, phi0=2 * math.pi + 0.25)
        assert_allclose(d.phi0, 0.25, atol=1e-12)

    def test_density_matrix_checks(self):
        check_density_matrix(np.eye(4) / 4.0)
        bad = np.eye(4) / 4.0
        bad[0, 1] = 1e-6
        with pytest.raises(NonPhysicalState):
            check_density_matrix(bad)
        with pytest.raises(NonPhysicalState):
            check_density_matrix(np.eye(4) / 2.0)
        neg = np.diag([1.2, -0.2, 0.0, 0.0]).astype(complex)
        with pytest.raises(NonPhysicalState):
            check_density_matrix(neg)


def test_relaxation_fixed_point_is_ground_state():
    # with no tunneling and zero temperature every state flows to |gg><gg|
    from floqent.dynamics import propagate_periods, IntegratorConfig

    p = make_params(delta1=0.0, delta2=0.0, gamma1=5e-3, gamma2=5e-3,
                    temperature_mk=0.0)
    rng = np.random.default_rng(5)
    rho0 = random_density_matrix(rng)
    n = int(25.0 / 5e-3 / p.drive.period) + 1
    rho = propagate_periods(p, IntegratorConfig(), rho0, n)[-1]
    fidelity = rho[0, 0].real
    assert fidelity > 1 - 1e-6


def test_channel_list_skips_zero_rates():
    p = make_params(gamma1=1e-3, gamma2=0.0, gamma_phi1=0.0, gamma_phi2=0.0,
                    temperature_mk=0.0)
    chans = lindblad_channels(p)
    assert len(chans) == 1
    assert chans[0][0] == 1e-3
