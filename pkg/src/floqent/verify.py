"""Self-contained verification suite: invariants plus cross-oracle checks.

Each check produces (name, value, bound, passed); the suite is green iff
every value stays under its bound.  Exposed through the CLI ``verify``
subcommand with a machine-readable JSON report.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import dynamics, rwa
from .bessel import bessel_j_range
from .concurrence import concurrence
from .dynamics import IntegratorConfig, evolve, monodromy
from .model import (
    DriveParams,
    KB_DEFAULT,
    QubitParams,
    SystemParams,
    dissipator,
    hamiltonian,
    ket,
)
from .series import SeriesConfig, averaged_concurrence_nonres
from .sweep import numeric_cbar


@dataclass
class CheckResult:
    name: str
    value: float
    bound: float
    passed: bool


def _pinned_params(eps1=3.331, eps2=6.662, gamma=1e-4, gamma_phi=0.0):
    return SystemParams(
        qubit1=QubitParams(delta=0.1, eps=eps1, gamma_relax=gamma, gamma_phi=gamma_phi),
        qubit2=QubitParams(delta=0.15, eps=eps2, gamma_relax=gamma, gamma_phi=gamma_phi),
        g=0.15,
        drive=DriveParams(amplitude=5.0, omega=1.0),
        temperature=30.0 * KB_DEFAULT,
    )


def _bell():
    v = (ket("gg") + ket("ee")) / np.sqrt(2.0)
    return np.outer(v, v.conj())


def _werner(p):
    return p * _bell() + (1 - p) * np.eye(4) / 4.0


def _check_concurrence_units():
    yield "concurrence_bell", abs(concurrence(_bell()) - 1.0), 1e-12
    prod = np.outer(ket("ge"), ket("ge").conj())
    yield "concurrence_product", concurrence(prod), 1e-12
    yield "concurrence_mixed", concurrence(np.eye(4) / 4.0), 1e-12
    yield "concurrence_werner_half", abs(concurrence(_werner(0.5)) - 0.25), 1e-12


def _check_model():
    p = _pinned_params()
    rng = np.random.default_rng(7)
    T = p.drive.period
    worst = 0.0
    for _ in range(20):
        t = rng.uniform(0, 100.0)
        worst = max(worst, float(np.max(np.abs(
            hamiltonian(t + T, p) - hamiltonian(t, p)))))
    yield "hamiltonian_periodicity", worst, 1e-12
    worst_tr = worst_herm = 0.0
    for _ in range(20):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a + a.conj().T
        out = dissipator(rho, p)
        worst_tr = max(worst_tr, abs(complex(np.trace(out))))
        worst_herm = max(worst_herm, float(np.max(np.abs(out - out.conj().T))))
    yield "dissipator_traceless", worst_tr, 1e-12
    yield "dissipator_hermitian", worst_herm, 1e-12


def _check_integration():
    p = _pinned_params(gamma=5e-3)
    cfg = IntegratorConfig()
    rho0 = np.zeros((4, 4), complex)
    rho0[0, 0] = 1.0
    T = p.drive.period
    traj = evolve(rho0, 0.0, 50 * T, p, cfg, store_every=64)
    traces = np.array([abs(np.trace(r) - 1.0) for r in traj.states])
    herm = np.array([np.max(np.abs(r - r.conj().T)) for r in traj.states])
    mineig = min(float(np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0])
                 for r in traj.states)
    yield "trace_drift_50_periods", float(traces.max()), 50 * 1e-9
    yield "hermiticity_drift", float(herm.max()), 1e-10
    yield "positivity_floor", max(0.0, -mineig), 1e-8
    M = monodromy(p, cfg)
    vid = np.eye(4, dtype=complex).reshape(16)
    yield "monodromy_trace_preserving", float(
        np.max(np.abs(M.conj().T @ vid - vid))), 1e-9
    rho_ss = dynamics.fixed_point(M)
    yield "fixed_point_self_consistency", float(
        np.max(np.abs(M @ rho_ss.reshape(16) - rho_ss.reshape(16)))), 1e-8
    p0 = SystemParams(
        qubit1=QubitParams(delta=0.1, eps=3.331),
        qubit2=QubitParams(delta=0.15, eps=6.662),
        g=0.15, drive=DriveParams(amplitude=5.0, omega=1.0))
    # unitarity of the exact flow is only visible below the discretization
    # error, so this one check runs on a finer grid
    sv = np.linalg.svd(
        monodromy(p0, IntegratorConfig(steps_per_period=8192)), compute_uv=False)
    yield "monodromy_unitary_case", float(np.max(np.abs(sv - 1.0))), 1e-8


def random_rwa_point(rng):
    """Random rates/splittings at biases clear of single-qubit windows."""
    return SystemParams(
        qubit1=QubitParams(delta=rng.uniform(0.05, 0.15),
                           eps=rng.uniform(3.30, 3.36),
                           gamma_relax=10 ** rng.uniform(-5, -2),
                           gamma_phi=10 ** rng.uniform(-6, -3)),
        qubit2=QubitParams(delta=rng.uniform(0.1, 0.2),
                           eps=rng.uniform(6.60, 6.70),
                           gamma_relax=10 ** rng.uniform(-5, -2),
                           gamma_phi=10 ** rng.uniform(-6, -3)),
        g=rng.uniform(0.05, 0.2),
        drive=DriveParams(amplitude=rng.uniform(0.0, 6.0), omega=1.0),
        temperature=rng.uniform(0.0, 1.0),
    )


def _check_rwa():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        worst = max(worst, rwa.stationarity_residual(random_rwa_point(rng)))
    yield "rwa_stationarity", worst, 1e-12
    worst_margin = 0.0
    for _ in range(1000):
        g1, g2, gp1, gp2 = 10 ** rng.uniform(-6, -1, size=4)
        gphi1, gphi2 = 10 ** rng.uniform(-7, -2, size=2)
        p = SystemParams(
            qubit1=QubitParams(delta=0.1, eps=3.331, gamma_relax=g1,
                               gamma_excite=gp1, gamma_phi=gphi1),
            qubit2=QubitParams(delta=0.15, eps=6.662, gamma_relax=g2,
                               gamma_excite=gp2, gamma_phi=gphi2),
            g=0.15, drive=DriveParams(amplitude=5.0, omega=1.0))
        ss = rwa.steady_state_rwa(p)
        m1 = ss.r11 * ss.r44 - abs(ss.r14) ** 2
        m2 = ss.r11 * ss.r44 - ss.r22 * ss.r33
        m3 = ss.hg.real - 0.5 * (g1 + gp1 + g2 + gp2)
        worst_margin = max(worst_margin, -min(m1, m2, m3))
    yield "rwa_inequality_chain", worst_margin, 1e-14
    report = rwa.validate_xi_integrals(_pinned_params())
    yield "xi_integral_consistency", report.max_deviation, 1e-8


def _check_oracle_agreement():
    cfg = IntegratorConfig()
    scfg = SeriesConfig()
    p_off = _pinned_params(eps1=3.1, eps2=6.2)
    c_num = numeric_cbar(p_off, cfg)
    c_ana = averaged_concurrence_nonres(p_off, scfg)
    yield "nonres_vs_numeric_offresonance", abs(c_num - c_ana), 0.05
    p_on = _pinned_params(eps1=10.0 / 3.0, eps2=20.0 / 3.0)
    c_num = numeric_cbar(p_on, cfg)
    c_rwa = rwa.concurrence_resonant(p_on, scfg)
    yield "rwa_vs_numeric_resonance", abs(c_num - c_rwa), 0.05


def _check_bessel():
    vals = bessel_j_range(5.0, -40, 40)
    yield "bessel_sum_of_squares", abs(float(np.sum(vals**2)) - 1.0), 1e-12


def run_verify(out_path=None):
    """Run every check; returns (results, all_passed)."""
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for gen in (_check_concurrence_units, _check_model, _check_integration,
                    _check_rwa, _check_oracle_agreement, _check_bessel):
            try:
                for name, value, bound in gen():
                    results.append(CheckResult(name, float(value), float(bound),
                                               bool(value < bound)))
            except Exception as exc:  # a crashed check is a failed check
                results.append(CheckResult(
                    f"{gen.__name__.lstrip('_')}:{type(exc).__name__}",
                    float("inf"), 0.0, False))
    ok = all(r.passed for r in results)
    if out_path is not None:
        out_path.write_text(json.dumps([asdict(r) for r in results], indent=2))
    return results, ok
