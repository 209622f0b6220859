"""Wootters concurrence and its steady-state averages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import IntegratorConfig, steady_state
from .errors import NonPhysicalState
from .model import SIGMA_Y, check_density_matrix

_YY = np.kron(SIGMA_Y, SIGMA_Y).real  # real-valued matrix


@dataclass(frozen=True)
class AveragingConfig:
    """Grid sizes for the pulse-phase / in-period averages."""

    n_phase: int = 16
    n_time: int = 64

    def __post_init__(self):
        if self.n_phase < 16:
            raise ValueError("n_phase must be >= 16")
        if self.n_time < 64:
            raise ValueError("n_time must be >= 64")


def concurrence(rho, herm_tol=1e-9, trace_tol=1e-7):
    """Wootters concurrence of a two-qubit density matrix.

    Computed from the eigenvalues of rho * rho_tilde directly (no matrix
    square roots); tiny negative eigenvalues from roundoff are clamped to
    zero before the square root.

    Raises NonPhysicalState when Hermiticity or trace deviate beyond the
    given tolerances.
    """
    rho = np.asarray(rho, dtype=complex)
    check_density_matrix(rho, herm_tol=herm_tol, trace_tol=trace_tol, eig_floor=-1e-6)
    rho_tilde = _YY @ rho.conj() @ _YY
    evals = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sqrt(np.clip(evals.real, 0.0, None))
    lam.sort()
    c = lam[-1] - lam[0] - lam[1] - lam[2]
    return float(min(max(c, 0.0), 1.0))


def concurrence_trajectory(traj):
    """Concurrence along a trajectory (array matching ``traj.times``)."""
    return np.array([concurrence(r) for r in traj.states])


def averaged_concurrence_numeric(params, integrator_cfg=None, averaging_cfg=None):
    """Concurrence of the dissipative steady state, averaged over the
    pulse length and initial drive phase.

    The steady state of a phase-shifted drive is the time-shifted steady
    state (the one-period propagator anchored at t0 = phi0/omega does not
    depend on phi0 at all), so the phase average collapses exactly onto
    the time average over a single period; one anchored evaluation covers
    the whole phi0 grid.
    """
    integrator_cfg = integrator_cfg or IntegratorConfig()
    averaging_cfg = averaging_cfg or AveragingConfig()
    traj = steady_state(params, integrator_cfg, n_samples=averaging_cfg.n_time)
    # drop the duplicated closing point: uniform samples over one period
    values = [concurrence(r) for r in traj.states[:-1]]
    return float(np.mean(values))
