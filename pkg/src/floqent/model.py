"""Physical model of two driven, coupled qubits with local thermal noise.

Units convention (used everywhere in this package): time is measured in ns
and every energy-like parameter (biases, tunnel splittings, coupling, drive
amplitude and frequency, incoherent rates, temperature after conversion) is
an angular frequency in ns^-1, with hbar = 1.  The drive period is
T = 2*pi/omega.

Basis convention: the two-qubit computational basis is ordered

    (|gg>, |ge>, |eg>, |ee>)

where g/e are the lower/upper level of each qubit and the first letter
refers to qubit 1.  sigma_z is +1 on |g>, so the static single-qubit term
-eps/2 * sigma_z makes |g> the ground state for eps > 0.  Relaxation
(rate gamma_relax) drives e -> g; excitation (gamma_excite) drives g -> e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalState

# k_B * (1 mK) / hbar is 0.1309 rad/ns.  The quoted "GHz" parameter values
# are kept as-printed in angular ns^-1, which matches the paper's thermal
# excitation fractions only when temperature is converted with an extra
# 1/(2*pi); see README for the measurement behind this default.
KB_DEFAULT = 0.1309 / (2.0 * math.pi)  # ns^-1 per mK

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
RAISE = LOWER.conj().T                                     # |e><g|

BASIS_LABELS = ("gg", "ge", "eg", "ee")


def basis_index(label):
    """Index of a two-qubit basis state, e.g. ``basis_index("eg") == 2``."""
    return BASIS_LABELS.index(label)


def ket(label):
    """Unit column vector for a labelled basis state."""
    v = np.zeros(4, dtype=complex)
    v[basis_index(label)] = 1.0
    return v


def qubit_op(op, q):
    """Embed a single-qubit operator on qubit ``q`` (1 or 2)."""
    if q == 1:
        return np.kron(op, ID2)
    if q == 2:
        return np.kron(ID2, op)
    raise ValueError(f"qubit index must be 1 or 2, got {q}")


@dataclass(frozen=True)
class QubitParams:
    """Single-qubit parameters.

    ``gamma_excite=None`` means "derive thermally from the system
    temperature" via the detailed-balance relation; an explicit value
    overrides that.
    """

    delta: float
    eps: float
    gamma_relax: float = 0.0
    gamma_excite: float | None = None
    gamma_phi: float = 0.0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("tunnel splitting must be >= 0")
        for name in ("gamma_relax", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.gamma_excite is not None and self.gamma_excite < 0:
            raise ValueError("gamma_excite must be >= 0")


@dataclass(frozen=True)
class DriveParams:
    """Shared harmonic drive: eps_q(t) = eps_q + amplitude*cos(omega*t - phi0).

    Both qubits see the same amplitude and frequency; per-qubit amplitudes
    are intentionally not representable.
    """

    amplitude: float
    omega: float
    phi0: float = 0.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("drive frequency must be > 0")
        if self.amplitude < 0:
            raise ValueError("drive amplitude must be >= 0")
        object.__setattr__(self, "phi0", self.phi0 % (2.0 * math.pi))

    @property
    def period(self):
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class SystemParams:
    """Full parameter set of the coupled pair.

    ``temperature`` is the bath temperature already converted to the
    angular-energy units of the other parameters (tau_B = kb_conversion *
    T[mK]); ``kb_conversion`` records the constant used for that
    conversion so configurations stay reproducible.
    """

    qubit1: QubitParams
    qubit2: QubitParams
    g: float
    drive: DriveParams
    temperature: float = 0.0
    kb_conversion: float = KB_DEFAULT

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def qubit(self, q):
        if q == 1:
            return self.qubit1
        if q == 2:
            return self.qubit2
        raise ValueError(f"qubit index must be 1 or 2, got {q}")

    def gamma_excite(self, q):
        """Effective excitation rate of qubit ``q`` (derived when unset)."""
        qp = self.qubit(q)
        if qp.gamma_excite is not None:
            return qp.gamma_excite
        return thermal_excitation_rate(qp.gamma_relax, energy_gap(qp), self.temperature)

    def rates(self):
        """(relax1, excite1, phi1, relax2, excite2, phi2) effective rates."""
        return (
            self.qubit1.gamma_relax,
            self.gamma_excite(1),
            self.qubit1.gamma_phi,
            self.qubit2.gamma_relax,
            self.gamma_excite(2),
            self.qubit2.gamma_phi,
        )

    def max_rate(self):
        return max(self.rates())

    def total_decay(self, q):
        return self.qubit(q).gamma_relax + self.gamma_excite(q)


def energy_gap(qubit):
    """Static single-qubit gap sqrt(eps^2 + delta^2)."""
    return math.hypot(qubit.eps, qubit.delta)


def thermal_excitation_rate(gamma_relax, delta_e, tau_b):
    """Detailed-balance excitation rate gamma_relax * exp(-delta_e/tau_b).

    Zero temperature gives exactly zero.
    """
    if tau_b < 0:
        raise ValueError("temperature must be >= 0")
    if delta_e <= 0:
        raise ValueError("energy gap must be > 0")
    if tau_b == 0.0:
        return 0.0
    return gamma_relax * math.exp(-delta_e / tau_b)


def hamiltonian(t, params):
    """Time-dependent 4x4 Hamiltonian of the driven pair.

    H(t) = -1/2 sum_q [eps_q(t) sigma_z^(q) + delta_q sigma_x^(q)]
           - g/2 sigma_z^(1) sigma_z^(2)
    with eps_q(t) = eps_q + A cos(omega t - phi0).
    """
    d = params.drive
    v = d.amplitude * math.cos(d.omega * t - d.phi0)
    eps1 = params.qubit1.eps + v
    eps2 = params.qubit2.eps + v
    H = -0.5 * (
        eps1 * qubit_op(SIGMA_Z, 1)
        + params.qubit1.delta * qubit_op(SIGMA_X, 1)
        + eps2 * qubit_op(SIGMA_Z, 2)
        + params.qubit2.delta * qubit_op(SIGMA_X, 2)
    )
    H -= 0.5 * params.g * np.kron(SIGMA_Z, SIGMA_Z)
    return H


def lindblad_channels(params):
    """List of (rate, operator) pairs of the dissipator; zero rates skipped."""
    g1, e1, p1, g2, e2, p2 = params.rates()
    chans = []
    for q, (gr, ge, gp) in ((1, (g1, e1, p1)), (2, (g2, e2, p2))):
        if gp > 0:
            chans.append((gp, qubit_op(SIGMA_Z, q)))
        if gr > 0:
            chans.append((gr, qubit_op(LOWER, q)))
        if ge > 0:
            chans.append((ge, qubit_op(RAISE, q)))
    return chans


def _apply_channel(a, rho):
    ad = a.conj().T
    n = ad @ a
    return a @ rho @ ad - 0.5 * (n @ rho + rho @ n)


def dissipator(rho, params):
    """Lindblad dissipator of the pair: dephasing, relaxation and
    excitation channels on each qubit, acting on ``rho``."""
    out = np.zeros((4, 4), dtype=complex)
    for rate, a in lindblad_channels(params):
        out += rate * _apply_channel(a, rho)
    return out


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, eig_floor=-1e-10):
    """Validate the density-matrix invariants, raising NonPhysicalState.

    Positivity uses ``eig_floor`` as the allowed roundoff undershoot;
    transient states from the integrator are checked with a relaxed floor.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise NonPhysicalState(f"expected a 4x4 matrix, got shape {rho.shape}")
    asym = np.max(np.abs(rho - rho.conj().T))
    if asym > herm_tol:
        raise NonPhysicalState(f"Hermiticity violated: max asymmetry {asym:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise NonPhysicalState(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    if w[0] < eig_floor:
        raise NonPhysicalState(f"negative eigenvalue {w[0]:.3e}")
