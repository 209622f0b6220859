"""Resonant oracle: rotating-wave effective model near the two-qubit
resonance eps_1 + eps_2 + K*omega ~ 0.

The closed-form steady state of the time-independent effective master
equation gives the averaged concurrence and the width of the
entanglement-death window around the resonance.  The effective generator
is also built explicitly so the closed form can be checked for exact
stationarity.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j_range
from .errors import NoEntanglementWindow, OutOfTheory
from .model import LOWER, RAISE, SIGMA_Z, qubit_op
from .series import ResonanceInfo, SeriesConfig, _warn_perturbative

__all__ = [
    "RwaElements",
    "RwaSteadyState",
    "select_K12",
    "rwa_elements",
    "steady_state_rwa",
    "rwa_liouvillian",
    "stationarity_residual",
    "reconstruct_original_frame",
    "concurrence_resonant",
    "dip_width",
    "validate_xi_integrals",
    "XiValidationReport",
]


@dataclass(frozen=True)
class RwaElements:
    """Effective-Hamiltonian matrix elements at the selected resonance."""

    h11: float
    h22: float
    h33: float
    h44: float
    h14: float
    K12: int
    delta12: float


@dataclass(frozen=True)
class RwaSteadyState:
    """Closed-form unique steady state of the effective master equation."""

    r11: float
    r22: float
    r33: float
    r44: float
    r14: complex
    hg: complex
    Z: float

    def populations(self):
        return np.array([self.r11, self.r22, self.r33, self.r44])


def select_K12(params):
    """(K, detuning): integer minimizing |eps1 + eps2 + K*omega|.

    Ties (half-integer ratios) break toward the smaller |K|.
    """
    w = params.drive.omega
    s = params.qubit1.eps + params.qubit2.eps
    f = s / w
    kf = math.floor(f)
    best = None
    for k in (-kf, -(kf + 1)):
        resid = s + k * w
        cand = (abs(resid), abs(k), k)
        if best is None or cand < best:
            best = cand
            best_k = k
    return best_k, s + best_k * w


def _guard_single_qubit(params, ks, guard):
    """Check every eps_q ± g + k*omega denominator over the sum range."""
    w = params.drive.omega
    g = params.g
    for q in (1, 2):
        eps = params.qubit(q).eps
        for sign, extended in ((+1.0, False), (-1.0, True)):
            dens = eps + sign * g + ks * w
            i = np.argmin(np.abs(dens))
            if abs(dens[i]) <= guard:
                info = ResonanceInfo("single", int(ks[i]), float(dens[i]),
                                     qubit=q, extended=extended)
                raise OutOfTheory(
                    "single-qubit resonance overlaps the two-qubit one: "
                    f"{info.label()} residual {dens[i]:.3e}", info=info,
                )


@functools.lru_cache(maxsize=256)
def _rwa_elements_cached(params, k_max, guard):
    w = params.drive.omega
    g = params.g
    d1, d2 = params.qubit1.delta, params.qubit2.delta
    e1, e2 = params.qubit1.eps, params.qubit2.eps
    x = params.drive.amplitude / w
    K12, delta12 = select_K12(params)

    ks = np.arange(-k_max, k_max + 1)
    _guard_single_qubit(params, ks, guard)
    J = bessel_j_range(x, -k_max, k_max)
    Jshift = bessel_j_range(x, K12 - k_max, K12 + k_max)[::-1]  # J_{K12-k}

    d1p = 1.0 / (e1 + g + ks * w)
    d1m = 1.0 / (e1 - g + ks * w)
    d2p = 1.0 / (e2 + g + ks * w)
    d2m = 1.0 / (e2 - g + ks * w)
    J2 = J * J
    h11 = -0.25 * float(np.sum(J2 * (d1**2 * d1p + d2**2 * d2p)))
    h22 = -0.25 * float(np.sum(J2 * (d1**2 * d1m - d2**2 * d2p)))
    h33 = 0.25 * float(np.sum(J2 * (d1**2 * d1p - d2**2 * d2m)))
    h44 = 0.25 * float(np.sum(J2 * (d1**2 * d1m + d2**2 * d2m)))
    comp = 1.0 / ((e1 + ks * w) ** 2 - g**2) + 1.0 / ((e2 + ks * w) ** 2 - g**2)
    h14 = d1 * d2 * g / 4.0 * float(np.sum(J * Jshift * comp))
    return RwaElements(h11, h22, h33, h44, h14, K12, delta12)


def rwa_elements(params, cfg=None):
    """Effective matrix elements (truncated sums over the photon index)."""
    cfg = cfg or SeriesConfig()
    _warn_perturbative(params)
    k_max, guard = cfg.resolve(params)
    return _rwa_elements_cached(params, k_max, guard)


def steady_state_rwa(params, cfg=None):
    """Closed-form steady state of the effective master equation."""
    g1 = params.qubit1.gamma_relax
    g2 = params.qubit2.gamma_relax
    gp1 = params.gamma_excite(1)
    gp2 = params.gamma_excite(2)
    if g1 + gp1 <= 0 or g2 + gp2 <= 0:
        raise ValueError("each qubit needs a nonzero total decay rate")
    el = rwa_elements(params, cfg)
    return _steady_state_from_elements(params, el)


def _steady_state_from_elements(params, el):
    g1 = params.qubit1.gamma_relax
    g2 = params.qubit2.gamma_relax
    gp1 = params.gamma_excite(1)
    gp2 = params.gamma_excite(2)
    gphi = params.qubit1.gamma_phi + params.qubit2.gamma_phi
    total = g1 + gp1 + g2 + gp2
    hg = 2.0 * gphi + 0.5 * (g1 + gp1) + 0.5 * (g2 + gp2) \
        - 1j * (el.h11 - el.h44 - el.delta12)
    hg2 = abs(hg) ** 2
    W = 2.0 * el.h14**2 * hg.real / total
    a = gp1 + g2
    b = g1 + gp2
    Z = (g1 + gp1) * (g2 + gp2) * hg2 + el.h14**2 * 2.0 * total * hg.real
    r11 = (a * b * W + g1 * g2 * hg2) / Z
    r22 = (b * b * W + g1 * gp2 * hg2) / Z
    r33 = (a * a * W + gp1 * g2 * hg2) / Z
    r44 = (a * b * W + gp1 * gp2 * hg2) / Z
    r14 = 1j * el.h14 * (g1 * g2 - gp1 * gp2) * hg / Z
    return RwaSteadyState(r11, r22, r33, r44, r14, hg, Z)


def _rwa_channels(params):
    g1 = params.qubit1.gamma_relax
    g2 = params.qubit2.gamma_relax
    gp1 = params.gamma_excite(1)
    gp2 = params.gamma_excite(2)
    P1, P2 = qubit_op(LOWER, 1), qubit_op(LOWER, 2)
    M1, M2 = qubit_op(RAISE, 1), qubit_op(RAISE, 2)
    Z1, Z2 = qubit_op(SIGMA_Z, 1), qubit_op(SIGMA_Z, 2)
    return [
        (params.qubit1.gamma_phi, Z1),
        (params.qubit2.gamma_phi, Z2),
        (g1 / 2.0, P1),
        (gp1 / 2.0, M1),
        (g2 / 2.0, P2),
        (gp2 / 2.0, M2),
        (g1 / 2.0, P1 @ Z2),
        (gp1 / 2.0, M1 @ Z2),
        (g2 / 2.0, Z1 @ P2),
        (gp2 / 2.0, Z1 @ M2),
    ]


def rwa_liouvillian(params, elements):
    """Explicit 16x16 generator of the effective master equation.

    Used as the independent stationarity oracle for the closed-form
    steady state.
    """
    ID4 = np.eye(4, dtype=complex)
    H = np.diag([
        elements.h11 - elements.delta12 / 2.0,
        elements.h22,
        elements.h33,
        elements.h44 + elements.delta12 / 2.0,
    ]).astype(complex)
    H[0, 3] = H[3, 0] = elements.h14
    L = -1j * (np.kron(H, ID4) - np.kron(ID4, H.T))
    for rate, a in _rwa_channels(params):
        if rate <= 0:
            continue
        n = a.conj().T @ a
        L += rate * (
            np.kron(a, a.conj())
            - 0.5 * (np.kron(n, ID4) + np.kron(ID4, n.T))
        )
    return L


def stationarity_residual(params, cfg=None):
    """max |L_RWA vec(rho_ss)|: zero iff the closed form is stationary."""
    el = rwa_elements(params, cfg)
    ss = _steady_state_from_elements(params, el)
    rho = np.diag([ss.r11, ss.r22, ss.r33, ss.r44]).astype(complex)
    rho[0, 3] = ss.r14
    rho[3, 0] = np.conj(ss.r14)
    L = rwa_liouvillian(params, el)
    return float(np.max(np.abs(L @ rho.reshape(16))))


def reconstruct_original_frame(ss, params, t):
    """Steady state back in the lab frame at time t.

    Only the corner coherence acquires the accumulated drive phase.
    """
    K12, _ = select_K12(params)
    d = params.drive
    phi = (
        K12 * d.omega * t
        - 2.0 * (d.amplitude / d.omega) * math.sin(d.omega * t - d.phi0)
        - K12 * d.phi0
    )
    rho = np.diag([ss.r11, ss.r22, ss.r33, ss.r44]).astype(complex)
    rho[0, 3] = ss.r14 * np.exp(-1j * phi)
    rho[3, 0] = np.conj(rho[0, 3])
    return rho


def concurrence_resonant(params, cfg=None):
    """Averaged steady concurrence max(0, 2(|r14| - sqrt(r22 r33)))."""
    ss = steady_state_rwa(params, cfg)
    return max(0.0, 2.0 * (abs(ss.r14) - math.sqrt(max(ss.r22 * ss.r33, 0.0))))


def dip_width(params, cfg=None, s=1.0):
    """Width (in eps1) of the zero-concurrence window when eps2 = s*eps1.

    Raises NoEntanglementWindow when 2|h14| <= Gamma_1 + Gamma_2, in which
    case the concurrence never rises above zero near this resonance.
    """
    el = rwa_elements(params, cfg)
    g1 = params.qubit1.gamma_relax
    g2 = params.qubit2.gamma_relax
    gsum = g1 + g2
    if gsum <= 0:
        raise NoEntanglementWindow("no relaxation: entanglement never forms")
    arg = (2.0 * abs(el.h14) / gsum) ** 2 - 1.0
    if arg < 0:
        raise NoEntanglementWindow(
            f"2|h14|={2 * abs(el.h14):.3e} below Gamma1+Gamma2={gsum:.3e}"
        )
    gphi = params.qubit1.gamma_phi + params.qubit2.gamma_phi
    return 2.0 / (1.0 + s) * (gsum / 2.0 + 2.0 * gphi) * math.sqrt(arg)


@dataclass(frozen=True)
class XiValidationReport:
    """Diagnostics comparing the h-element series against quadrature."""

    h_term_deviation: float
    xi_residual: float
    min_denominator: float
    max_deviation: float


def validate_xi_integrals(params, t_max=None, n_nodes=16, intervals_per_period=64):
    """Cross-check the effective-element series against direct integrals.

    The oscillating phase factors are integrated two independent ways:
    composite Gauss-Legendre cumulative quadrature, and the harmonic
    expansion whose coefficients are extracted by FFT from one drive
    period.  The secular combinations of the two must reproduce the
    h-element series term by term.  Diagnostic only; phase-anchored at
    phi0 = 0 (the h elements do not depend on phi0).
    """
    cfg = SeriesConfig()
    k_max, guard = cfg.resolve(params)
    w = params.drive.omega
    g = params.g
    d1, d2 = params.qubit1.delta, params.qubit2.delta
    T = params.drive.period
    x = params.drive.amplitude / w
    if t_max is None:
        t_max = 2.0 * T

    # harmonic coefficients of e^{i x sin(w t)} by FFT (independent of the
    # backward-recurrence evaluation)
    N = 4096
    tj = np.arange(N) * (T / N)
    f = np.exp(1j * x * np.sin(w * tj))
    F = np.fft.fft(f) / N
    def J_fft(k):
        return F[k % N]

    ks = np.arange(-k_max, k_max + 1)
    J_mine = bessel_j_range(x, -k_max, k_max)
    J_ref = np.array([J_fft(int(k)) for k in ks])

    # term-by-term h comparison (series terms vs FFT-coefficient terms)
    dens = {}
    for q, eps in ((1, params.qubit1.eps), (2, params.qubit2.eps)):
        for sign in (+1.0, -1.0):
            dens[(q, sign)] = eps + sign * g + ks * w
    min_den = min(float(np.min(np.abs(v))) for v in dens.values())
    h_dev = 0.0
    for q, dq in ((1, d1), (2, d2)):
        for sign in (+1.0, -1.0):
            term_mine = 0.25 * dq**2 * J_mine**2 / dens[(q, sign)]
            term_ref = 0.25 * dq**2 * np.abs(J_ref) ** 2 / dens[(q, sign)]
            h_dev = max(h_dev, float(np.max(np.abs(term_mine - term_ref))))
    K12, _ = select_K12(params)
    Jshift_mine = bessel_j_range(x, K12 - k_max, K12 + k_max)[::-1]
    Jshift_ref = np.array([J_fft(int(K12 - k)) for k in ks])
    comp = 1.0 / ((params.qubit1.eps + ks * w) ** 2 - g**2) \
        + 1.0 / ((params.qubit2.eps + ks * w) ** 2 - g**2)
    t14_mine = d1 * d2 * g / 4.0 * J_mine * Jshift_mine * comp
    t14_ref = d1 * d2 * g / 4.0 * (J_ref * Jshift_ref).real * comp
    h_dev = max(h_dev, float(np.max(np.abs(t14_mine - t14_ref))))

    # cumulative integral of the oscillating factors: quadrature vs series
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    n_int = max(4, int(round(intervals_per_period * t_max / T)))
    edges = np.linspace(0.0, t_max, n_int + 1)
    xi_resid = 0.0
    kext = np.arange(-(k_max + 10), k_max + 11)
    Jext = bessel_j_range(x, -(k_max + 10), k_max + 10)
    for q, eps in ((1, params.qubit1.eps), (2, params.qubit2.eps)):
        for sign in (+1.0, -1.0):
            nu0 = eps + sign * g

            def xi(t):
                return np.exp(1j * (nu0 * t + x * np.sin(w * t)))

            acc = 0.0 + 0.0j
            quad_vals = [acc]
            for a, b in zip(edges[:-1], edges[1:]):
                mid, half = 0.5 * (a + b), 0.5 * (b - a)
                acc += half * np.sum(weights * xi(mid + half * nodes))
                quad_vals.append(acc)
            quad_vals = np.array(quad_vals)
            nu = nu0 + kext * w
            series_vals = ((np.exp(1j * np.outer(edges, nu)) - 1.0) / (1j * nu)) @ Jext
            xi_resid = max(xi_resid, float(np.max(np.abs(quad_vals - series_vals))))

    return XiValidationReport(
        h_term_deviation=h_dev,
        xi_residual=xi_resid,
        min_denominator=min_den,
        max_deviation=max(h_dev, xi_resid),
    )
