"""Non-resonant perturbative oracle for the driven pair.

Everything here treats the tunnel splittings as small parameters on top of
the exactly solvable driven diagonal problem.  The key objects are the
harmonic coefficients of the lowest Floquet mode and the concurrence
harmonics C_k; all infinite sums are truncated at a configurable order
with the Bessel factors guaranteeing super-exponential convergence.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j_range
from .errors import PerturbativeRegimeWarning, ResonantDenominator

__all__ = [
    "SeriesConfig",
    "ResonanceInfo",
    "FloquetModeCoeffs",
    "quasienergies_zeroth",
    "lambda_qk",
    "chi_qk",
    "floquet_mode_u1",
    "coeff_Ck",
    "coefficients_Ck",
    "concurrence_time_nonres",
    "averaged_concurrence_nonres",
    "classify_resonances",
]


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation and resonance-guard controls for the analytic series.

    ``k_max=None`` selects ceil(A/omega) + 20; ``denom_guard=None``
    selects 0.05*omega.  An explicit k_max below ceil(A/omega) + 10 is
    rejected: the Bessel factors only start decaying past |k| ~ A/omega.
    """

    k_max: int | None = None
    denom_guard: float | None = None

    def resolve(self, params):
        ratio = params.drive.amplitude / params.drive.omega
        k_max = self.k_max if self.k_max is not None else math.ceil(ratio) + 20
        if k_max < math.ceil(ratio) + 10:
            raise ValueError(
                f"k_max={k_max} too small for A/omega={ratio:.3g}; "
                f"need at least {math.ceil(ratio) + 10}"
            )
        guard = self.denom_guard if self.denom_guard is not None else 0.05 * params.drive.omega
        if guard <= 0:
            raise ValueError("denom_guard must be > 0")
        return k_max, guard


@dataclass(frozen=True)
class ResonanceInfo:
    """A parameter point classified against one resonance condition.

    ``kind`` is "single" (condition eps_q ± g + k*omega ~ 0, one qubit) or
    "two" (eps_1 + eps_2 + k*omega ~ 0).  ``extended`` marks the -g branch
    of the single-qubit condition, which shows up in second-order
    denominators but is not part of the primary resonance set.
    """

    kind: str
    k: int
    detuning: float
    qubit: int | None = None
    extended: bool = False

    def label(self):
        if self.kind == "two":
            return f"two-qubit k={self.k}"
        tag = "-g" if self.extended else "+g"
        return f"qubit{self.qubit} ({tag}) k={self.k}"


@dataclass(frozen=True)
class FloquetModeCoeffs:
    """Fourier coefficients |u_{1k}> of the lowest Floquet mode."""

    k: int
    vector: tuple


def _warn_perturbative(params):
    for q in (1, 2):
        qp = params.qubit(q)
        A = params.drive.amplitude
        if qp.delta > 0.25 * abs(qp.eps) or (A > 0 and qp.delta > 0.25 * A):
            warnings.warn(
                "analytic series requested outside the small-splitting regime "
                "(delta comparable to the bias or drive amplitude)",
                PerturbativeRegimeWarning,
                stacklevel=3,
            )
            return


def quasienergies_zeroth(params, reduce=True):
    """Zeroth-order quasienergies of the four modes.

    With ``reduce`` they are folded modulo omega into (-omega/2, omega/2].
    """
    e1, e2, g = params.qubit1.eps, params.qubit2.eps, params.g
    gam = np.array([
        -(e1 + e2 + g) / 2.0,
        -(e1 - e2 - g) / 2.0,
        (e1 - e2 + g) / 2.0,
        (e1 + e2 - g) / 2.0,
    ])
    if not reduce:
        return gam
    w = params.drive.omega
    return gam - w * np.ceil(gam / w - 0.5)


def _nearest_k(value, omega):
    """Integer k minimizing |value + k*omega|, ties toward smaller |k|."""
    f = value / omega
    kf = math.floor(f)
    best = None
    for k in (-kf, -(kf + 1)):
        resid = value + k * omega
        cand = (abs(resid), abs(k), k)
        if best is None or cand < best:
            best = cand
            best_k = k
    return best_k, value + best_k * omega


def classify_resonances(params, cfg=None, window=None, scale=1.0):
    """Classify a parameter point against every resonance condition.

    Returns the conditions whose residual is inside denom_guard*scale plus
    the single global minimizer, ordered by |detuning|.  ``window``
    optionally restricts the photon index search to an integer range.
    """
    cfg = cfg or SeriesConfig()
    _, guard = cfg.resolve(params)
    w = params.drive.omega
    g = params.g

    def pick(value):
        if window is None:
            return _nearest_k(value, w)
        best = None
        for k in window:
            resid = value + k * w
            cand = (abs(resid), abs(k), k)
            if best is None or cand < best:
                best = cand
                best_k = k
        return best_k, value + best_k * w

    infos = []
    for q in (1, 2):
        eps = params.qubit(q).eps
        k, d = pick(eps + g)
        infos.append(ResonanceInfo("single", k, d, qubit=q))
        k, d = pick(eps - g)
        infos.append(ResonanceInfo("single", k, d, qubit=q, extended=True))
    k, d = pick(params.qubit1.eps + params.qubit2.eps)
    infos.append(ResonanceInfo("two", k, d))

    infos.sort(key=lambda i: (abs(i.detuning), i.kind, i.qubit or 0, i.extended))
    out = [i for i in infos if abs(i.detuning) < guard * scale]
    if not out:
        out = [infos[0]]
    return out


def _guarded_inverse(dens, guard, info_factory):
    idx = np.argmin(np.abs(dens))
    if abs(dens[idx]) <= guard:
        info = info_factory(idx)
        raise ResonantDenominator(
            f"resonant denominator {dens[idx]:.3e} at {info.label()}", info=info
        )
    return 1.0 / dens


@functools.lru_cache(maxsize=128)
def _lambda_arrays(params, k_max, guard):
    """lambda_{q,k} for k in [-2*k_max, 2*k_max], both qubits.

    The doubled range covers shifted indices like lambda_{2,k-n}.
    """
    w = params.drive.omega
    g = params.g
    x = params.drive.amplitude / w
    ks = np.arange(-2 * k_max, 2 * k_max + 1)
    J = bessel_j_range(x, -2 * k_max, 2 * k_max)
    lams = {}
    for q in (1, 2):
        eps = params.qubit(q).eps
        dens = 2.0 * (eps + g + ks * w)
        inv = _guarded_inverse(
            dens, 2.0 * guard,
            lambda i: ResonanceInfo("single", int(ks[i]), eps + g + ks[i] * w, qubit=q),
        )
        lams[q] = J * inv
    return ks, J, lams[1], lams[2]


def lambda_qk(q, k, params, cfg=None):
    """Perturbative amplitude J_k(A/omega) / (2*(eps_q + g + k*omega))."""
    cfg = cfg or SeriesConfig()
    k_max, guard = cfg.resolve(params)
    if abs(k) > 2 * k_max:
        raise ValueError(f"|k|={abs(k)} beyond the truncation range {2 * k_max}")
    ks, _, lam1, lam2 = _lambda_arrays(params, k_max, guard)
    lam = lam1 if q == 1 else lam2
    return float(lam[k + 2 * k_max])


def chi_qk(q, k, params, cfg=None):
    """Convolution sum_n J_{n+k}(A/omega) * lambda_{q,n}, truncated at k_max."""
    cfg = cfg or SeriesConfig()
    k_max, guard = cfg.resolve(params)
    ks, _, lam1, lam2 = _lambda_arrays(params, k_max, guard)
    lam = lam1 if q == 1 else lam2
    x = params.drive.amplitude / params.drive.omega
    ns = np.arange(-k_max, k_max + 1)
    Jshift = bessel_j_range(x, -k_max + k, k_max + k)
    lam_n = lam[ns + 2 * k_max]
    return float(np.sum(Jshift * lam_n))


def floquet_mode_u1(k, params, cfg=None):
    """Four components of the harmonic-k coefficient of the lowest mode."""
    cfg = cfg or SeriesConfig()
    _warn_perturbative(params)
    k_max, guard = cfg.resolve(params)
    w = params.drive.omega
    d1, d2 = params.qubit1.delta, params.qubit2.delta
    e12 = params.qubit1.eps + params.qubit2.eps
    x = params.drive.amplitude / w
    ks, J, lam1, lam2 = _lambda_arrays(params, k_max, guard)
    ns = np.arange(-k_max, k_max + 1)
    lam1_n = lam1[ns + 2 * k_max]
    lam2_n = lam2[ns + 2 * k_max]

    def J_at(orders):
        return bessel_j_range(x, int(np.min(orders)), int(np.max(orders)))[
            np.asarray(orders) - int(np.min(orders))
        ]

    # component 1: norm correction plus the m != 0 backaction sum
    norm_corr = 1.0 - 0.5 * np.sum(d1**2 * lam1_n**2 + d2**2 * lam2_n**2)
    ms = ns[ns != 0]
    chi1 = np.array([chi_qk(1, int(-m), params, cfg) for m in ms])
    chi2 = np.array([chi_qk(2, int(-m), params, cfg) for m in ms])
    Jkm = J_at(k - ms)
    c1 = bessel_j_range(x, k, k)[0] * norm_corr + 0.5 * np.sum(
        Jkm * (d1**2 * chi1 + d2**2 * chi2) / (ms * w)
    )
    # components 2, 3: direct single-flip amplitudes
    c2 = d2 * lam2[k + 2 * k_max]
    c3 = d1 * lam1[k + 2 * k_max]
    # component 4: double-flip amplitude with the two-qubit denominators
    dens = e12 + ns * w
    inv = _guarded_inverse(
        dens, guard, lambda i: ResonanceInfo("two", int(ns[i]), dens[i])
    )
    Jmk = J_at(ns - k)  # J_{m-k}
    Jmn = np.array([J_at(m - ns) for m in ns])  # [m, n] -> J_{m-n}
    c4 = 0.5 * d1 * d2 * np.sum(
        (lam1_n + lam2_n)[None, :] * Jmn * (Jmk * inv)[:, None]
    )
    return FloquetModeCoeffs(k=k, vector=(complex(c1), complex(c2), complex(c3), complex(c4)))


@functools.lru_cache(maxsize=128)
def _ck_array(params, k_max, guard):
    """Concurrence harmonics C_k for k in [-k_max, k_max]."""
    w = params.drive.omega
    e12 = params.qubit1.eps + params.qubit2.eps
    x = params.drive.amplitude / w
    ks2, J2, lam1, lam2 = _lambda_arrays(params, k_max, guard)
    ns = np.arange(-k_max, k_max + 1)
    lam1_n = lam1[ns + 2 * k_max]
    lam2_n = lam2[ns + 2 * k_max]
    karr = np.arange(-k_max, k_max + 1)
    dens = e12 + karr * w
    inv = _guarded_inverse(
        dens, guard, lambda i: ResonanceInfo("two", int(karr[i]), dens[i])
    )
    out = np.empty(karr.size)
    for i, k in enumerate(karr):
        Jkn = J2[(k - ns) + 2 * k_max]
        lam2_shift = lam2[(k - ns) + 2 * k_max]
        out[i] = np.sum((lam1_n + lam2_n) * Jkn) * 0.5 * inv[i] - np.sum(lam1_n * lam2_shift)
    return karr, out


def coeff_Ck(k, params, cfg=None):
    """Single concurrence harmonic C_k (real)."""
    cfg = cfg or SeriesConfig()
    k_max, guard = cfg.resolve(params)
    if abs(k) > k_max:
        raise ValueError(f"|k|={abs(k)} beyond truncation k_max={k_max}")
    karr, cks = _ck_array(params, k_max, guard)
    return float(cks[k + k_max])


def coefficients_Ck(params, cfg=None):
    """(k values, C_k values) over the full truncation range."""
    cfg = cfg or SeriesConfig()
    k_max, guard = cfg.resolve(params)
    karr, cks = _ck_array(params, k_max, guard)
    return karr.copy(), cks.copy()


def concurrence_time_nonres(t, params, cfg=None):
    """Leading-order concurrence 2*d1*d2*|sum_k C_k e^{ik(omega t - phi0)}|."""
    cfg = cfg or SeriesConfig()
    _warn_perturbative(params)
    karr, cks = coefficients_Ck(params, cfg)
    scalar = np.ndim(t) == 0
    phase = params.drive.omega * np.atleast_1d(t) - params.drive.phi0
    s = np.exp(1j * np.outer(phase, karr)) @ cks
    val = 2.0 * params.qubit1.delta * params.qubit2.delta * np.abs(s)
    return float(val[0]) if scalar else val


def harmonic_abs_mean(karr, coeffs, n_quad=2048):
    """Mean over one cycle of |sum_k c_k e^{ik alpha}| (uniform trapezoid)."""
    alpha = np.linspace(0.0, 2.0 * math.pi, n_quad, endpoint=False)
    return float(np.abs(np.exp(1j * np.outer(alpha, np.asarray(karr)))
                        @ np.asarray(coeffs)).mean())


def averaged_concurrence_nonres(params, cfg=None, n_quad=2048):
    """Drive-phase averaged concurrence from the harmonic series.

    Uniform-trapezoid quadrature of (d1*d2/pi) * int_0^{2pi} |sum_k C_k
    e^{ik a}| da; the integrand is periodic so the uniform grid converges
    spectrally away from the zeros of the sum.
    """
    cfg = cfg or SeriesConfig()
    _warn_perturbative(params)
    karr, cks = coefficients_Ck(params, cfg)
    mean = harmonic_abs_mean(karr, cks, n_quad)
    return float(2.0 * params.qubit1.delta * params.qubit2.delta * mean)


def floquet_mode_u1_sum(t, params, cfg=None):
    """Perturbative mode |u_1(t)> = sum_k e^{ik omega t} |u_1k> as a vector."""
    cfg = cfg or SeriesConfig()
    k_max, _ = cfg.resolve(params)
    w = params.drive.omega
    vec = np.zeros(4, dtype=complex)
    for k in range(-k_max, k_max + 1):
        coeffs = np.array(floquet_mode_u1(k, params, cfg).vector)
        vec += np.exp(1j * k * w * t) * coeffs
    return vec
