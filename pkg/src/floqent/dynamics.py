"""Master-equation integration and the one-period propagator.

The master equation d(rho)/dt = -i[H(t), rho] + Gamma(rho) is linear, so
the integrator works in the 16-dimensional vectorized representation:
L(t) = L0 + cos(omega*t - phi0) * L1 with constant 16x16 blocks.  The
fixed-step classical RK4 march keeps every monodromy column on the same
grid; an embedded adaptive pair is available for plain time evolution.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFixedPoint, StepSizeUnderflow
from .model import (
    SIGMA_X,
    SIGMA_Z,
    dissipator,
    hamiltonian,
    lindblad_channels,
    qubit_op,
)

ID4 = np.eye(4, dtype=complex)
ID16 = np.eye(16, dtype=complex)
VEC_ID = ID4.reshape(16).copy()


@dataclass(frozen=True)
class IntegratorConfig:
    """Controls for the master-equation integrator.

    ``steps_per_period=None`` selects the default max(256, 64*ceil(A/omega)),
    which resolves the fastest drive-induced scale.
    """

    steps_per_period: int | None = None
    mode: str = "fixed"
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_periods: int = 200_000
    convergence_tol: float = 1e-9

    def __post_init__(self):
        if self.steps_per_period is not None and self.steps_per_period < 64:
            raise ValueError("steps_per_period must be >= 64")
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.convergence_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown integrator mode {self.mode!r}")

    def steps_for(self, params):
        if self.steps_per_period is not None:
            return self.steps_per_period
        ratio = params.drive.amplitude / params.drive.omega
        # the slow 1<->4 coherence is sensitive to the accumulated phase of
        # the fast diagonal splitting; 1024 steps keep the spurious
        # per-period phase error well under the physical detuning scale
        return max(1024, 128 * math.ceil(ratio) if ratio > 0 else 1024)


@dataclass
class Trajectory:
    """Sampled solution of the master equation."""

    times: np.ndarray
    states: np.ndarray  # shape (n, 4, 4)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def final(self):
        return self.states[-1]


def rhs(t, rho, params):
    """Right-hand side -i[H(t), rho] + Gamma(rho), built element-wise.

    This is deliberately independent of the vectorized fast path so the
    two constructions can be cross-checked.
    """
    H = hamiltonian(t, params)
    return -1j * (H @ rho - rho @ H) + dissipator(rho, params)


def _commutator_superop(H):
    return -1j * (np.kron(H, ID4) - np.kron(ID4, H.T))


@functools.lru_cache(maxsize=256)
def liouvillian_parts(params):
    """(L0, L1): constant and cos-modulated parts of the vectorized generator.

    The full generator is L(t) = L0 + A*cos(omega*t - phi0) * L1.
    """
    Hs = -0.5 * (
        params.qubit1.eps * qubit_op(SIGMA_Z, 1)
        + params.qubit1.delta * qubit_op(SIGMA_X, 1)
        + params.qubit2.eps * qubit_op(SIGMA_Z, 2)
        + params.qubit2.delta * qubit_op(SIGMA_X, 2)
    ) - 0.5 * params.g * np.kron(SIGMA_Z, SIGMA_Z)
    L0 = _commutator_superop(Hs)
    for rate, a in lindblad_channels(params):
        n = a.conj().T @ a
        L0 += rate * (
            np.kron(a, a.conj())
            - 0.5 * (np.kron(n, ID4) + np.kron(ID4, n.T))
        )
    L1 = _commutator_superop(-0.5 * (qubit_op(SIGMA_Z, 1) + qubit_op(SIGMA_Z, 2)))
    return L0, L1


def _generator(params):
    L0, L1 = liouvillian_parts(params)
    A = params.drive.amplitude
    w = params.drive.omega
    phi0 = params.drive.phi0

    def L(t):
        if A == 0.0:
            return L0
        return L0 + (A * math.cos(w * t - phi0)) * L1

    return L


def _rk4_march(L, y, t, h, n_steps, collect_every=None):
    """March y' = L(t) y with classical RK4; y may be a vector or matrix.

    Returns the final value and, when ``collect_every`` is given, the list
    of (t, y) snapshots taken *before* steps 0, collect_every, ... .
    """
    snaps = []
    for s in range(n_steps):
        if collect_every is not None and s % collect_every == 0:
            snaps.append((t, y.copy()))
        k1 = L(t) @ y
        Lm = L(t + 0.5 * h)
        k2 = Lm @ (y + (0.5 * h) * k1)
        k3 = Lm @ (y + (0.5 * h) * k2)
        k4 = L(t + h) @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    if collect_every is not None:
        return y, t, snaps
    return y, t


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _adaptive_march(L, y, t0, t1, cfg, record):
    t = t0
    h = (t1 - t0) / 100.0
    h_min = max((t1 - t0), 1.0) * 1e-14
    while t < t1:
        if h < h_min:
            raise StepSizeUnderflow(f"adaptive step collapsed to {h:.3e} ns", time=t)
        h = min(h, t1 - t)
        ks = []
        for i in range(7):
            yi = y.copy()
            for j, a in enumerate(_DP_A[i]):
                yi += (h * a) * ks[j]
            ks.append(L(t + _DP_C[i] * h) @ yi)
        y5 = y + h * sum(b * k for b, k in zip(_DP_B5, ks))
        y4 = y + h * sum(b * k for b, k in zip(_DP_B4, ks))
        scale = cfg.abs_tol + cfg.rel_tol * max(np.max(np.abs(y)), np.max(np.abs(y5)))
        err = np.max(np.abs(y5 - y4)) / scale
        if err <= 1.0:
            t += h
            y = y5
            record(t, y)
        h *= min(5.0, max(0.2, 0.9 * (1.0 / max(err, 1e-16)) ** 0.2))
    return y


def evolve(rho0, t0, t1, params, cfg=None, store_every=1):
    """Integrate the master equation from t0 to t1 (ns).

    Fixed mode samples every ``store_every``-th step boundary (plus the
    final time); adaptive mode samples every accepted step.
    """
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    cfg = cfg or IntegratorConfig()
    L = _generator(params)
    v = np.asarray(rho0, dtype=complex).reshape(16).copy()
    times = [t0]
    states = [v.reshape(4, 4).copy()]

    if cfg.mode == "adaptive":
        def record(t, y):
            times.append(t)
            states.append(y.reshape(4, 4).copy())

        _adaptive_march(L, v, t0, t1, cfg, record)
        return Trajectory(np.array(times), np.array(states))

    T = params.drive.period
    h = T / cfg.steps_for(params)
    n_full = int(math.floor((t1 - t0) / h + 1e-12))
    t = t0
    for s in range(n_full):
        v, t = _rk4_march(L, v, t, h, 1)
        if (s + 1) % store_every == 0:
            times.append(t)
            states.append(v.reshape(4, 4).copy())
    if t < t1 - 1e-12 * max(1.0, abs(t1)):
        v, t = _rk4_march(L, v, t, t1 - t, 1)
    if times[-1] < t:
        times.append(t)
        states.append(v.reshape(4, 4).copy())
    return Trajectory(np.array(times), np.array(states))


def monodromy(params, cfg=None):
    """16x16 linear map advancing vec(rho) by one drive period.

    Anchored at t0 = phi0/omega, where the cosine factor is exactly 1;
    the map is then independent of phi0.  Built by propagating the full
    operator basis (the identity superoperator) through one period.
    """
    M, _ = _monodromy_snapshots(params, cfg or IntegratorConfig(), n_snapshots=0)
    return M


def _monodromy_snapshots(params, cfg, n_snapshots):
    L = _generator(params)
    T = params.drive.period
    steps = cfg.steps_for(params)
    h = T / steps
    t0 = params.drive.phi0 / params.drive.omega
    if n_snapshots:
        every = max(1, steps // n_snapshots)
        M, _, snaps = _rk4_march(L, ID16.copy(), t0, h, steps, collect_every=every)
        return M, snaps
    M, _ = _rk4_march(L, ID16.copy(), t0, h, steps)
    return M, []


def fixed_point(M, degeneracy_tol=1e-8):
    """Unit-trace Hermitian fixed point of a one-period map.

    Raises DegenerateFixedPoint when a second eigenvalue sits within
    ``degeneracy_tol`` of 1 (no unique steady state).
    """
    evals, vecs = np.linalg.eig(M)
    order = np.argsort(np.abs(evals - 1.0))
    if abs(evals[order[1]] - 1.0) < degeneracy_tol:
        raise DegenerateFixedPoint(
            "one-period propagator has a degenerate unit eigenvalue; "
            "the steady state is not unique (is all dissipation zero?)"
        )
    rho = vecs[:, order[0]].reshape(4, 4)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        raise DegenerateFixedPoint("fixed-point candidate has zero trace")
    return rho / tr


def steady_state(params, cfg=None, n_samples=64):
    """Periodic steady state sampled over one drive period.

    Returns a Trajectory with ``n_samples`` points starting at the anchor
    time t0 = phi0/omega plus the closing point at t0 + T.
    """
    cfg = cfg or IntegratorConfig()
    steps = cfg.steps_for(params)
    if n_samples > steps:
        n_samples = steps
    M, snaps = _monodromy_snapshots(params, cfg, n_samples)
    rho0 = fixed_point(M)
    v0 = rho0.reshape(16)
    times, states = [], []
    for t, S in snaps:
        r = (S @ v0).reshape(4, 4)
        r = 0.5 * (r + r.conj().T)
        times.append(t)
        states.append(r)
    t0 = params.drive.phi0 / params.drive.omega
    T = params.drive.period
    rT = (M @ v0).reshape(4, 4)
    rT = 0.5 * (rT + rT.conj().T)
    times.append(t0 + T)
    states.append(rT)
    traj = Trajectory(np.array(times), np.array(states))
    resid = np.linalg.norm(traj.states[-1] - traj.states[0])
    if resid > cfg.convergence_tol:
        raise DegenerateFixedPoint(
            f"fixed point fails to close over one period (residual {resid:.3e})"
        )
    return traj


def propagate_periods(params, cfg, rho0, n_periods):
    """Stroboscopic states rho(t0 + n T) for n = 0..n_periods (inclusive).

    Uses repeated application of the one-period map, which is the same
    discrete flow as stepping the RK4 integrator period by period.
    """
    M = monodromy(params, cfg)
    v = np.asarray(rho0, dtype=complex).reshape(16).copy()
    out = np.empty((n_periods + 1, 4, 4), dtype=complex)
    out[0] = v.reshape(4, 4)
    for n in range(1, n_periods + 1):
        v = M @ v
        out[n] = v.reshape(4, 4)
    return out


def steady_state_entry_period(params, cfg, rho0, tol=1e-6):
    """First period index n with ||rho((n+1)T) - rho(nT)||_F < tol."""
    M = monodromy(params, cfg)
    v = np.asarray(rho0, dtype=complex).reshape(16).copy()
    for n in range(cfg.max_periods):
        v_next = M @ v
        if np.linalg.norm(v_next - v) < tol:
            return n
        v = v_next
    raise DegenerateFixedPoint(
        f"no steady-state entry within {cfg.max_periods} periods"
    )
