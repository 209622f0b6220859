"""Parameter sweeps, method dispatch, and data export.

Grid points are independent tasks farmed out to a process pool; results
are reassembled in deterministic row-major order so identical configs
always produce byte-identical CSV files.
"""

from __future__ import annotations

import hashlib
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .concurrence import concurrence
from .config import build_system
from .dynamics import IntegratorConfig, monodromy, _monodromy_snapshots, fixed_point
from .errors import ConfigError, FloqentError, ResonantDenominator
from .model import basis_index
from .rwa import concurrence_resonant, select_K12
from .series import averaged_concurrence_nonres, classify_resonances

CSV_FLOAT = repr  # shortest round-trip formatting, stable across runs


@dataclass
class PointRecord:
    coords: tuple
    c_num: float | None
    c_ana: float | None
    tag: str
    detuning: float
    note: str = ""


@dataclass
class SweepResult:
    spec: object
    records: list

    def grid_numeric(self):
        """2D array of numeric values (axis1 rows, axis2 columns)."""
        ax1, ax2 = self.spec.axis1, self.spec.axis2
        if ax2 is None:
            raise ValueError("grid_numeric needs a 2D sweep")
        out = np.full((ax1.n, ax2.n), np.nan)
        for idx, rec in enumerate(self.records):
            out[idx // ax2.n, idx % ax2.n] = (
                np.nan if rec.c_num is None else rec.c_num)
        return out


def axis_values(axis):
    return np.linspace(axis.lo, axis.hi, axis.n)


def point_values(base_values, spec, i, j=None):
    """Flat parameter dict at one grid point (axis overrides plus links)."""
    vals = dict(base_values)
    x1 = axis_values(spec.axis1)[i]
    vals[spec.axis1.name] = float(x1)
    axis_at = {spec.axis1.name: float(x1)}
    if spec.axis2 is not None:
        x2 = axis_values(spec.axis2)[j]
        vals[spec.axis2.name] = float(x2)
        axis_at[spec.axis2.name] = float(x2)
    for link in spec.linked:
        vals[link.name] = link.value(axis_at[link.axis])
    return vals


def numeric_cbar(params, integrator_cfg, n_time=64):
    """Steady-state concurrence averaged over one period."""
    steps = integrator_cfg.steps_for(params)
    n = min(n_time, steps)
    M, snaps = _monodromy_snapshots(params, integrator_cfg, n)
    rho0 = fixed_point(M)
    v0 = rho0.reshape(16)
    vals = []
    for _, S in snaps:
        r = (S @ v0).reshape(4, 4)
        r = 0.5 * (r + r.conj().T)
        vals.append(concurrence(r))
    return float(np.mean(vals))


def choose_analytic(params, series_cfg):
    """Dispatch rule: the resonant oracle inside the two-qubit gate,
    the non-resonant series elsewhere."""
    _, guard = series_cfg.resolve(params)
    _, delta12 = select_K12(params)
    gate = max(10.0 * params.max_rate(), guard)
    return "rwa" if abs(delta12) < gate else "nonres"


def evaluate_point(task):
    """Worker: evaluate one grid point.  Must stay module-level picklable."""
    index, values, integrator_cfg, series_cfg, method, n_time = task
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = build_system(values)
        _, delta12 = select_K12(params)
        c_num = c_ana = None
        tag = "numeric"
        note = ""
        try:
            if method in ("numeric", "both"):
                c_num = numeric_cbar(params, integrator_cfg, n_time)
            if method in ("analytic", "both"):
                tag = choose_analytic(params, series_cfg)
                if tag == "rwa":
                    c_ana = concurrence_resonant(params, series_cfg)
                else:
                    c_ana = averaged_concurrence_nonres(params, series_cfg)
        except ResonantDenominator as exc:
            tag = "blocked"
            note = str(exc)
        except FloqentError as exc:
            tag = "failed"
            note = str(exc)
    return index, PointRecord(coords=(), c_num=c_num, c_ana=c_ana,
                              tag=tag, detuning=delta12, note=note)


def run_sweep(run_config, out_dir=None, workers=None, method=None):
    """Evaluate the configured sweep and optionally write CSV + manifest.

    Per-point failures are recorded in the ``note`` column and never abort
    the sweep.
    """
    spec = run_config.sweep
    if spec is None:
        raise ConfigError("config has no sweep axes", "sweep", "axis1")
    method = method or spec.method
    tasks = []
    coords = []
    x1 = axis_values(spec.axis1)
    if spec.axis2 is None:
        for i in range(spec.axis1.n):
            vals = point_values(run_config.values, spec, i)
            tasks.append((len(tasks), vals, run_config.integrator,
                          run_config.series, method, spec.n_time))
            coords.append((float(x1[i]),))
    else:
        x2 = axis_values(spec.axis2)
        for i in range(spec.axis1.n):
            for j in range(spec.axis2.n):
                vals = point_values(run_config.values, spec, i, j)
                tasks.append((len(tasks), vals, run_config.integrator,
                              run_config.series, method, spec.n_time))
                coords.append((float(x1[i]), float(x2[j])))

    started = time.time()
    records = [None] * len(tasks)
    if workers is None or workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, rec in pool.map(evaluate_point, tasks, chunksize=8):
                records[index] = rec
    else:
        for task in tasks:
            index, rec = evaluate_point(task)
            records[index] = rec
    for idx, rec in enumerate(records):
        rec.coords = coords[idx]
    runtime = time.time() - started

    result = SweepResult(spec=spec, records=records)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "sweep.csv"
        write_sweep_csv(csv_path, result)
        manifest = {
            "command": "sweep",
            "package_version": __version__,
            "numpy_version": np.__version__,
            "method": method,
            "grid": {
                "axis1": spec.axis1.__dict__,
                "axis2": spec.axis2.__dict__ if spec.axis2 else None,
            },
            "runtime_s": runtime,
            "outputs": [csv_path.name],
        }
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return result


def write_sweep_csv(path, result):
    spec = result.spec
    headers = [spec.axis1.name]
    if spec.axis2 is not None:
        headers.append(spec.axis2.name)
    headers += ["c_num", "c_ana", "tag", "detuning", "note"]
    lines = [",".join(headers)]
    for rec in result.records:
        cells = [CSV_FLOAT(c) for c in rec.coords]
        cells.append("" if rec.c_num is None else CSV_FLOAT(rec.c_num))
        cells.append("" if rec.c_ana is None else CSV_FLOAT(rec.c_ana))
        cells.append(rec.tag)
        cells.append(CSV_FLOAT(rec.detuning))
        cells.append('"%s"' % rec.note.replace('"', "'") if rec.note else "")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_dynamics(run_config, out_dir, dump_rho=None):
    """Time-dynamics runs (one CSV per relaxation-rate set).

    Emits per-sample rows (t_ns, C, trace, min_eig) until the steady
    state is entered plus a short tail, and records the entry time in the
    manifest.  The long march uses the one-period propagator with stored
    partial-period maps, which is the same discrete flow as direct
    stepping.
    """
    dyn = run_config.dynamics
    gammas = dyn.gammas or (None,)
    if dump_rho is None:
        dump_rho = dyn.dump_rho
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    entries = {}
    started = time.time()
    for gamma in gammas:
        values = dict(run_config.values)
        label = "base"
        if gamma is not None:
            values["gamma1"] = gamma
            values["gamma2"] = gamma
            label = f"gamma_{gamma:g}"
        params = build_system(values)
        if params.total_decay(1) == 0 and params.total_decay(2) == 0:
            raise ConfigError(
                "all decay rates are zero: the steady state is undefined",
                "noise", "gamma1")
        rho0 = _initial_state(dyn.init)
        cfg = run_config.integrator
        n_sub = max(1, dyn.samples_per_period)
        M, snaps = _monodromy_snapshots(params, cfg, n_sub)
        entry = _entry_period(M, rho0, tol=1e-6, max_periods=dyn.max_periods
                              or cfg.max_periods)
        n_periods = entry + max(1, dyn.extra_periods)
        T = params.drive.period
        rows, rho_rows = _sample_dynamics(M, snaps, T, rho0, n_periods, dump_rho)
        entries[label] = {"entry_period": entry, "entry_time_ns": entry * T}
        csv_path = out_dir / f"dynamics_{label}.csv"
        lines = ["t_ns,concurrence,trace,min_eig"]
        for t, c, tr, me in rows:
            lines.append(",".join([CSV_FLOAT(t), CSV_FLOAT(c),
                                   CSV_FLOAT(tr), CSV_FLOAT(me)]))
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        outputs.append(csv_path.name)
        if dump_rho:
            dump_path = out_dir / f"rho_{label}.csv"
            hdr = ["t_ns"]
            for i in range(4):
                for j in range(4):
                    hdr += [f"re{i}{j}", f"im{i}{j}"]
            lines = [",".join(hdr)]
            for t, rho in rho_rows:
                cells = [CSV_FLOAT(t)]
                for i in range(4):
                    for j in range(4):
                        cells += [CSV_FLOAT(rho[i, j].real), CSV_FLOAT(rho[i, j].imag)]
                lines.append(",".join(cells))
            dump_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            outputs.append(dump_path.name)
    manifest = {
        "command": "dynamics",
        "package_version": __version__,
        "numpy_version": np.__version__,
        "entries": entries,
        "runtime_s": time.time() - started,
        "outputs": outputs,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return entries


def _initial_state(label):
    rho = np.zeros((4, 4), dtype=complex)
    if label == "mixed":
        np.fill_diagonal(rho, 0.25)
    else:
        idx = basis_index(label)
        rho[idx, idx] = 1.0
    return rho


def _entry_period(M, rho0, tol, max_periods):
    v = rho0.reshape(16).astype(complex)
    for n in range(max_periods):
        v_next = M @ v
        if np.linalg.norm(v_next - v) < tol:
            return n
        v = v_next
    raise FloqentError(f"no steady-state entry within {max_periods} periods")


def _sample_dynamics(M, snaps, T, rho0, n_periods, dump_rho):
    rows = []
    rho_rows = []
    v = rho0.reshape(16).astype(complex)
    t0 = snaps[0][0]
    offsets = [t - t0 for t, _ in snaps]
    for n in range(n_periods):
        for toff, (_, S) in zip(offsets, snaps):
            r = (S @ v).reshape(4, 4)
            r = 0.5 * (r + r.conj().T)
            t = t0 + n * T + toff
            rows.append((t, concurrence(r), float(np.trace(r).real),
                         float(np.linalg.eigvalsh(r)[0])))
            if dump_rho:
                rho_rows.append((t, r))
        v = M @ v
    return rows, rho_rows


def config_sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# resonance overlay lines

def _residual_fn(kind, q, extended):
    sign = -1.0 if extended else 1.0

    def f(values):
        params = build_system(values)
        if kind == "two":
            return params.qubit1.eps + params.qubit2.eps
        return params.qubit(q).eps + sign * params.g

    return f


def overlay_lines(run_config, max_lines=200):
    """Resonance-condition lines across the configured sweep window.

    Every condition residual is affine in the swept axes (links are
    linear), so three corner evaluations determine each line exactly.
    Returns dicts ready for JSON serialization: 1D sweeps get vertical
    line positions, 2D sweeps get segment endpoints.
    """
    spec = run_config.sweep
    if spec is None:
        raise ConfigError("config has no sweep axes", "sweep", "axis1")
    omega = run_config.values["omega"]
    conditions = [("two", None, False)]
    for q in (1, 2):
        conditions.append(("single", q, False))
        conditions.append(("single", q, True))

    lines = []
    ax1 = spec.axis1
    if spec.axis2 is None:
        for kind, q, ext in conditions:
            f = _residual_fn(kind, q, ext)
            r_lo = f(point_values(run_config.values, spec, 0))
            r_hi = f(point_values(run_config.values, spec, ax1.n - 1))
            slope = (r_hi - r_lo) / (ax1.hi - ax1.lo)
            if slope == 0:
                continue
            k_lo = -max(r_lo, r_hi) / omega
            k_hi = -min(r_lo, r_hi) / omega
            for k in range(int(np.ceil(k_lo)), int(np.floor(k_hi)) + 1):
                x = ax1.lo + (-(r_lo + k * omega)) / slope
                if ax1.lo - 1e-12 <= x <= ax1.hi + 1e-12:
                    lines.append({
                        "kind": kind, "qubit": q, "k": k, "extended": ext,
                        "axis": ax1.name, "value": float(x),
                        "label": _line_label(kind, q, k, ext),
                    })
        return lines[:max_lines]

    ax2 = spec.axis2
    for kind, q, ext in conditions:
        f = _residual_fn(kind, q, ext)
        r00 = f(point_values(run_config.values, spec, 0, 0))
        r10 = f(point_values(run_config.values, spec, ax1.n - 1, 0))
        r01 = f(point_values(run_config.values, spec, 0, ax2.n - 1))
        c1 = (r10 - r00) / (ax1.hi - ax1.lo)
        c2 = (r01 - r00) / (ax2.hi - ax2.lo)
        c0 = r00 - c1 * ax1.lo - c2 * ax2.lo
        corners = [r00, r10, r01, r00 + (r10 - r00) + (r01 - r00)]
        k_lo = int(np.ceil(-max(corners) / omega))
        k_hi = int(np.floor(-min(corners) / omega))
        for k in range(k_lo, k_hi + 1):
            seg = _clip_line(c0 + k * omega, c1, c2,
                             (ax1.lo, ax1.hi), (ax2.lo, ax2.hi))
            if seg is not None:
                lines.append({
                    "kind": kind, "qubit": q, "k": k, "extended": ext,
                    "plane": [ax1.name, ax2.name],
                    "points": [[float(v) for v in pt] for pt in seg],
                    "label": _line_label(kind, q, k, ext),
                })
    return lines[:max_lines]


def _line_label(kind, q, k, ext):
    if kind == "two":
        return f"eps1+eps2{k:+d}w=0"
    return f"eps{q}{'-' if ext else '+'}g{k:+d}w=0"


def _clip_line(c0, c1, c2, xr, yr):
    """Intersect c0 + c1 x + c2 y = 0 with a rectangle; None if outside."""
    pts = []
    if abs(c2) > 1e-15:
        for x in xr:
            y = -(c0 + c1 * x) / c2
            if yr[0] - 1e-12 <= y <= yr[1] + 1e-12:
                pts.append((x, min(max(y, yr[0]), yr[1])))
    if abs(c1) > 1e-15:
        for y in yr:
            x = -(c0 + c2 * y) / c1
            if xr[0] - 1e-12 <= x <= xr[1] + 1e-12:
                pts.append((min(max(x, xr[0]), xr[1]), y))
    uniq = []
    for p in pts:
        if not any(abs(p[0] - u[0]) < 1e-9 and abs(p[1] - u[1]) < 1e-9 for u in uniq):
            uniq.append(p)
    if len(uniq) < 2:
        return None
    return uniq[:2]
