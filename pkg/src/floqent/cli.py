"""Command-line interface: dynamics, sweep, verify, resonances."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, FloqentError
from .series import classify_resonances
from .sweep import config_sha256, overlay_lines, run_dynamics, run_sweep


def _add_common(sub):
    sub.add_argument("--config", required=True, type=Path, help="run configuration file")
    sub.add_argument("--out", type=Path, default=Path("out"), help="output directory")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="floqent",
        description="Driven coupled-qubit steady-state entanglement toolkit",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_dyn = subs.add_parser("dynamics", help="time dynamics and steady-state entry")
    _add_common(p_dyn)
    p_dyn.add_argument("--dump-rho", action="store_true",
                       help="also export the full density-matrix trajectory")

    p_sweep = subs.add_parser("sweep", help="1D/2D parameter sweeps")
    _add_common(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="process-pool size (default: all cores)")
    p_sweep.add_argument("--method", choices=("numeric", "analytic", "both"),
                         default=None, help="override the configured method")

    p_ver = subs.add_parser("verify", help="run the invariant/oracle check suite")
    p_ver.add_argument("--out", type=Path, default=None,
                       help="write the JSON report here")

    p_res = subs.add_parser("resonances", help="classify resonances / overlay lines")
    _add_common(p_res)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FloqentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args):
    if args.command == "verify":
        from .verify import run_verify

        out = args.out / "verify.json" if args.out else None
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
        results, ok = run_verify(out)
        width = max(len(r.name) for r in results)
        for r in results:
            status = "pass" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  {r.value:12.4e}  < {r.bound:8.1e}  {status}")
        print(f"{'all checks passed' if ok else 'FAILURES detected'}")
        return 0 if ok else 1

    cfg = load_config(args.config)

    if args.command == "dynamics":
        entries = run_dynamics(cfg, args.out, dump_rho=args.dump_rho or None)
        for label, info in entries.items():
            print(f"{label}: steady-state entry at period {info['entry_period']}"
                  f" ({info['entry_time_ns']:.1f} ns)")
        print(f"outputs in {args.out}")
        return 0

    if args.command == "sweep":
        result = run_sweep(cfg, args.out, workers=args.workers, method=args.method)
        manifest_path = args.out / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        manifest["config_sha256"] = config_sha256(args.config)
        manifest_path.write_text(json.dumps(manifest, indent=2))
        n_blocked = sum(1 for r in result.records if r.tag in ("blocked", "failed"))
        print(f"{len(result.records)} points "
              f"({n_blocked} without analytic value); outputs in {args.out}")
        return 0

    if args.command == "resonances":
        p = cfg.base_params()
        infos = classify_resonances(p, cfg.series)
        print("resonance classification at the base parameter point:")
        for info in infos:
            print(f"  {info.label():<22} detuning {info.detuning:+.6f}")
        if cfg.sweep is not None:
            lines = overlay_lines(cfg)
            args.out.mkdir(parents=True, exist_ok=True)
            out_file = args.out / "resonances.json"
            out_file.write_text(json.dumps({"lines": lines}, indent=2))
            print(f"{len(lines)} overlay lines written to {out_file}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
