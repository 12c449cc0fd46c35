"""Command-line front end.

    nested-mzi simulate --setup 2 --out run/
    nested-mzi conformance
    nested-mzi oracle --cutoff 20
    nested-mzi lines --setup 1

Exit codes: 0 success, 2 configuration error, 3 conformance failure,
4 oracle failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checks import run_conformance, run_oracle
from .config import RunConfig
from .network import ConfigurationError, Mode, NetworkError, build_network
from .optics import InvalidInputError
from .spectrum import (
    RangeError,
    analytic_lines,
    classical_mixture_spectrum,
    peak_report,
    psd,
    quantum_psd_lines,
    sample_detector,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONFORMANCE = 3
EXIT_ORACLE = 4


def run_simulate(cfg: RunConfig, out: Path) -> dict:
    """Write spectrum.csv, peaks.json and summary.txt into ``out``."""
    cfg.validate()
    net = build_network(cfg.setup, cfg.interferometer, cfg.mode)
    freqs = cfg.interferometer.freqs
    if cfg.ensemble == "none":
        spec = psd(sample_detector(net, cfg.alpha, cfg.duration, cfg.rate), exclude_freqs=list(freqs.values()))
    else:
        spec = classical_mixture_spectrum(
            cfg.make_ensemble(), net, cfg.n_draws, cfg.seed, cfg.duration, cfg.rate
        ).spectrum
    table = peak_report(spec, freqs)

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "spectrum.csv", "w", newline="\n") as fh:
        fh.write("freq_hz,power\n")
        np.savetxt(fh, np.column_stack([spec.freqs, spec.power]), fmt="%.8e", delimiter=",")

    report = {
        "setup": cfg.setup,
        "mode": cfg.mode.value,
        "floor": table.floor,
        "threshold_db": table.threshold_db,
        "present": sorted(table.present),
        "mirrors": {r.label: r.to_dict() for r in table.rows},
    }
    (out / "peaks.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")

    present = ", ".join(sorted(table.present)) or "none"
    lines = [
        f"setup {cfg.setup} ({cfg.mode.value}), alpha = {cfg.alpha}, ensemble = {cfg.ensemble}",
        f"mirrors present at >= {table.threshold_db:g} dB above the median floor: {{{present}}}",
    ]
    for r in table.rows:
        lines.append(f"  {r.label}  {r.freq_hz:8.3f} Hz  {r.prominence_db:8.2f} dB  {'present' if r.present else 'absent'}")
    if cfg.interferometer.degenerate:
        lines.append("modulation is degenerate (psi0 == phi0): no mirror lines expected")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    return report


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--setup", type=int, choices=(1, 2))
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--seed", type=int)
    p.add_argument("--rate", type=float, help="sample rate in Hz")
    p.add_argument("--duration", type=float, help="record length in s")
    p.add_argument("--psi0", type=float, help="mirror modulation amplitude psi0 (rad)")
    p.add_argument("--phi0", type=float, help="mirror modulation amplitude phi0 (rad)")
    p.add_argument("--alpha", type=complex, help="input coherent amplitude, e.g. 1 or 0.5+0.5j")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nested-mzi", description="Nested Mach-Zehnder mirror-vibration simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample the detector, compute its spectrum and peak table")
    _common(p)
    p.add_argument("--out", type=Path, default=Path("out"))

    p = sub.add_parser("conformance", help="graph propagation vs closed-form states")
    _common(p)
    p.add_argument("--n-times", type=int, default=1000)

    p = sub.add_parser("oracle", help="Fock-space check of every element")
    _common(p)
    p.add_argument("--cutoff", type=int, default=20)

    p = sub.add_parser("lines", help="emit the analytic line list as JSON")
    _common(p)
    p.add_argument("--quantum", action="store_true", help="emit the quantum position-spectrum lines instead")
    p.add_argument("--omega0", type=float, default=1.0, help="oscillator frequency (rad/s)")
    p.add_argument("--x-zpf", type=float, default=1.0, help="zero-point position scale (m)")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    return cfg.with_overrides(
        setup=args.setup,
        mode=Mode(args.mode) if args.mode else None,
        seed=args.seed,
        rate=args.rate,
        duration=args.duration,
        alpha=args.alpha,
        psi0=args.psi0,
        phi0=args.phi0,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args).validate()
        if args.command == "simulate":
            report = run_simulate(cfg, args.out)
            print(f"present: {', '.join(report['present']) or 'none'}  ({args.out})")
            return EXIT_OK

        if args.command == "conformance":
            rep = run_conformance(cfg, n_times=args.n_times)
            print("\n".join(rep.lines()))
            if not rep.passed:
                bad = rep.first_failure
                print(f"conformance FAILED: first mismatch at mode {bad.mode} (setup {bad.setup}, {bad.stage})", file=sys.stderr)
                return EXIT_CONFORMANCE
            return EXIT_OK

        if args.command == "oracle":
            rep = run_oracle(cfg, args.cutoff)
            print("\n".join(rep.lines()))
            return EXIT_OK if rep.passed else EXIT_ORACLE

        if args.quantum:
            lines = quantum_psd_lines(cfg.alpha, args.omega0, args.x_zpf)
        else:
            lines = analytic_lines(cfg.setup, cfg.interferometer, cfg.alpha)
        print(json.dumps(lines.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    except (ConfigurationError, NetworkError, InvalidInputError, RangeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
