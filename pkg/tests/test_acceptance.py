"""Acceptance criteria 1-10.

Each check prints one ``criterion N: PASS|FAIL`` line; the lines are also
collected into the pytest terminal summary (see conftest.py).  Run the file
directly with ``python tests/test_acceptance.py`` for just the ten lines.
"""
import time

import numpy as np
import pytest

from nested_mzi.checks import hom_null, run_conformance
from nested_mzi.cli import run_simulate
from nested_mzi.config import RunConfig
from nested_mzi.fock import oracle_compare
from nested_mzi.network import (
    InterferometerConfig,
    Mode,
    build_network,
    phase_relation_residual,
    propagate,
    verify_phase_relation,
)
from nested_mzi.spectrum import (
    Thermal,
    analytic_lines,
    classical_mixture_spectrum,
    peak_report,
    psd,
    sample_detector,
)

RESULTS: dict[int, str] = {}
RATE = 1024.0
BIG = 2**20 / RATE  # 2^20 samples
ALL = {"A", "B", "C", "E", "F"}
INNER = {"A", "B", "C"}


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def spectrum(setup, mode=Mode.PAPER_LITERAL, cfg=None, duration=BIG):
    cfg = cfg or InterferometerConfig.default()
    net = build_network(setup, cfg, mode)
    sp = psd(sample_detector(net, 1.0, duration, RATE), exclude_freqs=list(cfg.freqs.values()))
    return sp, peak_report(sp, cfg.freqs)


def test_criterion_01_setup1_membership():
    t0 = time.perf_counter()
    _, table = spectrum(1)
    dt = time.perf_counter() - t0
    low = min(r.prominence_db for r in table.rows)
    ok = table.present == ALL and low >= 20 and dt < 5
    record(1, ok, f"present={sorted(table.present)} min prominence {low:.1f} dB, 2^20 samples in {dt:.2f} s")


def test_criterion_02_setup2_membership():
    _, table = spectrum(2)
    ef = max(table["E"].prominence_db, table["F"].prominence_db)
    ok = table.present == INNER and ef < 20
    record(2, ok, f"present={sorted(table.present)} E/F max prominence {ef:.1f} dB")


def test_criterion_03_physical_mode():
    cfg = InterferometerConfig.default(psi0=0.02, phi0=0.0)
    _, ref = spectrum(1, cfg=cfg)
    _, phys = spectrum(2, Mode.PHYSICAL, cfg=cfg)
    drops = {k: 10 * np.log10(ref[k].peak_power / phys[k].peak_power) for k in "EF"}
    ok = min(drops.values()) >= 20 and INNER <= phys.present
    record(3, ok, f"E/F drop vs setup 1: {drops['E']:.0f} / {drops['F']:.0f} dB, present={sorted(phys.present)}")


def test_criterion_04_conformance():
    rep = run_conformance(RunConfig(), n_times=1000)
    worst = max(r.residual for r in rep.rows)
    bad = rep.first_failure
    detail = f"{len(rep.rows)} stage/mode checks at 1000 times, worst residual {worst:.1e}"
    if bad:
        detail += f"; first mismatch {bad.mode} (setup {bad.setup}, {bad.stage})"
    record(4, rep.passed, detail)


def test_criterion_05_oracle():
    rng = np.random.default_rng(5)
    worst, n = 1.0, 0
    for setup, mode in [(1, Mode.PAPER_LITERAL), (2, Mode.PAPER_LITERAL), (2, Mode.PHYSICAL)]:
        net = build_network(setup, mode=mode)
        for alpha in (1.0, 0.6 * np.exp(0.7j), 0.25j):
            t = float(rng.uniform(0, 64))
            amps = propagate(net, alpha, t)
            for el in net.order:
                top, left = (complex(amps[m]) if m is not None else 0j for m in el.inputs)
                M = el.kind.matrix(t)
                M = type(M)(*(complex(b) for b in (M.b11, M.b12, M.b21, M.b22)))
                worst = min(worst, oracle_compare(top, left, M, cutoff=20))
                n += 1
    hom = hom_null()
    ok = worst >= 1 - 1e-8 and hom < 1e-12
    record(5, ok, f"{n} element checks, min fidelity 1-{1 - worst:.1e}, HOM |1,1> amplitude {hom:.1e}")


def test_criterion_06_energy_closure():
    rng = np.random.default_rng(6)
    worst = 0.0
    combos = [(1, Mode.PAPER_LITERAL), (2, Mode.PAPER_LITERAL), (2, Mode.PHYSICAL)]
    for k in range(10_000):
        ifc = InterferometerConfig.default(
            psi0=rng.uniform(-0.1, 0.1),
            phi0=rng.uniform(-0.1, 0.1),
            phis=tuple(rng.uniform(-np.pi, np.pi, 4)),
            psis=tuple(rng.uniform(-np.pi, np.pi, 4)),
        )
        setup, mode = combos[k % 3]
        alpha = complex(*rng.uniform(-2, 2, 2))
        amps = propagate(build_network(setup, ifc, mode), alpha, rng.uniform(0, 64, 4))
        worst = max(worst, float(np.max(np.abs(amps.terminal_power() - abs(alpha) ** 2))))
    record(6, worst <= 1e-12, f"10^4 random configurations, worst |sum - |alpha|^2| = {worst:.1e}")


def test_criterion_07_first_order_ratios():
    details, ok = [], True
    for depth in (0.005, 0.02):
        cfg = InterferometerConfig.default(psi0=depth)
        sp1, _ = spectrum(1, cfg=cfg, duration=64.0)
        lines = analytic_lines(1, cfg)
        err1 = max(abs(sp1.line_power(f) / lines.weight_at(f).real - 1) for f in cfg.freqs.values())
        sp2, _ = spectrum(2, cfg=cfg, duration=64.0)
        p = [sp2.line_power(cfg.freqs[k]) for k in "ABC"]
        spread = max(p) / min(p) - 1
        ok &= err1 <= 0.10 and spread <= 0.05
        details.append(f"depth {depth}: setup1 max rel err {err1:.1e}, setup2 A/B/C spread {spread:.1e}")
    record(7, ok, "; ".join(details))


def test_criterion_08_phase_relation_and_leak():
    rng = np.random.default_rng(8)
    still = InterferometerConfig.default(psi0=0.0, psis=tuple(rng.uniform(-np.pi, np.pi, 4)))
    lam = np.pi + still.psis[1] + still.psis[2]
    t = rng.uniform(0, 64, 100)
    r0 = float(np.max(np.abs(phase_relation_residual(still, t, lam=lam))))
    r0 = max(r0, float(np.max(np.abs(verify_phase_relation(still, t)))))

    cfg = InterferometerConfig.default(psi0=0.05, psis=still.psis)
    alpha = 0.8 + 0.5j
    leak = np.abs(propagate(build_network(2, cfg, Mode.PHYSICAL), alpha, t)["L7"])
    bound = abs(alpha) * np.abs(phase_relation_residual(cfg, t)) / 2
    slack = float(np.min(bound - leak))
    ok = r0 <= 1e-12 and slack >= -1e-15
    record(8, ok, f"zero-modulation residual {r0:.1e}; L7 leak within |alpha||r|/2 at 100 times (min slack {slack:.1e})")


def test_criterion_09_thermal_mixture():
    details, ok = [], True
    for setup, expected in ((1, ALL), (2, INNER)):
        cfg = InterferometerConfig.default()
        mix = classical_mixture_spectrum(Thermal(1.0), build_network(setup, cfg), n_draws=1000, seed=0)
        present = peak_report(mix.spectrum, cfg.freqs).present
        ok &= present == expected and abs(mix.mean_photons - 1.0) <= 0.05
        details.append(f"setup {setup} present={sorted(present)}")
    details.append(f"mean |alpha|^2 = {mix.mean_photons:.4f}")
    record(9, ok, ", ".join(details))


def test_criterion_10_determinism(tmp_path):
    same = True
    for setup, ensemble in ((1, "none"), (2, "thermal")):
        cfg = RunConfig(setup=setup, ensemble=ensemble, seed=42)
        for d in ("a", "b"):
            run_simulate(cfg, tmp_path / f"{setup}{d}")
        for name in ("spectrum.csv", "peaks.json", "summary.txt"):
            same &= (tmp_path / f"{setup}a" / name).read_bytes() == (tmp_path / f"{setup}b" / name).read_bytes()
    record(10, same, "two runs per setup with seed 42: spectrum.csv, peaks.json, summary.txt byte-identical")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
