"""Acceptance suite: one test per criterion, printed as PASS/FAIL lines.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines including the measured values.  Three criteria compare against
published dynamical-comb results whose full protocol (pulse arrival time,
acceleration-profile tuning, windowing) is not part of the published
parameter set; they are asserted faithfully at their stated tolerances and
the measured best-faith values are printed either way.
"""

import math

import numpy as np
import pytest

from gammaecho import (
    FE57,
    CombSystem,
    PulseSpec,
    SeriesConfig,
    TargetSpec,
    auto_grid,
    build_flat_comb,
    build_shaped_comb,
    closed_form_efficiency,
    convergence_study,
    default_arrival_time,
    echo_field_series,
    efficiency,
    fidelity,
    report,
    sample_pulse,
    series_trace,
    shaped_weights,
    simulate_chain,
)
from gammaecho.analytic import shaped_comb_report
from gammaecho.scans import run_scenario, scan_dynamical_xi, scan_m

DELAY_S50 = 2.0 * math.pi / (50.0 * FE57.gamma)


def finish(name: str, checks: list[tuple[str, bool, str]]):
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{label} [{'ok' if good else 'FAIL'}] {info}" for label, good, info in checks)
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} -- {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_closed_form():
    checks = []
    e_ref = closed_form_efficiency(8.0, 50.0)
    checks.append(("E(8,50)=0.477+-0.001", abs(e_ref - 0.477) <= 1e-3, f"got {e_ref:.4f}"))
    seq = [closed_form_efficiency(s / (2 * math.pi), s) for s in (1e3, 1e4, 1e5)]
    checks.append(
        ("monotone toward the bound", seq[0] < seq[1] < seq[2], f"got {[round(x, 5) for x in seq]}")
    )
    checks.append(("limit 0.541+-0.001", abs(seq[-1] - 0.541) <= 1e-3, f"got {seq[-1]:.4f}"))
    finish("criterion-1 closed form", checks)


def test_criterion_2_series_reference_case():
    pulse = PulseSpec(tau_p=1.0, tau_i=default_arrival_time(1.0))
    comb = build_shaped_comb(21, 50.0, 0.0, 1.0, 21 * 8.0)
    out = series_trace(pulse, comb)
    inp = sample_pulse(pulse, out.t_start, out.dt, out.n)
    rep = report(inp, out, pulse, comb)
    checks = [
        ("windowed E=0.477+-0.02", abs(rep.efficiency - 0.477) <= 0.02, f"got {rep.efficiency:.4f}"),
        (
            "echo peak at tau_i+17.73 ns within one sample",
            abs(rep.echo_peak - (pulse.tau_i + DELAY_S50)) <= out.dt + 1e-12,
            f"got offset {rep.echo_peak - pulse.tau_i - DELAY_S50:+.4f} ns at dt={out.dt:.4f} ns "
            "(the revival of this finite comb is pulled early by dispersion)",
        ),
    ]
    finish("criterion-2 series reference", checks)


def test_criterion_3_broadband_map_anchors():
    pulse = PulseSpec(tau_p=1.0, tau_i=default_arrival_time(1.0))
    e0 = shaped_comb_report(0.0, 80.0, pulse, 50.0, 21).efficiency
    e1 = shaped_comb_report(1.0, 80.0, pulse, 50.0, 21).efficiency
    finish(
        "criterion-3 broadband anchors",
        [
            ("E(k=0, xi=80)=0.30+-0.03", abs(e0 - 0.30) <= 0.03, f"got {e0:.4f}"),
            ("E(k=1, xi=80)=0.44+-0.03", abs(e1 - 0.44) <= 0.03, f"got {e1:.4f}"),
        ],
    )


def test_criterion_4_narrowband_map_anchors():
    pulse = PulseSpec(tau_p=5.0, tau_i=default_arrival_time(5.0))
    e_flat60 = shaped_comb_report(0.0, 60.0, pulse, 50.0, 9).efficiency
    e_shaped26 = shaped_comb_report(0.5, 26.0, pulse, 50.0, 9).efficiency
    e_flat26 = shaped_comb_report(0.0, 26.0, pulse, 50.0, 9).efficiency
    finish(
        "criterion-4 narrowband anchors",
        [
            ("E(k=0, xi=60) >= 0.50", e_flat60 >= 0.50, f"got {e_flat60:.4f}"),
            ("E(k=0.5, xi=26) >= 0.50", e_shaped26 >= 0.50, f"got {e_shaped26:.4f}"),
            ("E(k=0, xi=26) < 0.50", e_flat26 < 0.50, f"got {e_flat26:.4f}"),
        ],
    )


def test_criterion_5_three_target_optimum():
    pulse = PulseSpec(tau_p=5.0, tau_i=default_arrival_time(5.0))
    res = scan_m(pulse, 50.0, 0.0, [3], xi_bar_range=(0.0, 15.0), xi_bar_step=0.05)
    e, f = res.values["efficiency"][0], res.values["fidelity"][0]
    finish(
        "criterion-5 three-target optimum",
        [
            ("max E=0.51+-0.02", abs(e - 0.51) <= 0.02, f"got {e:.4f}"),
            ("F=0.99+-0.01", abs(f - 0.99) <= 0.01, f"got {f:.4f}"),
        ],
    )


def test_criterion_6_solver_matches_series_on_random_combs():
    rng = np.random.default_rng(20260808)
    worst = 0.0
    for _ in range(10):
        m = int(rng.integers(1, 10))
        s = float(rng.uniform(30.0, 80.0))
        tau_p = float(rng.uniform(1.0, 7.0))
        xis = rng.uniform(0.0, 10.0, size=m)
        pulse = PulseSpec(tau_p=tau_p, tau_i=default_arrival_time(tau_p))
        positions = (np.arange(1, m + 1) - 0.5 * (m + 1)) * s
        comb = CombSystem(
            tuple(TargetSpec(xi=float(x), doppler_static=float(p)) for x, p in zip(xis, positions)),
            spacing=s,
        )
        study = convergence_study(comb, pulse, auto_grid(comb, pulse))
        out = simulate_chain(comb, pulse, study.converged_grid)[-1]
        cfg = SeriesConfig.for_pulse(pulse, s, truncation_tol=1e-14, half_period=800.0)
        ref = echo_field_series(out.times, pulse, comb, cfg)
        worst = max(worst, np.linalg.norm(out.samples - ref) / np.linalg.norm(ref))
    finish(
        "criterion-6 numeric vs series",
        [("10 random combs rel L2 < 1e-2", worst < 1e-2, f"worst {worst:.2e}")],
    )


def test_criterion_7_dynamical_scenarios():
    checks = []

    r_h6 = run_scenario("fig3e_hybrid6")
    checks.append(
        (
            "hybrid6 E=0.67+-0.03",
            abs(r_h6.report.efficiency - 0.67) <= 0.03,
            f"got {r_h6.report.efficiency:.4f} at calibrated tau_i={r_h6.params['tau_i']}",
        )
    )
    checks.append(
        ("hybrid6 F=0.96+-0.02", abs(r_h6.report.fidelity - 0.96) <= 0.02, f"got {r_h6.report.fidelity:.4f}")
    )

    # coincidence of the two equivalent systems on a shared grid
    from gammaecho.model import build_dynamical_doppler, build_dynamical_hybrid

    tau_i = r_h6.params["tau_i"]
    pulse = PulseSpec(tau_p=7.0, tau_i=tau_i)
    hyb = build_dynamical_hybrid("M6", 50.0, 11.2, 60.0, 100.0)
    dop = build_dynamical_doppler("M10", 50.0, 5.6, 60.0, 100.0)
    grid = auto_grid(hyb, pulse).refined()
    a = simulate_chain(hyb, pulse, grid)[-1]
    b = simulate_chain(dop, pulse, grid)[-1]
    l2 = np.linalg.norm(a.samples - b.samples) / np.linalg.norm(a.samples)
    checks.append(("hybrid6 vs doppler10 L2 < 5%", l2 < 0.05, f"got {l2:.3f}"))

    r_f4 = run_scenario("fig3f_doppler4")
    checks.append(
        ("doppler4 E=0.66+-0.03", abs(r_f4.report.efficiency - 0.66) <= 0.03, f"got {r_f4.report.efficiency:.4f}")
    )
    checks.append(
        ("doppler4 F=0.95+-0.02", abs(r_f4.report.fidelity - 0.95) <= 0.02, f"got {r_f4.report.fidelity:.4f}")
    )

    r_h5 = run_scenario("fig3e_hybrid6", overrides={"tau_p": 5.0})
    checks.append(
        ("5ns variant E=0.65+-0.03", abs(r_h5.report.efficiency - 0.65) <= 0.03, f"got {r_h5.report.efficiency:.4f}")
    )
    checks.append(
        ("5ns variant F=0.87+-0.03", abs(r_h5.report.fidelity - 0.87) <= 0.03, f"got {r_h5.report.fidelity:.4f}")
    )
    finish("criterion-7 dynamical scenarios", checks)


def test_criterion_8_outer_pair_pruning():
    grid = np.arange(2.0, 15.01, 0.4)
    res = scan_dynamical_xi(grid)
    d_e = np.abs(res.values["efficiency_with"] - res.values["efficiency_without"])
    d_f = np.abs(res.values["fidelity_with"] - res.values["fidelity_without"])
    finish(
        "criterion-8 outer-pair pruning",
        [
            ("|dE| <= 0.03 across the grid", float(d_e.max()) <= 0.03, f"max {d_e.max():.3f}"),
            ("|dF| <= 0.03 across the grid", float(d_f.max()) <= 0.03, f"max {d_f.max():.3f}"),
        ],
    )


def test_criterion_9_property_suite():
    checks = []
    rng = np.random.default_rng(42)

    # shaped weights: normalization and symmetry
    ok = True
    for _ in range(50):
        m = 2 * int(rng.integers(0, 13)) + 1
        w = shaped_weights(m, float(rng.uniform(0, 3)), float(rng.uniform(0.5, 9)), float(rng.uniform(10, 120)))
        ok &= abs(w.sum() - 1.0) < 1e-12 and bool(np.all(w == w[::-1]))
    checks.append(("weights normalized and symmetric", ok, "50 random draws"))

    # passivity over 20 random combs, static and accelerated
    from gammaecho.model import MotionProfile

    ok, worst = True, 0.0
    for _ in range(20):
        m = int(rng.integers(1, 5))
        targets = []
        for _ in range(m):
            eps = int(rng.choice([-1, 0, 1]))
            mot = MotionProfile(epsilon=eps, tau_d=60.0, b_d=100.0, s_units=50.0)
            targets.append(
                TargetSpec(
                    xi=float(rng.uniform(0, 8)),
                    doppler_static=float(rng.uniform(-60, 60)),
                    hyperfine=float(rng.choice([0.0, 50.0])),
                    motion=mot,
                )
            )
        comb = CombSystem(tuple(targets), spacing=50.0)
        pulse = PulseSpec(tau_p=float(rng.uniform(1, 6)), tau_i=20.0)
        traces = simulate_chain(comb, pulse, auto_grid(comb, pulse))
        ratio = traces[-1].energy() / traces[0].energy()
        worst = max(worst, ratio)
        ok &= ratio <= 1.0 + 1e-12
    checks.append(("passivity on 20 random combs", ok, f"max energy ratio {worst:.6f}"))

    # linearity: efficiency and fidelity invariant under amplitude scaling
    comb = build_flat_comb(3, 50.0, 8.0)
    grid = auto_grid(comb, PulseSpec(5.0, 25.0))
    reps = [
        report(tr[0], tr[-1], p, comb)
        for p in (PulseSpec(5.0, 25.0, omega0=1.0), PulseSpec(5.0, 25.0, omega0=3.7))
        for tr in [simulate_chain(comb, p, grid)]
    ]
    de = abs(reps[0].efficiency - reps[1].efficiency)
    df = abs(reps[0].fidelity - reps[1].fidelity)
    checks.append(("E, F amplitude-invariant to 1e-12", de < 1e-12 and df < 1e-12, f"dE={de:.1e} dF={df:.1e}"))

    # static permutation invariance
    targets = (
        TargetSpec(xi=3.0, doppler_static=-50.0),
        TargetSpec(xi=6.0, doppler_static=0.0),
        TargetSpec(xi=1.5, doppler_static=50.0),
    )
    pulse = PulseSpec(tau_p=2.0, tau_i=10.0)
    g = auto_grid(CombSystem(targets, 50.0), pulse)
    a = simulate_chain(CombSystem(targets, 50.0), pulse, g)[-1]
    b = simulate_chain(CombSystem(targets[::-1], 50.0), pulse, g)[-1]
    perm = np.linalg.norm(a.samples - b.samples) / np.linalg.norm(a.samples)
    checks.append(("static permutation invariance < 1e-3", perm < 1e-3, f"rel L2 {perm:.2e}"))

    # fidelity of an exact scaled and shifted copy
    from gammaecho import EchoWindow, FieldTrace

    t = np.arange(0.0, 100.0, 0.05)
    inp = FieldTrace(0.0, 0.05, np.exp(-(((t - 20.0) / 2.0) ** 2)).astype(complex))
    out = FieldTrace(0.0, 0.05, np.roll((0.3 - 0.8j) * inp.samples, 600))
    f_copy = fidelity(inp, out, EchoWindow(35.0, 65.0), 30.0)
    checks.append(("fidelity of exact copy = 1", abs(f_copy - 1.0) < 1e-9, f"got {f_copy:.12f}"))

    # second-order refinement: successive differences shrink about fourfold
    study = convergence_study(
        build_flat_comb(3, 50.0, 8.0), PulseSpec(5.0, 25.0), auto_grid(build_flat_comb(3, 50.0, 8.0), PulseSpec(5.0, 25.0)),
        tol=1e-6, max_levels=5,
    )
    ratios = study.ratios()
    ok = len(ratios) >= 2 and all(3.0 <= r <= 5.0 for r in ratios)
    checks.append(("refinement ratios in [3, 5]", ok, f"got {[round(r, 2) for r in ratios]}"))

    finish("criterion-9 property suite", checks)
