"""Command line front end.

Subcommands select the run mode; a TOML config supplies parameters, with
--set key=value overrides on top.  Each run writes its outputs plus a
manifest with the fully resolved configuration into the output directory
and prints the headline efficiency and fidelity to standard output.

Exit codes: 0 success, 2 configuration error, 3 grid too coarse, 4 no echo
detected, 5 I/O failure, 6 convergence failure, 1 unexpected error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, kernels
from .analytic import windowed_report
from .config import (
    RunConfig,
    make_comb,
    make_grid,
    make_pulse,
    parse_config,
    serialize_config,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    EchoDetectionError,
    GammaEchoError,
    GridResolutionError,
)
from .io import (
    write_atomic,
    write_manifest,
    write_matrix_csv,
    write_report,
    write_scan_csv,
    write_trace_csv,
)
from .metrics import EchoWindow, report
from .scans import SCENARIOS, ScanResult, run_scenario, scan_dynamical_xi, scan_k_xi, scan_m
from .solver import convergence_study, simulate_chain

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GRID = 3
EXIT_NO_ECHO = 4
EXIT_IO = 5
EXIT_CONVERGENCE = 6
EXIT_UNEXPECTED = 1

_ERROR_CODES = (
    (ConfigError, EXIT_CONFIG),
    (GridResolutionError, EXIT_GRID),
    (EchoDetectionError, EXIT_NO_ECHO),
    (ConvergenceError, EXIT_CONVERGENCE),
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gammaecho",
        description="Gamma-ray echo simulation for nuclear frequency comb chains",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, scenario_arg=False):
        p = sub.add_parser(name, help=help_text)
        if scenario_arg:
            p.add_argument("scenario", nargs="?", default="", help="scenario id")
        p.add_argument("-c", "--config", default=None, help="TOML configuration file")
        p.add_argument("-o", "--out", default=None, help="output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dotted path), repeatable",
        )
        p.add_argument("--threads", type=int, default=None, help="worker processes for scans")
        return p

    add("analytic", "frequency-series run of a static comb")
    add("simulate", "time-domain run of an arbitrary comb chain")
    add("scan-kxi", "echo efficiency over a (k, total xi) grid")
    add("scan-m", "best efficiency per target count")
    add("scan-dyn", "accelerated comb vs thickness, with/without the outer pair")
    add("scenario", "run a named experiment", scenario_arg=True)
    add("convergence", "grid refinement study of a comb chain")
    return parser


def _load_config(args) -> RunConfig:
    mode = args.command
    overrides = list(args.overrides)
    overrides.insert(0, f'mode="{mode}"')
    if getattr(args, "scenario", ""):
        overrides.insert(1, f'scenario="{args.scenario}"')
    if args.out is not None:
        overrides.append(f'output.directory="{args.out}"')
    if args.threads is not None:
        overrides.append(f"threads={args.threads}")
    if args.config is not None:
        return parse_config(path=args.config, overrides=overrides)
    return parse_config(text="", overrides=overrides)


def _window_override(cfg: RunConfig) -> EchoWindow | None:
    m = cfg.metrics
    if m.window_t1 is None:
        return None
    return EchoWindow(m.window_t1, m.window_t2)


def _print_ef(report_obj):
    print(f"E={report_obj.efficiency:.6f} F={report_obj.fidelity:.6f}")


def _manifest(cfg: RunConfig, out: Path, extra: dict | None = None) -> dict:
    mapping = {
        "run": {
            "mode": cfg.mode,
            "version": __version__,
            "kernel": kernels.backend_name(),
        },
        "config": {
            "resolved": serialize_config(cfg),
        },
    }
    if extra:
        mapping["results"] = extra
    write_manifest(out / "manifest.toml", mapping)
    return mapping


def _run_analytic(cfg: RunConfig, out: Path) -> int:
    pulse = make_pulse(cfg)
    comb = make_comb(cfg)
    rep = windowed_report(
        pulse, comb, shift_mode=cfg.metrics.shift_mode
    )
    from .analytic import series_trace
    from .trace import sample_pulse

    trace = series_trace(pulse, comb)
    write_trace_csv(out / "trace_output.csv", trace)
    write_trace_csv(out / "trace_input.csv", sample_pulse(pulse, trace.t_start, trace.dt, trace.n))
    write_report(out, rep)
    _manifest(cfg, out, {"efficiency": rep.efficiency, "fidelity": rep.fidelity})
    _print_ef(rep)
    return EXIT_OK


def _run_simulate(cfg: RunConfig, out: Path) -> int:
    pulse = make_pulse(cfg)
    comb = make_comb(cfg)
    grid = make_grid(cfg, comb, pulse)
    traces = simulate_chain(comb, pulse, grid)
    for i, tr in enumerate(traces):
        write_trace_csv(out / f"trace_{i:02d}.csv", tr)
    rep = report(
        traces[0],
        traces[-1],
        pulse,
        comb,
        shift_mode=cfg.metrics.shift_mode,
        window=_window_override(cfg),
    )
    write_report(out, rep)
    _manifest(cfg, out, {"efficiency": rep.efficiency, "fidelity": rep.fidelity})
    _print_ef(rep)
    return EXIT_OK


def _best_row(result: ScanResult, key: str = "efficiency"):
    rows = list(result.rows())
    keys = [k for k in rows[0] if k.startswith(key)]
    best, best_val = None, -1.0
    for row in rows:
        for k in keys:
            if row[k] > best_val:
                best, best_val = (row, k), row[k]
    return best


def _print_scan(result: ScanResult):
    (row, key) = _best_row(result)
    fid_key = key.replace("efficiency", "fidelity")
    fid = row.get(fid_key, 0.0)
    print(f"E={row[key]:.6f} F={fid:.6f}")


def _scan_manifest_extra(result: ScanResult) -> dict:
    return {"axis_hashes": json.dumps(result.provenance["axis_hashes"])}


def _run_scan_kxi(cfg: RunConfig, out: Path) -> int:
    pulse = make_pulse(cfg)
    result = scan_k_xi(
        pulse, cfg.comb.s, cfg.comb.m, cfg.scan.k_grid(), cfg.scan.xi_grid(),
        threads=cfg.threads,
    )
    write_scan_csv(out / "scan.csv", result)
    write_matrix_csv(
        out / "map.csv", result.axes["k"], result.axes["xi_total"], result.values["efficiency"]
    )
    if cfg.scan.save_traces:
        from .analytic import series_trace
        from .model import build_shaped_comb

        for i, k in enumerate(result.axes["k"]):
            for j, xi in enumerate(result.axes["xi_total"]):
                comb = build_shaped_comb(cfg.comb.m, cfg.comb.s, float(k), pulse.tau_p, float(xi))
                write_trace_csv(out / f"trace_k{i:02d}_xi{j:02d}.csv", series_trace(pulse, comb))
    refs = result.provenance.get("reference_points", [])
    extra = _scan_manifest_extra(result)
    extra["reference_points"] = json.dumps(refs)
    _manifest(cfg, out, extra)
    _print_scan(result)
    return EXIT_OK


def _run_scan_m(cfg: RunConfig, out: Path) -> int:
    pulse = make_pulse(cfg)
    result = scan_m(
        pulse,
        cfg.comb.s,
        cfg.comb.k,
        list(cfg.scan.m_list),
        (cfg.scan.xi_bar_min, cfg.scan.xi_bar_max),
        cfg.scan.xi_bar_step,
        threads=cfg.threads,
    )
    write_scan_csv(out / "scan.csv", result)
    _manifest(cfg, out, _scan_manifest_extra(result))
    _print_scan(result)
    return EXIT_OK


def _run_scan_dyn(cfg: RunConfig, out: Path) -> int:
    curves = {"both": None, "with": True, "without": False}[cfg.scan.curves]
    result = scan_dynamical_xi(
        cfg.scan.dyn_grid(),
        with_outer_pair=curves,
        tau_p=cfg.pulse.tau_p if cfg.pulse.tau_p is not None else 7.0,
        s=cfg.comb.s,
        tau_d=cfg.comb.tau_d,
        b_d=cfg.comb.b_d,
        tau_i=cfg.pulse.tau_i,
        threads=cfg.threads,
    )
    write_scan_csv(out / "scan.csv", result)
    if cfg.scan.save_traces:
        from .model import PulseSpec, build_dynamical_doppler
        from .solver import auto_grid

        tau_p = cfg.pulse.tau_p if cfg.pulse.tau_p is not None else 7.0
        pulse = PulseSpec(tau_p=tau_p, tau_i=result.provenance["tau_i"])
        for name, variant in (("with", "M6"), ("without", "M4")):
            if f"efficiency_{name}" not in result.values:
                continue
            for j, xb in enumerate(result.axes["xi_bar"]):
                comb = build_dynamical_doppler(
                    variant, cfg.comb.s, float(xb), cfg.comb.tau_d, cfg.comb.b_d
                )
                traces = simulate_chain(comb, pulse, auto_grid(comb, pulse))
                write_trace_csv(out / f"trace_{name}_{j:02d}.csv", traces[-1])
    _manifest(cfg, out, _scan_manifest_extra(result))
    _print_scan(result)
    return EXIT_OK


def _run_scenario(cfg: RunConfig, out: Path) -> int:
    overrides = {}
    if cfg.pulse.tau_i is not None:
        overrides["tau_i"] = cfg.pulse.tau_i
    if cfg.pulse.tau_p is not None:
        overrides["tau_p"] = cfg.pulse.tau_p
    if cfg.metrics.shift_mode != "auto":
        overrides["shift_mode"] = cfg.metrics.shift_mode
    result = run_scenario(cfg.scenario, overrides)
    summary = {}
    for label, rep in result.reports.items():
        prefix = "" if len(result.reports) == 1 else f"{label}_"
        for i, tr in enumerate(result.traces.get(label, [])):
            write_trace_csv(out / f"{prefix}trace_{i:02d}.csv", tr)
        record = {"scenario": cfg.scenario, "label": label}
        record.update(rep.as_record())
        from .io import report_csv, report_record_text

        write_atomic(out / f"{prefix}report.txt", report_record_text(record))
        write_atomic(out / f"{prefix}report.csv", report_csv(record))
        summary[f"{label}_efficiency"] = rep.efficiency
        summary[f"{label}_fidelity"] = rep.fidelity
    summary.update({f"param_{k}": v for k, v in result.params.items() if not isinstance(v, list)})
    _manifest(cfg, out, summary)
    _print_ef(result.report)
    for label, rep in list(result.reports.items())[1:]:
        print(f"E={rep.efficiency:.6f} F={rep.fidelity:.6f} label={label}")
    return EXIT_OK


def _run_convergence(cfg: RunConfig, out: Path) -> int:
    pulse = make_pulse(cfg)
    comb = make_comb(cfg)
    grid = make_grid(cfg, comb, pulse)
    study = convergence_study(comb, pulse, grid)
    lines = ["level,dt_ns,nz,efficiency,delta"]
    for i, lv in enumerate(study.levels):
        from .io import format_float

        lines.append(
            f"{i},{format_float(lv.dt)},{lv.nz},{format_float(lv.efficiency)},"
            f"{format_float(lv.delta) if i else 'nan'}"
        )
    write_atomic(out / "convergence.csv", "\n".join(lines) + "\n")
    traces = simulate_chain(comb, pulse, study.converged_grid)
    rep = report(traces[0], traces[-1], pulse, comb, shift_mode=cfg.metrics.shift_mode)
    write_report(out, rep)
    _manifest(
        cfg,
        out,
        {
            "converged_dt": study.converged_grid.dt,
            "converged_nz": study.converged_grid.nz,
            "efficiency": rep.efficiency,
            "fidelity": rep.fidelity,
        },
    )
    _print_ef(rep)
    return EXIT_OK


_RUNNERS = {
    "analytic": _run_analytic,
    "simulate": _run_simulate,
    "scan-kxi": _run_scan_kxi,
    "scan-m": _run_scan_m,
    "scan-dyn": _run_scan_dyn,
    "scenario": _run_scenario,
    "convergence": _run_convergence,
}


def execute(cfg: RunConfig) -> int:
    """Run one configuration; returns the process exit code."""
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return _RUNNERS[cfg.mode](cfg, out)
    except GammaEchoError as exc:
        code = EXIT_UNEXPECTED
        for etype, ecode in _ERROR_CODES:
            if isinstance(exc, etype):
                code = ecode
                break
        _write_error(out, code, exc)
        return code
    except OSError as exc:
        _write_error(out, EXIT_IO, exc)
        return EXIT_IO


def _write_error(out: Path, code: int, exc: Exception):
    record = {"exit_code": code, "error": type(exc).__name__, "message": str(exc)}
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_atomic(out / "error.json", json.dumps(record, indent=2) + "\n")
    except Exception:
        pass
    print(f"error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.mode == "scenario" and cfg.scenario not in SCENARIOS:
        print(
            f"error: unknown scenario {cfg.scenario!r}; expected one of "
            + ", ".join(sorted(SCENARIOS)),
            file=sys.stderr,
        )
        return EXIT_CONFIG
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
