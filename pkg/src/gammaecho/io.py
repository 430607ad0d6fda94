"""File output: trace and scan CSVs, report records and run manifests.

All floats are written with 17 significant digits so repeated runs of the
same configuration produce byte-identical files, and every file is written
atomically (temp file, then rename).
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import GammaEchoError
from .metrics import EchoReport
from .scans import ScanResult
from .trace import FieldTrace


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def write_atomic(path, text: str) -> Path:
    """Write text via a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise GammaEchoError(f"cannot write {path}: {exc}") from exc
    return path


def trace_csv(trace: FieldTrace) -> str:
    lines = ["t_ns,re,im,abs2"]
    t = trace.times
    s = trace.samples
    a2 = trace.intensity
    for i in range(trace.n):
        lines.append(
            f"{format_float(t[i])},{format_float(s[i].real)},"
            f"{format_float(s[i].imag)},{format_float(a2[i])}"
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(path, trace: FieldTrace) -> Path:
    return write_atomic(path, trace_csv(trace))


def read_trace_csv(path) -> FieldTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    t = data[:, 0]
    return FieldTrace(float(t[0]), float(t[1] - t[0]), data[:, 1] + 1j * data[:, 2])


def report_record_text(record: dict) -> str:
    return "".join(f"{k}={_format_cell(v)}\n" for k, v in record.items())


def report_csv(record: dict) -> str:
    head = ",".join(record)
    row = ",".join(_format_cell(v) for v in record.values())
    return f"{head}\n{row}\n"


def write_report(directory, report: EchoReport, extra: dict | None = None) -> list[Path]:
    """Write report.txt (key=value lines) and report.csv (single row)."""
    record = dict(extra or {})
    record.update(report.as_record())
    directory = Path(directory)
    return [
        write_atomic(directory / "report.txt", report_record_text(record)),
        write_atomic(directory / "report.csv", report_csv(record)),
    ]


def scan_csv(result: ScanResult) -> str:
    rows = list(result.rows())
    if not rows:
        return "\n"
    head = ",".join(rows[0])
    lines = [head]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row.values()))
    return "\n".join(lines) + "\n"


def write_scan_csv(path, result: ScanResult) -> Path:
    return write_atomic(path, scan_csv(result))


def matrix_csv(k_values, xi_values, matrix) -> str:
    """Efficiency map layout: header row of xi values, first column of k."""
    matrix = np.asarray(matrix)
    lines = ["k\\xi," + ",".join(format_float(x) for x in xi_values)]
    for k, row in zip(k_values, matrix):
        lines.append(format_float(k) + "," + ",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_matrix_csv(path, k_values, xi_values, matrix) -> Path:
    return write_atomic(path, matrix_csv(k_values, xi_values, matrix))


def toml_dumps(mapping: dict) -> str:
    """Minimal TOML writer for manifests and config round trips.

    Supports scalars, lists of scalars, nested tables and lists of tables;
    floats keep full precision.
    """
    lines = []
    _emit_table(mapping, [], lines)
    return "\n".join(lines).strip() + "\n"


def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        out = repr(float(v))
        return out if any(c in out for c in ".einf") else out + ".0"
    if isinstance(v, str):
        escaped = (
            v.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\r", "\\r")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__} to TOML")


def _is_table_list(v) -> bool:
    return isinstance(v, (list, tuple)) and len(v) > 0 and all(
        isinstance(x, dict) for x in v
    )


def _emit_table(table: dict, prefix: list[str], lines: list[str]):
    scalars = {
        k: v for k, v in table.items() if not isinstance(v, dict) and not _is_table_list(v)
    }
    if prefix and (scalars or not table):
        lines.append("")
        lines.append(f"[{'.'.join(prefix)}]")
    for k, v in scalars.items():
        if v is None:
            continue
        lines.append(f"{k} = {_toml_scalar(v)}")
    for k, v in table.items():
        if isinstance(v, dict):
            _emit_table(v, prefix + [k], lines)
        elif _is_table_list(v):
            for item in v:
                lines.append("")
                lines.append(f"[[{'.'.join(prefix + [k])}]]")
                for ik, iv in item.items():
                    if iv is not None:
                        lines.append(f"{ik} = {_toml_scalar(iv)}")


def write_manifest(path, mapping: dict) -> Path:
    return write_atomic(path, toml_dumps(mapping))
