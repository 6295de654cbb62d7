"""Stable on-disk formats for tables, runs, and analysis outputs.

Every file is plain CSV preceded by a ``#``-prefixed header block whose
first line names the file kind and schema version.  Floats are written
with 17 significant digits so that read(write(x)) is bit-exact; the
degrees-of-freedom value INFINITY serializes as the literal ``inf``.
NaN is never written: a record without an assigned confidence writes an
empty ``pi`` field plus its flag.  Writes go to a temporary file in the
target directory and are renamed into place, so readers never observe a
partial file.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .criteria import CriterionTable, build_c_lattice, build_psi_lattice
from .design import Design, VariancePoint
from .distributions import INFINITY, normal_quantile, student_t_quantile
from .ideal import ResidualReport
from .linnik import CrossingReport
from .power import PowerRow
from .simulate import EcdfCurve, SimulationRun, TheoreticalCurve

__all__ = [
    "RunManifest",
    "SchemaError",
    "emit_table2",
    "read_curve",
    "read_ecdf",
    "read_manifest",
    "read_power_table",
    "read_records",
    "read_table",
    "write_crossings",
    "write_curve",
    "write_ecdf",
    "write_manifest",
    "write_power_table",
    "write_records",
    "write_residual_report",
    "write_table",
    "write_table2",
]

SCHEMA_VERSION = 1

TABLE2_NU = (10.0, 15.0, 30.0, INFINITY)
TABLE2_C = tuple(round(0.05 * i, 2) for i in range(11))


class SchemaError(ValueError):
    """File does not match the expected kind, version, or layout."""


# --------------------------------------------------------------------------
# primitives


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        raise ValueError("NaN is not representable in these files")
    return "%.17g" % x


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise SchemaError(f"{where}: bad float {text!r}") from exc
    if math.isnan(value):
        raise SchemaError(f"{where}: NaN is forbidden")
    return value


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _header(kind: str, meta: dict[str, object]) -> list[str]:
    lines = [f"# twosample-{kind} schema={SCHEMA_VERSION}"]
    for key, value in meta.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = _fmt(value)
        lines.append(f"# {key}: {value}")
    return lines


def _read_lines(path: str | Path) -> list[str]:
    with open(path) as fh:
        return [line.rstrip("\n") for line in fh]


def _split_file(lines: Sequence[str], kind: str) -> tuple[dict[str, str], list[str]]:
    """Header dict and data rows; enforces the kind/version banner."""
    if not lines or not lines[0].startswith("# twosample-"):
        raise SchemaError("missing header banner")
    banner = lines[0][2:].split()
    if banner[0] != f"twosample-{kind}":
        raise SchemaError(f"expected a twosample-{kind} file, found {banner[0]!r}")
    if len(banner) < 2 or not banner[1].startswith("schema="):
        raise SchemaError("missing schema version")
    version = banner[1].split("=", 1)[1]
    if version != str(SCHEMA_VERSION):
        raise SchemaError(f"unsupported schema version {version} (supported: {SCHEMA_VERSION})")
    meta: dict[str, str] = {}
    body: list[str] = []
    for line in lines[1:]:
        if line.startswith("#"):
            stripped = line[1:].strip()
            if stripped and ":" in stripped:
                key, value = stripped.split(":", 1)
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    return meta, body


def _meta_float(meta: dict[str, str], key: str) -> float:
    if key not in meta:
        raise SchemaError(f"missing header field {key!r}")
    return _parse_float(meta[key], f"header {key}")


def _meta_int(meta: dict[str, str], key: str) -> int:
    if key not in meta:
        raise SchemaError(f"missing header field {key!r}")
    try:
        return int(meta[key])
    except ValueError as exc:
        raise SchemaError(f"header {key}: bad integer {meta[key]!r}") from exc


def _meta_design(meta: dict[str, str]) -> Design:
    n1 = _meta_float(meta, "n1")
    n2 = _meta_float(meta, "n2")
    return Design(n1 if n1 == INFINITY else int(n1), n2 if n2 == INFINITY else int(n2))


# --------------------------------------------------------------------------
# criterion tables


def write_table(t: CriterionTable, path: str | Path) -> None:
    node_col = "theta_deg" if t.lattice_kind == "psi91" else "c"
    lines = _header("criterion-table", {
        "family": t.family,
        "n1": float(t.design.n1),
        "n2": float(t.design.n2),
        "alpha": t.alpha,
        "lattice": t.lattice_kind,
        "tolerance": t.tolerance,
        "converged": t.converged,
        "sweeps": t.sweeps,
        "generator": f"twosample {__version__}",
    })
    lines.append(f"index,{node_col},value,residual")
    for i in range(t.nodes.size):
        lines.append(
            f"{i},{_fmt(t.nodes[i])},{_fmt(t.values[i])},{_fmt(t.residuals[i])}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def _expected_lattice(kind: str) -> np.ndarray:
    return build_psi_lattice() if kind == "psi91" else build_c_lattice()


def read_table(path: str | Path) -> CriterionTable:
    meta, body = _split_file(_read_lines(path), "criterion-table")
    family = meta.get("family")
    if family not in ("ideal", "fisher-behrens"):
        raise SchemaError(f"unknown criterion family {family!r}")
    d = _meta_design(meta)
    alpha = _meta_float(meta, "alpha")
    lattice_kind = meta.get("lattice")
    if lattice_kind not in ("psi91", "c101"):
        raise SchemaError(f"unknown lattice kind {lattice_kind!r}")
    node_col = "theta_deg" if lattice_kind == "psi91" else "c"

    if not body:
        raise SchemaError("missing column header row")
    columns = body[0].split(",")
    if columns != ["index", node_col, "value", "residual"]:
        raise SchemaError(
            f"bad columns {body[0]!r} (expected index,{node_col},value,residual)"
        )
    rows = body[1:]
    expected = _expected_lattice(lattice_kind)
    if len(rows) != expected.size:
        raise SchemaError(f"expected {expected.size} rows, found {len(rows)}")

    nodes = np.empty(expected.size)
    values = np.empty(expected.size)
    residuals = np.empty(expected.size)
    for r, line in enumerate(rows):
        parts = line.split(",")
        if len(parts) != 4:
            raise SchemaError(f"row {r}: expected 4 fields, found {len(parts)}")
        if int(parts[0]) != r:
            raise SchemaError(f"row {r}: index column reads {parts[0]!r}")
        nodes[r] = _parse_float(parts[1], f"row {r} {node_col}")
        values[r] = _parse_float(parts[2], f"row {r} value")
        residuals[r] = _parse_float(parts[3], f"row {r} residual")

    bad = np.nonzero(np.diff(nodes) <= 0)[0]
    if bad.size:
        raise SchemaError(f"row {int(bad[0]) + 1}: lattice nodes not increasing")
    if np.max(np.abs(nodes - expected)) > 1e-9:
        raise SchemaError(f"nodes do not match the {lattice_kind} lattice")

    target = 1.0 - alpha
    pin_lo = normal_quantile(target) if d.nu2 == INFINITY else student_t_quantile(target, d.nu2)
    pin_hi = normal_quantile(target) if d.nu1 == INFINITY else student_t_quantile(target, d.nu1)
    if abs(values[0] - pin_lo) > 1e-9 or abs(values[-1] - pin_hi) > 1e-9:
        raise SchemaError("boundary values do not match the pinned quantiles")

    return CriterionTable(
        family=family, design=d, alpha=alpha, lattice_kind=lattice_kind,
        nodes=nodes, values=values, residuals=residuals,
        converged=meta.get("converged") == "true",
        tolerance=_meta_float(meta, "tolerance"),
        sweeps=_meta_int(meta, "sweeps"),
    )


# --------------------------------------------------------------------------
# run manifest (JSON)


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a simulation run bit-exactly."""

    seed: int
    n1: float
    n2: float
    psi_deg: float
    zeta: float
    n_reps: int
    family: str | None = None
    files: dict[str, str] = field(default_factory=dict)
    version: str = __version__

    @classmethod
    def for_run(cls, run: SimulationRun, files: dict[str, str] | None = None) -> "RunManifest":
        return cls(
            seed=run.seed, n1=float(run.design.n1), n2=float(run.design.n2),
            psi_deg=run.psi.psi_deg, zeta=run.psi.zeta, n_reps=run.n_reps,
            family=run.confidence_family, files=dict(files or {}),
        )


def write_manifest(m: RunManifest, path: str | Path) -> None:
    payload = {
        "kind": "twosample-run-manifest",
        "schema": SCHEMA_VERSION,
        "seed": m.seed,
        "n1": _fmt(m.n1),
        "n2": _fmt(m.n2),
        "psi_deg": _fmt(m.psi_deg),
        "zeta": _fmt(m.zeta),
        "n_reps": m.n_reps,
        "family": m.family,
        "files": m.files,
        "version": m.version,
    }
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> RunManifest:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("kind") != "twosample-run-manifest":
        raise SchemaError("not a run manifest")
    if payload.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {payload.get('schema')}")
    return RunManifest(
        seed=int(payload["seed"]),
        n1=_parse_float(payload["n1"], "n1"),
        n2=_parse_float(payload["n2"], "n2"),
        psi_deg=_parse_float(payload["psi_deg"], "psi_deg"),
        zeta=_parse_float(payload["zeta"], "zeta"),
        n_reps=int(payload["n_reps"]),
        family=payload.get("family"),
        files=dict(payload.get("files", {})),
        version=str(payload.get("version", "")),
    )


# --------------------------------------------------------------------------
# simulation records


def write_records(run: SimulationRun, path: str | Path) -> None:
    meta = {
        "seed": run.seed,
        "n1": float(run.design.n1),
        "n2": float(run.design.n2),
        "psi_deg": run.psi.psi_deg,
        "gamma": run.psi.gamma,
        "zeta": run.psi.zeta,
        "n_reps": run.n_reps,
        "family": run.confidence_family or "none",
        "generator": f"twosample {__version__}",
    }
    lines = _header("records", meta)
    lines.append("index,v,z,theta_deg,pi,flag")
    for i in range(run.n_reps):
        if run.pi is None:
            pi_txt, flag = "", "unassigned"
        elif run.unassignable is not None and run.unassignable[i]:
            pi_txt, flag = "", "unassignable"
        else:
            pi_txt = _fmt(run.pi[i])
            flag = "clamped" if (run.clamped is not None and run.clamped[i]) else "ok"
        lines.append(
            f"{i},{_fmt(run.v[i])},{_fmt(run.z[i])},{_fmt(run.theta_deg[i])},{pi_txt},{flag}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_records(path: str | Path) -> SimulationRun:
    meta, body = _split_file(_read_lines(path), "records")
    if not body or body[0] != "index,v,z,theta_deg,pi,flag":
        raise SchemaError("bad records column header")
    d = _meta_design(meta)
    psi = VariancePoint(
        zeta=_meta_float(meta, "zeta"),
        gamma=_meta_float(meta, "gamma"),
        psi_deg=_meta_float(meta, "psi_deg"),
    )
    n_reps = _meta_int(meta, "n_reps")
    rows = body[1:]
    if len(rows) != n_reps:
        raise SchemaError(f"expected {n_reps} records, found {len(rows)}")
    family = meta.get("family", "none")

    v = np.empty(n_reps)
    z = np.empty(n_reps)
    theta = np.empty(n_reps)
    pi = np.full(n_reps, np.nan)
    unassignable = np.zeros(n_reps, dtype=bool)
    clamped = np.zeros(n_reps, dtype=bool)
    any_pi = False
    for r, line in enumerate(rows):
        parts = line.split(",")
        if len(parts) != 6:
            raise SchemaError(f"row {r}: expected 6 fields, found {len(parts)}")
        v[r] = _parse_float(parts[1], f"row {r} v")
        z[r] = _parse_float(parts[2], f"row {r} z")
        theta[r] = _parse_float(parts[3], f"row {r} theta_deg")
        flag = parts[5]
        if flag == "unassigned":
            continue
        any_pi = True
        if flag == "unassignable":
            unassignable[r] = True
        elif flag in ("ok", "clamped"):
            pi[r] = _parse_float(parts[4], f"row {r} pi")
            clamped[r] = flag == "clamped"
        else:
            raise SchemaError(f"row {r}: unknown flag {flag!r}")

    return SimulationRun(
        seed=_meta_int(meta, "seed"), design=d, psi=psi, n_reps=n_reps,
        v=v, z=z, theta_deg=theta,
        pi=pi if any_pi else None,
        unassignable=unassignable if any_pi else None,
        clamped=clamped if any_pi else None,
        confidence_family=None if family == "none" else family,
    )


# --------------------------------------------------------------------------
# curves, power, reports


def write_ecdf(curve: EcdfCurve, path: str | Path) -> None:
    lines = _header("ecdf", {"n": curve.n})
    lines.append("x,y")
    heights = curve.heights()
    for i in range(curve.n + 1):
        lines.append(f"{_fmt(curve.rho[i])},{_fmt(heights[i])}")
        lines.append(f"{_fmt(curve.rho[i + 1])},{_fmt(heights[i])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_ecdf(path: str | Path) -> EcdfCurve:
    meta, body = _split_file(_read_lines(path), "ecdf")
    if not body or body[0] != "x,y":
        raise SchemaError("bad ecdf column header")
    n = _meta_int(meta, "n")
    rows = body[1:]
    if len(rows) != 2 * (n + 1):
        raise SchemaError(f"expected {2 * (n + 1)} vertices, found {len(rows)}")
    xs = [_parse_float(r.split(",")[0], f"row {i} x") for i, r in enumerate(rows)]
    rho = np.array([xs[0]] + xs[1::2])
    return EcdfCurve(rho=rho)


def write_curve(curve: TheoreticalCurve, path: str | Path) -> None:
    lines = _header("theoretical-curve", {"points": curve.levels.size})
    lines.append("level,prob")
    for level, prob in zip(curve.levels, curve.probs):
        lines.append(f"{_fmt(level)},{_fmt(prob)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_curve(path: str | Path) -> TheoreticalCurve:
    meta, body = _split_file(_read_lines(path), "theoretical-curve")
    if not body or body[0] != "level,prob":
        raise SchemaError("bad curve column header")
    rows = body[1:]
    if len(rows) != _meta_int(meta, "points"):
        raise SchemaError("point count does not match header")
    levels, probs = [], []
    for i, row in enumerate(rows):
        parts = row.split(",")
        if len(parts) != 2:
            raise SchemaError(f"row {i}: expected 2 fields")
        levels.append(_parse_float(parts[0], f"row {i} level"))
        probs.append(_parse_float(parts[1], f"row {i} prob"))
    return TheoreticalCurve(levels=np.array(levels), probs=np.array(probs))


def write_power_table(rows: Sequence[PowerRow], path: str | Path,
                      *, design: Design, alpha: float, zeta: float) -> None:
    lines = _header("power", {
        "n1": float(design.n1), "n2": float(design.n2),
        "alpha": alpha, "zeta": zeta,
    })
    lines.append("delta,power_T,power_V,gap")
    for row in rows:
        lines.append(
            f"{_fmt(row.delta)},{_fmt(row.power_t)},{_fmt(row.power_v)},{_fmt(row.gap)}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_power_table(path: str | Path) -> list[PowerRow]:
    _, body = _split_file(_read_lines(path), "power")
    if not body or body[0] != "delta,power_T,power_V,gap":
        raise SchemaError("bad power column header")
    out = []
    for i, row in enumerate(body[1:]):
        parts = row.split(",")
        if len(parts) != 4:
            raise SchemaError(f"row {i}: expected 4 fields")
        out.append(PowerRow(
            delta=_parse_float(parts[0], f"row {i} delta"),
            power_t=_parse_float(parts[1], f"row {i} power_T"),
            power_v=_parse_float(parts[2], f"row {i} power_V"),
            gap=_parse_float(parts[3], f"row {i} gap"),
        ))
    return out


def write_residual_report(reports: Iterable[ResidualReport], path: str | Path) -> None:
    lines = _header("residuals", {})
    lines.append("n1,n2,alpha,min_d,gamma_at_min,max_d,gamma_at_max,mean_abs_d")
    for rep in reports:
        lines.append(",".join([
            _fmt(float(rep.design.n1)), _fmt(float(rep.design.n2)), _fmt(rep.alpha),
            _fmt(rep.min_d), _fmt(rep.gamma_at_min),
            _fmt(rep.max_d), _fmt(rep.gamma_at_max), _fmt(rep.mean_abs_d),
        ]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_crossings(reports: Iterable[CrossingReport], path: str | Path) -> None:
    lines = _header("crossings", {})
    lines.append("n1,n2,alpha_lo,alpha_hi,interval_lo,interval_hi,residual_quality,inconclusive")
    for rep in reports:
        base = [
            _fmt(float(rep.design.n1)), _fmt(float(rep.design.n2)),
            _fmt(rep.alpha_pair[0]), _fmt(rep.alpha_pair[1]),
        ]
        tail = [_fmt(rep.residual_quality), "true" if rep.inconclusive else "false"]
        if rep.crossing_intervals:
            for lo, hi in rep.crossing_intervals:
                lines.append(",".join(base + [_fmt(lo), _fmt(hi)] + tail))
        else:
            lines.append(",".join(base + ["", ""] + tail))
    _atomic_write(path, "\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# the printed critical-value grid


def _table2_key(t: CriterionTable) -> tuple[float, float]:
    return (float(t.design.nu2), float(t.design.nu1))


def emit_table2(tables: Sequence[CriterionTable]) -> str:
    """Format the 2.5% critical-value grid over c = 0.00 ... 0.50.

    ``tables`` must cover designs with (nu2, nu1) in {10, 15, 30}^2, the
    nu1 = inf variants for nu2 in {10, 15, 30}, and the doubly infinite
    row; rows with nu2 = inf are mirror readings of the nu1 = inf tables
    (sample relabeling maps c to 1 - c).
    """
    by_key = {_table2_key(t): t for t in tables}

    def cell(nu2: float, nu1: float, c: float) -> float:
        if (nu2, nu1) in by_key:
            return float(by_key[(nu2, nu1)].value_at_c(c))
        if (nu1, nu2) in by_key:  # mirrored reading of the swapped design
            return float(by_key[(nu1, nu2)].value_at_c(1.0 - c))
        raise ValueError(f"no table for nu2={nu2}, nu1={nu1}")

    def df_label(nu: float) -> str:
        return "inf" if nu == INFINITY else str(int(nu))

    out = ["c =\t\t" + "\t".join(f"{c:.2f}" for c in TABLE2_C)]
    out.append("nu2\tnu1\t" + "\t".join(f"{1 - c:.2f}" for c in TABLE2_C[:-1]))
    for nu2 in TABLE2_NU:
        for j, nu1 in enumerate(TABLE2_NU):
            label2 = df_label(nu2) if j == 0 else ""
            vals = "\t".join(f"{cell(nu2, nu1, c):.3f}" for c in TABLE2_C)
            out.append(f"{label2}\t{df_label(nu1)}\t{vals}")
    return "\n".join(out) + "\n"


def write_table2(tables: Sequence[CriterionTable], path: str | Path) -> None:
    _atomic_write(path, emit_table2(tables))
