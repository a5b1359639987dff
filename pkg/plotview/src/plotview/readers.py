"""Parsers for the simulator's documented CSV formats.

Three files are understood, all produced by the simulator:

* ``diagnostics.csv``: header ``t,E_b,rho_b,U_b_r,U_b_theta,J_pos,J_posvar,
  J_vel,J_velvar,J_ctrl,mode_amp,B_1,...,B_k`` followed by one float row per
  recorded state.
* ``density_t<tag>.csv``: one comment header ``# m_r m_theta r_min r_max t``
  and then an m_r x m_theta matrix of cell densities (rows radial, columns
  angular).
* ``convergence.csv``: header ``N_t,h,err`` with one row per coarse run.

Schema violations raise SchemaError carrying a readable column diff; the
renderer never guesses at malformed input.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

DIAG_FIXED_COLUMNS = ["t", "E_b", "rho_b", "U_b_r", "U_b_theta",
                      "J_pos", "J_posvar", "J_vel", "J_velvar", "J_ctrl",
                      "mode_amp"]
CONV_COLUMNS = ["N_t", "h", "err"]


class SchemaError(ValueError):
    """An input file does not match the documented simulator schema."""


def _column_diff(expected, found) -> str:
    missing = [c for c in expected if c not in found]
    extra = [c for c in found if c not in expected]
    parts = []
    if missing:
        parts.append(f"missing: {', '.join(missing)}")
    if extra:
        parts.append(f"unexpected: {', '.join(extra)}")
    if not parts:
        parts.append(f"order differs: expected {expected}, found {found}")
    return "; ".join(parts)


def read_diagnostics(path) -> dict:
    """Diagnostics time series as name -> float array.

    The control columns B_1..B_k are accepted for any k >= 1 as long as the
    numbering is consecutive and starts at 1.
    """
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        fixed, b_cols = header[:len(DIAG_FIXED_COLUMNS)], header[len(DIAG_FIXED_COLUMNS):]
        if fixed != DIAG_FIXED_COLUMNS or not b_cols:
            raise SchemaError(f"{path}: bad diagnostics header; "
                              + _column_diff(DIAG_FIXED_COLUMNS + ["B_1..B_k"], header))
        if b_cols != [f"B_{i}" for i in range(1, len(b_cols) + 1)]:
            raise SchemaError(f"{path}: control columns must be B_1..B_k, "
                              f"found {', '.join(b_cols)}")
        rows = []
        for ln, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            vals = line.split(",")
            if len(vals) != len(header):
                raise SchemaError(f"{path}:{ln}: expected {len(header)} "
                                  f"fields, found {len(vals)}")
            try:
                rows.append([float(v) for v in vals])
            except ValueError as exc:
                raise SchemaError(f"{path}:{ln}: {exc}") from None
    mat = np.array(rows) if rows else np.empty((0, len(header)))
    return {name: mat[:, i] for i, name in enumerate(header)}


def control_columns(diag: dict) -> list:
    return [name for name in diag if name.startswith("B_")]


def read_density_snapshot(path):
    """Density matrix plus its grid metadata.

    Returns:
        (rho, meta) with meta keys m_r, m_theta, r_min, r_max, t.
    """
    path = Path(path)
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("#"):
            raise SchemaError(f"{path}: missing '# m_r m_theta r_min r_max t' header")
        parts = head[1:].split()
        if len(parts) != 5:
            raise SchemaError(f"{path}: header needs 5 fields, found {len(parts)}")
        try:
            meta = {"m_r": int(parts[0]), "m_theta": int(parts[1]),
                    "r_min": float(parts[2]), "r_max": float(parts[3]),
                    "t": float(parts[4])}
        except ValueError as exc:
            raise SchemaError(f"{path}: bad header value ({exc})") from None
        try:
            rho = np.array([[float(v) for v in line.split(",")] for line in fh
                            if line.strip()])
        except ValueError as exc:
            raise SchemaError(f"{path}: bad density value ({exc})") from None
    if rho.shape != (meta["m_r"], meta["m_theta"]):
        raise SchemaError(f"{path}: density shape {rho.shape} disagrees with "
                          f"header ({meta['m_r']}, {meta['m_theta']})")
    return rho, meta


def read_convergence(path) -> dict:
    """Convergence table columns as name -> array (N_t integer, rest float)."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != CONV_COLUMNS:
            raise SchemaError(f"{path}: bad convergence header; "
                              + _column_diff(CONV_COLUMNS, header))
        rows = []
        for ln, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            vals = line.split(",")
            if len(vals) != 3:
                raise SchemaError(f"{path}:{ln}: expected 3 fields, found {len(vals)}")
            try:
                rows.append((int(vals[0]), float(vals[1]), float(vals[2])))
            except ValueError as exc:
                raise SchemaError(f"{path}:{ln}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}: convergence table has no rows")
    return {"N_t": np.array([r[0] for r in rows]),
            "h": np.array([r[1] for r in rows]),
            "err": np.array([r[2] for r in rows])}
