"""Trajectory serialization: versioned text format and SVG export.

The text format keeps six decimal places on every numeric field and
round-trips losslessly at that precision:

    scriptogen-traj v1
    dt 0.005000
    samples 3
    columns t x y vx vy pen
    0.000000 1.000000 2.000000 0.000000 0.000000 1
    ...

All writers go through a temporary file and an atomic rename, so a failed
export never leaves a partial file behind.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np

from .errors import TrajectoryFileError
from .kinematics import SampledTrajectory
from .render import InkModel

TRAJ_FORMAT_HEADER = "scriptogen-traj v1"
_COLUMNS = "t x y vx vy pen"


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def export_trajectory(traj: SampledTrajectory, path: str | Path) -> None:
    """Write ``traj`` in the versioned text format (atomically)."""
    lines = [
        TRAJ_FORMAT_HEADER,
        f"dt {traj.dt:.6f}",
        f"samples {traj.n_samples}",
        f"columns {_COLUMNS}",
    ]
    for i in range(traj.n_samples):
        lines.append(
            f"{traj.t[i]:.6f} {traj.x[i]:.6f} {traj.y[i]:.6f} "
            f"{traj.vx[i]:.6f} {traj.vy[i]:.6f} {1 if traj.pen_down[i] else 0}"
        )
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def import_trajectory(path: str | Path) -> SampledTrajectory:
    """Read a trajectory written by ``export_trajectory``.

    The speed field is recomputed from vx/vy, preserving the
    speed-equals-norm invariant at the stored precision.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != TRAJ_FORMAT_HEADER:
        raise TrajectoryFileError(
            f"missing or unsupported header; expected {TRAJ_FORMAT_HEADER!r}"
        )
    try:
        dt = float(lines[1].split()[1])
        n = int(lines[2].split()[1])
        if lines[3].split(maxsplit=1)[1] != _COLUMNS:
            raise TrajectoryFileError(f"unexpected column list in {path}")
    except (IndexError, ValueError) as exc:
        raise TrajectoryFileError(f"malformed trajectory header in {path}") from exc
    body = lines[4:]
    if len(body) < n:
        raise TrajectoryFileError(
            f"expected {n} sample records, found {len(body)}"
        )
    data = np.zeros((n, 5))
    pen = np.zeros(n, dtype=bool)
    for i in range(n):
        fields = body[i].split()
        if len(fields) != 6:
            raise TrajectoryFileError(f"bad sample record at line {5 + i}")
        data[i] = [float(f) for f in fields[:5]]
        pen[i] = fields[5] == "1"
    t, x, y, vx, vy = data.T
    return SampledTrajectory(
        dt=dt, t=t, x=x, y=y, vx=vx, vy=vy,
        speed=np.hypot(vx, vy), pen_down=pen,
    )


def export_svg(
    traj: SampledTrajectory,
    ink: InkModel,
    path: str | Path,
) -> None:
    """Write the trajectory as an SVG document in millimetre units.

    One polyline per pen-down run, stroked at twice the nib radius.  The
    points carry the trajectory's own coordinates; a group transform flips
    the y-axis so the writing renders upright.
    """
    runs = traj.pen_down_runs()
    margin = ink.nib_radius
    if traj.n_samples and any(traj.pen_down):
        down = np.asarray(traj.pen_down, dtype=bool)
        x0 = traj.x[down].min() - margin
        x1 = traj.x[down].max() + margin
        y0 = traj.y[down].min() - margin
        y1 = traj.y[down].max() + margin
    else:
        runs = []
        x0 = y0 = 0.0
        x1 = y1 = 1.0
    width = x1 - x0
    height = y1 - y0
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.4f}mm" '
        f'height="{height:.4f}mm" viewBox="{x0:.4f} {y0:.4f} '
        f'{width:.4f} {height:.4f}">',
        f'  <g transform="translate(0 {y0 + y1:.4f}) scale(1 -1)" fill="none" '
        f'stroke="black" stroke-width="{2.0 * ink.nib_radius:.4f}" '
        'stroke-linecap="round" stroke-linejoin="round">',
    ]
    for lo, hi in runs:
        pts = " ".join(
            f"{traj.x[i]:.4f},{traj.y[i]:.4f}" for i in range(lo, hi)
        )
        lines.append(f'    <polyline points="{pts}" />')
    lines.append("  </g>")
    lines.append("</svg>")
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")
