"""Plain-text exporters: tube CSVs with an index, contour CSVs, conflict report and run manifest."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

from .grid import read_field_csv, write_field_csv
from .reach_avoid import ConflictSlice, format_conflict_report, sublevel_set
from .vi_solver import ValueTube


def write_tube(tube: ValueTube, outdir: str | Path, prefix: str = "value") -> list[Path]:
    """One field CSV per recorded time plus ``{prefix}_index.csv`` listing ``time,filename``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    rows = []
    for k, (t, fld) in enumerate(zip(tube.times, tube.fields)):
        name = f"{prefix}_{k:05d}.csv"
        paths.append(write_field_csv(fld, outdir / name))
        rows.append(f"{t:.17g},{name}")
    index = outdir / f"{prefix}_index.csv"
    index.write_text("time,filename\n" + "".join(r + "\n" for r in rows))
    return [index] + paths


def read_tube(index: str | Path) -> ValueTube:
    index = Path(index)
    if index.is_dir():
        index = index / "value_index.csv"
    with open(index, newline="") as fh:
        entries = [(float(r["time"]), r["filename"]) for r in csv.DictReader(fh)]
    if not entries:
        raise ValueError(f"{index}: empty tube index")
    fields = [read_field_csv(index.parent / name) for _, name in entries]
    tube = ValueTube(fields[0].grid)
    for (t, _), f in zip(entries, fields):
        if f.grid != tube.grid:
            raise ValueError(f"{index}: fields on different grids")
        tube.record(t, f)
    return tube


def write_contours(tube: ValueTube, outdir: str | Path, prefix: str = "contour") -> list[Path]:
    """Zero contour of every recorded field as ``contour,axis0,...`` rows."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, fld in enumerate(tube.fields):
        path = outdir / f"{prefix}_{k:05d}.csv"
        lines = ["contour," + ",".join(f"axis{i}" for i in range(tube.grid.ndim))]
        for c, poly in enumerate(sublevel_set(fld).contours):
            for row in poly:
                lines.append(f"{c}," + ",".join(f"{v:.17g}" for v in row))
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def write_conflict_report(events: Sequence[ConflictSlice], path: str | Path,
                          names: Sequence[str] = ()) -> Path:
    path = Path(path)
    text = format_conflict_report(events)
    if names:
        text = "# aircraft: " + " ".join(f"{k}={n}" for k, n in enumerate(names)) + "\n" + text
    path.write_text(text)
    return path


def format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(format_value(x) for x in v)
    return str(v)


def write_manifest(path: str | Path, items: Iterable[tuple[str, object]]) -> Path:
    """Line-oriented ``key = value`` text."""
    path = Path(path)
    path.write_text("".join(f"{k} = {format_value(v)}\n" for k, v in items))
    return path


def read_manifest(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k] = v
    return out
