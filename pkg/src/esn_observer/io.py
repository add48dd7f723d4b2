"""File formats: trajectory CSV, coordinate-list matrices, model snapshots, result CSVs."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .dynamics import Trajectory
from .harness import ComparisonRecord, SweepRecord
from .reservoir import Observer, ReservoirConfig


def fmt_float(v: float) -> str:
    """Full double precision; non-finite values as ``inf``/``-inf``/``nan``."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_trajectory(path, traj: Trajectory) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *traj.channels])
        for t, row in zip(traj.times, traj.samples):
            w.writerow([fmt_float(t), *(fmt_float(v) for v in row)])


def read_trajectory(path) -> Trajectory:
    """Read a trajectory CSV; the time step is taken from the first two rows."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "t":
        raise ValueError(f"{path}: first column must be 't'")
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    if len(body) < 2:
        raise ValueError(f"{path}: need at least two samples to infer dt")
    t0, dt = data[0, 0], data[1, 0] - data[0, 0]
    return Trajectory(float(t0), float(dt), tuple(header[1:]), data[:, 1:])


def write_matrix(path, m) -> None:
    """Coordinate list: header ``n=<dim>`` (``n=<rows>x<cols>`` if not square), then ``i,j,value``."""
    coo = sp.coo_matrix(m)
    rows, cols = coo.shape
    order = np.lexsort((coo.col, coo.row))
    with Path(path).open("w") as fh:
        fh.write(f"n={rows}\n" if rows == cols else f"n={rows}x{cols}\n")
        for k in order:
            fh.write(f"{coo.row[k]},{coo.col[k]},{fmt_float(coo.data[k])}\n")


def read_matrix(path) -> sp.csr_matrix:
    with Path(path).open() as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise ValueError(f"{path}: missing 'n=<dim>' header")
        dims = header[2:].split("x")
        shape = (int(dims[0]), int(dims[-1]))
        rows, cols, vals = [], [], []
        for line in fh:
            if line.strip():
                i, j, v = line.split(",")
                rows.append(int(i))
                cols.append(int(j))
                vals.append(float(v))
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


_CONFIG_FIELDS = ("n", "rho", "mean_degree", "zeta", "alpha", "input_scale", "ridge_beta",
                  "topology", "rewire_prob", "seed")


def save_snapshot(directory, obs: Observer) -> Path:
    """Write ``W.txt``, ``W_in.txt``, ``W_out.txt``, ``c.txt`` and ``config.txt``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "W.txt", obs.w)
    write_matrix(d / "W_in.txt", obs.w_in)
    if obs.trained:
        write_matrix(d / "W_out.txt", obs.w_out)
        write_matrix(d / "c.txt", obs.c[:, None])
    cfg = obs.config
    lines = []
    for name in _CONFIG_FIELDS:
        v = getattr(cfg, name)
        lines.append(f"{name}={v.value if hasattr(v, 'value') else _fmt_value(v)}")
    lines.append(f"input_channels={','.join(obs.input_channels)}")
    lines.append(f"output_channels={','.join(obs.output_channels)}")
    (d / "config.txt").write_text("\n".join(lines) + "\n")
    return d


def load_snapshot(directory) -> Observer:
    d = Path(directory)
    kv = dict(line.split("=", 1) for line in (d / "config.txt").read_text().splitlines() if "=" in line)
    ints = {"n", "seed"}
    kwargs = {}
    for name in _CONFIG_FIELDS:
        raw = kv[name]
        if name == "topology":
            kwargs[name] = raw
        elif name in ints:
            kwargs[name] = int(raw)
        else:
            kwargs[name] = float(raw)
    cfg = ReservoirConfig(**kwargs)
    w = read_matrix(d / "W.txt")
    w_in = read_matrix(d / "W_in.txt").toarray()
    w_out = c = None
    if (d / "W_out.txt").exists():
        w_out = read_matrix(d / "W_out.txt").toarray()
        c = read_matrix(d / "c.txt").toarray()[:, 0]
    return Observer(cfg, w, w_in, tuple(kv["input_channels"].split(",")),
                    tuple(kv["output_channels"].split(",")), w_out, c)


def write_predictions(path, truth: Trajectory, predicted: Trajectory) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"{c}_true" for c in truth.channels]
                   + [f"{c}_pred" for c in predicted.channels])
        for t, a, b in zip(truth.times, truth.samples, predicted.samples):
            w.writerow([fmt_float(t), *map(fmt_float, a), *map(fmt_float, b)])


def write_sweep_csv(path, records: Iterable[SweepRecord], timing: bool = False) -> None:
    """``parameter,value,seed,mse,wall_seconds``; ``wall_seconds`` is ``nan`` unless ``timing``."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter", "value", "seed", "mse", "wall_seconds"])
        for r in records:
            w.writerow([r.parameter, _fmt_value(r.value), r.seed, fmt_float(r.mse),
                        fmt_float(r.wall_seconds if timing else math.nan)])


def read_sweep_csv(path) -> list[SweepRecord]:
    with Path(path).open(newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            v = row["value"]
            value = None if v == "" else (int(v) if v.lstrip("-").isdigit() else float(v))
            out.append(SweepRecord(row["parameter"], value, int(row["seed"]), float(row["mse"]),
                                   float(row["wall_seconds"])))
        return out


def write_comparison_csvs(directory, records: Sequence[ComparisonRecord]) -> tuple[Path, Path]:
    """Per-trial ``comparison.csv`` and per-topology ``comparison_summary.csv``."""
    d = Path(directory)
    trials, summary = d / "comparison.csv", d / "comparison_summary.csv"
    with trials.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topology", "seed", "mse"])
        for rec in records:
            for seed, m in zip(rec.seeds, rec.mses):
                w.writerow([rec.topology.value, seed, fmt_float(m)])
    with summary.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topology", "median_mse", "mean_mse", "n_ok", "n_failed"])
        for rec in records:
            w.writerow([rec.topology.value, fmt_float(rec.median_mse), fmt_float(rec.mean_mse),
                        rec.n_ok, rec.n_failed])
    return trials, summary
