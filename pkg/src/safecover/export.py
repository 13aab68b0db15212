"""Trajectory, summary, energy and plot-snapshot files, plus their readers.

All tables are comma-separated with a header row; numbers use 9
significant digits.
"""

import csv
import json
import os

import numpy as np

from .sim import SOURCE_NAMES

TRAJECTORY_HEADER = ("t", "i", "p_x", "p_y", "v_x", "v_y", "u_x", "u_y", "source")
ENERGY_HEADER = ("t", "phi")
SNAPSHOT_HEADER = ("kind", "t", "i", "p_x", "p_y")


def _g(x):
    return f"{x:.9g}"


def write_trajectory(traj, path):
    T, n = traj.positions.shape[:2]
    cols = np.concatenate([traj.positions, traj.velocities, traj.controls], axis=-1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        for k in range(T):
            t = _g(traj.times[k])
            for i in range(n):
                w.writerow([t, i, *map(_g, cols[k, i]), SOURCE_NAMES[traj.sources[k, i]]])


def read_trajectory(path):
    """Return ``(times, positions, velocities, controls, sources)`` arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = list(r)
    t = np.array([float(row[0]) for row in rows])
    idx = np.array([int(row[1]) for row in rows])
    n = int(idx.max()) + 1
    if len(rows) % n:
        raise ValueError(f"{path}: ragged trajectory")
    T = len(rows) // n
    vals = np.array([[float(x) for x in row[2:8]] for row in rows]).reshape(T, n, 6)
    src = np.array([SOURCE_NAMES.index(row[8]) for row in rows], dtype=np.int8).reshape(T, n)
    if not np.array_equal(idx.reshape(T, n), np.tile(np.arange(n), (T, 1))):
        raise ValueError(f"{path}: vehicle indices out of order")
    times = t.reshape(T, n)[:, 0]
    return times, vals[..., 0:2], vals[..., 2:4], vals[..., 4:6], src


def write_energy(traj, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ENERGY_HEADER)
        for t, e in zip(traj.times, traj.energy):
            w.writerow([_g(t), _g(e)])


def read_energy(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def write_summary(summary, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def read_summary(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def snapshot_rows(traj, t, tail):
    """Rows for one snapshot: current positions, past positions within ``tail``
    seconds (truncated at the first recorded time) and the domain outline."""
    k = int(np.searchsorted(traj.times, t - 1e-9))
    k = min(k, len(traj.times) - 1)
    t_k = traj.times[k]
    lo = int(np.searchsorted(traj.times, t_k - tail - 1e-9))
    rows = []
    for i, p in enumerate(traj.positions[k]):
        rows.append(("vehicle", t_k, i, p[0], p[1]))
    for j in range(lo, k + 1):
        for i, p in enumerate(traj.positions[j]):
            rows.append(("tail", traj.times[j], i, p[0], p[1]))
    for v, p in enumerate(traj.domain.vertices_at(t_k)):
        rows.append(("domain", t_k, v, p[0], p[1]))
    return rows


def write_snapshot(traj, t, tail, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_HEADER)
        for kind, tt, i, x, y in snapshot_rows(traj, t, tail):
            w.writerow([kind, _g(tt), i, _g(x), _g(y)])


def read_snapshot(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != SNAPSHOT_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [(row[0], float(row[1]), int(row[2]), float(row[3]), float(row[4])) for row in r]


def emit_plot_data(traj, times, tail, out_dir, stem="snapshot"):
    """One snapshot file per requested time; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for t in times:
        path = os.path.join(out_dir, f"{stem}_t{t:g}.csv")
        write_snapshot(traj, t, tail, path)
        paths.append(path)
    return paths
