"""Writing run results: snapshot CSVs, probe series and the manifest.

All files are written with '\\n' line endings, '.' decimal separators and
nine significant digits, and contain nothing that depends on wall-clock time,
so identical configurations give byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import os

from . import __version__

SNAPSHOT_HEADER = "x_m,theta_K,P_Pa,w_kgm3,d_kgm3"
FIELD_NAMES = ("theta_K", "P_Pa", "w_kgm3", "d_kgm3")


def fmt(v) -> str:
    return "%.9g" % v


def time_label(t: float) -> str:
    t = float(t)
    return str(int(t)) if t.is_integer() else repr(t)


def snapshot_filename(t: float) -> str:
    return f"snapshot_{time_label(t)}s.csv"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_snapshot(path, x, snap):
    rows = [SNAPSHOT_HEADER]
    for i in range(len(x)):
        rows.append(",".join(fmt(v) for v in (x[i], snap.theta[i], snap.p[i], snap.w[i], snap.d[i])))
    _write(path, "\n".join(rows) + "\n")


def write_probes(path, series):
    header = ["t_s"]
    for p in series.probe_x:
        header += [f"{name}@{fmt(p)}" for name in FIELD_NAMES]
    rows = [",".join(header)]
    for t, values in zip(series.probe_t, series.probe_values):
        rows.append(",".join([fmt(t)] + [fmt(v) for v in values]))
    _write(path, "\n".join(rows) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def emit_outputs(series, cfg, directory=None, scenario=None) -> dict:
    """Write every output of a finished run; returns the manifest dict."""
    out = directory or cfg.directory
    os.makedirs(out, exist_ok=True)
    files = []
    for snap in series.snapshots:
        name = snapshot_filename(snap.t)
        write_snapshot(os.path.join(out, name), series.x, snap)
        files.append(name)
    write_probes(os.path.join(out, "probes.csv"), series)
    files.append("probes.csv")
    if os.path.exists(os.path.join(out, "steps.log")):
        files.append("steps.log")
    manifest = {
        "version": __version__,
        "config_sha256": cfg.digest(),
        "config": cfg.as_dict(),
        "scenario": scenario.describe() if scenario is not None else {"kind": cfg.scenario},
        "monitor": series.monitor,
        "norms": series.norms.as_dict(),
        "files": {name: sha256_file(os.path.join(out, name)) for name in files},
    }
    _write(os.path.join(out, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
