"""Plot data for each figure panel, taken from runs recorded in manifests.

Each panel is written as ``<id>.dat`` (whitespace separated, ``#`` header)
with a ``<id>.txt`` description of axes and the expected shape.
"""

from dataclasses import dataclass
import json
import math
import os

import numpy as np

from .errors import KerrChaosError
from .io import atomic_open, format_number, read_csv_table
from .runner import load_manifests


class FigureError(KerrChaosError):
    """Unknown figure id or missing prerequisite run."""


@dataclass(frozen=True)
class Panel:
    mode: str
    epsilon: float | None
    delta_epsilon: float | None
    columns: tuple
    description: str
    kicks: int = 10000


def _traj(eps, de, columns, text, kicks=10000):
    return Panel("trajectory", eps, de, columns, text, kicks)


FIGURES = {
    "fig1": _traj(0.1, 0.001, ("k", "F"), "F against kick number k; regular oscillation with a single recurrence period."),
    "fig2a": _traj(0.1, 0.001, ("k", "F"), "F against k for a weak perturbation; slow periodic recurrences."),
    "fig2b": _traj(0.1, 0.05, ("k", "F"), "F against k; recurrences much faster than panel a.", 1000),
    "fig2c": _traj(0.1, 0.08, ("k", "F"), "F against k; recurrence after a few tens of kicks.", 1000),
    "fig3": _traj(0.1, 0.05, ("k2", "lnF"), "ln F against k^2 over the initial decay; close to a straight line.", 100),
    "fig4a": _traj(0.385, 0.001, ("k", "F"), "F against k; oscillation with a slow modulation (beats)."),
    "fig4b": _traj(0.505, 0.001, ("k", "F"), "F against k; initial decay followed by irregular fluctuations."),
    "fig5a": _traj(0.7, 0.005, ("k", "lnF"), "ln F against k (semi-log fidelity) for a chaotic kick strength.", 200),
    "fig5b": _traj(0.7, 0.01, ("k", "lnF"), "ln F against k; faster decay than panel a.", 200),
    "fig5c": _traj(0.7, 0.05, ("k", "lnF"), "ln F against k; perturbation-dependent decay.", 200),
    "fig5d": _traj(0.7, 0.08, ("k", "lnF"), "ln F against k; fastest decay of the set.", 200),
    "fig6a": _traj(0.7, 0.001, ("k2", "lnF"), "ln F against k^2 for a weak perturbation in the chaotic regime.", 200),
    "fig6b": _traj(0.7, 0.05, ("k", "lnF"), "ln F against k over the initial decay.", 200),
    "fig6c": _traj(0.7, 0.08, ("k", "lnF"), "ln F against k over the initial decay.", 200),
    "fig7a": _traj(0.1, 0.001, ("k", "F_N", "F"), "F_N and F against k; fast revivals of F_N modulated at the F recurrence frequency."),
    "fig7b": _traj(0.505, 0.001, ("k", "F_N"), "F_N against k; irregular, with small fast oscillations throughout."),
    "fig7c": _traj(0.505, 0.001, ("k", "mean_n"), "mean photon number <n> of the unperturbed state against k; grows well above the regular case."),
    "fig8": Panel("entropy_sweep", None, 0.001, ("epsilon", "entropy"),
                  "spectral entropy of F against epsilon; smooth in the regular region, rapid growth near the chaos border, irregular beyond it."),
    "bifurcation": Panel("bifurcation", None, None, ("epsilon", "energy"),
                         "classical |alpha|^2 after the transient against epsilon; scatter plot with regular windows and chaotic bands."),
}

GROUPS = {
    "fig2": ("fig2a", "fig2b", "fig2c"),
    "fig4": ("fig4a", "fig4b"),
    "fig5": ("fig5a", "fig5b", "fig5c", "fig5d"),
    "fig6": ("fig6a", "fig6b", "fig6c"),
    "fig7": ("fig7a", "fig7b", "fig7c"),
}


def valid_ids():
    return sorted(FIGURES) + sorted(GROUPS)


def _close(a, b):
    return b is None or math.isclose(float(a), b, rel_tol=1e-9, abs_tol=1e-12)


def _standard(params):
    return _close(params["chi"], 1.0) and _close(params["period"], math.pi)


def _read_table(path):
    if path.endswith(".json"):
        with open(path) as fh:
            d = json.load(fh)
        return d["metadata"], {k: np.asarray(v, dtype=float) for k, v in d["columns"].items()}
    return read_csv_table(path)


def _find(out, panel):
    """Latest (file, run) pair satisfying ``panel``, else None."""
    hit = None
    for man in load_manifests(out):
        if panel.mode == "entropy_sweep" and man.get("mode") == "entropy_sweep":
            name = next((f for f in man["files"] if f.startswith("entropy")), None)
            sweep = man["config"].get("sweep") or [None]
            if name and sweep[0] == "epsilon" and _standard(man["config"]["system"]):
                path = os.path.join(out, name)
                if os.path.exists(path):
                    hit = (path, {"params": man["config"]["system"]})
            continue
        for run in man.get("runs", []):
            if run.get("mode") != panel.mode or not run.get("files"):
                continue
            p = run["params"]
            if not _standard(p):
                continue
            if panel.mode == "trajectory":
                if not (_close(p["epsilon"], panel.epsilon) and _close(p["delta_epsilon"], panel.delta_epsilon)):
                    continue
                name = run["files"][0]
            else:
                name = next((f for f in run["files"] if f.startswith("bifurcation")), None)
                if name is None:
                    continue
            path = os.path.join(out, name)
            if os.path.exists(path):
                hit = (path, run)
    return hit


def _needed(panel):
    if panel.mode == "trajectory":
        return (
            f"a trajectory run with epsilon={panel.epsilon}, delta_epsilon={panel.delta_epsilon}, chi=1, "
            f"period=pi (e.g. --mode trajectory --epsilon {panel.epsilon} --delta-eps {panel.delta_epsilon} "
            f"--kicks {panel.kicks})"
        )
    if panel.mode == "entropy_sweep":
        return "an entropy_sweep run over epsilon (e.g. --mode entropy_sweep --sweep epsilon 0.005 0.8 160)"
    return "a bifurcation run (e.g. --mode bifurcation --sweep epsilon 0 0.6 301)"


def _columns(panel, cols):
    out = []
    for name in panel.columns:
        if name == "k2":
            out.append(cols["k"] ** 2)
        elif name == "lnF":
            with np.errstate(divide="ignore"):
                out.append(np.log(cols["F"]))
        elif name == "epsilon" and "epsilon" not in cols:
            out.append(cols["key"])
        else:
            out.append(cols[name])
    data = np.column_stack(out)
    return data[np.all(np.isfinite(data), axis=1)]


def emit_plot_data(out, figure_id, dest=None):
    """Write the data and description files for ``figure_id``; returns their paths."""
    if figure_id in GROUPS:
        paths = []
        for sub in GROUPS[figure_id]:
            paths.extend(emit_plot_data(out, sub, dest))
        return paths
    if figure_id not in FIGURES:
        raise FigureError(f"unknown figure id {figure_id!r}; valid ids: {', '.join(valid_ids())}")
    panel = FIGURES[figure_id]
    found = _find(out, panel)
    if found is None:
        raise FigureError(f"{figure_id} needs {_needed(panel)} recorded in a manifest under {out}")
    path, run = found
    _, cols = _read_table(path)
    data = _columns(panel, cols)
    dest = dest or out
    dat = os.path.join(dest, f"{figure_id}.dat")
    txt = os.path.join(dest, f"{figure_id}.txt")
    with atomic_open(dat) as fh:
        fh.write(f"# {figure_id}: {' '.join(panel.columns)}\n")
        fh.write(f"# source = {os.path.basename(path)}\n")
        for row in data:
            fh.write(" ".join(format_number(v) for v in row) + "\n")
    p = run["params"]
    with atomic_open(txt) as fh:
        fh.write(f"{figure_id}\n")
        fh.write(f"columns: {', '.join(panel.columns)} (k2 = k^2, lnF = natural log of F)\n")
        fh.write(f"shape: {panel.description}\n")
        fh.write(f"source: {os.path.basename(path)} ({panel.mode}; chi={p['chi']}, period={p['period']}")
        if panel.mode == "trajectory":
            fh.write(f", epsilon={p['epsilon']}, delta_epsilon={p['delta_epsilon']}, kicks={p['kicks']}")
        fh.write(")\n")
        if run.get("truncation_unsafe"):
            fh.write(f"warning: run flagged truncation-unsafe from kick {run.get('first_unsafe_kick')}\n")
    return [dat, txt]
