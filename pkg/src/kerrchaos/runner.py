"""Execute a :class:`RunConfig`: per-point work on a process pool, then write outputs.

Workers only compute; the parent process writes every file, in sweep order,
so outputs depend on the parameter values alone and not on scheduling.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial
import glob
import json
import math
import os
import time
import traceback

import numpy as np

from . import __version__, _ext
from .analysis.decay import fit_decay
from .analysis.lyapunov import (
    classify_dynamics,
    estimate_lyapunov,
    lyapunov_trend,
    post_decay_start,
)
from .analysis.spectrum import (
    TimeSeries,
    default_window,
    fidelity_entropy,
    power_spectrum,
    spectral_entropy,
)
from .classical import bifurcation_scan, classify_window
from .errors import IndeterminateError, KerrChaosError
from .evolution import run_trajectory
from .io import write_csv_table, write_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

MANIFEST = "manifest.json"


def sweep_points(cfg):
    """``[(key, SystemParams)]`` in sweep order; a single point when not sweeping."""
    if cfg.sweep is None:
        return [(None, cfg.system)]
    name, start, stop, steps = cfg.sweep
    values = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    out = []
    for v in values:
        v = int(round(v)) if name in ("dim", "buffer", "kicks") else float(v)
        out.append((v, cfg.system.with_(**{name: v})))
    return out


def point_label(name, value):
    if value is None:
        return ""
    return f"_{name}={value:.10g}" if isinstance(value, float) else f"_{name}={value}"


def _backend(analysis):
    b = analysis["backend"]
    return None if b == "auto" else b


def _series_from(rec, analysis):
    return rec.series(analysis["series"])


def _trajectory(params, cfg_stride, analysis):
    return run_trajectory(
        params, stride=cfg_stride, backend=_backend(analysis), leak_policy=analysis["leak_policy"]
    )


def _traj_info(rec):
    return {
        "truncation_unsafe": rec.truncation_unsafe,
        "first_unsafe_kick": rec.first_unsafe_kick,
        "leak_max": rec.leak_max,
        "completed": rec.completed,
    }


def compute_point(mode, params, analysis, stride):
    """Work for one sweep point.  Returns tables ``[(stem, columns, metadata)]`` and a summary."""
    a = analysis
    if mode == "trajectory":
        rec = _trajectory(params, stride, a)
        cols = {"k": rec.k, "F": rec.fidelity, "F_N": rec.f_n, "mean_n": rec.mean_photons_u}
        return {"tables": [("trajectory", cols, rec.metadata())], "info": _traj_info(rec), "summary": {}}

    if mode == "entropy_sweep":
        rec = _trajectory(params, stride, a)
        return {
            "series": _series_from(rec, a).values,
            "info": _traj_info(rec),
            "tables": [],
            "summary": {"default_t_min": default_window(_series_from(rec, a).values)[0]},
            "record_meta": rec.metadata(),
            "trajectory": {"k": rec.k, "F": rec.fidelity, "F_N": rec.f_n, "mean_n": rec.mean_photons_u}
            if a["keep_series"]
            else None,
        }

    if mode == "spectrum":
        rec = _trajectory(params, stride, a)
        ts = _series_from(rec, a)
        d_min, d_max = default_window(ts.values)
        t_min = d_min if a["t_min"] is None else a["t_min"]
        t_max = d_max if a["t_max"] is None else a["t_max"]
        sub = ts.window(t_min, t_max)
        spec = power_spectrum(sub)
        ent = spectral_entropy(spec, a["log_base"], a["include_dc"])
        meta = rec.metadata()
        meta.update(
            series=a["series"], t_min=t_min, t_max=t_max, log_base=a["log_base"],
            include_dc=a["include_dc"], entropy=ent.entropy, bins_used=ent.bins_used,
        )
        cols = {"omega": spec.frequencies, "power": spec.power, "P_N": spec.normalized}
        return {
            "tables": [("spectrum", cols, meta)],
            "info": _traj_info(rec),
            "summary": {"entropy": ent.entropy, "bins_used": ent.bins_used, "t_min": t_min, "t_max": t_max},
        }

    if mode == "decay_fit":
        rec = _trajectory(params, stride, a)
        ts = rec.series("fidelity")
        regimes = ("gaussian", "exponential") if a["regime"] == "both" else (a["regime"],)
        rows = []
        for regime in regimes:
            fit = fit_decay(
                ts, regime, upper=a["fit_upper"], lower=a["fit_lower"], min_points=a["fit_min_points"]
            )
            rows.append(fit)
        summary = {
            f"{f.regime}_{k}": v
            for f in rows
            for k, v in (("slope", f.slope), ("intercept", f.intercept), ("r_squared", f.r_squared))
        }
        summary["fit_start"], summary["fit_stop"] = rows[0].fit_window
        return {"tables": [], "fits": rows, "info": _traj_info(rec), "summary": summary}

    if mode == "lyapunov":
        rec = _trajectory(params, stride, a)
        x = _series_from(rec, a).values
        start = post_decay_start(x) if a["post_decay"] else 0
        kw = dict(
            embedding_dim=a["embedding_dim"], delay=a["delay"], theiler=a["theiler"],
            fit_range=(a["fit_start"], a["fit_end"]), radius=a["radius"],
            radius_factor=a["radius_factor"], delay_rule=a["delay_rule"], tol=a["tol"],
            backend=_backend(a),
        )
        trend = lyapunov_trend(x[start:], fractions=(0.5, 1.0), **kw)
        est = trend[-1]
        try:
            label = classify_dynamics(trend, a["tol"])
        except IndeterminateError:
            label = "indeterminate"
        meta = rec.metadata()
        meta.update(
            series=a["series"], series_start=start, lambda_max=est.lambda_max,
            embedding_dim=est.embedding_dim, delay=est.delay, theiler=est.theiler,
            fit_start=est.fit_range[0], fit_end=est.fit_range[1], radius=est.radius,
            references=est.references, r_squared=est.r_squared,
            low_confidence=est.low_confidence, lambda_half_length=trend[0].lambda_max,
            classification=label,
        )
        cols = {"s": np.arange(est.divergence_curve.size), "S": est.divergence_curve}
        summary = {
            "lambda_max": est.lambda_max, "lambda_half_length": trend[0].lambda_max,
            "r_squared": est.r_squared, "delay": est.delay, "references": est.references,
            "series_start": start, "classification": label,
        }
        return {"tables": [("lyapunov_curve", cols, meta)], "info": _traj_info(rec), "summary": summary}

    raise ValueError(f"unhandled mode {mode!r}")


def _bifurcation_chunk(chi, period, eps, analysis):
    a = analysis
    return bifurcation_scan(
        chi, period, None, None, transient=a["transient"], samples=a["samples"],
        divergence_steps=a["divergence_steps"], backend=_backend(a), epsilons=eps,
    )


def _safe_compute(args):
    mode, params, analysis, stride = args
    t0 = time.perf_counter()
    try:
        res = compute_point(mode, params, analysis, stride)
        res["status"] = "ok"
    except (KerrChaosError, ArithmeticError, FloatingPointError) as exc:
        res = {"status": "numerical_error", "message": f"{type(exc).__name__}: {exc}"}
    except OSError as exc:
        res = {"status": "io_error", "message": f"{type(exc).__name__}: {exc}"}
    except Exception as exc:  # recorded per point so the sweep continues
        res = {"status": "error", "message": f"{type(exc).__name__}: {exc}", "traceback": traceback.format_exc()}
    res["elapsed"] = time.perf_counter() - t0
    return res


def _map(func, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def _write_table(out, stem, columns, metadata, fmt):
    path = os.path.join(out, f"{stem}.{fmt}")
    if fmt == "csv":
        write_csv_table(path, columns, metadata)
    else:
        write_json(path, {"metadata": metadata, "columns": {k: np.asarray(v) for k, v in columns.items()}})
    return path


def manifest_path(out, config_hash):
    return os.path.join(out, f"manifest_{config_hash[:16]}.json")


def find_previous(cfg):
    """Earlier successful manifest for the same config hash whose files all exist."""
    path = manifest_path(cfg.out, cfg.config_hash())
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            prev = json.load(fh)
    except (OSError, ValueError):
        return None
    if prev.get("config_hash") != cfg.config_hash() or prev.get("status") != "ok":
        return None
    if not all(os.path.exists(os.path.join(cfg.out, f)) for f in prev.get("files", [])):
        return None
    return prev


def execute(cfg):
    """Run ``cfg`` and write outputs plus a manifest; returns the manifest dict."""
    started = time.time()
    t0 = time.perf_counter()
    os.makedirs(cfg.out, exist_ok=True)
    if not cfg.force:
        prev = find_previous(cfg)
        if prev is not None:
            prev = dict(prev)
            prev["reused"] = True
            prev["exit_code"] = prev.get("exit_code", EXIT_OK)
            return prev

    a = cfg.analysis
    fmt = cfg.format
    tag = cfg.config_hash()[:8]

    def put(stem, columns, metadata):
        return _write_table(cfg.out, f"{stem}_{tag}", columns, metadata, fmt)
    runs = []
    files = []

    if cfg.mode == "bifurcation":
        if cfg.sweep is not None and cfg.sweep[0] == "epsilon":
            _, e0, e1, n = cfg.sweep
        else:
            e0, e1, n = a["eps_start"], a["eps_stop"], a["eps_steps"]
        eps = np.linspace(e0, e1, n) if n > 1 else np.array([e0])
        chunks = [c for c in np.array_split(eps, max(1, min(cfg.workers, eps.size))) if c.size]
        scans = _map(partial(_bifurcation_chunk, cfg.system.chi, cfg.system.period, analysis=a), chunks, cfg.workers)
        energies = np.concatenate([s.energies for s in scans])
        diverged = np.concatenate([s.diverged for s in scans])
        rate = np.concatenate([s.divergence for s in scans])
        s0 = scans[0]
        s0.epsilons, s0.energies, s0.diverged, s0.divergence = eps, energies, diverged, rate
        meta = {"chi": cfg.system.chi, "period": cfg.system.period, "transient": a["transient"],
                "samples": a["samples"], "alpha0": 0, "diverged": int(diverged.sum())}
        e_col = np.repeat(eps, a["samples"])
        en = energies.reshape(-1)
        keep = np.isfinite(en)
        files.append(os.path.basename(put("bifurcation", {"epsilon": e_col[keep], "energy": en[keep]}, meta)))
        labels = []
        for e in eps:
            try:
                labels.append(classify_window(s0, e))
            except IndeterminateError:
                labels.append("indeterminate")
        codes = np.array([{"regular": 0, "chaotic": 1}.get(l, -1) for l in labels])
        wmeta = dict(meta, label_codes="0=regular 1=chaotic -1=indeterminate", divergence_tol=0.02)
        files.append(os.path.basename(put("windows", {"epsilon": eps, "chaotic": codes, "divergence": rate}, wmeta)))
        runs.append({"key": None, "params": cfg.system.as_dict(), "mode": "bifurcation", "status": "ok",
                     "files": list(files)})
    else:
        points = sweep_points(cfg)
        name = cfg.sweep[0] if cfg.sweep else None
        results = _map(_safe_compute, [(cfg.mode, p, a, cfg.stride) for _, p in points], cfg.workers)
        summary_rows = []
        entropy_inputs = []
        for (value, params), res in zip(points, results):
            label = point_label(name, value)
            entry = {
                "key": value, "params": params.as_dict(), "mode": cfg.mode,
                "status": res["status"], "elapsed": res["elapsed"], "files": [],
            }
            if "message" in res:
                entry["message"] = res["message"]
            if res["status"] == "ok":
                entry.update(res["info"])
                entry["summary"] = res["summary"]
                if res["info"]["truncation_unsafe"] and not a["allow_unsafe"]:
                    entry["status"] = "truncation_unsafe"
                for stem, cols, meta in res["tables"]:
                    p = put(stem + label, cols, meta)
                    entry["files"].append(os.path.basename(p))
                if cfg.mode == "decay_fit":
                    for fit in res["fits"]:
                        summary_rows.append((value, fit))
                if cfg.mode == "entropy_sweep":
                    entropy_inputs.append((value, res))
                    if res.get("trajectory") is not None:
                        p = put("trajectory" + label, res["trajectory"], res["record_meta"])
                        entry["files"].append(os.path.basename(p))
            runs.append(entry)
            files.extend(entry["files"])

        if cfg.mode == "decay_fit" and summary_rows:
            cols = {
                "key": [v if v is not None else math.nan for v, _ in summary_rows],
                "gaussian": [int(f.regime == "gaussian") for _, f in summary_rows],
                "slope": [f.slope for _, f in summary_rows],
                "intercept": [f.intercept for _, f in summary_rows],
                "r_squared": [f.r_squared for _, f in summary_rows],
                "fit_start": [f.fit_window[0] for _, f in summary_rows],
                "fit_stop": [f.fit_window[1] for _, f in summary_rows],
            }
            meta = dict(cfg.system.as_dict(), sweep=name or "none", fit_upper=a["fit_upper"],
                        fit_lower=a["fit_lower"], fit_min_points=a["fit_min_points"],
                        window_rule="first monotone descent from fit_upper to fit_lower")
            files.append(os.path.basename(put("decay", cols, meta)))

        if cfg.mode == "lyapunov":
            ok = [(r["key"], r["summary"]) for r in runs if "summary" in r]
            if ok:
                cols = {
                    "key": [k if k is not None else math.nan for k, _ in ok],
                    "lambda_max": [s["lambda_max"] for _, s in ok],
                    "lambda_half_length": [s["lambda_half_length"] for _, s in ok],
                    "r_squared": [s["r_squared"] for _, s in ok],
                    "delay": [s["delay"] for _, s in ok],
                    "references": [s["references"] for _, s in ok],
                }
                meta = dict(cfg.system.as_dict(), sweep=name or "none",
                            classification=" ".join(s["classification"] for _, s in ok))
                files.append(os.path.basename(put("lyapunov", cols, meta)))

        if cfg.mode == "spectrum" and len(runs) > 1:
            ok = [(r["key"], r["summary"]) for r in runs if "summary" in r]
            if ok:
                cols = {"key": [k for k, _ in ok], "entropy": [s["entropy"] for _, s in ok],
                        "bins_used": [s["bins_used"] for _, s in ok]}
                files.append(os.path.basename(put("spectrum_entropy", cols, dict(sweep=name))))

        if cfg.mode == "entropy_sweep" and entropy_inputs:
            n = min(r["series"].size for _, r in entropy_inputs)
            t_min = a["t_min"]
            if t_min is None:
                t_min = max(r["summary"]["default_t_min"] for _, r in entropy_inputs)
            t_max = n if a["t_max"] is None else a["t_max"]
            vals, ents, bins, ok_keys = [], [], [], []
            for value, r in entropy_inputs:
                try:
                    ent = fidelity_entropy(TimeSeries(r["series"][:n], 0, cfg.stride), t_min, t_max,
                                           a["log_base"], a["include_dc"])
                except KerrChaosError as exc:
                    for entry in runs:
                        if entry["key"] == value:
                            entry["status"] = "numerical_error"
                            entry["message"] = str(exc)
                    continue
                vals.append(value if value is not None else math.nan)
                ents.append(ent.entropy)
                bins.append(ent.bins_used)
            meta = dict(cfg.system.as_dict(), sweep=name or "none", series=a["series"], t_min=t_min,
                        t_max=t_max, log_base=a["log_base"], include_dc=a["include_dc"])
            files.append(os.path.basename(
                put("entropy", {name or "key": vals, "entropy": ents, "bins_used": bins}, meta)
            ))

    statuses = [r["status"] for r in runs]
    if all(s == "ok" for s in statuses):
        status, code = "ok", EXIT_OK
    elif any(s == "io_error" for s in statuses):
        status, code = "failed", EXIT_IO
    else:
        status, code = ("partial" if "ok" in statuses else "failed"), EXIT_NUMERICAL
    manifest = {
        "version": __version__,
        "backend": _ext.BACKEND,
        "config_hash": cfg.config_hash(),
        "config": cfg.echo(),
        "mode": cfg.mode,
        "runs": runs,
        "files": files,
        "status": status,
        "exit_code": code,
        "timings": {"started": started, "wall_seconds": time.perf_counter() - t0},
        "reused": False,
    }
    write_json(manifest_path(cfg.out, cfg.config_hash()), manifest)
    write_json(os.path.join(cfg.out, MANIFEST), manifest)
    return manifest


def load_manifests(out):
    """All per-config manifests in ``out`` (oldest first)."""
    found = []
    for path in sorted(glob.glob(os.path.join(out, "manifest_*.json"))):
        with open(path) as fh:
            found.append(json.load(fh))
    found.sort(key=lambda m: m.get("timings", {}).get("started", 0))
    return found


__all__ = [
    "EXIT_IO",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_USAGE",
    "compute_point",
    "execute",
    "find_previous",
    "load_manifests",
    "sweep_points",
]
