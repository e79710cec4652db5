"""Run configuration: command-line flags, key=value files and the config hash."""

import argparse
from dataclasses import asdict, dataclass, field
import hashlib
import json
import math

from .errors import KerrChaosError
from .params import KICK_METHODS, SystemParams

MODES = ("trajectory", "bifurcation", "entropy_sweep", "lyapunov", "decay_fit", "spectrum")
FORMATS = ("csv", "json")

# flag name -> SystemParams field
SYSTEM_FLAGS = {
    "epsilon": "epsilon",
    "delta-eps": "delta_epsilon",
    "chi": "chi",
    "period": "period",
    "dim": "dim",
    "buffer": "buffer",
    "kicks": "kicks",
    "kerr-factor": "kerr_factor",
    "kick-method": "kick_method",
}
INT_FIELDS = {"dim", "buffer", "kicks"}

SWEEPABLE = {
    "epsilon": "epsilon",
    "delta_epsilon": "delta_epsilon",
    "delta-eps": "delta_epsilon",
    "chi": "chi",
    "period": "period",
    "dim": "dim",
    "buffer": "buffer",
    "kicks": "kicks",
}


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _base(text):
    t = str(text).strip().lower()
    return math.e if t in ("e", "nat", "nats") else float(t)


def _int_or_none(text):
    return None if str(text).strip().lower() in ("", "none", "auto") else int(text)


def _float_or_none(text):
    return None if str(text).strip().lower() in ("", "none", "auto") else float(text)


def _choice(*options):
    def conv(text):
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text

    return conv


# --analysis.<key> overrides with their converters and defaults
ANALYSIS_KEYS = {
    "series": (_choice("fidelity", "f_n", "mean_n"), "fidelity"),
    "t_min": (_int_or_none, None),
    "t_max": (_int_or_none, None),
    "log_base": (_base, math.e),
    "include_dc": (_bool, True),
    "regime": (_choice("gaussian", "exponential", "both"), "both"),
    "fit_upper": (float, 0.9),
    "fit_lower": (float, 0.1),
    "fit_min_points": (int, 8),
    "embedding_dim": (int, 4),
    "delay": (_int_or_none, None),
    "delay_rule": (_choice("first_zero", "first_min"), "first_zero"),
    "theiler": (int, 50),
    "radius": (_float_or_none, None),
    "radius_factor": (float, 0.1),
    "fit_start": (int, 1),
    "fit_end": (int, 30),
    "tol": (float, 0.001),
    "post_decay": (_bool, True),
    "transient": (int, 2000),
    "samples": (int, 500),
    "divergence_steps": (int, 2000),
    "eps_start": (float, 0.0),
    "eps_stop": (float, 0.6),
    "eps_steps": (int, 301),
    "leak_policy": (_choice("flag", "stop", "raise"), "flag"),
    "allow_unsafe": (_bool, False),
    "backend": (_choice("auto", "cython", "python"), "auto"),
    "keep_series": (_bool, False),
}


class UsageError(KerrChaosError):
    """Bad command line or configuration file (exit code 2)."""


@dataclass
class RunConfig:
    mode: str
    system: SystemParams
    sweep: tuple | None = None
    analysis: dict = field(default_factory=dict)
    out: str = "kerrchaos_out"
    format: str = "csv"
    workers: int = 1
    stride: int = 1
    figure: str | None = None
    force: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}, got {self.format!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise UsageError("workers must be a positive integer")
        if int(self.stride) != self.stride or self.stride < 1:
            raise UsageError("stride must be a positive integer")
        if self.sweep is not None:
            name, start, stop, steps = self.sweep
            if name not in SWEEPABLE:
                raise UsageError(f"cannot sweep {name!r}; choose from {sorted(set(SWEEPABLE))}")
            if not (math.isfinite(start) and math.isfinite(stop)):
                raise UsageError("sweep bounds must be finite")
            if int(steps) != steps or steps < 1:
                raise UsageError("sweep steps must be >= 1")
            self.sweep = (SWEEPABLE[name], float(start), float(stop), int(steps))
        full = {k: default for k, (_, default) in ANALYSIS_KEYS.items()}
        unknown = set(self.analysis) - set(full)
        if unknown:
            raise UsageError(f"unknown analysis keys: {sorted(unknown)}")
        full.update(self.analysis)
        self.analysis = full

    def content(self):
        """Everything that determines the numerical outputs (not workers or paths)."""
        return {
            "mode": self.mode,
            "system": self.system.as_dict(),
            "sweep": list(self.sweep) if self.sweep else None,
            "analysis": self.analysis,
            "format": self.format,
            "stride": self.stride,
        }

    def config_hash(self):
        text = json.dumps(self.content(), sort_keys=True, separators=(",", ":"), default=repr)
        return hashlib.sha256(text.encode()).hexdigest()

    def echo(self):
        d = self.content()
        d.update(out=self.out, workers=self.workers, figure=self.figure)
        return d

    def as_dict(self):
        return asdict(self)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(
        prog="kerrchaos",
        description="Kicked Kerr oscillator: fidelity runs, sweeps and chaos diagnostics.",
        allow_abbrev=False,
    )
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--epsilon", type=float, help="kick strength (default 0.1)")
    p.add_argument("--delta-eps", type=float, help="perturbation of the kick strength (default 0.001)")
    p.add_argument("--chi", type=float, help="Kerr nonlinearity (default 1)")
    p.add_argument("--period", type=float, help="time T between kicks (default pi)")
    p.add_argument("--dim", type=int, help="Fock-space dimension (default 128)")
    p.add_argument("--buffer", type=int, help="leak-monitor width; top buffer/2 states watched (default 64)")
    p.add_argument("--kicks", type=int, help="number of kicks (default 1000)")
    p.add_argument("--kerr-factor", type=float, help="Kerr phase is exp(-i f chi T n(n-1)) (default 0.5)")
    p.add_argument("--kick-method", choices=KICK_METHODS, help="kick matrix construction")
    p.add_argument("--stride", type=int, help="record every n-th kick (default 1)")
    p.add_argument("--sweep", nargs=4, metavar=("NAME", "START", "STOP", "STEPS"),
                   help=f"linear sweep of one of {', '.join(SWEEPABLE)}")
    p.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    p.add_argument("--out", help="output directory (default kerrchaos_out)")
    p.add_argument("--format", choices=FORMATS, help="table format (default csv)")
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--figure", help="emit plot data for a figure id from existing runs")
    p.add_argument("--force", action="store_true", default=None, help="recompute even if outputs exist")
    p.epilog = "Estimator settings: --analysis.<key> VALUE, keys: " + ", ".join(ANALYSIS_KEYS)
    return p


def _split_analysis(argv):
    """Pull ``--analysis.key value`` / ``--analysis.key=value`` out of argv."""
    rest, found = [], {}
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--analysis."):
            key = a[len("--analysis.") :]
            if "=" in key:
                key, value = key.split("=", 1)
            else:
                if i + 1 >= len(argv):
                    raise UsageError(f"{a} needs a value")
                value = argv[i + 1]
                i += 1
            found[key.replace("-", "_")] = value
        else:
            rest.append(a)
        i += 1
    return rest, found


def read_config_file(path):
    """``key = value`` lines; keys are flag names without dashes, ``#`` starts a comment."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-")] = value
    return out


def _convert_analysis(raw):
    out = {}
    for key, value in raw.items():
        if key not in ANALYSIS_KEYS:
            raise UsageError(f"unknown analysis key {key!r}; valid: {sorted(ANALYSIS_KEYS)}")
        conv = ANALYSIS_KEYS[key][0]
        try:
            out[key] = conv(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise UsageError(f"analysis.{key}: {exc}") from exc
    return out


def _parse_sweep(values):
    name, start, stop, steps = values
    try:
        return (name, float(start), float(stop), int(steps))
    except ValueError as exc:
        raise UsageError(f"bad --sweep values {values}: {exc}") from exc


def parse_config(argv=None, require_mode=True):
    """Build a :class:`RunConfig`; command-line flags override the config file."""
    argv = list(argv or [])
    argv, cli_analysis = _split_analysis(argv)
    ns = build_parser().parse_args(argv)

    file_vals = read_config_file(ns.config) if ns.config else {}
    file_analysis = {k[len("analysis.") :]: v for k, v in file_vals.items() if k.startswith("analysis.")}
    file_vals = {k: v for k, v in file_vals.items() if not k.startswith("analysis.")}
    known = set(SYSTEM_FLAGS) | {"mode", "stride", "sweep", "workers", "out", "format", "figure", "force"}
    unknown = set(file_vals) - known
    if unknown:
        raise UsageError(f"unknown keys in config file: {sorted(unknown)}")

    def pick(flag, conv=str):
        v = getattr(ns, flag.replace("-", "_"))
        if v is not None:
            return v
        if flag in file_vals:
            try:
                return conv(file_vals[flag])
            except ValueError as exc:
                raise UsageError(f"config file {flag}: {exc}") from exc
        return None

    mode = pick("mode")
    if mode is None:
        if require_mode:
            raise UsageError("--mode is required")
    system = {}
    for flag, fname in SYSTEM_FLAGS.items():
        conv = int if fname in INT_FIELDS else (str if fname == "kick_method" else float)
        v = pick(flag, conv)
        if v is not None:
            system[fname] = v
    try:
        params = SystemParams(**system)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc

    sweep = ns.sweep if ns.sweep is not None else (file_vals["sweep"].split() if "sweep" in file_vals else None)
    if sweep is not None:
        if len(sweep) != 4:
            raise UsageError("sweep needs NAME START STOP STEPS")
        sweep = _parse_sweep(sweep)

    analysis = _convert_analysis(file_analysis)
    analysis.update(_convert_analysis(cli_analysis))
    kwargs = {
        "mode": mode if mode is not None else "trajectory",
        "system": params,
        "sweep": sweep,
        "analysis": analysis,
    }
    for flag, conv in (("out", str), ("format", str), ("workers", int), ("stride", int), ("figure", str)):
        v = pick(flag, conv)
        if v is not None:
            kwargs[flag] = v
    force = pick("force", _bool)
    kwargs["force"] = bool(force)
    cfg = RunConfig(**kwargs)
    cfg.mode_given = mode is not None
    return cfg
