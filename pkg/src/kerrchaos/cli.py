"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 numerical failure (including
truncation-unsafe runs), 4 I/O failure.
"""

import json
import sys

from .config import UsageError, parse_config
from .errors import KerrChaosError
from .figures import FigureError, emit_plot_data
from .runner import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, execute


def _summary(manifest):
    done = sum(r["status"] == "ok" for r in manifest["runs"])
    state = "reused existing outputs" if manifest.get("reused") else manifest["status"]
    return (
        f"{manifest['mode']}: {done}/{len(manifest['runs'])} points ok, {len(manifest['files'])} files, "
        f"{state} (config {manifest['config_hash'][:12]})"
    )


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        wants_figure = any(a == "--figure" or a.startswith("--figure=") for a in argv)
        cfg = parse_config(argv, require_mode=not wants_figure)
    except UsageError as exc:
        print(f"kerrchaos: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    code = EXIT_OK
    try:
        if cfg.mode_given:
            manifest = execute(cfg)
            print(_summary(manifest))
            for run in manifest["runs"]:
                if run["status"] != "ok":
                    msg = run.get("message", "")
                    print(f"  point {run['key']}: {run['status']} {msg}".rstrip(), file=sys.stderr)
            code = manifest["exit_code"]
        if cfg.figure:
            for path in emit_plot_data(cfg.out, cfg.figure):
                print(path)
    except FigureError as exc:
        print(f"kerrchaos: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"kerrchaos: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KerrChaosError, ArithmeticError) as exc:
        print(f"kerrchaos: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except json.JSONDecodeError as exc:
        print(f"kerrchaos: corrupt manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
