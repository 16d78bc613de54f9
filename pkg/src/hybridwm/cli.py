"""Pipeline driver: gen, train, trust, deploy, eval, bench, render, ablate.

One resolved JSON config drives every command; artifacts land under --out with
the resolved config written alongside. Commands verify their prerequisites via
manifests and exit with distinct codes:

    0 success | 2 config error | 3 missing prerequisite
    4 runtime failure | 5 validation failure
"""

import argparse
import json
import os
import sys

from .errors import ConfigError, FileFormatError, HwmError, MissingPrerequisiteError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PREREQ = 3
EXIT_RUNTIME = 4
EXIT_VALIDATION = 5

ENV_PREFIX = "HWM_"
COMMANDS = ("gen", "train", "trust", "deploy", "eval", "bench", "render", "ablate")


def build_parser():
    parser = argparse.ArgumentParser(prog="hybridwm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults per --env/--profile)")
        p.add_argument("--env", choices=("oregonator", "euler", "ball"))
        p.add_argument("--profile", choices=("desk", "paper"))
        p.add_argument("--seed", type=int, help="override the config seed everywhere")
        p.add_argument("--out", help="output directory (default runs/<env>)")
        p.add_argument("--threads", type=int, help="cap worker threads; recorded in benchmarks")
    return parser


def _env_override(args, name, cast=str):
    value = os.environ.get(ENV_PREFIX + name.upper())
    if getattr(args, name, None) is None and value is not None:
        setattr(args, name, cast(value))


def load_config(args):
    from . import configs

    for name, cast in (("config", str), ("env", str), ("profile", str),
                       ("seed", int), ("out", str), ("threads", int)):
        _env_override(args, name, cast)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if args.profile:
            raise ConfigError("--profile applies only when building a default config")
    else:
        if not args.env:
            raise ConfigError("need --config or --env to know what to run")
        cfg = configs.default_config(args.env, args.profile or "desk")
    resolved = configs.resolve(cfg, seed=args.seed, threads=args.threads)
    out_dir = args.out or os.path.join("runs", resolved["env"]["name"])
    return resolved, out_dir


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg, out_dir = load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with _lock(out_dir):
            _write_resolved(cfg, out_dir)
            from . import pipeline

            runner = getattr(pipeline, f"cmd_{args.command}")
            runner(cfg, out_dir)
        return EXIT_OK
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingPrerequisiteError as ex:
        print(f"missing prerequisite: {ex}", file=sys.stderr)
        return EXIT_PREREQ
    except FileFormatError as ex:
        print(f"validation failure: {ex}", file=sys.stderr)
        return EXIT_VALIDATION
    except HwmError as ex:
        print(f"runtime failure: {ex}", file=sys.stderr)
        return EXIT_RUNTIME


class _lock:
    """One command at a time per output directory."""

    def __init__(self, out_dir):
        self.path = os.path.join(out_dir, ".lock")
        os.makedirs(out_dir, exist_ok=True)

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise HwmError(
                f"output directory is locked by another command ({self.path}); "
                "remove the lock file if that command is no longer running"
            )
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        try:
            os.remove(self.path)
        except OSError:
            pass
        return False


def _write_resolved(cfg, out_dir):
    with open(os.path.join(out_dir, "resolved_config.json"), "w") as fh:
        json.dump(cfg, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    sys.exit(main())
