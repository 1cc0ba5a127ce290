"""Command-line harness: ``train-experts``, ``run``, ``sweep``, ``verify-bounds``.

Options can also come from a ``--config`` file of ``key = value`` lines
(keys are the long option names, dashes or underscores); flags given on the
command line win over the file.
"""

import argparse
import sys
from pathlib import Path

from . import bench
from .dataio import ParseError
from .experts import format_model


class ConfigError(ValueError):
    pass


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _float_list(text):
    return tuple(float(t) for t in str(text).replace(",", " ").split())


def _policy_list(text):
    return tuple(t.strip().upper() for t in str(text).replace(",", " ").split())


_CONVERTERS = {
    "dataset": str,
    "model": str,
    "output": str,
    "split_seed": int,
    "train_fraction": float,
    "permutation_seed": int,
    "permutations": int,
    "policies": _policy_list,
    "delta": float,
    "deltas": _float_list,
    "eta": float,
}


def build_config(args, command):
    """Merge defaults, the config file and explicit flags."""
    merged = {}
    extras = {}
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key in _CONVERTERS:
                merged[key] = value
            elif "_" in key and key.split("_", 1)[0].lower() in {"pa", "alma", "arow", "romma", "perceptron"}:
                extras[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
    for key in _CONVERTERS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    for item in getattr(args, "expert_param", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--expert-param expects key=value, got {item!r}")
        extras[key.strip()] = value.strip()
    try:
        kwargs = {k: _CONVERTERS[k](v) for k, v in merged.items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if command == "sweep" and "policies" not in kwargs:
        kwargs["policies"] = ("AEWAF", "REWAF")
    return bench.ExperimentConfig(expert_params=extras, **kwargs)


def _write(text, path, out):
    if path:
        Path(path).write_text(text)
    else:
        out.write(text)


def _require(config, *names):
    missing = [n for n in names if getattr(config, n) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def cmd_train_experts(config, out=sys.stdout):
    _require(config, "dataset", "model")
    pool = bench.train_experts(config)
    Path(config.model).write_text(format_model(pool))
    for e in pool:
        print(f"{e.kind.value}: {e.mistakes} training mistakes, {e.updates} updates", file=out)
    print(f"wrote {len(pool)} experts (dim {pool.dim}) to {config.model}", file=out)
    return 0


def cmd_run(config, out=sys.stdout):
    _require(config, "dataset", "model")
    if not Path(config.model).exists():
        raise ConfigError(f"model file {config.model} does not exist; run train-experts first")
    prepared = bench.prepare(config)
    results = bench.run_protocol(prepared, config)
    _write(bench.format_results_csv(results), config.output, out)
    return 0


def cmd_sweep(config, out=sys.stdout):
    _require(config, "dataset", "model")
    if not Path(config.model).exists():
        raise ConfigError(f"model file {config.model} does not exist; run train-experts first")
    prepared = bench.prepare(config)
    results = bench.sweep_protocol(prepared, config)
    _write(bench.format_results_csv(results), config.output, out)
    return 0


def cmd_verify_bounds(path, out=sys.stdout):
    rows = bench.read_results_csv(Path(path).read_text())
    checks = bench.verify_bounds(rows)
    failures = 0
    for c in checks:
        if not c.applicable:
            status = "SKIP"
        elif c.passed:
            status = "PASS"
        else:
            status = "FAIL"
            failures += 1
        bound = "n/a" if not c.applicable else f"{c.bound:.6f}"
        print(f"{status} row {c.row} {c.policy} seed={c.seed} regret={c.regret:.6f} bound={bound}", file=out)
    checked = sum(c.applicable for c in checks)
    print(f"{checked - failures}/{checked} bound checks passed", file=out)
    return 1 if failures else 0


def _add_common(p, with_model=True):
    p.add_argument("--config", help="file of 'key = value' lines")
    p.add_argument("--dataset", help="sparse text dataset (optionally gzipped)")
    if with_model:
        p.add_argument("--model", help="expert model file")
    p.add_argument("--split-seed", type=int, dest="split_seed")
    p.add_argument("--train-fraction", type=float, dest="train_fraction")


def _add_protocol(p):
    p.add_argument("--permutations", type=int, help="number of test permutations (default 20)")
    p.add_argument("--permutation-seed", type=int, dest="permutation_seed")
    p.add_argument("--policies", help="comma-separated: EWAF,GF,AEWAF,REWAF,AGF,RGF")
    p.add_argument("--eta", type=float, help="learning rate (default sqrt(8 ln N / T))")
    p.add_argument("--output", "-o", help="CSV path (default stdout)")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="activeforecast",
        description="Active learning with expert advice: experiment harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-experts", help="train the five-expert pool and write a model file")
    _add_common(p)
    p.add_argument("--expert-param", action="append", metavar="KIND_NAME=VALUE",
                   help="override an expert parameter, e.g. pa_C=5 or arow_r=1")

    p = sub.add_parser("run", help="run forecasters over test permutations")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--delta", type=float, help="confidence tolerance (default 0.2)")

    p = sub.add_parser("sweep", help="sweep delta for active policies and matched baselines")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--deltas", help="sorted delta grid, comma-separated")

    p = sub.add_parser("verify-bounds", help="check results against worst-case regret bounds")
    p.add_argument("csv", help="results CSV from run or sweep")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    args = make_parser().parse_args(argv)
    try:
        if args.command == "verify-bounds":
            return cmd_verify_bounds(args.csv, out)
        config = build_config(args, args.command)
        handler = {"train-experts": cmd_train_experts, "run": cmd_run, "sweep": cmd_sweep}
        return handler[args.command](config, out)
    except (ConfigError, ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
