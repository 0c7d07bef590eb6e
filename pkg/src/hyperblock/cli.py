"""Command-line interface.

Commands: ``snr | sample | detect | experiment | conclab``, each driven by
a flat key=value config file (see ``hyperblock.config``).  Shared flags:
``--config <path>``, ``--seed <u64>`` (overrides the config seed),
``--jobs <int>``, ``--out <path>``.  Set ``HYPERBLOCK_LOG`` to a level
name (debug, info, ...) for diagnostics on stderr.

Exit codes: 0 success, 2 invalid argument, 3 I/O failure, 4 partition
failure.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys


from . import concentration, fileio, metrics, model, pipeline, runner, sampler
from .config import ExperimentConfig, parse_config
from .model import ResourceLimitError
from .pipeline import PartitionFailure
from .spectral import ConvergenceError

EXIT_INVALID = 2
EXIT_IO = 3
EXIT_PARTITION = 4

log = logging.getLogger("hyperblock")


def _setup_logging() -> None:
    level_name = os.environ.get("HYPERBLOCK_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(path: str, command: str, seed_override: int | None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = parse_config(fh.read(), command)
    if seed_override is not None:
        cfg.seed = seed_override
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_snr(cfg: ExperimentConfig, args) -> int:
    """Print the signal-to-noise ratio of every order subset, marking the argmax."""
    params = cfg.model_params()
    best = model.preprocess_select(params)
    orders = sorted(params.orders)
    lines = ["subset\tsnr\tselected"]
    for r in range(1, len(orders) + 1):
        for combo in itertools.combinations(orders, r):
            subset = model.OrderSubset(frozenset(combo))
            mark = "*" if subset.members == best.members else ""
            lines.append("{%s}\t%s\t%s" % (",".join(map(str, combo)),
                                           repr(model.snr_subset(params, subset)), mark))
    const = model.error_rate_constant(best, cfg.nu, params.k)
    lines.append(f"# error-rate constant at nu={repr(cfg.nu)}: {repr(const)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sample(cfg: ExperimentConfig, args) -> int:
    """Sample one instance and write it in the hypergraph text format."""
    params = cfg.model_params()
    h, labels = sampler.sample_hsbm(params, cfg.seed)
    if cfg.colors:
        h = sampler.color_edges(h, runner.trial_seed(cfg.seed, 1))
    text = fileio.write_hypergraph(h, params.k, labels if cfg.labels else None)
    _emit(text, args.out)
    return 0


def cmd_detect(cfg: ExperimentConfig, args) -> int:
    """Partition an instance (from file or sampled inline) and write labels."""
    params = cfg.model_params()
    truth = None
    if cfg.input is not None:
        with open(cfg.input, "r", encoding="utf-8") as fh:
            h, file_k, truth = fileio.read_hypergraph(fh.read())
        if h.n != params.n or file_k != params.k:
            raise ValueError(
                f"config says n={params.n} k={params.k}, file says n={h.n} k={file_k}")
    else:
        h, truth = sampler.sample_hsbm(params, runner.trial_seed(cfg.seed, 0))
    pcfg = pipeline.PipelineConfig(nu=cfg.nu, seed=runner.trial_seed(cfg.seed, 1))
    labels = pipeline.partition(params, h, pcfg)
    _emit(fileio.write_labels(labels), args.out)
    if truth is not None:
        report = metrics.accuracy_report(truth, labels)
        sys.stdout.write("gamma,matched_accuracy,misclassified_fraction\n")
        sys.stdout.write(",".join([
            repr(report.gamma), repr(report.matched_accuracy),
            repr(report.misclassified / params.n),
        ]) + "\n")
    return 0


def cmd_experiment(cfg: ExperimentConfig, args) -> int:
    """Run the rate-gap ladder and write trial and summary tables."""
    rows, summary = runner.experiment_rows(cfg, jobs=args.jobs)
    out = args.out or "experiment.csv"
    _emit("\n".join([runner.EXPERIMENT_HEADER] + rows) + "\n", out)
    summary_path = None if out in (None, "-") else out + ".summary"
    _emit("\n".join(summary) + "\n", summary_path)
    return 0


def cmd_conclab(cfg: ExperimentConfig, args) -> int:
    """Run concentration trials and write one CSV row per trial."""
    records = runner.conclab_records(cfg, jobs=args.jobs)
    _emit(concentration.records_to_csv(records), args.out)
    return 0


_COMMANDS = {
    "snr": cmd_snr,
    "sample": cmd_sample,
    "detect": cmd_detect,
    "experiment": cmd_experiment,
    "conclab": cmd_conclab,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperblock",
        description="Community detection on sparse non-uniform hypergraph block models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
        p.add_argument("--out", default=None, help="output path (default stdout)")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config, args.command, args.seed)
        return _COMMANDS[args.command](cfg, args)
    except (ValueError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PartitionFailure as exc:
        print(f"partition failure: {exc}", file=sys.stderr)
        for key, val in exc.diagnostics.items():
            print(f"  {key} = {val}", file=sys.stderr)
        return EXIT_PARTITION
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_PARTITION


if __name__ == "__main__":
    sys.exit(main())
