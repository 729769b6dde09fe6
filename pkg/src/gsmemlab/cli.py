"""``gsmemlab`` command line.

Exit status: 0 on success, 2 for usage errors (bad flags, bad hex, unreadable
or invalid configuration), 1 for runtime failures (I/O, malformed data or
model files, training errors).
"""

import argparse
import logging
import os
import sys

from . import channel, dataset
from . import eval as ev
from .classifiers import TAGS, load_model, predict, save_model, train
from .config import load_run_config
from .errors import GsmemError, ParseError

log = logging.getLogger("gsmemlab")


class UsageError(Exception):
    pass


def _load_config(args):
    try:
        cfg = load_run_config(args.config)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {args.config}") from None
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
    except ParseError as exc:
        raise UsageError(f"bad config: {exc}") from None
    return cfg.with_seed(args.seed)


def _parent_dir_ok(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise OSError(f"output directory does not exist: {parent}")


def cmd_simulate(args):
    try:
        data = bytes.fromhex(args.payload)
    except ValueError:
        raise UsageError(f"payload is not valid hex: {args.payload!r}") from None
    if not data:
        raise UsageError("payload is empty")
    cfg = _load_config(args)
    out = args.out or "trace.csv"
    _parent_dir_ok(out)
    payload = channel.encode_payload(data)
    trace = channel.amplify(channel.modulate(payload, cfg.modulation), cfg.modulation)
    trace = channel.apply_noise(trace, cfg.noise, cfg.seed)
    received = channel.demodulate(trace, cfg.modulation)
    channel.write_trace_csv(trace, out)
    print(f"ber {channel.bit_error_rate(payload, received)!r}")
    return 0


def cmd_gen_data(args):
    cfg = _load_config(args)
    out = args.out or "dataset.csv"
    _parent_dir_ok(out)
    data = dataset.generate(cfg.generator_config())
    dataset.write_csv(data, out)
    counts = data.class_counts()
    log.info("wrote %d rows (%d benign, %d attack) to %s", len(data),
             counts[dataset.Label.BENIGN], counts[dataset.Label.ATTACK], out)
    return 0


def cmd_train(args):
    cfg = _load_config(args)
    config = cfg.train_config(args.algorithm)
    data = dataset.read_csv(args.data)
    out = args.out or "model.json"
    _parent_dir_ok(out)
    model = train(config, data)
    save_model(model, out)
    log.info("trained %s on %d samples -> %s", args.algorithm, len(data), out)
    return 0


def _emit(args, text):
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)


def cmd_predict(args):
    model = load_model(args.model)
    p = predict(model, (args.frequency, args.amplitude))
    _emit(args, f"{p.label.text} {p.score:.12g}\n")
    return 0


def cmd_evaluate(args):
    model = load_model(args.model)
    data = dataset.read_csv(args.data)
    m = ev.evaluate(model, data)
    fmt = ev._fmt_rate
    c = m.matrix
    _emit(args, "fpr,fnr,accuracy,tp,fp,tn,fn\n"
                f"{fmt(m.fpr)},{fmt(m.fnr)},{fmt(m.accuracy)},{c.tp},{c.fp},{c.tn},{c.fn}\n")
    return 0


def cmd_compare(args):
    cfg = _load_config(args)
    out_dir = args.out or cfg.out_dir
    jobs = args.jobs or cfg.jobs
    data = dataset.generate(cfg.generator_config())
    report = ev.compare_all(cfg.algorithms, cfg.grids(), data, cfg.split_fraction,
                            cfg.seed, jobs=jobs)
    csv_path, svg_path = ev.emit_report(report, out_dir, include_timing=args.timing)
    sys.stdout.write(ev.comparison_csv(report, include_timing=args.timing))
    log.info("wrote %s and %s (split %s)", csv_path, svg_path, report.split_hash[:12])
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, metavar="N", help="master seed (overrides config)")
    common.add_argument("--out", metavar="PATH", help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gsmemlab",
                                description="GSMem covert-channel simulator and detectors")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common],
                       help="modulate a hex payload, write the trace, print the BER")
    s.add_argument("--payload", required=True, metavar="HEX")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("gen-data", parents=[common], help="write a labelled dataset CSV")
    s.set_defaults(func=cmd_gen_data)

    s = sub.add_parser("train", parents=[common], help="train one model")
    s.add_argument("--algorithm", required=True, choices=TAGS)
    s.add_argument("--data", required=True, metavar="PATH")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common], help="classify one feature vector")
    s.add_argument("--model", required=True, metavar="PATH")
    s.add_argument("--frequency", required=True, type=float, metavar="HZ")
    s.add_argument("--amplitude", required=True, type=float)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", parents=[common], help="FPR/FNR of a model on a dataset")
    s.add_argument("--model", required=True, metavar="PATH")
    s.add_argument("--data", required=True, metavar="PATH")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("compare", parents=[common],
                       help="grid-search every algorithm, write comparison.csv/.svg")
    s.add_argument("--jobs", type=int, metavar="N", help="parallel training threads")
    s.add_argument("--timing", action="store_true",
                   help="fill the train_seconds column (makes output run-dependent)")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gsmemlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"gsmemlab {args.command}: error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (GsmemError, OSError, ValueError) as exc:
        print(f"gsmemlab {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
