"""
Command line entry point.

    sst-shaper embed --cover c.pgm --message m.bits --k 8 --seed 7 --path keyed:42 --out s.pgm
    sst-shaper extract --stego s.pgm --n 1000 --k 8 --seed 7 --path keyed:42 --out m.bits
    sst-shaper simulate --config camp.toml --out runs.csv --summary summary.csv
    sst-shaper stc-sim --config camp.toml --out stc.csv
    sst-shaper timing --kmax 12 --out timing.csv
    sst-shaper cover --model smooth --seed 1 --out c.pgm

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ImageFormatError
from .harness import (TIMING_COLUMNS, RunRecord, StcRunRecord, TimingConfig, CsvRow, aggregate,
                      emit_csv, index_table, load_campaign_config, metric_table, run_campaign,
                      run_stc_campaign, summarize_stc, timing_study)
from .imaging import CoverModel, generate_cover, load_pgm, save_pgm
from .lsb import extract_lsb, sequential_path
from .rng import RngState, keyed_path
from .shaping import Objective, ShapingConfig, decode_payload, shape_select

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3
DEFAULT_TIMING_KS = (0, 4, 8, 10, 12)


def read_bits(path):
    """Message file: ASCII '0'/'1' characters, whitespace ignored."""
    text = "".join(Path(path).read_text(encoding="ascii").split())
    if set(text) - {"0", "1"}:
        raise ConfigError(f"{path}: message file may only contain '0' and '1'")
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def write_bits(path, bits):
    Path(path).write_text("".join(map(str, np.asarray(bits).tolist())) + "\n", encoding="ascii")


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits: {text}")
    return value


def parse_path_spec(spec, length, pixel_count):
    """'seq' for the first pixels in row-major order, 'keyed:KEY' for a keyed path."""
    if spec == "seq":
        return sequential_path(length, pixel_count)
    mode, _, key = spec.partition(":")
    if mode != "keyed" or not key:
        raise ConfigError(f"path must be 'seq' or 'keyed:KEY', got {spec!r}")
    try:
        return keyed_path(_seed(key), pixel_count, length)
    except (argparse.ArgumentTypeError, ValueError) as e:
        raise ConfigError(f"bad path key in {spec!r}: {e}") from e


@dataclass(frozen=True)
class CandidateRow(CsvRow):
    h: int
    kl: float
    chosen: bool


def _write(path, data):
    Path(path).write_bytes(data)
    logger.info("wrote %s", path)


def cmd_embed(args):
    cover = load_pgm(args.cover)
    message = read_bits(args.message)
    path = parse_path_spec(args.path, message.size + args.k, cover.size)
    result = shape_select(cover, message, ShapingConfig(k=args.k, session_seed=args.seed), path)
    save_pgm(args.out, result.stego)
    if args.report:
        rows = [CandidateRow(h=h, kl=value, chosen=h == result.chosen_h) for h, value in result.per_candidate]
        _write(args.report, emit_csv(rows, CandidateRow.csv_columns()))
    logger.info("embedded %d bits with h=%d (KL %.6g)", result.payload.size, result.chosen_h,
                result.objective_value)


def cmd_extract(args):
    stego = load_pgm(args.stego)
    path = parse_path_spec(args.path, args.n + args.k, stego.size)
    _, message = decode_payload(extract_lsb(stego, args.n + args.k, path), args.k, args.seed)
    write_bits(args.out, message)


def _sibling(path, suffix):
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


def _campaign_outputs(args, records, columns, objective):
    drop = TIMING_COLUMNS if args.no_timing else ()
    _write(args.out, emit_csv(records, columns, drop=drop))
    if not args.summary:
        return
    if objective is Objective.SYNDROME_COST:
        _write(args.summary, emit_csv(summarize_stc(records)))
        return
    # one table per file
    rows = [row for group in ("k", "model", "n") for row in aggregate(records, group)]
    _write(args.summary, emit_csv(rows))
    _write(_sibling(args.summary, "metrics"), emit_csv(metric_table(records)))
    index_rows = index_table(records)
    if index_rows:
        _write(_sibling(args.summary, "index"), emit_csv(index_rows))


def cmd_simulate(args):
    cfg = load_campaign_config(args.config)
    if args.out is None and cfg.output is not None:
        args.out = cfg.output
    if args.out is None:
        raise ConfigError("no output file given (--out or output = ... in the config)")
    if cfg.objective is Objective.SYNDROME_COST:
        _campaign_outputs(args, run_stc_campaign(cfg), StcRunRecord.csv_columns(), cfg.objective)
    else:
        _campaign_outputs(args, run_campaign(cfg), RunRecord.csv_columns(), cfg.objective)


def cmd_stc_sim(args):
    cfg = dataclasses.replace(load_campaign_config(args.config), objective=Objective.SYNDROME_COST)
    if args.out is None:
        args.out = cfg.output
    if args.out is None:
        raise ConfigError("no output file given (--out or output = ... in the config)")
    _campaign_outputs(args, run_stc_campaign(cfg), StcRunRecord.csv_columns(), cfg.objective)


def cmd_timing(args):
    ks = tuple(k for k in DEFAULT_TIMING_KS if k <= args.kmax)
    if not ks:
        raise ConfigError(f"--kmax {args.kmax} leaves no K to time")
    rows = timing_study(TimingConfig(ks=ks, repetitions=args.reps, master_seed=args.seed))
    _write(args.out, emit_csv(rows))


def cmd_cover(args):
    cover = generate_cover(args.model, args.width, args.height, RngState(args.seed))
    save_pgm(args.out, cover)


def build_parser():
    parser = argparse.ArgumentParser(prog="sst-shaper", description="Payload shaping for LSB and syndrome embedders")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="shape a message and embed it into a PGM cover")
    embed.add_argument("--cover", required=True)
    embed.add_argument("--message", required=True, help="file of ASCII 0/1 bits")
    embed.add_argument("--k", type=int, default=8, help="shaping index bits")
    embed.add_argument("--seed", type=_seed, default=0, help="session seed for the masks")
    embed.add_argument("--path", default="seq", help="'seq' or 'keyed:KEY'")
    embed.add_argument("--out", required=True)
    embed.add_argument("--report", help="per-candidate CSV")
    embed.set_defaults(func=cmd_embed)

    extract = sub.add_parser("extract", help="recover a shaped message from a stego PGM")
    extract.add_argument("--stego", required=True)
    extract.add_argument("--n", type=int, required=True, help="message length in bits")
    extract.add_argument("--k", type=int, default=8)
    extract.add_argument("--seed", type=_seed, default=0)
    extract.add_argument("--path", default="seq")
    extract.add_argument("--out", required=True)
    extract.set_defaults(func=cmd_extract)

    for name, func, help_text in (("simulate", cmd_simulate, "run a shaping campaign"),
                                  ("stc-sim", cmd_stc_sim, "run a syndrome-cost campaign")):
        campaign = sub.add_parser(name, help=help_text)
        campaign.add_argument("--config", required=True, help="flat key = value campaign file")
        campaign.add_argument("--out")
        campaign.add_argument("--summary", metavar="FILE",
                              help="also write the summary tables, one CSV each (FILE, FILE_metrics, FILE_index)")
        campaign.add_argument("--no-timing", action="store_true", help="leave out wall-clock columns")
        campaign.set_defaults(func=func)

    timing = sub.add_parser("timing", help="time exhaustive candidate search")
    timing.add_argument("--kmax", type=int, default=12)
    timing.add_argument("--reps", type=int, default=3)
    timing.add_argument("--seed", type=_seed, default=0)
    timing.add_argument("--out", required=True)
    timing.set_defaults(func=cmd_timing)

    cover = sub.add_parser("cover", help="write a synthetic cover image")
    cover.add_argument("--model", choices=[m.value for m in CoverModel], default="smooth")
    cover.add_argument("--width", type=int, default=100)
    cover.add_argument("--height", type=int, default=100)
    cover.add_argument("--seed", type=_seed, default=0)
    cover.add_argument("--out", required=True)
    cover.set_defaults(func=cmd_cover)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ImageFormatError) as e:
        logger.error("%s", e)
        return EXIT_IO
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
