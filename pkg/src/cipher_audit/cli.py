"""Command-line interface: cipher operations and the full experiment suite.

Experiment commands emit CSV reports (LF line endings, 4-decimal fixed
formatting, rows ordered by ascending size then rounds).  Every command is
byte-deterministic for a fixed --seed, regardless of --jobs.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import cipher, experiments, image_io
from .experiments import ExperimentConfig, Stats

SEED_ENV_VAR = "CIPHER_AUDIT_SEED"


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "0"), 0)


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _parse_sizes(text: str) -> list[int]:
    """Comma-separated sizes; 'a..b' selects the standard grid within [a, b]."""
    out: list[int] = []
    for entry in text.split(","):
        entry = entry.strip()
        if ".." in entry:
            lo, hi = (int(part) for part in entry.split("..", 1))
            out.extend(m for m in experiments.DEFAULT_SIZES if lo <= m <= hi)
        else:
            out.append(int(entry))
    if not out:
        raise ValueError("no sizes given")
    return sorted(set(out))


def _parse_rounds(text: str) -> list[int]:
    """Comma-separated round counts; 'a..b' is an inclusive range."""
    out: list[int] = []
    for entry in text.split(","):
        entry = entry.strip()
        if ".." in entry:
            lo, hi = (int(part) for part in entry.split("..", 1))
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(entry))
    if not out:
        raise ValueError("no rounds given")
    return sorted(set(out))


def _parse_percents(text: str) -> list[float]:
    return [float(entry) for entry in text.split(",") if entry.strip()]


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _stats_fields(stats: Stats) -> list[str]:
    return [_fmt(stats.minimum), _fmt(stats.mean), _fmt(stats.maximum), _fmt(stats.std)]


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    text = "\n".join([",".join(header)] + [",".join(row) for row in rows]) + "\n"
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)


def _print_keyspace(report: experiments.KeySpaceReport) -> None:
    print(
        f"key space for M={report.size}: q={report.param_bits}, "
        f"{report.key_bits}-bit key, 2^{report.key_bits} = {report.key_space} keys"
    )
    print(
        f"exhaustive search at {report.guesses_per_second:.0e} guesses/s: "
        f"{report.brute_force_seconds:.3f} s"
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_encrypt(args: argparse.Namespace) -> int:
    image = image_io.read_pgm(args.infile)
    m = cipher.validate_image(image)
    key = cipher.key_from_hex(args.key_hex, m, args.rounds)
    image_io.write_raw(cipher.encrypt(image, key), args.outfile)
    print(f"encrypted {args.infile} ({m}x{m}, {args.rounds} rounds) -> {args.outfile}")
    _print_keyspace(experiments.keyspace_report(m))
    return 0


def _cmd_decrypt(args: argparse.Namespace) -> int:
    blob = image_io.read_raw(args.infile, args.dim)
    key = cipher.key_from_hex(args.key_hex, args.dim, args.rounds)
    image_io.write_pgm(cipher.decrypt(blob, key), args.outfile)
    print(f"decrypted {args.infile} ({args.dim}x{args.dim}, {args.rounds} rounds) -> {args.outfile}")
    return 0


def _cmd_avalanche(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        sizes=tuple(args.sizes), rounds=tuple(args.rounds),
        trials=args.trials, master_seed=args.seed,
    )
    report = experiments.avalanche_sweep(cfg, jobs=args.jobs)
    header = ["size", "rounds", "trials",
              "ps_min", "ps_mean", "ps_max", "ps_std",
              "diff_min", "diff_mean", "diff_max", "diff_std"]
    rows = [
        [str(cell.size), str(cell.rounds), str(cell.ps.count)]
        + _stats_fields(cell.ps) + _stats_fields(cell.diff)
        for cell in report
    ]
    _write_csv(args.outfile, header, rows)
    print(f"wrote {args.outfile} ({len(rows)} cells, {args.trials} trials each)")
    return 0


def _cmd_uniformity(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        sizes=tuple(args.sizes), rounds=tuple(args.rounds),
        trials=args.trials, master_seed=args.seed,
    )
    report = experiments.uniformity_sweep(
        cfg, jobs=args.jobs, plaintext=args.plaintext,
        control_random=args.control_random,
    )
    header = ["size", "rounds", "trials",
              "chi2_min", "chi2_mean", "chi2_max", "chi2_std", "threshold"]
    rows = [
        [str(cell.size), str(cell.rounds), str(cell.chi2.count)]
        + _stats_fields(cell.chi2) + [_fmt(cell.threshold)]
        for cell in report
    ]
    _write_csv(args.outfile, header, rows)
    print(f"wrote {args.outfile} ({len(rows)} cells, {args.trials} trials each)")
    return 0


def _cmd_errorprop(args: argparse.Namespace) -> int:
    image = image_io.read_pgm(args.image)
    cfg = ExperimentConfig(
        trials=args.trials, master_seed=args.seed,
        error_percents=tuple(args.percents),
    )
    report = experiments.error_propagation(cfg, image, jobs=args.jobs, rounds=args.rounds)
    header = ["mode", "percent", "flipped_bits", "trials",
              "dif_min", "dif_mean", "dif_max", "dif_std",
              "psnr_min", "psnr_mean", "psnr_max", "psnr_std",
              "ssim_min", "ssim_mean", "ssim_max", "ssim_std"]
    rows = [
        [row.mode, _fmt(row.percent), str(row.flipped_bits), str(row.dif.count)]
        + _stats_fields(row.dif) + _stats_fields(row.psnr) + _stats_fields(row.ssim)
        for row in report
    ]
    _write_csv(args.outfile, header, rows)
    print(f"wrote {args.outfile} ({len(rows)} rows, {args.trials} trials each)")
    return 0


def _cmd_keyspace(args: argparse.Namespace) -> int:
    _print_keyspace(experiments.keyspace_report(args.dim, args.rate))
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    for line in cipher.matrix_lines():
        print(line)
    return 0


def _cmd_make_image(args: argparse.Namespace) -> int:
    if args.kind == "portrait":
        image = image_io.make_portrait_image(args.dim, seed=args.seed or image_io.PORTRAIT_SEED)
    else:
        image = image_io.make_test_image(args.kind, args.dim, x=args.x, y=args.y, seed=args.seed)
    image_io.write_pgm(image, args.outfile)
    print(f"wrote {args.outfile} ({args.dim}x{args.dim} {args.kind})")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_sweep_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--sizes", type=_parse_sizes, default=list(experiments.DEFAULT_SIZES),
                     help="comma-separated sizes, or a..b for the standard grid within bounds")
    sub.add_argument("--rounds", type=_parse_rounds, default=list(experiments.DEFAULT_ROUNDS),
                     help="comma-separated round counts, or an inclusive a..b range")
    sub.add_argument("--trials", type=int, default=experiments.DEFAULT_TRIALS,
                     help="trials per grid cell (default %(default)s)")
    sub.add_argument("--seed", type=int, default=None,
                     help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
    sub.add_argument("--jobs", type=int, default=None,
                     help="worker processes (default: all cores); results do not depend on it")
    sub.add_argument("--out", dest="outfile", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cipher-audit",
        description="Bit-permutation image cipher and its statistical audit harness.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("encrypt", help="encrypt a PGM into a raw ciphertext blob")
    sub.add_argument("--in", dest="infile", required=True, help="input PGM (P5) path")
    sub.add_argument("--out", dest="outfile", required=True, help="output blob path")
    sub.add_argument("--key-hex", required=True, help="4q-bit key as q hex digits")
    sub.add_argument("--rounds", type=int, required=True, help="round count r >= 1")
    sub.set_defaults(func=_cmd_encrypt)

    sub = commands.add_parser("decrypt", help="decrypt a raw ciphertext blob into a PGM")
    sub.add_argument("--in", dest="infile", required=True, help="input blob path")
    sub.add_argument("--out", dest="outfile", required=True, help="output PGM path")
    sub.add_argument("--key-hex", required=True, help="4q-bit key as q hex digits")
    sub.add_argument("--rounds", type=int, required=True, help="round count r >= 1")
    sub.add_argument("--dim", type=int, required=True, help="side length M of the blob")
    sub.set_defaults(func=_cmd_decrypt)

    sub = commands.add_parser("avalanche", help="plaintext-sensitivity sweep (PS and Diff)")
    _add_sweep_flags(sub)
    sub.set_defaults(func=_cmd_avalanche)

    sub = commands.add_parser("uniformity", help="ciphertext chi-square sweep")
    _add_sweep_flags(sub)
    sub.add_argument("--plaintext", choices=[experiments.PLAINTEXT_SINGLE_LSB,
                                             experiments.PLAINTEXT_ALL_ZERO],
                     default=experiments.PLAINTEXT_SINGLE_LSB,
                     help="plaintext fed to the cipher (default %(default)s)")
    sub.add_argument("--control-random", action="store_true",
                     help="score uniform random bytes instead of ciphertext (sanity check, ~255)")
    sub.set_defaults(func=_cmd_uniformity)

    sub = commands.add_parser("errorprop", help="channel-error propagation report")
    sub.add_argument("--image", required=True, help="input PGM (P5) path")
    sub.add_argument("--percents", type=_parse_percents, default=list(experiments.DEFAULT_ERROR_PERCENTS),
                     help="comma-separated bit-error percentages (default %(default)s)")
    sub.add_argument("--trials", type=int, default=experiments.DEFAULT_TRIALS,
                     help="trials (default %(default)s)")
    sub.add_argument("--rounds", type=int, default=experiments.SECURE_ROUNDS,
                     help="round count (default %(default)s, the secure configuration)")
    sub.add_argument("--seed", type=int, default=None,
                     help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
    sub.add_argument("--jobs", type=int, default=None,
                     help="worker processes (default: all cores)")
    sub.add_argument("--out", dest="outfile", required=True, help="output CSV path")
    sub.set_defaults(func=_cmd_errorprop)

    sub = commands.add_parser("keyspace", help="report permutation-key space size")
    sub.add_argument("--dim", type=int, required=True, help="side length M")
    sub.add_argument("--rate", type=float, default=1e9,
                     help="brute-force guesses per second (default %(default)s)")
    sub.set_defaults(func=_cmd_keyspace)

    sub = commands.add_parser("matrix", help="print the static diffusion matrix")
    sub.set_defaults(func=_cmd_matrix)

    sub = commands.add_parser("make-image", help="write a synthetic test PGM")
    sub.add_argument("--kind", choices=["all-zero", "single-lsb", "uniform-random", "portrait"],
                     required=True)
    sub.add_argument("--dim", type=int, required=True, help="side length M")
    sub.add_argument("--x", type=int, default=0, help="pixel row for single-lsb")
    sub.add_argument("--y", type=int, default=0, help="pixel column for single-lsb")
    sub.add_argument("--seed", type=int, default=0, help="seed for random kinds")
    sub.add_argument("--out", dest="outfile", required=True, help="output PGM path")
    sub.set_defaults(func=_cmd_make_image)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = _default_seed()
    if getattr(args, "jobs", None) is None and hasattr(args, "jobs"):
        args.jobs = _default_jobs()
    if getattr(args, "rounds", None) is not None and isinstance(args.rounds, int):
        if args.rounds < 1:
            print("error: --rounds must be >= 1", file=sys.stderr)
            return 2
    if getattr(args, "trials", None) is not None and args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
