"""Command-line entry point: ``pbhash <command> [options]``.

Exit codes: 0 success, 1 domain error or failed ``--check``, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import sys
from typing import Sequence

from . import __version__
from .core import PartitionScheme, partition_sketch
from .cws import cws_sketches
from .errors import ConfigurationError, InputFormatError, PbHashError
from .estimators import collision_rate, estimate_j_m, lemma_f, variance_j_m_theory, variance_ratio_rmb
from .featurizer import emit_dataset, pair_labels, read_labels
from .formats import read_binary_vectors, read_sketches, read_vectors, write_chunked, write_sketches
from .minhash import MinHashConfig, minhash_sketches
from .randomness import MIXER_ID, PRNG_ID
from .simulator import FilePair, SimConfig, SyntheticPair, check_report, run_trials

log = logging.getLogger("pbhash")

VECTOR_FORMAT_HELP = "vector file: one vector per line, 'D<TAB>idx:weight idx:weight ...' (0-based, increasing)"
SKETCH_FORMAT_HELP = "sketch file: optional '# scheme_id=...' header, then 'B<TAB>v_1 v_2 ... v_k' per vector"


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None


@contextlib.contextmanager
def _open_out(path: str):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="master seed (decimal u64)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pbhash", description="Split hash values into bit chunks and reuse every chunk.")
    p.add_argument("--version", action="version", version=version_string())
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hash", help="sketch vectors with MinHash or CWS")
    hs = h.add_subparsers(dest="family", required=True)
    for fam, desc in (("minhash", "binary vectors (positions of non-zeros)"), ("cws", "non-negative weighted vectors")):
        q = hs.add_parser(fam, parents=[common], help=f"{fam} sketches of {desc}",
                          epilog=f"{VECTOR_FORMAT_HELP}. Output {SKETCH_FORMAT_HELP}.")
        q.add_argument("--input", required=True)
        q.add_argument("--k", type=int, required=True, help="number of hashes")
        q.add_argument("--bits", type=int, required=True, help="bits B per hash value")
        q.add_argument("--output", default="-")
        q.set_defaults(func=cmd_hash)

    q = sub.add_parser("partition", parents=[common], help="split B-bit sketches into chunks",
                       epilog=f"Input {SKETCH_FORMAT_HELP}. Output: 'b_1,...,b_m<TAB>c_11,...,c_1m c_21,...' "
                              "per vector, least-significant chunk first.")
    q.add_argument("--sketches", required=True)
    q.add_argument("--scheme", required=True, help="chunk widths, e.g. 4,4")
    q.add_argument("--output", default="-")
    q.set_defaults(func=cmd_partition)

    q = sub.add_parser("estimate", parents=[common], help="estimate J from two sketch files, line by line",
                       epilog=f"{SKETCH_FORMAT_HELP}. Output TSV columns: index, j_hat[, var_theory].")
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--scheme", required=True)
    q.add_argument("--j-true", type=float, default=None, help="report theoretical variance at this J")
    q.add_argument("--output", default="-")
    q.set_defaults(func=cmd_estimate)

    t = sub.add_parser("theory", help="closed-form curves as CSV")
    ts = t.add_subparsers(dest="table", required=True)
    q = ts.add_parser("ratio-table", parents=[common], help="variance ratio R_mb over a J grid",
                      epilog="CSV columns: J, m, b, R_mb.")
    q.add_argument("--B", type=int, required=True)
    q.add_argument("--J-grid", type=parse_grid, default=parse_grid("0.01:0.99:0.01"))
    q.add_argument("--m-list", type=_int_list, required=True)
    q.add_argument("--output", default="-")
    q.set_defaults(func=cmd_ratio_table)

    q = ts.add_parser("lemma-curve", parents=[common], help="chunk covariance f(J) for widths b1, b2",
                      epilog="CSV columns: J, f.")
    q.add_argument("--b1", type=int, required=True)
    q.add_argument("--b2", type=int, required=True)
    q.add_argument("--J-grid", type=parse_grid, default=parse_grid("0:1:0.01"))
    q.add_argument("--output", default="-")
    q.set_defaults(func=cmd_lemma_curve)

    q = sub.add_parser("simulate", parents=[common], help="Monte Carlo bias/variance report",
                       epilog="The config file is flat TOML whose keys mirror the flag names "
                              "(e.g. trials = 10000, m-list = \"1,2,4\"); flags override it. "
                              "CSV columns: m, k, j_true, bias, var_emp, var_theory, rel_dev; "
                              "NA marks values undefined for a single trial. "
                              f"Pair files use the {VECTOR_FORMAT_HELP}.")
    q.add_argument("--config", default=None, help="TOML file with flag-named keys")
    q.add_argument("--family", choices=("minhash", "cws"), default=None)
    q.add_argument("--B", type=int, default=None)
    q.add_argument("--J", type=_float_list, default=None, help="target Jaccard(s) of the synthetic pair, e.g. 0.2,0.5")
    q.add_argument("--D", type=int, default=None, help="universe size of the synthetic pair")
    q.add_argument("--density", type=float, default=None, help="union size as a fraction of D")
    q.add_argument("--pair-file", default=None, help="use two vectors from this file instead")
    q.add_argument("--pair-ids", type=_int_list, default=None, help="0-based line ids, e.g. 0,1")
    q.add_argument("--k-grid", type=_int_list, default=None)
    q.add_argument("--m-list", type=_int_list, default=None)
    q.add_argument("--trials", type=int, default=None)
    q.add_argument("--check", action="store_true", default=None, help="exit 1 if any cell is out of tolerance")
    q.add_argument("--tol", type=float, default=None, help="relative variance tolerance for --check")
    q.add_argument("--output", default="-")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("featurize", parents=[common], help="one-hot expansion in sparse text format",
                       epilog=f"Input {SKETCH_FORMAT_HELP}. Labels: one per line. "
                              "Output: 'label idx:1 idx:1 ...' with 1-based ascending indices.")
    q.add_argument("--sketches", required=True)
    q.add_argument("--scheme", required=True)
    q.add_argument("--labels", default=None, help="label file; every label is 0 if omitted")
    q.add_argument("--output", required=True)
    q.set_defaults(func=cmd_featurize)
    return p


def version_string() -> str:
    return f"pbhash {__version__} (prng={PRNG_ID}, mixer={MIXER_ID})"


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def cmd_hash(args) -> int:
    if args.family == "minhash":
        vectors = read_binary_vectors(args.input)
        sizes = {v.universe_size for v in vectors}
        if len(sizes) > 1:
            raise InputFormatError(f"vectors use different universe sizes: {sorted(sizes)}")
        if not vectors:
            raise InputFormatError(f"{args.input} holds no vectors")
        cfg = MinHashConfig(sizes.pop(), args.k, _seed(args), args.bits)
        sketches = minhash_sketches(vectors, cfg)
    else:
        sketches = cws_sketches(read_vectors(args.input), args.k, args.bits, _seed(args))
    with _open_out(args.output) as fh:
        write_sketches(sketches, fh)
    return 0


def cmd_partition(args) -> int:
    scheme = PartitionScheme.parse(args.scheme)
    chunked = [partition_sketch(s, scheme) for s in read_sketches(args.sketches)]
    with _open_out(args.output) as fh:
        write_chunked(chunked, fh)
    return 0


def cmd_estimate(args) -> int:
    scheme = PartitionScheme.parse(args.scheme)
    a, b = read_sketches(args.a), read_sketches(args.b)
    if len(a) != len(b):
        raise InputFormatError(f"{args.a} has {len(a)} sketches but {args.b} has {len(b)}")
    with _open_out(args.output) as fh:
        fh.write("index\tj_hat" + ("\tvar_theory" if args.j_true is not None else "") + "\n")
        for n, (sa, sb) in enumerate(zip(a, b)):
            stats = collision_rate(partition_sketch(sa, scheme), partition_sketch(sb, scheme))
            line = f"{n}\t{estimate_j_m(stats)!r}"
            if args.j_true is not None:
                line += f"\t{variance_j_m_theory(args.j_true, scheme, stats.num_hashes)!r}"
            fh.write(line + "\n")
    return 0


def cmd_ratio_table(args) -> int:
    with _open_out(args.output) as fh:
        fh.write("J,m,b,R_mb\n")
        for m in args.m_list:
            if m < 1 or args.B % m:
                raise ConfigurationError(f"m={m} does not divide B={args.B}")
            b = args.B // m
            for J in args.J_grid:
                fh.write(f"{J!r},{m},{b},{variance_ratio_rmb(J, b, m)!r}\n")
    return 0


def cmd_lemma_curve(args) -> int:
    with _open_out(args.output) as fh:
        fh.write("J,f\n")
        for J in args.J_grid:
            fh.write(f"{J!r},{lemma_f(J, args.b1, args.b2)!r}\n")
    return 0


SIM_DEFAULTS = {
    "family": "minhash",
    "B": 16,
    "J": [0.5],
    "D": 40,
    "density": 0.5,
    "pair-file": None,
    "pair-ids": [0, 1],
    "k-grid": [10, 100, 1000],
    "m-list": [1, 2, 4, 8, 16],
    "trials": 10_000,
    "seed": 0,
    "check": False,
    "tol": 0.05,
}


def load_config(path: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    out = {}
    for key, value in raw.items():
        name = key.replace("_", "-")
        if name not in SIM_DEFAULTS:
            raise ConfigurationError(f"{path}: unknown key {key!r}")
        if name in ("k-grid", "m-list", "pair-ids") and isinstance(value, str):
            value = _int_list(value)
        elif name == "J":
            value = _float_list(value) if isinstance(value, str) else list(value) if isinstance(value, list) else [value]
        out[name] = value
    return out


def resolve_sim_options(args) -> dict:
    opts = dict(SIM_DEFAULTS)
    if args.config:
        opts.update(load_config(args.config))
    for name in SIM_DEFAULTS:
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            opts[name] = value
    return opts


def simulation_configs(o: dict) -> list[SimConfig]:
    """One config per target J (a file pair yields exactly one)."""
    common = dict(
        hash_family=o["family"],
        bits=int(o["B"]),
        k_grid=tuple(o["k-grid"]),
        m_list=tuple(o["m-list"]),
        trials=int(o["trials"]),
        master_seed=int(o["seed"]),
    )
    if o["pair-file"]:
        ids = tuple(o["pair-ids"])
        if len(ids) != 2:
            raise ConfigurationError(f"pair ids must name two vectors, got {ids}")
        return [SimConfig(pair_source=FilePair(o["pair-file"], ids), **common)]
    return [
        SimConfig(pair_source=SyntheticPair(float(J), int(o["D"]), float(o["density"])), **common)
        for J in o["J"]
    ]


def cmd_simulate(args) -> int:
    o = resolve_sim_options(args)
    configs = simulation_configs(o)
    reports = [run_trials(cfg) for cfg in configs]
    with _open_out(args.output) as fh:
        for n, report in enumerate(reports):
            report.to_csv(fh, header=(n == 0))
    if o["check"]:
        failures = []
        for report in reports:
            failures += [f"J={report.j_true!r} {msg}" for msg in check_report(report, rel_tol=float(o["tol"]))]
        for msg in failures:
            print(f"check failed: {msg}", file=sys.stderr)
        return 1 if failures else 0
    return 0


def cmd_featurize(args) -> int:
    scheme = PartitionScheme.parse(args.scheme)
    chunked = [partition_sketch(s, scheme) for s in read_sketches(args.sketches)]
    labels = pair_labels(read_labels(args.labels) if args.labels else None, len(chunked))
    emit_dataset(zip(labels, chunked), args.output)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except PbHashError as exc:
        print(f"pbhash: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"pbhash: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
