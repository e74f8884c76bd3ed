"""Command-line front end.

Exit status: 0 on success, 1 on invalid input or arguments, 2 on internal
errors. Diagnostics are single ``code=.. file=.. line=.. msg=..`` lines on
stderr, preceded by a reproducibility header. Data files never contain
timestamps or run metadata, so identical invocations give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import IO, Sequence

from . import __version__
from .config import (
    DEFAULT_ALPHA,
    DEFAULT_GAMMA,
    DEFAULT_MAX_ITER,
    DEFAULT_OMEGA_IN,
    DEFAULT_OMEGA_OUT,
    DEFAULT_TOL,
    ScoringConfig,
)
from .errors import InvalidConfig, ReputationError, ValidationError
from .features import FEATURE_NAMES, classify_bot, feature_correlations
from .graph import NODE_SCORE_FIELDS, all_node_scores, diagonal
from .ingest import (
    EXPORT_FORMATS,
    ParseResult,
    build_user_graph,
    export_graph,
    neighborhoods_from_records,
    parse_accounts,
    parse_tweets,
    write_node_scores_csv,
    write_scores_csv,
    write_scores_jsonl,
)
from .reputation import active_reputation, classify_reputation, score_population
from .synthetic import SyntheticSpec, generate_synthetic, write_dataset
from .timeline import DEFAULT_UTC_OFFSET, GapBaseline, build_tree, format_offset, parse_utc_offset, timeline_report

logger = logging.getLogger("repgraph")

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2
CLI_WEIGHT_TOL = 1e-9


class UsageError(ValidationError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # unknown flags are validation errors (exit 1)
        raise UsageError(message)


# -- helpers ------------------------------------------------------------------------------


def _load(path: str, parser, lenient: bool) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        result = parser(fh, source=path)
    if result.errors:
        for err in result.errors:
            print(err.diagnostic(), file=sys.stderr)
        if not lenient:
            raise ValidationError(f"{len(result.errors)} invalid line(s)", file=path)
    return result


def _config(args: argparse.Namespace) -> ScoringConfig:
    omega_in, omega_out = args.omega_in, args.omega_out
    if omega_in is None and omega_out is None:
        omega_in, omega_out = DEFAULT_OMEGA_IN, DEFAULT_OMEGA_OUT
    elif omega_out is None:
        omega_out = 1.0 - omega_in
    elif omega_in is None:
        omega_in = 1.0 - omega_out
    if abs(omega_in + omega_out - 1.0) > CLI_WEIGHT_TOL:
        raise InvalidConfig(f"--omega-in {omega_in} and --omega-out {omega_out} must sum to 1")
    # snap so the config-level 1e-12 check holds for any pair accepted here
    omega_out = 1.0 - omega_in
    return ScoringConfig(omega_in, omega_out, args.gamma, args.alpha, args.tol, args.max_iter)


def _open_out(args: argparse.Namespace) -> IO[str]:
    if getattr(args, "output", None):
        return open(args.output, "w", encoding="utf-8", newline="\n")
    return io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="\n", write_through=True)


def _emit(args: argparse.Namespace, write) -> None:
    out = _open_out(args)
    try:
        write(out)
        out.flush()
    finally:
        if getattr(args, "output", None):
            out.close()
        else:
            out.detach()


def _dump_json(obj, out: IO[str]) -> None:
    json.dump(obj, out, indent=1, sort_keys=False, ensure_ascii=False)
    out.write("\n")


def _header(args: argparse.Namespace, config: ScoringConfig | None) -> None:
    parts = [f"# repgraph {__version__}", f"command={args.command}"]
    if config is not None:
        parts.append("config=" + json.dumps(config.as_dict(), sort_keys=True))
    parts.append(f"seed={getattr(args, 'seed', None)}")
    if hasattr(args, "threads"):
        parts.append(f"threads={args.threads}")
    print(" ".join(parts), file=sys.stderr)


# -- subcommands --------------------------------------------------------------------------


def cmd_score(args: argparse.Namespace, config: ScoringConfig) -> None:
    records = _load(args.accounts, parse_accounts, args.lenient).records
    scored = score_population(
        {r.id: r.features for r in records},
        neighborhoods_from_records(records),
        config,
        handles={r.id: r.handle for r in records},
        threads=args.threads,
    )
    writer = write_scores_csv if args.format == "csv" else write_scores_jsonl
    _emit(args, lambda out: writer(scored, out, args.decimals))


def cmd_graph(args: argparse.Namespace, config: ScoringConfig) -> None:
    records = _load(args.accounts, parse_accounts, args.lenient).records
    g = build_user_graph(records)
    scores = all_node_scores(g, config, workers=args.threads)
    if args.format == "csv":
        _emit(args, lambda out: write_node_scores_csv(scores, out))
    else:
        doc = {
            "vertices": g.n,
            "edges": g.edge_count,
            "diagonal": diagonal(g) if g.n else None,
            "nodes": [{"id": v, **{k: getattr(s, k) for k in NODE_SCORE_FIELDS}} for v, s in scores.items()],
        }
        _emit(args, lambda out: _dump_json(doc, out))


def cmd_timeline(args: argparse.Namespace, config: ScoringConfig) -> None:
    tweets = _load(args.tweets, parse_tweets, args.lenient).records
    features_of = {}
    if args.accounts:
        features_of = {r.id: r.features for r in _load(args.accounts, parse_accounts, args.lenient).records}
    tree = build_tree(tweets)
    try:
        offset = parse_utc_offset(args.utc_offset)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = timeline_report(
        tree,
        features_of,
        utc_offset=offset,
        baseline=GapBaseline(args.gap_baseline),
        per_tweet=args.per_tweet,
        centralities=args.centralities,
        config=config,
    )
    if args.hourly_csv:
        with open(args.hourly_csv, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["hour", "tweets"])
            w.writerows(enumerate(report.hourly_histogram))
    _emit(args, lambda out: _dump_json(report.as_dict(), out))


def cmd_classify(args: argparse.Namespace, config: ScoringConfig) -> None:
    records = _load(args.accounts, parse_accounts, args.lenient).records
    rows = []
    for r in sorted(records, key=lambda r: r.id):
        r_a = active_reputation(r.features)
        rows.append({
            "id": r.id,
            "handle": r.handle,
            "a_b": r.features.bot,
            "bot_tag": classify_bot(r.features).label,
            "R_A": r_a,
            "reputation_tag": classify_reputation(r_a).label,
        })

    def write(out: IO[str]) -> None:
        if args.format == "json":
            for row in rows:
                out.write(json.dumps(row, ensure_ascii=False) + "\n")
            return
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["id", "handle", "a_b", "bot_tag", "R_A", "reputation_tag"])
        for row in rows:
            w.writerow([row["id"], row["handle"], repr(row["a_b"]), row["bot_tag"], repr(row["R_A"]), row["reputation_tag"]])

    _emit(args, write)


def cmd_correlate(args: argparse.Namespace, config: ScoringConfig) -> None:
    records = _load(args.accounts, parse_accounts, args.lenient).records
    corr = feature_correlations(r.features for r in records)

    def write(out: IO[str]) -> None:
        if args.format == "json":
            _dump_json({"size": corr.size, "degenerate": list(corr.degenerate), "rows": corr.rows()}, out)
            return
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["feature", *FEATURE_NAMES])
        for row in corr.rows():
            w.writerow([row["feature"], *("" if row[k] is None else repr(row[k]) for k in FEATURE_NAMES)])

    _emit(args, write)


def cmd_gen(args: argparse.Namespace, config: ScoringConfig) -> None:
    spec = SyntheticSpec(
        n_accounts=args.n_accounts,
        bot_fraction=args.bot_fraction,
        edge_probability=args.edge_probability,
        bot_clique=args.bot_clique,
        seed=args.seed,
        non_reputed_fraction=args.non_reputed_fraction,
        n_tweets=args.n_tweets,
        bot_retweet_rate=args.bot_retweet_rate,
        other_retweet_rate=args.other_retweet_rate,
        orphan_tweets=args.orphan_tweets,
        days=args.days,
    )
    paths = write_dataset(generate_synthetic(spec), args.out_dir)
    for name, path in paths.items():
        print(f"# wrote {name}: {path}", file=sys.stderr)


def cmd_export(args: argparse.Namespace, config: ScoringConfig) -> None:
    if bool(args.accounts) == bool(args.tweets):
        raise UsageError("export needs exactly one of --accounts or --tweets")
    if args.accounts:
        g = build_user_graph(_load(args.accounts, parse_accounts, args.lenient).records)
    else:
        g = build_tree(_load(args.tweets, parse_tweets, args.lenient).records).to_graph()
    scores = all_node_scores(g, config, workers=args.threads) if args.with_scores else None
    data = export_graph(g, args.format, scores)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


# -- parser ---------------------------------------------------------------------------------


def _scoring_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scoring")
    g.add_argument("--omega-in", type=float, default=None, help=f"friends net weight (default {DEFAULT_OMEGA_IN})")
    g.add_argument("--omega-out", type=float, default=None, help=f"followers net weight (default {DEFAULT_OMEGA_OUT})")
    g.add_argument("--gamma", type=float, default=DEFAULT_GAMMA, help="active vs passive blend (default %(default)s)")
    g.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="PageRank damping (default %(default)s)")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL, help="PageRank L1 tolerance (default %(default)s)")
    g.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="PageRank iteration cap (default %(default)s)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; output does not depend on it")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--lenient", action="store_true", help="skip invalid input lines instead of failing")
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="repgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"repgraph {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="active/passive/total reputation per account")
    p.add_argument("--accounts", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--decimals", type=int, default=None, help="round values for presentation")
    _scoring_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("graph", help="node scores of the user graph")
    p.add_argument("--accounts", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _scoring_flags(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("timeline", help="tweet-tree forensics report")
    p.add_argument("--tweets", required=True)
    p.add_argument("--accounts", help="account/feature dump for bot and reputation shares")
    p.add_argument("--utc-offset", default=format_offset(DEFAULT_UTC_OFFSET), help="local clock for the hourly histogram (default %(default)s)")
    p.add_argument("--gap-baseline", choices=[b.value for b in GapBaseline], default=GapBaseline.OTHERS.value)
    p.add_argument("--per-tweet", action="store_true", help="fractions over tweets instead of distinct authors")
    p.add_argument("--centralities", action="store_true", help="include node scores over the tweet graph")
    p.add_argument("--hourly-csv", help="also write the hourly histogram as CSV")
    p.add_argument("--format", choices=("json",), default="json")
    _scoring_flags(p)
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("classify", help="bot and reputation tags per account")
    p.add_argument("--accounts", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _scoring_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("correlate", help="feature correlation matrix")
    p.add_argument("--accounts", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _scoring_flags(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("gen", help="synthetic dataset with ground-truth ledger")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-accounts", type=int, default=1000)
    p.add_argument("--bot-fraction", type=float, default=0.1)
    p.add_argument("--non-reputed-fraction", type=float, default=None)
    p.add_argument("--edge-probability", type=float, default=0.01)
    p.add_argument("--bot-clique", action="store_true")
    p.add_argument("--n-tweets", type=int, default=None)
    p.add_argument("--bot-retweet-rate", type=float, default=0.6)
    p.add_argument("--other-retweet-rate", type=float, default=0.5)
    p.add_argument("--orphan-tweets", type=int, default=0)
    p.add_argument("--days", type=int, default=30)
    p.set_defaults(func=cmd_gen, no_config=True)

    p = sub.add_parser("export", help="serialize the user graph or tweet graph")
    p.add_argument("--accounts")
    p.add_argument("--tweets")
    p.add_argument("--format", choices=EXPORT_FORMATS, default="dot")
    p.add_argument("--with-scores", action="store_true", help="attach node scores (dot/graphml)")
    _scoring_flags(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = None if getattr(args, "no_config", False) else _config(args)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        _header(args, config)
        args.func(args, config)
    except ValidationError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return EXIT_INVALID
    except ReputationError as exc:
        print(f"code={exc.code} msg={exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"code=io file={exc.filename} msg={exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        print(f"code=internal msg={type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
