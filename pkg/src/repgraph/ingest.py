"""Reading and writing account/tweet dumps, user-graph construction and
graph export.

Both dump formats are JSON Lines. Parsing is all-or-nothing per line: a bad
line is reported with its line number and skipped, the rest of the file is
still read. Floats are written with ``repr`` precision so a parse/serialize
round trip is bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Any, Iterable, Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

from .errors import (
    DuplicateId,
    FeatureOutOfRange,
    MalformedLine,
    UnsupportedFormat,
    ValidationError,
)
from .features import FEATURE_NAMES, AccountFeatures
from .graph import NODE_SCORE_FIELDS, DirectedGraph, NodeScore
from .reputation import Neighborhood, ScoredAccount
from .timeline import TweetKind, TweetNode

logger = logging.getLogger(__name__)

_ACCOUNT_KEYS = {"id", "handle", "features", "friends", "followers", "verified"}
_TWEET_KEYS = {"tweet_id", "author_id", "parent_id", "created_at", "kind"}

SCORE_COLUMNS = (
    "id", "handle", "a_u", "a_s", "a_c", "a_t", "a_b",
    "R_A", "R_P_out", "R_P_in", "R_P", "R", "bot_tag", "reputation_tag",
)

EXPORT_FORMATS = ("dot", "graphml", "edge-csv")


@dataclass(frozen=True)
class AccountRecord:
    id: str
    handle: str
    features: AccountFeatures
    friends: tuple[str, ...] = ()
    followers: tuple[str, ...] = ()
    verified: bool = False


@dataclass
class ParseResult:
    """Records that parsed, per-line errors, and counters for ignored input."""

    records: list = field(default_factory=list)
    errors: list[ValidationError] = field(default_factory=list)
    warnings: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.errors


def _as_id(value: Any, what: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise MalformedLine(f"{what} must be a string, got {value!r}")
    value = str(value)
    if not value:
        raise MalformedLine(f"{what} must not be empty")
    return value


def _id_list(value: Any, what: str, owner: str, warnings: Counter) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise MalformedLine(f"{what} must be a list")
    ids = []
    seen = set()
    for item in value:
        item = _as_id(item, what)
        if item == owner:
            warnings["self_reference"] += 1
            continue
        if item in seen:
            warnings["duplicate_neighbor"] += 1
            continue
        seen.add(item)
        ids.append(item)
    return tuple(ids)


def _features(raw: Any, warnings: Counter) -> AccountFeatures:
    if not isinstance(raw, dict):
        raise MalformedLine("'features' must be an object")
    for key in raw.keys() - set(FEATURE_NAMES):
        warnings[f"unknown_feature_key:{key}"] += 1
    values = {}
    for name in FEATURE_NAMES:
        if name not in raw:
            raise MalformedLine(f"missing feature {name!r}")
        values[name] = raw[name]
    return AccountFeatures(**values)


def parse_account_line(obj: Any, warnings: Counter) -> AccountRecord:
    if not isinstance(obj, dict):
        raise MalformedLine("record must be a JSON object")
    for key in obj.keys() - _ACCOUNT_KEYS:
        warnings[f"unknown_key:{key}"] += 1
    if "id" not in obj:
        raise MalformedLine("missing 'id'")
    if "features" not in obj:
        raise MalformedLine("missing 'features'")
    acc_id = _as_id(obj["id"], "id")
    handle = obj.get("handle", acc_id)
    if not isinstance(handle, str):
        raise MalformedLine("'handle' must be a string")
    verified = obj.get("verified", False)
    if not isinstance(verified, bool):
        raise MalformedLine("'verified' must be a boolean")
    return AccountRecord(
        id=acc_id,
        handle=handle,
        features=_features(obj["features"], warnings),
        friends=_id_list(obj.get("friends"), "friends", acc_id, warnings),
        followers=_id_list(obj.get("followers"), "followers", acc_id, warnings),
        verified=verified,
    )


def _parse_lines(stream: IO[str], parse_one, id_of, source: str | None) -> ParseResult:
    result = ParseResult()
    seen: set = set()
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"invalid JSON: {exc.msg}") from None
            record = parse_one(obj, result.warnings)
            key = id_of(record)
            if key in seen:
                raise DuplicateId(f"duplicate id {key!r}")
        except ValidationError as exc:
            exc.file = source
            exc.line = line_no
            result.errors.append(exc)
            continue
        seen.add(key)
        result.records.append(record)
    if result.warnings:
        logger.warning("%s: ignored input %s", source or "<stream>", dict(result.warnings))
    return result


def parse_accounts(stream: IO[str], source: str | None = None) -> ParseResult:
    """Parse an account (or feature-only) JSON Lines dump."""
    return _parse_lines(stream, parse_account_line, lambda r: r.id, source)


def account_to_dict(record: AccountRecord) -> dict[str, Any]:
    return {
        "id": record.id,
        "handle": record.handle,
        "verified": record.verified,
        "features": record.features.as_dict(),
        "friends": list(record.friends),
        "followers": list(record.followers),
    }


def serialize_accounts(records: Iterable[AccountRecord], stream: IO[str]) -> None:
    for record in records:
        stream.write(json.dumps(account_to_dict(record), ensure_ascii=False) + "\n")


def features_from_botometer(
    payload: Mapping[str, Any],
    *,
    invert_bot_score: bool = True,
    language: str = "universal",
) -> AccountFeatures:
    """Map a Botometer-style response onto the five features.

    Reads ``categories.{user,sentiment,content,temporal}`` and
    ``scores.<language>`` as the bot score. Botometer reports bot *likelihood*,
    so by default the bot score is flipped (``1 - x``) to the convention where
    low values mean automation.
    """
    try:
        cats = payload["categories"]
        raw_bot = payload["scores"][language]
        values = {name: cats[name] for name in ("user", "sentiment", "content", "temporal")}
    except (KeyError, TypeError) as exc:
        raise MalformedLine(f"not a Botometer-style payload: missing {exc}") from None
    if not isinstance(raw_bot, (int, float)) or not (0.0 <= raw_bot <= 1.0):
        raise FeatureOutOfRange("bot", raw_bot)
    values["bot"] = 1.0 - raw_bot if invert_bot_score else raw_bot
    return AccountFeatures(**values)


# -- tweets ----------------------------------------------------------------------------


def parse_timestamp(text: str) -> datetime:
    if not isinstance(text, str):
        raise MalformedLine(f"created_at must be an ISO-8601 string, got {text!r}")
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError:
        raise MalformedLine(f"invalid timestamp {text!r}") from None
    if ts.tzinfo is None:
        # naive timestamps in the dump are UTC by contract
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_tweet_line(obj: Any, warnings: Counter) -> TweetNode:
    if not isinstance(obj, dict):
        raise MalformedLine("record must be a JSON object")
    for key in obj.keys() - _TWEET_KEYS:
        warnings[f"unknown_key:{key}"] += 1
    for key in ("tweet_id", "author_id", "created_at", "kind"):
        if key not in obj:
            raise MalformedLine(f"missing {key!r}")
    try:
        kind = TweetKind(obj["kind"])
    except ValueError:
        raise MalformedLine(f"kind must be 'original' or 'retweet', got {obj['kind']!r}") from None
    parent = obj.get("parent_id")
    return TweetNode(
        tweet_id=_as_id(obj["tweet_id"], "tweet_id"),
        author_id=_as_id(obj["author_id"], "author_id"),
        parent_id=None if parent is None else _as_id(parent, "parent_id"),
        created_at=parse_timestamp(obj["created_at"]),
        kind=kind,
    )


def parse_tweets(stream: IO[str], source: str | None = None) -> ParseResult:
    return _parse_lines(stream, parse_tweet_line, lambda r: r.tweet_id, source)


def tweet_to_dict(node: TweetNode) -> dict[str, Any]:
    return {
        "tweet_id": node.tweet_id,
        "author_id": node.author_id,
        "parent_id": node.parent_id,
        "created_at": format_timestamp(node.created_at),
        "kind": node.kind.value,
    }


def serialize_tweets(nodes: Iterable[TweetNode], stream: IO[str]) -> None:
    for node in nodes:
        stream.write(json.dumps(tweet_to_dict(node), ensure_ascii=False) + "\n")


# -- user graph ------------------------------------------------------------------------


def user_graph_edges(records: Iterable[AccountRecord]) -> set[tuple[str, str]]:
    """Friend -> follower edges: ``u -> v`` for each friend ``u`` of ``v`` and
    ``v -> w`` for each follower ``w`` of ``v``."""
    edges = set()
    for rec in records:
        for u in rec.friends:
            if u != rec.id:
                edges.add((u, rec.id))
        for w in rec.followers:
            if w != rec.id:
                edges.add((rec.id, w))
    return edges


def build_user_graph(records: Sequence[AccountRecord]) -> DirectedGraph:
    """Account graph over every id mentioned, with friend -> follower edges.

    Ids that only appear as neighbours become feature-less boundary vertices;
    see :func:`boundary_vertices`.
    """
    g = DirectedGraph((r.id for r in records), user_graph_edges(records))
    n_boundary = len(boundary_vertices(records, g))
    if n_boundary:
        logger.info("user graph has %d boundary vertices without account records", n_boundary)
    return g


def boundary_vertices(records: Iterable[AccountRecord], g: DirectedGraph) -> list[str]:
    known = {r.id for r in records}
    return [v for v in g.vertices if v not in known]


def neighborhoods_from_records(records: Sequence[AccountRecord]) -> dict[str, Neighborhood]:
    """Friends/followers per account as implied by the whole dump.

    A relation stated on either side (``a`` lists ``b`` as friend, or ``b``
    lists ``a`` as follower) counts once.
    """
    friends: dict[str, set[str]] = {}
    followers: dict[str, set[str]] = {}
    for u, v in user_graph_edges(records):
        friends.setdefault(v, set()).add(u)
        followers.setdefault(u, set()).add(v)
    ids = {r.id for r in records}
    return {
        v: Neighborhood(frozenset(friends.get(v, ())), frozenset(followers.get(v, ())))
        for v in sorted(ids)
    }


# -- export ------------------------------------------------------------------------------


def _dot_id(v: Any) -> str:
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _export_dot(g: DirectedGraph, scores: Mapping[Any, NodeScore] | None) -> str:
    lines = ["digraph G {"]
    for v in g.vertices:
        if scores and v in scores:
            attrs = ", ".join(f"{k}={getattr(scores[v], k)!r}" for k in NODE_SCORE_FIELDS)
            lines.append(f"  {_dot_id(v)} [{attrs}];")
        else:
            lines.append(f"  {_dot_id(v)};")
    for u, v in g.edges():
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_GRAPHML_TYPES = {
    "in_degree": "int", "out_degree": "int", "degree": "int",
    "closeness": "double", "betweenness": "double", "pagerank": "double",
}


def _export_graphml(g: DirectedGraph, scores: Mapping[Any, NodeScore] | None) -> str:
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
    ]
    if scores:
        for name in NODE_SCORE_FIELDS:
            out.append(
                f'  <key id="{name}" for="node" attr.name="{name}" attr.type="{_GRAPHML_TYPES[name]}"/>'
            )
    out.append('  <graph id="G" edgedefault="directed">')
    for v in g.vertices:
        if scores and v in scores:
            out.append(f"    <node id={quoteattr(str(v))}>")
            for name in NODE_SCORE_FIELDS:
                out.append(f'      <data key="{name}">{escape(repr(getattr(scores[v], name)))}</data>')
            out.append("    </node>")
        else:
            out.append(f"    <node id={quoteattr(str(v))}/>")
    for u, v in g.edges():
        out.append(f"    <edge source={quoteattr(str(u))} target={quoteattr(str(v))}/>")
    out.append("  </graph>")
    out.append("</graphml>")
    return "\n".join(out) + "\n"


def _export_edge_csv(g: DirectedGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target"])
    writer.writerows(g.edges())
    return buf.getvalue()


def export_graph(
    g: DirectedGraph,
    fmt: str,
    scores: Mapping[Any, NodeScore] | None = None,
) -> bytes:
    """Serialize ``g`` as DOT, GraphML or an edge-list CSV (UTF-8 bytes).

    Vertices and edges are written in sorted order, so output is deterministic.
    Node scores, when given, become node attributes (ignored by ``edge-csv``).
    """
    if fmt == "dot":
        text = _export_dot(g, scores)
    elif fmt == "graphml":
        text = _export_graphml(g, scores)
    elif fmt == "edge-csv":
        text = _export_edge_csv(g)
    else:
        raise UnsupportedFormat(f"unsupported export format {fmt!r}; choose from {', '.join(EXPORT_FORMATS)}")
    return text.encode("utf-8")


def read_edge_csv(stream: IO[str]) -> DirectedGraph:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["source", "target"]:
        raise MalformedLine(f"edge CSV must start with 'source,target', got {header!r}", line=1)
    return DirectedGraph((), ((row[0], row[1]) for row in reader if row))


# -- score tables ------------------------------------------------------------------------


def _fmt(value: float, decimals: int | None) -> str:
    return repr(value) if decimals is None else f"{value:.{decimals}f}"


def score_row(s: ScoredAccount, decimals: int | None = None) -> dict[str, Any]:
    f, r = s.features, s.reputation
    numbers = (
        f.user, f.sentiment, f.content, f.temporal, f.bot,
        r.r_active, r.r_passive_out, r.r_passive_in, r.r_passive, r.r_total,
    )
    row: dict[str, Any] = {"id": s.id, "handle": s.handle}
    for name, value in zip(SCORE_COLUMNS[2:12], numbers):
        row[name] = value if decimals is None else round(value, decimals)
    row["bot_tag"] = s.bot_tag.label
    row["reputation_tag"] = s.reputation_tag.label
    return row


def write_scores_csv(scored: Iterable[ScoredAccount], stream: IO[str], decimals: int | None = None) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SCORE_COLUMNS)
    for s in scored:
        row = score_row(s)
        writer.writerow(
            [_fmt(row[c], decimals) if isinstance(row[c], float) else row[c] for c in SCORE_COLUMNS]
        )


def write_scores_jsonl(scored: Iterable[ScoredAccount], stream: IO[str], decimals: int | None = None) -> None:
    for s in scored:
        stream.write(json.dumps(score_row(s, decimals), ensure_ascii=False) + "\n")


def write_node_scores_csv(scores: Mapping[Any, NodeScore], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("id",) + NODE_SCORE_FIELDS)
    for v, s in scores.items():
        writer.writerow([v] + [repr(getattr(s, k)) for k in NODE_SCORE_FIELDS])
