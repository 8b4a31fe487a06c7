"""Batch driver: corpus generation, training, ranking, and benchmarks.

Exit codes: 0 success, 2 input validation, 3 unknown graph reference,
4 state errors (for example ranking from an untrained snapshot).
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .graph_model import (
    Corpus,
    CorpusFormatError,
    CorpusValidationError,
    GraphNotFoundError,
    canonical_corpus_id,
    load_corpus,
    save_corpus,
)
from .learner import ModelStateError
from .matcher import (
    BRUTE_FORCE_VERTEX_LIMIT,
    MatchConfig,
    brute_force_match,
    match,
)
from .distances import N_ATTRIBUTES
from .session import (
    apply_feedback,
    new_session_state,
    restore_snapshot,
    snapshot_bytes,
)
from .synth import AttributeCenters, ClassSpec, generate_corpus

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REFERENCE = 3
EXIT_STATE = 4


class CliInputError(ValueError):
    """Bad file contents or flag values; maps to exit code 2."""


def _read_corpus(path: str) -> Corpus:
    try:
        return load_corpus(Path(path).read_bytes())
    except FileNotFoundError:
        raise CliInputError(f"corpus file not found: {path}") from None
    except (CorpusFormatError, CorpusValidationError) as exc:
        raise CliInputError(f"bad corpus {path}: {exc}") from None


def _parse_class_spec(payload: dict, index: int) -> ClassSpec:
    try:
        centers = payload["centers"]
        return ClassSpec(
            class_label=payload["class_label"],
            count=int(payload["count"]),
            layers=int(payload["layers"]),
            vertices_per_layer=(int(payload["vertices_per_layer"][0]),
                                int(payload["vertices_per_layer"][1])),
            centers=AttributeCenters(
                pixel_weight=float(centers["pixel_weight"]),
                gaussian_mean=float(centers["gaussian_mean"]),
                divergence=float(centers["divergence"]),
                time_delay=float(centers["time_delay"]),
                pixel_flow=float(centers["pixel_flow"]),
                gaussian_evolution=float(centers["gaussian_evolution"]),
                mutual_information=float(centers["mutual_information"]),
            ),
            within_class_spread=float(payload.get("within_class_spread", 0.0)),
            split_merge_rate=float(payload.get("split_merge_rate", 0.0)),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CliInputError(f"classes[{index}]: {exc}") from None


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        payload = json.loads(Path(args.spec).read_text())
    except FileNotFoundError:
        raise CliInputError(f"spec file not found: {args.spec}") from None
    except json.JSONDecodeError as exc:
        raise CliInputError(f"spec is not valid JSON: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise CliInputError("spec must be a JSON object")
    try:
        feature_dimension = int(payload["feature_dimension"])
        raw_classes = payload["classes"]
    except KeyError as exc:
        raise CliInputError(f"spec missing key {exc}") from None
    if not isinstance(raw_classes, list):
        raise CliInputError("classes must be a list")
    specs = [_parse_class_spec(c, i) for i, c in enumerate(raw_classes)]

    try:
        corpus, ground_truth = generate_corpus(specs, feature_dimension, args.seed)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None

    # Build all bytes before touching the filesystem; a bad spec never
    # leaves partial files behind.
    corpus_bytes = save_corpus(corpus)
    truth_bytes = (json.dumps(ground_truth, sort_keys=True, indent=2) + "\n").encode()
    out = Path(args.out)
    truth_path = out.with_name(out.stem + ".truth.json")
    out.write_bytes(corpus_bytes)
    truth_path.write_bytes(truth_bytes)

    print(f"wrote {out} ({len(corpus)} graphs, d={corpus.feature_dimension}, "
          f"id {canonical_corpus_id(corpus)})")
    print(f"wrote {truth_path}")
    return EXIT_OK


def _read_feedback(path: str) -> list[tuple[str, str]]:
    try:
        lines = Path(path).read_text().splitlines()
    except FileNotFoundError:
        raise CliInputError(f"feedback file not found: {path}") from None
    feedback = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [part.strip() for part in line.split(",")]
        if len(parts) != 2 or parts[1] not in ("positive", "negative"):
            raise CliInputError(
                f"{path}:{lineno}: expected 'graph_id,positive|negative', got {raw!r}")
        feedback.append((parts[0], parts[1]))
    return feedback


def cmd_train(args: argparse.Namespace) -> int:
    corpus = _read_corpus(args.corpus)
    feedback = _read_feedback(args.feedback)
    state = new_session_state(
        corpus_id=canonical_corpus_id(corpus),
        r=args.r,
        beam_width=args.beam,
        deletion_penalty=args.deletion_penalty,
        threshold=args.threshold,
    )
    for graph_id, label in feedback:
        state = apply_feedback(state, corpus, graph_id, label)

    Path(args.out).write_bytes(snapshot_bytes(state))
    status = "ready" if state.trained else "untrained"
    print(f"wrote {args.out} (revision {state.revision}, {status}, "
          f"pos ref {state.positive.reference_graph_id}, "
          f"neg ref {state.negative.reference_graph_id})")
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    corpus = _read_corpus(args.corpus)
    try:
        raw = Path(args.snapshot).read_bytes()
    except FileNotFoundError:
        raise CliInputError(f"snapshot file not found: {args.snapshot}") from None

    expected_id = canonical_corpus_id(corpus)

    def lookup(corpus_id: str) -> Corpus:
        if corpus_id != expected_id:
            raise CliInputError(
                f"snapshot was trained on corpus {corpus_id}, got {expected_id}")
        return corpus

    state = restore_snapshot(raw, lookup)
    if state.ranking is None:
        raise ModelStateError("snapshot is untrained; nothing to rank")

    ranking = state.ranking
    if args.out:
        Path(args.out).write_bytes(ranking.to_json_bytes())
        print(f"wrote {args.out}")
    shown = ranking.records[:args.top_k] if args.top_k >= 0 else ranking.records
    print(f"{'graph_id':<24} {'posterior':>10} {'labeled':>8}")
    for record in shown:
        print(f"{record.graph_id:<24} {record.posterior:>10.6f} "
              f"{'yes' if record.labeled else 'no':>8}")
    return EXIT_OK


def _parse_mode(mode: str) -> MatchConfig:
    if mode == "exact":
        return MatchConfig(beam_width=0)
    if mode.startswith("beam:"):
        try:
            width = int(mode.split(":", 1)[1])
        except ValueError:
            raise CliInputError(f"bad beam width in mode {mode!r}") from None
        if width < 1:
            raise CliInputError("beam width must be >= 1")
        return MatchConfig(beam_width=width)
    raise CliInputError(f"mode must be 'exact' or 'beam:<b>', got {mode!r}")


def _percentiles(values: list[float]) -> dict[str, float]:
    ordered = sorted(values)
    return {
        "p50": float(np.percentile(ordered, 50)),
        "p90": float(np.percentile(ordered, 90)),
        "max": ordered[-1],
    }


def cmd_bench(args: argparse.Namespace) -> int:
    corpus = _read_corpus(args.corpus)
    config = _parse_mode(args.mode)
    if args.phi:
        try:
            phi = np.asarray([float(x) for x in args.phi.split(",")], dtype=np.float64)
        except ValueError:
            raise CliInputError("--phi must be comma-separated numbers") from None
        if phi.size != N_ATTRIBUTES:
            raise CliInputError(f"--phi needs {N_ATTRIBUTES} entries")
    else:
        phi = np.full(N_ATTRIBUTES, 0.5)
    scales = np.ones(N_ATTRIBUTES)

    graphs = list(corpus.graphs.values())
    pairs = [(a, b) for i, a in enumerate(graphs) for b in graphs[i + 1:]]
    per_pair = []
    times_ms: list[float] = []
    gaps: list[float] = []
    for g1, g2 in pairs:
        elapsed = []
        result = None
        for _ in range(max(args.repetitions, 1)):
            start = time.perf_counter()
            result = match(g1, g2, phi, scales, config)
            elapsed.append((time.perf_counter() - start) * 1000.0)
        assert result is not None
        times_ms.append(statistics.median(elapsed))
        entry = {"pair": [g1.id, g2.id], "cost": result.total_cost,
                 "exact": result.exact}
        if len(g1.vertices) + len(g2.vertices) <= BRUTE_FORCE_VERTEX_LIMIT:
            oracle = brute_force_match(g1, g2, phi, scales, config)
            gap = result.total_cost - oracle.total_cost
            entry["gap"] = gap
            gaps.append(gap)
        per_pair.append(entry)

    report = {
        "mode": args.mode,
        "pairs": len(pairs),
        "costs": [entry["cost"] for entry in per_pair],
        "gap_max": max(gaps) if gaps else None,
        "gaps_measured": len(gaps),
        "time_ms": _percentiles(times_ms) if times_ms else {},
        "per_pair": per_pair,
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    print(f"mode={args.mode} pairs={len(pairs)} "
          f"median_time_ms={report['time_ms'].get('p50', float('nan')):.3f} "
          f"gap_max={report['gap_max']}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsem",
        description="Relevance-feedback retrieval over attributed temporal graph patterns")
    sub = parser.add_subparsers(dest="command", required=True)

    p_generate = sub.add_parser("generate", help="generate a synthetic corpus")
    p_generate.add_argument("--spec", required=True, help="class spec JSON file")
    p_generate.add_argument("--seed", type=int, default=0)
    p_generate.add_argument("--out", required=True, help="corpus output path")
    p_generate.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="replay a feedback file into a snapshot")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--feedback", required=True,
                         help="one 'graph_id,label' per line, in order")
    p_train.add_argument("--out", required=True, help="snapshot output path")
    p_train.add_argument("--r", type=int, default=1000)
    p_train.add_argument("--beam", type=int, default=0)
    p_train.add_argument("--threshold", type=float, default=0.5)
    p_train.add_argument("--deletion-penalty", type=float, default=1.0)
    p_train.set_defaults(func=cmd_train)

    p_rank = sub.add_parser("rank", help="rank a corpus with a trained snapshot")
    p_rank.add_argument("--corpus", required=True)
    p_rank.add_argument("--snapshot", required=True)
    p_rank.add_argument("--top-k", type=int, default=10)
    p_rank.add_argument("--out", help="ranking JSON output path")
    p_rank.set_defaults(func=cmd_rank)

    p_bench = sub.add_parser("bench", help="time matching over all corpus pairs")
    p_bench.add_argument("--corpus", required=True)
    p_bench.add_argument("--mode", default="exact", help="exact or beam:<b>")
    p_bench.add_argument("--phi", help="comma-separated attribute weights")
    p_bench.add_argument("--repetitions", type=int, default=1)
    p_bench.add_argument("--out", help="report JSON output path")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GraphNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFERENCE
    except ModelStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATE


if __name__ == "__main__":
    sys.exit(main())
