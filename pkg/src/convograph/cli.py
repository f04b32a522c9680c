"""Operator command line: chat REPL, intent evaluation, graph linting,
fixture ingestion, metrics reporting, service launcher.

Exit codes: 0 success, 1 findings or failures, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import CasingLexicon, pos_tag, tokenize, truecase
from .dialogue import lint_graph, load_graph
from .engine import Engine, EngineConfig
from .errors import ConvographError, IngestError
from .evaluation import METHODS, eval_intents
from .intent import EmbeddingTable, load_intent_corpus
from .knowledge import ingest_concepts, load_facts, load_labels
from .nlg import load_templates
from .responders import load_chitchat_pairs, load_handcrafted, load_qa_pairs
from .sessionlog import SessionLog, compute_metrics


def _load_config(args) -> EngineConfig:
    config = EngineConfig.load(args.config)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    return config


def cmd_chat(args) -> int:
    try:
        config = _load_config(args)
        engine = Engine(config)
    except (ConvographError, OSError, ValueError) as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 1
    session_id = engine.create_session(args.user)
    ctx = engine.restore_session(session_id)
    print(f"session {session_id} (:quit to exit, :seed N to fix the response seed)")
    while True:
        try:
            line = input("you> ")
        except EOFError:
            print()
            return 0
        line = line.strip()
        if not line:
            continue
        if line == ":quit":
            return 0
        if line.startswith(":seed"):
            parts = line.split()
            if len(parts) == 2 and parts[1].lstrip("-").isdigit():
                engine.base_seed = int(parts[1])
                print(f"seed set to {engine.base_seed}")
            else:
                print("usage: :seed N")
            continue
        result = engine.process_turn(ctx, text=line)
        print(f"bot> {result.response}")
        bits = [f"module={result.module}"]
        if result.topic:
            bits.append(f"topic={result.topic}")
        if result.state:
            bits.append(f"state={result.state}")
        if result.intent:
            bits.append(f"intent={result.intent}")
        bits.append(f"confident={str(result.confident).lower()}")
        bits.append(f"profane={str(result.profane).lower()}")
        print(f"     [{' '.join(bits)}]")


def cmd_eval_intents(args) -> int:
    config = _load_config(args)
    fixtures = config.fixtures_dir
    corpus_path = Path(args.corpus) if args.corpus else fixtures / "intents" / "toplevel.tsv"
    try:
        corpus = load_intent_corpus(corpus_path)
        casing_path = fixtures / "lexicon" / "casing.tsv"
        lexicon = CasingLexicon.load(casing_path) if casing_path.is_file() else CasingLexicon()
        corpus = [
            replace(ex, pos_tags=tuple(pos_tag(truecase(tokenize(ex.text), lexicon), lexicon)))
            for ex in corpus
        ]
        table = None
        methods = METHODS if args.method == "all" else (args.method,)
        if "embedding" in methods:
            table = EmbeddingTable.load(fixtures / "embeddings" / "vectors.txt")
        reports = [
            eval_intents(corpus, m, folds=args.folds, seed=config.seed, table=table)
            for m in methods
        ]
    except (ConvographError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.format == "tsv":
        print("method\taccuracy\tcorrect\ttotal\tfolds\tcorpus_size")
        for rep in reports:
            print(f"{rep.method}\t{rep.accuracy:.6f}\t{rep.correct}\t{rep.total}"
                  f"\t{rep.folds}\t{rep.corpus_size}")
    else:
        print(f"{args.folds}-fold cross-validation on {reports[0].corpus_size} examples")
        print(f"{'Method':<22}{'Accuracy':>10}")
        for rep in reports:
            print(f"{rep.method:<22}{rep.accuracy:>10.3f}")
        if args.confusion:
            for rep in reports:
                print(f"\nconfusion ({rep.method}), true -> predicted:")
                for (true, pred), n in sorted(rep.confusion.items()):
                    if true != pred:
                        print(f"  {true} -> {pred}: {n}")
    return 0


def cmd_lint(args) -> int:
    config = _load_config(args)
    directory = Path(args.dir) if args.dir else config.fixtures_dir / "graphs"
    system_path = config.fixtures_dir / "templates" / "system.yaml"
    extra = set(load_templates(system_path)) if system_path.is_file() else set()
    findings_total = 0
    files = sorted(directory.glob("*.yaml"))
    if not files:
        print(f"no graph files under {directory}", file=sys.stderr)
        return 1
    for path in files:
        try:
            graph = load_graph(path)
        except ConvographError as exc:
            print(f"{path.name}: parse failure: {exc}")
            findings_total += 1
            continue
        findings = lint_graph(graph, extra_templates=extra)
        for finding in findings:
            print(f"{path.name}: {finding}")
        findings_total += len(findings)
    if findings_total:
        print(f"{findings_total} finding(s)")
        return 1
    print(f"{len(files)} graph(s) clean")
    return 0


_INGEST_LOADERS = {
    "concepts": ingest_concepts,
    "labels": load_labels,
    "facts": load_facts,
    "handcrafted": load_handcrafted,
    "chitchat": load_chitchat_pairs,
    "qa": load_qa_pairs,
}


def cmd_ingest(args) -> int:
    loader = _INGEST_LOADERS[args.kind]
    try:
        result = loader(args.path)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.kind == "concepts":
        print(f"ok: {len(result)} surfaces indexed")
        if args.out:
            _write_concepts(result, Path(args.out))
            print(f"normalized index written to {args.out}")
    else:
        print(f"ok: {len(result)} records loaded")
    return 0


def _write_concepts(index, out: Path) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for surface in sorted(index._by_surface):
            for concept, popularity in index.lookup(surface):
                fh.write(f"{surface}\t{concept}\t{popularity}\n")


def cmd_stats(args) -> int:
    config = _load_config(args)
    log = SessionLog(config.data_dir)
    rows = [m.as_row() for m in compute_metrics(log.read_all())]
    if args.format == "tsv":
        print("topic\trating\tseconds\tturns")
        for row in rows:
            print(f"{row['topic']}\t{_fmt(row['rating'])}\t{_fmt(row['seconds'])}\t{_fmt(row['turns'])}")
    else:
        print(f"{'Topic':<18}{'Rating':>8}{'Time':>10}{'Turns':>8}")
        for row in rows:
            rating = _fmt(row["rating"], 3)
            seconds = "-" if row["seconds"] is None else f"{row['seconds']:.0f} s"
            turns = _fmt(row["turns"], 3)
            print(f"{row['topic']:<18}{rating:>8}{seconds:>10}{turns:>8}")
    return 0


def _fmt(value, digits: int = 6) -> str:
    return "-" if value is None else f"{value:.{digits}f}".rstrip("0").rstrip(".")


def cmd_serve(args) -> int:
    from .service import serve

    try:
        config = _load_config(args)
        serve(config)
    except (ConvographError, OSError, ValueError) as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convograph",
        description="Hybrid dialogue engine: chat REPL, evaluation and operator tooling.",
    )
    parser.add_argument("--config", help="path to a YAML config file", default=None)
    parser.add_argument("--seed", type=int, default=None, help="override the response seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chat", help="interactive REPL against the local engine")
    p.add_argument("--user", default=None, help="user id for long-term memory")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("eval-intents", help="cross-validated intent detection accuracy")
    p.add_argument("--method", choices=METHODS + ("all",), default="all")
    p.add_argument("--corpus", default=None, help="label<TAB>text corpus file")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--confusion", action="store_true", help="print confusion counts")
    p.add_argument("--format", choices=("plain", "tsv"), default="plain")
    p.set_defaults(func=cmd_eval_intents)

    p = sub.add_parser("lint", help="check dialogue graphs for authoring mistakes")
    p.add_argument("--dir", default=None, help="directory of graph .yaml files")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("ingest", help="validate a fixture file and report its size")
    p.add_argument("kind", choices=sorted(_INGEST_LOADERS))
    p.add_argument("path")
    p.add_argument("--out", default=None, help="write a normalized copy (concepts only)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="per-topic rating/time/turns averages")
    p.add_argument("--format", choices=("plain", "tsv"), default="plain")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="start the HTTP chat service")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
