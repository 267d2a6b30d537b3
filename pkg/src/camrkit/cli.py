"""Command line entry point.

Exit codes: 0 success, 1 data error (unreadable or malformed corpus, id
mismatch, failed training), 2 configuration or usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, load_config
from .corpus import CorpusDocument, CorpusFormatError, read_corpus, write_corpus
from .graph import load_inventory
from .normalizer import build_dictionaries, load_codes, load_error_lexicon, load_special_map
from .pipeline import (
    Parser,
    ParserModel,
    Resources,
    corpus_stats,
    diagnostics_jsonl,
    format_stats,
    match_config,
    oracle_roundtrip,
    resource_path,
    train_parser,
)
from .smatch import format_report, score_corpus
from .synthetic import generate_corpus
from .training import TrainingError

log = logging.getLogger("camrkit")


class DataError(Exception):
    pass


def _config(args) -> dict:
    return load_config(args.config, args.set or [])


def _read(path) -> CorpusDocument:
    try:
        return read_corpus(path)
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except CorpusFormatError as e:
        raise DataError(f"{path}: {e}") from None


def cmd_stats(args) -> int:
    doc = _read(args.corpus)
    inv = load_inventory(args.relations) if args.relations else load_inventory(resource_path("relations.txt"))
    stats = corpus_stats(doc, inv)
    sys.stdout.write(format_stats(stats))
    if args.manifest:
        man = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        expected = {"sentences": man["sentences"], "tokens": man["tokens"], "relations": man["relations"],
                    "attributes": man["attributes"], "relation_alignments": man["relation_alignments"]}
        expected.update({f"align.{k}": v for k, v in man["alignment_counts"].items()})
        bad = {k: (stats.get(k), v) for k, v in expected.items() if stats.get(k) != v}
        for k, (got, want) in sorted(bad.items()):
            print(f"manifest mismatch\t{k}\t{got}\t{want}", file=sys.stderr)
        if bad:
            return 1
    return 0


def cmd_build_dicts(args) -> int:
    cfg = _config(args)
    doc = _read(args.corpus or cfg["paths"]["train"])
    if not doc.graphs:
        raise DataError("corpus has no graphs to count")
    p = cfg["paths"]
    d = build_dictionaries(
        doc.graphs,
        special_map=load_special_map(p["special_map"] or resource_path("special.tsv")),
        error_lexicon=load_error_lexicon(p["error_lexicon"] or resource_path("error_lexicon.tsv")),
        phonological=load_codes(p["phonological"] or resource_path("phonological.tsv")),
        calligraphical=load_codes(p["calligraphical"] or resource_path("calligraphical.tsv")),
        threshold=cfg["normalizer"]["threshold"],
    )
    d.save(args.out)
    print(f"{len(d.counts)} normalized words, {len(d.error_index.lexicon)} correction entries -> {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    train_path = args.train or cfg["paths"]["train"]
    if not train_path:
        raise ConfigError("no training corpus: set paths.train or pass --train")
    dev_path = args.dev or cfg["paths"]["dev"]
    train = _read(train_path).graphs
    dev = _read(dev_path).graphs if dev_path else []
    try:
        rep = train_parser(cfg, train, dev, args.out)
    except (TrainingError, ValueError) as e:
        raise DataError(str(e)) from None
    for sid, reason in rep.skipped:
        print(f"skipped\t{sid}\t{reason}", file=sys.stderr)
    score = "n/a" if rep.best_score is None else f"{rep.best_score:.4f}"
    print(f"best epoch {rep.best_epoch} dev AlignSmatch {score}; checkpoints in {args.out}")
    return 0


def cmd_predict(args) -> int:
    try:
        model = ParserModel.load(args.model)
    except FileNotFoundError as e:
        raise DataError(f"model: {e}") from None
    doc = _read(args.input)
    inject = args.inject_gold_concepts or args.inject_gold_relations
    gold = doc.graphs if inject else None
    if inject and len(doc.graphs) != len(doc):
        raise DataError("injection modes need a gold graph for every sentence")
    try:
        preds = Parser(model).predict_corpus(doc.sentences, gold, args.inject_gold_concepts,
                                             args.inject_gold_relations)
    except ValueError as e:
        raise DataError(str(e)) from None
    write_corpus(CorpusDocument.from_graphs(p.graph for p in preds), args.output)
    if args.diagnostics:
        Path(args.diagnostics).write_text(diagnostics_jsonl(preds), encoding="utf-8")
    return 0


def cmd_score(args) -> int:
    cfg = _config(args)
    sc = cfg["scorer"]
    pred, gold = _read(args.pred), _read(args.gold)
    try:
        total = score_corpus(pred.graphs, gold.graphs, sc["restarts"], sc["seed"], match_config(cfg))
    except ValueError as e:
        raise DataError(str(e)) from None
    sys.stdout.write(format_report(total.rows(), args.style))
    return 0


def cmd_oracle_roundtrip(args) -> int:
    cfg = _config(args)
    doc = _read(args.corpus)
    graphs = doc.graphs
    if not graphs:
        print("0 graphs")
        return 0
    res = Resources.build(cfg, graphs)
    rows = oracle_roundtrip(graphs, res)
    print("id\tconcepts_ok\trelations_ok\tgaps")
    for r in rows:
        print(f"{r['id']}\t{int(r['concepts_ok'])}\t{int(r['relations_ok'])}\t{'; '.join(r['gaps'])}")
    clean = [r for r in rows if not r["gaps"]]
    ok = sum(r["concepts_ok"] for r in clean)
    rel = sum(r["relations_ok"] for r in rows)
    print(f"# concepts {ok}/{len(clean)} gap-free sentences; relations {rel}/{len(rows)}", file=sys.stderr)
    return 0


def cmd_gen_synthetic(args) -> int:
    graphs, manifest = generate_corpus(args.n, args.seed, args.gap_rate, args.prefix)
    write_corpus(CorpusDocument.from_graphs(graphs), args.out)
    man = args.manifest or str(args.out) + ".manifest.json"
    Path(man).write_text(manifest.to_json(), encoding="utf-8")
    print(f"{len(graphs)} graphs -> {args.out}; manifest {man}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="camrkit", description="Aligned Chinese AMR parsing toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key, e.g. heads.relation.epochs=5")
        return p

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus")
    p.add_argument("--relations", help="relation inventory file")
    p.add_argument("--manifest", help="synthetic manifest to check the counts against")
    p.set_defaults(func=cmd_stats)

    p = with_config(sub.add_parser("build-dicts", help="normalization dictionaries from a training corpus"))
    p.add_argument("--corpus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_dicts)

    p = with_config(sub.add_parser("train", help="train the four heads"))
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="parse sentences with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--diagnostics", help="JSON-lines file, one record per sentence")
    p.add_argument("--inject-gold-concepts", action="store_true", help="decode concepts from gold tags")
    p.add_argument("--inject-gold-relations", action="store_true", help="decode relations from the gold matrix")
    p.set_defaults(func=cmd_predict)

    p = with_config(sub.add_parser("score", help="Align-Smatch report"))
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--style", choices=["tsv", "pretty"], default="tsv")
    p.set_defaults(func=cmd_score)

    p = with_config(sub.add_parser("oracle-roundtrip", help="encode/decode gold graphs"))
    p.add_argument("corpus")
    p.set_defaults(func=cmd_oracle_roundtrip)

    p = sub.add_parser("gen-synthetic", help="write a synthetic corpus and its manifest")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gap-rate", type=float, default=0.0)
    p.add_argument("--prefix", default="syn")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_gen_synthetic)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
