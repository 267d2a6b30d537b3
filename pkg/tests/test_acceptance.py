"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""
import math
import os
import random
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from camrkit import tagging as T  # noqa: E402
from camrkit.config import DEFAULTS  # noqa: E402
from camrkit.corpus import CorpusDocument, parse_corpus, serialize_corpus  # noqa: E402
from camrkit.heads import BiaffineHead, LinearTagHead, grad_check  # noqa: E402
from camrkit.normalizer import (  # noqa: E402
    build_dictionaries,
    load_codes,
    load_error_lexicon,
    load_special_map,
    normalize_word,
)
from camrkit.pipeline import Parser, ParserModel, Resources, resource_path  # noqa: E402
from camrkit.relations import decode_matrix, encode_matrix  # noqa: E402
from camrkit.smatch import brute_force_score, extract_triples, match_score, score_corpus  # noqa: E402
from camrkit.synthetic import generate_corpus, random_graph  # noqa: E402
from camrkit.training import TrainConfig, accuracy, train  # noqa: E402
from camrkit.numerals import normalize_number  # noqa: E402

from oracles import int_to_chinese  # noqa: E402
from pairs import random_pair, shuffled_names  # noqa: E402

SIX = {"direct", "norm", "cont", "disc", "split", "null"}


def report(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line, file=sys.__stdout__, flush=True)
    return ok


def check_format_round_trip():
    rng = random.Random(0)
    graphs = [random_graph(rng, f"g{i:04d}") for i in range(1000)]
    t0 = time.perf_counter()
    data = serialize_corpus(CorpusDocument.from_graphs(graphs))
    doc = parse_corpus(data)
    again = serialize_corpus(doc)
    elapsed = time.perf_counter() - t0
    failures = sum(a != b for a, b in zip(graphs, doc.graphs)) + abs(len(graphs) - len(doc.graphs))
    failures += data != again
    return report("format round-trip", failures == 0 and elapsed < 5.0,
                  f"{failures} failures on 1000 graphs in {elapsed:.2f}s (limit 5s)")


def check_concept_round_trip():
    gs, man = generate_corpus(500, seed=0, gap_rate=0.1)
    res = Resources.build(DEFAULTS, gs)
    clean = [g for g in gs if not T.lexicon_gaps(g, res.split_lexicon, res.dicts)]
    ok = 0
    for g in clean:
        concepts, _, _ = T.oracle_concepts(g, res.split_lexicon, res.dicts)
        trig, _ = T.assign_triggers(g)
        ok += T.concept_signature(concepts) == T.concept_signature(g.concepts, trig)
    covered = {k for k, v in man.alignment_counts.items() if v}
    return report("oracle concept round-trip", ok == len(clean) and covered == SIX,
                  f"{ok}/{len(clean)} gap-free sentences exact ({len(gs) - len(clean)} with gaps); "
                  f"variants {sorted(covered)}")


def check_matrix_round_trip():
    rng = random.Random(1)
    failures = 0
    for i in range(1000):
        g = random_graph(rng, f"m{i}", recoverable=True)
        dec = decode_matrix(encode_matrix(g), g.concepts, g.sentence.functional)
        failures += dec.edges != list(g.relations) or dec.root != g.root
    return report("relation matrix round-trip", failures == 0, f"{failures} failures on 1000 graphs")


def _oracle_pipeline_score(gap_rate):
    gs, _ = generate_corpus(500, seed=0, gap_rate=gap_rate)
    res = Resources.build(DEFAULTS, gs)
    parser = Parser(ParserModel.initialize(DEFAULTS, res, T.build_null_inventory(gs)))
    preds = parser.predict_corpus([g.sentence for g in gs], gs, inject_concepts=True, inject_relations=True)
    return score_corpus([p.graph for p in preds], gs).rows()["AlignSmatch"].f1


def check_oracle_pipeline():
    clean = _oracle_pipeline_score(0.0)
    gapped = _oracle_pipeline_score(0.1)
    return report("full oracle pipeline", clean == 1.0 and gapped >= 0.99,
                  f"AlignSmatch {clean:.4f} without gaps (need 1.0), {gapped:.4f} with injected gaps (need >= 0.99)")


def check_scorer():
    rng = random.Random(2)
    agree = 0
    self_ok = rename_ok = True
    for _ in range(500):
        pred, gold = random_pair(rng, max_vars=6)
        agree += match_score(pred, gold, restarts=16).score.f1 == brute_force_score(pred, gold).f1
        if tuple(match_score(gold, gold))[:3] != (1.0, 1.0, 1.0):
            self_ok = False
        a = match_score(pred, gold).score
        b = match_score(shuffled_names(pred, rng), shuffled_names(gold, rng)).score
        c = match_score(shuffled_names(gold, rng), gold).score
        if a != b or tuple(c) != (1.0, 1.0, 1.0):
            rename_ok = False
    ok = agree >= 495 and self_ok and rename_ok
    return report("scorer correctness", ok,
                  f"hill climbing = brute force on {agree}/500 pairs (need >= 495); self-score exact: {self_ok}; "
                  f"renaming invariant: {rename_ok}")


def check_gradients():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(5, 4))
    errs = {
        "linear": grad_check(LinearTagHead(4, 3, context_hidden=3, seed=1), (X, rng.integers(0, 3, 5)),
                             class_weights=[0.5, 2.0, 1.5]),
        "biaffine": grad_check(BiaffineHead(4, 3, context_hidden=3, seed=2), (X, rng.integers(0, 3, (5, 5))),
                               class_weights=[0.2, 1.0, 3.0]),
    }
    zero = 0.0
    for c in (2, 3, 7):
        for head, y in ((LinearTagHead(4, c, 3), rng.integers(0, c, 5)), (BiaffineHead(4, c, 3), rng.integers(0, c, (5, 5)))):
            head.params["W"][...] = 0.0
            zero = max(zero, abs(head.loss_and_grads(X, y)[0] - math.log(c)))
    ok = max(errs.values()) < 1e-4 and zero < 1e-9
    return report("gradient checks", ok,
                  f"max relative error linear {errs['linear']:.2e}, biaffine {errs['biaffine']:.2e} (limit 1e-4); "
                  f"zero-weight |loss - ln c| {zero:.1e} (limit 1e-9)")


def check_normalizer():
    gs, _ = generate_corpus(300, seed=0)
    gs = [g for g in gs if "暴光" not in g.sentence.words]
    d = build_dictionaries(
        gs,
        special_map=load_special_map(resource_path("special.tsv")),
        error_lexicon=load_error_lexicon(resource_path("error_lexicon.tsv")),
        phonological=load_codes(resource_path("phonological.tsv")),
        calligraphical=load_codes(resource_path("calligraphical.tsv")),
    )
    cases = {"第一": "1", "一万": "10000", "不": "-", "合作": "合作-01", "暴光": "曝光-01"}
    wrong = {w: normalize_word(w, d) for w, want in cases.items() if normalize_word(w, d) != want}
    rng = random.Random(3)
    values = [rng.randrange(10 ** rng.randint(1, 13)) for _ in range(10_000)]
    bad = sum(normalize_number(int_to_chinese(n)) != str(n) for n in values)
    return report("normalizer", not wrong and bad == 0,
                  f"{len(cases) - len(wrong)}/{len(cases)} table cases; numeral round-trip {10_000 - bad}/10000")


def _toy():
    rng = np.random.default_rng(0)
    data = []
    for _ in range(40):
        y = rng.integers(0, 3, 4)
        X = rng.normal(0, 0.05, (4, 6))
        X[np.arange(4), y] += 1.0
        data.append((X, y))
    return data


def check_learning():
    data = _toy()
    blobs = []
    first_full = None
    for _ in range(2):
        head = LinearTagHead(6, 3, seed=0)
        cfg = TrainConfig(batch_size=4, learning_rate=0.5, epochs=50, seed=0)
        hits = []
        train(head, None, data, cfg, dev_metric=lambda h: hits.append(accuracy(h, data)) or hits[-1])
        blobs.append(str(head.to_dict()).encode())
        if first_full is None:
            first_full = next((k + 1 for k, a in enumerate(hits) if a == 1.0), None)
    ok = first_full is not None and hits[-1] == 1.0 and blobs[0] == blobs[1]
    return report("learning smoke test", ok,
                  f"100% accuracy first reached at epoch {first_full} (limit 50), final {hits[-1]:.3f}; "
                  f"reruns identical: {blobs[0] == blobs[1]}")


def test_format_round_trip():
    assert check_format_round_trip()


def test_oracle_concept_round_trip():
    assert check_concept_round_trip()


def test_relation_matrix_round_trip():
    assert check_matrix_round_trip()


def test_full_oracle_pipeline():
    assert check_oracle_pipeline()


def test_scorer_correctness():
    assert check_scorer()


def test_gradient_checks():
    assert check_gradients()


def test_normalizer():
    assert check_normalizer()


def test_learning_smoke():
    assert check_learning()


CHECKS = [check_format_round_trip, check_concept_round_trip, check_matrix_round_trip, check_oracle_pipeline,
          check_scorer, check_gradients, check_normalizer, check_learning]

if __name__ == "__main__":
    results = [c() for c in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
