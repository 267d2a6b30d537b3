"""
Scoring with Align-Smatch
=========================

Compares a prediction against gold with and without alignment, and shows the
per-category rows for a prediction that drops relation alignments.
"""
import dataclasses

from camrkit import extract_triples, fine_grained, match_score
from camrkit.smatch import MatchConfig, brute_force_score
from camrkit.synthetic import qiantang_example

gold = qiantang_example()
print(match_score(extract_triples(gold), extract_triples(gold)).score)

# same graph, but no edge says which function word carries it
bare = dataclasses.replace(gold, edges=[dataclasses.replace(e, rel_alignment=None) for e in gold.edges])
p, q = extract_triples(bare), extract_triples(gold)
for mode in ("separate", "joint", "ignore"):
    r = match_score(p, q, cfg=MatchConfig(relation_alignment=mode))
    print(f"{mode:9s} P={r.score.precision:.3f} R={r.score.recall:.3f} F={r.score.f1:.3f}")

r = match_score(p, q)
for name, s in fine_grained(p, q, r.mapping).items():
    print(f"{name:15s} P={s.precision:.3f} R={s.recall:.3f}")

# small graphs can be checked against exhaustive search
print("brute force:", brute_force_score(p, q).f1)
