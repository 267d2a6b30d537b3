"""
Stage-1 tags and the stage-2 relation matrix
============================================

Encodes a gold graph as three tag sequences and a label matrix, then decodes
both back and compares with the original.
"""
from camrkit import decode_matrix, decode_null_concepts, decode_surface, encode_matrix, encode_tags
from camrkit.config import load_config
from camrkit.pipeline import Resources
from camrkit.synthetic import generate_corpus

graphs, manifest = generate_corpus(20, seed=3)
g = next(x for x in graphs if any(c.var.startswith("z") for c in x.concepts))
print(g.id, " ".join(g.sentence.words))

tags = encode_tags(g)
for w, s, n, z in zip(g.sentence.words, tags.surface, tags.norm, tags.nullc):
    print(f"{w:6s} {s:8s} {n:10s} {z}")

# NeedsNorm words go through dictionaries built from the corpus itself
res = Resources.build(load_config(), graphs)
dec = decode_surface(g.sentence, tags.surface, tags.norm, res.split_lexicon, res.dicts, strict=False)
nulls = decode_null_concepts(g.sentence, tags.nullc, dec.concepts)
print("decoded:", sorted((c.var, c.label) for c in dec.concepts + nulls))
print("gold:   ", sorted((c.var, c.label) for c in g.concepts))

# relation matrix: rows and columns are concepts plus functional tokens
m = encode_matrix(g)
print(m.to_tsv())
out = decode_matrix(m, g.concepts, g.sentence.functional)
print("root", out.root, "edges recovered:", sorted(out.edges) == sorted(g.relations))
