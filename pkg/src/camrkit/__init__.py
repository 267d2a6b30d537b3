"""Aligned Chinese AMR parsing: graph model, tag and matrix codecs, normalizer, numpy heads and Align-Smatch."""
from .corpus import CorpusDocument, CorpusFormatError, parse_corpus, read_corpus, serialize_corpus, write_corpus
from .graph import AmrGraph, ConceptNode, RelationEdge, Sentence, Token, validate_graph
from .relations import RelationMatrix, decode_matrix, encode_matrix
from .smatch import brute_force_score, extract_triples, fine_grained, match_score, score_corpus
from .tagging import decode_null_concepts, decode_surface, encode_tags

__version__ = "0.1.0"
