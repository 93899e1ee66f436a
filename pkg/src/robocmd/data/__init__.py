"""Bundled fixtures: mini grammar, ontology, predicate registry, pretrained
vectors, a paraphrase set, and experiment matrix presets."""

from importlib import resources
from pathlib import Path


def data_path(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    path = resources.files(__package__).joinpath(name)
    return Path(str(path))


GRAMMAR = "grammar.txt"
ONTOLOGY = "ontology.txt"
PREDICATES = "predicates.tsv"
VECTORS = "vectors_10d.txt"
PARAPHRASES = "paraphrases.jsonl"
MATRIX_FULL = "matrix_full.json"
MATRIX_QUICK = "matrix_quick.json"
