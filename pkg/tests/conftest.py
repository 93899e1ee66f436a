import pytest

from robocmd.data import GRAMMAR, ONTOLOGY, PARAPHRASES, PREDICATES, data_path
from robocmd.grammar import enumerate_anonymized, load_grammar_file
from robocmd.logic import PredicateRegistry
from robocmd.ontology import Ontology


@pytest.fixture(scope="session")
def registry():
    return PredicateRegistry.load(data_path(PREDICATES))


@pytest.fixture(scope="session")
def ontology():
    return Ontology.load(data_path(ONTOLOGY))


@pytest.fixture(scope="session")
def grammar(registry):
    return load_grammar_file(data_path(GRAMMAR), registry)


@pytest.fixture(scope="session")
def corpus_pairs(grammar):
    return enumerate_anonymized(grammar)


@pytest.fixture(scope="session")
def paraphrase_path():
    return data_path(PARAPHRASES)
