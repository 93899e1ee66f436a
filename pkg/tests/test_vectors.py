import numpy as np
import pytest

from robocmd.corpus import Vocabulary, build_vocab
from robocmd.data import VECTORS, data_path
from robocmd.neural import InconsistentDimension, MalformedLine, load_pretrained_vectors


@pytest.fixture()
def vocab():
    return Vocabulary.build([["alpha", "beta", "gamma"]])


def test_toy_file_all_in_vocab(vocab, tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("alpha 1 2 3\nbeta 4 5 6\ngamma 7 8 9\n")
    matrix = load_pretrained_vectors(path, vocab)
    assert matrix.shape == (len(vocab), 3)
    nonzero_rows = {i for i in range(len(vocab)) if matrix[i].any()}
    assert nonzero_rows == {vocab.token_to_id[t] for t in ("alpha", "beta", "gamma")}
    np.testing.assert_array_equal(matrix[vocab.token_to_id["beta"]], [4, 5, 6])


def test_out_of_file_token_row_zero(vocab, tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("alpha 1 2 3\n")
    matrix = load_pretrained_vectors(path, vocab)
    np.testing.assert_array_equal(matrix[vocab.token_to_id["gamma"]], np.zeros(3))


def test_inconsistent_dimension(vocab, tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("alpha 1 2 3\nbeta 4 5\n")
    with pytest.raises(InconsistentDimension) as err:
        load_pretrained_vectors(path, vocab)
    assert err.value.line == 2


def test_malformed_line(vocab, tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("alpha 1 2 3\nbeta x y z\n")
    with pytest.raises(MalformedLine) as err:
        load_pretrained_vectors(path, vocab)
    assert err.value.line == 2


def test_bundled_fixture_loads_50_words_10d(corpus_pairs):
    src_vocab, _ = build_vocab(corpus_pairs)
    matrix = load_pretrained_vectors(data_path(VECTORS), src_vocab)
    assert matrix.shape == (len(src_vocab), 10)
    covered = sum(1 for row in matrix if row.any())
    assert covered == 50
