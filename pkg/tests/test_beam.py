import numpy as np
import pytest

from robocmd.corpus import Vocabulary, build_vocab
from robocmd.neural import ModelConfig, Seq2SeqModel, decode_beam, greedy_decode


@pytest.fixture(scope="module")
def random_model(corpus_pairs):
    pairs = corpus_pairs[:60]
    src_v, tgt_v = build_vocab(pairs)
    cfg = ModelConfig(
        tunable_embed_dim=12, encoder_hidden=10, decoder_hidden=10, seed=9,
        max_decode_len=25,
    )
    return Seq2SeqModel(cfg, src_v, tgt_v)


def _random_inputs(model, n, seed):
    rng = np.random.default_rng(seed)
    tokens = [t for t in model.src_vocab.id_to_token[4:]]
    commands = []
    for _ in range(n):
        length = rng.integers(1, 9)
        commands.append([tokens[i] for i in rng.integers(0, len(tokens), length)])
    return commands


def test_beam_one_equals_greedy_on_100_random_inputs(random_model):
    for command in _random_inputs(random_model, 100, seed=17):
        beam = decode_beam(random_model, command, beam_width=1)
        greedy = greedy_decode(random_model, command)
        assert beam[0].tokens == greedy


def test_best_hypothesis_ranked_first(random_model):
    for command in _random_inputs(random_model, 20, seed=23):
        hyps = decode_beam(random_model, command, beam_width=5)
        assert hyps
        scores = [h.score for h in hyps]
        assert scores == sorted(scores, reverse=True)


def test_beam_respects_max_len(random_model):
    for command in _random_inputs(random_model, 10, seed=29):
        hyps = decode_beam(random_model, command, beam_width=3, max_len=7)
        for hyp in hyps:
            assert len(hyp.tokens) <= 7


def test_beam_deterministic(random_model):
    command = _random_inputs(random_model, 1, seed=31)[0]
    first = decode_beam(random_model, command, beam_width=5)
    second = decode_beam(random_model, command, beam_width=5)
    assert [h.tokens for h in first] == [h.tokens for h in second]
    assert [h.score for h in first] == [h.score for h in second]
