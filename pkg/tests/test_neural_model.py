import numpy as np
import pytest

from robocmd.corpus import UNK_ID, Vocabulary
from robocmd.neural import ModelConfig, Seq2SeqModel, bilinear_attention, train
from robocmd.neural.adam import Adam
from robocmd.neural.train import _make_batch
from robocmd.grammar import CorpusPair
from robocmd.logic import parse_lf_str


@pytest.fixture()
def small_vocabs():
    src = Vocabulary.build([["go", "to", "the", "kitchen", "bedroom", "bring", "me", "an", "apple"]])
    tgt = Vocabulary.build([["(", ")", '"', "<room>", "<object>", "go", "bring", "λ", "$1", "e", "is_a"]])
    return src, tgt


def _model(src, tgt, frozen=None, **overrides):
    base = dict(tunable_embed_dim=8, encoder_hidden=6, decoder_hidden=6, seed=11,
                encoder_dropout=0.0, batch_size=2)
    base.update(overrides)
    return Seq2SeqModel(ModelConfig(**base), src, tgt, frozen, dtype=np.float64)


def test_embed_dim_without_frozen(small_vocabs):
    src, tgt = small_vocabs
    model = _model(src, tgt)
    out = model.embed_tokens(["go", "to"])
    assert out.shape == (2, 8)


def test_embed_frozen_concat_and_oov(small_vocabs):
    src, tgt = small_vocabs
    frozen = np.zeros((len(src), 5))
    frozen[src.token_to_id["kitchen"]] = [1, 2, 3, 4, 5]
    model = _model(src, tgt, frozen=frozen)
    out = model.embed_tokens(["kitchen", "go"])
    assert out.shape == (2, 13)
    np.testing.assert_array_equal(out[0, :5], [1, 2, 3, 4, 5])  # file row verbatim
    np.testing.assert_array_equal(out[1, :5], np.zeros(5))  # absent token: zero part
    assert model.cfg.frozen_embed_dim == 5


def test_embed_unk_uses_unk_row(small_vocabs):
    src, tgt = small_vocabs
    model = _model(src, tgt)
    unk = model.embed_tokens(["zzz"])[0]
    np.testing.assert_array_equal(unk, model.params["src_embed"][UNK_ID])


def test_encode_length_one(small_vocabs):
    src, tgt = small_vocabs
    model = _model(src, tgt)
    ids = np.array([[src.token_to_id["go"]]], dtype=np.intp)
    mask = np.ones((1, 1))
    enc = model.encode(ids, mask)
    # with one token, forward final state equals the position-0 forward state
    hidden = model.cfg.encoder_hidden
    np.testing.assert_allclose(enc["memory"][0, 0, :hidden], enc["bridge_in"][0, :hidden])


def test_encode_deterministic_without_dropout(small_vocabs):
    src, tgt = small_vocabs
    model = _model(src, tgt)
    ids = np.array([src.encode(["go", "to", "the", "kitchen"])], dtype=np.intp)
    mask = np.ones((1, 4))
    a = model.encode(ids, mask, training=False)
    b = model.encode(ids, mask, training=False)
    np.testing.assert_array_equal(a["memory"], b["memory"])


def test_encode_reversal_mirrors_directions(small_vocabs):
    src, tgt = small_vocabs
    model = _model(src, tgt)
    # tie the two direction weights so reversal is an exact mirror
    for name in ("Wx", "Wh", "b"):
        model.params[f"enc_bwd_{name}"][...] = model.params[f"enc_fwd_{name}"]
    tokens = ["go", "to", "the", "kitchen"]
    ids = np.array([src.encode(tokens)], dtype=np.intp)
    rev_ids = ids[:, ::-1].copy()
    mask = np.ones((1, 4))
    he = model.cfg.encoder_hidden
    enc = model.encode(ids, mask)
    enc_rev = model.encode(rev_ids, mask)
    for t in range(4):
        np.testing.assert_allclose(
            enc["memory"][0, t, :he], enc_rev["memory"][0, 3 - t, he:], atol=1e-12
        )
        np.testing.assert_allclose(
            enc["memory"][0, t, he:], enc_rev["memory"][0, 3 - t, :he], atol=1e-12
        )


def test_attend_single_state():
    rng = np.random.default_rng(0)
    dec = rng.normal(size=6)
    enc = rng.normal(size=(1, 12))
    weight = rng.normal(size=(6, 12))
    context, weights = bilinear_attention(dec, enc, weight)
    np.testing.assert_allclose(weights, [1.0])
    np.testing.assert_allclose(context, enc[0])


def test_attend_identical_states_uniform():
    rng = np.random.default_rng(1)
    dec = rng.normal(size=6)
    enc = np.tile(rng.normal(size=12), (5, 1))
    weight = rng.normal(size=(6, 12))
    _, weights = bilinear_attention(dec, enc, weight)
    np.testing.assert_allclose(weights, np.full(5, 0.2), atol=1e-12)


def test_attend_matches_direct_computation():
    rng = np.random.default_rng(2)
    dec = rng.normal(size=4)
    enc = rng.normal(size=(7, 10))
    weight = rng.normal(size=(4, 10))
    context, weights = bilinear_attention(dec, enc, weight)
    scores = np.array([dec @ weight @ e for e in enc])
    expected = np.exp(scores - scores.max())
    expected /= expected.sum()
    np.testing.assert_allclose(weights, expected, atol=1e-12)
    assert abs(weights.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(context, weights @ enc, atol=1e-12)
    assert weights.min() >= 0.0


def test_initial_loss_near_uniform(registry, corpus_pairs):
    from robocmd.corpus import build_vocab
    from robocmd.neural.train import _encode_pairs

    pairs = corpus_pairs[:32]
    src_v, tgt_v = build_vocab(pairs)
    model = Seq2SeqModel(
        ModelConfig(tunable_embed_dim=16, encoder_hidden=12, decoder_hidden=12, seed=0),
        src_v, tgt_v, dtype=np.float64,
    )
    batch = _make_batch(_encode_pairs(pairs, src_v, tgt_v), np.float64)
    loss = model.loss_only(batch, training=False)
    assert abs(loss - np.log(len(tgt_v))) / np.log(len(tgt_v)) < 0.2


def test_zero_gradient_row_unchanged_by_adam(small_vocabs):
    src, tgt = small_vocabs
    model = _model(src, tgt)
    params = {"w": np.array([[1.0, 2.0], [3.0, 4.0]])}
    adam = Adam(params, lr=0.1)
    grads = {"w": np.array([[0.5, 0.5], [0.0, 0.0]])}
    before = params["w"].copy()
    for _ in range(3):
        adam.step(grads)
    assert not np.allclose(params["w"][0], before[0])
    np.testing.assert_array_equal(params["w"][1], before[1])


def test_same_seed_training_bitwise_identical(registry, corpus_pairs):
    from robocmd.corpus import build_vocab

    pairs = corpus_pairs[:24]
    src_v, tgt_v = build_vocab(pairs)
    cfg = ModelConfig(
        tunable_embed_dim=12, encoder_hidden=10, decoder_hidden=10, seed=5,
        batch_size=8, max_epochs=2, patience=10,
    )
    results = []
    for _ in range(2):
        model = Seq2SeqModel(cfg, src_v, tgt_v)
        model, _ = train(model, pairs, pairs[:4], cfg)
        results.append(model.copy_params())
    for name in results[0]:
        np.testing.assert_array_equal(results[0][name], results[1][name])


def test_frozen_checksum_stable_across_training(registry, corpus_pairs):
    from robocmd.corpus import build_vocab

    pairs = corpus_pairs[:24]
    src_v, tgt_v = build_vocab(pairs)
    frozen = np.random.default_rng(3).normal(size=(len(src_v), 6)).astype(np.float32)
    cfg = ModelConfig(
        tunable_embed_dim=12, encoder_hidden=10, decoder_hidden=10, seed=5,
        batch_size=8, max_epochs=2, patience=10,
    )
    model = Seq2SeqModel(cfg, src_v, tgt_v, frozen)
    before = model.frozen_checksum()
    model, _ = train(model, pairs, pairs[:4], cfg)
    assert model.frozen_checksum() == before


def test_max_decode_len_validated(registry, corpus_pairs):
    from robocmd.corpus import build_vocab

    pairs = corpus_pairs[:12]
    src_v, tgt_v = build_vocab(pairs)
    cfg = ModelConfig(
        tunable_embed_dim=8, encoder_hidden=6, decoder_hidden=6, max_decode_len=5
    )
    model = Seq2SeqModel(cfg, src_v, tgt_v)
    with pytest.raises(ValueError):
        train(model, pairs, pairs[:2], cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(encoder_dropout=1.0)
    with pytest.raises(ValueError):
        ModelConfig(encoder_hidden=0)
    cfg = ModelConfig()
    assert cfg.tunable_embed_dim == 100
    assert cfg.encoder_hidden == 256
    assert cfg.beam_width == 5
    assert cfg.max_epochs == 150
    assert cfg.patience == 10
    assert cfg.encoder_dropout == 0.1
