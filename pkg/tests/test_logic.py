import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robocmd.logic import (
    Application,
    ArityMismatch,
    ClassToken,
    DanglingQuote,
    Lambda,
    LfSyntaxError,
    PredicateRegistry,
    StringLit,
    UnbalancedParens,
    UnboundVariable,
    UnknownPredicate,
    Variable,
    exact_match,
    free_variables,
    lf_to_str,
    parse_lf,
    parse_lf_str,
    print_lf,
    tokenize_lf,
)


def test_registry_counts(registry):
    assert len(registry.names("action")) == 7
    assert len(registry.names("descriptive")) == 20


def test_registry_round_trip(registry, tmp_path):
    path = tmp_path / "preds.tsv"
    registry.dump(path)
    again = PredicateRegistry.load(path)
    assert again.entries == registry.entries


def test_parse_go_room(registry):
    lf = parse_lf_str('( go " <room> " )', registry)
    assert lf == Application("go", (ClassToken("room"),))
    assert lf_to_str(lf) == '( go " <room> " )'


def test_parse_bring_lambda(registry):
    lf = parse_lf_str('( bring ( λ $1 e ( is_a $1 " <object> " ) ) )', registry)
    assert lf == Application(
        "bring",
        (Lambda("$1", "e", (Application("is_a", (Variable("$1"), ClassToken("object"))),)),),
    )


def test_parse_normalizes_tex_quotes(registry):
    lf = parse_lf_str("( go `` <room> '' )", registry)
    assert lf == Application("go", (ClassToken("room"),))


def test_parse_two_predicate_lambda_body_order(registry):
    text = '( guide ( λ $1 e ( person $1 ) ( name $1 " <name> " ) ) " <location> " )'
    lf = parse_lf_str(text, registry)
    assert lf_to_str(lf) == text
    body = lf.args[0].body
    assert [b.predicate for b in body] == ["person", "name"]


def test_parse_nested_lambdas_category3(registry):
    text = (
        '( bring ( λ $1 e ( λ $2 e ( is_a $2 " <object> " ) ( on_top_of $1 $2 ) ) ) '
        '" <location> " )'
    )
    lf = parse_lf_str(text, registry)
    assert free_variables(lf) == set()
    assert lf_to_str(lf) == text


def test_unbound_variable_outside_lambda(registry):
    with pytest.raises(UnboundVariable) as err:
        parse_lf_str('( is_a $1 " <object> " )', registry)
    assert err.value.index == 2


def test_unbound_allowed_when_not_required(registry):
    lf = parse_lf_str('( is_a $1 " <object> " )', registry, require_closed=False)
    assert free_variables(lf) == {"$1"}


def test_unknown_predicate_names_index(registry):
    with pytest.raises(UnknownPredicate) as err:
        parse_lf_str('( zap " <room> " )', registry)
    assert err.value.index == 1


def test_arity_mismatch(registry):
    with pytest.raises(ArityMismatch):
        parse_lf_str('( go " <room> " " <room> " )', registry)
    # bring admits both one and two arguments
    parse_lf_str('( bring ( λ $1 e ( person $1 ) ) )', registry)
    parse_lf_str('( bring ( λ $1 e ( person $1 ) ) " <location> " )', registry)
    with pytest.raises(ArityMismatch):
        parse_lf_str("( bring )", registry)


def test_unbalanced_and_dangling(registry):
    with pytest.raises(UnbalancedParens):
        parse_lf_str('( go " <room> "', registry)
    with pytest.raises(UnbalancedParens):
        parse_lf_str('( go " <room> " ) )', registry)
    with pytest.raises(DanglingQuote):
        parse_lf_str('( go " <room> )', registry)
    with pytest.raises(UnbalancedParens):
        parse_lf([], registry)


def test_rejects_non_e_marker(registry):
    with pytest.raises(LfSyntaxError):
        parse_lf_str('( bring ( λ $1 t ( person $1 ) ) )', registry)


def test_empty_lambda_body_rejected(registry):
    with pytest.raises(LfSyntaxError):
        parse_lf_str("( bring ( λ $1 e ) )", registry)


def test_multiword_string_literal(registry):
    lf = parse_lf_str('( go " kitchen counter " )', registry)
    assert lf == Application("go", (StringLit("kitchen counter"),))
    assert print_lf(lf) == ["(", "go", '"', "kitchen", "counter", '"', ")"]


def test_exact_match_is_syntactic(registry):
    a = parse_lf_str('( go " <room> " )', registry)
    b = parse_lf_str('( go " <location> " )', registry)
    assert exact_match(a, a)
    assert not exact_match(a, b)
    # body order matters: the printer preserves stored order
    c1 = parse_lf_str('( find ( λ $1 e ( person $1 ) ( red $1 ) ) )', registry)
    c2 = parse_lf_str('( find ( λ $1 e ( red $1 ) ( person $1 ) ) )', registry)
    assert not exact_match(c1, c2)


def test_tokenizer_splits_glued_tokens():
    assert tokenize_lf('(go "<room>")') == ["(", "go", '"', "<room>", '"', ")"]


def test_corpus_round_trip(registry, corpus_pairs):
    for pair in corpus_pairs:
        tokens = print_lf(pair.lf)
        assert parse_lf(tokens, registry) == pair.lf


# -- property tests ----------------------------------------------------------

_PREDS = ["go", "bring", "find", "is_a", "at", "person", "red", "on_top_of"]


def _lf_strategy(registry):
    leaf_literals = st.sampled_from(["apple", "kitchen counter", "bob"]).map(StringLit)
    leaf_classes = st.sampled_from(["object", "location", "room"]).map(ClassToken)

    def extend(children):
        unary = st.sampled_from(["person", "red", "largest", "go", "say", "count", "find"])
        binary = st.sampled_from(["is_a", "at", "on_top_of", "name", "bring", "guide"])
        apps = st.one_of(
            st.tuples(unary, st.tuples(children)),
            st.tuples(binary, st.tuples(children, children)),
        ).map(lambda t: Application(t[0], tuple(t[1])))
        lams = st.tuples(
            st.sampled_from(["$1", "$2"]), st.lists(children, min_size=1, max_size=3)
        ).map(lambda t: Lambda(t[0], "e", tuple(t[1])))
        return st.one_of(apps, lams)

    return st.recursive(st.one_of(leaf_literals, leaf_classes), extend, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(lf=_lf_strategy(None))
def test_round_trip_property(lf):
    permissive = PredicateRegistry.permissive()
    tokens = print_lf(lf)
    assert parse_lf(tokens, permissive, require_closed=False) == lf


@settings(max_examples=100, deadline=None)
@given(lf=_lf_strategy(None))
def test_printer_determinism(lf):
    assert print_lf(lf) == print_lf(lf)
