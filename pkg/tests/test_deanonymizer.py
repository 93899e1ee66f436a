import logging

import pytest

from robocmd.anonymizer import anonymize
from robocmd.deanonymizer import (
    ResolverAborted,
    ScriptedResolver,
    deanonymize_lf,
    make_prompt,
)
from robocmd.logic import class_tokens, lf_to_str, parse_lf_str


def test_unique_classes_fill_silently(registry, ontology):
    lf = parse_lf_str(
        '( bring ( λ $1 e ( is_a $1 " <object> " ) ( at $1 " <location> " ) ) )', registry
    )
    ac = anonymize("fetch an apple from the kitchen".split(), ontology)
    resolver = ScriptedResolver([])
    filled, ont2 = deanonymize_lf(lf, ac, resolver, ontology)
    assert resolver.queries == []
    assert lf_to_str(filled) == '( bring ( λ $1 e ( is_a $1 " apple " ) ( at $1 " kitchen " ) ) )'
    assert class_tokens(filled) == []
    assert ont2 is ontology  # nothing added


def test_two_locations_trigger_two_queries(registry, ontology):
    lf = parse_lf_str(
        '( bring ( λ $1 e ( is_a $1 " <object> " ) ( at $1 " <location> " ) ) " <location> " )',
        registry,
    )
    ac = anonymize(
        "move the apple from the kitchen counter to the dining table".split(), ontology
    )
    resolver = ScriptedResolver(["1", "2"])
    filled, _ = deanonymize_lf(lf, ac, resolver, ontology)
    assert len(resolver.queries) == 2
    for query in resolver.queries:
        assert query.cls == "location"
        assert query.candidates == ["kitchen counter", "dining table"]
    assert class_tokens(filled) == []
    assert lf_to_str(filled) == (
        '( bring ( λ $1 e ( is_a $1 " apple " ) ( at $1 " kitchen counter " ) ) '
        '" dining table " )'
    )


def test_missing_map_free_text_adds_to_ontology(registry, ontology):
    lf = parse_lf_str('( follow ( λ $1 e ( person $1 ) ( name $1 " <name> " ) ) )', registry)
    ac = anonymize("follow my friend".split(), ontology)  # no entity matches
    resolver = ScriptedResolver(["bill"])
    filled, ont2 = deanonymize_lf(lf, ac, resolver, ontology)
    assert resolver.queries[0].candidates == []
    assert lf_to_str(filled) == '( follow ( λ $1 e ( person $1 ) ( name $1 " bill " ) ) )'
    assert ont2.lookup_span(["bill"]) == "name"
    assert ont2.version == ontology.version + 1


def test_resolver_abort(registry, ontology):
    lf = parse_lf_str('( go " <room> " )', registry)
    ac = anonymize("go somewhere".split(), ontology)
    with pytest.raises(ResolverAborted):
        deanonymize_lf(lf, ac, ScriptedResolver([]), ontology)


def test_count_mismatch_routes_to_dialogue(registry, ontology):
    # one <location> in the form, two candidate spans in the map
    lf = parse_lf_str('( go " <location> " )', registry)
    ac = anonymize("go from the kitchen counter to the dining table".split(), ontology)
    resolver = ScriptedResolver(["2"])
    filled, _ = deanonymize_lf(lf, ac, resolver, ontology)
    assert len(resolver.queries) == 1
    assert lf_to_str(filled) == '( go " dining table " )'


def test_map_only_classes_warn(registry, ontology, caplog):
    lf = parse_lf_str('( go " <room> " )', registry)
    ac = anonymize("go to the bedroom with the apple".split(), ontology)
    resolver = ScriptedResolver(["bedroom"])
    with caplog.at_level(logging.WARNING):
        filled, _ = deanonymize_lf(lf, ac, resolver, ontology)
    assert class_tokens(filled) == []
    assert any("<object>" in r.message or "object" in r.message for r in caplog.records)


def test_prompt_format():
    prompt = make_prompt("location", ["kitchen counter", "dining table"])
    assert prompt == (
        "Which <location> did you mean? [1] kitchen counter [2] dining table "
        "(or type a new value):"
    )


def test_ontology_version_stable_when_no_addition(registry, ontology):
    lf = parse_lf_str('( go " <location> " )', registry)
    ac = anonymize("go from the sink to the desk".split(), ontology)
    resolver = ScriptedResolver(["sink"])
    _, ont2 = deanonymize_lf(lf, ac, resolver, ontology)
    assert ont2.version == ontology.version
