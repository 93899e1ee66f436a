"""Interactive parse loop: anonymize, decode, deanonymize with clarification
dialogue, and mutate the session ontology on demand.

Input/output are injectable so scripted sessions drive the same code path as
a human at the terminal.
"""

from __future__ import annotations

from typing import Callable

from ..anonymizer import anonymize
from ..deanonymizer import ResolverAborted, SlotQuery, deanonymize_lf, interpret_answer
from ..logic import LfError, lf_to_str, parse_lf
from ..neural.beam import decode_beam
from ..ontology import Ontology, UnknownClass

TOP_K = 3  # beam candidates displayed per command


def make_interactive_resolver(input_fn: Callable[[str], str], output_fn: Callable[[str], None]):
    def resolver(query: SlotQuery) -> str:
        raw = input_fn(query.prompt + " ")
        if raw is None or not raw.strip():
            raise ResolverAborted(f"no answer for <{query.cls}>")
        return interpret_answer(query, raw)

    return resolver


def repl(
    model,
    ont: Ontology,
    registry=None,
    input_fn: Callable[[str], str] = input,
    output_fn: Callable[[str], None] = print,
) -> Ontology:
    """Run the session loop until EOF or /quit; returns the final ontology
    snapshot (dialogue answers may have grown it)."""
    from ..logic import PredicateRegistry

    if registry is None:
        registry = PredicateRegistry.permissive()
    resolver = make_interactive_resolver(input_fn, output_fn)
    output_fn("type a command, /ontology add <class> <surface>, or /quit")
    while True:
        try:
            line = input_fn("> ")
        except EOFError:
            break
        if line is None:
            break
        line = line.strip()
        if not line:
            continue
        if line == "/quit":
            break
        if line.startswith("/ontology"):
            parts = line.split()
            if len(parts) >= 4 and parts[1] == "add":
                try:
                    ont = ont.add_entity(parts[2], " ".join(parts[3:]))
                    output_fn(f"added {' '.join(parts[3:])!r} to <{parts[2]}> (version {ont.version})")
                except UnknownClass as exc:
                    output_fn(f"unknown class: {exc}")
            else:
                output_fn("usage: /ontology add <class> <surface words>")
            continue

        ac = anonymize(line.split(), ont)
        output_fn("anonymized: " + " ".join(ac.tokens))
        hyps = decode_beam(model, list(ac.tokens))
        for rank, hyp in enumerate(hyps[:TOP_K], start=1):
            output_fn(f"  [{rank}] {hyp.score:8.4f}  {' '.join(hyp.tokens)}")
        if not hyps:
            output_fn("could not understand (no decode)")
            continue
        try:
            lf = parse_lf(hyps[0].tokens, registry)
        except LfError:
            output_fn("could not understand (top hypothesis is not a valid form)")
            continue
        try:
            filled, ont = deanonymize_lf(lf, ac, resolver, ont)
        except ResolverAborted:
            output_fn("okay, dropping that command")
            continue
        output_fn("parsed: " + lf_to_str(filled))
    return ont
