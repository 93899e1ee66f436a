"""Turn a predicted anonymized logical form into a fully specified one.

Each class token in the predicted form must be bound to a surface span. When
a class occurs exactly once in both the form and the replacement map the
binding is unambiguous and filled silently. Everything else (multiple
occurrences, count mismatches, missing spans) goes through a slot-filling
dialogue: the resolver is asked one :class:`SlotQuery` per unresolved token
and may answer with a candidate or free text. Free-text answers unknown to
the ontology are added to it, so the entity anonymizes properly next time.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .anonymizer import AnonymizedCommand
from .logic import Application, ClassToken, Lambda, LogicalForm, StringLit, print_lf
from .ontology import Ontology

log = logging.getLogger(__name__)


class ResolverAborted(RuntimeError):
    """The user declined to fill a slot; the command should be rejected or
    confirmed manually."""


@dataclass
class SlotQuery:
    cls: str
    candidates: list[str]
    prompt: str
    slot_path: int  # index of the class token within the form's token sequence


SlotResolver = Callable[[SlotQuery], str]


def make_prompt(cls: str, candidates: list[str]) -> str:
    if candidates:
        options = " ".join(f"[{i}] {c}" for i, c in enumerate(candidates, start=1))
        return f"Which <{cls}> did you mean? {options} (or type a new value):"
    return f"Which <{cls}> did you mean? (type a value):"


def interpret_answer(query: SlotQuery, raw: str) -> str:
    """A bare number picks that candidate; anything else is free text."""
    answer = raw.strip()
    if answer.isdigit() and query.candidates:
        idx = int(answer)
        if 1 <= idx <= len(query.candidates):
            return query.candidates[idx - 1]
    return answer


@dataclass
class ScriptedResolver:
    """Fixed answer sequence, consumed in slot order. For tests and batch
    runs; the REPL supplies the interactive equivalent."""

    answers: list[str]
    queries: list[SlotQuery] = field(default_factory=list)

    def __call__(self, query: SlotQuery) -> str:
        self.queries.append(query)
        if not self.answers:
            raise ResolverAborted(f"no scripted answer left for <{query.cls}>")
        return interpret_answer(query, self.answers.pop(0))


def _class_token_positions(tokens: list[str]) -> list[int]:
    positions = []
    for i, tok in enumerate(tokens):
        if tok.startswith("<") and tok.endswith(">") and 0 < i < len(tokens) - 1:
            if tokens[i - 1] == '"' and tokens[i + 1] == '"':
                positions.append(i)
    return positions


def deanonymize_lf(
    lf: LogicalForm,
    ac: AnonymizedCommand,
    resolver: SlotResolver,
    ont: Ontology,
) -> tuple[LogicalForm, Ontology]:
    """Replace every class token in ``lf`` with a string literal.

    Returns the filled form and the (possibly updated) ontology snapshot.
    Raises :class:`ResolverAborted` if the resolver gives an empty answer.
    """
    tokens = print_lf(lf)
    positions = _class_token_positions(tokens)

    lf_counts: Counter[str] = Counter()
    occurrence_order: list[str] = []
    for pos in positions:
        cls = tokens[pos][1:-1]
        lf_counts[cls] += 1
        occurrence_order.append(cls)

    map_spans: dict[str, list[str]] = {}
    for rep in ac.replacements:
        map_spans.setdefault(rep.cls, []).append(" ".join(rep.span))

    for cls, spans in map_spans.items():
        if lf_counts[cls] == 0:
            log.warning(
                "replacement map has %d <%s> span(s) but the form has none; ignoring %s",
                len(spans),
                cls,
                spans,
            )

    # One chosen span per class-token occurrence, in print order.
    chosen: list[str] = []
    ont_out = ont
    seen_per_class: Counter[str] = Counter()
    for occ_index, cls in enumerate(occurrence_order):
        candidates = map_spans.get(cls, [])
        if lf_counts[cls] == 1 and len(candidates) == 1:
            chosen.append(candidates[0])
            continue
        query = SlotQuery(
            cls=cls,
            candidates=list(candidates),
            prompt=make_prompt(cls, candidates),
            slot_path=positions[occ_index],
        )
        answer = resolver(query)
        if answer is None or not str(answer).strip():
            raise ResolverAborted(f"no answer for <{cls}>")
        answer = " ".join(str(answer).lower().split())
        if ont_out.lookup_span(answer.split()) != cls and answer not in ont_out.entities.get(cls, ()):
            ont_out = ont_out.add_entity(cls, answer)
        chosen.append(answer)
        seen_per_class[cls] += 1

    filled_iter = iter(chosen)

    def fill(form: LogicalForm) -> LogicalForm:
        if isinstance(form, Application):
            return Application(form.predicate, tuple(fill(a) for a in form.args))
        if isinstance(form, Lambda):
            return Lambda(form.var, form.type_marker, tuple(fill(b) for b in form.body))
        if isinstance(form, ClassToken):
            return StringLit(next(filled_iter))
        return form

    return fill(lf), ont_out
