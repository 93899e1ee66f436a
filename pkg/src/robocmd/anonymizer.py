"""Command anonymization: replace ontology-known spans with class tokens.

Matching is greedy longest-match left to right over lowercased tokens, so a
multi-word entity like "kitchen counter" is replaced as one span rather than
as "kitchen" plus a stray "counter". The replacement map records enough to
reconstruct the (normalized) input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class InconsistentPositions(ValueError):
    pass


@dataclass(frozen=True)
class Replacement:
    cls: str
    span: tuple[str, ...]  # original surface tokens, normalized
    position: int  # index of the class token in the anonymized sequence


@dataclass(frozen=True)
class AnonymizedCommand:
    tokens: tuple[str, ...]
    replacements: tuple[Replacement, ...]

    def spans_for(self, cls: str) -> list[str]:
        """Surface spans recorded for a class, in command order."""
        return [" ".join(r.span) for r in self.replacements if r.cls == cls]

    def command_str(self) -> str:
        return " ".join(self.tokens)


def anonymize(command: Sequence[str], ont) -> AnonymizedCommand:
    """Replace every ontology-known span with its class token. Tokens without
    a match pass through; a command with zero matches is returned unchanged
    with an empty replacement list."""
    if not command:
        raise ValueError("empty command")
    tokens = [t for tok in command for t in tok.lower().split()]
    max_len = ont.max_span_len
    out: list[str] = []
    replacements: list[Replacement] = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = False
        for length in range(min(max_len, n - i), 0, -1):
            span = tokens[i : i + length]
            cls = ont.lookup_span(span)
            if cls is not None:
                out.append(f"<{cls}>")
                replacements.append(Replacement(cls, tuple(span), len(out) - 1))
                i += length
                matched = True
                break
        if not matched:
            out.append(tokens[i])
            i += 1
    return AnonymizedCommand(tuple(out), tuple(replacements))


def deanonymize_command(ac: AnonymizedCommand) -> tuple[str, ...]:
    """Inverse of :func:`anonymize`: splice every recorded span back in place
    of its class token."""
    last = -1
    for rep in ac.replacements:
        if rep.position <= last:
            raise InconsistentPositions(f"positions not strictly increasing at {rep.position}")
        if rep.position >= len(ac.tokens):
            raise InconsistentPositions(f"position {rep.position} beyond token length")
        if ac.tokens[rep.position] != f"<{rep.cls}>":
            raise InconsistentPositions(
                f"token at {rep.position} is {ac.tokens[rep.position]!r}, not <{rep.cls}>"
            )
        last = rep.position
    by_position = {rep.position: rep for rep in ac.replacements}
    out: list[str] = []
    for idx, tok in enumerate(ac.tokens):
        rep = by_position.get(idx)
        if rep is None:
            out.append(tok)
        else:
            out.extend(rep.span)
    return tuple(out)
