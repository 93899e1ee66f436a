"""Robot knowledge base: named entities grouped by class.

Snapshots are immutable; ``add_entity`` returns a new snapshot with the
version counter bumped. Reads never lock. Surface forms are stored
lowercase and whitespace-normalized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)

_warned_ambiguous: set[tuple] = set()  # one warning per (surface, classes)


class UnknownClass(KeyError):
    pass


def normalize_surface(surface: str | Sequence[str]) -> str:
    if not isinstance(surface, str):
        surface = " ".join(surface)
    return " ".join(surface.lower().split())


@dataclass(frozen=True)
class Ontology:
    classes: tuple[str, ...]  # declaration order; drives ambiguity tie-breaks
    entities: Mapping[str, frozenset[str]]
    version: int = 0

    def __post_init__(self):
        for cls in self.classes:
            if cls not in self.entities:
                object.__setattr__(
                    self, "entities", {**self.entities, cls: frozenset()}
                )

    @property
    def max_span_len(self) -> int:
        longest = 1
        for surfaces in self.entities.values():
            for s in surfaces:
                longest = max(longest, len(s.split()))
        return longest

    def lookup_span(self, tokens: Sequence[str]) -> str | None:
        """Class of an exact (case-insensitive) entity match, or None.

        When the surface is listed under several classes the first-declared
        class wins; the ambiguity is logged.
        """
        if not tokens:
            return None
        surface = normalize_surface(tokens)
        matches = [cls for cls in self.classes if surface in self.entities[cls]]
        if not matches:
            return None
        if len(matches) > 1:
            key = (surface, tuple(matches))
            if key not in _warned_ambiguous:
                _warned_ambiguous.add(key)
                log.warning(
                    "surface %r is in classes %s; using %r", surface, matches, matches[0]
                )
        return matches[0]

    def add_entity(self, cls: str, surface: str | Sequence[str]) -> "Ontology":
        if cls not in self.classes:
            raise UnknownClass(cls)
        normalized = normalize_surface(surface)
        if not normalized:
            raise ValueError("empty surface form")
        if normalized in self.entities[cls]:
            return self
        entities = dict(self.entities)
        entities[cls] = self.entities[cls] | {normalized}
        return Ontology(self.classes, entities, self.version + 1)

    def surfaces(self, cls: str) -> list[str]:
        if cls not in self.classes:
            raise UnknownClass(cls)
        return sorted(self.entities[cls])

    @classmethod
    def from_pairs(cls, classes: Iterable[str], pairs: Iterable[tuple[str, str]]) -> "Ontology":
        declared = tuple(classes)
        entities: dict[str, set[str]] = {c: set() for c in declared}
        for c, surface in pairs:
            if c not in entities:
                raise UnknownClass(c)
            entities[c].add(normalize_surface(surface))
        return cls(declared, {c: frozenset(s) for c, s in entities.items()})

    @classmethod
    def loads(cls, text: str) -> "Ontology":
        classes: list[str] = []
        entities: dict[str, set[str]] = {}
        current: str | None = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("//"):
                continue
            if line.startswith("#class"):
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(f"ontology line {lineno}: expected '#class <name>'")
                current = parts[1]
                if current not in entities:
                    classes.append(current)
                    entities[current] = set()
                continue
            if current is None:
                raise ValueError(f"ontology line {lineno}: entity before any #class header")
            entities[current].add(normalize_surface(line))
        return cls(tuple(classes), {c: frozenset(s) for c, s in entities.items()})

    @classmethod
    def load(cls, path: str | Path) -> "Ontology":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        lines: list[str] = []
        for cls_name in self.classes:
            lines.append(f"#class {cls_name}")
            lines.extend(sorted(self.entities[cls_name]))
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")
