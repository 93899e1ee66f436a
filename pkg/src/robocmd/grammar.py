"""Synchronous grammar: annotated CFG that expands to (command, logical form)
pairs, plus an Earley chart parser used by the grammar-oracle baseline.

File format
-----------
Rules are ``$lhs = alt | alt | ...`` with ``|`` separating alternatives. An
alternative is a whitespace-separated mix of terminals and ``$``-prefixed
nonterminals and may be empty. A semantic template follows ``:`` on an
alternative::

    $bring = $vbbring me the $object : ( bring ( λ $1 e ( is_a $1 " {$object} " ) ) )

Template placeholders ``{$nt}`` name rhs nonterminals that expand to plain
surface strings ("shallow" annotation): ontology-class leaves or synonym
lists. Directives: ``#category N`` starts a category section (the first lhs
in the section is that category's start symbol; rules before any category
header are shared), ``#class $nt classname`` binds a nonterminal to an
ontology class. ``//`` starts a comment line.

Expansion and parsing
---------------------
``enumerate_anonymized`` walks every derivation, producing class tokens for
ontology nonterminals; ``sample_pair`` draws one concrete pair with entities
sampled from an ontology, the same entity appearing in the command and in
the logical form. ``chart_parse`` inverts generation: it recovers the first
derivation (by rule order) of a command and returns its instantiated
template, or None when the command is outside the grammar.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .logic import LogicalForm, PredicateRegistry, lf_to_str, parse_lf, tokenize_lf
from .ontology import Ontology

log = logging.getLogger(__name__)

MAX_DEPTH = 32  # recursion bound for enumeration termination


class GrammarError(ValueError):
    pass


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownNonterminal(GrammarError):
    pass


class PlaceholderNotInRhs(GrammarError):
    pass


class DeepTemplate(GrammarError):
    """Template placeholder under a nonterminal that does not expand purely
    to surface strings."""


class AmbiguousPlaceholder(GrammarError):
    """Templated alternative mentions the same nonterminal twice; the
    placeholder binding would be ambiguous."""


class MixedSemantics(GrammarError):
    """A nonterminal whose alternatives disagree on whether they carry
    semantics, or an alternative with more than one semantic child."""


class NonterminatingGrammar(GrammarError):
    pass


class EmptyOntologyClass(GrammarError):
    pass


def is_nonterminal(symbol: str) -> bool:
    return symbol.startswith("$")


def _is_placeholder(token: str) -> bool:
    return token.startswith("{$") and token.endswith("}")


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[str, ...]
    template: Optional[tuple[str, ...]]  # tokenized, with {$nt} placeholder tokens
    category: int
    line: int

    def placeholders(self) -> list[str]:
        if self.template is None:
            return []
        return [t[1:-1] for t in self.template if _is_placeholder(t)]


@dataclass(frozen=True)
class CorpusPair:
    command: tuple[str, ...]
    lf: LogicalForm
    category: int
    anonymized: bool

    @property
    def command_str(self) -> str:
        return " ".join(self.command)

    @property
    def lf_str(self) -> str:
        return lf_to_str(self.lf)


@dataclass
class SynchronousGrammar:
    productions: list[Production]
    starts: dict[int, str]  # category -> start nonterminal
    class_nts: dict[str, str]  # nonterminal -> ontology class
    registry: PredicateRegistry = field(default_factory=PredicateRegistry.permissive)

    def __post_init__(self):
        self._by_lhs: dict[str, list[Production]] = {}
        for prod in self.productions:
            self._by_lhs.setdefault(prod.lhs, []).append(prod)

    def prods(self, nt: str) -> list[Production]:
        return self._by_lhs.get(nt, [])

    def nonterminals(self) -> set[str]:
        return set(self._by_lhs) | set(self.class_nts)

    @property
    def categories(self) -> list[int]:
        return sorted(self.starts)

    def annotation_count(self, category: int | None = None) -> int:
        return sum(
            1
            for p in self.productions
            if p.template is not None and (category is None or p.category == category)
        )

    # -- analysis ---------------------------------------------------------

    def is_surface(self, nt: str) -> bool:
        """True when every expansion of ``nt`` is a plain string: an
        ontology-class leaf or (recursively) terminals and surface
        nonterminals, with no templates anywhere."""
        return self._surface(nt, frozenset())

    def _surface(self, nt: str, visiting: frozenset[str]) -> bool:
        if nt in self.class_nts:
            return True
        if nt in visiting:
            return False
        prods = self.prods(nt)
        if not prods:
            return False
        inner = visiting | {nt}
        for prod in prods:
            if prod.template is not None:
                return False
            for sym in prod.rhs:
                if is_nonterminal(sym) and not self._surface(sym, inner):
                    return False
        return True

    def semantic_count(self, nt: str) -> int:
        """0 or 1: number of semantic templates every derivation of ``nt``
        passes through. Raises :class:`MixedSemantics` on disagreement."""
        return self._sem(nt, frozenset())

    def _sem(self, nt: str, visiting: frozenset[str]) -> int:
        if nt in self.class_nts or nt in visiting:
            return 0
        counts = set()
        inner = visiting | {nt}
        for prod in self.prods(nt):
            if prod.template is not None:
                child_sem = sum(self._sem(s, inner) for s in prod.rhs if is_nonterminal(s))
                if child_sem:
                    raise MixedSemantics(
                        f"line {prod.line}: templated rule for {nt} has a semantic child"
                    )
                counts.add(1)
            else:
                total = sum(self._sem(s, inner) for s in prod.rhs if is_nonterminal(s))
                if total > 1:
                    raise MixedSemantics(
                        f"line {prod.line}: {nt} alternative has {total} semantic children"
                    )
                counts.add(total)
        if len(counts) > 1:
            raise MixedSemantics(f"{nt}: alternatives disagree on carrying semantics")
        return counts.pop() if counts else 0


# -- loading ----------------------------------------------------------------


def _parse_template(text: str, line: int) -> tuple[str, ...]:
    tokens = tuple(tokenize_lf(text))
    if not tokens:
        raise GrammarSyntaxError("empty template after ':'", line)
    return tokens


def load_grammar(text: str, registry: PredicateRegistry | None = None) -> SynchronousGrammar:
    """Parse and validate a grammar file. With a registry, templates are
    additionally arity-checked by instantiating placeholders with stand-in
    values and parsing the result."""
    productions: list[Production] = []
    starts: dict[int, str] = {}
    class_nts: dict[str, str] = {}
    category = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if line.startswith("#"):
            parts = line.split()
            if parts[0] == "#category":
                if len(parts) != 2 or not parts[1].isdigit():
                    raise GrammarSyntaxError("expected '#category N'", lineno)
                category = int(parts[1])
                continue
            if parts[0] == "#class":
                if len(parts) != 3 or not is_nonterminal(parts[1]):
                    raise GrammarSyntaxError("expected '#class $nt classname'", lineno)
                class_nts[parts[1]] = parts[2]
                continue
            raise GrammarSyntaxError(f"unknown directive {parts[0]!r}", lineno)
        if "=" not in line:
            raise GrammarSyntaxError("expected '$lhs = ...'", lineno)
        lhs_text, rhs_text = line.split("=", 1)
        lhs = lhs_text.strip()
        if not is_nonterminal(lhs) or " " in lhs:
            raise GrammarSyntaxError(f"bad lhs {lhs!r}", lineno)
        if lhs in class_nts:
            raise GrammarSyntaxError(f"{lhs} is an ontology-class nonterminal", lineno)
        for alt_text in rhs_text.split("|"):
            if ":" in alt_text:
                rhs_part, template_text = alt_text.split(":", 1)
                template = _parse_template(template_text.strip(), lineno)
            else:
                rhs_part, template = alt_text, None
            rhs = tuple(rhs_part.split())
            productions.append(Production(lhs, rhs, template, category, lineno))
        if category > 0 and category not in starts:
            starts[category] = lhs

    grammar = SynchronousGrammar(productions, starts, class_nts)
    _validate(grammar, registry)
    if registry is not None:
        grammar.registry = registry
    return grammar


def load_grammar_file(
    path: str | Path, registry: PredicateRegistry | None = None
) -> SynchronousGrammar:
    return load_grammar(Path(path).read_text(encoding="utf-8"), registry)


def _validate(grammar: SynchronousGrammar, registry: PredicateRegistry | None) -> None:
    known = grammar.nonterminals()
    for prod in grammar.productions:
        for sym in prod.rhs:
            if is_nonterminal(sym) and sym not in known:
                raise UnknownNonterminal(f"line {prod.line}: {sym} has no productions")
        if prod.template is None:
            continue
        rhs_nts = [s for s in prod.rhs if is_nonterminal(s)]
        for ph in prod.placeholders():
            if ph not in known:
                raise UnknownNonterminal(f"line {prod.line}: placeholder {ph} undefined")
            if ph not in rhs_nts:
                raise PlaceholderNotInRhs(f"line {prod.line}: {ph} not in rhs")
            if rhs_nts.count(ph) > 1:
                raise AmbiguousPlaceholder(
                    f"line {prod.line}: {ph} appears {rhs_nts.count(ph)} times in rhs"
                )
            if not grammar.is_surface(ph):
                raise DeepTemplate(
                    f"line {prod.line}: {ph} does not expand to surface strings"
                )
    for nt in sorted(grammar.nonterminals()):
        if nt not in grammar.class_nts:
            grammar.semantic_count(nt)
    if registry is not None:
        for prod in grammar.productions:
            if prod.template is not None:
                _check_template_parses(grammar, prod, registry)


def _stand_in(grammar: SynchronousGrammar, nt: str) -> str:
    """First surface expansion of a surface nonterminal, for validation."""
    if nt in grammar.class_nts:
        return f"<{grammar.class_nts[nt]}>"
    prod = grammar.prods(nt)[0]
    parts = []
    for sym in prod.rhs:
        parts.append(_stand_in(grammar, sym) if is_nonterminal(sym) else sym)
    return " ".join(p for p in parts if p)


def _instantiate(template: tuple[str, ...], bindings: dict[str, str]) -> list[str]:
    out: list[str] = []
    for tok in template:
        if _is_placeholder(tok):
            out.extend(bindings[tok[1:-1]].split())
        else:
            out.append(tok)
    return out


def _check_template_parses(
    grammar: SynchronousGrammar, prod: Production, registry: PredicateRegistry
) -> None:
    bindings = {ph: _stand_in(grammar, ph) for ph in prod.placeholders()}
    tokens = _instantiate(prod.template, bindings)
    try:
        parse_lf(tokens, registry)
    except ValueError as exc:
        raise GrammarError(f"line {prod.line}: template does not parse: {exc}") from exc


# -- exhaustive anonymized expansion ----------------------------------------


def _expand_nt(grammar: SynchronousGrammar, nt: str, depth: int) -> Iterator[tuple[tuple[str, ...], Optional[list[str]]]]:
    """Yield (command tokens, semantic tokens or None) for every derivation
    of ``nt``, ontology-class nonterminals producing their class token."""
    if depth > MAX_DEPTH:
        raise NonterminatingGrammar(f"depth bound {MAX_DEPTH} exceeded at {nt}")
    if nt in grammar.class_nts:
        yield (f"<{grammar.class_nts[nt]}>",), None
        return
    prods = grammar.prods(nt)
    if not prods:
        raise UnknownNonterminal(nt)
    for prod in prods:
        yield from _expand_production(grammar, prod, depth)


def _expand_production(grammar: SynchronousGrammar, prod: Production, depth: int):
    placeholder_set = set(prod.placeholders())

    def walk(idx: int, acc: list):
        if idx == len(prod.rhs):
            yield list(acc)
            return
        sym = prod.rhs[idx]
        if not is_nonterminal(sym):
            acc.append(((sym,), None, sym))
            yield from walk(idx + 1, acc)
            acc.pop()
        else:
            for tokens, sem in _expand_nt(grammar, sym, depth + 1):
                acc.append((tokens, sem, sym))
                yield from walk(idx + 1, acc)
                acc.pop()

    for children in walk(0, []):
        tokens = tuple(t for child_tokens, _, _ in children for t in child_tokens)
        if prod.template is not None:
            bindings: dict[str, str] = {}
            for child_tokens, _, sym in children:
                if sym in placeholder_set and sym not in bindings:
                    bindings[sym] = " ".join(child_tokens)
            sem = _instantiate(prod.template, bindings)
        else:
            sems = [s for _, s, _ in children if s is not None]
            sem = sems[0] if sems else None
        yield tokens, sem


def enumerate_anonymized(grammar: SynchronousGrammar) -> list[CorpusPair]:
    """All distinct anonymized (command, logical form) pairs, in deterministic
    order. A command derivable in several categories is assigned to the first
    category producing it; later duplicates are dropped."""
    if grammar.annotation_count() == 0:
        log.warning("grammar has no templated productions; enumeration is empty")
        return []
    pairs: list[CorpusPair] = []
    seen: set[tuple[str, ...]] = set()
    for cat in grammar.categories:
        start = grammar.starts[cat]
        if grammar.semantic_count(start) == 0:
            log.warning("category %d start %s never reaches a template", cat, start)
            continue
        for tokens, sem in _expand_nt(grammar, start, 0):
            if tokens in seen or sem is None:
                continue
            seen.add(tokens)
            lf = parse_lf(sem, grammar.registry)
            pairs.append(CorpusPair(tokens, lf, cat, anonymized=True))
    return pairs


def corpus_stats(pairs: Sequence[CorpusPair], grammar: SynchronousGrammar | None = None) -> dict:
    """Per-category summary: command counts, distinct logical forms (assigned
    to the first category where they appear), annotation counts, average
    lengths, and the structural-token fraction of the forms."""
    from .logic import print_lf, structural_token_fraction

    categories = sorted({p.category for p in pairs})
    lf_first_cat: dict[str, int] = {}
    for pair in pairs:
        lf_first_cat.setdefault(pair.lf_str, pair.category)
    stats: dict = {"categories": {}, "total": {}}
    all_cmd_lens: list[int] = []
    all_lf_lens: list[int] = []
    for cat in categories:
        cat_pairs = [p for p in pairs if p.category == cat]
        cmd_lens = [len(p.command) for p in cat_pairs]
        lf_lens = [len(print_lf(p.lf)) for p in cat_pairs]
        all_cmd_lens.extend(cmd_lens)
        all_lf_lens.extend(lf_lens)
        n_forms = sum(1 for lf, c in lf_first_cat.items() if c == cat)
        entry = {
            "commands": len(cat_pairs),
            "logical_forms": n_forms,
            "avg_command_len": sum(cmd_lens) / len(cmd_lens) if cmd_lens else 0.0,
            "avg_lf_len": sum(lf_lens) / len(lf_lens) if lf_lens else 0.0,
        }
        if grammar is not None:
            entry["annotations"] = grammar.annotation_count(cat)
        stats["categories"][cat] = entry
    n_forms_total = len(lf_first_cat)
    stats["total"] = {
        "commands": len(pairs),
        "logical_forms": n_forms_total,
        "avg_command_len": sum(all_cmd_lens) / len(all_cmd_lens) if all_cmd_lens else 0.0,
        "avg_lf_len": sum(all_lf_lens) / len(all_lf_lens) if all_lf_lens else 0.0,
        "commands_to_forms_ratio": len(pairs) / n_forms_total if n_forms_total else 0.0,
        "structural_token_fraction": structural_token_fraction(
            print_lf(p.lf) for p in pairs
        ),
    }
    if grammar is not None:
        stats["total"]["annotations"] = grammar.annotation_count()
    return stats


# -- concrete sampling -------------------------------------------------------


def sample_pair(
    grammar: SynchronousGrammar,
    ont: Ontology,
    seed: int,
    category: int | None = None,
) -> CorpusPair:
    """One concrete (command, logical form) pair: uniform choice among
    alternatives at every step, ontology nonterminals expanding to a sampled
    entity used consistently on both sides. Deterministic given the seed."""
    rng = random.Random(seed)
    cats = grammar.categories
    if not cats:
        raise GrammarError("grammar declares no categories")
    cat = category if category is not None else cats[rng.randrange(len(cats))]
    tokens, sem = _sample_nt(grammar, ont, rng, grammar.starts[cat], 0)
    if sem is None:
        raise GrammarError(f"sampled derivation from category {cat} has no template")
    lf = parse_lf(sem, grammar.registry)
    return CorpusPair(tuple(tokens), lf, cat, anonymized=False)


def _sample_nt(
    grammar: SynchronousGrammar, ont: Ontology, rng: random.Random, nt: str, depth: int
) -> tuple[tuple[str, ...], Optional[list[str]]]:
    if depth > MAX_DEPTH:
        raise NonterminatingGrammar(f"depth bound {MAX_DEPTH} exceeded at {nt}")
    if nt in grammar.class_nts:
        cls = grammar.class_nts[nt]
        surfaces = ont.surfaces(cls)
        if not surfaces:
            raise EmptyOntologyClass(cls)
        choice = surfaces[rng.randrange(len(surfaces))]
        return tuple(choice.split()), None
    prods = grammar.prods(nt)
    if not prods:
        raise UnknownNonterminal(nt)
    prod = prods[rng.randrange(len(prods))]
    placeholder_set = set(prod.placeholders())
    tokens: list[str] = []
    bindings: dict[str, str] = {}
    child_sem: Optional[list[str]] = None
    for sym in prod.rhs:
        if not is_nonterminal(sym):
            tokens.append(sym)
            continue
        sub_tokens, sub_sem = _sample_nt(grammar, ont, rng, sym, depth + 1)
        tokens.extend(sub_tokens)
        if sym in placeholder_set and sym not in bindings:
            bindings[sym] = " ".join(sub_tokens)
        if sub_sem is not None:
            child_sem = sub_sem
    if prod.template is not None:
        return tuple(tokens), _instantiate(prod.template, bindings)
    return tuple(tokens), child_sem


# -- Earley chart parsing ----------------------------------------------------


def chart_parse(
    grammar: SynchronousGrammar,
    command: Sequence[str],
    ont: Ontology | None = None,
) -> Optional[LogicalForm]:
    """Logical form of the first derivation of ``command``, or None.

    Ontology-class nonterminals match their class token; with an ontology
    they additionally match any entity surface of the class, so concrete
    commands parse too. Derivation ambiguity is broken by production order,
    then by earliest span end.
    """
    tokens = [t.lower() for t in command]
    if not tokens:
        return None
    for cat in grammar.categories:
        lf = _parse_with_start(grammar, tokens, grammar.starts[cat], ont)
        if lf is not None:
            return lf
    return None


def _class_matches(
    grammar: SynchronousGrammar, tokens: list[str], ont: Ontology | None
) -> dict[tuple[str, int], list[tuple[int, str]]]:
    """(class nonterminal, start) -> [(end, surface value)] in deterministic
    order: class token first, then entity spans sorted by (end, value)."""
    matches: dict[tuple[str, int], list[tuple[int, str]]] = {}
    n = len(tokens)
    for nt, cls in grammar.class_nts.items():
        class_token = f"<{cls}>"
        for i in range(n):
            found: list[tuple[int, str]] = []
            if tokens[i] == class_token:
                found.append((i + 1, class_token))
            if ont is not None and cls in ont.classes:
                entity_hits = []
                for surface in ont.surfaces(cls):
                    parts = surface.split()
                    end = i + len(parts)
                    if end <= n and tokens[i:end] == parts:
                        entity_hits.append((end, surface))
                found.extend(sorted(entity_hits))
            if found:
                matches[(nt, i)] = found
    return matches


def _parse_with_start(
    grammar: SynchronousGrammar,
    tokens: list[str],
    start: str,
    ont: Ontology | None,
) -> Optional[LogicalForm]:
    n = len(tokens)
    class_matches = _class_matches(grammar, tokens, ont)
    prod_ids = {id(p): k for k, p in enumerate(grammar.productions)}

    # item: (prod, dot, origin) with prod identified by index for hashing
    chart: list[list[tuple[int, int, int]]] = [[] for _ in range(n + 1)]
    in_chart: list[set[tuple[int, int, int]]] = [set() for _ in range(n + 1)]
    spans: set[tuple[str, int, int]] = set()
    ends_by: dict[tuple[str, int], list[int]] = {}
    deferred: list[list[tuple[str, int]]] = [[] for _ in range(n + 1)]
    deferred_seen: set[tuple[str, int, int]] = set()
    predicted: list[set[str]] = [set() for _ in range(n + 1)]

    def record_span(nt: str, i: int, j: int) -> None:
        key = (nt, i, j)
        if key in spans:
            return
        spans.add(key)
        ends_by.setdefault((nt, i), []).append(j)

    def add_item(pos: int, prod_idx: int, dot: int, origin: int) -> None:
        item = (prod_idx, dot, origin)
        if item in in_chart[pos]:
            return
        in_chart[pos].add(item)
        chart[pos].append(item)
        prod = grammar.productions[prod_idx]
        # nullable-advance: the next symbol may already be complete as ε here
        if dot < len(prod.rhs):
            sym = prod.rhs[dot]
            if is_nonterminal(sym) and (sym, pos, pos) in spans:
                add_item(pos, prod_idx, dot + 1, origin)

    for k, prod in enumerate(grammar.productions):
        if prod.lhs == start:
            add_item(0, k, 0, 0)

    for pos in range(n + 1):
        for nt, origin in deferred[pos]:
            for prod_idx, dot, item_origin in list(chart[origin]):
                prod = grammar.productions[prod_idx]
                if dot < len(prod.rhs) and prod.rhs[dot] == nt:
                    add_item(pos, prod_idx, dot + 1, item_origin)
        idx = 0
        while idx < len(chart[pos]):
            prod_idx, dot, origin = chart[pos][idx]
            idx += 1
            prod = grammar.productions[prod_idx]
            if dot == len(prod.rhs):
                record_span(prod.lhs, origin, pos)
                for p2, d2, o2 in list(chart[origin]):
                    rhs2 = grammar.productions[p2].rhs
                    if d2 < len(rhs2) and rhs2[d2] == prod.lhs:
                        add_item(pos, p2, d2 + 1, o2)
                continue
            sym = prod.rhs[dot]
            if not is_nonterminal(sym):
                if pos < n and tokens[pos] == sym:
                    add_item(pos + 1, prod_idx, dot + 1, origin)
                continue
            if sym in grammar.class_nts:
                for end, _value in class_matches.get((sym, pos), []):
                    record_span(sym, pos, end)
                    if (sym, pos, end) not in deferred_seen:
                        deferred_seen.add((sym, pos, end))
                        deferred[end].append((sym, pos))
                continue
            if sym not in predicted[pos]:
                predicted[pos].add(sym)
                for k, p in enumerate(grammar.productions):
                    if p.lhs == sym:
                        add_item(pos, k, 0, pos)
            elif (sym, pos, pos) in spans:
                add_item(pos, prod_idx, dot + 1, origin)

    if (start, 0, n) not in spans:
        return None

    for ends in ends_by.values():
        ends.sort()

    tree = _extract(grammar, tokens, spans, ends_by, class_matches, start, 0, n, {})
    if tree is None:
        return None
    node = _find_template_node(tree)
    if node is None:
        return None
    prod, children = node[1], node[2]
    bindings: dict[str, str] = {}
    for sym, child in zip(prod.rhs, children):
        if is_nonterminal(sym) and sym not in bindings:
            bindings[sym] = " ".join(_flatten(child))
    needed = {ph: bindings[ph] for ph in prod.placeholders()}
    sem_tokens = _instantiate(prod.template, needed)
    return parse_lf(sem_tokens, grammar.registry)


def _extract(grammar, tokens, spans, ends_by, class_matches, nt, i, j, memo):
    """First derivation tree of nt over tokens[i:j], by production order then
    earliest child span end. Nodes: ("node", prod, children) /
    ("leaf", nt, value) / ("term", token)."""
    key = (nt, i, j)
    if key in memo:
        return memo[key]
    if nt in grammar.class_nts:
        node = None
        for end, value in class_matches.get((nt, i), []):
            if end == j:
                node = ("leaf", nt, value)
                break
        memo[key] = node
        return node
    if key not in spans:
        memo[key] = None
        return None
    memo[key] = None  # cycle guard
    for prod in grammar.prods(nt):
        children = _match_rhs(grammar, tokens, spans, ends_by, class_matches, prod.rhs, 0, i, j, memo)
        if children is not None:
            node = ("node", prod, children)
            memo[key] = node
            return node
    return None


def _match_rhs(grammar, tokens, spans, ends_by, class_matches, rhs, idx, i, j, memo):
    if idx == len(rhs):
        return [] if i == j else None
    sym = rhs[idx]
    if not is_nonterminal(sym):
        if i < j and tokens[i] == sym:
            rest = _match_rhs(grammar, tokens, spans, ends_by, class_matches, rhs, idx + 1, i + 1, j, memo)
            if rest is not None:
                return [("term", sym)] + rest
        return None
    if sym in grammar.class_nts:
        candidate_ends = [end for end, _ in class_matches.get((sym, i), [])]
    else:
        candidate_ends = ends_by.get((sym, i), [])
    for end in candidate_ends:
        if end > j:
            continue
        child = _extract(grammar, tokens, spans, ends_by, class_matches, sym, i, end, memo)
        if child is None:
            continue
        rest = _match_rhs(grammar, tokens, spans, ends_by, class_matches, rhs, idx + 1, end, j, memo)
        if rest is not None:
            return [child] + rest
    return None


def _flatten(node) -> list[str]:
    kind = node[0]
    if kind == "term":
        return [node[1]]
    if kind == "leaf":
        return node[2].split()
    out: list[str] = []
    for child in node[2]:
        out.extend(_flatten(child))
    return out


def _find_template_node(node):
    if node[0] != "node":
        return None
    if node[1].template is not None:
        return node
    for child in node[2]:
        found = _find_template_node(child)
        if found is not None:
            return found
    return None
