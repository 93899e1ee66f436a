"""Lambda-calculus logical forms: AST, tokenizer, parser, canonical printer.

A logical form is one of:

* an application ``( pred arg ... )`` of a registered predicate,
* a lambda abstraction ``( λ $1 e form ... )`` whose body is a list of
  one or more forms joined by implicit conjunction,
* a bound variable ``$1``, ``$2``, ...,
* a quoted string literal ``" kitchen counter "``,
* a quoted class token ``" <object> "``.

The serialized form is a flat sequence of space-separated tokens in which
parentheses and quotation marks are tokens of their own. ``parse_lf`` and
``print_lf`` round-trip: ``parse_lf(print_lf(lf)) == lf``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

LAMBDA = "λ"
TYPE_MARKER = "e"

_VAR_RE = re.compile(r"^\$[1-9][0-9]*$")
_CLASS_TOKEN_RE = re.compile(r"^<([a-z_][a-z0-9_]*)>$")

# Quote glyph variants normalized to plain ASCII '"' on input. The two-char
# TeX forms must be replaced before single chars.
_QUOTE_VARIANTS = ("``", "''", "“", "”", "„", "«", "»")


class LfError(ValueError):
    """Base class for logical-form parse errors. ``index`` is the offending
    token position."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (token {index})")
        self.index = index


class UnbalancedParens(LfError):
    pass


class UnknownPredicate(LfError):
    pass


class ArityMismatch(LfError):
    pass


class DanglingQuote(LfError):
    pass


class UnboundVariable(LfError):
    pass


class LfSyntaxError(LfError):
    """Malformed input that is not one of the more specific errors."""


@dataclass(frozen=True)
class Application:
    predicate: str
    args: tuple["LogicalForm", ...]


@dataclass(frozen=True)
class Lambda:
    var: str
    type_marker: str
    body: tuple["LogicalForm", ...]


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class StringLit:
    text: str


@dataclass(frozen=True)
class ClassToken:
    cls: str


LogicalForm = Union[Application, Lambda, Variable, StringLit, ClassToken]


@dataclass(frozen=True)
class PredicateRegistry:
    """Predicate signatures: name -> (allowed arities, action|descriptive).

    A predicate may admit more than one arity (``bring`` is used with one
    argument for "bring me X" and two for "bring X to Y").
    """

    entries: dict[str, tuple[frozenset[int], str]] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def arities(self, name: str) -> frozenset[int] | None:
        entry = self.entries.get(name)
        return entry[0] if entry else None

    def kind(self, name: str) -> str | None:
        entry = self.entries.get(name)
        return entry[1] if entry else None

    def names(self, kind: str | None = None) -> list[str]:
        return sorted(n for n, (_, k) in self.entries.items() if kind is None or k == kind)

    @classmethod
    def loads(cls, text: str) -> "PredicateRegistry":
        entries: dict[str, tuple[frozenset[int], str]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("//"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"registry line {lineno}: expected name<TAB>arity<TAB>kind")
            name, arity_field, kind = parts
            if kind not in ("action", "descriptive"):
                raise ValueError(f"registry line {lineno}: kind must be action|descriptive")
            try:
                arities = frozenset(int(a) for a in arity_field.split(","))
            except ValueError as exc:
                raise ValueError(f"registry line {lineno}: bad arity {arity_field!r}") from exc
            if not arities or min(arities) < 0:
                raise ValueError(f"registry line {lineno}: bad arity {arity_field!r}")
            entries[name] = (arities, kind)
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "PredicateRegistry":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        lines = []
        for name in sorted(self.entries):
            arities, kind = self.entries[name]
            lines.append(f"{name}\t{','.join(str(a) for a in sorted(arities))}\t{kind}")
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def permissive(cls) -> "PredicateRegistry":
        """Registry that accepts any predicate at any arity (for trusted
        internal parses; real corpora use an explicit registry)."""
        return _PermissiveRegistry()


class _PermissiveRegistry(PredicateRegistry):
    def __contains__(self, name: str) -> bool:  # pragma: no cover - trivial
        return True

    def arities(self, name: str):
        return None  # interpreted as "anything goes" by the parser


def tokenize_lf(text: str) -> list[str]:
    """Split serialized logical-form text into tokens, normalizing quote
    glyph variants and separating parens/quotes glued to words."""
    for variant in _QUOTE_VARIANTS:
        text = text.replace(variant, ' " ')
    for ch in '()"':
        text = text.replace(ch, f" {ch} ")
    return text.split()


def parse_lf(
    tokens: Iterable[str],
    registry: PredicateRegistry,
    require_closed: bool = True,
) -> LogicalForm:
    """Parse a token sequence into a logical form, arity-checked against
    ``registry``. With ``require_closed`` (the default), a variable not bound
    by an enclosing lambda raises :class:`UnboundVariable`."""
    toks = list(tokens)
    if not toks:
        raise UnbalancedParens("empty input", 0)
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(toks):
            raise UnbalancedParens("unexpected end of input", len(toks))
        tok = toks[pos]
        pos += 1
        return tok

    def parse_form(bound: frozenset[str]) -> LogicalForm:
        nonlocal pos
        start = pos
        tok = take()
        if tok == "(":
            head_index = pos
            head = take()
            if head == LAMBDA:
                var_index = pos
                var = take()
                if not _VAR_RE.match(var):
                    raise LfSyntaxError(f"bad variable {var!r} after {LAMBDA}", var_index)
                marker_index = pos
                marker = take()
                if marker != TYPE_MARKER:
                    raise LfSyntaxError(f"unsupported type marker {marker!r}", marker_index)
                inner = bound | {var}
                body: list[LogicalForm] = []
                while peek() != ")":
                    if peek() is None:
                        raise UnbalancedParens("missing ')'", len(toks))
                    body.append(parse_form(inner))
                take()  # ")"
                if not body:
                    raise LfSyntaxError("empty lambda body", start)
                return Lambda(var, marker, tuple(body))
            if head in ("(", ")", '"'):
                raise LfSyntaxError(f"expected predicate, got {head!r}", head_index)
            if head not in registry:
                raise UnknownPredicate(f"unknown predicate {head!r}", head_index)
            args: list[LogicalForm] = []
            while peek() != ")":
                if peek() is None:
                    raise UnbalancedParens("missing ')'", len(toks))
                args.append(parse_form(bound))
            take()  # ")"
            allowed = registry.arities(head)
            if allowed is not None and len(args) not in allowed:
                raise ArityMismatch(
                    f"{head!r} takes {sorted(allowed)} args, got {len(args)}", head_index
                )
            return Application(head, tuple(args))
        if tok == '"':
            content: list[str] = []
            while peek() not in ('"', None):
                inner_tok = take()
                if inner_tok in ("(", ")"):
                    # a paren before the closing mark means the quote never closed
                    raise DanglingQuote(f"unterminated quote before {inner_tok!r}", start)
                content.append(inner_tok)
            if peek() is None:
                raise DanglingQuote("unterminated quote", start)
            take()  # closing '"'
            if not content:
                raise LfSyntaxError("empty quoted literal", start)
            if len(content) == 1:
                match = _CLASS_TOKEN_RE.match(content[0])
                if match:
                    return ClassToken(match.group(1))
            return StringLit(" ".join(content))
        if _VAR_RE.match(tok):
            if require_closed and tok not in bound:
                raise UnboundVariable(f"variable {tok} is not bound", start)
            return Variable(tok)
        if tok == ")":
            raise UnbalancedParens("unexpected ')'", start)
        raise LfSyntaxError(f"unexpected token {tok!r}", start)

    form = parse_form(frozenset())
    if pos != len(toks):
        raise UnbalancedParens("trailing tokens after form", pos)
    return form


def parse_lf_str(text: str, registry: PredicateRegistry, require_closed: bool = True) -> LogicalForm:
    return parse_lf(tokenize_lf(text), registry, require_closed=require_closed)


def print_lf(lf: LogicalForm) -> list[str]:
    """Canonical token sequence: one token per paren/quote/symbol, body order
    preserved, variables never renamed."""
    out: list[str] = []

    def emit(form: LogicalForm) -> None:
        if isinstance(form, Application):
            out.append("(")
            out.append(form.predicate)
            for arg in form.args:
                emit(arg)
            out.append(")")
        elif isinstance(form, Lambda):
            out.extend(("(", LAMBDA, form.var, form.type_marker))
            for part in form.body:
                emit(part)
            out.append(")")
        elif isinstance(form, Variable):
            out.append(form.name)
        elif isinstance(form, ClassToken):
            out.extend(('"', f"<{form.cls}>", '"'))
        elif isinstance(form, StringLit):
            out.append('"')
            out.extend(form.text.split())
            out.append('"')
        else:
            raise TypeError(f"not a logical form: {form!r}")

    emit(lf)
    return out


def lf_to_str(lf: LogicalForm) -> str:
    return " ".join(print_lf(lf))


def exact_match(a: LogicalForm, b: LogicalForm) -> bool:
    """Purely syntactic equality over canonical token sequences."""
    return print_lf(a) == print_lf(b)


def free_variables(lf: LogicalForm) -> set[str]:
    free: set[str] = set()

    def walk(form: LogicalForm, bound: frozenset[str]) -> None:
        if isinstance(form, Application):
            for arg in form.args:
                walk(arg, bound)
        elif isinstance(form, Lambda):
            inner = bound | {form.var}
            for part in form.body:
                walk(part, inner)
        elif isinstance(form, Variable):
            if form.name not in bound:
                free.add(form.name)

    walk(lf, frozenset())
    return free


def class_tokens(lf: LogicalForm) -> list[str]:
    """Class names of every class token, in canonical print order."""
    found: list[str] = []

    def walk(form: LogicalForm) -> None:
        if isinstance(form, Application):
            for arg in form.args:
                walk(arg)
        elif isinstance(form, Lambda):
            for part in form.body:
                walk(part)
        elif isinstance(form, ClassToken):
            found.append(form.cls)

    walk(lf)
    return found


STRUCTURAL_TOKENS = {"(", ")", '"', TYPE_MARKER}


def structural_token_fraction(token_seqs: Iterable[list[str]]) -> float:
    """Fraction of tokens that are parentheses, quotation marks, or variable
    type markers, over a collection of serialized logical forms."""
    total = 0
    structural = 0
    for seq in token_seqs:
        for tok in seq:
            total += 1
            if tok in STRUCTURAL_TOKENS:
                structural += 1
    return structural / total if total else 0.0
