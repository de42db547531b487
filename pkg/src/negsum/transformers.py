"""Transformer algebra: symbolic expressions over per-outcome state
transformers, plus their concrete relational semantics over finite
per-agent state spaces.

Expressions are normalized on construction: concatenations are flattened,
unions are flattened/deduplicated (stored as frozensets, so equality is
modulo commutativity and idempotence), and star of the identity collapses
to the identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import StateSpaceMismatch, UnboundAtomic, ParseError

Tag = tuple[str, str]  # (atom id, result name)


# ---------------------------------------------------------------------------
# Symbolic expressions
# ---------------------------------------------------------------------------

class TransformerExpr:
    """Base class; instances are immutable and hashable."""

    __slots__ = ()

    def atoms(self) -> frozenset[Tag]:
        raise NotImplementedError

    def __repr__(self):
        return f"<expr {format_expr(self)}>"


@dataclass(frozen=True, repr=False)
class Identity(TransformerExpr):
    __slots__ = ()

    def atoms(self):
        return frozenset()


@dataclass(frozen=True, repr=False)
class Atomic(TransformerExpr):
    tag: Tag

    def atoms(self):
        return frozenset([self.tag])


@dataclass(frozen=True, repr=False)
class Concat(TransformerExpr):
    parts: tuple[TransformerExpr, ...]

    def atoms(self):
        return frozenset().union(*(p.atoms() for p in self.parts))


@dataclass(frozen=True, repr=False)
class Union(TransformerExpr):
    parts: frozenset[TransformerExpr]

    def atoms(self):
        return frozenset().union(*(p.atoms() for p in self.parts))


@dataclass(frozen=True, repr=False)
class Star(TransformerExpr):
    inner: TransformerExpr

    def atoms(self):
        return self.inner.atoms()


IDENTITY = Identity()


def concat_expr(*parts: TransformerExpr) -> TransformerExpr:
    """Concatenation, flattened; the identity is the neutral element."""
    flat: list[TransformerExpr] = []
    for p in parts:
        if isinstance(p, Concat):
            flat.extend(p.parts)
        elif isinstance(p, Identity):
            continue
        else:
            flat.append(p)
    if not flat:
        return IDENTITY
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


def union_expr(*parts: TransformerExpr) -> TransformerExpr:
    """Union, flattened and deduplicated."""
    flat: set[TransformerExpr] = set()
    for p in parts:
        if isinstance(p, Union):
            flat.update(p.parts)
        else:
            flat.add(p)
    if not flat:
        raise ValueError("empty union")
    if len(flat) == 1:
        return next(iter(flat))
    return Union(frozenset(flat))


def star_expr(inner: TransformerExpr) -> TransformerExpr:
    if isinstance(inner, Identity):
        return IDENTITY
    if isinstance(inner, Star):
        return inner
    return Star(inner)


# ---------------------------------------------------------------------------
# Printing and parsing
# ---------------------------------------------------------------------------
#
# Grammar (ASCII fallbacks "U" for the union sign and "." for the middle dot
# are accepted on input):
#
#   ATOM   := id "." result
#   EXPR   := term ("∪" term)*
#   term   := factor+            juxtaposition = concatenation, "·" optional
#   factor := ATOM | "(" EXPR ")" | factor "*"

def format_expr(e: TransformerExpr) -> str:
    if isinstance(e, Identity):
        return "id"
    if isinstance(e, Atomic):
        return f"{e.tag[0]}.{e.tag[1]}"
    if isinstance(e, Star):
        body = format_expr(e.inner)
        if not isinstance(e.inner, Atomic):
            body = f"({body})"
        return body + "*"
    if isinstance(e, Concat):
        out = []
        for p in e.parts:
            s = format_expr(p)
            if isinstance(p, Union):
                s = f"({s})"
            out.append(s)
        return "·".join(out)
    if isinstance(e, Union):
        return " ∪ ".join(sorted(format_expr(p) for p in e.parts))
    raise TypeError(f"not an expression: {e!r}")


_RESERVED = set("()*·. \t\n∪")


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()*·.∪":
            tokens.append(c)
            i += 1
        else:
            j = i
            while j < len(text) and text[j] not in _RESERVED:
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse_expr(self) -> TransformerExpr:
        terms = [self.parse_term()]
        while self.peek() in ("∪", "U"):
            self.take()
            terms.append(self.parse_term())
        return union_expr(*terms)

    def parse_term(self) -> TransformerExpr:
        factors = [self.parse_factor()]
        while True:
            tok = self.peek()
            if tok in ("·", "."):
                self.take()
                factors.append(self.parse_factor())
            elif tok is not None and tok not in (")", "∪", "U"):
                factors.append(self.parse_factor())
            else:
                break
        return concat_expr(*factors)

    def parse_factor(self) -> TransformerExpr:
        tok = self.take()
        if tok is None:
            raise ParseError("unexpected end of expression")
        if tok == "(":
            inner = self.parse_expr()
            if self.take() != ")":
                raise ParseError("missing closing parenthesis")
            e = inner
        elif tok == "id":
            e = IDENTITY
        elif tok not in _RESERVED and tok not in (")", "*"):
            if self.peek() != ".":
                raise ParseError(f"expected '.' after atom id {tok!r}")
            self.take()
            result = self.take()
            if result is None or result in _RESERVED:
                raise ParseError(f"missing result name after {tok!r}.")
            e = Atomic((tok, result))
        else:
            raise ParseError(f"unexpected token {tok!r}")
        while self.peek() == "*":
            self.take()
            e = star_expr(e)
        return e


def parse_expr(text: str) -> TransformerExpr:
    parser = _ExprParser(_tokenize(text))
    expr = parser.parse_expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at token {parser.peek()!r}")
    return expr


# ---------------------------------------------------------------------------
# Concrete relations
# ---------------------------------------------------------------------------

StateSpace = Mapping[str, tuple[str, ...]]  # agent -> nonempty state list

Assignment = tuple[str, ...]  # states aligned with a party tuple


@dataclass(frozen=True)
class Rel:
    """A relation over the local states of `parties` (ordered tuple).

    Semantically a P-transformer: agents outside `parties` are left
    unchanged when the relation is expanded to the global state space.
    """

    parties: tuple[str, ...]
    pairs: frozenset[tuple[Assignment, Assignment]]

    def is_left_total(self, space: StateSpace) -> bool:
        entries = {p[0] for p in self.pairs}
        domain = itertools.product(*(space[a] for a in self.parties))
        return all(tuple(q) in entries for q in domain)

    def __repr__(self):
        return f"Rel({list(self.parties)}, {len(self.pairs)} pairs)"


def identity_rel(parties: Iterable[str] = ()) -> Rel:
    """Identity over the given parties; with no parties it is the neutral
    element of concatenation (the all-agents identity once expanded)."""
    parties = tuple(parties)
    if not parties:
        return Rel((), frozenset({((), ())}))
    raise ValueError("use full_identity for a nonempty party set")


def full_identity(space: StateSpace, parties: Iterable[str]) -> Rel:
    parties = tuple(parties)
    pairs = frozenset(
        (tuple(q), tuple(q)) for q in itertools.product(*(space[a] for a in parties))
    )
    return Rel(parties, pairs)


def _expand(rel: Rel, space: StateSpace, parties: tuple[str, ...]) -> Rel:
    """Expand `rel` to the larger party tuple, threading absent agents
    unchanged (the P-transformer law)."""
    if rel.parties == parties:
        return rel
    missing = [a for a in parties if a not in rel.parties]
    if set(rel.parties) - set(parties):
        raise StateSpaceMismatch(f"cannot shrink {rel.parties} to {parties}")
    pos = {a: i for i, a in enumerate(rel.parties)}
    out = set()
    for entry, exit_ in rel.pairs:
        for extra in itertools.product(*(space[a] for a in missing)):
            extra_map = dict(zip(missing, extra))
            new_entry = tuple(
                entry[pos[a]] if a in pos else extra_map[a] for a in parties
            )
            new_exit = tuple(
                exit_[pos[a]] if a in pos else extra_map[a] for a in parties
            )
            out.add((new_entry, new_exit))
    return Rel(parties, frozenset(out))


def _merged_parties(space: StateSpace, a: Rel, b: Rel) -> tuple[str, ...]:
    combined = set(a.parties) | set(b.parties)
    missing = combined - set(space)
    if missing:
        raise StateSpaceMismatch(f"agents {sorted(missing)} not in the state space")
    return tuple(agent for agent in space if agent in combined)


def concat(a: Rel, b: Rel, space: StateSpace) -> Rel:
    """Relational composition over the joint party set."""
    parties = _merged_parties(space, a, b)
    ea, eb = _expand(a, space, parties), _expand(b, space, parties)
    by_entry: dict[Assignment, set[Assignment]] = {}
    for q, q2 in eb.pairs:
        by_entry.setdefault(q, set()).add(q2)
    pairs = {
        (q, q2)
        for q, mid in ea.pairs
        for q2 in by_entry.get(mid, ())
    }
    return Rel(parties, frozenset(pairs))


def union(a: Rel, b: Rel, space: StateSpace) -> Rel:
    parties = _merged_parties(space, a, b)
    ea, eb = _expand(a, space, parties), _expand(b, space, parties)
    return Rel(parties, ea.pairs | eb.pairs)


def star(a: Rel, space: StateSpace) -> Rel:
    """Least fixpoint of r -> id ∪ (a ∘ r); terminates on the finite
    relation lattice. Iterations are capped at the lattice height."""
    parties = a.parties
    ident = full_identity(space, parties) if parties else identity_rel()
    size = 1
    for p in parties:
        size *= len(space[p])
    cap = size * size + 1
    current = ident
    for _ in range(cap):
        step = concat(a, current, space)
        merged = union(ident, step, space)
        if merged.pairs == current.pairs:
            return current
        current = merged
    raise AssertionError("star fixpoint not reached within the lattice height bound")


def globalize(rel: Rel, space: StateSpace) -> Rel:
    """Expand a local relation to the full agent set of the space."""
    return _expand(rel, space, tuple(space))


def eval_expr(
    expr: TransformerExpr,
    interp: Mapping[Tag, Rel],
    space: StateSpace,
    _cache: dict | None = None,
) -> Rel:
    """Structural fold of the expression into a concrete relation.
    Subexpressions repeat heavily in eliminator output, so results are
    memoized per call."""
    cache = {} if _cache is None else _cache
    hit = cache.get(expr)
    if hit is not None:
        return hit
    if isinstance(expr, Identity):
        out = identity_rel()
    elif isinstance(expr, Atomic):
        try:
            out = interp[expr.tag]
        except KeyError:
            raise UnboundAtomic(expr.tag) from None
    elif isinstance(expr, Concat):
        out = identity_rel()
        for part in expr.parts:
            out = concat(out, eval_expr(part, interp, space, cache), space)
    elif isinstance(expr, Union):
        rels = [eval_expr(p, interp, space, cache) for p in expr.parts]
        out = rels[0]
        for r in rels[1:]:
            out = union(out, r, space)
    elif isinstance(expr, Star):
        out = star(eval_expr(expr.inner, interp, space, cache), space)
    else:
        raise TypeError(f"not an expression: {expr!r}")
    cache[expr] = out
    return out


def rels_equal(a: Rel, b: Rel, space: StateSpace) -> bool:
    """Denotational equality: compare after expansion to the full agent set."""
    return globalize(a, space).pairs == globalize(b, space).pairs


def expr_equal(
    a: TransformerExpr,
    b: TransformerExpr,
    spaces: Iterable[tuple[StateSpace, Mapping[Tag, Rel]]],
) -> bool:
    """True iff the two expressions evaluate to the same relation under
    every provided interpretation. Evidence of equality, not a proof."""
    for space, interp in spaces:
        if not rels_equal(eval_expr(a, interp, space), eval_expr(b, interp, space), space):
            return False
    return True
