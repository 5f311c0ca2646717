"""Noncommutative words and quadratic rewrite systems.

Expressions are exact linear combinations of words over a finite
generator alphabet. A rewrite system fixes a total order on the
generators and, for every adjacent out-of-order pair, one rule of the
quadratic shape

    g_a * g_b  ->  c * g_b * g_a  +  (linear terms)  +  (constant)

which is the only shape the engine admits: the swapped pair strictly
lowers the inversion count and everything else is shorter, so
normalization terminates. Normal forms are the canonical certificates
behind the exact closure checks; everything here stays in the rational
complex field.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .poly import (
    RC_ZERO,
    ExpressionParser,
    ExprError,
    RationalComplex,
    as_scalar,
    scalar_to_text,
)

Word = tuple


class RewriteBudgetError(RuntimeError):
    """Raised when normalization exceeds its step budget.

    Hitting this means the rule set does not terminate (or the input is
    far outside the intended degree range); it is a caller bug, not a
    recoverable condition.
    """


class NcExpression:
    """Linear combination of words, word -> exact scalar."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, object] | None = None):
        clean = {}
        if terms:
            for w, c in terms.items():
                w = tuple(w)
                c = as_scalar(c)
                if not c.is_zero():
                    prev = clean.get(w)
                    c = c if prev is None else prev + c
                    if c.is_zero():
                        clean.pop(w, None)
                    else:
                        clean[w] = c
        self.terms = clean

    @classmethod
    def zero(cls) -> "NcExpression":
        return cls()

    @classmethod
    def const(cls, c) -> "NcExpression":
        return cls({(): c})

    @classmethod
    def gen(cls, name: str) -> "NcExpression":
        return cls({(name,): 1})

    @classmethod
    def word(cls, names: Iterable[str], c=1) -> "NcExpression":
        return cls({tuple(names): c})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = NcExpression.const(other)
        if not isinstance(other, NcExpression):
            return NotImplemented
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, RC_ZERO) + c
            if s.is_zero():
                out.pop(w, None)
            else:
                out[w] = s
        e = NcExpression()
        e.terms = out
        return e

    __radd__ = __add__

    def __neg__(self):
        e = NcExpression()
        e.terms = {w: -c for w, c in self.terms.items()}
        return e

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = NcExpression.const(other)
        if not isinstance(other, NcExpression):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            s = as_scalar(other)
            if s.is_zero():
                return NcExpression.zero()
            e = NcExpression()
            e.terms = {w: c * s for w, c in self.terms.items()}
            return e
        if not isinstance(other, NcExpression):
            return NotImplemented
        out: dict = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                w = wa + wb
                s = out.get(w, RC_ZERO) + ca * cb
                if s.is_zero():
                    out.pop(w, None)
                else:
                    out[w] = s
        e = NcExpression()
        e.terms = out
        return e

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("word powers must be nonnegative integers")
        out = NcExpression.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = NcExpression.const(other)
        if not isinstance(other, NcExpression):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def max_word_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        ordered = sorted(self.terms, key=lambda w: (len(w), w), reverse=True)
        parts = []
        for w in ordered:
            c = self.terms[w]
            mono = "*".join(w)
            if not w:
                body = f"({scalar_to_text(c)})" if not c.is_real() else str(c.re)
                sign = ""
            elif c == 1:
                body, sign = mono, ""
            elif c == -1:
                body, sign = mono, "-"
            elif c.is_real():
                sign = "-" if c.re < 0 else ""
                body = f"{abs(c.re)}*{mono}"
            else:
                sign = ""
                body = f"({scalar_to_text(c)})*{mono}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = first_sign + first_body
        for sign, body in parts[1:]:
            out += f" - {body}" if sign == "-" else f" + {body}"
        return out

    def __repr__(self):
        return f"NcExpression<{self.to_text()}>"


class RewriteSystem:
    """Generator order plus one quadratic rule per inverted pair."""

    def __init__(self, generators: Sequence[str], rules: Mapping[tuple, NcExpression]):
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generator names")
        if "i" in self.generators or "1" in self.generators:
            raise ValueError("'i' and '1' are reserved names")
        self.order = {g: k for k, g in enumerate(self.generators)}
        self.rules = {}
        for (a, b), rhs in rules.items():
            if a not in self.order or b not in self.order:
                raise ValueError(f"rule over unknown generators ({a}, {b})")
            if self.order[a] <= self.order[b]:
                raise ValueError(f"rule pair ({a}, {b}) is not out of order")
            self._check_rhs(a, b, rhs)
            self.rules[(a, b)] = rhs
        for j, b in enumerate(self.generators):
            for a in self.generators[j + 1 :]:
                if (a, b) not in self.rules:
                    raise ValueError(f"missing rule for pair ({a}, {b})")

    def _check_rhs(self, a: str, b: str, rhs: NcExpression):
        for w in rhs.terms:
            for g in w:
                if g not in self.order:
                    raise ValueError(f"rule for ({a}, {b}) mentions unknown {g!r}")
            if len(w) > 2:
                raise ValueError(f"rule for ({a}, {b}) is not quadratic")
            if len(w) == 2 and w != (b, a):
                raise ValueError(
                    f"rule for ({a}, {b}) must swap to ({b}, {a}), got {w}"
                )

    def find_redex(self, word: Word, strategy: str) -> int | None:
        idx = self.order
        positions = range(len(word) - 1)
        if strategy == "rightmost":
            positions = reversed(positions)
        elif strategy != "leftmost":
            raise ValueError(f"unknown strategy {strategy!r}")
        for k in positions:
            if idx[word[k]] > idx[word[k + 1]]:
                return k
        return None

    def is_normal(self, word: Word) -> bool:
        return self.find_redex(word, "leftmost") is None

    # constructors for the builtin presentations -------------------------

    @classmethod
    def q_oscillator(cls, q) -> "RewriteSystem":
        """X*Y = q*Y*X + 1 over the order Y < X."""
        q = as_scalar(q)
        if q.is_zero():
            raise ValueError("q must be nonzero")
        rhs = NcExpression({("Y", "X"): q, (): 1})
        return cls(("Y", "X"), {("X", "Y"): rhs})

    @classmethod
    def weyl(cls, q) -> "RewriteSystem":
        """X*Y = q*Y*X, the constant-free degeneration."""
        q = as_scalar(q)
        if q.is_zero():
            raise ValueError("q must be nonzero")
        rhs = NcExpression({("Y", "X"): q})
        return cls(("Y", "X"), {("X", "Y"): rhs})

    @classmethod
    def aw_z(cls, q, C1, C2, C3) -> "RewriteSystem":
        """Cyclic q-commutator triple over the order Y < Z < X.

        The defining relations X*Y - q*Y*X = Z + C3, Y*Z - q*Z*Y = X + C1
        and Z*X - q*X*Z = Y + C2 are solved for the inverted pairs XY,
        ZY and XZ.
        """
        q = as_scalar(q)
        if q.is_zero():
            raise ValueError("q must be nonzero")
        C1, C2, C3 = as_scalar(C1), as_scalar(C2), as_scalar(C3)
        qi = q.inverse()
        rules = {
            ("X", "Y"): NcExpression({("Y", "X"): q, ("Z",): 1, (): C3}),
            ("Z", "Y"): NcExpression({("Y", "Z"): qi, ("X",): -qi, (): -qi * C1}),
            ("X", "Z"): NcExpression({("Z", "X"): qi, ("Y",): -qi, (): -qi * C2}),
        }
        return cls(("Y", "Z", "X"), rules)


def normal_form(
    e: NcExpression,
    rs: RewriteSystem,
    strategy: str = "leftmost",
    budget: int = 10**6,
) -> NcExpression:
    """Rewrite until no adjacent pair is out of order.

    The strategy only picks which redex fires first; with quadratic
    rules both orders land on the same normal form, which the tests
    exercise as a confluence check.
    """
    for w in e.terms:
        for g in w:
            if g not in rs.order:
                raise ValueError(f"expression mentions unknown generator {g!r}")
    done: dict = {}
    pending = list(e.terms.items())
    steps = 0
    while pending:
        word, coeff = pending.pop()
        pos = rs.find_redex(word, strategy)
        if pos is None:
            s = done.get(word, RC_ZERO) + coeff
            if s.is_zero():
                done.pop(word, None)
            else:
                done[word] = s
            continue
        steps += 1
        if steps > budget:
            raise RewriteBudgetError(f"exceeded {budget} rewrite steps")
        rule = rs.rules[(word[pos], word[pos + 1])]
        head, tail = word[:pos], word[pos + 2 :]
        for sub, c in rule.terms.items():
            pending.append((head + sub + tail, coeff * c))
    out = NcExpression()
    out.terms = done
    return out


def commutator_nf(a: NcExpression, b: NcExpression, rs: RewriteSystem, **kw) -> NcExpression:
    """Normal form of a*b - b*a."""
    return normal_form(a * b - b * a, rs, **kw)


def ad_power_nf(h: str, x: NcExpression, n: int, rs: RewriteSystem, **kw) -> NcExpression:
    """Normal form of the n-fold nested commutator [h,[h,...,[h,x]]]."""
    if h not in rs.order:
        raise ValueError(f"unknown generator {h!r}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    acc = normal_form(x, rs, **kw)
    hh = NcExpression.gen(h)
    for _ in range(n):
        acc = commutator_nf(hh, acc, rs, **kw)
    return acc


class _NcAdapter:
    def __init__(self, generators: Sequence[str], params: Mapping[str, RationalComplex]):
        self.gens = set(generators)
        self.params = dict(params)
        overlap = self.gens & set(self.params)
        if overlap:
            raise ValueError(f"names are both generators and parameters: {sorted(overlap)}")

    def const(self, f: Fraction):
        return NcExpression.const(Fraction(f))

    def imag_unit(self, pos: int):
        return NcExpression.const(RationalComplex(0, 1))

    def name(self, n: str, pos: int):
        if n in self.gens:
            return NcExpression.gen(n)
        if n in self.params:
            return NcExpression.const(self.params[n])
        raise ExprError(f"unknown name {n!r}", pos)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def div(self, a, b, pos):
        if b.max_word_length() > 0:
            raise ExprError("division only by nonzero constants", pos)
        c = b.terms.get((), RC_ZERO)
        if c.is_zero():
            raise ExprError("division by zero", pos)
        return a * c.inverse()

    def pow(self, a, n, pos):
        return a**n


def parse_nc(
    text: str,
    generators: Sequence[str],
    params: Mapping[str, object] | None = None,
) -> NcExpression:
    """Parse a noncommutative expression; products keep their order."""
    fixed = {k: as_scalar(v) for k, v in (params or {}).items()}
    return ExpressionParser(text, _NcAdapter(generators, fixed)).parse()
