"""Exact rational-complex scalars and polynomial arithmetic.

Scalars are pairs of fractions (re + im*i), so ring operations never
round. Two containers cover the engine's needs: Poly1 is a dense
univariate polynomial used for coefficient functions of a Hamiltonian,
PolyN is a sparse multivariate polynomial keyed by exponent tuples.

A recursive-descent parser over one shared grammar

    expr   := ('+'|'-')? term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' exponent)?
    base   := name | number | 'i' | '(' expr ')'

builds polynomials, scalars, or (through adapters supplied by other
modules) noncommutative words and matrix expressions. Division is only
admitted by nonzero constants, so the result stays in the ring.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

NEG_INF = float("-inf")


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"expected int or Fraction, got {type(v).__name__}")


class RationalComplex:
    """Exact complex scalar with Fraction real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _as_fraction(re)
        self.im = _as_fraction(im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def is_integer(self) -> bool:
        return self.im == 0 and self.re.denominator == 1

    def conjugate(self) -> "RationalComplex":
        return RationalComplex(self.re, -self.im)

    def inverse(self) -> "RationalComplex":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return RationalComplex(self.re / n, -self.im / n)

    @staticmethod
    def _coerce(v):
        if isinstance(v, RationalComplex):
            return v
        if isinstance(v, (int, Fraction)):
            return RationalComplex(v)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = RationalComplex(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        return f"RationalComplex({self.re!r}, {self.im!r})"

    def __str__(self):
        return scalar_to_text(self)


def as_scalar(v) -> RationalComplex:
    """Coerce int, Fraction or RationalComplex to RationalComplex.

    Floats are rejected on purpose: the exact layer must never absorb
    rounding error silently.
    """
    c = RationalComplex._coerce(v)
    if c is None:
        raise TypeError(f"not an exact scalar: {v!r}")
    return c


RC_ZERO = RationalComplex(0)
RC_ONE = RationalComplex(1)
RC_I = RationalComplex(0, 1)


def scalar_to_text(c: RationalComplex) -> str:
    """Render a scalar in the grammar the parser accepts."""
    if c.is_zero():
        return "0"
    parts = []
    if c.re != 0:
        parts.append(str(c.re))
    if c.im != 0:
        if c.im == 1:
            im_text = "i"
        elif c.im == -1:
            im_text = "-i"
        else:
            im_text = f"{c.im}*i"
        if parts and c.im > 0:
            parts.append(f"+ {im_text}")
        elif parts:
            parts.append(f"- {im_text.lstrip('-')}")
        else:
            parts.append(im_text)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# dense univariate polynomials


class Poly1:
    """Dense univariate polynomial; coefficient list never has a zero tail."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_scalar(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls) -> "Poly1":
        return cls(())

    @classmethod
    def const(cls, c) -> "Poly1":
        return cls((c,))

    @classmethod
    def x(cls) -> "Poly1":
        return cls((0, 1))

    def degree(self):
        """Degree as an int; the zero polynomial reports -inf."""
        if not self.coeffs:
            return NEG_INF
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coeff(self, k: int) -> RationalComplex:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return RC_ZERO

    def __add__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = Poly1.const(other)
        if not isinstance(other, Poly1):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly1(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = Poly1.const(other)
        if not isinstance(other, Poly1):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly1(self.coeff(k) - other.coeff(k) for k in range(n))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly1(-c for c in self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            s = as_scalar(other)
            return Poly1(c * s for c in self.coeffs)
        if not isinstance(other, Poly1):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Poly1.zero()
        out = [RC_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for a, ca in enumerate(self.coeffs):
            if ca.is_zero():
                continue
            for b, cb in enumerate(other.coeffs):
                out[a + b] = out[a + b] + ca * cb
        return Poly1(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        s = as_scalar(other)
        return self * s.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        out = Poly1.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = Poly1.const(other)
        if not isinstance(other, Poly1):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def eval_scalar(self, v):
        """Horner evaluation; exact for exact inputs, complex otherwise."""
        if isinstance(v, (int, Fraction, RationalComplex)):
            acc = RC_ZERO
            for c in reversed(self.coeffs):
                acc = acc * v + c
            return acc
        z = complex(v)
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + complex(c)
        return acc

    def to_text(self, var: str = "x") -> str:
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c.is_zero():
                continue
            if k == 0:
                mono = ""
            elif k == 1:
                mono = var
            else:
                mono = f"{var}^{k}"
            terms.append((c, mono))
        return _format_terms(terms)

    def __repr__(self):
        return f"Poly1<{self.to_text()}>"


def eval_matrix(p: Poly1, M: np.ndarray) -> np.ndarray:
    """Evaluate p at a square matrix by Horner's rule.

    A constant polynomial maps to c*I, the zero polynomial to the zero
    matrix of matching shape.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("eval_matrix needs a square matrix")
    d = M.shape[0]
    acc = np.zeros((d, d), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for c in reversed(p.coeffs):
        acc = acc @ M + complex(c) * eye
    return acc


# ---------------------------------------------------------------------------
# sparse multivariate polynomials


class PolyN:
    """Sparse multivariate polynomial: exponent tuple -> scalar."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        if nvars < 1:
            raise ValueError("PolyN needs at least one variable")
        self.nvars = nvars
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != nvars or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent tuple {exps} for {nvars} variables")
                c = as_scalar(c)
                if not c.is_zero():
                    prev = clean.get(exps)
                    c = c if prev is None else prev + c
                    if c.is_zero():
                        clean.pop(exps, None)
                    else:
                        clean[exps] = c
        self.terms = clean

    @classmethod
    def zero(cls, nvars: int) -> "PolyN":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, c) -> "PolyN":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "PolyN":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "PolyN"):
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = PolyN.const(self.nvars, other)
        if not isinstance(other, PolyN):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, RC_ZERO) + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        p = PolyN(self.nvars)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = PolyN(self.nvars)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = PolyN.const(self.nvars, other)
        if not isinstance(other, PolyN):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            s = as_scalar(other)
            if s.is_zero():
                return PolyN.zero(self.nvars)
            p = PolyN(self.nvars)
            p.terms = {e: c * s for e, c in self.terms.items()}
            return p
        if not isinstance(other, PolyN):
            return NotImplemented
        self._check(other)
        out: dict = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, RC_ZERO) + ca * cb
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        p = PolyN(self.nvars)
        p.terms = out
        return p

    __rmul__ = __mul__

    def __truediv__(self, other):
        s = as_scalar(other)
        return self * s.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        out = PolyN.const(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = PolyN.const(self.nvars, other)
        if not isinstance(other, PolyN):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def total_degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def coeff(self, exps: Sequence[int]) -> RationalComplex:
        return self.terms.get(tuple(exps), RC_ZERO)

    def eval_exact(self, point: Sequence) -> RationalComplex:
        vals = [as_scalar(v) for v in point]
        if len(vals) != self.nvars:
            raise ValueError("point length mismatch")
        acc = RC_ZERO
        for e, c in self.terms.items():
            t = c
            for v, k in zip(vals, e):
                if k:
                    t = t * v**k
            acc = acc + t
        return acc

    def eval_complex(self, point: Sequence) -> complex:
        vals = [complex(v) for v in point]
        if len(vals) != self.nvars:
            raise ValueError("point length mismatch")
        acc = 0j
        for e, c in self.terms.items():
            t = complex(c)
            for v, k in zip(vals, e):
                if k:
                    t *= v**k
            acc += t
        return acc

    def to_text(self, names: Sequence[str]) -> str:
        if len(names) != self.nvars:
            raise ValueError("need one name per variable")
        ordered = sorted(self.terms, key=lambda e: (sum(e), e), reverse=True)
        terms = []
        for e in ordered:
            pieces = []
            for name, k in zip(names, e):
                if k == 1:
                    pieces.append(name)
                elif k > 1:
                    pieces.append(f"{name}^{k}")
            terms.append((self.terms[e], "*".join(pieces)))
        return _format_terms(terms)

    def __repr__(self):
        names = [f"x{i}" for i in range(self.nvars)]
        return f"PolyN<{self.to_text(names)}>"


def partial(p: PolyN, i: int) -> PolyN:
    """Exact partial derivative with respect to variable i."""
    if not 0 <= i < p.nvars:
        raise ValueError(f"variable index {i} out of range")
    out: dict = {}
    for e, c in p.terms.items():
        k = e[i]
        if k == 0:
            continue
        ne = list(e)
        ne[i] = k - 1
        out[tuple(ne)] = c * k
    q = PolyN(p.nvars)
    q.terms = out
    return q


def degree_profile(p: PolyN, subset: Iterable[int]) -> int:
    """Max joint degree of p in the given variable subset (0 if p = 0)."""
    idx = sorted(set(subset))
    for i in idx:
        if not 0 <= i < p.nvars:
            raise ValueError(f"variable index {i} out of range")
    if not p.terms:
        return 0
    return max(sum(e[i] for i in idx) for e in p.terms)


# ---------------------------------------------------------------------------
# term formatting shared by Poly1 and PolyN


def _format_terms(terms) -> str:
    # terms: ordered list of (RationalComplex, monomial text); "" = constant
    if not terms:
        return "0"
    rendered = []
    for c, mono in terms:
        if c.is_real():
            neg = c.re < 0
            mag = abs(c.re)
            if mono == "":
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
        elif c.re == 0:
            neg = c.im < 0
            mag = abs(c.im)
            head = "i" if mag == 1 else f"{mag}*i"
            body = head if mono == "" else f"{head}*{mono}"
        else:
            # mixed scalar, keep it parenthesized so the text reparses
            neg = False
            head = f"({scalar_to_text(c)})"
            body = head if mono == "" else f"{head}*{mono}"
        rendered.append(("-" if neg else "+", body))
    sign, body = rendered[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in rendered[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# shared expression parser


class ExprError(ValueError):
    """Parse or name-resolution failure, with the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN = re.compile(r"(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/^(),])|(\S)")


def tokenize(text: str):
    toks = []
    for m in _TOKEN.finditer(text):
        pos = m.start()
        if m.group(1):
            toks.append(("num", Fraction(m.group(1)), pos))
        elif m.group(2):
            toks.append(("name", m.group(2), pos))
        elif m.group(3):
            toks.append(("op", m.group(3), pos))
        else:
            raise ExprError(f"unexpected character {m.group(4)!r}", pos)
    toks.append(("end", "", len(text)))
    return toks


class ExpressionParser:
    """Grammar driver; the adapter supplies the target algebra."""

    def __init__(self, text: str, adapter):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.adapter = adapter

    def _peek(self):
        return self.toks[self.i]

    def _next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        v = self._expr()
        kind, val, pos = self._peek()
        if kind != "end":
            raise ExprError(f"unexpected token {val!r}", pos)
        return v

    def _expr(self):
        kind, val, pos = self._peek()
        negate = False
        if kind == "op" and val in "+-":
            self._next()
            negate = val == "-"
        v = self._term()
        if negate:
            v = self.adapter.neg(v)
        while True:
            kind, val, pos = self._peek()
            if kind == "op" and val in "+-":
                self._next()
                rhs = self._term()
                v = self.adapter.sub(v, rhs) if val == "-" else self.adapter.add(v, rhs)
            else:
                return v

    def _term(self):
        v = self._factor()
        while True:
            kind, val, pos = self._peek()
            if kind == "op" and val in "*/":
                self._next()
                rhs = self._factor()
                if val == "*":
                    v = self.adapter.mul(v, rhs)
                else:
                    v = self.adapter.div(v, rhs, pos)
            else:
                return v

    def _factor(self):
        v = self._base()
        kind, val, pos = self._peek()
        if kind == "op" and val == "^":
            self._next()
            kind, val, pos = self._next()
            if kind == "num":
                if val.denominator != 1 or val < 0:
                    raise ExprError("exponent must be a nonnegative integer", pos)
                return self.adapter.pow(v, int(val), pos)
            if kind == "name" and hasattr(self.adapter, "pow_name"):
                return self.adapter.pow_name(v, val, pos)
            raise ExprError("exponent must be a nonnegative integer", pos)
        return v

    def _base(self):
        kind, val, pos = self._next()
        if kind == "num":
            return self.adapter.const(val)
        if kind == "name":
            if val == "i":
                return self.adapter.imag_unit(pos)
            nk, nv, npos = self._peek()
            if nk == "op" and nv == "(" and hasattr(self.adapter, "call"):
                self._next()
                args = [self._expr()]
                while True:
                    k2, v2, p2 = self._next()
                    if k2 == "op" and v2 == ",":
                        args.append(self._expr())
                    elif k2 == "op" and v2 == ")":
                        break
                    else:
                        raise ExprError("expected ',' or ')'", p2)
                return self.adapter.call(val, args, pos)
            return self.adapter.name(val, pos)
        if kind == "op" and val == "(":
            v = self._expr()
            k2, v2, p2 = self._next()
            if not (k2 == "op" and v2 == ")"):
                raise ExprError("expected ')'", p2)
            return v
        raise ExprError(f"unexpected token {val!r}" if val else "unexpected end of input", pos)


class _PolyNAdapter:
    def __init__(self, names: Sequence[str], params: Mapping[str, RationalComplex] | None):
        self.nvars = len(names)
        self.index = {n: k for k, n in enumerate(names)}
        self.params = dict(params or {})
        if "i" in self.index or "i" in self.params:
            raise ValueError("'i' is reserved for the imaginary unit")

    def const(self, f: Fraction) -> PolyN:
        return PolyN.const(self.nvars, Fraction(f))

    def imag_unit(self, pos: int) -> PolyN:
        return PolyN.const(self.nvars, RC_I)

    def name(self, n: str, pos: int) -> PolyN:
        if n in self.index:
            return PolyN.var(self.nvars, self.index[n])
        if n in self.params:
            return PolyN.const(self.nvars, self.params[n])
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
        if b.total_degree() > 0:
            raise ExprError("division only by nonzero constants", pos)
        c = b.coeff((0,) * b.nvars)
        if c.is_zero():
            raise ExprError("division by zero", pos)
        return a * c.inverse()

    def pow(self, a, n, pos):
        return a**n


def parse_poly(
    text: str,
    names: Sequence[str],
    params: Mapping[str, object] | None = None,
) -> PolyN:
    """Parse a commutative polynomial over the named variables.

    Any identifier in params is substituted by its exact scalar value;
    every other identifier must be a declared variable.
    """
    fixed = {k: as_scalar(v) for k, v in (params or {}).items()}
    return ExpressionParser(text, _PolyNAdapter(names, fixed)).parse()


class _ScalarAdapter:
    def __init__(self, env: Mapping[str, object] | None):
        self.env = {k: v for k, v in (env or {}).items()}

    def const(self, f: Fraction):
        return RationalComplex(f)

    def imag_unit(self, pos: int):
        return RC_I

    def _lookup(self, n: str, pos: int):
        if n not in self.env:
            raise ExprError(f"unknown name {n!r}", pos)
        return self.env[n]

    def name(self, n: str, pos: int):
        return as_scalar(self._lookup(n, pos))

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def div(self, a, b, pos):
        if b.is_zero():
            raise ExprError("division by zero", pos)
        return a / b

    def pow(self, a, n, pos):
        return a**n

    def pow_name(self, a, n, pos):
        v = self._lookup(n, pos)
        if isinstance(v, RationalComplex):
            if not v.is_integer():
                raise ExprError(f"exponent {n!r} must be an integer", pos)
            v = int(v.re)
        if not isinstance(v, int):
            raise ExprError(f"exponent {n!r} must be an integer", pos)
        if v < 0 and a.is_zero():
            raise ExprError("zero base with negative exponent", pos)
        return a**v


def parse_scalar(text: str, env: Mapping[str, object] | None = None) -> RationalComplex:
    """Parse an exact scalar; env may bind names to scalars or ints.

    Integer-valued names may also appear as exponents, which is how
    difference-operator stencils use q^s on an integer grid.
    """
    return ExpressionParser(text, _ScalarAdapter(env)).parse()
