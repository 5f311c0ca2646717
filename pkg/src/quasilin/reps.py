"""Concrete matrix representations and data-driven structure detection.

Construction side: the truncated ladder pair of the q-deformed
oscillator, the Pauli pair for the cubic commutation relation, the
birth-death difference operator on a linear grid, and a custom-stencil
builder for arbitrary three-term difference operators on a declared
grid.

Detection side: given raw matrices, fit the quadratic closure ansatz
ad_H^2 X = W1(H) X + W2(H) Y + W0(H) (and its dual with the roles of
H and X exchanged), fit the five constants of the cubic tridiagonal
relations, test a sequence of grid points against the three-term grid
recurrence, and measure residuals of arbitrary textual relations over
a representation's named operators.

All fits go through orthogonal factorizations (numpy lstsq); fitted
coefficients are plain complex numbers, kept apart from the exact
Poly1 layer on purpose.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .flow import TridiagonalConstants, comm, q_from_beta, relative_deviation
from .poly import ExpressionParser, ExprError, parse_scalar


class DegenerateFitWarning(UserWarning):
    """A least-squares system did not pin down all fitted constants."""


@dataclass
class OperatorRep:
    """Named dense matrices plus the parameters that built them."""

    dim: int
    ops: Mapping[str, np.ndarray]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        ops = {}
        for name, m in self.ops.items():
            m = np.asarray(m, dtype=complex)
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"operator {name!r} has shape {m.shape}, expected square of {self.dim}")
            ops[name] = m
        self.ops = ops


def rep_q_oscillator(d: int, q) -> OperatorRep:
    """Truncated ladder pair: Y e_n = e_{n+1}, X e_n = [n]_q e_{n-1}.

    The defining relation XY - qYX = 1 holds exactly on columns
    0..d-2; the top state carries the truncation defect -q[d-1]_q.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if complex(q) == 1:
        raise ValueError("q = 1 is the undeformed boundary; use a Weyl pair instead")
    Y = np.zeros((d, d), dtype=complex)
    X = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        Y[n, n - 1] = 1.0
        X[n - 1, n] = complex((1 - q**n) / (1 - q))
    return OperatorRep(d, {"Y": Y, "X": X}, {"d": d, "q": q})


def rep_pauli_dg() -> OperatorRep:
    """The 2x2 pair A0 = sigma_x, A1 = sigma_z with frequency 2."""
    A0 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    A1 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    return OperatorRep(2, {"A0": A0, "A1": A1}, {"omega": 2})


def rep_krawtchouk(d: int, p) -> OperatorRep:
    """Birth-death generator on the linear grid x(s) = s.

    Row stencil H[s, s+1] = A(s) = p(d-1-s), H[s, s-1] = C(s) = (1-p)s,
    H[s, s] = -A(s) - C(s), so every row sums to zero.
    """
    if d < 3:
        raise ValueError("dimension must be at least 3")
    pv = Fraction(p) if isinstance(p, (int, Fraction)) else p
    if not (0 < float(pv) < 1):
        raise ValueError("p must lie strictly between 0 and 1")
    H = np.zeros((d, d), dtype=complex)
    for s in range(d):
        a = pv * (d - 1 - s)
        c = (1 - pv) * s
        if s + 1 < d:
            H[s, s + 1] = complex(a)
        if s - 1 >= 0:
            H[s, s - 1] = complex(c)
        H[s, s] = complex(-a - c)
    X = np.diag(np.arange(d, dtype=float)).astype(complex)
    return OperatorRep(d, {"H": H, "X": X}, {"d": d, "p": p})


# ---------------------------------------------------------------------------
# grids and difference operators


@dataclass(frozen=True)
class GridSpec:
    """x(s) = c1 q^s + c2 q^{-s} + c0, or its polynomial degenerations."""

    kind: str
    c0: complex = 0.0
    c1: complex = 1.0
    c2: complex = 0.0
    q: complex = 1.0
    points: tuple = ()

    def values(self, n: int) -> list:
        if n < 1:
            raise ValueError("need at least one grid point")
        if self.kind == "q_quadratic":
            if complex(self.q) in (0j, 1 + 0j):
                raise ValueError("q-quadratic grid needs q not in {0, 1}")
            xs = [self.c1 * self.q**s + self.c2 * self.q ** (-s) + self.c0 for s in range(n)]
        elif self.kind == "quadratic":
            xs = [self.c2 * s * s + self.c1 * s + self.c0 for s in range(n)]
        elif self.kind == "linear":
            xs = [self.c1 * s + self.c0 for s in range(n)]
        elif self.kind == "custom":
            if len(self.points) < n:
                raise ValueError(f"custom grid has {len(self.points)} points, need {n}")
            xs = list(self.points[:n])
        else:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        xs = [complex(v) for v in xs]
        _check_grid_nondegenerate(xs)
        return xs


def _check_grid_nondegenerate(xs: Sequence[complex]) -> None:
    scale = max(1.0, max(abs(v) for v in xs))
    for s in range(len(xs) - 1):
        if abs(xs[s + 1] - xs[s]) <= 1e-12 * scale:
            raise ValueError(f"degenerate grid: x({s + 1}) = x({s})")
    for s in range(len(xs) - 2):
        if abs(xs[s + 2] - xs[s]) <= 1e-12 * scale:
            raise ValueError(f"degenerate grid: x({s + 2}) = x({s})")


StencilFn = Union[str, Callable[[int], complex]]


def difference_operator_rep(
    d: int,
    A: StencilFn,
    B: StencilFn,
    C: StencilFn,
    grid: GridSpec,
    params: Optional[Mapping] = None,
) -> OperatorRep:
    """H from row stencil (A, B, C) over s, X = diag of the grid values.

    String stencils are scalar expressions in s (plus any params);
    q^s is available when the params bind q.
    """
    if d < 3:
        raise ValueError("dimension must be at least 3")
    env = dict(params or {})

    def fn(expr: StencilFn) -> Callable[[int], complex]:
        if callable(expr):
            return lambda s: complex(expr(s))
        return lambda s: complex(parse_scalar(expr, {**env, "s": s}))

    fa, fb, fc = fn(A), fn(B), fn(C)
    H = np.zeros((d, d), dtype=complex)
    for s in range(d):
        if s + 1 < d:
            H[s, s + 1] = fa(s)
        if s - 1 >= 0:
            H[s, s - 1] = fc(s)
        H[s, s] = fb(s)
    X = np.diag(np.asarray(grid.values(d), dtype=complex))
    return OperatorRep(d, {"H": H, "X": X}, {"d": d, "grid": grid})


def aw_grid_check(x: Sequence) -> tuple:
    """Fit x(s+1) + x(s-1) + eta x(s) + zeta = 0 over the interior points.

    Returns (eta, zeta, residual) with the residual an RMS defect
    normalized by the RMS magnitude of the sequence.
    """
    xs = [complex(v) for v in x]
    if len(xs) < 5:
        raise ValueError("need at least five grid points")
    _check_grid_nondegenerate(xs)
    rows = []
    rhs = []
    for s in range(1, len(xs) - 1):
        rows.append([xs[s], 1.0])
        rhs.append(-(xs[s + 1] + xs[s - 1]))
    Amat = np.asarray(rows, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    coef, _, _, _ = np.linalg.lstsq(Amat, b, rcond=None)
    eta, zeta = coef
    defect = Amat @ coef - b
    rms = float(np.sqrt(np.mean(np.abs(defect) ** 2)))
    scale = max(1.0, float(np.sqrt(np.mean(np.abs(np.asarray(xs)) ** 2))))
    return complex(eta), complex(zeta), rms / scale


def grid_verdict(eta: complex, zeta: complex, tol: float = 1e-8) -> tuple:
    """Name the grid family behind a fitted recurrence: (label, q or None)."""
    if abs(eta + 2) <= tol:
        if abs(zeta) <= tol:
            return "linear", None
        return "quadratic", None
    return "q_quadratic", q_from_beta(-eta)


# ---------------------------------------------------------------------------
# relation residuals from textual identities


class _MatrixAdapter:
    """Expression values are complex scalars or square complex matrices."""

    def __init__(self, bindings: Mapping[str, object], dim: int):
        self.bindings = bindings
        self.dim = dim

    def const(self, f):
        return complex(f)

    def imag_unit(self, pos):
        return 1j

    def name(self, n, pos):
        if n not in self.bindings:
            raise ExprError(f"unbound name {n!r}", pos)
        v = self.bindings[n]
        if isinstance(v, np.ndarray):
            return v
        return complex(v)

    def _lift(self, v):
        if isinstance(v, np.ndarray):
            return v
        return v * np.eye(self.dim, dtype=complex)

    def add(self, a, b):
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            return self._lift(a) + self._lift(b)
        return a + b

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        return -a

    def mul(self, a, b):
        if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
            return a @ b
        return a * b

    def div(self, a, b, pos):
        if isinstance(b, np.ndarray):
            raise ExprError("division by a matrix is not defined", pos)
        if b == 0:
            raise ExprError("division by zero", pos)
        return a / b

    def pow(self, a, n, pos):
        if isinstance(a, np.ndarray):
            if n < 0:
                raise ExprError("negative matrix powers are not defined", pos)
            return np.linalg.matrix_power(a, n)
        return a**n

    def call(self, fname, args, pos):
        def two_matrices():
            if len(args) != 2:
                raise ExprError(f"{fname} takes two arguments", pos)
            return self._lift(args[0]), self._lift(args[1])

        if fname == "comm":
            a, b = two_matrices()
            return a @ b - b @ a
        if fname == "acomm":
            a, b = two_matrices()
            return a @ b + b @ a
        if fname == "qcomm":
            if len(args) != 3:
                raise ExprError("qcomm takes (a, b, q)", pos)
            a, b = self._lift(args[0]), self._lift(args[1])
            qv = args[2]
            if isinstance(qv, np.ndarray) or qv == 0:
                raise ExprError("qcomm needs a nonzero scalar q", pos)
            s = cmath.sqrt(qv)
            return s * (a @ b) - (b @ a) / s
        raise ExprError(f"unknown function {fname!r}", pos)


def relation_residual(
    rep: OperatorRep, relation: str, params: Optional[Mapping] = None
) -> float:
    """Relative Frobenius residual of a textual identity "lhs = rhs".

    Names resolve to the rep's operators, then its scalar metadata,
    then explicit params. comm, acomm and qcomm are available as
    functions; bare scalars lift to multiples of the identity.
    """
    if relation.count("=") != 1:
        raise ValueError("relation must contain exactly one '='")
    left, right = relation.split("=")
    bindings = {}
    for k, v in rep.metadata.items():
        if isinstance(v, (int, float, complex, Fraction)):
            bindings[k] = v
    bindings.update(params or {})
    bindings.update(rep.ops)
    adapter = _MatrixAdapter(bindings, rep.dim)
    lhs = adapter._lift(ExpressionParser(left, adapter).parse())
    rhs = adapter._lift(ExpressionParser(right, adapter).parse())
    nl = float(np.linalg.norm(lhs))
    nr = float(np.linalg.norm(rhs))
    scale = max(nl, nr)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs)) / scale


# ---------------------------------------------------------------------------
# closure-ansatz fitting


@dataclass(frozen=True)
class ClosureFit:
    """Fitted coefficient polynomials as complex coefficient tuples.

    For the direct ansatz the slots read ad_H^2 X = W1(H) X + W2(H) Y
    + W0(H); the dual fit stores (V1, V2, V0) in the same slots with
    the roles of H and X exchanged.
    """

    W0: tuple
    W1: tuple
    W2: tuple
    residual: float
    degree_bounds: tuple
    rank_deficient: bool = False


def _closure_fit(
    P: np.ndarray, Q: np.ndarray, Y: np.ndarray, target: np.ndarray, bounds: tuple
) -> ClosureFit:
    """Fit target = W1(P) Q + W2(P) Y + W0(P) by least squares."""
    b1, b2, b0 = bounds
    if min(b1, b2, b0) < 0:
        raise ValueError("degree bounds must be nonnegative")
    d = P.shape[0]
    eye = np.eye(d, dtype=complex)
    tnorm = float(np.linalg.norm(target))
    if tnorm == 0:
        return ClosureFit((), (), (), 0.0, tuple(bounds))
    powers = [eye]
    for _ in range(max(b1, b2, b0)):
        powers.append(powers[-1] @ P)
    cols = []
    for a in range(b1 + 1):
        cols.append(powers[a] @ Q)
    for a in range(b2 + 1):
        cols.append(powers[a] @ Y)
    for a in range(b0 + 1):
        cols.append(powers[a])
    Amat = np.stack([c.reshape(-1) for c in cols], axis=1)
    coef, _, rank, _ = np.linalg.lstsq(Amat, target.reshape(-1), rcond=None)
    residual = float(np.linalg.norm(Amat @ coef - target.reshape(-1))) / tnorm
    w1 = tuple(coef[: b1 + 1])
    w2 = tuple(coef[b1 + 1 : b1 + b2 + 2])
    w0 = tuple(coef[b1 + b2 + 2 :])
    deficient = rank < Amat.shape[1]
    if deficient:
        warnings.warn(
            "closure basis is rank deficient; coefficients are a minimum-norm choice",
            DegenerateFitWarning,
            stacklevel=3,
        )
    return ClosureFit(w0, w1, w2, residual, tuple(bounds), deficient)


def detect_closure(H: np.ndarray, X: np.ndarray, degree_bounds: tuple = (2, 1, 2)) -> ClosureFit:
    """Least-squares fit of ad_H^2 X over the span {H^a X, H^a Y, H^a}."""
    H = np.asarray(H, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if H.shape != X.shape or H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H and X must be square matrices of the same size")
    Y = comm(H, X)
    target = comm(H, Y)
    return _closure_fit(H, X, Y, target, degree_bounds)


def detect_dual_closure(H: np.ndarray, X: np.ndarray, degree_bounds: tuple = (2, 1, 2)) -> ClosureFit:
    """Least-squares fit of [Y, X] over the span {X^a H, X^a Y, X^a}."""
    H = np.asarray(H, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if H.shape != X.shape or H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H and X must be square matrices of the same size")
    Y = comm(H, X)
    target = comm(Y, X)
    return _closure_fit(X, H, Y, target, degree_bounds)


def closure_eval(coeffs: Sequence[complex], value: complex) -> complex:
    """Horner evaluation of a fitted coefficient tuple."""
    acc = 0j
    for c in reversed(tuple(coeffs)):
        acc = acc * value + c
    return acc


# ---------------------------------------------------------------------------
# tridiagonal-constant fitting


def fit_tridiagonal_constants(A0: np.ndarray, A1: np.ndarray) -> tuple:
    """Joint least-squares fit of (beta, gamma, gamma1, alpha, alpha1).

    The two relations are linear in all five constants:
      [A0, A0^2 A1 + A1 A0^2 - beta A0 A1 A0 - gamma {A0,A1} - alpha A1] = 0
      [A1, A1^2 A0 + A0 A1^2 - beta A1 A0 A1 - gamma1 {A1,A0} - alpha1 A0] = 0

    When the representation leaves directions unconstrained (the Pauli
    pair does: its anticommutator vanishes), the solution is gauged by
    moving within the null space so (beta, gamma, gamma1) is closest
    to the plain-relation point (2, 0, 0), leaving alpha, alpha1 free;
    a DegenerateFitWarning is issued.
    """
    A0 = np.asarray(A0, dtype=complex)
    A1 = np.asarray(A1, dtype=complex)
    if A0.shape != A1.shape or A0.ndim != 2 or A0.shape[0] != A0.shape[1]:
        raise ValueError("A0 and A1 must be square matrices of the same size")

    def pieces(P, Q):
        # [P, P^2 Q + Q P^2] = beta [P, PQP] + gamma [P, {P,Q}] + alpha [P, Q]
        lead = comm(P, P @ P @ Q + Q @ P @ P)
        col_beta = comm(P, P @ Q @ P)
        col_gamma = comm(P, P @ Q + Q @ P)
        col_alpha = comm(P, Q)
        return lead, col_beta, col_gamma, col_alpha

    t1, b1, g1, a1 = pieces(A0, A1)
    t2, b2, g2, a2 = pieces(A1, A0)
    z = np.zeros_like(A0)
    # unknown order: beta, gamma, gamma1, alpha, alpha1
    cols = [
        np.concatenate([b1.reshape(-1), b2.reshape(-1)]),
        np.concatenate([g1.reshape(-1), z.reshape(-1)]),
        np.concatenate([z.reshape(-1), g2.reshape(-1)]),
        np.concatenate([a1.reshape(-1), z.reshape(-1)]),
        np.concatenate([z.reshape(-1), a2.reshape(-1)]),
    ]
    Amat = np.stack(cols, axis=1)
    target = np.concatenate([t1.reshape(-1), t2.reshape(-1)])
    coef, _, rank, _ = np.linalg.lstsq(Amat, target, rcond=None)
    if rank < 5:
        _, s, vh = np.linalg.svd(Amat)
        null = vh[rank:].conj().T  # columns span the null space
        ref = np.array([2.0, 0.0, 0.0, 0.0, 0.0], dtype=complex)
        sel = np.zeros((3, 5), dtype=complex)
        sel[0, 0] = sel[1, 1] = sel[2, 2] = 1.0
        adjust, _, _, _ = np.linalg.lstsq(sel @ null, sel @ (ref - coef), rcond=None)
        coef = coef + null @ adjust
        warnings.warn(
            "tridiagonal fit is degenerate; gauge fixed toward beta=2, gamma=gamma1=0",
            DegenerateFitWarning,
            stacklevel=2,
        )
    tnorm = float(np.linalg.norm(target))
    resid = float(np.linalg.norm(Amat @ coef - target))
    residual = resid / tnorm if tnorm > 0 else resid
    constants = TridiagonalConstants(
        beta=complex(coef[0]),
        gamma=complex(coef[1]),
        gamma1=complex(coef[2]),
        alpha=complex(coef[3]),
        alpha1=complex(coef[4]),
    )
    return constants, residual
