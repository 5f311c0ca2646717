"""Heisenberg flows of operators that close linearly on a Hamiltonian.

Everything here revolves around one structure: a basis of operators
X_k (plus a unit slot) on which the commutator with a Hamiltonian H
acts as a matrix of polynomials in H,

    [H, X_k] = sum_s F_ks(H) X_s + Phi_k(H).

The unit column of F carries Phi, the unit row is zero, so the flow
exp(t ad_H) is the matrix exponential of F over the commutative ring
C[H]: exact power series (series_flow), numeric block exponential
(numeric_flow), and closed forms for the presentations whose F is
small enough to diagonalize by hand. The brute-force conjugation
e^{tH} X e^{-tH} (heisenberg_oracle) stays an independent route and is
never reused inside the closed forms.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .ncrewrite import NcExpression
from .poly import Poly1, RationalComplex, as_scalar, eval_matrix

UNIT = "1"


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def acomm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def relative_deviation(got: np.ndarray, want: np.ndarray) -> float:
    """Frobenius deviation normalized by the target, absolute if it is zero."""
    n = float(np.linalg.norm(np.asarray(got) - np.asarray(want)))
    s = float(np.linalg.norm(np.asarray(want)))
    return n / s if s > 0 else n


def matrix_exp(M: np.ndarray, t: complex = 1.0) -> np.ndarray:
    """exp(t*M) by scaling-and-squaring around a degree-16 Taylor core.

    The core runs at norm <= 1/2 where its truncation error is far
    below 1e-13; squaring doubles the norm back up.
    """
    A = np.asarray(M, dtype=complex) * complex(t)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    nrm = float(np.linalg.norm(A, 1))
    if not np.isfinite(nrm):
        raise ValueError("matrix_exp input contains non-finite entries")
    if nrm > 1e6:
        raise OverflowError(f"matrix_exp norm {nrm:.3g} is out of range")
    s = 0 if nrm <= 0.5 else int(np.ceil(np.log2(nrm / 0.5)))
    A = A / (2.0**s)
    d = A.shape[0]
    eye = np.eye(d, dtype=complex)
    E = eye.copy()
    for k in range(16, 0, -1):
        E = eye + (A @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def heisenberg_oracle(H: np.ndarray, X: np.ndarray, t: float) -> np.ndarray:
    """Ground-truth conjugation e^{tH} X e^{-tH}."""
    return matrix_exp(H, t) @ np.asarray(X, dtype=complex) @ matrix_exp(H, -t)


# ---------------------------------------------------------------------------
# the ad-action container and its flows


def _as_poly1(v) -> Poly1:
    if isinstance(v, Poly1):
        return v
    return Poly1.const(as_scalar(v))


class AdAction:
    """Matrix of Poly1 coefficients for ad_H over a basis with a unit slot."""

    def __init__(self, hamiltonian: str, basis: Sequence[str], F: Sequence[Sequence]):
        self.hamiltonian = hamiltonian
        self.basis = tuple(basis)
        if self.basis.count(UNIT) != 1:
            raise ValueError("basis must contain the unit slot '1' exactly once")
        if len(set(self.basis)) != len(self.basis):
            raise ValueError("duplicate basis names")
        n = len(self.basis)
        rows = []
        for row in F:
            row = tuple(_as_poly1(v) for v in row)
            if len(row) != n:
                raise ValueError("F must be square over the basis")
            rows.append(row)
        if len(rows) != n:
            raise ValueError("F must be square over the basis")
        self.F = tuple(rows)
        u = self.unit_index
        if any(not p.is_zero() for p in self.F[u]):
            raise ValueError("the unit row of F must be zero")

    @property
    def unit_index(self) -> int:
        return self.basis.index(UNIT)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def operator_names(self) -> tuple:
        return tuple(b for b in self.basis if b != UNIT)

    def __eq__(self, other):
        if not isinstance(other, AdAction):
            return NotImplemented
        return (
            self.hamiltonian == other.hamiltonian
            and self.basis == other.basis
            and self.F == other.F
        )


def _pmat_identity(n: int):
    one = Poly1.const(1)
    zero = Poly1.zero()
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _pmat_mul(A, B):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = Poly1.zero()
            for k in range(n):
                if A[i][k].is_zero() or B[k][j].is_zero():
                    continue
                acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


@dataclass
class FlowSeries:
    """Exact Taylor coefficients of exp(t F): coeffs[n] = F^n / n!."""

    action: AdAction
    order: int
    coeffs: list

    def eval_scalar(self, h, t: complex) -> np.ndarray:
        """Sum the series at a scalar Hamiltonian value."""
        n = self.action.dim
        out = np.zeros((n, n), dtype=complex)
        tp = 1.0 + 0j
        for M in self.coeffs:
            for i in range(n):
                for j in range(n):
                    if M[i][j]:
                        out[i, j] += tp * M[i][j].eval_scalar(h)
            tp *= complex(t)
        return out

    def eval_blocks(self, Hmat: np.ndarray, t: complex) -> np.ndarray:
        """Sum the series with every Poly1 evaluated at a matrix H."""
        Hmat = np.asarray(Hmat, dtype=complex)
        d = Hmat.shape[0]
        n = self.action.dim
        out = np.zeros((n * d, n * d), dtype=complex)
        tp = 1.0 + 0j
        for M in self.coeffs:
            for i in range(n):
                for j in range(n):
                    if M[i][j]:
                        out[i * d : (i + 1) * d, j * d : (j + 1) * d] += tp * eval_matrix(
                            M[i][j], Hmat
                        )
            tp *= complex(t)
        return out


def series_flow(action: AdAction, order: int) -> FlowSeries:
    """Build coeffs[n] = F^n / n! exactly, up to the requested order."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    n = action.dim
    coeffs = [_pmat_identity(n)]
    F = [list(row) for row in action.F]
    for k in range(1, order + 1):
        nxt = _pmat_mul(coeffs[-1], F)
        inv = Fraction(1, k)
        nxt = [[p * inv for p in row] for row in nxt]
        coeffs.append(nxt)
    return FlowSeries(action, order, coeffs)


def numeric_flow(
    action: AdAction,
    Hmat: np.ndarray,
    ops: Mapping[str, np.ndarray],
    t: float,
) -> dict:
    """Evolve every non-unit basis operator by one block exponential.

    F is evaluated entrywise at the concrete H; because all blocks are
    polynomials of the same matrix they commute, so the big exponential
    computes E(H; t) and the inhomogeneous part G in one shot.
    """
    Hmat = np.asarray(Hmat, dtype=complex)
    if Hmat.ndim != 2 or Hmat.shape[0] != Hmat.shape[1]:
        raise ValueError("H must be a square matrix")
    d = Hmat.shape[0]
    names = action.operator_names()
    mats = {}
    for name in names:
        if name not in ops:
            raise ValueError(f"missing operator matrix for basis element {name!r}")
        m = np.asarray(ops[name], dtype=complex)
        if m.shape != (d, d):
            raise ValueError(f"operator {name!r} has shape {m.shape}, expected {(d, d)}")
        mats[name] = m
    mats[UNIT] = np.eye(d, dtype=complex)
    n = action.dim
    big = np.zeros((n * d, n * d), dtype=complex)
    for i in range(n):
        for j in range(n):
            if action.F[i][j]:
                big[i * d : (i + 1) * d, j * d : (j + 1) * d] = eval_matrix(
                    action.F[i][j], Hmat
                )
    E = matrix_exp(big, t)
    out = {}
    for i, name in enumerate(action.basis):
        if name == UNIT:
            continue
        acc = np.zeros((d, d), dtype=complex)
        for j, other in enumerate(action.basis):
            blk = E[i * d : (i + 1) * d, j * d : (j + 1) * d]
            acc += blk @ mats[other]
        out[name] = acc
    return out


# ---------------------------------------------------------------------------
# canonical ad-actions


def qosc_adaction(q) -> AdAction:
    """[Y, X] = (1-q) Y X - 1 over the basis (X, 1), Hamiltonian Y."""
    w = RationalComplex(1) - as_scalar(q)
    return AdAction(
        "Y",
        ("X", UNIT),
        ((Poly1((0, w)), Poly1.const(-1)), (Poly1.zero(), Poly1.zero())),
    )


def weyl_adaction(q) -> AdAction:
    """[Y, X] = (1-q) Y X, no inhomogeneous term."""
    w = RationalComplex(1) - as_scalar(q)
    return AdAction(
        "Y",
        ("X", UNIT),
        ((Poly1((0, w)), Poly1.zero()), (Poly1.zero(), Poly1.zero())),
    )


def aw_z_adaction(q, C1, C3) -> AdAction:
    """ad_Y on the basis (X, Z, 1) for the cyclic q-commutator triple.

    C2 does not enter: it only shows up when a different generator is
    taken as the Hamiltonian.
    """
    q = as_scalar(q)
    if q.is_zero():
        raise ValueError("q must be nonzero")
    C1, C3 = as_scalar(C1), as_scalar(C3)
    qi = q.inverse()
    one = RationalComplex(1)
    z = Poly1.zero()
    rows = (
        (Poly1((0, one - q)), Poly1.const(-1), Poly1.const(-C3)),
        (Poly1.const(qi), Poly1((0, one - qi)), Poly1.const(qi * C1)),
        (z, z, z),
    )
    return AdAction("Y", ("X", "Z", UNIT), rows)


# ---------------------------------------------------------------------------
# q-oscillator closed flow


def qosc_closed_flow(
    Ymat: np.ndarray, Xmat: np.ndarray, q, t: float, max_terms: int = 500
) -> np.ndarray:
    """e^{(1-q) t Y} X - phi(Y; t) with phi as an entire power series.

    phi(y; t) = sum_{n>=1} t^n (1-q)^(n-1) y^(n-1) / n! is the
    integrated exponential; the series form is valid for singular Y.
    """
    w = complex(1) - complex(q)
    if w == 0:
        raise ValueError("q = 1 has no q-oscillator flow (zero frequency)")
    Ymat = np.asarray(Ymat, dtype=complex)
    Xmat = np.asarray(Xmat, dtype=complex)
    E = matrix_exp(Ymat, w * t)
    d = Ymat.shape[0]
    term = t * np.eye(d, dtype=complex)
    phi = term.copy()
    for n in range(1, max_terms):
        term = (term @ Ymat) * (w * t / (n + 1))
        phi += term
        if np.linalg.norm(term) <= 1e-17 * max(1.0, np.linalg.norm(phi)):
            break
    else:
        raise RuntimeError("phi series did not converge; norm of t*Y too large")
    return E @ Xmat - phi


# ---------------------------------------------------------------------------
# the three-term tower: exact recurrence and scalar closed flow


@dataclass(frozen=True)
class UVWTriple:
    U: Poly1
    V: Poly1
    W: Poly1


def uvw_recurrence(n: int, q, C1, C3) -> list:
    """Exact coefficient triples of ad_Y^k X = U_k(Y) X + V_k(Y) Z + W_k(Y).

    U_{k+1} = (1-q) x U_k + q^{-1} V_k
    V_{k+1} = -U_k + (1-q^{-1}) x V_k
    W_{k+1} = -C3 U_k + C1 q^{-1} V_k
    """
    q = as_scalar(q)
    if q.is_zero():
        raise ValueError("q must be nonzero")
    C1, C3 = as_scalar(C1), as_scalar(C3)
    qi = q.inverse()
    a = RationalComplex(1) - q
    b = RationalComplex(1) - qi
    x = Poly1.x()
    U, V, W = Poly1.const(1), Poly1.zero(), Poly1.zero()
    out = [UVWTriple(U, V, W)]
    for _ in range(n):
        U, V, W = (
            a * x * U + qi * V,
            -U + b * x * V,
            -C3 * U + C1 * qi * V,
        )
        out.append(UVWTriple(U, V, W))
    return out


def uvw_from_ncexpression(e: NcExpression, y: str = "Y", z: str = "Z", x: str = "X") -> UVWTriple:
    """Read (U, V, W) off a normal-ordered expression in span{Y^a X, Y^a Z, Y^a}."""
    u: dict = {}
    v: dict = {}
    w: dict = {}
    for word, c in e.terms.items():
        if word and word[-1] == x and all(g == y for g in word[:-1]):
            u[(len(word) - 1,)] = c
        elif word and word[-1] == z and all(g == y for g in word[:-1]):
            v[(len(word) - 1,)] = c
        elif all(g == y for g in word):
            w[(len(word),)] = c
        else:
            raise ValueError(f"word {word} is outside the Y^a {{X, Z, 1}} span")

    def build(d):
        top = max((k[0] for k in d), default=-1)
        return Poly1([d.get((k,), 0) for k in range(top + 1)])

    return UVWTriple(build(u), build(v), build(w))


def _eps(w: complex, t: float) -> complex:
    # (e^{wt} - 1)/w, continuous at w = 0
    z = w * t
    if abs(z) < 1e-6:
        return t * (1 + z / 2 + z * z / 6 + z * z * z / 24)
    return (cmath.exp(z) - 1) / w


def _tau_int(w: complex, t: float) -> complex:
    # int_0^t tau e^{w tau} dtau, continuous at w = 0
    z = w * t
    if abs(z) < 1e-6:
        return t * t * (0.5 + z / 3 + z * z / 8 + z * z * z / 30)
    return (t * cmath.exp(z) - _eps(w, t)) / w


def aw_closed_flow(x, q, C1, C3, t: float):
    """Closed-form (E1, E2, E0) of the two-component coefficient flow.

    Solves dE1 = (1-q) x E1 + q^{-1} E2, dE2 = -E1 + (1-q^{-1}) x E2
    from (1, 0) by eigen-decomposition of the constant 2x2 system, with
    the confluent branch when the characteristic roots collide, and
    E0 = -C3 int E1 + C1 q^{-1} int E2.
    """
    x = complex(x)
    qc = complex(q)
    if qc == 0:
        raise ValueError("q must be nonzero")
    a11 = (1 - qc) * x
    a12 = 1 / qc
    a21 = -1.0 + 0j
    a22 = (1 - 1 / qc) * x
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    sq = cmath.sqrt(tr * tr - 4 * det)
    w1 = (tr + sq) / 2
    w2 = (tr - sq) / 2
    scale = max(1.0, abs(w1), abs(w2))
    # roots closer than sqrt(eps) lose accuracy to cancellation in the
    # spectral projectors, so they go through the confluent formula
    if abs(w1 - w2) <= 1e-7 * scale:
        w0 = tr / 2
        e0 = cmath.exp(w0 * t)
        E1 = e0 * (1 + t * (a11 - w0))
        E2 = e0 * t * a21
        ep = _eps(w0, t)
        ka = _tau_int(w0, t)
        J1 = ep + ka * (a11 - w0)
        J2 = ka * a21
    else:
        dw = w1 - w2
        # spectral projectors applied to the initial vector (1, 0)
        p1_top = (a11 - w2) / dw
        p1_bot = a21 / dw
        p2_top = (a11 - w1) / (-dw)
        p2_bot = a21 / (-dw)
        e1, e2 = cmath.exp(w1 * t), cmath.exp(w2 * t)
        E1 = e1 * p1_top + e2 * p2_top
        E2 = e1 * p1_bot + e2 * p2_bot
        ep1, ep2 = _eps(w1, t), _eps(w2, t)
        J1 = ep1 * p1_top + ep2 * p2_top
        J2 = ep1 * p1_bot + ep2 * p2_bot
    E0 = -complex(C3) * J1 + complex(C1) / qc * J2
    return E1, E2, E0


# ---------------------------------------------------------------------------
# cubic-relation systems (plain, tridiagonal, generalized)


@dataclass(frozen=True)
class AWKPresentation:
    """Structure constants of the quadratic K-presentation."""

    rho: RationalComplex
    a1: RationalComplex
    a2: RationalComplex
    c1: RationalComplex
    c2: RationalComplex
    d: RationalComplex
    g1: RationalComplex
    g2: RationalComplex

    @classmethod
    def make(cls, rho=0, a1=0, a2=0, c1=0, c2=0, d=0, g1=0, g2=0):
        return cls(*(as_scalar(v) for v in (rho, a1, a2, c1, c2, d, g1, g2)))

    @classmethod
    def qj3(cls, a1=1, c1=1, c2=1, g1=0, g2=0):
        """Degeneration with rho = a2 = d = 0."""
        return cls.make(rho=0, a1=a1, a2=0, c1=c1, c2=c2, d=0, g1=g1, g2=g2)

    def r_polys(self):
        """[K2, [K2, K1]] = R2(K2) K1 + R1(K2) K3 + R0(K2)."""
        two = RationalComplex(2)
        R2 = Poly1((-self.c1, -(two * self.a1), -(two * self.rho)))
        R1 = Poly1((-self.a1, -(two * self.rho)))
        R0 = Poly1((-self.g1, -self.d, -self.a2))
        return R2, R1, R0

    def s_polys(self):
        """[K1, [K1, K2]] = S2(K1) K2 + S1(K1) K3 + S0(K1)."""
        two = RationalComplex(2)
        S2 = Poly1((-self.c2, -(two * self.a2), -(two * self.rho)))
        S1 = Poly1((self.a2, two * self.rho))
        S0 = Poly1((-self.g2, -self.d, -self.a1))
        return S2, S1, S0


@dataclass(frozen=True)
class TridiagonalConstants:
    """The five constants of the pair of cubic tridiagonal relations."""

    beta: object
    gamma: object
    gamma1: object
    alpha: object
    alpha1: object

    @classmethod
    def from_aw_k(cls, k: AWKPresentation) -> "TridiagonalConstants":
        beta = RationalComplex(2) * (RationalComplex(1) - k.rho)
        return cls(beta=beta, gamma=-k.a2, gamma1=-k.a1, alpha=-k.c2, alpha1=-k.c1)

    def as_tuple(self):
        return (self.beta, self.gamma, self.gamma1, self.alpha, self.alpha1)


def q_from_beta(beta: complex) -> complex:
    """Solve q + 1/q = beta for the root with |q| <= 1."""
    b = complex(beta)
    sq = cmath.sqrt(b * b - 4)
    r1 = (b + sq) / 2
    r2 = (b - sq) / 2
    return r1 if abs(r1) <= abs(r2) else r2


@dataclass(frozen=True)
class DGSystem:
    """Coefficient polynomials of a (possibly generalized) cubic relation.

    ad_{A0}^3 A1 = g1(A0) A1 + g2(A0) A2 + g3(A0) A3 + g0(A0)
    ad_{A1}^3 A0 = f1(A1) A0 + f2(A1) A2 + f3(A1) A4 + f0(A1)
    """

    g0: Poly1
    g1: Poly1
    g2: Poly1
    g3: Poly1
    f0: Poly1
    f1: Poly1
    f2: Poly1
    f3: Poly1

    @classmethod
    def generalized(cls, g0=0, g1=0, g2=0, g3=0, f0=0, f1=0, f2=0, f3=0):
        return cls(*(_as_poly1(v) for v in (g0, g1, g2, g3, f0, f1, f2, f3)))

    @classmethod
    def plain(cls, omega) -> "DGSystem":
        """g2 = -f2 = omega^2, everything else zero."""
        w2 = as_scalar(omega) ** 2
        return cls.generalized(g2=Poly1.const(w2), f2=Poly1.const(-w2))

    @classmethod
    def from_tridiagonal(cls, c: TridiagonalConstants) -> "DGSystem":
        beta = as_scalar(c.beta)
        gamma = as_scalar(c.gamma)
        gamma1 = as_scalar(c.gamma1)
        alpha = as_scalar(c.alpha)
        alpha1 = as_scalar(c.alpha1)
        two = RationalComplex(2)
        g2 = Poly1((alpha, two * gamma, beta - two))
        g3 = Poly1((-gamma, two - beta))
        f2 = Poly1((-alpha1, -(two * gamma1), two - beta))
        f3 = Poly1((-gamma1, two - beta))
        return cls.generalized(g2=g2, g3=g3, f2=f2, f3=f3)


def dg_adaction(system: DGSystem, hamiltonian: str = "A0") -> AdAction:
    """Linear ad-action of the extension tower under either generator."""
    z = Poly1.zero()
    one = Poly1.const(1)
    if hamiltonian == "A0":
        rows = (
            (z, one, z, z),
            (z, z, one, z),
            (system.g1, system.g2, system.g3, system.g0),
            (z, z, z, z),
        )
        return AdAction("A0", ("A1", "A2", "A3", UNIT), rows)
    if hamiltonian == "A1":
        rows = (
            (z, -one, z, z),
            (z, z, -one, z),
            (system.f1, system.f2, system.f3, system.f0),
            (z, z, z, z),
        )
        return AdAction("A1", ("A0", "A2", "A4", UNIT), rows)
    raise ValueError("hamiltonian must be 'A0' or 'A1'")


def generalized_dg_ad(system: DGSystem, hamiltonian: str, n: int):
    """Exact quadruple of coefficient polynomials of the n-th ad power.

    For hamiltonian 'A0' returns (g1, g2, g3, g0) with
    ad^n A1 = g1 A1 + g2 A2 + g3 A3 + g0; for 'A1' the mirror
    (f1, f2, f3, f0) over (A0, A2, A4, 1).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    act = dg_adaction(system, hamiltonian)
    row = [Poly1.const(1), Poly1.zero(), Poly1.zero(), Poly1.zero()]
    for _ in range(n):
        nxt = []
        for j in range(4):
            acc = Poly1.zero()
            for i in range(4):
                if row[i] and act.F[i][j]:
                    acc = acc + row[i] * act.F[i][j]
            nxt.append(acc)
        row = nxt
    return tuple(row)


def aw_k_adaction(k: AWKPresentation, hamiltonian: str = "K2") -> AdAction:
    """Quadratic K-presentation as an ad-action (no rewrite system exists).

    Under K2 the tower is (K1, K3); under K1 it is (K2, K3). Both come
    straight from the left-ordered double-commutator polynomials.
    """
    z = Poly1.zero()
    if hamiltonian == "K2":
        R2, R1, R0 = k.r_polys()
        rows = (
            (z, Poly1.const(-1), z),
            (-R2, -R1, -R0),
            (z, z, z),
        )
        return AdAction("K2", ("K1", "K3", UNIT), rows)
    if hamiltonian == "K1":
        S2, S1, S0 = k.s_polys()
        rows = (
            (z, Poly1.const(1), z),
            (S2, S1, S0),
            (z, z, z),
        )
        return AdAction("K1", ("K2", "K3", UNIT), rows)
    raise ValueError("hamiltonian must be 'K1' or 'K2'")


# ---------------------------------------------------------------------------
# numeric flows certified by the cubic relation


class DGViolation(ValueError):
    """The supplied matrices do not satisfy the cubic relation."""

    def __init__(self, residuals):
        self.residuals = residuals
        super().__init__(
            "cubic relation residuals "
            + ", ".join(f"{r:.3e}" for r in residuals)
            + " exceed tolerance"
        )


def dg_relation_residuals(A0: np.ndarray, A1: np.ndarray, omega) -> tuple:
    """Relative residuals of ad^3 = omega^2 ad on both sides."""
    w2 = complex(omega) ** 2
    A2 = comm(A0, A1)
    lhs0 = comm(A0, comm(A0, A2))
    r0 = relative_deviation(lhs0, w2 * A2)
    B2 = comm(A1, A0)
    lhs1 = comm(A1, comm(A1, B2))
    r1 = relative_deviation(lhs1, w2 * B2)
    return r0, r1


def _sinhc(w: complex, t: float) -> complex:
    # sinh(wt)/w, continuous at w = 0
    z = w * t
    if abs(z) < 1e-6:
        return t * (1 + z * z / 6 + z**4 / 120)
    return cmath.sinh(z) / w


def _coshm1(w: complex, t: float) -> complex:
    # (cosh(wt) - 1)/w^2, continuous at w = 0
    z = w * t
    if abs(z) < 1e-6:
        return t * t * (0.5 + z * z / 24 + z**4 / 720)
    return (cmath.cosh(z) - 1) / (w * w)


def dg_closed_flow(
    rep: Mapping[str, np.ndarray],
    omega,
    hamiltonian: str,
    t: float,
    tol: float = 1e-10,
) -> dict:
    """Closed-form conjugation flow of the extension tower.

    Requires the rep to satisfy the cubic relation at both generators
    (DGViolation otherwise). The hyperbolic coefficients go through
    series-safe helpers so omega -> 0 degenerates smoothly.
    """
    A0 = np.asarray(rep["A0"], dtype=complex)
    A1 = np.asarray(rep["A1"], dtype=complex)
    res = dg_relation_residuals(A0, A1, omega)
    if max(res) > tol:
        raise DGViolation(res)
    w = complex(omega)
    A2 = comm(A0, A1)
    ch = cmath.cosh(w * t)
    sh = _sinhc(w, t)
    cm = _coshm1(w, t)
    if hamiltonian == "A0":
        A3 = comm(A0, A2)
        return {
            "A0": A0.copy(),
            "A1": A1 + sh * A2 + cm * A3,
            "A2": ch * A2 + sh * A3,
        }
    if hamiltonian == "A1":
        A4 = comm(A1, comm(A1, A0))
        return {
            "A1": A1.copy(),
            "A0": A0 - sh * A2 + cm * A4,
            "A2": ch * A2 - sh * A4,
        }
    raise ValueError("hamiltonian must be 'A0' or 'A1'")


def onsager_transfer_check(
    rep: Mapping[str, np.ndarray],
    omega,
    t: float,
    tau: float,
    gamma,
    alpha_scale: float = 1.0,
    tol: float = 1e-10,
) -> float:
    """Frobenius norm of [T, W] for the conserved-combination pair.

    W = alpha A0 + beta A1 + gamma A2 with alpha = omega gamma
    coth(omega t / 2) and beta = -omega gamma coth(omega tau / 2);
    T = e^{-tau A0} e^{t A1}. For a valid cubic-relation rep and
    alpha_scale = 1 the commutator vanishes; scaling alpha breaks it,
    which the negative controls use.
    """
    A0 = np.asarray(rep["A0"], dtype=complex)
    A1 = np.asarray(rep["A1"], dtype=complex)
    res = dg_relation_residuals(A0, A1, omega)
    if max(res) > tol:
        raise DGViolation(res)
    w = complex(omega)
    if t == 0 or tau == 0:
        raise ValueError("t and tau must be nonzero")
    g = complex(gamma)

    def coth(z: complex) -> complex:
        s = cmath.sinh(z)
        if s == 0:
            raise ValueError("coth pole: omega*t/2 is a multiple of i*pi")
        return cmath.cosh(z) / s

    alpha = w * g * coth(w * t / 2) * alpha_scale
    beta = -w * g * coth(w * tau / 2)
    A2 = comm(A0, A1)
    W = alpha * A0 + beta * A1 + g * A2
    T = matrix_exp(A0, -tau) @ matrix_exp(A1, t)
    return float(np.linalg.norm(T @ W - W @ T))
