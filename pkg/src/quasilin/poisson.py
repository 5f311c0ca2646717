"""Polynomial Poisson structures and their quasi-linear flows.

A structure on N variables stores one polynomial per ordered pair
i < k; antisymmetry and the Leibniz rule then define the bracket of
arbitrary polynomials. Everything downstream is a question about
these finitely many entries: the Jacobi identity (as a cyclic defect,
and for N = 3 as the curl test), the quasi-linearity of a chosen
coordinate as Hamiltonian, the canonical quadratic classification in
three variables, and the flow itself via iterated brackets with an
RK4 integration as the independent numeric route.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np

from .flow import AdAction, UNIT
from .poly import (
    Poly1,
    PolyN,
    RationalComplex,
    degree_profile,
    parse_poly,
    partial,
)


def _default_names(nvars: int) -> tuple:
    if nvars <= 3:
        return ("x", "y", "z")[:nvars]
    return tuple(f"x{i + 1}" for i in range(nvars))


class PoissonStructure:
    """Bracket table {x_i, x_k} for i < k; everything else by antisymmetry."""

    def __init__(
        self,
        nvars: int,
        brackets: Mapping[tuple, PolyN],
        names: Optional[Sequence[str]] = None,
    ):
        if nvars < 2:
            raise ValueError("a Poisson structure needs at least two variables")
        self.nvars = nvars
        self.names = tuple(names) if names is not None else _default_names(nvars)
        if len(self.names) != nvars or len(set(self.names)) != nvars:
            raise ValueError("names must be distinct and match the variable count")
        table = {}
        for (i, k), p in brackets.items():
            if not (0 <= i < k < nvars):
                raise ValueError(f"bracket key {(i, k)} is not an ordered pair")
            if not isinstance(p, PolyN) or p.nvars != nvars:
                raise ValueError(f"bracket ({i},{k}) must be a PolyN over {nvars} variables")
            if not p.is_zero():
                table[(i, k)] = p
        self.table = table

    @classmethod
    def from_strings(
        cls,
        names: Sequence[str],
        brackets: Mapping[str, str],
        params: Optional[Mapping] = None,
    ) -> "PoissonStructure":
        """Build from {"x,y": "a*x*y - 1", ...}; pair order in keys is free."""
        names = tuple(names)
        index = {n: i for i, n in enumerate(names)}
        table: dict = {}
        for key, text in brackets.items():
            parts = [s.strip() for s in key.split(",")]
            if len(parts) != 2 or parts[0] == parts[1]:
                raise ValueError(f"bracket key {key!r} must name two distinct variables")
            for n in parts:
                if n not in index:
                    raise ValueError(f"bracket key {key!r} uses unknown variable {n!r}")
            a, b = index[parts[0]], index[parts[1]]
            p = parse_poly(text, names, params)
            pair = (a, b) if a < b else (b, a)
            if a > b:
                p = -p
            if pair in table:
                raise ValueError(f"bracket for pair {key!r} given twice")
            table[pair] = p
        return cls(len(names), table, names)

    def bracket(self, i: int, k: int) -> PolyN:
        """{x_i, x_k} for any index order."""
        if i == k:
            return PolyN.zero(self.nvars)
        if i < k:
            return self.table.get((i, k), PolyN.zero(self.nvars))
        p = self.table.get((k, i))
        return -p if p is not None else PolyN.zero(self.nvars)

    def bracket_text(self, i: int, k: int) -> str:
        return self.bracket(i, k).to_text(self.names)


def bracket_fn(f: PolyN, g: PolyN, S: PoissonStructure) -> PolyN:
    """{f, g} by the Leibniz rule, exact."""
    n = S.nvars
    if f.nvars != n or g.nvars != n:
        raise ValueError("operands must match the structure's variable count")
    acc = PolyN.zero(n)
    for (i, k), h in S.table.items():
        term = partial(f, i) * partial(g, k) - partial(f, k) * partial(g, i)
        if not term.is_zero():
            acc = acc + term * h
    return acc


def jacobi_defect(S: PoissonStructure) -> dict:
    """Cyclic sums {{x_i,x_k},x_j} + {{x_k,x_j},x_i} + {{x_j,x_i},x_k}.

    Empty for N = 2 where the identity is vacuous.
    """
    out = {}
    xs = [PolyN.var(S.nvars, i) for i in range(S.nvars)]
    for i, k, j in combinations(range(S.nvars), 3):
        d = (
            bracket_fn(S.bracket(i, k), xs[j], S)
            + bracket_fn(S.bracket(k, j), xs[i], S)
            + bracket_fn(S.bracket(j, i), xs[k], S)
        )
        out[(i, k, j)] = d
    return out


def jacobi_holds(S: PoissonStructure) -> bool:
    return all(d.is_zero() for d in jacobi_defect(S).values())


def curl_test_3(S: PoissonStructure) -> PolyN:
    """F . (curl F) for the field F = ({y,z}, {z,x}, {x,y}); N = 3 only."""
    if S.nvars != 3:
        raise ValueError("the curl test is specific to three variables")
    F = (S.bracket(1, 2), S.bracket(2, 0), S.bracket(0, 1))
    curl = (
        partial(F[2], 1) - partial(F[1], 2),
        partial(F[0], 2) - partial(F[2], 0),
        partial(F[1], 0) - partial(F[0], 1),
    )
    acc = PolyN.zero(3)
    for a, b in zip(F, curl):
        acc = acc + a * b
    return acc


def nambu_from_potential(Q: PolyN, names: Optional[Sequence[str]] = None) -> PoissonStructure:
    """Brackets ({y,z}, {z,x}, {x,y}) = grad Q; Jacobi holds by construction."""
    if Q.nvars != 3:
        raise ValueError("the potential must have exactly three variables")
    return PoissonStructure(
        3,
        {(1, 2): partial(Q, 0), (0, 2): -partial(Q, 1), (0, 1): partial(Q, 2)},
        names,
    )


# ---------------------------------------------------------------------------
# quasi-linearity


class NotQuasiLinear(ValueError):
    """A bracket is nonlinear in the non-Hamiltonian variables."""

    def __init__(self, k: int, name: str, text: str):
        self.k = k
        super().__init__(f"{{{name}, H}} = {text} is not linear in the other variables")


@dataclass(frozen=True)
class QuasiLinearDecomposition:
    """{x_k, x_j} = sum over s != j of F[s](x_j) x_s + Phi(x_j)."""

    hamiltonian_index: int
    k: int
    F: Mapping[int, Poly1]
    Phi: Poly1


def _split_linear(p: PolyN, j: int) -> tuple:
    """Split a PolyN that is linear in the variables other than j."""
    F: dict = {}
    phi: dict = {}
    for exps, c in p.terms.items():
        carriers = [s for s, e in enumerate(exps) if e and s != j]
        if not carriers:
            phi[exps[j]] = c
        elif len(carriers) == 1 and exps[carriers[0]] == 1:
            F.setdefault(carriers[0], {})[exps[j]] = c
        else:
            raise ValueError("polynomial is not linear in the non-Hamiltonian variables")

    def build(d):
        top = max(d, default=-1)
        return Poly1([d.get(k, 0) for k in range(top + 1)])

    return {s: build(d) for s, d in F.items()}, build(phi)


def quasi_linear_decompose(S: PoissonStructure, j: int) -> dict:
    """Decompose every {x_k, x_j}, k != j, or raise NotQuasiLinear.

    The orientation matches the flow it generates: with x_j as the
    Hamiltonian, dx_k/dt = {x_k, x_j}.
    """
    if not (0 <= j < S.nvars):
        raise ValueError(f"no variable with index {j}")
    others = [k for k in range(S.nvars) if k != j]
    out = {}
    for k in others:
        p = S.bracket(k, j)
        if degree_profile(p, others) > 1:
            raise NotQuasiLinear(k, S.names[k], p.to_text(S.names))
        F, phi = _split_linear(p, j)
        out[k] = QuasiLinearDecomposition(j, k, F, phi)
    return out


def quasi_linear_everywhere(S: PoissonStructure) -> bool:
    try:
        for j in range(S.nvars):
            quasi_linear_decompose(S, j)
    except NotQuasiLinear:
        return False
    return True


def decomposition_adaction(S: PoissonStructure, j: int) -> AdAction:
    """Package the decomposition at j as the linear flow generator."""
    dec = quasi_linear_decompose(S, j)
    others = [k for k in range(S.nvars) if k != j]
    basis = tuple(S.names[k] for k in others) + (UNIT,)
    rows = []
    for k in others:
        row = [dec[k].F.get(s, Poly1.zero()) for s in others]
        row.append(dec[k].Phi)
        rows.append(row)
    rows.append([Poly1.zero()] * len(basis))
    return AdAction(S.names[j], basis, rows)


def canonical_20_form(S: PoissonStructure):
    """For N = 2: (alpha, beta1, beta2, gamma) with {x,y} = a xy + b1 x + b2 y + g.

    Returns None when the bracket is not of that shape, which by the
    two-sided quasi-linearity property is exactly when some choice of
    Hamiltonian coordinate fails to decompose.
    """
    if S.nvars != 2:
        raise ValueError("canonical_20_form needs exactly two variables")
    p = S.bracket(0, 1)
    ok = all(sum(e) <= 2 and max(e) <= 1 for e in p.terms)
    if not ok:
        return None
    return (p.coeff((1, 1)), p.coeff((1, 0)), p.coeff((0, 1)), p.coeff((0, 0)))


# ---------------------------------------------------------------------------
# canonical classification in three variables


@dataclass(frozen=True)
class Canonical30Form:
    """F_i = alpha_i x_k x_l + sum_s beta[i][s] x_s + gamma_i, (i,k,l) distinct."""

    alphas: Optional[tuple]
    betas: Optional[tuple]
    gammas: Optional[tuple]
    case_label: str
    violation: Optional[str] = None


_COMPLEMENT = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def _extract_f(S: PoissonStructure, i: int) -> PolyN:
    k, l = _COMPLEMENT[i]
    return S.bracket(k, l)


def _quadratic_shape(p: PolyN, i: int):
    """alpha, betas-row, gamma if p = alpha x_k x_l + linear, else None."""
    k, l = _COMPLEMENT[i]
    want = [0, 0, 0]
    want[k] = 1
    want[l] = 1
    want = tuple(want)
    alpha = RationalComplex(0)
    betas = [RationalComplex(0)] * 3
    gamma = RationalComplex(0)
    for exps, c in p.terms.items():
        d = sum(exps)
        if d == 2 and exps == want:
            alpha = c
        elif d == 1:
            betas[exps.index(1)] = c
        elif d == 0:
            gamma = c
        else:
            return None
    return alpha, tuple(betas), gamma


def classify_canonical_30(S: PoissonStructure) -> Canonical30Form:
    """Assign one of the quadratic canonical case labels.

    The decision tree reads the count of nonzero diagonal entries of
    beta, then splits on the pattern of the alphas. Jacobi is checked
    first: failures come back unclassified with the violated constraint
    spelled out.
    """
    if S.nvars != 3:
        raise ValueError("classification needs exactly three variables")
    shapes = []
    for i in range(3):
        sh = _quadratic_shape(_extract_f(S, i), i)
        if sh is None:
            return Canonical30Form(
                None,
                None,
                None,
                "unclassified",
                f"F_{i + 1} is not of the quadratic canonical shape",
            )
        shapes.append(sh)
    alphas = tuple(sh[0] for sh in shapes)
    betas = tuple(sh[1] for sh in shapes)
    gammas = tuple(sh[2] for sh in shapes)

    def form(label, violation=None):
        return Canonical30Form(alphas, betas, gammas, label, violation)

    curl = curl_test_3(S)
    if not curl.is_zero():
        return form("unclassified", f"Jacobi fails: (F, curl F) = {curl.to_text(S.names)}")
    zero = RationalComplex(0)
    if alphas == (zero, zero, zero):
        return form("lie_poisson")
    diag = tuple(betas[i][i] for i in range(3))
    zset = [i for i in range(3) if diag[i].is_zero()]
    nz = len(zset)
    if nz in (0, 1):
        if not (alphas[0] == alphas[1] == alphas[2]):
            return form("unclassified", "nonzero diagonal requires equal quadratic coefficients")
        if any(alphas[i].is_zero() for i in range(3)):
            return form("unclassified", "mixed zero and nonzero quadratic coefficients")
        for a in range(3):
            for b in range(a + 1, 3):
                if betas[a][b] != betas[b][a]:
                    return form("unclassified", "beta is not symmetric")
        return form("i" if nz == 0 else "ii")
    if nz == 2:
        (j,) = [i for i in range(3) if i not in zset]
        k, l = zset
        aj, ak, al = alphas[j], alphas[k], alphas[l]
        if ak != al:
            return form("unclassified", "off-diagonal quadratic coefficients differ")
        if not ak.is_zero():
            if aj == ak:
                return form("iii")
            if aj.is_zero():
                return form("v-a")
            return form("iv")
        if not aj.is_zero():
            return form("v-b")
        return form("unclassified", "quadratic coefficients vanish off the diagonal axis")
    if all(not alphas[i].is_zero() for i in range(3)):
        return form("vi")
    return form("unclassified", "zero diagonal requires all quadratic coefficients nonzero")


# ---------------------------------------------------------------------------
# flows


def classical_flow_series(S: PoissonStructure, j: int, order: int) -> list:
    """Iterated brackets: term n is the coefficient of t^n / n! in x_k(t).

    Entry n is a map k -> PolyN with {.., {x_k, x_j}, .., x_j} iterated
    n times; quasi-linearity keeps every entry linear in the variables
    other than x_j.
    """
    quasi_linear_decompose(S, j)
    if order < 0:
        raise ValueError("order must be nonnegative")
    xj = PolyN.var(S.nvars, j)
    others = [k for k in range(S.nvars) if k != j]
    current = {k: PolyN.var(S.nvars, k) for k in others}
    out = [dict(current)]
    for _ in range(order):
        current = {k: bracket_fn(p, xj, S) for k, p in current.items()}
        out.append(dict(current))
    return out


def evaluate_flow_series(series: list, x0: Sequence, t: float) -> dict:
    """Sum a classical_flow_series at a concrete initial point."""
    out = {}
    point = tuple(complex(v) for v in x0)
    for k in series[0]:
        acc = 0.0 + 0j
        fact = 1.0
        for n, cmap in enumerate(series):
            if n:
                fact *= n
            acc += (t**n) / fact * cmap[k].eval_complex(point)
        out[k] = acc
    return out


def ode_oracle(
    S: PoissonStructure, j: int, x0: Sequence, t: float, steps: int
) -> np.ndarray:
    """RK4 integration of dx_k/dt = {x_k, x_j} with x_j frozen.

    The Hamiltonian coordinate is conserved exactly (it never moves),
    so this is an independent numeric route for any polynomial
    structure, quasi-linear or not.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if not (0 <= j < S.nvars):
        raise ValueError(f"no variable with index {j}")
    x = np.asarray([complex(v) for v in x0], dtype=complex)
    if x.shape != (S.nvars,):
        raise ValueError("initial point has the wrong length")
    others = [k for k in range(S.nvars) if k != j]
    rhs_polys = {k: S.bracket(k, j) for k in others}

    def rhs(state: np.ndarray) -> np.ndarray:
        pt = tuple(state)
        d = np.zeros_like(state)
        for k, p in rhs_polys.items():
            d[k] = p.eval_complex(pt)
        return d

    h = t / steps
    for _ in range(steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x
