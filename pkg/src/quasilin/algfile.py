"""Algebra-definition files and the builtin registry.

A definition file is a JSON object with a "kind" discriminator; every
polynomial or scalar in it is a string in the expression grammar, so
files stay human-writable and exactly reloadable. Builtins are named
presets that expand to the same structures the files describe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .flow import (
    AdAction,
    AWKPresentation,
    DGSystem,
    TridiagonalConstants,
    aw_k_adaction,
    aw_z_adaction,
    dg_adaction,
    qosc_adaction,
    weyl_adaction,
)
from .ncrewrite import NcExpression, RewriteSystem, parse_nc
from .poisson import PoissonStructure
from .poly import (
    ExpressionParser,
    ExprError,
    Poly1,
    RationalComplex,
    as_scalar,
    parse_scalar,
    scalar_to_text,
)
from .reps import GridSpec, OperatorRep, difference_operator_rep, rep_pauli_dg, rep_krawtchouk, rep_q_oscillator

KINDS = ("poisson", "rewrite", "adaction", "difference_op", "builtin")


class AlgebraFileError(ValueError):
    """Schema problem in a definition file, tagged with its field path."""

    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        if field_path:
            message = f'field "{field_path}": {message}'
        super().__init__(message)


def _expect(cond: bool, message: str, path: str):
    if not cond:
        raise AlgebraFileError(message, path)


def _scalar_from_json(v, path: str) -> RationalComplex:
    if isinstance(v, bool):
        raise AlgebraFileError("expected a rational-complex literal, got a boolean", path)
    if isinstance(v, int):
        return as_scalar(v)
    if isinstance(v, str):
        try:
            return parse_scalar(v)
        except ExprError as e:
            raise AlgebraFileError(f"bad scalar {v!r}: {e}", path) from e
    raise AlgebraFileError(
        "expected a rational-complex literal; write non-integers as strings like \"1/2\"",
        path,
    )


def _params_from_json(obj, path: str) -> dict:
    if obj is None:
        return {}
    _expect(isinstance(obj, dict), "expected an object of name: literal pairs", path)
    out = {}
    for k, v in obj.items():
        _expect(isinstance(k, str) and k.isidentifier(), f"bad parameter name {k!r}", path)
        out[k] = _scalar_from_json(v, f"{path}.{k}")
    return out


class _Poly1Adapter:
    """Parse an expression in the reserved symbol H into a Poly1."""

    def __init__(self, hname: str, env: Mapping[str, RationalComplex]):
        self.hname = hname
        self.env = dict(env)

    def const(self, f: Fraction):
        return Poly1.const(f)

    def imag_unit(self, pos: int):
        return Poly1.const(RationalComplex(0, 1))

    def name(self, n: str, pos: int):
        if n == self.hname:
            return Poly1.x()
        if n in self.env:
            return Poly1.const(self.env[n])
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
        if b.degree() > 0:
            raise ExprError("division by a polynomial", pos)
        c = b.coeff(0)
        if c.is_zero():
            raise ExprError("division by zero", pos)
        return a * Poly1.const(c.inverse())

    def pow(self, a, n, pos):
        return a**n


def parse_coeff_poly(text: str, hname: str = "H", params: Optional[Mapping] = None) -> Poly1:
    """Parse a coefficient polynomial in the Hamiltonian symbol."""
    env = {k: as_scalar(v) for k, v in (params or {}).items()}
    return ExpressionParser(text, _Poly1Adapter(hname, env)).parse()


# ---------------------------------------------------------------------------
# bundles: what a definition resolves to


@dataclass
class AlgebraBundle:
    """Everything a definition can expand into, facet by facet.

    A bundle never has all facets; each command picks the one it needs
    and rejects bundles that lack it.
    """

    name: str
    kind: str
    params: dict = field(default_factory=dict)
    poisson: Optional[PoissonStructure] = None
    adactions: dict = field(default_factory=dict)
    default_hamiltonian: Optional[str] = None
    rewrite: Optional[RewriteSystem] = None
    rep: Optional[OperatorRep] = None
    dg: Optional[DGSystem] = None
    verified_cols: Optional[int] = None

    def adaction_for(self, hamiltonian: Optional[str]) -> AdAction:
        if not self.adactions:
            raise ValueError(f"{self.name!r} is not a flowable algebra")
        h = hamiltonian or self.default_hamiltonian
        if h not in self.adactions:
            known = ", ".join(sorted(self.adactions))
            raise ValueError(f"unknown Hamiltonian name {h!r} (have: {known})")
        return self.adactions[h]

    def operator_matrices(self, action: AdAction, rep: OperatorRep) -> dict:
        """Matrices for every non-unit basis element of the action.

        Tower elements A2/A3/A4 that the rep does not store directly
        are derived as the commutators that define them.
        """
        ops = dict(rep.ops)
        if "A0" in ops and "A1" in ops:
            a2 = ops["A0"] @ ops["A1"] - ops["A1"] @ ops["A0"]
            ops.setdefault("A2", a2)
            ops.setdefault("A3", ops["A0"] @ a2 - a2 @ ops["A0"])
            ops.setdefault("A4", -(ops["A1"] @ a2 - a2 @ ops["A1"]))
        out = {}
        for name in action.operator_names():
            if name not in ops:
                raise ValueError(f"representation does not provide operator {name!r}")
            out[name] = ops[name]
        if action.hamiltonian not in ops:
            raise ValueError(f"representation does not provide operator {action.hamiltonian!r}")
        out[action.hamiltonian] = ops[action.hamiltonian]
        return out


# ---------------------------------------------------------------------------
# file loading


def _load_poisson(payload: dict, params: dict) -> PoissonStructure:
    names = payload.get("vars")
    _expect(isinstance(names, list) and len(names) >= 2, "need a list of at least two variable names", "vars")
    _expect(all(isinstance(n, str) and n.isidentifier() for n in names), "variable names must be identifiers", "vars")
    brackets = payload.get("brackets")
    _expect(isinstance(brackets, dict), "expected an object of \"a,b\": expression pairs", "brackets")
    try:
        return PoissonStructure.from_strings(names, brackets, params)
    except (ExprError, ValueError) as e:
        raise AlgebraFileError(str(e), "brackets") from e


def _load_rewrite(payload: dict, params: dict) -> RewriteSystem:
    gens = payload.get("generators")
    _expect(isinstance(gens, list) and gens, "need a nonempty list of generator names", "generators")
    raw = payload.get("rules")
    _expect(isinstance(raw, dict) and raw, "need an object of \"A*B\": expression rules", "rules")
    rules = {}
    for key, text in raw.items():
        path = f"rules.{key}"
        parts = key.split("*")
        _expect(len(parts) == 2, "rule keys look like \"X*Y\"", path)
        a, b = (p.strip() for p in parts)
        _expect(a in gens and b in gens, "rule key names an unknown generator", path)
        try:
            rules[(a, b)] = parse_nc(text, gens, params)
        except ExprError as e:
            raise AlgebraFileError(str(e), path) from e
    try:
        return RewriteSystem(tuple(gens), rules)
    except ValueError as e:
        raise AlgebraFileError(str(e), "rules") from e


def _load_adaction(payload: dict, params: dict) -> AdAction:
    h = payload.get("hamiltonian")
    _expect(isinstance(h, str) and h, "need the Hamiltonian generator name", "hamiltonian")
    basis = payload.get("basis")
    _expect(isinstance(basis, list) and basis, "need the ordered operator basis", "basis")
    raw = payload.get("F")
    _expect(isinstance(raw, list) and len(raw) == len(basis), "F must be square over the basis", "F")
    rows = []
    for i, raw_row in enumerate(raw):
        _expect(isinstance(raw_row, list) and len(raw_row) == len(basis), "F must be square over the basis", f"F[{i}]")
        row = []
        for j, cell in enumerate(raw_row):
            path = f"F[{i}][{j}]"
            _expect(isinstance(cell, str), "coefficient entries are expression strings", path)
            try:
                row.append(parse_coeff_poly(cell, "H", params))
            except ExprError as e:
                raise AlgebraFileError(str(e), path) from e
        rows.append(tuple(row))
    try:
        return AdAction(h, tuple(basis), tuple(rows))
    except ValueError as e:
        raise AlgebraFileError(str(e), "F") from e


def _load_grid(obj, params: dict) -> GridSpec:
    _expect(isinstance(obj, dict), "expected a grid object", "grid")
    kind = obj.get("kind")
    _expect(isinstance(kind, str), "grid needs a kind", "grid.kind")
    if kind == "custom":
        pts = obj.get("points")
        _expect(isinstance(pts, list), "custom grids need a points list", "grid.points")
        vals = tuple(_scalar_from_json(v, f"grid.points[{i}]") for i, v in enumerate(pts))
        return GridSpec("custom", points=vals)
    fields = {}
    for key in ("c0", "c1", "c2", "q"):
        if key in obj:
            fields[key] = _scalar_from_json(obj[key], f"grid.{key}")
    defaults = {"c0": 0, "c1": 1, "c2": 0, "q": 1}
    defaults.update(fields)
    return GridSpec(kind, c0=defaults["c0"], c1=defaults["c1"], c2=defaults["c2"], q=defaults["q"])


def _load_difference_op(payload: dict, params: dict) -> OperatorRep:
    d = payload.get("d")
    _expect(isinstance(d, int) and d >= 2, "need an integer dimension d >= 2", "d")
    stencils = {}
    for key in ("A", "B", "C"):
        text = payload.get(key)
        _expect(isinstance(text, str), f"need the {key}(s) stencil expression", key)
        stencils[key] = text
    grid = _load_grid(payload.get("grid"), params)
    try:
        return difference_operator_rep(d, stencils["A"], stencils["B"], stencils["C"], grid, params)
    except (ExprError, ValueError) as e:
        raise AlgebraFileError(str(e), "A/B/C") from e


def load_algebra_file(path: str) -> AlgebraBundle:
    """Load and validate a JSON definition file into a bundle."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise AlgebraFileError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return load_algebra_dict(doc, name=path)


def load_algebra_dict(doc, name: str = "<memory>") -> AlgebraBundle:
    _expect(isinstance(doc, dict), "the top level must be a JSON object", "")
    kind = doc.get("kind")
    _expect(kind in KINDS, f"kind must be one of {', '.join(KINDS)}", "kind")
    params = _params_from_json(doc.get("params"), "params")
    if kind == "builtin":
        bname = doc.get("name")
        _expect(isinstance(bname, str) and bname in BUILTIN_NAMES, f"unknown builtin {doc.get('name')!r}", "name")
        return builtin_bundle(bname, params or None)
    bundle = AlgebraBundle(name=name, kind=kind, params=params)
    if kind == "poisson":
        bundle.poisson = _load_poisson(doc, params)
    elif kind == "rewrite":
        bundle.rewrite = _load_rewrite(doc, params)
    elif kind == "adaction":
        act = _load_adaction(doc, params)
        bundle.adactions = {act.hamiltonian: act}
        bundle.default_hamiltonian = act.hamiltonian
    elif kind == "difference_op":
        bundle.rep = _load_difference_op(doc, params)
    return bundle


# ---------------------------------------------------------------------------
# builtin registry

BUILTIN_DEFAULTS = {
    "qosc": {"q": Fraction(1, 2)},
    "weyl": {"q": Fraction(1, 2)},
    "aw_z": {"q": Fraction(1, 2), "C1": 1, "C2": 1, "C3": 1},
    "aw_k": {
        "rho": Fraction(1, 2),
        "a1": 0,
        "a2": 0,
        "c1": 1,
        "c2": 1,
        "d": 0,
        "g1": 0,
        "g2": 0,
    },
    "qj3": {"a1": 1, "c1": 1, "c2": 1, "g1": 0, "g2": 0},
    "dg": {"omega": 2},
    "dg_pauli": {},
    "tridiagonal": {"beta": 2, "gamma": 0, "gamma1": 0, "alpha": 4, "alpha1": 4},
    "krawtchouk": {"d": 12, "p": Fraction(1, 3)},
}

BUILTIN_NAMES = tuple(sorted(BUILTIN_DEFAULTS))


def _merged_params(name: str, params: Optional[Mapping]) -> dict:
    merged = dict(BUILTIN_DEFAULTS[name])
    for k, v in (params or {}).items():
        if k not in merged:
            known = ", ".join(sorted(merged)) or "none"
            raise ValueError(f"builtin {name!r} has no parameter {k!r} (accepts: {known})")
        merged[k] = v
    return merged


def builtin_bundle(name: str, params: Optional[Mapping] = None) -> AlgebraBundle:
    """Expand a registry name (plus overrides) into its facets."""
    if name not in BUILTIN_DEFAULTS:
        known = ", ".join(BUILTIN_NAMES)
        raise ValueError(f"unknown builtin {name!r} (have: {known})")
    p = _merged_params(name, params)
    bundle = AlgebraBundle(name=name, kind="builtin", params=p)
    if name == "qosc":
        bundle.adactions = {"Y": qosc_adaction(p["q"])}
        bundle.default_hamiltonian = "Y"
        bundle.rewrite = RewriteSystem.q_oscillator(p["q"])
    elif name == "weyl":
        bundle.adactions = {"Y": weyl_adaction(p["q"])}
        bundle.default_hamiltonian = "Y"
        bundle.rewrite = RewriteSystem.weyl(p["q"])
    elif name == "aw_z":
        bundle.adactions = {"Y": aw_z_adaction(p["q"], p["C1"], p["C3"])}
        bundle.default_hamiltonian = "Y"
        bundle.rewrite = RewriteSystem.aw_z(p["q"], p["C1"], p["C2"], p["C3"])
    elif name in ("aw_k", "qj3"):
        if name == "aw_k":
            k = AWKPresentation.make(**p)
        else:
            k = AWKPresentation.qj3(**p)
        bundle.adactions = {
            "K2": aw_k_adaction(k, "K2"),
            "K1": aw_k_adaction(k, "K1"),
        }
        bundle.default_hamiltonian = "K2"
    elif name in ("dg", "dg_pauli"):
        omega = p["omega"] if name == "dg" else 2
        system = DGSystem.plain(omega)
        bundle.dg = system
        bundle.adactions = {
            "A0": dg_adaction(system, "A0"),
            "A1": dg_adaction(system, "A1"),
        }
        bundle.default_hamiltonian = "A0"
        if name == "dg_pauli":
            bundle.rep = rep_pauli_dg()
    elif name == "tridiagonal":
        constants = TridiagonalConstants(
            as_scalar(p["beta"]),
            as_scalar(p["gamma"]),
            as_scalar(p["gamma1"]),
            as_scalar(p["alpha"]),
            as_scalar(p["alpha1"]),
        )
        system = DGSystem.from_tridiagonal(constants)
        bundle.dg = system
        bundle.adactions = {
            "A0": dg_adaction(system, "A0"),
            "A1": dg_adaction(system, "A1"),
        }
        bundle.default_hamiltonian = "A0"
    elif name == "krawtchouk":
        bundle.rep = rep_krawtchouk(_as_int(p["d"], "d"), _as_fraction(p["p"], "p"))
    return bundle


def bundles_equal(a: AlgebraBundle, b: AlgebraBundle) -> bool:
    """Exact structural equality of every facet two bundles carry."""
    if a.adactions.keys() != b.adactions.keys():
        return False
    if any(a.adactions[k] != b.adactions[k] for k in a.adactions):
        return False
    if a.default_hamiltonian != b.default_hamiltonian:
        return False
    if (a.rewrite is None) != (b.rewrite is None):
        return False
    if a.rewrite is not None:
        if tuple(a.rewrite.generators) != tuple(b.rewrite.generators):
            return False
        if dict(a.rewrite.rules) != dict(b.rewrite.rules):
            return False
    if a.dg != b.dg:
        return False
    if (a.rep is None) != (b.rep is None):
        return False
    if a.rep is not None:
        import numpy as np

        if a.rep.dim != b.rep.dim or a.rep.ops.keys() != b.rep.ops.keys():
            return False
        if any(not np.array_equal(a.rep.ops[k], b.rep.ops[k]) for k in a.rep.ops):
            return False
    if (a.poisson is None) != (b.poisson is None):
        return False
    if a.poisson is not None:
        if a.poisson.names != b.poisson.names:
            return False
        n = a.poisson.nvars
        for i in range(n):
            for k in range(i + 1, n):
                if a.poisson.bracket(i, k) != b.poisson.bracket(i, k):
                    return False
    return True


def _as_int(v, label: str) -> int:
    c = as_scalar(v)
    if not c.is_integer():
        raise ValueError(f"parameter {label!r} must be an integer")
    return int(c.re)


def _as_fraction(v, label: str) -> Fraction:
    c = as_scalar(v)
    if not c.is_real():
        raise ValueError(f"parameter {label!r} must be real")
    return c.re


def export_builtin(name: str, params: Optional[Mapping] = None) -> dict:
    """The JSON document a builtin round-trips through."""
    p = _merged_params(name, params)
    out = {"kind": "builtin", "name": name}
    if p:
        out["params"] = {k: scalar_to_text(as_scalar(v)) for k, v in p.items()}
    return out


def save_algebra_file(doc: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# representation specs for --rep flags


def parse_rep_spec(spec: str) -> tuple:
    """Decode "family[:arg:...]" into (rep, verified_cols).

    qosc:d:q builds the truncated ladder pair and marks the lower half
    of the columns as the block on which the defining relation is
    exact enough for oracle comparison; the other families are exact
    representations and verify on every column.
    """
    parts = spec.split(":")
    family = parts[0]
    args = parts[1:]
    if family == "qosc":
        if len(args) != 2:
            raise ValueError("rep spec 'qosc' needs d and q, like qosc:40:1/2")
        d = int(args[0])
        rep = rep_q_oscillator(d, Fraction(args[1]))
        return rep, d // 2
    if family == "krawtchouk":
        if len(args) != 2:
            raise ValueError("rep spec 'krawtchouk' needs d and p, like krawtchouk:12:1/3")
        rep = rep_krawtchouk(int(args[0]), Fraction(args[1]))
        return rep, None
    if family == "dg_pauli":
        if args:
            raise ValueError("rep spec 'dg_pauli' takes no arguments")
        return rep_pauli_dg(), None
    raise ValueError(f"unknown rep family {family!r} (have: dg_pauli, krawtchouk, qosc)")


def resolve_algebra(target: str) -> AlgebraBundle:
    """A positional algebra argument: a builtin name or a file path."""
    import os

    if target in BUILTIN_DEFAULTS and not os.path.exists(target):
        return builtin_bundle(target)
    if not os.path.exists(target):
        raise ValueError(f"{target!r} is neither a definition file nor a builtin name")
    return load_algebra_file(target)
