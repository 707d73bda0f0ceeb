"""Pseudohermitian models: structure data, connection solve, curvature.

A Model packages a coframe-level pseudohermitian structure: the Levi matrix
h, the structure forms d(theta^a) with constant coefficients (zero on the
flat Heisenberg group), the solved connection and torsion, and the derived
curvature tables.  The contact form differential d(theta) is always forced
to i h_{ab} theta^a ^ theta^bbar.

Coefficients are polynomials in z, zb, t with model-supplied derivations;
on invariant (quotient) models the derivations are zero and everything is
constant, which is what makes the downstream cohomology finite-dimensional.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Tuple

from . import linalg
from .errors import (ConnectionSolveFailure, InconsistentSystem, JacobiFailure,
                     LeviMismatch, NonUniqueSolution, SymmetryViolation)
from .forms import Form, Key
from .linalg import ExactMatrix
from .poly import Poly
from .scalars import I, ONE, ZERO, Scalar, as_scalar


class CoefficientRing:
    """Polynomials in z^1..z^n, zb^1..zb^n, t with the frame derivations.

    invariant=True models quotients: the subring of constants, where all
    three derivation families vanish identically.
    """

    def __init__(self, n: int, invariant: bool):
        self.n = n
        self.invariant = invariant
        self.nvars = 2 * n + 1

    def zero(self) -> Poly:
        return Poly(self.nvars)

    def const(self, c) -> Poly:
        return Poly.const(self.nvars, c)

    def one(self) -> Poly:
        return self.const(1)

    def z(self, a: int) -> Poly:
        return Poly.var(self.nvars, a - 1)

    def zb(self, a: int) -> Poly:
        return Poly.var(self.nvars, self.n + a - 1)

    def t(self) -> Poly:
        return Poly.var(self.nvars, 2 * self.n)

    # Z_a = d/dz^a + (i zb^a / 2) d/dt, Zbar_a its conjugate, T = d/dt.
    def Z(self, a: int, f: Poly) -> Poly:
        if self.invariant:
            return self.zero()
        return f.partial(a - 1) + self.zb(a).scale(Scalar(0, Fraction(1, 2))) * f.partial(2 * self.n)

    def Zbar(self, a: int, f: Poly) -> Poly:
        if self.invariant:
            return self.zero()
        return f.partial(self.n + a - 1) + self.z(a).scale(Scalar(0, Fraction(-1, 2))) * f.partial(2 * self.n)

    def T(self, f: Poly) -> Poly:
        if self.invariant:
            return self.zero()
        return f.partial(2 * self.n)

    def derive(self, direction, f: Poly) -> Poly:
        kind, idx = direction
        if kind == "0":
            return self.T(f)
        if kind == "h":
            return self.Z(idx, f)
        return self.Zbar(idx, f)


def apply_derivation(model: "Model", which: Tuple[str, int], f: Poly) -> Poly:
    """which = ('h', a) for Z_a, ('a', b) for Zbar_b, ('0', 0) for T."""
    return model.ring.derive(which, f)


class Tensor:
    """Dense-dict tensor with typed lower slots ('h' or 'a'), 1-based indices.

    Keys run over all index tuples (not just sorted ones); skew inputs are
    expanded so that covariant differentiation needs no symmetry bookkeeping.
    """

    __slots__ = ("slots", "n", "nvars", "comps")

    def __init__(self, slots: str, n: int, nvars: int, comps: Dict[tuple, Poly] | None = None):
        self.slots = slots
        self.n = n
        self.nvars = nvars
        self.comps = {} if comps is None else {k: v for k, v in comps.items() if v}

    def get(self, key: tuple) -> Poly:
        c = self.comps.get(key)
        return Poly(self.nvars) if c is None else c

    def is_zero(self) -> bool:
        return not self.comps

    def __add__(self, other: "Tensor") -> "Tensor":
        if self.slots != other.slots:
            raise ValueError("slot mismatch")
        out = dict(self.comps)
        for k, c in other.comps.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Tensor(self.slots, self.n, self.nvars, out)

    def __neg__(self) -> "Tensor":
        return Tensor(self.slots, self.n, self.nvars, {k: -c for k, c in self.comps.items()})

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + (-other)

    def scale(self, c) -> "Tensor":
        if not isinstance(c, Poly):
            c = Poly.const(self.nvars, c)
        return Tensor(self.slots, self.n, self.nvars, {k: c * v for k, v in self.comps.items()})

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.slots == other.slots and self.comps == other.comps

    def __repr__(self):
        return f"Tensor({self.slots!r}, {len(self.comps)} comps)"


def perms_with_sign(t: tuple):
    items = list(t)
    for perm in permutations(range(len(items))):
        sign = 1
        seen = [False] * len(items)
        for start in range(len(items)):
            if seen[start]:
                continue
            length = 0
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        yield tuple(items[perm[i]] for i in range(len(items))), sign


class Model:
    """Immutable pseudohermitian structure package."""

    def __init__(self, n: int, invariant: bool, h: ExactMatrix, d_theta_h: List[Form], name: str = ""):
        self.n = n
        self.name = name or f"model-n{n}"
        self.invariant = invariant
        self.ring = CoefficientRing(n, invariant)
        self.h = h
        # Hinv[a][b] = h^{a bbar}; raising uses v^a = h^{a b} v_bbar etc.
        self.hinv = linalg.inverse(h.transpose())
        self.d_theta = self._build_d_theta()
        self.d_theta_h = d_theta_h
        self.d_theta_a = [f.conj() for f in d_theta_h]
        self._cache: Dict = {}
        # filled by solve/derive below
        self.connection: List[List[Form]] = []
        self.tau: List[Form] = []
        self.torsion = ExactMatrix(n, n)
        self.curvature: Dict[Tuple[int, int, int, int], Scalar] = {}
        self.ricci = ExactMatrix(n, n)
        self.scalar = ZERO
        self.schouten = ExactMatrix(n, n)
        self.chern: Dict[Tuple[int, int, int, int], Scalar] = {}

    # -- structure forms -------------------------------------------------------

    def _build_d_theta(self) -> Form:
        nv = self.ring.nvars
        out = Form.zero(self.n, nv, 2)
        for a in range(1, self.n + 1):
            for b in range(1, self.n + 1):
                hab = self.h.data[a - 1][b - 1]
                if hab:
                    out = out + Form.monomial(self.n, nv, False, (a,), (b,), I * hab)
        return out

    def one_form_basis_symbol(self, sym) -> Form:
        kind, idx = sym
        nv = self.ring.nvars
        if kind == 0:
            return Form.monomial(self.n, nv, True, (), (), 1)
        if kind == 1:
            return Form.monomial(self.n, nv, False, (idx,), (), 1)
        return Form.monomial(self.n, nv, False, (), (idx,), 1)

    def structure_two_form(self, sym) -> Form:
        kind, idx = sym
        if kind == 0:
            return self.d_theta
        if kind == 1:
            return self.d_theta_h[idx - 1]
        return self.d_theta_a[idx - 1]

    # -- exterior derivative ----------------------------------------------------

    def _d_monomial(self, key: Key) -> Form:
        cached = self._cache.get(("dmono", key))
        if cached is not None:
            return cached
        theta, A, B = key
        syms = ([(0, 0)] if theta else []) + [(1, a) for a in A] + [(2, b) for b in B]
        nv = self.ring.nvars
        out = Form.zero(self.n, nv, len(syms) + 1)
        for j in range(len(syms)):
            term = self.structure_two_form(syms[j])
            for s in reversed(syms[:j]):
                term = self.one_form_basis_symbol(s).wedge(term)
            for s in syms[j + 1:]:
                term = term.wedge(self.one_form_basis_symbol(s))
            if j % 2 == 1:
                term = -term
            out = out + term
        self._cache[("dmono", key)] = out
        return out

    def differential_of_function(self, f: Poly) -> Form:
        nv = self.ring.nvars
        out = Form.zero(self.n, nv, 1)
        tf = self.ring.T(f)
        if tf:
            out = out + Form.monomial(self.n, nv, True, (), (), 1).scale(tf)
        for a in range(1, self.n + 1):
            za = self.ring.Z(a, f)
            if za:
                out = out + Form.monomial(self.n, nv, False, (a,), (), 1).scale(za)
            zba = self.ring.Zbar(a, f)
            if zba:
                out = out + Form.monomial(self.n, nv, False, (), (a,), 1).scale(zba)
        return out

    def d(self, form: Form) -> Form:
        out = Form.zero(self.n, self.ring.nvars, form.degree + 1)
        for key, f in form.terms.items():
            df = self.differential_of_function(f)
            if df:
                mono = Form(self.n, self.ring.nvars, form.degree, {key: Poly.const(self.ring.nvars, 1)})
                out = out + df.wedge(mono)
            dE = self._d_monomial(key)
            if dE:
                out = out + dE.scale(f)
        return out

    # -- Levi form index gymnastics ----------------------------------------------

    def h_at(self, a: int, b: int) -> Scalar:
        """h_{a bbar}."""
        return self.h.data[a - 1][b - 1]

    def hinv_at(self, a: int, b: int) -> Scalar:
        """h^{a bbar}."""
        return self.hinv.data[a - 1][b - 1]

    def is_strictly_pseudoconvex(self) -> bool:
        return linalg.rank(self.h) == self.n and linalg.is_hermitian_psd(self.h)

    def is_torsion_free(self) -> bool:
        return self.torsion.is_zero()

    # -- connection coefficients ---------------------------------------------------

    def conn_h(self, direction, a: int, m: int) -> Poly:
        """omega_a^m evaluated on the frame direction."""
        form = self.connection[a - 1][m - 1]
        kind, idx = direction
        if kind == "0":
            return form.coefficient((True, (), ()))
        if kind == "h":
            return form.coefficient((False, (idx,), ()))
        return form.coefficient((False, (), (idx,)))

    def conn_a(self, direction, b: int, nidx: int) -> Poly:
        """omega_bbar^nbar on a direction: conjugate of conn_h on the conjugate."""
        kind, idx = direction
        conj_dir = ("0", 0) if kind == "0" else (("a", idx) if kind == "h" else ("h", idx))
        return self.conn_h(conj_dir, b, nidx).conj()

    # -- covariant differentiation ---------------------------------------------------

    def _cov(self, T: Tensor, direction) -> Tensor:
        out: Dict[tuple, Poly] = {}
        ring = self.ring
        flat = self.connection_is_zero()
        for key, f in T.comps.items():
            base = ring.derive(direction, f)
            if base:
                _acc(out, key, base)
            if flat:
                continue
            for j, slot in enumerate(T.slots):
                kj = key[j]
                for m in range(1, self.n + 1):
                    g = self.conn_h(direction, kj, m) if slot == "h" else self.conn_a(direction, kj, m)
                    if g:
                        _acc(out, key[:j] + (m,) + key[j + 1:], -(g * f))
        return Tensor(T.slots, self.n, ring.nvars, out)

    def connection_is_zero(self) -> bool:
        flag = self._cache.get("connzero")
        if flag is None:
            flag = all(form.is_zero() for row in self.connection for form in row)
            self._cache["connzero"] = flag
        return flag

    def cov_h(self, T: Tensor) -> Tensor:
        """Prepend a holomorphic slot: (cov_h T)_{g, K} = nabla_g T_K."""
        out: Dict[tuple, Poly] = {}
        for g in range(1, self.n + 1):
            part = self._cov(T, ("h", g))
            for key, f in part.comps.items():
                out[(g,) + key] = f
        return Tensor("h" + T.slots, self.n, self.ring.nvars, out)

    def cov_a(self, T: Tensor) -> Tensor:
        out: Dict[tuple, Poly] = {}
        for s in range(1, self.n + 1):
            part = self._cov(T, ("a", s))
            for key, f in part.comps.items():
                out[(s,) + key] = f
        return Tensor("a" + T.slots, self.n, self.ring.nvars, out)

    def cov_0(self, T: Tensor) -> Tensor:
        return self._cov(T, ("0", 0))


def _acc(store: Dict, key, value):
    s = store.get(key)
    s = value if s is None else s + value
    if s:
        store[key] = s
    else:
        store.pop(key, None)


def covariant_derivative(model: Model, T: Tensor):
    """All three derivative families of a typed tensor."""
    return {"h": model.cov_h(T), "a": model.cov_a(T), "0": model.cov_0(T)}


def tensor_from_form(model: Model, form: Form, p: int, q: int, use_theta_part: bool = False) -> Tensor:
    """Expand a pure (p,q) horizontal form (or theta-part) into full components."""
    comps: Dict[tuple, Poly] = {}
    src = form.theta_part() if use_theta_part else form.horizontal()
    for (theta, A, B), c in src.terms.items():
        if len(A) != p or len(B) != q:
            raise ValueError(f"key ({A},{B}) does not have bidegree ({p},{q})")
        for pa, sa in perms_with_sign(A):
            for pb, sb in perms_with_sign(B):
                s = sa * sb
                comps[pa + pb] = c if s == 1 else -c
    return Tensor("h" * p + "a" * q, model.n, model.ring.nvars, comps)


def form_from_table(model: Model, T: Tensor, p: int, q: int) -> Form:
    """Rebuild the horizontal form whose sorted components are the table's."""
    from .multiindex import multi_indices
    nv = model.ring.nvars
    out: Dict[Key, Poly] = {}
    for A in multi_indices(model.n, p):
        for B in multi_indices(model.n, q):
            c = T.get(A + B)
            if c:
                out[(False, A, B)] = c
    return Form(model.n, nv, p + q, out)


# -- constructors ---------------------------------------------------------------


def build_heisenberg(n: int, invariant: bool = True) -> Model:
    """Flat model: H^n when invariant=False, its compact quotient otherwise."""
    if n < 1:
        raise ValueError("n must be at least 1")
    h = ExactMatrix.identity(n)
    ring = CoefficientRing(n, invariant)
    zero2 = [Form.zero(n, ring.nvars, 2) for _ in range(n)]
    model = Model(n, invariant, h, zero2,
                  name=f"heisenberg-quotient:{n}" if invariant else f"heisenberg:{n}")
    _solve_and_derive(model)
    return model


def build_custom(data: dict) -> Model:
    """Validated model from structure-constant input (see README for schema)."""
    n = data.get("n")
    if not isinstance(n, int) or n < 1:
        raise LeviMismatch("field 'n' must be a positive integer")
    levi = data.get("levi")
    if not isinstance(levi, list) or len(levi) != n:
        raise LeviMismatch("field 'levi' must be an n x n matrix")
    h = ExactMatrix(n, n, [[_parse_complex(x) for x in row] for row in levi])
    if not h.is_hermitian():
        raise LeviMismatch("Levi matrix is not hermitian")
    if linalg.rank(h) != n:
        raise LeviMismatch("Levi matrix is singular")
    ring = CoefficientRing(n, True)
    d_theta_h = [Form.zero(n, ring.nvars, 2) for _ in range(n)]
    for entry in data.get("d_theta_alpha", []):
        a = entry["alpha"]
        if not 1 <= a <= n:
            raise LeviMismatch(f"alpha={a} out of range")
        f = Form.zero(n, ring.nvars, 2)
        for term in entry.get("terms", []):
            key = term["key"]
            coeff = term["coeff"]
            c = Scalar(Fraction(coeff[0], coeff[1]), Fraction(coeff[2], coeff[3]))
            f = f + Form.monomial(n, ring.nvars, bool(key.get("theta", False)),
                                  tuple(key.get("A", ())), tuple(key.get("B", ())), c)
        d_theta_h[a - 1] = f
    model = Model(n, True, h, d_theta_h, name=str(data.get("name", f"custom:{n}")))
    # Jacobi: d^2 = 0 on every coframe element, checked before the solve.
    if model.d(model.d_theta):
        raise JacobiFailure("d(d theta) != 0")
    for a in range(n):
        if model.d(model.d_theta_h[a]):
            raise JacobiFailure(f"d(d theta^{a + 1}) != 0")
    _solve_and_derive(model)
    return model


def _parse_complex(x) -> Scalar:
    def frac(v):
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return Fraction(v[0], v[1])
        raise LeviMismatch(f"bad rational entry {v!r}")
    if isinstance(x, int):
        return Scalar(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Scalar(frac(x[0]), frac(x[1]))
    raise LeviMismatch(f"bad complex entry {x!r}")


def _solve_and_derive(model: Model):
    conn, tau, torsion = solve_tanaka_webster(model)
    model.connection = conn
    model.tau = tau
    model.torsion = torsion
    derive_curvature(model)


# -- the connection solve ----------------------------------------------------------


def solve_tanaka_webster(model: Model):
    """Unique (omega_a^g, tau^a) satisfying the four structural conditions.

    Unknown one-form coefficients are split into real and imaginary parts so
    the conjugations in the compatibility conditions stay linear; the solve
    asserts uniqueness, since non-uniqueness signals malformed input.
    """
    n = model.n
    dirs = [("0", 0)] + [("h", g) for g in range(1, n + 1)] + [("a", s) for s in range(1, n + 1)]
    ndir = len(dirs)

    def widx(a, g, d):
        return ((a - 1) * n + (g - 1)) * ndir + d

    nomega = n * n * ndir

    def tidx(a, s):
        return nomega + (a - 1) * n + (s - 1)

    nunk = nomega + n * n

    # complex-linear rows: list of (coeff-on-u, coeff-on-conj(u)) per unknown
    rows = []
    rhs = []

    def add_row(lin: Dict[int, Scalar], bar: Dict[int, Scalar], value: Scalar):
        rows.append((lin, bar))
        rhs.append(value)

    from .forms import ambient_keys
    keys2 = ambient_keys(n, 2)

    # condition (i): d theta^a = theta^mu ^ omega_mu^a + theta ^ tau^a
    for a in range(1, n + 1):
        target = model.d_theta_h[a - 1]
        per_key: Dict[Key, Dict[int, Scalar]] = {}

        def put(key, u, c):
            if not c:
                return
            d = per_key.setdefault(key, {})
            d[u] = d.get(u, ZERO) + c

        for mu in range(1, n + 1):
            mu_form = Form.monomial(n, model.ring.nvars, False, (mu,), (), 1)
            for d, direction in enumerate(dirs):
                basis = model.one_form_basis_symbol(
                    (0, 0) if direction[0] == "0" else ((1, direction[1]) if direction[0] == "h" else (2, direction[1])))
                prod = mu_form.wedge(basis)
                for key, c in prod.terms.items():
                    put(key, widx(mu, a, d), c.constant_value())
        theta_form = Form.monomial(n, model.ring.nvars, True, (), (), 1)
        for s in range(1, n + 1):
            basis = Form.monomial(n, model.ring.nvars, False, (), (s,), 1)
            prod = theta_form.wedge(basis)
            for key, c in prod.terms.items():
                put(key, tidx(a, s), c.constant_value())
        for key in keys2:
            lin = per_key.get(key, {})
            tval = target.coefficient(key)
            if not tval.is_constant():
                raise ConnectionSolveFailure("structure coefficients must be constant")
            if lin or tval:
                add_row(lin, {}, tval.constant_value())

    # condition (iii): omega_{a b} + conj(omega_{b a-slot}) = dh = 0
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            for d, direction in enumerate(dirs):
                kind, idx = direction
                conj_d = d if kind == "0" else (d + n if kind == "h" else d - n)
                lin: Dict[int, Scalar] = {}
                bar: Dict[int, Scalar] = {}
                for mu in range(1, n + 1):
                    lin[widx(a, mu, d)] = lin.get(widx(a, mu, d), ZERO) + model.h_at(mu, b)
                    u = widx(b, mu, conj_d)
                    bar[u] = bar.get(u, ZERO) + model.h_at(mu, a).conj()
                add_row(lin, bar, ZERO)

    # condition (iv): theta^mu ^ tau_mu = 0 with tau_mu = h_{mu nu} conj(tau^nu)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            bar: Dict[int, Scalar] = {}
            for nu in range(1, n + 1):
                u1 = tidx(nu, j)
                bar[u1] = bar.get(u1, ZERO) + model.h_at(i, nu)
                u2 = tidx(nu, i)
                bar[u2] = bar.get(u2, ZERO) - model.h_at(j, nu)
            add_row({}, bar, ZERO)

    # realify: unknown u = x + i y; a*u + b*conj(u) contributes
    # Re-row: Re(a+b) x - Im(a-b) y ; Im-row: Im(a+b) x + Re(a-b) y
    mat = [[ZERO] * (2 * nunk) for _ in range(2 * len(rows))]
    vec = []
    for r, ((lin, bar), value) in enumerate(zip(rows, rhs)):
        for u in set(lin) | set(bar):
            aa = lin.get(u, ZERO)
            bb = bar.get(u, ZERO)
            s, dmd = aa + bb, aa - bb
            mat[2 * r][u] = Scalar(s.re)
            mat[2 * r][nunk + u] = Scalar(-dmd.im)
            mat[2 * r + 1][u] = Scalar(s.im)
            mat[2 * r + 1][nunk + u] = Scalar(dmd.re)
        vec.append(Scalar(value.re))
        vec.append(Scalar(value.im))

    try:
        sol = linalg.solve(ExactMatrix.from_rows(mat), vec, unique=True)
    except (InconsistentSystem, NonUniqueSolution) as exc:
        raise ConnectionSolveFailure(str(exc)) from exc

    def val(u) -> Scalar:
        return Scalar(sol[u].re, sol[nunk + u].re)

    nv = model.ring.nvars
    conn = [[Form.zero(n, nv, 1) for _ in range(n)] for _ in range(n)]
    for a in range(1, n + 1):
        for g in range(1, n + 1):
            f = Form.zero(n, nv, 1)
            for d, direction in enumerate(dirs):
                c = val(widx(a, g, d))
                if not c:
                    continue
                kind, idx = direction
                sym = (0, 0) if kind == "0" else ((1, idx) if kind == "h" else (2, idx))
                f = f + model.one_form_basis_symbol(sym).scale(c)
            conn[a - 1][g - 1] = f
    tau = []
    for a in range(1, n + 1):
        f = Form.zero(n, nv, 1)
        for s in range(1, n + 1):
            c = val(tidx(a, s))
            if c:
                f = f + Form.monomial(n, nv, False, (), (s,), c)
        tau.append(f)

    # torsion: tau^{bbar} = A_a^{bbar} theta^a gives A_a^{bbar} = conj(tc[b][a]);
    # lowering, A_{ag} = sum_b conj(tc[b][a]) h_{g b}
    torsion = ExactMatrix(n, n)
    for a in range(1, n + 1):
        for g in range(1, n + 1):
            acc = ZERO
            for b in range(1, n + 1):
                acc = acc + val(tidx(b, a)).conj() * model.h_at(g, b)
            torsion.data[a - 1][g - 1] = acc
    for a in range(n):
        for g in range(n):
            if torsion.data[a][g] != torsion.data[g][a]:
                raise ConnectionSolveFailure("computed torsion is not symmetric")
    return conn, tau, torsion


# -- curvature -----------------------------------------------------------------------


def derive_curvature(model: Model):
    """Fill curvature, Ricci, scalar, Schouten, Chern; verify symmetries and Bianchi."""
    n = model.n
    nv = model.ring.nvars
    omega_forms = [[model.connection[a][g] for g in range(n)] for a in range(n)]
    big_omega = [[None] * n for _ in range(n)]
    for a in range(n):
        for g in range(n):
            f = model.d(omega_forms[a][g])
            for m in range(n):
                f = f - omega_forms[a][m].wedge(omega_forms[m][g])
            big_omega[a][g] = f

    # Bianchi: d Omega_a^g = omega_a^m ^ Omega_m^g - Omega_a^m ^ omega_m^g
    for a in range(n):
        for g in range(n):
            resid = model.d(big_omega[a][g])
            for m in range(n):
                resid = resid - omega_forms[a][m].wedge(big_omega[m][g]) + big_omega[a][m].wedge(omega_forms[m][g])
            if resid:
                raise SymmetryViolation("Bianchi identity fails; structure data is inconsistent")

    curvature: Dict[Tuple[int, int, int, int], Scalar] = {}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            lowered = Form.zero(n, nv, 2)
            for g in range(1, n + 1):
                hgb = model.h_at(g, b)
                if hgb:
                    lowered = lowered + big_omega[a - 1][g - 1].scale(hgb)
            for r in range(1, n + 1):
                for s in range(1, n + 1):
                    c = lowered.component(False, (r,), (s,))
                    if not c.is_constant():
                        raise SymmetryViolation("curvature has non-constant components")
                    v = c.constant_value()
                    if v:
                        curvature[(a, b, r, s)] = v

    def R(a, b, r, s) -> Scalar:
        return curvature.get((a, b, r, s), ZERO)

    for (a, b, r, s) in list(curvature):
        if R(a, b, r, s) != R(a, s, r, b) or R(a, b, r, s) != R(r, s, a, b):
            raise SymmetryViolation("curvature lacks its pair symmetries")
        if R(a, b, r, s).conj() != R(b, a, s, r):
            raise SymmetryViolation("curvature is not conjugate-symmetric")

    ricci = ExactMatrix(n, n)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            acc = ZERO
            for m in range(1, n + 1):
                for s in range(1, n + 1):
                    acc = acc + R(a, b, m, s) * model.hinv_at(m, s)
            ricci.data[a - 1][b - 1] = acc
    if not ricci.is_hermitian():
        raise SymmetryViolation("Ricci tensor is not hermitian")

    scalar = ZERO
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            scalar = scalar + ricci.data[a - 1][b - 1] * model.hinv_at(a, b)

    schouten = ExactMatrix(n, n)
    coef = Scalar(Fraction(1, n + 2))
    for a in range(n):
        for b in range(n):
            schouten.data[a][b] = coef * (ricci.data[a][b] - scalar * Scalar(Fraction(1, 2 * (n + 1))) * model.h.data[a][b])

    chern: Dict[Tuple[int, int, int, int], Scalar] = {}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            for g in range(1, n + 1):
                for s in range(1, n + 1):
                    v = (R(a, b, g, s)
                         - schouten.data[a - 1][b - 1] * model.h_at(g, s)
                         - schouten.data[a - 1][s - 1] * model.h_at(g, b)
                         - schouten.data[g - 1][b - 1] * model.h_at(a, s)
                         - schouten.data[g - 1][s - 1] * model.h_at(a, b))
                    if v:
                        chern[(a, b, g, s)] = v
    # total trace-freeness of the Chern tensor
    for g in range(1, n + 1):
        for s in range(1, n + 1):
            acc = ZERO
            for m in range(1, n + 1):
                for t in range(1, n + 1):
                    acc = acc + chern.get((m, t, g, s), ZERO) * model.hinv_at(m, t)
            if acc:
                raise SymmetryViolation("Chern tensor is not trace-free")

    model.curvature = curvature
    model.ricci = ricci
    model.scalar = scalar
    model.schouten = schouten
    model.chern = chern
    model.big_omega = big_omega


# -- torsion / Ricci raising helpers used by the operator layer ---------------------


def torsion_mixed(model: Model) -> ExactMatrix:
    """A_a^{bbar} = A_{ag} h^{g bbar} (row a, column b)."""
    n = model.n
    out = ExactMatrix(n, n)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            acc = ZERO
            for g in range(1, n + 1):
                acc = acc + model.torsion.data[a - 1][g - 1] * model.hinv_at(g, b)
            out.data[a - 1][b - 1] = acc
    return out


def torsion_mixed_bar(model: Model) -> ExactMatrix:
    """A_bbar^{m} (row b, column m): conjugate of the mixed torsion."""
    return torsion_mixed(model).conj()
