"""Rumin spaces: Lefschetz machinery, projections, Hodge star, pairings.

The projection pi onto the Rumin space of a degree is built from the partial
Lefschetz inverse G (a fiberwise exact linear solve against cached wedge
matrices), and the bigraded refinement is cut out by horizontal type.
Everything here works for polynomial as well as constant coefficients: the
solve matrices are constant, only right-hand sides carry polynomials.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import List, Optional, Tuple

from . import linalg
from .errors import (BadBidegree, MembershipViolation, NotStrictlyPseudoconvex,
                     NotTraceFree, BidegreeMismatch)
from .forms import Form, ambient_keys, from_vec
from .linalg import ExactMatrix
from .models import Model, tensor_from_form
from .multiindex import multi_indices, remove_at
from .poly import Poly
from .scalars import ONE, ZERO, Scalar, as_scalar, ipow


class RuminForm:
    """A Form plus an asserted membership tag ('k', k) or ('pq', p, q)."""

    __slots__ = ("form", "tag")

    def __init__(self, form: Form, tag: Optional[tuple] = None):
        self.form = form
        self.tag = tag

    @property
    def bidegree(self) -> Tuple[int, int]:
        if self.tag and self.tag[0] == "pq":
            return self.tag[1], self.tag[2]
        raise BadBidegree("form carries no bidegree tag")

    def __repr__(self):
        return f"RuminForm(tag={self.tag}, {self.form!r})"


def theta_form(model: Model) -> Form:
    return Form.monomial(model.n, model.ring.nvars, True, (), (), 1)


def dtheta_pow(model: Model, j: int) -> Form:
    if j < 0:
        return Form.zero(model.n, model.ring.nvars, 0)
    cached = model._cache.get(("dthpow", j))
    if cached is None:
        if j == 0:
            cached = Form.monomial(model.n, model.ring.nvars, False, (), (), 1)
        else:
            cached = dtheta_pow(model, j - 1).wedge(model.d_theta)
        model._cache[("dthpow", j)] = cached
    return cached


# -- Lefschetz operator and adjoint ------------------------------------------------


def lefschetz_L(model: Model, form: Form) -> Form:
    return form.wedge(model.d_theta)


def lefschetz_Lambda(model: Model, form: Form) -> Form:
    """Adjoint Lefschetz operator on theta ^ Omega^{p,q}."""
    if form.horizontal():
        raise MembershipViolation("Lambda is defined on theta ^ Omega^{p,q}")
    eta = form.theta_part()
    bid = eta.horizontal_bidegrees()
    if not bid:
        return Form.zero(model.n, model.ring.nvars, max(form.degree - 2, 0))
    if len(bid) > 1:
        raise MembershipViolation("Lambda input must be of pure type")
    (p, q), = bid
    if p == 0 or q == 0:
        return Form.zero(model.n, model.ring.nvars, form.degree - 2)
    tr = trace_form(model, eta, p, q)
    sign = as_scalar(-1 if p % 2 else 1) * Scalar(0, 1)
    return theta_form(model).wedge(tr).scale(sign)


def trace_form(model: Model, form: Form, p: int, q: int) -> Form:
    """Levi trace om_{m A'} {}^{m} {}_{B'} of a horizontal (p,q) form."""
    n = model.n
    nv = model.ring.nvars
    out = Form.zero(n, nv, p + q - 2)
    for A in multi_indices(n, p - 1):
        for B in multi_indices(n, q - 1):
            acc = Poly(nv)
            for mu in range(1, n + 1):
                for nu in range(1, n + 1):
                    c = model.hinv_at(mu, nu)
                    if not c:
                        continue
                    comp = form.component(False, (mu,) + A, (nu,) + B)
                    if comp:
                        acc = acc + comp.scale(c)
            if acc:
                out = out + Form(n, nv, p + q - 2, {(False, A, B): acc})
    return out


def is_primitive(model: Model, form: Form, p: int, q: int) -> bool:
    if p == 0 or q == 0:
        return True
    return trace_form(model, form, p, q).is_zero()


# -- the partial Lefschetz inverse -------------------------------------------------


def _gamma_matrix(model: Model, k: int):
    """Cached matrix of xi |-> theta ^ xi ^ dtheta^power in ambient coordinates."""
    cached = model._cache.get(("gammamat", k))
    if cached is not None:
        return cached
    n = model.n
    if k <= n:
        src_deg, power = k - 2, n + 2 - k
    else:
        src_deg, power = 2 * n - k, k - n
    if src_deg < 0:
        cached = (tuple(), tuple(), ExactMatrix(0, 0), power)
        model._cache[("gammamat", k)] = cached
        return cached
    src_keys = [key for key in ambient_keys(n, src_deg) if not key[0]]
    dst_deg = src_deg + 1 + 2 * power
    dst_keys = list(ambient_keys(n, dst_deg))
    th = theta_form(model)
    pw = dtheta_pow(model, power)
    cols = []
    for key in src_keys:
        mono = Form(n, model.ring.nvars, src_deg, {key: Poly.const(model.ring.nvars, 1)})
        img = th.wedge(mono).wedge(pw)
        cols.append([c.constant_value() for c in img.vec(dst_keys)])
    mat = ExactMatrix.from_columns(cols) if cols else ExactMatrix(len(dst_keys), 0)
    cached = (tuple(src_keys), tuple(dst_keys), mat, power)
    model._cache[("gammamat", k)] = cached
    return cached


def gamma(model: Model, form: Form) -> Form:
    """Partial inverse of the Lefschetz operator; unique exact solve."""
    n = model.n
    k = form.degree
    src_keys, dst_keys, mat, power = _gamma_matrix(model, k)
    nv = model.ring.nvars
    if not src_keys:
        return Form.zero(n, nv, max(k - 2, 0))
    th = theta_form(model)
    if k <= n:
        rhs_form = th.wedge(form).wedge(dtheta_pow(model, n + 1 - k))
    else:
        rhs_form = th.wedge(form)
    rhs = rhs_form.vec(list(dst_keys))
    sol = linalg.solve(mat, rhs, unique=True)
    xi = from_vec(n, nv, k - 2 if k <= n else 2 * n - k, list(src_keys), sol)
    if k <= n:
        return th.wedge(xi)
    return th.wedge(xi).wedge(dtheta_pow(model, k - n - 1))


def pi(model: Model, form: Form) -> Form:
    """Projection onto the Rumin space of the form's degree."""
    return form - model.d(gamma(model, form)) - gamma(model, model.d(form))


# -- membership ---------------------------------------------------------------------


def in_rumin_k(model: Model, form: Form, k: Optional[int] = None) -> bool:
    n = model.n
    if k is None:
        k = form.degree
    elif k != form.degree:
        return False
    th = theta_form(model)
    if k <= n:
        if th.wedge(form).wedge(dtheta_pow(model, n + 1 - k)):
            return False
        return not th.wedge(model.d(form)).wedge(dtheta_pow(model, n - k))
    if th.wedge(form):
        return False
    return not th.wedge(model.d(form))


def in_rumin_pq(model: Model, form: Form, p: int, q: int) -> bool:
    n = model.n
    if p + q != form.degree:
        return False
    if not in_rumin_k(model, form):
        return False
    if p + q <= n:
        return form.horizontal_bidegrees() <= {(p, q)}
    if form.horizontal():
        return False
    return form.theta_bidegrees() <= {(p - 1, q)}


def validate_pq(model: Model, form: Form, p: int, q: int):
    if not in_rumin_pq(model, form, p, q):
        raise MembershipViolation(f"form is not in the ({p},{q}) Rumin space")


# -- bigraded projections -------------------------------------------------------------


def pi_pq(model: Model, form: Form, p: int, q: int) -> Form:
    """Bigraded component of an element of the Rumin space of degree p+q."""
    k = form.degree
    if p + q != k or p < 0 or q < 0 or p > model.n + 1 or q > model.n:
        raise BadBidegree(f"({p},{q}) incompatible with degree {k}")
    n = model.n
    if k <= n:
        slice_pq = form.bidegree_component(p, q)
        return pi(model, slice_pq)
    eta = form.theta_part().bidegree_component(p - 1, q)
    return theta_form(model).wedge(eta)


def project_E(model: Model, horizontal: Form, p: int, q: int, check: bool = True) -> Form:
    """Unique Rumin-space element with the given trace-free horizontal part.

    The two theta-correction terms divide the horizontal covariant divergences
    by n - p - q + 1; requires p + q <= n.
    """
    n = model.n
    nv = model.ring.nvars
    if p + q > n:
        raise BadBidegree("projection with corrections needs p + q <= n")
    if not horizontal.is_horizontal() or not horizontal.horizontal_bidegrees() <= {(p, q)}:
        raise BadBidegree("input must be a horizontal (p,q) form")
    if check and not is_primitive(model, horizontal, p, q):
        raise NotTraceFree("horizontal part must be trace-free")
    weight = Scalar(Fraction(1, n - p - q + 1))
    out = horizontal
    T = tensor_from_form(model, horizontal, p, q)
    if p >= 1:
        Ta = model.cov_a(T)
        for A1 in multi_indices(n, p - 1):
            for B in multi_indices(n, q):
                acc = Poly(nv)
                for mu in range(1, n + 1):
                    for nu in range(1, n + 1):
                        c = model.hinv_at(mu, nu)
                        if c:
                            v = Ta.get((nu, mu) + A1 + B)
                            if v:
                                acc = acc + v.scale(c)
                if acc:
                    coeff = acc.scale(Scalar(0, -1) * weight)
                    out = out + Form(n, nv, p + q, {(True, A1, B): coeff})
    if q >= 1:
        Th = model.cov_h(T)
        sgn = ONE if p % 2 == 0 else as_scalar(-1)
        for A in multi_indices(n, p):
            for B1 in multi_indices(n, q - 1):
                acc = Poly(nv)
                for mu in range(1, n + 1):
                    for nu in range(1, n + 1):
                        c = model.hinv_at(mu, nu)
                        if c:
                            v = Th.get((mu,) + A + (nu,) + B1)
                            if v:
                                acc = acc + v.scale(c)
                if acc:
                    coeff = acc.scale(Scalar(0, 1) * weight * sgn)
                    out = out + Form(n, nv, p + q, {(True, A, B1): coeff})
    return out


def horizontal_part_table(form: Form) -> Form:
    return form.horizontal()


def extract_primitive(model: Model, form: Form, p: int, q: int) -> Form:
    """The unique tau with form = theta ^ tau ^ dtheta^(p+q-n-1) / (p+q-n-1)!.

    Returns the full Rumin-space element of bidegree (n-q, n+1-p); the
    reconstruction only sees its horizontal part.
    """
    n = model.n
    if p + q < n + 1:
        raise BadBidegree("primitive extraction applies for p + q >= n + 1")
    a, b = n - q, n + 1 - p
    j = p + q - n - 1
    nv = model.ring.nvars
    src_keys = [(False, A, B) for A in multi_indices(n, a) for B in multi_indices(n, b)]
    dst_keys = list(ambient_keys(n, a + b + 1 + 2 * j))
    cache_key = ("extractmat", p, q)
    mat = model._cache.get(cache_key)
    th = theta_form(model)
    pw = dtheta_pow(model, j)
    scale = Scalar(Fraction(1, factorial(j)))
    if mat is None:
        cols = []
        for key in src_keys:
            mono = Form(n, nv, a + b, {key: Poly.const(nv, 1)})
            img = th.wedge(mono).wedge(pw).scale(scale)
            cols.append([c.constant_value() for c in img.vec(dst_keys)])
        mat = ExactMatrix.from_columns(cols) if cols else ExactMatrix(len(dst_keys), 0)
        model._cache[cache_key] = mat
    rhs = form.vec(dst_keys)
    sol = linalg.solve(mat, rhs, unique=True)
    tau_h = from_vec(n, nv, a + b, src_keys, sol)
    return project_E(model, tau_h, a, b)


# -- Hodge star and inner products ------------------------------------------------------


def _require_spc(model: Model):
    if not model.is_strictly_pseudoconvex():
        raise NotStrictlyPseudoconvex("operation requires a positive definite Levi form")


def hodge_star(model: Model, form: Form, p: int, q: int) -> Form:
    _require_spc(model)
    n = model.n
    k = p + q
    half = (k * (k + 1)) // 2
    if k <= n:
        coeff = as_scalar(-1 if half % 2 else 1) * ipow(q - p) * Scalar(Fraction(1, factorial(n - k)))
        return theta_form(model).wedge(form).wedge(dtheta_pow(model, n - k)).scale(coeff)
    xi = extract_primitive(model, form, p, q)
    coeff = as_scalar(-1 if n % 2 else 1) * as_scalar(-1 if half % 2 else 1) * ipow(p - q + 1)
    return xi.scale(coeff)


def star_bidegree(n: int, p: int, q: int) -> Tuple[int, int]:
    if p + q <= n:
        return n + 1 - q, n - p
    return n - q, n + 1 - p


def conj_star(model: Model, form: Form, p: int, q: int) -> Form:
    """The conjugate Hodge star: star of the conjugate."""
    if p + q <= model.n:
        return hodge_star(model, form.conj(), q, p)
    return hodge_star(model, form.conj(), q + 1, p - 1)


def _det(entries: List[List[Scalar]]) -> Scalar:
    m = len(entries)
    if m == 0:
        return ONE
    if m == 1:
        return entries[0][0]
    acc = ZERO
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in entries[1:]]
        term = entries[0][j] * _det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def inner_product(model: Model, om: Form, tau: Form, p: int, q: int) -> Poly:
    """Pointwise hermitian pairing on the (p,q) Rumin space."""
    n = model.n
    nv = model.ring.nvars
    if p + q > n:
        om_h = om.theta_part()
        tau_h = tau.theta_part()
        return _horizontal_inner(model, om_h, tau_h, p - 1, q)
    for f, (pp, qq) in ((om, (p, q)), (tau, (p, q))):
        if not f.horizontal_bidegrees() <= {(pp, qq)}:
            raise BidegreeMismatch("operands must be of the stated bidegree")
    return _horizontal_inner(model, om.horizontal(), tau.horizontal(), p, q)


def _horizontal_inner(model: Model, om: Form, tau: Form, p: int, q: int) -> Poly:
    n = model.n
    nv = model.ring.nvars
    acc = Poly(nv)
    for (tha, A, B), c1 in om.terms.items():
        for (thc, C, D), c2 in tau.terms.items():
            if len(C) != p or len(D) != q or len(A) != p or len(B) != q:
                raise BidegreeMismatch("operands must be of the stated bidegree")
            g1 = _det([[model.hinv_at(a, cdx) for cdx in C] for a in A])
            if not g1:
                continue
            g2 = _det([[model.hinv_at(d, b) for b in B] for d in D])
            if not g2:
                continue
            acc = acc + (c1 * c2.conj()).scale(g1 * g2)
    return acc


def inner_product_theta(model: Model, om: Form, tau: Form, p: int, q: int) -> Poly:
    """Hermitian form on theta ^ Omega^{p,q}: pairing of the theta-parts."""
    return _horizontal_inner(model, om.theta_part(), tau.theta_part(), p, q)


def l2_pairing(model: Model, om: Form, tau: Form, p: int, q: int) -> Scalar:
    """L^2 pairing on invariant forms (unit total volume)."""
    val = inner_product(model, om, tau, p, q)
    return val.constant_value()


def gram_matrix(model: Model, basis: List[Form], p: int, q: int) -> ExactMatrix:
    m = len(basis)
    out = ExactMatrix(m, m)
    for i in range(m):
        for j in range(m):
            out.data[i][j] = l2_pairing(model, basis[i], basis[j], p, q)
    return out
