"""Differential operators on the (bigraded) Rumin complex.

Each bigraded operator has two evaluation paths: the definition as a
projected exterior derivative, and the explicit coefficient formula in terms
of covariant divergences.  They must agree exactly; the *_formula variants
exist so tests can pit one path against the other.

Table-level operators (the slashed derivatives, curvature actions and their
compositions) act on horizontal (p,q) forms through full component tensors.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Tuple

from .errors import MiddleDegreeOnly
from .forms import Form
from .models import Model, Tensor, tensor_from_form, torsion_mixed, torsion_mixed_bar
from .multiindex import multi_indices, remove_at
from .poly import Poly
from .rumin import (dtheta_pow, extract_primitive, gamma, hodge_star, pi,
                    pi_pq, project_E, star_bidegree, theta_form)
from .scalars import Scalar, as_scalar


def valid_pq(n: int, p: int, q: int) -> bool:
    return 0 <= p <= n + 1 and 0 <= q <= n


def _zero(model: Model, degree: int) -> Form:
    return Form.zero(model.n, model.ring.nvars, max(degree, 0))


# -- the bigraded operators (projection path) and their bidegree targets --------------


def db_target(n: int, p: int, q: int) -> Tuple[int, int]:
    return (p + 2, q - 1) if p + q == n else (p + 1, q)


def db_star_target(n: int, p: int, q: int) -> Tuple[int, int]:
    return (p - 2, q + 1) if p + q == n + 1 else (p - 1, q)


def db(model: Model, form: Form, p: int, q: int) -> Form:
    tp, tq = db_target(model.n, p, q)
    if not valid_pq(model.n, tp, tq) or form.is_zero():
        return _zero(model, p + q + 1)
    return pi_pq(model, model.d(form), tp, tq)


def dbbar(model: Model, form: Form, p: int, q: int) -> Form:
    if not valid_pq(model.n, p, q + 1) or form.is_zero():
        return _zero(model, p + q + 1)
    return pi_pq(model, model.d(form), p, q + 1)


def d0(model: Model, form: Form, p: int, q: int) -> Form:
    if p + q != model.n:
        raise MiddleDegreeOnly("d0 exists only in middle degree")
    if not valid_pq(model.n, p + 1, q) or form.is_zero():
        return _zero(model, p + q + 1)
    return pi_pq(model, model.d(form), p + 1, q)


# -- adjoints via the Hodge star --------------------------------------------------------


def dbbar_star(model: Model, form: Form, p: int, q: int) -> Form:
    if not valid_pq(model.n, p, q - 1) or form.is_zero():
        return _zero(model, p + q - 1)
    s = hodge_star(model, form, p, q)
    ps, qs = star_bidegree(model.n, p, q)
    t = db(model, s, ps, qs)
    tp, tq = db_target(model.n, ps, qs)
    out = hodge_star(model, t, tp, tq)
    return out if (p + q) % 2 == 0 else -out


def db_star(model: Model, form: Form, p: int, q: int) -> Form:
    tp, tq = db_star_target(model.n, p, q)
    if not valid_pq(model.n, tp, tq) or form.is_zero():
        return _zero(model, p + q - 1)
    s = hodge_star(model, form, p, q)
    ps, qs = star_bidegree(model.n, p, q)
    t = dbbar(model, s, ps, qs)
    out = hodge_star(model, t, ps, qs + 1)
    return out if (p + q) % 2 == 0 else -out


def d0_star(model: Model, form: Form, p: int, q: int) -> Form:
    if p + q != model.n + 1:
        raise MiddleDegreeOnly("d0* exists only in degree n+1")
    if not valid_pq(model.n, p - 1, q) or form.is_zero():
        return _zero(model, p + q - 1)
    s = hodge_star(model, form, p, q)
    ps, qs = star_bidegree(model.n, p, q)
    t = d0(model, s, ps, qs)
    out = hodge_star(model, t, ps + 1, qs)
    return -out if (model.n + 1) % 2 else out


_OP_TABLE: Dict[str, Tuple[Callable, Callable]] = {}


def _register_ops():
    _OP_TABLE["db"] = (db, db_target)
    _OP_TABLE["dbbar"] = (dbbar, lambda n, p, q: (p, q + 1))
    _OP_TABLE["db*"] = (db_star, db_star_target)
    _OP_TABLE["dbbar*"] = (dbbar_star, lambda n, p, q: (p, q - 1))
    _OP_TABLE["d0"] = (d0, lambda n, p, q: (p + 1, q))
    _OP_TABLE["d0*"] = (d0_star, lambda n, p, q: (p - 1, q))


_register_ops()


def chain(model: Model, form: Form, p: int, q: int, names) -> Form:
    """Apply named operators left to right (first name acts first)."""
    n = model.n
    for name in names:
        op, target = _OP_TABLE[name]
        tp, tq = target(n, p, q)
        if not valid_pq(n, tp, tq):
            return _zero(model, p + q + (1 if name in ("db", "dbbar", "d0") else -1))
        form = op(model, form, p, q) if form else _zero(model, tp + tq)
        p, q = tp, tq
    return form


# -- component helpers for the formula path ----------------------------------------------


def _div_h(model: Model, T: Tensor) -> Tensor:
    """V[A' + B] = nabla^mu T_{mu A' B} (consumes the first 'h' slot)."""
    Ta = model.cov_a(T)
    out: Dict[tuple, Poly] = {}
    for key, v in Ta.comps.items():
        nu, mu = key[0], key[1]
        c = model.hinv_at(mu, nu)
        if not c:
            continue
        rest = key[2:]
        add = v.scale(c)
        s = out.get(rest)
        s = add if s is None else s + add
        if s:
            out[rest] = s
        else:
            out.pop(rest, None)
    return Tensor(T.slots[1:], model.n, model.ring.nvars, out)


def _div_a(model: Model, T: Tensor, a_pos: int) -> Tensor:
    """W[...] = nabla^nubar T_{... nubar ...}, consuming the 'a' slot at a_pos."""
    Th = model.cov_h(T)
    out: Dict[tuple, Poly] = {}
    for key, v in Th.comps.items():
        mu = key[0]
        nu = key[1 + a_pos]
        c = model.hinv_at(mu, nu)
        if not c:
            continue
        rest = key[1:1 + a_pos] + key[2 + a_pos:]
        add = v.scale(c)
        s = out.get(rest)
        s = add if s is None else s + add
        if s:
            out[rest] = s
        else:
            out.pop(rest, None)
    return Tensor(T.slots[:a_pos] + T.slots[a_pos + 1:], model.n, model.ring.nvars, out)


def table_of(model: Model, form: Form, p: int, q: int) -> Tensor:
    return tensor_from_form(model, form, p, q)


def _sorted_form(model: Model, fill, p: int, q: int) -> Form:
    n, nv = model.n, model.ring.nvars
    terms = {}
    for A in multi_indices(n, p):
        for B in multi_indices(n, q):
            c = fill(A, B)
            if c:
                terms[(False, A, B)] = c
    return Form(n, nv, p + q, terms)


def _alt_first(T: Tensor, C: tuple, suffix: tuple) -> Poly:
    """Sum_m (-1)^(m-1) T[(c_m,) + (C minus c_m) + suffix]."""
    acc = None
    for m in range(len(C)):
        v = T.comps.get((C[m],) + remove_at(C, m) + suffix)
        if v is None:
            continue
        if m % 2 == 1:
            v = -v
        acc = v if acc is None else acc + v
    return acc if acc is not None else Poly(T.nvars)


def _alt_mid(T: Tensor, prefix: tuple, D: tuple) -> Poly:
    """Sum_k (-1)^(k-1) T[(d_k,) + prefix + (D minus d_k)]."""
    acc = None
    for k in range(len(D)):
        v = T.comps.get((D[k],) + prefix + remove_at(D, k))
        if v is None:
            continue
        if k % 2 == 1:
            v = -v
        acc = v if acc is None else acc + v
    return acc if acc is not None else Poly(T.nvars)


def _double_alt(model: Model, V: Tensor, C: tuple, D: tuple) -> Poly:
    """Sum_{m,k} (-1)^(m+k) h_{c_m d_k} V[(C minus c_m) + (D minus d_k)]."""
    acc = Poly(model.ring.nvars)
    for m in range(len(C)):
        for k in range(len(D)):
            hmd = model.h_at(C[m], D[k])
            if not hmd:
                continue
            v = V.comps.get(remove_at(C, m) + remove_at(D, k))
            if v is None:
                continue
            sgn = -1 if (m + k) % 2 else 1
            acc = acc + v.scale(hmd * as_scalar(sgn))
    return acc


def _torsion_alt_first(model: Model, Amix, T: Tensor, C: tuple, suffix_a: tuple) -> Poly:
    """Sum_m (-1)^(m-1) A_{c_m}^nubar T[(C minus c_m) + (nu,) + suffix_a]."""
    acc = Poly(model.ring.nvars)
    for m in range(len(C)):
        inner = Poly(model.ring.nvars)
        for nu in range(1, model.n + 1):
            c = Amix.data[C[m] - 1][nu - 1]
            if c:
                v = T.comps.get(remove_at(C, m) + (nu,) + suffix_a)
                if v is not None:
                    inner = inner + v.scale(c)
        if inner:
            acc = acc + (inner if m % 2 == 0 else -inner)
    return acc


def _torsion_alt_mid(model: Model, Abar, T: Tensor, prefix_h: tuple, D: tuple) -> Poly:
    """Sum_k (-1)^(k-1) A_{dbar_k}^mu T[(mu,) + prefix_h + (D minus d_k)]."""
    acc = Poly(model.ring.nvars)
    for k in range(len(D)):
        inner = Poly(model.ring.nvars)
        for mu in range(1, model.n + 1):
            c = Abar.data[D[k] - 1][mu - 1]
            if c:
                v = T.comps.get((mu,) + prefix_h + remove_at(D, k))
                if v is not None:
                    inner = inner + v.scale(c)
        if inner:
            acc = acc + (inner if k % 2 == 0 else -inner)
    return acc


def _rep_table(model: Model, form: Form, p: int, q: int) -> Tuple[Tensor, int, int]:
    """Canonical component table of a (p,q) Rumin form and its slot bidegree."""
    n = model.n
    if p + q <= n:
        return table_of(model, form.horizontal(), p, q), p, q
    tau = extract_primitive(model, form, p, q)
    a, b = n - q, n + 1 - p
    return table_of(model, tau.horizontal(), a, b), a, b


def _theta_rep(model: Model, table_form: Form, power: int) -> Form:
    out = theta_form(model).wedge(table_form)
    if power:
        out = out.wedge(dtheta_pow(model, power)).scale(Scalar(Fraction(1, factorial(power))))
    return out


# -- explicit coefficient formulas ----------------------------------------------------------


def db_formula(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    k = p + q
    if k <= n - 1:
        if not valid_pq(n, p + 1, q):
            return _zero(model, k + 1)
        T = table_of(model, form.horizontal(), p, q)
        Th = model.cov_h(T)
        W = _div_a(model, T, 0) if q >= 1 else None
        weight = Scalar(Fraction(1, n - k + 1))

        def fill(C, B):
            acc = _alt_first(Th, C, B)
            if W is not None:
                acc = acc - _double_alt(model, W, C, B).scale(weight)
            return acc

        return project_E(model, _sorted_form(model, fill, p + 1, q), p + 1, q)
    if k == n:
        if not valid_pq(n, p + 2, q - 1) or q == 0:
            return _zero(model, k + 1)
        T = table_of(model, form.horizontal(), p, q)
        W = _div_a(model, T, 0)
        Wh = model.cov_h(W)
        Amix = torsion_mixed(model)
        sgn = as_scalar(-1 if (p - 1) % 2 else 1) * Scalar(0, 1)

        def fill(C, D):
            acc = _alt_first(Wh, C, D)
            acc = acc + _torsion_alt_first(model, Amix, T, C, D).scale(Scalar(0, 1))
            return acc.scale(sgn)

        return _theta_rep(model, _sorted_form(model, fill, p + 1, q - 1), 0)
    # k >= n + 1
    if not valid_pq(n, p + 1, q):
        return _zero(model, k + 1)
    U, a, b = _rep_table(model, form, p, q)
    W = _div_a(model, U, 0)
    sgn = as_scalar(-1 if (n - q) % 2 else 1) * Scalar(0, 1)

    def fill(A, B1):
        v = W.comps.get(A + B1)
        return v.scale(sgn) if v is not None else Poly(model.ring.nvars)

    return _theta_rep(model, _sorted_form(model, fill, a, b - 1), k - n)


def dbbar_formula(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    k = p + q
    if k <= n - 1:
        if not valid_pq(n, p, q + 1):
            return _zero(model, k + 1)
        T = table_of(model, form.horizontal(), p, q)
        Ta = model.cov_a(T)
        V = _div_h(model, T) if p >= 1 else None
        weight = Scalar(Fraction(1, n - k + 1))
        sgn = as_scalar(-1 if p % 2 else 1)

        def fill(A, D):
            acc = _alt_mid(Ta, A, D)
            if V is not None:
                acc = acc - _double_alt(model, V, A, D).scale(weight)
            return acc.scale(sgn)

        return project_E(model, _sorted_form(model, fill, p, q + 1), p, q + 1)
    if k == n:
        if not valid_pq(n, p, q + 1) or p == 0:
            return _zero(model, k + 1)
        T = table_of(model, form.horizontal(), p, q)
        V = _div_h(model, T)
        Va = model.cov_a(V)
        Abar = torsion_mixed_bar(model)
        sgn = as_scalar(-1 if (p - 1) % 2 else 1) * Scalar(0, 1)

        def fill(A1, D):
            acc = _alt_mid(Va, A1, D)
            acc = acc - _torsion_alt_mid(model, Abar, T, A1, D).scale(Scalar(0, 1))
            return acc.scale(sgn)

        return _theta_rep(model, _sorted_form(model, fill, p - 1, q + 1), 0)
    # k >= n + 1
    if not valid_pq(n, p, q + 1):
        return _zero(model, k + 1)
    U, a, b = _rep_table(model, form, p, q)
    V = _div_h(model, U)

    def fill(A1, B):
        v = V.comps.get(A1 + B)
        return v.scale(Scalar(0, -1)) if v is not None else Poly(model.ring.nvars)

    return _theta_rep(model, _sorted_form(model, fill, a - 1, b), k - n)


def d0_formula(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    if p + q != n:
        raise MiddleDegreeOnly("d0 exists only in middle degree")
    if not valid_pq(n, p + 1, q):
        return _zero(model, n + 1)
    T = table_of(model, form.horizontal(), p, q)
    T0 = model.cov_0(T)
    Vh = model.cov_h(_div_h(model, T)) if p >= 1 else None
    Wa = model.cov_a(_div_a(model, T, 0)) if q >= 1 else None

    def fill(A, B):
        acc = T0.comps.get(A + B)
        acc = Poly(model.ring.nvars) if acc is None else acc
        if Vh is not None:
            acc = acc + _alt_first(Vh, A, B).scale(Scalar(0, 1))
        if Wa is not None:
            acc = acc - _alt_mid(Wa, A, B).scale(Scalar(0, 1))
        return acc

    return _theta_rep(model, _sorted_form(model, fill, p, q), 0)


def db_star_formula(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    k = p + q
    if k <= n:
        if p == 0:
            return _zero(model, k - 1)
        T = table_of(model, form.horizontal(), p, q)
        V = _div_h(model, T)

        def fill(A1, B):
            v = V.comps.get(A1 + B)
            return -v if v is not None else Poly(model.ring.nvars)

        return project_E(model, _sorted_form(model, fill, p - 1, q), p - 1, q)
    if k == n + 1:
        if p <= 1:
            return _zero(model, k - 1)
        E = table_of(model, form.theta_part(), p - 1, q)
        V = _div_h(model, E)
        Va = model.cov_a(V)
        Abar = torsion_mixed_bar(model)
        sgn = as_scalar(-1 if p % 2 else 1) * Scalar(0, 1)

        def fill(A1, D):
            acc = _alt_mid(Va, A1, D)
            acc = acc - _torsion_alt_mid(model, Abar, E, A1, D).scale(Scalar(0, 1))
            return acc.scale(sgn)

        return project_E(model, _sorted_form(model, fill, p - 2, q + 1), p - 2, q + 1)
    # k >= n + 2
    if not valid_pq(n, p - 1, q):
        return _zero(model, k - 1)
    U, a, b = _rep_table(model, form, p, q)
    Ua = model.cov_a(U)
    V = _div_h(model, U) if a >= 1 else None
    weight = Scalar(Fraction(1, k - n))
    sgn = as_scalar(-1 if (n - q) % 2 else 1) * Scalar(0, 1)

    def fill(A, D):
        acc = _alt_mid(Ua, A, D)
        if V is not None:
            acc = acc - _double_alt(model, V, A, D).scale(weight)
        return acc.scale(sgn)

    return _theta_rep(model, _sorted_form(model, fill, a, b + 1), k - n - 2)


def dbbar_star_formula(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    k = p + q
    if k <= n:
        if q == 0:
            return _zero(model, k - 1)
        T = table_of(model, form.horizontal(), p, q)
        W = _div_a(model, T, 0)
        sgn = as_scalar(-1 if (p + 1) % 2 else 1)

        def fill(A, B1):
            v = W.comps.get(A + B1)
            return v.scale(sgn) if v is not None else Poly(model.ring.nvars)

        return project_E(model, _sorted_form(model, fill, p, q - 1), p, q - 1)
    if k == n + 1:
        if q == 0 or not valid_pq(n, p, q - 1):
            return _zero(model, k - 1)
        E = table_of(model, form.theta_part(), p - 1, q)
        W = _div_a(model, E, 0)
        Wh = model.cov_h(W)
        Amix = torsion_mixed(model)
        sgn = as_scalar(-1 if p % 2 else 1) * Scalar(0, 1)

        def fill(C, B1):
            acc = _alt_first(Wh, C, B1)
            acc = acc + _torsion_alt_first(model, Amix, E, C, B1).scale(Scalar(0, 1))
            return acc.scale(sgn)

        return project_E(model, _sorted_form(model, fill, p, q - 1), p, q - 1)
    # k >= n + 2
    if q == 0:
        return _zero(model, k - 1)
    U, a, b = _rep_table(model, form, p, q)
    Uh = model.cov_h(U)
    W = _div_a(model, U, 0) if b >= 1 else None
    weight = Scalar(Fraction(1, k - n))

    def fill(C, B):
        acc = _alt_first(Uh, C, B)
        if W is not None:
            acc = acc - _double_alt(model, W, C, B).scale(weight)
        return acc.scale(Scalar(0, -1))

    return _theta_rep(model, _sorted_form(model, fill, a + 1, b), k - n - 2)


def d0_star_formula(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    if p + q != n + 1:
        raise MiddleDegreeOnly("d0* exists only in degree n+1")
    if p == 0:
        return _zero(model, n)
    E = table_of(model, form.theta_part(), p - 1, q)
    E0 = model.cov_0(E)
    Vh = model.cov_h(_div_h(model, E)) if p - 1 >= 1 else None
    Wa = model.cov_a(_div_a(model, E, 0)) if q >= 1 else None

    def fill(A, B):
        acc = E0.comps.get(A + B)
        acc = Poly(model.ring.nvars) if acc is None else acc
        if Vh is not None:
            acc = acc + _alt_first(Vh, A, B).scale(Scalar(0, 1))
        if Wa is not None:
            acc = acc - _alt_mid(Wa, A, B).scale(Scalar(0, 1))
        return -acc

    return project_E(model, _sorted_form(model, fill, p - 1, q), p - 1, q)


# -- operators on the full degree-k space ------------------------------------------------------


def bidegree_split(model: Model, form: Form) -> Dict[Tuple[int, int], Form]:
    n = model.n
    k = form.degree
    out = {}
    if k <= n:
        for (p, q) in sorted(form.horizontal_bidegrees()):
            comp = pi_pq(model, form, p, q)
            if comp:
                out[(p, q)] = comp
    else:
        for (a, b) in sorted(form.theta_bidegrees()):
            comp = pi_pq(model, form, a + 1, b)
            if comp:
                out[(a + 1, b)] = comp
    return out


def star_k(model: Model, form: Form) -> Form:
    k = form.degree
    out = _zero(model, 2 * model.n + 1 - k)
    for (p, q), comp in bidegree_split(model, form).items():
        out = out + hodge_star(model, comp, p, q)
    return out


def d_star(model: Model, form: Form) -> Form:
    k = form.degree
    if form.is_zero():
        return _zero(model, k - 1)
    out = star_k(model, model.d(star_k(model, form)))
    return out if k % 2 == 0 else -out


# -- Laplacians ----------------------------------------------------------------------------------


def kohn_laplacian(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    k = p + q
    if k <= n - 1:
        w = Scalar(Fraction(n - k, n - k + 1))
        return (chain(model, form, p, q, ["dbbar*", "dbbar"]).scale(w)
                + chain(model, form, p, q, ["dbbar", "dbbar*"]))
    if k == n:
        return (chain(model, form, p, q, ["dbbar", "dbbar*"])
                + chain(model, form, p, q, ["dbbar*", "db", "db*", "dbbar"])
                + chain(model, form, p, q, ["dbbar*", "db*", "db", "dbbar"]).scale(Scalar(Fraction(1, 2)))
                + chain(model, form, p, q, ["dbbar*", "dbbar", "dbbar*", "dbbar"]))
    if k == n + 1:
        return (chain(model, form, p, q, ["dbbar*", "dbbar"])
                + chain(model, form, p, q, ["dbbar", "db*", "db", "dbbar*"])
                + chain(model, form, p, q, ["dbbar", "db", "db*", "dbbar*"]).scale(Scalar(Fraction(1, 2)))
                + chain(model, form, p, q, ["dbbar", "dbbar*", "dbbar", "dbbar*"]))
    w = Scalar(Fraction(k - n - 1, k - n))
    return (chain(model, form, p, q, ["dbbar", "dbbar*"]).scale(w)
            + chain(model, form, p, q, ["dbbar*", "dbbar"]))


def conj_bidegree(n: int, p: int, q: int) -> Tuple[int, int]:
    return (q, p) if p + q <= n else (q + 1, p - 1)


def kohn_laplacian_bar(model: Model, form: Form, p: int, q: int) -> Form:
    cp, cq = conj_bidegree(model.n, p, q)
    return kohn_laplacian(model, form.conj(), cp, cq).conj()


def lb_operator(model: Model, form: Form, p: int, q: int) -> Form:
    n = model.n
    out = kohn_laplacian(model, form, p, q) + kohn_laplacian_bar(model, form, p, q)
    if p + q == n:
        out = out + chain(model, form, p, q, ["d0", "d0*"])
    elif p + q == n + 1:
        out = out + chain(model, form, p, q, ["d0*", "d0"])
    return out


def rumin_laplacian(model: Model, form: Form) -> Form:
    n = model.n
    k = form.degree

    def ds(f):
        return d_star(model, f)

    def dd(f):
        return model.d(f)

    if k <= n - 1:
        w = Scalar(Fraction(n - k, n - k + 1))
        return ds(dd(form)) + dd(ds(form)).scale(w)
    if k == n:
        return ds(dd(form)) + dd(ds(dd(ds(form))))
    if k == n + 1:
        return dd(ds(form)) + ds(dd(ds(dd(form))))
    w = Scalar(Fraction(k - n - 1, k - n))
    return dd(ds(form)) + ds(dd(form)).scale(w)


def popovici_laplacian(model: Model, form: Form, p: int, q: int, H) -> Form:
    """Nonlocal Laplacian; H(form, p, q) is the harmonic-projection oracle."""
    n = model.n
    k = p + q
    out = kohn_laplacian(model, form, p, q)
    if k <= n - 1:
        w = Scalar(Fraction(n - k, n - k + 1))
        x = db_star(model, form, p, q)
        x = H(x, p - 1, q)
        out = out + db(model, x, p - 1, q).scale(w)
        y = db(model, form, p, q)
        y = H(y, p + 1, q)
        out = out + db_star(model, y, p + 1, q)
        return out
    if k == n:
        x = d0(model, form, p, q)
        x = H(x, p + 1, q)
        out = out + d0_star(model, x, p + 1, q)
        y = db_star(model, form, p, q)
        y = H(y, p - 1, q)
        y = db(model, y, p - 1, q)
        y = db_star(model, y, p, q)
        y = H(y, p - 1, q)
        out = out + db(model, y, p - 1, q)
        return out
    if k == n + 1:
        x = d0_star(model, form, p, q)
        x = H(x, p - 1, q)
        out = out + d0(model, x, p - 1, q)
        y = db(model, form, p, q)
        y = H(y, p + 1, q)
        y = db_star(model, y, p + 1, q)
        y = db(model, y, p, q)
        y = H(y, p + 1, q)
        out = out + db_star(model, y, p + 1, q)
        return out
    w = Scalar(Fraction(k - n - 1, k - n))
    x = db(model, form, p, q)
    x = H(x, p + 1, q)
    out = out + db_star(model, x, p + 1, q).scale(w)
    y = db_star(model, form, p, q)
    y = H(y, p - 1, q)
    out = out + db(model, y, p - 1, q)
    return out


# -- slashed operators and curvature actions on component tables ----------------------------------


def nablas(model: Model, form: Form, p: int, q: int) -> Form:
    T = table_of(model, form, p, q)
    Th = model.cov_h(T)
    return _sorted_form(model, lambda C, B: _alt_first(Th, C, B), p + 1, q)


def nablas_bar(model: Model, form: Form, p: int, q: int) -> Form:
    T = table_of(model, form, p, q)
    Ta = model.cov_a(T)
    sgn = as_scalar(-1 if p % 2 else 1)
    return _sorted_form(model, lambda A, D: _alt_mid(Ta, A, D).scale(sgn), p, q + 1)


def nablas_star(model: Model, form: Form, p: int, q: int) -> Form:
    if p == 0:
        return _zero(model, p + q - 1)
    T = table_of(model, form, p, q)
    V = _div_h(model, T)
    return _sorted_form(model, lambda A1, B: -V.get(A1 + B), p - 1, q)


def nablas_bar_star(model: Model, form: Form, p: int, q: int) -> Form:
    if q == 0:
        return _zero(model, p + q - 1)
    T = table_of(model, form, p, q)
    W = _div_a(model, T, 0)
    sgn = as_scalar(-1 if (p + 1) % 2 else 1)
    return _sorted_form(model, lambda A, B1: W.get(A + B1).scale(sgn), p, q - 1)


def nabla0_table(model: Model, form: Form, p: int, q: int) -> Form:
    T0 = model.cov_0(table_of(model, form, p, q))
    return _sorted_form(model, lambda A, B: T0.get(A + B), p, q)


def nb_star_nb(model: Model, form: Form, p: int, q: int) -> Form:
    """nabla_b^* nabla_b = -nabla^mu nabla_mu, component-wise."""
    T = model.cov_a(model.cov_h(table_of(model, form, p, q)))

    def fill(A, B):
        acc = Poly(model.ring.nvars)
        for mu in range(1, model.n + 1):
            for nu in range(1, model.n + 1):
                c = model.hinv_at(mu, nu)
                if c:
                    v = T.comps.get((nu, mu) + A + B)
                    if v is not None:
                        acc = acc + v.scale(c)
        return -acc

    return _sorted_form(model, fill, p, q)


def nbbar_star_nbbar(model: Model, form: Form, p: int, q: int) -> Form:
    """nablabar_b^* nablabar_b = -nabla^nubar nabla_nubar, component-wise."""
    T = model.cov_h(model.cov_a(table_of(model, form, p, q)))

    def fill(A, B):
        acc = Poly(model.ring.nvars)
        for mu in range(1, model.n + 1):
            for nu in range(1, model.n + 1):
                c = model.hinv_at(mu, nu)
                if c:
                    v = T.comps.get((mu, nu) + A + B)
                    if v is not None:
                        acc = acc + v.scale(c)
        return -acc

    return _sorted_form(model, fill, p, q)


def boxs(model: Model, form: Form, p: int, q: int) -> Form:
    out = _zero(model, p + q)
    if q <= model.n - 1:
        out = out + nablas_bar_star(model, nablas_bar(model, form, p, q), p, q + 1)
    if q >= 1:
        out = out + nablas_bar(model, nablas_bar_star(model, form, p, q), p, q - 1)
    return out


def _ric_mixed(model: Model) -> list:
    """R_a^mu = R_{a nubar} h^{mu nubar}."""
    n = model.n
    out = []
    for a in range(1, n + 1):
        row = []
        for mu in range(1, n + 1):
            acc = as_scalar(0)
            for nu in range(1, n + 1):
                acc = acc + model.ricci.data[a - 1][nu - 1] * model.hinv_at(mu, nu)
            row.append(acc)
        out.append(row)
    return out


def ric_h(model: Model, form: Form, p: int, q: int) -> Form:
    """Ricci action on holomorphic slots (with its defining minus sign)."""
    if p == 0:
        return _zero(model, p + q)
    T = table_of(model, form, p, q)
    RM = _ric_mixed(model)

    def fill(A, B):
        acc = Poly(model.ring.nvars)
        for j in range(len(A)):
            inner = Poly(model.ring.nvars)
            for mu in range(1, model.n + 1):
                c = RM[A[j] - 1][mu - 1]
                if c:
                    v = T.comps.get((mu,) + remove_at(A, j) + B)
                    if v is not None:
                        inner = inner + v.scale(c)
            if inner:
                acc = acc + (inner if j % 2 == 0 else -inner)
        return -acc

    return _sorted_form(model, fill, p, q)


def ric_a(model: Model, form: Form, p: int, q: int) -> Form:
    """Ricci action on antiholomorphic slots: R^nubar_bbar om_{A nubar B'}."""
    if q == 0:
        return _zero(model, p + q)
    T = table_of(model, form, p, q)
    n = model.n
    # R^{nubar}_{bbar} = h^{mu nubar} R_{mu bbar}
    RM = [[sum((model.hinv_at(mu, nu) * model.ricci.data[mu - 1][b - 1] for mu in range(1, n + 1)), as_scalar(0))
           for nu in range(1, n + 1)] for b in range(1, n + 1)]

    def fill(A, B):
        acc = Poly(model.ring.nvars)
        for k in range(len(B)):
            inner = Poly(model.ring.nvars)
            for nu in range(1, n + 1):
                c = RM[B[k] - 1][nu - 1]
                if c:
                    v = T.comps.get(A + (nu,) + remove_at(B, k))
                    if v is not None:
                        inner = inner + v.scale(c)
            if inner:
                acc = acc + (inner if k % 2 == 0 else -inner)
        return -acc

    return _sorted_form(model, fill, p, q)


def curv_hh(model: Model, form: Form, p: int, q: int) -> Form:
    """Full curvature action R_{a bbar}^{nubar mu} om_{mu A' nubar B'}."""
    if p == 0 or q == 0:
        return _zero(model, p + q)
    n = model.n
    T = table_of(model, form, p, q)
    # Rup[a][b][nu][mu] = R_{a bbar g sbar} h^{g nubar} h^{mu sbar}
    Rup: Dict[Tuple[int, int, int, int], Scalar] = {}
    for (a, b, g, s), v in model.curvature.items():
        for nu in range(1, n + 1):
            c1 = model.hinv_at(g, nu)
            if not c1:
                continue
            for mu in range(1, n + 1):
                c2 = model.hinv_at(mu, s)
                if not c2:
                    continue
                key = (a, b, nu, mu)
                Rup[key] = Rup.get(key, as_scalar(0)) + v * c1 * c2

    def fill(A, B):
        acc = Poly(model.ring.nvars)
        for j in range(len(A)):
            for k in range(len(B)):
                inner = Poly(model.ring.nvars)
                for nu in range(1, n + 1):
                    for mu in range(1, n + 1):
                        c = Rup.get((A[j], B[k], nu, mu))
                        if c:
                            v = T.comps.get((mu,) + remove_at(A, j) + (nu,) + remove_at(B, k))
                            if v is not None:
                                inner = inner + v.scale(c)
                if inner:
                    acc = acc + (inner if (j + k) % 2 == 0 else -inner)
        return acc

    return _sorted_form(model, fill, p, q)


def torsion_h(model: Model, form: Form, p: int, q: int) -> Form:
    """A-hash: (p,q) -> (p+1,q-1), with its defining minus sign."""
    if q == 0:
        return _zero(model, p + q)
    T = table_of(model, form, p, q)
    Amix = torsion_mixed(model)
    sgn = as_scalar(1 if p % 2 else -1)  # -(-1)^p

    def fill(C, B1):
        return _torsion_alt_first(model, Amix, T, C, B1).scale(sgn)

    return _sorted_form(model, fill, p + 1, q - 1)


def torsion_a(model: Model, form: Form, p: int, q: int) -> Form:
    """A-ohash: (p,q) -> (p-1,q+1), with its defining minus sign."""
    if p == 0:
        return _zero(model, p + q)
    T = table_of(model, form, p, q)
    Abar = torsion_mixed_bar(model)
    sgn = as_scalar(1 if (p - 1) % 2 else -1)  # -(-1)^(p-1)

    def fill(A1, D):
        return _torsion_alt_mid(model, Abar, T, A1, D).scale(sgn)

    return _sorted_form(model, fill, p - 1, q + 1)


def dtheta_wedge_table(model: Model, form: Form) -> Form:
    """Wedge a horizontal form with the horizontal part of dtheta."""
    return form.wedge(model.d_theta)


# -- products --------------------------------------------------------------------------------------


def m2(model: Model, om: Form, tau: Form) -> Form:
    return pi(model, om.wedge(tau))


def m3(model: Model, om: Form, tau: Form, eta: Form) -> Form:
    first = gamma(model, om.wedge(tau)).wedge(eta)
    second = om.wedge(gamma(model, tau.wedge(eta)))
    if om.degree % 2:
        return pi(model, first + second)
    return pi(model, first - second)


def kr_m2(model: Model, om: Form, p: int, q: int, tau: Form, r: int, s: int) -> Form:
    prod = m2(model, om, tau)
    if not valid_pq(model.n, p + r, q + s) or prod.is_zero():
        return _zero(model, p + q + r + s)
    return pi_pq(model, prod, p + r, q + s)


# -- Lee form ----------------------------------------------------------------------------------------


def lee_form(model: Model) -> Form:
    """-(1/(n+2)) (i tr Omega - d(R theta)/n); closed element of S^1."""
    n = model.n
    nv = model.ring.nvars
    tr = Form.zero(n, nv, 2)
    for a in range(n):
        tr = tr + model.big_omega[a][a]
    rtheta = theta_form(model).scale(Poly.const(nv, model.scalar))
    out = tr.scale(Scalar(0, 1)) - model.d(rtheta).scale(Scalar(Fraction(1, n)))
    return out.scale(Scalar(Fraction(-1, n + 2)))


def lee_form_expanded(model: Model) -> Form:
    """The Ricci/torsion expansion of the Lee form (second evaluation path)."""
    n = model.n
    nv = model.ring.nvars
    out = Form.zero(n, nv, 2)
    rn = Scalar(Fraction(1, n))
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            c = model.ricci.data[a - 1][b - 1] - model.scalar * rn * model.h_at(a, b)
            if c:
                out = out + Form.monomial(n, nv, False, (a,), (b,), Scalar(0, 1) * c)
    # nabla R as a table (scalar curvature is parallel-constant on our models,
    # but the derivative is taken anyway for uniformity)
    Rt = Tensor("", n, nv, {(): Poly.const(nv, model.scalar)})
    Rh = model.cov_h(Rt)
    At = Tensor("hh", n, nv, {(a, g): Poly.const(nv, model.torsion.data[a - 1][g - 1])
                              for a in range(1, n + 1) for g in range(1, n + 1)})
    divA = _div_h(model, At)          # nabla^mu A_{mu a}
    Abar_t = Tensor("aa", n, nv, {(b, s): Poly.const(nv, model.torsion.data[b - 1][s - 1].conj())
                                  for b in range(1, n + 1) for s in range(1, n + 1)})
    divAbar = _div_a(model, Abar_t, 0)  # nabla^nubar A_{nubar bbar}
    th = theta_form(model)
    for a in range(1, n + 1):
        c = Rh.get((a,)).scale(rn) - divA.get((a,)).scale(Scalar(0, 1))
        if c:
            out = out + th.wedge(Form.monomial(n, nv, False, (a,), (), 1)).scale(c)
    for b in range(1, n + 1):
        c = model.cov_a(Rt).get((b,)).scale(rn) + divAbar.get((b,)).scale(Scalar(0, 1))
        if c:
            out = out + th.wedge(Form.monomial(n, nv, False, (), (b,), 1)).scale(c)
    return out.scale(Scalar(Fraction(-1, n + 2)))


def is_pseudo_einstein(model: Model) -> bool:
    n = model.n
    if n >= 2:
        rn = Scalar(Fraction(1, n))
        for a in range(n):
            for b in range(n):
                if model.ricci.data[a][b] != model.scalar * rn * model.h.data[a][b]:
                    return False
        return True
    nv = model.ring.nvars
    Rt = Tensor("", n, nv, {(): Poly.const(nv, model.scalar)})
    Rh = model.cov_h(Rt)
    At = Tensor("hh", n, nv, {(a, g): Poly.const(nv, model.torsion.data[a - 1][g - 1])
                              for a in range(1, n + 1) for g in range(1, n + 1)})
    divA = _div_h(model, At)
    for a in range(1, n + 1):
        if Rh.get((a,)) != divA.get((a,)).scale(Scalar(0, 1)):
            return False
    return True
