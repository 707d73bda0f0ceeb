"""Invariant-complex cohomology by exact linear algebra.

On a quotient (invariant) model every Rumin space is finite-dimensional; this
module assembles ordered bases, operator matrices, cohomology groups, harmonic
spaces, the Garfield spectral sequence, the long exact sequence, dualities,
Hard Lefschetz and cup products -- all as rank computations over Q(i), with
real (conjugation-fixed) spaces handled by splitting into rational parts.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg, operators as ops, rumin
from .errors import (MembershipViolation, NotClosed, NotInvariantModel,
                     NotTorsionFree)
from .forms import Form, ambient_keys, from_vec
from .linalg import ExactMatrix
from .models import Model
from .poly import Poly
from .scalars import ONE, Scalar, ZERO, as_scalar

Vec = List[Scalar]


def _require_invariant(model: Model):
    if not model.invariant:
        raise NotInvariantModel("invariant-complex computation needs a quotient model")


def _keys(model: Model, k: int):
    return list(ambient_keys(model.n, k))


def form_vec(model: Model, form: Form, k: int) -> Vec:
    return form.constant_vec(_keys(model, k))


def vec_form(model: Model, k: int, v: Sequence[Scalar]) -> Form:
    return from_vec(model.n, model.ring.nvars, k, _keys(model, k), list(v))


# -- bases ------------------------------------------------------------------------------


def rk_basis(model: Model, k: int) -> List[Form]:
    """Basis of the invariant Rumin space of degree k: pi of ambient monomials."""
    _require_invariant(model)
    cached = model._cache.get(("rk_basis", k))
    if cached is not None:
        return cached
    out: List[Form] = []
    vecs: List[Vec] = []
    if 0 <= k <= 2 * model.n + 1:
        for key in _keys(model, k):
            f = Form(model.n, model.ring.nvars, k, {key: model.ring.one()})
            g = rumin.pi(model, f)
            if g.is_zero():
                continue
            v = form_vec(model, g, k)
            if linalg.column_span_rank(vecs + [v]) > len(vecs):
                vecs.append(v)
                out.append(g)
    model._cache[("rk_basis", k)] = out
    return out


def rpq_basis(model: Model, p: int, q: int) -> List[Form]:
    """Basis of the invariant (p,q) Rumin space: bigraded slices of rk_basis."""
    _require_invariant(model)
    cached = model._cache.get(("rpq_basis", p, q))
    if cached is not None:
        return cached
    out: List[Form] = []
    vecs: List[Vec] = []
    k = p + q
    if ops.valid_pq(model.n, p, q) and 0 <= k <= 2 * model.n + 1:
        for f in rk_basis(model, k):
            g = rumin.pi_pq(model, f, p, q)
            if g.is_zero():
                continue
            v = form_vec(model, g, k)
            if linalg.column_span_rank(vecs + [v]) > len(vecs):
                vecs.append(v)
                out.append(g)
    model._cache[("rpq_basis", p, q)] = out
    return out


def basis_matrix(model: Model, basis: List[Form], k: int) -> ExactMatrix:
    return ExactMatrix.from_columns([form_vec(model, f, k) for f in basis])


def coords_in_basis(model: Model, basis: List[Form], k: int, form: Form) -> Vec:
    if not basis:
        if form.is_zero():
            return []
        raise MembershipViolation("form lies outside the (empty) space")
    return linalg.solve(basis_matrix(model, basis, k), form_vec(model, form, k))


def operator_matrix(model: Model, fn: Callable[[Form], Form], src: List[Form],
                    dst: List[Form], dst_deg: int) -> ExactMatrix:
    """Matrix of a form-level operator between two based invariant spaces."""
    cols = []
    for f in src:
        img = fn(f)
        cols.append(coords_in_basis(model, dst, dst_deg, img))
    if not cols:
        return ExactMatrix(len(dst), 0)
    return ExactMatrix.from_columns(cols)


# -- complex-linear cohomology -----------------------------------------------------------


def _quotient_dim(zv: List[Vec], bv: List[Vec]) -> int:
    return linalg.column_span_rank(zv) - linalg.column_span_rank(bv)


def derham_dims(model: Model) -> List[int]:
    """Complex de Rham dimensions from the invariant Rumin complex."""
    _require_invariant(model)
    cached = model._cache.get("derham_dims")
    if cached is not None:
        return cached
    n = model.n
    dims = []
    for k in range(0, 2 * n + 2):
        zk = _dclosed_vectors(model, k)
        bk = _dimage_vectors(model, k)
        dims.append(_quotient_dim(zk, bk))
    model._cache["derham_dims"] = dims
    return dims


def _dclosed_vectors(model: Model, k: int) -> List[Vec]:
    basis = rk_basis(model, k)
    out = []
    for f in basis:
        if model.d(f).is_zero():
            out.append(form_vec(model, f, k))
        else:
            out.append(None)
    if any(v is None for v in out):
        # kernel of the d-matrix in basis coordinates, mapped to ambient
        D = operator_matrix(model, lambda f: model.d(f), basis, rk_basis(model, k + 1), k + 1)
        ker = linalg.kernel_basis(D)
        B = basis_matrix(model, basis, k)
        return [B.apply(v) for v in ker]
    return [v for v in out if v is not None]


def _dimage_vectors(model: Model, k: int) -> List[Vec]:
    if k == 0:
        return []
    prev = rk_basis(model, k - 1)
    return [form_vec(model, model.d(f), k) for f in prev if model.d(f)]


def ambient_derham_dims(model: Model) -> List[int]:
    """Naive oracle: the full invariant ambient de Rham complex."""
    _require_invariant(model)
    n = model.n
    dims = []
    mats = {}
    for k in range(0, 2 * n + 2):
        keys_k = _keys(model, k)
        keys_k1 = _keys(model, k + 1)
        cols = []
        for key in keys_k:
            f = Form(model.n, model.ring.nvars, k, {key: model.ring.one()})
            cols.append(model.d(f).constant_vec(keys_k1))
        mats[k] = ExactMatrix.from_columns(cols) if cols else ExactMatrix(len(keys_k1), 0)
    for k in range(0, 2 * n + 2):
        kerdim = len(_keys(model, k)) - linalg.rank(mats[k])
        imdim = linalg.rank(mats[k - 1]) if k >= 1 else 0
        dims.append(kerdim - imdim)
    return dims


def kohn_rossi_dim(model: Model, p: int, q: int) -> int:
    """dim of the (p,q) Kohn-Rossi group of the invariant subcomplex."""
    _require_invariant(model)
    cached = model._cache.get(("kr_dim", p, q))
    if cached is not None:
        return cached
    src = rpq_basis(model, p, q)
    up = rpq_basis(model, p, q + 1)
    down = rpq_basis(model, p, q - 1) if q >= 1 else []
    D = operator_matrix(model, lambda f: ops.dbbar(model, f, p, q), src, up, p + q + 1)
    zdim = len(src) - linalg.rank(D)
    if down:
        Dprev = operator_matrix(model, lambda f: ops.dbbar(model, f, p, q - 1), down, src, p + q)
        idim = linalg.rank(Dprev)
    else:
        idim = 0
    out = zdim - idim
    model._cache[("kr_dim", p, q)] = out
    return out


# -- harmonic spaces -------------------------------------------------------------------------


def kohn_matrix(model: Model, p: int, q: int) -> ExactMatrix:
    cached = model._cache.get(("boxb", p, q))
    if cached is None:
        basis = rpq_basis(model, p, q)
        cached = operator_matrix(model, lambda f: ops.kohn_laplacian(model, f, p, q),
                                 basis, basis, p + q)
        model._cache[("boxb", p, q)] = cached
    return cached


def harmonic_pq(model: Model, p: int, q: int) -> List[Form]:
    """Basis of ker Box_b on the invariant (p,q) space."""
    cached = model._cache.get(("harm_pq", p, q))
    if cached is not None:
        return cached
    basis = rpq_basis(model, p, q)
    ker = linalg.kernel_basis(kohn_matrix(model, p, q))
    out = [_combine(model, basis, v, p + q) for v in ker]
    model._cache[("harm_pq", p, q)] = out
    return out


def rumin_matrix(model: Model, k: int) -> ExactMatrix:
    cached = model._cache.get(("deltab", k))
    if cached is None:
        basis = rk_basis(model, k)
        cached = operator_matrix(model, lambda f: ops.rumin_laplacian(model, f),
                                 basis, basis, k)
        model._cache[("deltab", k)] = cached
    return cached


def harmonic_k(model: Model, k: int) -> List[Form]:
    cached = model._cache.get(("harm_k", k))
    if cached is not None:
        return cached
    basis = rk_basis(model, k)
    ker = linalg.kernel_basis(rumin_matrix(model, k))
    out = [_combine(model, basis, v, k) for v in ker]
    model._cache[("harm_k", k)] = out
    return out


def _combine(model: Model, basis: List[Form], coeffs: Sequence[Scalar], k: int) -> Form:
    out = Form.zero(model.n, model.ring.nvars, k)
    for c, f in zip(coeffs, basis):
        if c:
            out = out + f.scale(c)
    return out


def hodge_projection_oracle(model: Model):
    """H(form, p, q): L^2-orthogonal projection onto ker Box_b, as an oracle."""
    _require_invariant(model)

    def H(form: Form, p: int, q: int) -> Form:
        if form.is_zero() or not ops.valid_pq(model.n, p, q):
            return form
        key = ("hproj", p, q)
        P = model._cache.get(key)
        basis = rpq_basis(model, p, q)
        if P is None:
            harm = harmonic_pq(model, p, q)
            gram = rumin.gram_matrix(model, basis, p, q)
            hvecs = [coords_in_basis(model, basis, p + q, f) for f in harm]
            P = linalg.gram_orthogonal_projection(hvecs, gram)
            model._cache[key] = P
        coords = coords_in_basis(model, basis, p + q, form)
        return _combine(model, basis, P.apply(coords), p + q)

    return H


def popovici_matrix(model: Model, p: int, q: int) -> ExactMatrix:
    cached = model._cache.get(("popovici", p, q))
    if cached is None:
        H = hodge_projection_oracle(model)
        basis = rpq_basis(model, p, q)
        cached = operator_matrix(model, lambda f: ops.popovici_laplacian(model, f, p, q, H),
                                 basis, basis, p + q)
        model._cache[("popovici", p, q)] = cached
    return cached


def popovici_kernel_dim(model: Model, p: int, q: int) -> int:
    basis = rpq_basis(model, p, q)
    return len(basis) - linalg.rank(popovici_matrix(model, p, q))


# -- subspace utilities -----------------------------------------------------------------------


def span_basis(vectors: List[Vec]) -> List[Vec]:
    out: List[Vec] = []
    for v in vectors:
        if linalg.column_span_rank(out + [v]) > len(out):
            out.append(v)
    return out


def intersect_spans(U: List[Vec], V: List[Vec]) -> List[Vec]:
    if not U or not V:
        return []
    cols = [list(u) for u in U] + [[-x for x in v] for v in V]
    W = ExactMatrix.from_columns(cols)
    out = []
    for kvec in linalg.kernel_basis(W):
        dim = len(U[0])
        vec = [ZERO] * dim
        for c, u in zip(kvec[:len(U)], U):
            if c:
                vec = [a + c * b for a, b in zip(vec, u)]
        if any(vec):
            out.append(vec)
    return span_basis(out)


def subspace_leq(U: List[Vec], V: List[Vec]) -> bool:
    return all(linalg.in_span(V, u) for u in U)


# -- Garfield spectral sequence ------------------------------------------------------------------


def _filtration(model: Model, p: int, k: int) -> List[Vec]:
    """F^p of the invariant complexified Rumin space of degree k."""
    cached = model._cache.get(("filt", p, k))
    if cached is not None:
        return cached
    vecs: List[Vec] = []
    for j in range(0, model.n + 2):
        q = k - (p + j)
        if not ops.valid_pq(model.n, p + j, q):
            continue
        for f in rpq_basis(model, p + j, q):
            vecs.append(form_vec(model, f, k))
    out = span_basis(vecs)
    model._cache[("filt", p, k)] = out
    return out


def _d_ambient_matrix(model: Model, k: int) -> ExactMatrix:
    cached = model._cache.get(("dmat", k))
    if cached is None:
        keys_k = _keys(model, k)
        keys_k1 = _keys(model, k + 1)
        cols = []
        for key in keys_k:
            f = Form(model.n, model.ring.nvars, k, {key: model.ring.one()})
            cols.append(model.d(f).constant_vec(keys_k1))
        cached = ExactMatrix.from_columns(cols) if cols else ExactMatrix(len(keys_k1), 0)
        model._cache[("dmat", k)] = cached
    return cached


def z_space(model: Model, r: int, p: int, q: int) -> List[Vec]:
    """Z_r^{p,q} = {omega in F^p : d omega in F^{p+r}}."""
    k = p + q
    F = _filtration(model, p, k)
    if not F:
        return []
    D = _d_ambient_matrix(model, k)
    G = _filtration(model, p + r, k + 1)
    DF = [D.apply(v) for v in F]
    cols = [list(v) for v in DF] + [[-x for x in g] for g in G]
    W = ExactMatrix.from_columns(cols)
    out = []
    for kvec in linalg.kernel_basis(W):
        vec = [ZERO] * len(F[0])
        for c, u in zip(kvec[:len(F)], F):
            if c:
                vec = [a + c * b for a, b in zip(vec, u)]
        if any(vec):
            out.append(vec)
    return span_basis(out)


def b_space(model: Model, r: int, p: int, q: int) -> List[Vec]:
    """B_r^{p,q} = F^p cap d(F^{p-r+1} of degree p+q-1)."""
    k = p + q
    if k == 0:
        return []
    D = _d_ambient_matrix(model, k - 1)
    Fprev = _filtration(model, p - r + 1, k - 1)
    image = span_basis([D.apply(v) for v in Fprev])
    return intersect_spans(image, _filtration(model, p, k))


def e_page(model: Model, r: int, p: int, q: int):
    """(dim E_r^{p,q}, representative vectors, denominator basis)."""
    Z = z_space(model, r, p, q)
    denom = span_basis(b_space(model, r, p, q) + z_space(model, r - 1, p + 1, q - 1))
    reps = []
    cur = list(denom)
    for v in Z:
        if linalg.column_span_rank(cur + [v]) > len(cur):
            cur.append(v)
            reps.append(v)
    return len(Z) - len(denom), reps, denom


def e_page_dim(model: Model, r: int, p: int, q: int) -> int:
    cached = model._cache.get(("edim", r, p, q))
    if cached is None:
        cached = e_page(model, r, p, q)[0]
        model._cache[("edim", r, p, q)] = cached
    return cached


def d_r_matrix(model: Model, r: int, p: int, q: int) -> ExactMatrix:
    """Induced differential d_r: E_r^{p,q} -> E_r^{p+r,q-r+1}."""
    k = p + q
    _, reps, _ = e_page(model, r, p, q)
    tdim, treps, tdenom = e_page(model, r, p + r, q - r + 1)
    D = _d_ambient_matrix(model, k)
    cols = []
    for v in reps:
        w = D.apply(v)
        if not treps and not tdenom:
            if any(w):
                raise MembershipViolation("d_r image misses the target page")
            cols.append([])
            continue
        coords = linalg.solve(ExactMatrix.from_columns([list(u) for u in treps] +
                                                       [list(u) for u in tdenom]), w)
        cols.append(coords[:len(treps)])
    if not cols:
        return ExactMatrix(tdim, 0)
    return ExactMatrix.from_columns([c if c else [ZERO] * tdim for c in cols])


def spectral_page_table(model: Model, r: int) -> Dict[Tuple[int, int], int]:
    _require_invariant(model)
    out = {}
    for p in range(0, model.n + 2):
        for q in range(0, model.n + 1):
            if ops.valid_pq(model.n, p, q):
                out[(p, q)] = e_page_dim(model, r, p, q)
    return out


# -- realification (real subspaces, Re/Im maps) -----------------------------------------------------


def realify_vec(v: Vec) -> List[Scalar]:
    return [Scalar(x.re) for x in v] + [Scalar(x.im) for x in v]


def realify_matrix(M: ExactMatrix) -> ExactMatrix:
    """Q-matrix of a C-linear map in split (re | im) coordinates."""
    r, c = M.rows, M.cols
    out = ExactMatrix(2 * r, 2 * c)
    for i in range(r):
        for j in range(c):
            a = M.data[i][j]
            out.data[i][j] = Scalar(a.re)
            out.data[i][c + j] = Scalar(-a.im)
            out.data[r + i][j] = Scalar(a.im)
            out.data[r + i][c + j] = Scalar(a.re)
    return out


def conj_matrix_ambient(model: Model, k: int) -> ExactMatrix:
    """Real matrix C with conj(form) having coordinates C * conj(coords)."""
    keys = _keys(model, k)
    idx = {key: i for i, key in enumerate(keys)}
    out = ExactMatrix(len(keys), len(keys))
    for j, (theta, A, B) in enumerate(keys):
        sign = -1 if (len(A) * len(B)) % 2 else 1
        out.data[idx[(theta, B, A)]][j] = as_scalar(sign)
    return out


def realify_conj(model: Model, k: int) -> ExactMatrix:
    """Realified matrix of the conjugation map on degree-k ambient coordinates."""
    C = conj_matrix_ambient(model, k)
    D = len(_keys(model, k))
    out = ExactMatrix(2 * D, 2 * D)
    for i in range(D):
        for j in range(D):
            c = C.data[i][j]
            out.data[i][j] = c
            out.data[D + i][D + j] = -c
    return out


def real_subspace(model: Model, k: int, vectors: List[Vec]) -> List[List[Scalar]]:
    """Basis of the conjugation-fixed (real) points of a conj-stable span."""
    if not vectors:
        return []
    D = len(_keys(model, k))
    span_r = span_basis([realify_vec(v) for v in vectors] +
                        [realify_vec([Scalar(0, 1) * x for x in v]) for v in vectors])
    C = realify_conj(model, k)
    fixed = []
    if not span_r:
        return []
    S = ExactMatrix.from_columns(span_r)
    M = C @ S - S
    for kvec in linalg.kernel_basis(M):
        vec = [ZERO] * (2 * D)
        for c, u in zip(kvec, span_r):
            if c:
                vec = [a + c * b for a, b in zip(vec, u)]
        if any(vec):
            fixed.append(vec)
    return span_basis(fixed)


# -- generic subquotients over the rationals ------------------------------------------------------


class Subquotient:
    """A pair (Z, B) of nested spans in some realified ambient space."""

    def __init__(self, label: str, zvecs: List[List[Scalar]], bvecs: List[List[Scalar]]):
        self.label = label
        self.Z = span_basis(list(zvecs))
        self.B = span_basis(list(bvecs))
        if not subspace_leq(self.B, self.Z):
            raise MembershipViolation(f"{label}: boundaries do not lie among cocycles")

    @property
    def dim(self) -> int:
        return len(self.Z) - len(self.B)


def _image_span(map_fn, vectors: List[List[Scalar]]) -> List[List[Scalar]]:
    return span_basis([map_fn(v) for v in vectors])


def _exact_at(prev: Optional[Subquotient], f_prev, node: Subquotient, f_next,
              nxt: Optional[Subquotient]) -> bool:
    """im(f_prev) = ker(f_next) inside the subquotient `node`."""
    image = list(node.B)
    if prev is not None and f_prev is not None:
        for v in prev.Z:
            image.append(f_prev(v))
    image = span_basis(image)
    kernel: List[List[Scalar]]
    if nxt is None or f_next is None:
        kernel = list(node.Z)
    else:
        cols = []
        for v in node.Z:
            cols.append(f_next(v))
        target_b = nxt.B
        stacked = [list(c) for c in cols] + [[-x for x in b] for b in target_b]
        W = ExactMatrix.from_columns(stacked) if stacked else None
        kernel = []
        if W is not None and node.Z:
            for kvec in linalg.kernel_basis(W):
                vec = [ZERO] * len(node.Z[0])
                for c, u in zip(kvec[:len(node.Z)], node.Z):
                    if c:
                        vec = [a + c * b for a, b in zip(vec, u)]
                if any(vec):
                    kernel.append(vec)
        kernel = span_basis(kernel)
    return len(image) == len(kernel) and subspace_leq(image, kernel)


# -- the pluriharmonic complex and the long exact sequence ------------------------------------------


def s_degree(k: int) -> int:
    return 0 if k == 0 else k + 1


def s_basis(model: Model, k: int) -> List[List[Scalar]]:
    """Realified basis of the invariant pluriharmonic space of index k."""
    _require_invariant(model)
    n = model.n
    cached = model._cache.get(("s_basis", k))
    if cached is not None:
        return cached
    if k < 0 or k > 2 * n:
        out: List[List[Scalar]] = []
    elif k == 0:
        out = real_subspace(model, 0, [form_vec(model, f, 0) for f in rk_basis(model, 0)])
    elif k <= n - 1:
        vecs = []
        for j in range(1, k + 1):
            for f in rpq_basis(model, j, k + 1 - j):
                vecs.append(form_vec(model, f, k + 1))
        out = real_subspace(model, k + 1, vecs)
    else:
        out = real_subspace(model, k + 1, [form_vec(model, f, k + 1) for f in rk_basis(model, k + 1)])
    model._cache[("s_basis", k)] = out
    return out


def _complexify(model: Model, k: int, rv: List[Scalar]) -> Form:
    D = len(_keys(model, k))
    coords = [Scalar(rv[i].re, rv[D + i].re) for i in range(D)]
    return vec_form(model, k, coords)


def _realified_image(model: Model, k_out: int, form: Form) -> List[Scalar]:
    return realify_vec(form_vec(model, form, k_out))


def s_differential(model: Model, k: int):
    """D: S^k -> S^{k+1} as a callable on realified vectors."""
    n = model.n

    def D0(rv):
        u = _complexify(model, 0, rv)
        w = ops.dbbar(model, u, 0, 0)
        return _realified_image(model, 2, model.d(w).scale(Scalar(0, 1)))

    def Dk(rv):
        w = _complexify(model, s_degree(k), rv)
        return _realified_image(model, s_degree(k) + 1, model.d(w))

    return D0 if k == 0 else Dk


def pluriharmonic_group(model: Model, k: int) -> Subquotient:
    """H^k of the invariant pluriharmonic complex, over the reals."""
    basis = s_basis(model, k)
    Dk = s_differential(model, k)
    nxt = s_basis(model, k + 1)
    # kernel of D restricted to the span
    if basis:
        cols = [Dk(v) for v in basis]
        if nxt or any(any(c) for c in cols):
            W = ExactMatrix.from_columns(cols)
            zk = []
            for kvec in linalg.kernel_basis(W):
                vec = [ZERO] * len(basis[0])
                for c, u in zip(kvec, basis):
                    if c:
                        vec = [a + c * b for a, b in zip(vec, u)]
                if any(vec):
                    zk.append(vec)
            zk = span_basis(zk)
        else:
            zk = list(basis)
    else:
        zk = []
    if k >= 1:
        prev = s_basis(model, k - 1)
        Dprev = s_differential(model, k - 1)
        bk = span_basis([Dprev(v) for v in prev])
    else:
        bk = []
    return Subquotient(f"H^{k}(P)", zk, bk)


def derham_real_group(model: Model, k: int) -> Subquotient:
    zc = _dclosed_vectors(model, k)
    bc = _dimage_vectors(model, k)
    Z = real_subspace(model, k, zc)
    B = real_subspace(model, k, bc)
    return Subquotient(f"H^{k}(R)", Z, B)


def kohn_rossi_group_realified(model: Model, p: int, q: int) -> Subquotient:
    src = rpq_basis(model, p, q)
    zc: List[Vec] = []
    if src:
        up = rpq_basis(model, p, q + 1)
        D = operator_matrix(model, lambda f: ops.dbbar(model, f, p, q), src, up, p + q + 1)
        Bmat = basis_matrix(model, src, p + q)
        for kvec in linalg.kernel_basis(D):
            zc.append(Bmat.apply(kvec))
    bc = []
    if q >= 1:
        for f in rpq_basis(model, p, q - 1):
            img = ops.dbbar(model, f, p, q - 1)
            if img:
                bc.append(form_vec(model, img, p + q))
    Z = [w for v in zc for w in (realify_vec(v), realify_vec([Scalar(0, 1) * x for x in v]))]
    B = [w for v in bc for w in (realify_vec(v), realify_vec([Scalar(0, 1) * x for x in v]))]
    return Subquotient(f"H^{{{p},{q}}}", span_basis(Z), span_basis(B))


def les_nodes(model: Model):
    """The long exact sequence as (node, map-to-next) pairs."""
    _require_invariant(model)
    n = model.n
    nodes = []
    maps = []
    for k in range(0, 2 * n + 2):
        # H^k(R)
        nodes.append(derham_real_group(model, k))

        def f1(rv, k=k):
            w = _complexify(model, k, rv)
            if k <= n:
                g = rumin.pi_pq(model, w, 0, k).scale(Scalar(0, 1))
            else:
                g = Form.zero(model.n, model.ring.nvars, k)
            return _realified_image(model, k, g)

        maps.append(f1)
        # H^{0,k}
        nodes.append(kohn_rossi_group_realified(model, 0, k) if k <= n
                     else Subquotient(f"H^{{0,{k}}}", [], []))

        def f2(rv, k=k):
            w = _complexify(model, k, rv)
            if k == 0:
                g = (w + w.conj()).scale(Scalar(Fraction(1, 2)))
                return _realified_image(model, 0, g)
            dw = model.d(w)
            g = (dw - dw.conj()).scale(Scalar(0, Fraction(1, 2)))
            return _realified_image(model, s_degree(k), g)

        maps.append(f2)
        # H^k(P)
        nodes.append(pluriharmonic_group(model, k) if k <= 2 * n
                     else Subquotient(f"H^{k}(P)", [], []))

        def f3(rv, k=k):
            if k == 0:
                u = _complexify(model, 0, rv)
                w = ops.dbbar(model, u, 0, 0)
                g = (w - w.conj()).scale(Scalar(0, Fraction(1, 2)))
                return _realified_image(model, 1, g)
            return list(rv)

        maps.append(f3)
    return nodes, maps


def les_check(model: Model) -> List[dict]:
    """Exactness at every node of the long exact sequence, through top degree."""
    nodes, maps = les_nodes(model)
    rows = []
    for i, node in enumerate(nodes):
        prev = nodes[i - 1] if i >= 1 else None
        fprev = maps[i - 1] if i >= 1 else None
        fnext = maps[i] if i < len(maps) else None
        nxt = nodes[i + 1] if i + 1 < len(nodes) else None
        ok = _exact_at(prev, fprev, node, fnext, nxt)
        rows.append({"node": node.label, "dim": node.dim, "exact": ok})
    return rows


# -- Hodge decompositions -------------------------------------------------------------------------


def hodge_decomposition_pq(model: Model, p: int, q: int) -> dict:
    basis = rpq_basis(model, p, q)
    k = p + q
    harm = [form_vec(model, f, k) for f in harmonic_pq(model, p, q)]
    im_d = []
    if q >= 1:
        for f in rpq_basis(model, p, q - 1):
            g = ops.dbbar(model, f, p, q - 1)
            if g:
                im_d.append(form_vec(model, g, k))
    im_ds = []
    for f in rpq_basis(model, p, q + 1):
        g = ops.dbbar_star(model, f, p, q + 1)
        if g:
            im_ds.append(form_vec(model, g, k))
    im_d = span_basis(im_d)
    im_ds = span_basis(im_ds)
    total = linalg.column_span_rank(harm + im_d + im_ds)
    ok_dims = (len(harm) + len(im_d) + len(im_ds) == len(basis) and total == len(basis))
    ortho = _mutually_orthogonal(model, k, p, q, [harm, im_d, im_ds])
    return {"p": p, "q": q, "dim": len(basis), "harmonic": len(harm),
            "im_dbbar": len(im_d), "im_dbbar_star": len(im_ds),
            "direct_sum": ok_dims, "orthogonal": ortho}


def hodge_decomposition_k(model: Model, k: int) -> dict:
    basis = rk_basis(model, k)
    harm = [form_vec(model, f, k) for f in harmonic_k(model, k)]
    im_d = span_basis(_dimage_vectors(model, k))
    im_ds = []
    for f in rk_basis(model, k + 1):
        g = ops.d_star(model, f)
        if g:
            im_ds.append(form_vec(model, g, k))
    im_ds = span_basis(im_ds)
    total = linalg.column_span_rank(harm + im_d + im_ds)
    ok_dims = (len(harm) + len(im_d) + len(im_ds) == len(basis) and total == len(basis))
    ortho = _mutually_orthogonal_k(model, k, [harm, im_d, im_ds])
    return {"k": k, "dim": len(basis), "harmonic": len(harm), "im_d": len(im_d),
            "im_d_star": len(im_ds), "direct_sum": ok_dims, "orthogonal": ortho}


def _l2_vec(model: Model, k: int, p: int, q: int, u: Vec, v: Vec) -> Scalar:
    fu = vec_form(model, k, u)
    fv = vec_form(model, k, v)
    return rumin.l2_pairing(model, fu, fv, p, q)


def _mutually_orthogonal(model: Model, k: int, p: int, q: int, groups: List[List[Vec]]) -> bool:
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            for u in groups[i]:
                for v in groups[j]:
                    if _l2_vec(model, k, p, q, u, v):
                        return False
    return True


def _l2_vec_k(model: Model, k: int, u: Vec, v: Vec) -> Scalar:
    fu = vec_form(model, k, u)
    fv = vec_form(model, k, v)
    acc = ZERO
    su = ops.bidegree_split(model, fu)
    sv = ops.bidegree_split(model, fv)
    for (p, q), cu in su.items():
        cv = sv.get((p, q))
        if cv is not None:
            acc = acc + rumin.l2_pairing(model, cu, cv, p, q)
    return acc


def _mutually_orthogonal_k(model: Model, k: int, groups: List[List[Vec]]) -> bool:
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            for u in groups[i]:
                for v in groups[j]:
                    if _l2_vec_k(model, k, u, v):
                        return False
    return True


# -- dualities and Hard Lefschetz ----------------------------------------------------------------------


def serre_check(model: Model) -> List[dict]:
    n = model.n
    rows = []
    for p in range(0, n + 2):
        for q in range(0, n + 1):
            if not ops.valid_pq(n, p, q):
                continue
            dp, dq = n + 1 - p, n - q
            d1 = len(harmonic_pq(model, p, q))
            d2 = len(harmonic_pq(model, dp, dq))
            images = []
            good = d1 == d2
            for f in harmonic_pq(model, p, q):
                g = rumin.conj_star(model, f, p, q)
                if not rumin.in_rumin_pq(model, g, dp, dq):
                    good = False
                if ops.kohn_laplacian(model, g, dp, dq):
                    good = False
                images.append(form_vec(model, g, dp + dq))
            if linalg.column_span_rank(images) != d1:
                good = False
            rows.append({"p": p, "q": q, "dim": d1, "dual_dim": d2, "ok": good})
    return rows


def poincare_check(model: Model) -> List[dict]:
    n = model.n
    rows = []
    for k in range(0, 2 * n + 2):
        dk = 2 * n + 1 - k
        d1 = len(harmonic_k(model, k))
        d2 = len(harmonic_k(model, dk))
        good = d1 == d2
        images = []
        for f in harmonic_k(model, k):
            g = ops.star_k(model, f)
            if ops.rumin_laplacian(model, g):
                good = False
            images.append(form_vec(model, g, dk))
        if linalg.column_span_rank(images) != d1:
            good = False
        rows.append({"k": k, "dim": d1, "dual_dim": d2, "ok": good})
    return rows


def e2_serre_check(model: Model) -> List[dict]:
    n = model.n
    rows = []
    for p in range(0, n + 2):
        for q in range(0, n + 1):
            if not ops.valid_pq(n, p, q):
                continue
            d1 = e_page_dim(model, 2, p, q)
            d2 = e_page_dim(model, 2, n + 1 - p, n - q)
            rows.append({"p": p, "q": q, "dim": d1, "dual_dim": d2, "ok": d1 == d2})
    return rows


def hard_lefschetz(model: Model, k: int) -> dict:
    _require_invariant(model)
    if not model.is_torsion_free():
        raise NotTorsionFree("Hard Lefschetz needs a torsion-free model")
    n = model.n
    if k > n:
        raise ValueError("hard Lefschetz is stated for k <= n")
    th = rumin.theta_form(model)
    pw = rumin.dtheta_pow(model, n - k)
    harm = harmonic_k(model, k)
    images = []
    harmonic_images = True
    for f in harm:
        g = th.wedge(f).wedge(pw)
        if not rumin.in_rumin_k(model, g) or ops.rumin_laplacian(model, g):
            harmonic_images = False
        images.append(form_vec(model, g, 2 * n + 1 - k))
    target = len(harmonic_k(model, 2 * n + 1 - k))
    bij = (linalg.column_span_rank(images) == len(harm) == target)
    return {"k": k, "dim": len(harm), "harmonic_images": harmonic_images, "bijective": bij}


# -- cup products ------------------------------------------------------------------------------------


def derham_class(model: Model, form: Form) -> Vec:
    """Coordinates of a closed form's class in the harmonic basis of its degree."""
    k = form.degree
    if model.d(form):
        raise NotClosed("representative is not d-closed")
    harm = [form_vec(model, f, k) for f in harmonic_k(model, k)]
    image = span_basis(_dimage_vectors(model, k))
    if not harm and not image:
        if form.is_zero():
            return []
        raise MembershipViolation("nonzero closed form in a zero space")
    sol = linalg.solve(ExactMatrix.from_columns(harm + image), form_vec(model, form, k))
    return sol[:len(harm)]


def cup_product_class(model: Model, f1: Form, f2: Form) -> Vec:
    return derham_class(model, ops.m2(model, f1, f2))


def cup_vanishing_check(model: Model) -> List[dict]:
    n = model.n
    rows = []
    for k in range(1, n + 1):
        for l in range(max(1, n + 1 - k), n + 1):
            ok = True
            for f in harmonic_k(model, k):
                for g in harmonic_k(model, l):
                    if any(derham_class(model, ops.m2(model, f, g))):
                        ok = False
            rows.append({"k": k, "l": l, "vanishes": ok})
    return rows


def cuplength_witness(model: Model) -> dict:
    """[dz^1] cup ... cup [dz^n] cup [theta ^ dzbar^1 ... dzbar^n] on the flat quotient."""
    n = model.n
    nv = model.ring.nvars
    forms = [Form.monomial(n, nv, False, (a,), (), 1) for a in range(1, n + 1)]
    top = rumin.theta_form(model).wedge(
        Form.monomial(n, nv, False, (), tuple(range(1, n + 1)), 1))
    acc = forms[0]
    for f in forms[1:]:
        acc = ops.m2(model, acc, f)
    acc = ops.m2(model, acc, top)
    cls = derham_class(model, acc)
    nonzero = any(cls)
    return {"witness_degrees": [1] * n + [n + 1], "top_class_nonzero": nonzero,
            "cuplength": n + 1 if nonzero else 0}


# -- Sasakian report ------------------------------------------------------------------------------------


def chern_trace_form(model: Model, power: int) -> Form:
    """tr(Omega^power): the curvature-form trace products entering Chern classes."""
    n = model.n
    nv = model.ring.nvars
    out = Form.zero(n, nv, 2 * power)
    idx_ranges = [range(n)] * power
    from itertools import product as iproduct
    for chainidx in iproduct(*idx_ranges):
        term = None
        ok = True
        for step in range(power):
            a = chainidx[step]
            b = chainidx[(step + 1) % power]
            f = model.big_omega[a][b]
            term = f if term is None else term.wedge(f)
            if term.is_zero():
                ok = False
                break
        if ok and term is not None:
            out = out + term
    return out


def sasaki_report(model: Model) -> List[dict]:
    _require_invariant(model)
    if not model.is_torsion_free():
        raise NotTorsionFree("Sasakian consequences need a torsion-free model")
    n = model.n
    rows = []
    b = derham_dims(model)
    e2 = spectral_page_table(model, 2)
    for k in range(0, 2 * n + 2):
        tot = sum(dim for (p, q), dim in e2.items() if p + q == k)
        rows.append({"check": "frolicher-equality", "k": k, "lhs": tot, "rhs": b[k],
                     "ok": tot == b[k]})
    for k in range(0, 2 * n + 2):
        if (k <= n and k % 2 == 1) or (k >= n + 1 and k % 2 == 0):
            rows.append({"check": "betti-parity", "k": k, "value": b[k], "ok": b[k] % 2 == 0})
    for p in range(0, n + 1):
        dim = e2.get((p, 0), 0)
        rows.append({"check": "e2-p0-bound", "p": p, "value": dim, "bound": comb(n, p),
                     "ok": dim <= comb(n, p)})
    rows.append({"check": "e2-n+1-0-bound", "p": n + 1, "value": e2.get((n + 1, 0), 0),
                 "bound": 1, "ok": e2.get((n + 1, 0), 0) <= 1})
    # Chern forms: type (k,k), closed, and pi-exact once 2k >= n+1
    for power in range(1, n + 1):
        chi = chern_trace_form(model, power)
        if chi.is_zero():
            rows.append({"check": "chern-vanishing", "power": power, "ok": True,
                         "detail": "curvature trace form vanishes"})
            continue
        typed = chi.horizontal_bidegrees() <= {(power, power)} and chi.is_horizontal()
        closed = model.d(chi).is_zero()
        ok = typed and closed
        if 2 * power >= n + 1:
            cls = derham_class(model, rumin.pi(model, chi))
            ok = ok and not any(cls)
            rows.append({"check": "chern-vanishing", "power": power, "ok": ok,
                         "detail": "pi-image is exact"})
        else:
            rows.append({"check": "chern-type", "power": power, "ok": ok,
                         "detail": "closed of type (k,k)"})
    return rows
