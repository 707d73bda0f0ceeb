"""Complex differential forms in theta-split storage.

A Form is a finite map {(theta?, A, B) -> Poly} over the ordered monomial
theta^eps ^ theta^A ^ theta^Bbar, with A (holomorphic) and B (antiholomorphic)
strictly increasing multi-indices and A written before Bbar.  Every paper
formula is transcribed into this one storage convention; keys with zero
coefficient are never stored, and all keys of a form have the same degree.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

from .errors import DimensionMismatch
from .multiindex import MultiIndex, canonicalize, multi_indices
from .poly import Poly
from .scalars import Scalar, as_scalar

Key = Tuple[bool, MultiIndex, MultiIndex]


def key_degree(key: Key) -> int:
    theta, A, B = key
    return (1 if theta else 0) + len(A) + len(B)


def _symbols(key: Key) -> List[Tuple[int, int]]:
    theta, A, B = key
    syms = [(0, 0)] if theta else []
    syms.extend((1, a) for a in A)
    syms.extend((2, b) for b in B)
    return syms


def wedge_keys(k1: Key, k2: Key) -> Tuple[Key, int]:
    """Product monomial and sign; sign 0 when a one-form repeats.

    Both keys are internally sorted, so the permutation sorting the
    concatenated symbol list has parity = the cross-inversion count.
    """
    s1, s2 = _symbols(k1), _symbols(k2)
    if set(s1) & set(s2):
        return (False, (), ()), 0
    inversions = 0
    for x in s1:
        for y in s2:
            if y < x:
                inversions += 1
    key = (k1[0] or k2[0], tuple(sorted(k1[1] + k2[1])), tuple(sorted(k1[2] + k2[2])))
    return key, (-1 if inversions % 2 else 1)


class Form:
    __slots__ = ("n", "nvars", "degree", "terms")

    def __init__(self, n: int, nvars: int, degree: int, terms: Dict[Key, Poly] | None = None):
        self.n = n
        self.nvars = nvars
        self.degree = degree
        self.terms: Dict[Key, Poly] = {}
        if terms:
            for k, c in terms.items():
                if not c:
                    continue
                if key_degree(k) != degree:
                    raise ValueError(f"key {k} has degree {key_degree(k)}, form has {degree}")
                self.terms[k] = c

    # -- construction ---------------------------------------------------------

    @classmethod
    def zero(cls, n: int, nvars: int, degree: int) -> "Form":
        return cls(n, nvars, degree)

    @classmethod
    def monomial(cls, n: int, nvars: int, theta: bool, A: Iterable[int], B: Iterable[int], coeff) -> "Form":
        Asorted, sa = canonicalize(tuple(A), n)
        Bsorted, sb = canonicalize(tuple(B), n)
        if sa * sb == 0:
            deg = (1 if theta else 0) + len(tuple(A)) + len(tuple(B))
            return cls(n, nvars, deg)
        if isinstance(coeff, Poly):
            c = coeff.scale(as_scalar(sa * sb)) if sa * sb != 1 else coeff
        else:
            c = Poly.const(nvars, as_scalar(coeff) * as_scalar(sa * sb))
        key = (bool(theta), Asorted, Bsorted)
        return cls(n, nvars, key_degree(key), {key: c})

    def _like(self, degree: int, terms: Dict[Key, Poly]) -> "Form":
        return Form(self.n, self.nvars, degree, terms)

    # -- basic predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.degree, frozenset(self.terms.items())))

    # -- linear structure ------------------------------------------------------

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return self._like(self.degree, out)

    def __neg__(self) -> "Form":
        return self._like(self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        if isinstance(c, Poly):
            return self._like(self.degree, {k: c * v for k, v in self.terms.items()})
        c = as_scalar(c)
        if not c:
            return self._like(self.degree, {})
        return self._like(self.degree, {k: v.scale(c) for k, v in self.terms.items()})

    def __mul__(self, c):
        return self.scale(c)

    def __rmul__(self, c):
        return self.scale(c)

    def _check(self, other: "Form"):
        if self.n != other.n:
            raise DimensionMismatch(f"forms over n={self.n} and n={other.n}")

    # -- exterior algebra ------------------------------------------------------

    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        out: Dict[Key, Poly] = {}
        deg = self.degree + other.degree
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key, sign = wedge_keys(k1, k2)
                if sign == 0:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                s = out.get(key)
                s = c if s is None else s + c
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return self._like(deg, out)

    def __xor__(self, other: "Form") -> "Form":
        return self.wedge(other)

    def conj(self) -> "Form":
        out: Dict[Key, Poly] = {}
        for (theta, A, B), c in self.terms.items():
            sign = -1 if (len(A) * len(B)) % 2 else 1
            cc = c.conj()
            if sign < 0:
                cc = -cc
            out[(theta, B, A)] = cc
        return self._like(self.degree, out)

    # -- component access ------------------------------------------------------

    def component(self, theta: bool, A: Iterable[int], B: Iterable[int]) -> Poly:
        """Skew component at an arbitrary tuple pair (sign of sorting included)."""
        Asorted, sa = canonicalize(tuple(A), self.n)
        Bsorted, sb = canonicalize(tuple(B), self.n)
        s = sa * sb
        if s == 0:
            return Poly(self.nvars)
        c = self.terms.get((bool(theta), Asorted, Bsorted))
        if c is None:
            return Poly(self.nvars)
        return c if s == 1 else -c

    def coefficient(self, key: Key) -> Poly:
        return self.terms.get(key, Poly(self.nvars))

    # -- theta splitting --------------------------------------------------------

    def horizontal(self) -> "Form":
        return self._like(self.degree, {k: c for k, c in self.terms.items() if not k[0]})

    def theta_part(self) -> "Form":
        """eta with omega = theta ^ eta + horizontal; degree drops by one."""
        out = {(False, k[1], k[2]): c for k, c in self.terms.items() if k[0]}
        return self._like(self.degree - 1, out)

    def t_contract(self) -> "Form":
        """Reeb contraction; equals theta_part for theta-split storage."""
        return self.theta_part()

    def is_horizontal(self) -> bool:
        return all(not k[0] for k in self.terms)

    def bidegree_component(self, p: int, q: int) -> "Form":
        """Keys with |A| = p, |B| = q (horizontal) -- pure-type slice."""
        out = {k: c for k, c in self.terms.items() if not k[0] and len(k[1]) == p and len(k[2]) == q}
        return self._like(self.degree, out)

    def horizontal_bidegrees(self) -> set:
        return {(len(k[1]), len(k[2])) for k in self.terms if not k[0]}

    def theta_bidegrees(self) -> set:
        return {(len(k[1]), len(k[2])) for k in self.terms if k[0]}

    # -- coordinates -------------------------------------------------------------

    def vec(self, keys: List[Key]) -> List[Poly]:
        return [self.terms.get(k, Poly(self.nvars)) for k in keys]

    def constant_vec(self, keys: List[Key]) -> List[Scalar]:
        out = []
        zero = as_scalar(0)
        for k in keys:
            c = self.terms.get(k)
            out.append(zero if c is None else c.constant_value())
        return out

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.terms.values())

    def map_coefficients(self, fn) -> "Form":
        out = {}
        for k, c in self.terms.items():
            v = fn(c)
            if v:
                out[k] = v
        return self._like(self.degree, out)

    def __repr__(self):
        if not self.terms:
            return f"Form(0; deg={self.degree})"
        parts = []
        for k in sorted(self.terms):
            theta, A, B = k
            sym = []
            if theta:
                sym.append("th")
            sym.extend(f"h{a}" for a in A)
            sym.extend(f"a{b}" for b in B)
            parts.append(f"[{'^'.join(sym) or '1'}]({self.terms[k]!r})")
        return " + ".join(parts)


@lru_cache(maxsize=None)
def ambient_keys(n: int, degree: int) -> Tuple[Key, ...]:
    """All monomial keys of a degree, lexicographic in (theta, A, B)."""
    keys = []
    for theta in (False, True):
        h = degree - (1 if theta else 0)
        if h < 0 or h > 2 * n:
            continue
        for a_len in range(max(0, h - n), min(n, h) + 1):
            for A in multi_indices(n, a_len):
                for B in multi_indices(n, h - a_len):
                    keys.append((theta, A, B))
    keys.sort()
    return tuple(keys)


def from_vec(n: int, nvars: int, degree: int, keys: List[Key], coeffs) -> Form:
    terms = {}
    for k, c in zip(keys, coeffs):
        if isinstance(c, Poly):
            if c:
                terms[k] = c
        else:
            c = as_scalar(c)
            if c:
                terms[k] = Poly.const(nvars, c)
    return Form(n, nvars, degree, terms)
