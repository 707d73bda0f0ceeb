"""Polynomial coefficients in the frame coordinates z^1..z^n, zb^1..zb^n, t.

Sparse monomial map: exponent tuple (length 2n+1, layout z | zb | t) -> Scalar.
On quotient (invariant) models every coefficient is a constant polynomial and
the frame derivations are the zero maps, so this ring degenerates to Q(i).
"""

from __future__ import annotations

from typing import Dict, Tuple

from .scalars import ONE, Scalar, as_scalar

Monomial = Tuple[int, ...]


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Dict[Monomial, Scalar] | None = None):
        self.nvars = nvars
        self.terms = {} if terms is None else {m: c for m, c in terms.items() if c}

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        c = as_scalar(c)
        if not c:
            return cls(nvars)
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, index: int) -> "Poly":
        mono = [0] * nvars
        mono[index] = 1
        return cls(nvars, {tuple(mono): ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in m) for m in self.terms)

    def constant_value(self) -> Scalar:
        if not self.terms:
            return as_scalar(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Scalar)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: Dict[Monomial, Scalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                c = c1 * c2
                s = out.get(m)
                s = c if s is None else s + c
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly(self.nvars, out)

    def __rmul__(self, other):
        return self * other

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials over different variable sets")
            return other
        return Poly.const(self.nvars, other)

    def scale(self, c) -> "Poly":
        c = as_scalar(c)
        if not c:
            return Poly(self.nvars)
        return Poly(self.nvars, {m: c * v for m, v in self.terms.items()})

    def conj(self) -> "Poly":
        """Swap z^a <-> zb^a and conjugate coefficients (t is real)."""
        n = (self.nvars - 1) // 2
        out = {}
        for m, c in self.terms.items():
            swapped = m[n:2 * n] + m[:n] + m[2 * n:]
            out[swapped] = c.conj()
        return Poly(self.nvars, out)

    def partial(self, index: int) -> "Poly":
        out: Dict[Monomial, Scalar] = {}
        for m, c in self.terms.items():
            e = m[index]
            if e == 0:
                continue
            lowered = m[:index] + (e - 1,) + m[index + 1:]
            add = c * Scalar(e)
            s = out.get(lowered)
            s = add if s is None else s + add
            if s:
                out[lowered] = s
            else:
                out.pop(lowered, None)
        return Poly(self.nvars, out)

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        n = (self.nvars - 1) // 2
        names = [f"z{a + 1}" for a in range(n)] + [f"zb{a + 1}" for a in range(n)] + ["t"]
        parts = []
        for m, c in sorted(self.terms.items()):
            factors = [f"{names[i]}^{e}" if e > 1 else names[i] for i, e in enumerate(m) if e]
            body = "*".join(factors)
            parts.append(f"({c}){'*' + body if body else ''}")
        return " + ".join(parts)
