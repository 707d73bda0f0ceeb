"""Multi-index combinatorics and sign bookkeeping for skew slots.

Multi-indices are strictly increasing tuples of frame indices in {1..n}.
Components of skew tensors are stored at the sorted representative; looking
one up at an arbitrary tuple picks up the sorting permutation's parity.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Dict, Iterable, Sequence, Tuple

from .errors import IndexOutOfRange

MultiIndex = Tuple[int, ...]


def canonicalize(indices: Sequence[int], n: int) -> Tuple[MultiIndex, int]:
    """Sort a tuple of frame indices; returns (sorted tuple, sign).

    sign is the parity of the sorting permutation, or 0 on repeated entries.
    """
    for idx in indices:
        if not 1 <= idx <= n:
            raise IndexOutOfRange(f"index {idx} not in 1..{n}")
    items = list(indices)
    if len(set(items)) != len(items):
        return (), 0
    sign = 1
    # insertion sort; counts inversions, fine at these lengths
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    return tuple(items), sign


def multi_indices(n: int, length: int) -> Iterable[MultiIndex]:
    """All strictly increasing multi-indices of the given length in {1..n}."""
    return combinations(range(1, n + 1), length)


def remove_at(t: MultiIndex, pos: int) -> MultiIndex:
    return t[:pos] + t[pos + 1:]


def skew_prepend(component: Callable[[int, MultiIndex], object], indices: MultiIndex):
    """Alternating bracket (len(indices)) * X_{[a} Y_{A']} at a sorted tuple.

    ``component(first, rest)`` evaluates the unskewed expression with the
    given index in the distinguished first slot.  No normalizing division.
    """
    total = None
    for m, idx in enumerate(indices):
        rest = remove_at(indices, m)
        term = component(idx, rest)
        if m % 2 == 1:
            term = -term
        total = term if total is None else total + term
    return total


def fixed_index_bracket(component: Callable[[int, int], object], coeff, indices: MultiIndex):
    """Sum_j coeff[a_j][mu] * component with mu replacing slot j (mu fixed).

    ``component(mu, rest)`` gives the tensor entry with mu moved to the front
    of the remaining indices; the slot-j placement contributes (-1)^(j-1).
    ``coeff`` is an n x n table indexed from 1.
    """
    total = None
    for j, a in enumerate(indices):
        rest = remove_at(indices, j)
        inner = None
        for mu, c in coeff[a].items() if isinstance(coeff[a], dict) else enumerate_coeff(coeff[a]):
            if not c:
                continue
            term = c * component(mu, rest)
            inner = term if inner is None else inner + term
        if inner is None:
            continue
        if j % 2 == 1:
            inner = -inner
        total = inner if total is None else total + inner
    return total


def enumerate_coeff(row):
    return ((mu + 1, c) for mu, c in enumerate(row))


def skew_symmetrize(tau: Dict[MultiIndex, object], omega: Dict[Tuple[MultiIndex, MultiIndex], object],
                    p: int, n: int):
    """Components of the exterior product of a (1,0)-tensor against a (p,q) one.

    Implements the (p+1)-term alternation (p+1) tau_[a omega_{A B]}; inputs are
    component maps keyed by sorted multi-indices, output likewise.
    """
    out: Dict[Tuple[MultiIndex, MultiIndex], object] = {}
    seen_b = {key[1] for key in omega}
    for full in multi_indices(n, p + 1):
        for b in seen_b:
            def entry(first, rest, _b=b):
                t = tau.get((first,))
                if t is None:
                    return None
                w = omega.get((rest, _b))
                if w is None:
                    return None
                return t * w

            total = None
            for m, idx in enumerate(full):
                term = entry(idx, remove_at(full, m))
                if term is None:
                    continue
                if m % 2 == 1:
                    term = -term
                total = term if total is None else total + term
            if total is not None and total:
                out[(full, b)] = total
    return out
