"""Sparse exact Gaussian elimination over Q or Q(sqrt d).

Rows are dicts column -> scalar.  Columns are compared through a caller
supplied ``order`` key; the *largest* column of a row is its pivot, so
with a degree-descending order pivots sit in the highest degree present.
"""

from __future__ import annotations

import heapq
from typing import Callable, Hashable, Iterable

from .scalars import is_zero


class Echelon:
    """Incremental row echelon form with leading-column pivots."""

    def __init__(self, order: Callable[[Hashable], object]):
        self.order = order
        self.rows: dict = {}  # pivot column -> row (pivot coefficient 1)
        self._keys: dict = {}

    def _key(self, c):
        k = self._keys.get(c)
        if k is None:
            k = self._keys[c] = self.order(c)
        return k

    def _sweep(self, row: dict, stop_at_free: bool) -> dict:
        # Repeatedly clear the highest pivot column present.  Every stored row
        # has all of its other entries strictly below its pivot, so this ends.
        work = {c: v for c, v in row.items() if not is_zero(v)}
        heap = [(_neg(self._key(c)), i, c) for i, c in enumerate(work)]
        heapq.heapify(heap)
        counter = len(heap)
        out: dict = {}
        while heap:
            _, _, c = heapq.heappop(heap)
            v = work.pop(c, None)
            if v is None or is_zero(v):
                continue
            pr = self.rows.get(c)
            if pr is None:
                out[c] = v
                if stop_at_free:
                    # keep the remainder as-is; c is the new pivot
                    for c2, v2 in work.items():
                        if not is_zero(v2):
                            out[c2] = v2
                    return out
                continue
            for c2, v2 in pr.items():
                if c2 == c:
                    continue
                if c2 in work:
                    work[c2] = work[c2] - v * v2
                else:
                    work[c2] = -v * v2
                    counter += 1
                    heapq.heappush(heap, (_neg(self._key(c2)), counter, c2))
        return out

    def add(self, row: dict):
        """Insert a row; return its new pivot column, or None if dependent."""
        rem = self._sweep(row, stop_at_free=True)
        if not rem:
            return None
        piv = max(rem, key=self._key)
        inv = 1 / rem[piv]
        self.rows[piv] = {c: v * inv for c, v in rem.items()}
        return piv

    def extend(self, rows: Iterable[dict]) -> int:
        return sum(self.add(r) is not None for r in rows)

    def normal_form(self, row: dict) -> dict:
        """Fully reduced remainder; zero iff the row lies in the span."""
        return self._sweep(row, stop_at_free=False)

    def contains(self, row: dict) -> bool:
        return not self.normal_form(row)

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> set:
        return set(self.rows)


class _Neg:
    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k

    def __lt__(self, other):
        return other.k < self.k

    def __eq__(self, other):
        return self.k == other.k


def _neg(k):
    if isinstance(k, (int, float)):
        return -k
    return _Neg(k)


def rank(rows: Iterable[dict], order=lambda c: c) -> int:
    e = Echelon(order)
    return e.extend(rows)


def null_space(rows: list, columns: list) -> list:
    """Basis of {x : sum_c row[c] x[c] = 0 for every row}, as dicts over ``columns``."""
    index = {c: i for i, c in enumerate(columns)}
    e = Echelon(lambda c: index[c])
    e.extend(rows)
    # fully reduce each pivot row so its free part is explicit
    reduced = {p: {p: 1, **e.normal_form({c: v for c, v in r.items() if c != p})} for p, r in e.rows.items()}
    out = []
    for free in columns:
        if free in e.rows:
            continue
        vec = {free: 1}
        for p, r in reduced.items():
            v = r.get(free)
            if v is not None and not is_zero(v):
                vec[p] = -v
        out.append(vec)
    return out
