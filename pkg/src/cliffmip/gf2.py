"""Bit-packed linear algebra over GF(2).

Rows are Python ints; bit ``j`` of a row is column ``j``. Python ints are
arbitrary-width packed words, so XOR of two rows costs O(ncols / 64)
machine operations.
"""
from __future__ import annotations

from collections.abc import Sequence


def popcount(v: int) -> int:
    return v.bit_count()


def parity(v: int) -> int:
    return v.bit_count() & 1


def row_reduce(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form.

    Returns the nonzero reduced rows and their pivot columns (in order).
    """
    a = [r for r in rows]
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        bit = 1 << col
        pivot = next((k for k in range(top, len(a)) if a[k] & bit), None)
        if pivot is None:
            continue
        a[top], a[pivot] = a[pivot], a[top]
        for k in range(len(a)):
            if k != top and a[k] & bit:
                a[k] ^= a[top]
        pivots.append(col)
        top += 1
        if top == len(a):
            break
    return a[:top], pivots


def rank(rows: Sequence[int], ncols: int) -> int:
    return len(row_reduce(rows, ncols)[0])


def solve(rows: Sequence[int], rhs: Sequence[int], ncols: int) -> int | None:
    """One solution ``x`` (as a bitmask over ``ncols`` unknowns) of ``A x = b``.

    ``rows[k]`` is equation ``k`` and ``rhs[k]`` its right-hand side bit.
    Returns None when the system is inconsistent.
    """
    if len(rows) != len(rhs):
        raise ValueError("rows and rhs differ in length")
    aug_bit = 1 << ncols
    aug = [r | (aug_bit if b & 1 else 0) for r, b in zip(rows, rhs)]
    reduced, pivots = row_reduce(aug, ncols + 1)
    x = 0
    for row, col in zip(reduced, pivots):
        if col == ncols:
            return None
        if row & aug_bit:
            x |= 1 << col
    return x
