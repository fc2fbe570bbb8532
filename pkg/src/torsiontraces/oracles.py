"""Brute-force reference computations.

None of these use cyclic reduction, the syllable length formula or the
closed-form counts; they only multiply group elements. Tests and the verify
suite compare the fast paths against them.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .group import GroupElement, GroupSpec, Syllable, Word


def letters(spec: GroupSpec) -> list[GroupElement]:
    """The symmetric generating set: each generator and its inverse."""
    out = []
    for name in spec.names:
        g = spec.gen(name)
        out.append(g)
        if ~g != g:
            out.append(~g)
    return out


def bfs_ball(spec: GroupSpec, R: int) -> dict[GroupElement, int]:
    """Breadth-first search of the Cayley graph: element -> word length."""
    dist = {spec.identity(): 0}
    frontier = [spec.identity()]
    gens = letters(spec)
    for r in range(1, R + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = g * s
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
        frontier = nxt
    return dist


def free_reduce(spec: GroupSpec, raw: Sequence[Syllable]) -> Word:
    """Rewrite to a fixpoint: merge equal-factor neighbours, drop trivial syllables."""
    orders = spec.orders
    word = [list(s) for s in raw]
    changed = True
    while changed:
        changed = False
        for k, (i, e) in enumerate(word):
            if (orders[i] and e % orders[i] == 0) or e == 0:
                del word[k]
                changed = True
                break
            if k + 1 < len(word) and word[k + 1][0] == i:
                word[k][1] += word[k + 1][1]
                del word[k + 1]
                changed = True
                break
    return tuple((i, e % orders[i] if orders[i] else e) for i, e in word)


def conjugacy_orbit(a: GroupElement, conjugators) -> set[GroupElement]:
    return {w * a * ~w for w in conjugators}


def cofactor_determinant(m: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(m)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(m[0][0])
    total = Fraction(0)
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * Fraction(m[0][j]) * cofactor_determinant(minor)
    return total
