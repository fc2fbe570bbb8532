"""Finitely supported elements of the group algebra of a free product.

Coefficients are either exact rationals (``Mode.EXACT``, backed by
``fractions.Fraction``) or binary64 floats (``Mode.FLOAT``). Everything that
feeds a separability verdict runs in exact mode.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Union

from .errors import InfiniteOrder, MalformedWord, MixedSpecs, ModeMismatch
from .group import INFINITE, GroupElement, GroupSpec, Word, _length, _mul, element_order

Coefficient = Union[Fraction, float]


class Mode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


def _coerce(mode: Mode, value) -> Coefficient:
    if mode is Mode.EXACT:
        if isinstance(value, float):
            raise ModeMismatch("float coefficient given to an exact-mode element")
        if not isinstance(value, Rational):
            raise TypeError(f"cannot use {value!r} as an exact coefficient")
        return Fraction(value)
    return float(value)


class AlgebraElement:
    """``sum c_g g`` with finitely many nonzero ``c_g``.

    Instances are immutable; arithmetic returns new elements. Zero
    coefficients are never stored.
    """

    __slots__ = ("spec", "mode", "_terms")

    def __init__(self, spec: GroupSpec, terms: Mapping[Word, Coefficient] = None,
                 mode: Mode = Mode.EXACT):
        self.spec = spec
        self.mode = mode
        self._terms: dict[Word, Coefficient] = {}
        for word, c in (terms or {}).items():
            c = _coerce(mode, c)
            if c:
                self._terms[word] = c

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[GroupElement, object]], spec: GroupSpec = None,
                   mode: Mode = Mode.EXACT) -> "AlgebraElement":
        """Build from ``(group element, coefficient)`` pairs, summing repeats."""
        acc: dict[Word, Coefficient] = {}
        for g, c in pairs:
            if spec is None:
                spec = g.spec
            elif g.spec != spec:
                raise MixedSpecs("terms come from different groups")
            acc[g.syllables] = acc.get(g.syllables, 0) + _coerce(mode, c)
        if spec is None:
            raise ValueError("cannot infer the group of an empty element; pass spec=")
        return cls(spec, acc, mode)

    @classmethod
    def zero(cls, spec: GroupSpec, mode: Mode = Mode.EXACT) -> "AlgebraElement":
        return cls(spec, {}, mode)

    @classmethod
    def one(cls, spec: GroupSpec, mode: Mode = Mode.EXACT) -> "AlgebraElement":
        return cls(spec, {(): 1}, mode)

    @classmethod
    def of(cls, g: GroupElement, coefficient=1, mode: Mode = Mode.EXACT) -> "AlgebraElement":
        return cls(g.spec, {g.syllables: coefficient}, mode)

    def coefficient(self, g: GroupElement) -> Coefficient:
        return self._terms.get(g.syllables, self._zero())

    def _zero(self) -> Coefficient:
        return Fraction(0) if self.mode is Mode.EXACT else 0.0

    def items(self) -> Iterator[tuple[GroupElement, Coefficient]]:
        for word, c in self._terms.items():
            yield GroupElement(self.spec, word), c

    def words(self) -> Iterator[tuple[Word, Coefficient]]:
        return iter(self._terms.items())

    @property
    def support(self) -> list[GroupElement]:
        return [GroupElement(self.spec, w) for w in self._terms]

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def _check(self, other: "AlgebraElement"):
        if self.spec != other.spec:
            raise MixedSpecs("algebra elements over different groups")
        if self.mode is not other.mode:
            raise ModeMismatch(f"cannot combine {self.mode.value} and {other.mode.value} elements")

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.spec == other.spec and self.mode is other.mode and self._terms == other._terms

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return add(self, other)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def to_float(self) -> "AlgebraElement":
        return AlgebraElement(self.spec, {w: float(c) for w, c in self._terms.items()}, Mode.FLOAT)

    def __repr__(self):
        if not self._terms:
            return "AlgebraElement(0)"
        body = " + ".join(f"({c})*[{GroupElement(self.spec, w)}]" for w, c in self._sorted())
        return f"AlgebraElement({body})"

    def _sorted(self) -> list[tuple[Word, Coefficient]]:
        orders = self.spec.orders
        return sorted(self._terms.items(),
                      key=lambda kv: (_length(orders, kv[0]), str(GroupElement(self.spec, kv[0]))))

    def dumps(self) -> str:
        """Serialize as ``coefficient<TAB>word`` lines under a header line."""
        lines = [f"# mode={self.mode.value} spec_hash={self.spec.spec_hash}"]
        for w, c in self._sorted():
            text = f"{c.numerator}/{c.denominator}" if self.mode is Mode.EXACT else repr(c)
            lines.append(f"{text}\t{GroupElement(self.spec, w)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, spec: GroupSpec) -> "AlgebraElement":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise MalformedWord("algebra element file lacks its header line")
        header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        if header.get("spec_hash") != spec.spec_hash:
            raise MixedSpecs("algebra element file was written for a different group")
        mode = Mode(header["mode"])
        pairs = []
        for line in lines[1:]:
            if not line.strip():
                continue
            coef, _, word = line.partition("\t")
            value = Fraction(coef) if mode is Mode.EXACT else float(coef)
            pairs.append((spec.parse_element(word), value))
        return cls.from_terms(pairs, spec=spec, mode=mode)


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    a._check(b)
    terms = dict(a._terms)
    for w, c in b._terms.items():
        terms[w] = terms.get(w, 0) + c
    return AlgebraElement(a.spec, terms, a.mode)


def scale(a: AlgebraElement, factor) -> AlgebraElement:
    factor = _coerce(a.mode, factor)
    return AlgebraElement(a.spec, {w: c * factor for w, c in a._terms.items()}, a.mode)


def convolve(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """``(sum a_g g)(sum b_h h) = sum a_g b_h (gh)``."""
    a._check(b)
    orders = a.spec.orders
    terms: dict[Word, Coefficient] = {}
    for g, ca in a._terms.items():
        for h, cb in b._terms.items():
            gh = _mul(orders, g, h)
            terms[gh] = terms.get(gh, 0) + ca * cb
    return AlgebraElement(a.spec, terms, a.mode)


def build_idempotent(g: GroupElement) -> AlgebraElement:
    """The averaging idempotent ``(1 + g + ... + g^(d-1)) / d`` of a torsion element."""
    d = element_order(g)
    if d == INFINITE:
        raise InfiniteOrder(f"{g} has infinite order")
    coeff = Fraction(1, d)
    terms = {}
    power = g.spec.identity()
    for _ in range(d):
        terms[power.syllables] = coeff
        power = power * g
    return AlgebraElement(g.spec, terms, Mode.EXACT)


def is_idempotent(a: AlgebraElement) -> bool:
    if a.mode is not Mode.EXACT:
        raise ModeMismatch("idempotency is only decided in exact mode")
    return convolve(a, a) == a


@dataclass(frozen=True)
class SobolevParams:
    s: float

    def __post_init__(self):
        if not self.s >= 0:
            raise ValueError(f"Sobolev exponent must be >= 0, got {self.s}")


def sobolev_norm(a: AlgebraElement, params: SobolevParams | float) -> float:
    """``sqrt(sum |c_g|^2 (1 + l(g))^(2s))`` evaluated in binary64."""
    s = params.s if isinstance(params, SobolevParams) else SobolevParams(params).s
    orders = a.spec.orders
    terms = [float(c * c) * (1 + _length(orders, w)) ** (2 * s) for w, c in a.words()]
    terms.sort(reverse=True)
    return math.sqrt(math.fsum(terms))


def delta_trace(a: AlgebraElement) -> Coefficient:
    """The coefficient of the identity."""
    return a._terms.get((), a._zero())


def augmentation_trace(a: AlgebraElement) -> Coefficient:
    """Sum of all coefficients (the trivial representation)."""
    if a.mode is Mode.EXACT:
        return sum(a._terms.values(), Fraction(0))
    return math.fsum(a._terms.values())
