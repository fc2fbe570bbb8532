"""Free products of cyclic groups: normal forms, length, order and conjugacy.

Elements are stored as alternating syllable sequences ``((factor, exponent), ...)``.
For a finite factor of order ``d`` the exponent is the residue in ``1..d-1``;
for an infinite factor it is any nonzero integer. Adjacent syllables always
live in different factors, so the sequence is the unique reduced word.

The raw helpers prefixed ``_`` work on plain tuples and an ``orders`` tuple
(0 meaning infinite) so the enumeration code can avoid object overhead.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import yaml

from .errors import InvalidSpec, MalformedSpec, MalformedWord, MixedSpecs

INFINITE = math.inf

Syllable = tuple[int, int]
Word = tuple[Syllable, ...]

SPEC_FORMAT_VERSION = 1


def _canon(order: int, exp: int) -> int:
    return exp % order if order else exp


def _syllable_length(order: int, exp: int) -> int:
    if order:
        return min(exp, order - exp)
    return abs(exp)


def _reduce(orders: Sequence[int], word: Iterable[Syllable]) -> Word:
    stack: list[Syllable] = []
    for i, e in word:
        e = _canon(orders[i], e)
        if e == 0:
            continue
        if stack and stack[-1][0] == i:
            merged = _canon(orders[i], stack.pop()[1] + e)
            if merged:
                stack.append((i, merged))
        else:
            stack.append((i, e))
    return tuple(stack)


def _mul(orders: Sequence[int], a: Word, b: Word) -> Word:
    # cancellation can only happen at the junction
    left = list(a)
    k = 0
    while left and k < len(b) and left[-1][0] == b[k][0]:
        i = b[k][0]
        merged = _canon(orders[i], left.pop()[1] + b[k][1])
        k += 1
        if merged:
            left.append((i, merged))
            break
    left.extend(b[k:])
    return tuple(left)


def _inv(orders: Sequence[int], a: Word) -> Word:
    return tuple((i, orders[i] - e if orders[i] else -e) for i, e in reversed(a))


def _length(orders: Sequence[int], a: Word) -> int:
    return sum(_syllable_length(orders[i], e) for i, e in a)


def _cyclic_reduce(orders: Sequence[int], a: Word) -> tuple[Word, Word]:
    """Return ``(core, conjugator)`` with ``a = conjugator * core * conjugator^-1``."""
    core = list(a)
    conj: list[Syllable] = []
    while len(core) >= 2 and core[0][0] == core[-1][0]:
        i, first = core[0]
        conj.append((i, first))
        # a = s1 (M sn s1) s1^-1, and sn s1 collapses to at most one syllable
        merged = _canon(orders[i], core[-1][1] + first)
        core = core[1:-1] + ([(i, merged)] if merged else [])
    return tuple(core), tuple(conj)


def _is_rotation(a: Word, b: Word) -> bool:
    if len(a) != len(b):
        return False
    if len(a) <= 1:
        return a == b
    doubled = a + a
    n = len(a)
    return any(doubled[k:k + n] == b for k in range(n))


def _order(orders: Sequence[int], a: Word) -> int | float:
    core, _ = _cyclic_reduce(orders, a)
    if not core:
        return 1
    if len(core) == 1:
        i, e = core[0]
        if orders[i]:
            return orders[i] // math.gcd(orders[i], e)
    return INFINITE


@dataclass(frozen=True)
class CyclicFactor:
    order: int  # 0 means infinite cyclic
    name: str


@dataclass(frozen=True)
class GroupSpec:
    """The free product of the cyclic groups listed in ``factors``."""

    factors: tuple[CyclicFactor, ...]
    format_version: int = SPEC_FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.format_version != SPEC_FORMAT_VERSION:
            raise InvalidSpec(f"format_version: unsupported value {self.format_version!r}")
        if not self.factors:
            raise InvalidSpec("factors: at least one factor is required")
        seen = set()
        for k, f in enumerate(self.factors):
            if isinstance(f.order, bool) or not isinstance(f.order, int) or f.order < 0:
                raise InvalidSpec(f"factors[{k}].order: must be an integer >= 0, got {f.order!r}")
            if f.order == 1:
                raise InvalidSpec(f"factors[{k}].order: order 1 is the trivial group")
            if not isinstance(f.name, str) or not f.name.isidentifier() or f.name == "e":
                raise InvalidSpec(f"factors[{k}].name: {f.name!r} is not a usable generator name")
            if f.name in seen:
                raise InvalidSpec(f"factors[{k}].name: duplicate generator name {f.name!r}")
            seen.add(f.name)

    @classmethod
    def from_orders(cls, orders: Sequence[int], names: Sequence[str]) -> "GroupSpec":
        if len(orders) != len(names):
            raise InvalidSpec("factors: orders and names differ in length")
        return cls(tuple(CyclicFactor(o, n) for o, n in zip(orders, names)))

    @cached_property
    def orders(self) -> tuple[int, ...]:
        return tuple(f.order for f in self.factors)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise MalformedWord(f"unknown generator {name!r}") from None

    def identity(self) -> "GroupElement":
        return GroupElement(self, ())

    def gen(self, name: str) -> "GroupElement":
        return GroupElement(self, _reduce(self.orders, [(self.index(name), 1)]))

    def element(self, raw: Iterable[Syllable]) -> "GroupElement":
        return normal_form(self, raw)

    def parse_element(self, text: str) -> "GroupElement":
        """Parse ``"y:1 x:2 y:-1"`` (bare ``x`` means ``x:1``; ``e`` is the identity)."""
        raw = []
        for token in text.split():
            if token == "e":
                continue
            name, sep, exp = token.partition(":")
            try:
                power = int(exp) if sep else 1
            except ValueError:
                raise MalformedWord(f"bad exponent in token {token!r}") from None
            raw.append((self.index(name), power))
        return normal_form(self, raw)

    def canonical(self) -> dict:
        return {
            "factors": [{"name": f.name, "order": f.order} for f in self.factors],
            "format_version": self.format_version,
            "type": "free_product",
        }

    def to_text(self) -> str:
        return yaml.safe_dump(self.canonical(), sort_keys=True)

    @cached_property
    def spec_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __str__(self):
        parts = [f"Z/{f.order}" if f.order else "Z" for f in self.factors]
        return " * ".join(parts)


@dataclass(frozen=True, eq=False)
class GroupElement:
    spec: GroupSpec
    syllables: Word

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.syllables == other.syllables and self.spec == other.spec

    def __hash__(self):
        return hash(self.syllables)

    def _check(self, other: "GroupElement"):
        if self.spec != other.spec:
            raise MixedSpecs(f"elements of {self.spec} and {other.spec} cannot be combined")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        return multiply(self, other)

    def __invert__(self) -> "GroupElement":
        return inverse(self)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return inverse(self) ** -n
        result, base = self.spec.identity(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    @cached_property
    def length(self) -> int:
        return _length(self.spec.orders, self.syllables)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def conjugate_by(self, w: "GroupElement") -> "GroupElement":
        """``w * self * w^-1``."""
        return w * self * ~w

    def serialize(self) -> str:
        if not self.syllables:
            return "e"
        names = self.spec.names
        return " ".join(f"{names[i]}:{e}" for i, e in self.syllables)

    def __str__(self):
        return self.serialize()

    def __repr__(self):
        return f"GroupElement({self.serialize()!r})"


def parse_group_spec(text: str) -> GroupSpec:
    """Parse a YAML (or JSON) group spec document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MalformedSpec(f"document: not valid YAML/JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise MalformedSpec("document: expected a mapping at top level")
    for key in ("format_version", "type", "factors"):
        if key not in doc:
            raise MalformedSpec(f"{key}: missing")
    version = doc["format_version"]
    if isinstance(version, bool) or not isinstance(version, int):
        raise MalformedSpec(f"format_version: expected an integer, got {version!r}")
    if doc["type"] != "free_product":
        raise InvalidSpec(f"type: only 'free_product' is supported, got {doc['type']!r}")
    factors = doc["factors"]
    if not isinstance(factors, list):
        raise MalformedSpec("factors: expected a list")
    parsed = []
    for k, f in enumerate(factors):
        if not isinstance(f, dict) or "order" not in f or "name" not in f:
            raise MalformedSpec(f"factors[{k}]: expected a mapping with 'order' and 'name'")
        order, name = f["order"], f["name"]
        if isinstance(order, bool) or not isinstance(order, int):
            raise MalformedSpec(f"factors[{k}].order: expected an integer, got {order!r}")
        if not isinstance(name, str):
            raise MalformedSpec(f"factors[{k}].name: expected a string, got {name!r}")
        parsed.append(CyclicFactor(order, name))
    return GroupSpec(tuple(parsed), version)


def normal_form(spec: GroupSpec, raw: Iterable[Syllable]) -> GroupElement:
    raw = list(raw)
    n = len(spec.factors)
    for i, _ in raw:
        if not 0 <= i < n:
            raise ValueError(f"factor index {i} out of range for {spec}")
    return GroupElement(spec, _reduce(spec.orders, raw))


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    a._check(b)
    return GroupElement(a.spec, _mul(a.spec.orders, a.syllables, b.syllables))


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.spec, _inv(a.spec.orders, a.syllables))


def length(a: GroupElement) -> int:
    return a.length


def element_order(a: GroupElement) -> int | float:
    """Order of ``a``: a positive int, or ``INFINITE``."""
    return _order(a.spec.orders, a.syllables)


def cyclically_reduce(a: GroupElement) -> tuple[GroupElement, GroupElement]:
    core, conj = _cyclic_reduce(a.spec.orders, a.syllables)
    return GroupElement(a.spec, core), GroupElement(a.spec, conj)


def are_conjugate(a: GroupElement, b: GroupElement) -> bool:
    a._check(b)
    orders = a.spec.orders
    return _is_rotation(_cyclic_reduce(orders, a.syllables)[0], _cyclic_reduce(orders, b.syllables)[0])


def _conjugacy_key(orders: Sequence[int], a: Word) -> Word:
    core, _ = _cyclic_reduce(orders, a)
    if len(core) <= 1:
        return core
    return min(core[k:] + core[:k] for k in range(len(core)))


def conjugacy_key(a: GroupElement) -> Word:
    """A canonical representative of the class of ``a``: the least rotation of its core."""
    return _conjugacy_key(a.spec.orders, a.syllables)


# The groups used throughout the tests and the CLI.
BUNDLED_SPECS = {
    "dinfinity": GroupSpec.from_orders([2, 2], ["a", "b"]),
    "z3_star_z": GroupSpec.from_orders([3, 0], ["x", "y"]),
    "z2_star_z3": GroupSpec.from_orders([2, 3], ["u", "v"]),
    "z2_star_z3_star_z4": GroupSpec.from_orders([2, 3, 4], ["u", "v", "w"]),
}
