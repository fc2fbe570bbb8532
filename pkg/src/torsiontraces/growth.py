"""Conjugacy-class shell counts ``n_l``, growth classification and shell schedules."""
from __future__ import annotations

import enum
import io
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import InsufficientData, ProfileMismatch, ResourceLimit, ScheduleInvalid, UnsupportedClass
from .group import (
    GroupElement,
    GroupSpec,
    Word,
    _cyclic_reduce,
    _inv,
    _length,
    _mul,
)

# Largest number of group elements any single enumeration may touch.
DEFAULT_CAP = 2_000_000

# Closed-form counts are cross-checked against enumeration up to this length.
CROSS_CHECK_RADIUS = 15


def _syllables_by_length(order: int, max_len: int) -> list[list[int]]:
    """``out[k]`` lists the exponents whose syllable has length ``k``."""
    out: list[list[int]] = [[] for _ in range(max_len + 1)]
    if order:
        for e in range(1, order):
            k = min(e, order - e)
            if k <= max_len:
                out[k].append(e)
    else:
        for k in range(1, max_len + 1):
            out[k] = [k, -k]
    return out


def _word_counts(orders: Sequence[int], R: int) -> tuple[list[int], list[list[int]]]:
    """Count normal forms by length.

    Returns ``(total, ending)`` where ``total[m]`` is the number of elements of
    length ``m`` and ``ending[m][j]`` those whose last syllable lies in factor ``j``.
    """
    per_factor = [[len(x) for x in _syllables_by_length(o, R)] for o in orders]
    total = [1] + [0] * R
    ending = [[0] * len(orders) for _ in range(R + 1)]
    for m in range(1, R + 1):
        for j, counts in enumerate(per_factor):
            ending[m][j] = sum(counts[k] * (total[m - k] - ending[m - k][j]) for k in range(1, m + 1))
        total[m] = sum(ending[m])
    return total, ending


def ball_size(spec: GroupSpec, R: int) -> int:
    return sum(_word_counts(spec.orders, R)[0])


def sphere_sizes(spec: GroupSpec, R: int) -> list[int]:
    return _word_counts(spec.orders, R)[0]


def _spheres(spec: GroupSpec, R: int, cap: int) -> list[list[Word]]:
    projected = ball_size(spec, R)
    if projected > cap:
        raise ResourceLimit(f"ball of radius {R} in {spec} has {projected} elements (cap {cap})")
    options = [_syllables_by_length(o, R) for o in spec.orders]
    spheres: list[list[Word]] = [[()]]
    for m in range(1, R + 1):
        sphere = []
        for k in range(1, m + 1):
            for w in spheres[m - k]:
                last = w[-1][0] if w else -1
                for i, opts in enumerate(options):
                    if i != last:
                        sphere.extend(w + ((i, e),) for e in opts[k])
        spheres.append(sphere)
    return spheres


def enumerate_ball(spec: GroupSpec, R: int, cap: int = DEFAULT_CAP) -> Iterator[GroupElement]:
    """Every element of length ``<= R`` once, ordered by length then serialized form."""
    if R < 0:
        raise ValueError("radius must be >= 0")
    for sphere in _spheres(spec, R, cap):
        for g in sorted((GroupElement(spec, w) for w in sphere), key=str):
            yield g


@dataclass(frozen=True)
class Provenance:
    kind: str  # "enumerated" | "closed_form" | "synthetic"
    radius: int | None = None
    description: str | None = None

    def __str__(self):
        if self.kind == "enumerated":
            return f"enumerated:{self.radius}"
        if self.kind == "synthetic":
            return f"synthetic:{self.description}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Provenance":
        kind, _, rest = text.partition(":")
        if kind == "enumerated":
            return cls(kind, radius=int(rest))
        if kind == "synthetic":
            return cls(kind, description=rest)
        if kind == "closed_form":
            return cls(kind)
        raise ValueError(f"unknown provenance {text!r}")


@dataclass(frozen=True)
class ConjugacyProfile:
    """``counts[l] = n_l`` for ``l = 0..radius``."""

    class_rep: GroupElement | None
    counts: tuple[int, ...]
    provenance: Provenance

    @property
    def radius(self) -> int:
        return len(self.counts) - 1

    def cumulative(self) -> list[int]:
        out, acc = [], 0
        for n in self.counts:
            acc += n
            out.append(acc)
        return out

    def truncate(self, radius: int) -> "ConjugacyProfile":
        if radius > self.radius:
            raise ProfileMismatch(f"profile radius {self.radius} < requested {radius}")
        prov = self.provenance
        if prov.kind == "enumerated":
            prov = Provenance("enumerated", radius=radius)
        return ConjugacyProfile(self.class_rep, self.counts[:radius + 1], prov)


def _conjugator_radius(core: Word, core_len: int, R: int) -> int:
    reach = math.ceil((R - core_len) / 2)
    # for longer cores a cyclic permutation is absorbed into the conjugator
    return reach + (core_len if len(core) >= 2 else 0)


def _conjugates_chunk(orders: tuple[int, ...], core: Word, R: int, words: list[Word]) -> set[Word]:
    found = set()
    for w in words:
        h = _mul(orders, _mul(orders, w, core), _inv(orders, w))
        if _length(orders, h) <= R:
            found.add(h)
    return found


def class_words(g: GroupElement, R: int, workers: int = 1, cap: int = DEFAULT_CAP) -> set[Word]:
    """All elements of the conjugacy class of ``g`` with length ``<= R``."""
    orders = g.spec.orders
    core, _ = _cyclic_reduce(orders, g.syllables)
    core_len = _length(orders, core)
    if R < core_len:
        return set()
    m = _conjugator_radius(core, core_len, R)
    conjugators = [w for sphere in _spheres(g.spec, m, cap) for w in sphere]
    if workers <= 1 or len(conjugators) < workers:
        return _conjugates_chunk(orders, core, R, conjugators)
    chunks = [conjugators[k::workers] for k in range(workers)]
    found: set[Word] = set()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_conjugates_chunk, [orders] * workers, [core] * workers,
                             [R] * workers, chunks):
            found |= part
    return found


def class_shell(g: GroupElement, l: int, cap: int = DEFAULT_CAP) -> list[GroupElement]:
    """The elements of the class of ``g`` with length exactly ``l``, sorted."""
    orders = g.spec.orders
    words = [w for w in class_words(g, l, cap=cap) if _length(orders, w) == l]
    return sorted((GroupElement(g.spec, w) for w in words), key=str)


def conjugacy_shell_counts(g: GroupElement, R: int, workers: int = 1,
                           cap: int = DEFAULT_CAP) -> ConjugacyProfile:
    """Exact ``n_l`` for ``l <= R`` by enumerating conjugators (not the full ball)."""
    if R < 0:
        raise ValueError("radius must be >= 0")
    orders = g.spec.orders
    counts = [0] * (R + 1)
    for h in class_words(g, R, workers=workers, cap=cap):
        counts[_length(orders, h)] += 1
    return ConjugacyProfile(g, tuple(counts), Provenance("enumerated", radius=R))


def _closed_form_counts(orders: tuple[int, ...], core: Word, L: int) -> list[int]:
    counts = [0] * (L + 1)
    if not core:
        counts[0] = 1
        return counts
    (i, e), = core
    core_len = _length(orders, core)
    if core_len > L:
        return counts
    # conjugates are u s u^-1 with u not ending in the factor of s, all reduced
    total, ending = _word_counts(orders, (L - core_len) // 2)
    for m in range(len(total)):
        counts[2 * m + core_len] = total[m] - ending[m][i]
    return counts


@lru_cache(maxsize=None)
def _cross_check(spec: GroupSpec, core: Word, radius: int) -> None:
    rep = GroupElement(spec, core)
    enumerated = conjugacy_shell_counts(rep, radius).counts
    formula = tuple(_closed_form_counts(spec.orders, core, radius))
    if enumerated != formula:
        raise ProfileMismatch(
            f"closed form disagrees with enumeration for class of {rep}: {formula} vs {enumerated}")


def profile_from_formula(spec: GroupSpec, g: GroupElement, L: int) -> ConjugacyProfile:
    """Shell counts of a torsion class from the word-count recurrence.

    The recurrence is trusted only after it matches enumeration on every
    ``l <= min(L, CROSS_CHECK_RADIUS)``; a mismatch raises ``ProfileMismatch``.
    """
    if g.spec != spec:
        raise ProfileMismatch("element does not belong to the given spec")
    orders = spec.orders
    core, _ = _cyclic_reduce(orders, g.syllables)
    if len(core) > 1 or (len(core) == 1 and orders[core[0][0]] == 0):
        raise UnsupportedClass(f"class of {g} is not a torsion class")
    _cross_check(spec, core, min(L, CROSS_CHECK_RADIUS))
    counts = _closed_form_counts(orders, core, L)
    return ConjugacyProfile(g, tuple(counts), Provenance("closed_form"))


_SYNTHETIC = (
    (re.compile(r"^(\d+)\^l$"), lambda m, l: int(m.group(1)) ** l),
    (re.compile(r"^l\^(\d+)$"), lambda m, l: l ** int(m.group(1))),
    (re.compile(r"^(\d+)$"), lambda m, l: int(m.group(1))),
)


def synthetic_profile(descriptor: str, max_length: int) -> ConjugacyProfile:
    """Profile from ``"<base>^l"``, ``"l^<k>"`` or a constant ``"<n>"``."""
    text = descriptor.replace(" ", "")
    for pattern, fn in _SYNTHETIC:
        m = pattern.match(text)
        if m:
            counts = tuple(fn(m, l) for l in range(max_length + 1))
            return ConjugacyProfile(None, counts, Provenance("synthetic", description=text))
    raise ValueError(f"unrecognized synthetic profile {descriptor!r} (use base^l, l^k or a constant)")


class GrowthKind(enum.Enum):
    POLYNOMIAL_BOUNDED = "polynomial_bounded"
    SUPERPOLYNOMIAL_EVIDENCE = "superpolynomial_evidence"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GrowthVerdict:
    """Heuristic label from finitely many shells; never a proof."""

    kind: GrowthKind
    fitted_degree: float | None
    fit_quality: float
    data_radius: int
    growth_rate: float | None = None
    residuals: tuple[float, float] = (math.nan, math.nan)  # (polynomial, exponential)


MIN_NONZERO_SHELLS = 8
INCONCLUSIVE_MARGIN = 0.10


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - resid / ss_tot if ss_tot > 0 else 1.0
    return float(slope), resid, min(1.0, max(0.0, r2))


def classify_growth(profile: ConjugacyProfile) -> GrowthVerdict:
    """Compare a power law and an exponential fit to the cumulative counts."""
    nonzero = sum(1 for n in profile.counts if n)
    if nonzero < MIN_NONZERO_SHELLS:
        raise InsufficientData(f"need {MIN_NONZERO_SHELLS} nonzero shells, profile has {nonzero}")
    cum = profile.cumulative()
    ls = np.array([l for l in range(1, len(cum)) if cum[l] > 0], dtype=float)
    logc = np.array([math.log(cum[int(l)]) for l in ls])
    degree, res_poly, r2_poly = _linear_fit(np.log1p(ls), logc)
    rate, res_exp, r2_exp = _linear_fit(ls, logc)
    residuals = (res_poly, res_exp)
    if abs(res_poly - res_exp) <= INCONCLUSIVE_MARGIN * max(res_poly, res_exp):
        return GrowthVerdict(GrowthKind.INCONCLUSIVE, None, max(r2_poly, r2_exp),
                             profile.radius, None, residuals)
    if res_poly < res_exp:
        return GrowthVerdict(GrowthKind.POLYNOMIAL_BOUNDED, degree, r2_poly, profile.radius,
                             None, residuals)
    return GrowthVerdict(GrowthKind.SUPERPOLYNOMIAL_EVIDENCE, None, r2_exp, profile.radius,
                         math.exp(rate), residuals)


def exceeds_threshold(n: int, l: int, exponent: float) -> bool:
    """Decide ``n > (1 + l) ** exponent`` exactly where the exponent is a small-denominator rational."""
    if n <= 0:
        return False
    q = Fraction(exponent)
    if q.denominator == 1:
        return n > (1 + l) ** q.numerator if q >= 0 else True
    if q.denominator <= 64 and q > 0 and q.numerator <= 4096:
        return n ** q.denominator > (1 + l) ** q.numerator
    return math.log(n) > exponent * math.log1p(l)


@dataclass(frozen=True)
class ShellSchedule:
    """Increasing lengths with ``n_{l_i} > (1 + l_i)^(c * i)``."""

    indices: tuple[int, ...]
    exponent_base: float
    provenance: Provenance | None = field(default=None, compare=False)

    def __len__(self):
        return len(self.indices)

    def verify(self, profile: ConjugacyProfile) -> None:
        prev = -1
        for i, l in enumerate(self.indices, start=1):
            if l <= prev:
                raise ScheduleInvalid(f"indices not increasing at term {i}")
            if l > profile.radius:
                raise ScheduleInvalid(f"l_{i} = {l} exceeds profile radius {profile.radius}")
            if not exceeds_threshold(profile.counts[l], l, self.exponent_base * i):
                raise ScheduleInvalid(f"n_{l} = {profile.counts[l]} <= (1+{l})^({self.exponent_base}*{i})")
            prev = l


def find_shell_sequence(profile: ConjugacyProfile, c: float, max_terms: int) -> ShellSchedule:
    """Greedy smallest-first choice of the shell schedule."""
    if not c > 0:
        raise ValueError(f"exponent base must be > 0, got {c}")
    indices: list[int] = []
    l = 0
    while len(indices) < max_terms and l <= profile.radius:
        if exceeds_threshold(profile.counts[l], l, c * (len(indices) + 1)):
            indices.append(l)
        l += 1
    schedule = ShellSchedule(tuple(indices), c, profile.provenance)
    schedule.verify(profile)
    return schedule


# -- profile files -----------------------------------------------------------

def profile_to_csv(profile: ConjugacyProfile) -> str:
    rep = profile.class_rep
    spec_hash = rep.spec.spec_hash if rep is not None else "none"
    rep_text = rep.serialize() if rep is not None else "none"
    buf = io.StringIO()
    buf.write(f"# provenance={profile.provenance}, spec_hash={spec_hash}, class_rep={rep_text}\n")
    buf.write("l,count\n")
    for l, n in enumerate(profile.counts):
        buf.write(f"{l},{n}\n")
    return buf.getvalue()


def profile_from_csv(text: str, spec: GroupSpec | None = None) -> ConjugacyProfile:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ProfileMismatch("profile file lacks its provenance comment")
    meta = dict(part.split("=", 1) for part in lines[0][1:].strip().split(", ", 2))
    if lines[1].strip() != "l,count":
        raise ProfileMismatch("profile file lacks the 'l,count' header")
    counts = []
    for expected, row in enumerate(lines[2:]):
        l, n = (int(x) for x in row.split(","))
        if l != expected:
            raise ProfileMismatch(f"profile rows out of order at l={l}")
        counts.append(n)
    rep = None
    if meta["class_rep"] != "none":
        if spec is None:
            raise ProfileMismatch("profile names a class representative; a group spec is required")
        if meta["spec_hash"] != spec.spec_hash:
            raise ProfileMismatch("profile was computed for a different group")
        rep = spec.parse_element(meta["class_rep"])
    return ConjugacyProfile(rep, tuple(counts), Provenance.parse(meta["provenance"]))


def write_profile(path: Path, profile: ConjugacyProfile) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(profile_to_csv(profile))
    tmp.replace(path)


def read_profile(path: Path, spec: GroupSpec | None = None) -> ConjugacyProfile:
    return profile_from_csv(Path(path).read_text(), spec)
