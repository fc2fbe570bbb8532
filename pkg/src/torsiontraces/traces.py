"""Class-function traces, the trace matrix of torsion idempotents, and the
partial-sum evidence that no bounded trace survives on fast-growing classes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .algebra import AlgebraElement, Coefficient, Mode, build_idempotent, delta_trace
from .errors import (
    DuplicateOrders,
    InfiniteOrder,
    MixedSpecs,
    ProfileMismatch,
    ResourceLimit,
    ScheduleInvalid,
)
from .group import INFINITE, GroupElement, GroupSpec, _conjugacy_key, _length, element_order
from .growth import (
    DEFAULT_CAP,
    ConjugacyProfile,
    GrowthKind,
    GrowthVerdict,
    Provenance,
    ShellSchedule,
    class_words,
    classify_growth,
    find_shell_sequence,
    profile_from_formula,
)

# the constant sqrt(sum 1/l^2) from the Cauchy-Schwarz step
BASEL_CONSTANT = math.pi / math.sqrt(6)

NORM_EXPONENT = Fraction(-5, 8)


def conjugacy_trace(class_rep: GroupElement, a: AlgebraElement) -> Coefficient:
    """Sum of the coefficients of ``a`` on the conjugacy class of ``class_rep``."""
    if class_rep.spec != a.spec:
        raise MixedSpecs("class representative and algebra element live in different groups")
    orders = a.spec.orders
    key = _conjugacy_key(orders, class_rep.syllables)
    picked = [c for w, c in a.words() if _conjugacy_key(orders, w) == key]
    if a.mode is Mode.EXACT:
        return sum(picked, Fraction(0))
    return math.fsum(picked)


# -- trace matrix --------------------------------------------------------------

class MatrixVerdict(enum.Enum):
    SEPARABLE = "separable"
    NOT_SHOWN = "not_shown"


@dataclass(frozen=True)
class TraceMatrix:
    """``entries[i][j] = tau_i(p_j)``; row and column 0 belong to ``delta_trace`` and ``1``."""

    witnesses: tuple[tuple[GroupElement, int], ...]
    entries: tuple[tuple[Fraction, ...], ...]
    determinant: Fraction
    verdict: MatrixVerdict

    @property
    def size(self) -> int:
        return len(self.entries)


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination over the integers."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rational_determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Clear each row's denominators, then run ``bareiss_determinant``."""
    scaled, scale = [], 1
    for row in matrix:
        lcm = math.lcm(*(Fraction(x).denominator for x in row)) if row else 1
        scaled.append([int(Fraction(x) * lcm) for x in row])
        scale *= lcm
    return Fraction(bareiss_determinant(scaled), scale)


def _validate_witnesses(witnesses: Sequence[GroupElement]) -> list[tuple[GroupElement, int]]:
    pairs = []
    for g in witnesses:
        d = element_order(g)
        if d == INFINITE:
            raise InfiniteOrder(f"witness {g} has infinite order")
        if d < 2:
            raise ValueError(f"witness {g} is the identity; torsion witnesses need order >= 2")
        pairs.append((g, d))
    if len({d for _, d in pairs}) != len(pairs):
        orders = sorted(d for _, d in pairs)
        raise DuplicateOrders(f"witness orders {orders} are not pairwise distinct; "
                              "trace separation assumes distinct orders")
    specs = {g.spec for g, _ in pairs}
    if len(specs) > 1:
        raise MixedSpecs("witnesses come from different groups")
    return sorted(pairs, key=lambda p: p[1])


def trace_matrix(witnesses: Sequence[GroupElement], spec: GroupSpec | None = None) -> TraceMatrix:
    pairs = _validate_witnesses(witnesses)
    if spec is None:
        if not pairs:
            raise ValueError("pass spec= when there are no witnesses")
        spec = pairs[0][0].spec
    columns = [AlgebraElement.one(spec)] + [build_idempotent(g) for g, _ in pairs]
    rows = [[delta_trace(p) for p in columns]]
    for g, _ in pairs:
        rows.append([conjugacy_trace(g, p) for p in columns])
    entries = tuple(tuple(r) for r in rows)
    det = rational_determinant(entries)
    verdict = MatrixVerdict.SEPARABLE if det != 0 else MatrixVerdict.NOT_SHOWN
    return TraceMatrix(tuple(pairs), entries, det, verdict)


# -- the power-mean / Cauchy-Schwarz chain -------------------------------------------

class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    # intermediate links: sum_l |sum_{C_l} c| and sum_l sqrt(n_l) sqrt(sum_{C_l} c^2)
    shell_sum: float
    power_mean: float


def check_rd_poly_inequality(a: AlgebraElement, class_rep: GroupElement,
                             profile: ConjugacyProfile) -> InequalityCheck:
    """Evaluate ``|sum_C c| <= (pi/sqrt 6) sqrt(sum_l n_l (sum_{C_l} c^2) l^2)``."""
    if class_rep.is_identity:
        raise ValueError("the identity class has only the length-0 shell")
    orders = a.spec.orders
    key = _conjugacy_key(orders, class_rep.syllables)
    if profile.class_rep is not None and _conjugacy_key(orders, profile.class_rep.syllables) != key:
        raise ProfileMismatch("profile belongs to a different conjugacy class")
    sums: dict[int, Fraction] = {}
    squares: dict[int, Fraction] = {}
    sizes: dict[int, int] = {}
    for w, c in a.words():
        if _conjugacy_key(orders, w) != key:
            raise ProfileMismatch(f"{GroupElement(a.spec, w)} is outside the class of {class_rep}")
        l = _length(orders, w)
        if l > profile.radius:
            raise ProfileMismatch(f"support reaches length {l}, profile radius is {profile.radius}")
        sums[l] = sums.get(l, 0) + c
        squares[l] = squares.get(l, 0) + c * c
        sizes[l] = sizes.get(l, 0) + 1
    for l, k in sizes.items():
        if k > profile.counts[l]:
            raise ProfileMismatch(f"{k} supported elements at length {l} but n_{l} = {profile.counts[l]}")
    lhs = abs(float(sum(sums.values(), Fraction(0))))
    shell_sum = math.fsum(abs(float(v)) for v in sums.values())
    power_mean = math.fsum(math.sqrt(profile.counts[l]) * math.sqrt(float(q)) for l, q in squares.items())
    rhs = BASEL_CONSTANT * math.sqrt(math.fsum(profile.counts[l] * float(q) * l * l
                                               for l, q in squares.items()))
    return InequalityCheck(lhs, rhs, lhs <= rhs * (1 + 1e-9), shell_sum, power_mean)


# -- divergence evidence -------------------------------------------------------------

TRUNCATION_NOTE = "truncation by schedule position (first N shells), not by raw length"


@dataclass(frozen=True)
class DivergenceReport:
    """Partial sums of the squared Sobolev norm and of a class trace on the
    element with coefficient ``n_l^(-5/8)`` on every class element of each
    scheduled shell."""

    schedule: ShellSchedule
    s: float
    shell_counts: tuple[int, ...]
    norm_terms: tuple[float, ...]
    norm_partials: tuple[float, ...]
    norm_term_bounds: tuple[float, ...]
    norm_tail_bound: float
    trace_terms: tuple[float, ...]
    trace_partials: tuple[float, ...]
    trace_threshold: float
    trace_exceeds_at: int | None  # 1-based term where the trace partial sum first passes the threshold
    provenance: Provenance | None
    note: str = TRUNCATION_NOTE

    @property
    def trace_exceeds(self) -> bool:
        return self.trace_exceeds_at is not None

    @property
    def trace_strictly_increasing(self) -> bool:
        p = self.trace_partials
        return all(b > a for a, b in zip(p, p[1:])) and (not p or p[0] > 0)


def _power(n: int, exponent: float, base: int, base_exponent: float) -> float:
    """``n^exponent * base^base_exponent`` through logarithms (``n`` may be huge)."""
    try:
        return math.exp(exponent * math.log(n) + base_exponent * math.log(base))
    except OverflowError:
        return math.inf


def counterexample_partial_sums(profile: ConjugacyProfile, schedule: ShellSchedule, s: float,
                                terms: int, trace_threshold: float = 1e6) -> DivergenceReport:
    """Partial sums computed from the shell counts alone.

    Shell ``l_i`` contributes ``n^(-1/4) (1+l_i)^(2s)`` to the squared norm
    (``n`` elements with squared coefficient ``n^(-5/4)``) and ``n^(3/8)`` to the
    trace. The tail bound uses ``n^(-1/4) < (1+l_i)^(-c i / 4)`` and
    ``l_i >= l_T + (i - T)``; it is infinite until every remaining exponent
    ``2s - c i / 4`` is negative.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if s < 0:
        raise ValueError("s must be >= 0")
    schedule.verify(profile)
    c = schedule.exponent_base
    used = schedule.indices[:terms]
    counts = tuple(profile.counts[l] for l in used)
    norm_terms, bounds, trace_terms = [], [], []
    for i, (l, n) in enumerate(zip(used, counts), start=1):
        norm_terms.append(_power(n, -0.25, 1 + l, 2 * s))
        bounds.append(float(1 + l) ** (2 * s - c * i / 4))
        trace_terms.append(_power(n, 0.375, 1, 0.0))
    norm_partials = tuple(math.fsum(norm_terms[:k]) for k in range(1, len(norm_terms) + 1))
    trace_partials = tuple(math.fsum(trace_terms[:k]) for k in range(1, len(trace_terms) + 1))
    tail = math.inf
    T = len(used)
    if T and 2 * s - c * (T + 1) / 4 < 0:
        b = 2 + used[-1]
        tail = b ** (2 * s - c * (T + 1) / 4) / (1 - b ** (-c / 4))
    exceeds = next((k for k, v in enumerate(trace_partials, start=1) if v > trace_threshold), None)
    return DivergenceReport(
        schedule=schedule, s=s, shell_counts=counts,
        norm_terms=tuple(norm_terms), norm_partials=norm_partials,
        norm_term_bounds=tuple(bounds), norm_tail_bound=tail,
        trace_terms=tuple(trace_terms), trace_partials=trace_partials,
        trace_threshold=trace_threshold, trace_exceeds_at=exceeds,
        provenance=profile.provenance,
    )


def materialize_counterexample(class_rep: GroupElement, schedule: ShellSchedule, N: int,
                               cap: int = 100_000, profile: ConjugacyProfile | None = None
                               ) -> AlgebraElement:
    """The truncation over the first ``N`` scheduled shells, as a float element."""
    spec = class_rep.spec
    if N <= 0:
        return AlgebraElement.zero(spec, Mode.FLOAT)
    if N > len(schedule):
        raise ScheduleInvalid(f"schedule has {len(schedule)} terms, {N} requested")
    shells = schedule.indices[:N]
    orders = spec.orders
    found = class_words(class_rep, shells[-1], cap=max(cap, DEFAULT_CAP))
    by_length: dict[int, list] = {l: [] for l in shells}
    for w in found:
        l = _length(orders, w)
        if l in by_length:
            by_length[l].append(w)
    terms = {}
    for l in shells:
        shell = by_length[l]
        n = len(shell)
        if n > cap:
            raise ResourceLimit(f"shell l={l} holds {n} elements (cap {cap})")
        if profile is not None and profile.counts[l] != n:
            raise ProfileMismatch(f"profile says n_{l} = {profile.counts[l]}, enumeration found {n}")
        coeff = float(n) ** float(NORM_EXPONENT)
        for w in shell:
            terms[w] = coeff
    return AlgebraElement(spec, terms, Mode.FLOAT)


# -- composed verdict ----------------------------------------------------------------

class OverallVerdict(enum.Enum):
    SEPARABLE_BY_TRACES = "separable_by_traces"
    TRACE_OBSTRUCTION_EVIDENCE = "trace_obstruction_evidence"
    MIXED_OR_INCONCLUSIVE = "mixed_or_inconclusive"


@dataclass(frozen=True)
class PowerEvidence:
    power: int
    element: GroupElement
    growth: GrowthVerdict
    profile_provenance: Provenance
    divergence: DivergenceReport | None


@dataclass(frozen=True)
class WitnessEvidence:
    witness: GroupElement
    order: int
    powers: tuple[PowerEvidence, ...]

    @property
    def all_polynomial(self) -> bool:
        return all(p.growth.kind is GrowthKind.POLYNOMIAL_BOUNDED for p in self.powers)

    @property
    def obstructed(self) -> bool:
        # every power g^t, 0 < t < d, must carry its own divergence evidence
        return all(
            p.growth.kind is GrowthKind.SUPERPOLYNOMIAL_EVIDENCE
            and p.divergence is not None
            and len(p.divergence.schedule) > 0
            and p.divergence.trace_strictly_increasing
            for p in self.powers
        )


@dataclass(frozen=True)
class SeparabilityReport:
    spec: GroupSpec
    radius: int
    s: float
    exponent_base: float
    witnesses: tuple[WitnessEvidence, ...]
    matrix: TraceMatrix | None
    verdict: OverallVerdict


def separability_report(spec: GroupSpec, witnesses: Sequence[GroupElement], radius: int,
                        s: float, c: float, terms: int = 8,
                        trace_threshold: float = 1e6) -> SeparabilityReport:
    """Classify every power class of every witness and compose the verdict."""
    pairs = _validate_witnesses(witnesses)
    evidence = []
    for g, d in pairs:
        powers = []
        for t in range(1, d):
            h = g ** t
            profile = profile_from_formula(spec, h, radius)
            verdict = classify_growth(profile)
            divergence = None
            if verdict.kind is GrowthKind.SUPERPOLYNOMIAL_EVIDENCE:
                schedule = find_shell_sequence(profile, c, terms)
                if len(schedule):
                    divergence = counterexample_partial_sums(profile, schedule, s, terms, trace_threshold)
            powers.append(PowerEvidence(t, h, verdict, profile.provenance, divergence))
        evidence.append(WitnessEvidence(g, d, tuple(powers)))

    matrix = None
    if all(w.all_polynomial for w in evidence):
        matrix = trace_matrix([g for g, _ in pairs], spec=spec)
        overall = (OverallVerdict.SEPARABLE_BY_TRACES if matrix.verdict is MatrixVerdict.SEPARABLE
                   else OverallVerdict.MIXED_OR_INCONCLUSIVE)
    elif all(w.obstructed for w in evidence):
        overall = OverallVerdict.TRACE_OBSTRUCTION_EVIDENCE
    else:
        overall = OverallVerdict.MIXED_OR_INCONCLUSIVE
    return SeparabilityReport(spec, radius, s, c, tuple(evidence), matrix, overall)
