"""The invariant suite behind ``torsiontraces verify``.

Every check draws from its own ``random.Random`` seeded by ``(seed, name)``,
so the transcript depends only on the seed and the scale, never on worker
count or the order the checks run in.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import oracles
from .algebra import (
    AlgebraElement,
    Mode,
    augmentation_trace,
    build_idempotent,
    convolve,
    delta_trace,
    sobolev_norm,
)
from .group import BUNDLED_SPECS, INFINITE, GroupElement, GroupSpec, are_conjugate, element_order, normal_form
from .growth import (
    ConjugacyProfile,
    _conjugates_chunk,
    _spheres,
    class_words,
    conjugacy_shell_counts,
    find_shell_sequence,
    profile_from_formula,
    synthetic_profile,
)
from .group import _cyclic_reduce, _length
from .traces import (
    check_rd_poly_inequality,
    counterexample_partial_sums,
    materialize_counterexample,
    trace_matrix,
)

TEST_GROUPS = ("dinfinity", "z3_star_z", "z2_star_z3")


@dataclass(frozen=True)
class Scale:
    random_words: int
    length_radius: int
    conj_radius: int
    conj_conjugators: int
    order_radius: int
    algebra_samples: int
    profile_radius: int
    closed_form_radius: int
    inequality_samples: int
    matrix_families: int


SCALES = {
    "quick": Scale(100, 3, 3, 5, 3, 30, 9, 9, 50, 5),
    "default": Scale(300, 4, 4, 6, 4, 100, 11, 15, 200, 20),
    "full": Scale(1000, 6, 5, 8, 4, 300, 13, 15, 500, 50),
}


@dataclass(frozen=True)
class Outcome:
    name: str
    ok: bool
    detail: str


class Context:
    def __init__(self, scale: Scale, workers: int, inject_fault: str | None):
        self.scale = scale
        self.workers = workers
        self.inject_fault = inject_fault
        self._balls: dict = {}

    def ball(self, spec: GroupSpec, R: int) -> list[GroupElement]:
        key = (spec, R)
        if key not in self._balls:
            self._balls[key] = sorted(oracles.bfs_ball(spec, R), key=lambda g: (g.length, str(g)))
        return self._balls[key]


def _groups():
    return [(name, BUNDLED_SPECS[name]) for name in TEST_GROUPS]


def random_raw_word(rng: random.Random, spec: GroupSpec, max_syllables: int = 12):
    out = []
    for _ in range(rng.randint(0, max_syllables)):
        i = rng.randrange(len(spec.orders))
        out.append((i, rng.randint(-5, 5)))
    return out


def _equivalent_variant(rng: random.Random, spec: GroupSpec, raw):
    """Same element, different spelling: split syllables and insert trivial words."""
    out = []
    for i, e in raw:
        if rng.random() < 0.3:
            k = rng.randint(-3, 3)
            out += [(i, k), (i, e - k)]
        else:
            out.append((i, e))
        if rng.random() < 0.3:
            j = rng.randrange(len(spec.orders))
            d = spec.orders[j]
            if d and rng.random() < 0.5:
                out.append((j, d * rng.randint(1, 2)))
            else:
                k = rng.randint(1, 4)
                out += [(j, k), (j, -k)]
    return out


def random_element(rng: random.Random, spec: GroupSpec, max_syllables: int = 6) -> GroupElement:
    return normal_form(spec, random_raw_word(rng, spec, max_syllables))


def random_algebra(rng: random.Random, spec: GroupSpec, support: int = 8) -> AlgebraElement:
    pairs = [(random_element(rng, spec, 4), Fraction(rng.randint(-9, 9), rng.randint(1, 6)))
             for _ in range(rng.randint(1, support))]
    return AlgebraElement.from_terms(pairs, spec=spec)


# -- checks -----------------------------------------------------------------------

def check_normal_form(rng, ctx):
    n = 0
    for _, spec in _groups():
        for _ in range(ctx.scale.random_words):
            raw = random_raw_word(rng, spec)
            nf = normal_form(spec, raw)
            if nf.syllables != oracles.free_reduce(spec, raw):
                return False, f"{spec}: {raw} -> {nf} disagrees with free reduction"
            if normal_form(spec, _equivalent_variant(rng, spec, raw)) != nf:
                return False, f"{spec}: respelling of {raw} changed the normal form"
            if normal_form(spec, nf.syllables) != nf:
                return False, f"{spec}: normal form of {nf} is not idempotent"
            n += 1
    return True, f"{n} random words"


def check_length_axioms(rng, ctx):
    pairs = 0
    for _, spec in _groups():
        dist = oracles.bfs_ball(spec, ctx.scale.length_radius)
        ball = sorted(dist, key=str)
        for g in ball:
            if g.length != dist[g]:
                return False, f"{spec}: l({g}) = {g.length} but BFS distance is {dist[g]}"
            if (~g).length != g.length:
                return False, f"{spec}: l({g}^-1) != l({g})"
        if spec.identity().length != 0:
            return False, "l(e) != 0"
        for a, b in itertools.product(ball, ball):
            if (a * b).length > a.length + b.length:
                return False, f"{spec}: subadditivity fails for {a}, {b}"
            pairs += 1
    return True, f"{pairs} pairs"


def check_conjugacy(rng, ctx):
    checked = 0
    for _, spec in _groups():
        ball = ctx.ball(spec, ctx.scale.conj_radius)
        members = set(ball)
        conjugators = list(oracles.bfs_ball(spec, ctx.scale.conj_conjugators))
        orbit = {a: oracles.conjugacy_orbit(a, conjugators) & members for a in ball}
        for a in ball:
            for b in ball:
                if are_conjugate(a, b) != (b in orbit[a]):
                    return False, f"{spec}: are_conjugate({a}, {b}) disagrees with brute force"
                if are_conjugate(a, b) != are_conjugate(b, a):
                    return False, f"{spec}: are_conjugate not symmetric on {a}, {b}"
                checked += 1
    return True, f"{checked} pairs"


def check_order_invariance(rng, ctx):
    n = 0
    for _, spec in _groups():
        for a in ctx.ball(spec, ctx.scale.order_radius):
            d = element_order(a)
            w = random_element(rng, spec, 4)
            if element_order(a.conjugate_by(w)) != d:
                return False, f"{spec}: order of {a} changes under conjugation by {w}"
            if d != INFINITE:
                if not (a ** d).is_identity or any((a ** k).is_identity for k in range(1, d)):
                    return False, f"{spec}: {a} does not have order {d}"
            n += 1
    return True, f"{n} elements"


def check_idempotency(rng, ctx):
    n = 0
    for _, spec in _groups():
        for g in ctx.ball(spec, 4):
            if element_order(g) == INFINITE:
                continue
            p = build_idempotent(g)
            if ctx.inject_fault == "idempotency" and n == 0:
                word, c = next(p.words())
                p = AlgebraElement(spec, {**dict(p.words()), word: c + 1}, Mode.EXACT)
            if convolve(p, p) != p:
                return False, f"{spec}: p*p != p for p built from {g}"
            n += 1
    return True, f"{n} torsion elements"


def check_trace_property(rng, ctx):
    for _, spec in _groups():
        for _ in range(ctx.scale.algebra_samples):
            a, b = random_algebra(rng, spec), random_algebra(rng, spec)
            if delta_trace(convolve(a, b)) != delta_trace(convolve(b, a)):
                return False, f"{spec}: delta_trace(ab) != delta_trace(ba)"
    return True, f"{ctx.scale.algebra_samples} pairs per group"


def check_sobolev_monotone(rng, ctx):
    for _, spec in _groups():
        for _ in range(ctx.scale.algebra_samples):
            a = random_algebra(rng, spec)
            s = rng.uniform(0, 3)
            t = s + rng.uniform(0.01, 2)
            lo, hi = sobolev_norm(a, s), sobolev_norm(a, t)
            if lo > hi:
                return False, f"{spec}: norm decreases from s={s} to t={t}"
            if any(g.length >= 1 for g in a.support) and not lo < hi:
                return False, f"{spec}: norm not strictly increasing on non-identity support"
    return True, f"{ctx.scale.algebra_samples} elements per group"


def check_augmentation(rng, ctx):
    for _, spec in _groups():
        for _ in range(ctx.scale.algebra_samples):
            a, b = random_algebra(rng, spec), random_algebra(rng, spec)
            if augmentation_trace(convolve(a, b)) != augmentation_trace(a) * augmentation_trace(b):
                return False, f"{spec}: augmentation not multiplicative"
            if augmentation_trace(a + b) != augmentation_trace(a) + augmentation_trace(b):
                return False, f"{spec}: augmentation not additive"
    return True, f"{ctx.scale.algebra_samples} pairs per group"


def _class_reps(spec: GroupSpec):
    if spec.orders == (3, 0):
        return [spec.parse_element("x"), spec.parse_element("x:2"), spec.parse_element("x y")]
    return [spec.gen(n) for n in spec.names] + [spec.gen(spec.names[0]) * spec.gen(spec.names[1])]


def check_profile_determinism(rng, ctx):
    R = ctx.scale.profile_radius
    for _, spec in _groups():
        for g in _class_reps(spec):
            serial = conjugacy_shell_counts(g, R, workers=1)
            parallel = conjugacy_shell_counts(g, R, workers=max(ctx.workers, 2))
            # a reshuffled traversal of the conjugator ball
            orders = spec.orders
            core, _ = _cyclic_reduce(orders, g.syllables)
            m = max(0, math.ceil((R - _length(orders, core)) / 2)) + (_length(orders, core) if len(core) > 1 else 0)
            conj = [w for sphere in _spheres(spec, m, 10**7) for w in sphere]
            rng.shuffle(conj)
            counts = [0] * (R + 1)
            for h in _conjugates_chunk(orders, core, R, conj):
                counts[_length(orders, h)] += 1
            if not serial.counts == parallel.counts == tuple(counts):
                return False, f"{spec}: profile of {g} depends on schedule"
    return True, f"radius {R}"


def check_closed_form(rng, ctx):
    R = ctx.scale.closed_form_radius
    for _, spec in _groups():
        for name in spec.names:
            g = spec.gen(name)
            if element_order(g) == INFINITE:
                continue
            for t in range(1, element_order(g)):
                h = g ** t
                if profile_from_formula(spec, h, R).counts != conjugacy_shell_counts(h, R, workers=ctx.workers).counts:
                    return False, f"{spec}: closed form != enumeration for class of {h}"
    return True, f"l <= {R}"


def check_class_invariance(rng, ctx):
    R = ctx.scale.profile_radius
    for _, spec in _groups():
        for g in _class_reps(spec):
            w = random_element(rng, spec, 3)
            while w.length > 4:
                w = random_element(rng, spec, 3)
            if conjugacy_shell_counts(g, R).counts != conjugacy_shell_counts(g.conjugate_by(w), R).counts:
                return False, f"{spec}: profiles of {g} and its conjugate by {w} differ"
    return True, f"radius {R}"


def check_schedules(rng, ctx):
    cases = [synthetic_profile("2^l", 200), synthetic_profile("3^l", 120),
             profile_from_formula(BUNDLED_SPECS["z3_star_z"], BUNDLED_SPECS["z3_star_z"].gen("x"), 400)]
    n = 0
    for profile in cases:
        for c in (0.1, 0.5, 1.0, 2.0, 4.0):
            schedule = find_shell_sequence(profile, c, 10)
            for i, l in enumerate(schedule.indices, start=1):
                if not math.log(profile.counts[l]) > c * i * math.log1p(l) - 1e-12:
                    return False, f"schedule index l_{i}={l} violates its inequality (c={c})"
                n += 1
    return True, f"{n} indices"


def _torsion_by_order(spec: GroupSpec, R: int, ctx) -> dict[int, list[GroupElement]]:
    out: dict[int, list[GroupElement]] = {}
    for g in ctx.ball(spec, R):
        d = element_order(g)
        if d != INFINITE and d >= 2:
            out.setdefault(d, []).append(g)
    return out


def _witness_families(rng, ctx):
    for name in TEST_GROUPS + ("z2_star_z3_star_z4",):
        spec = BUNDLED_SPECS[name]
        by_order = _torsion_by_order(spec, 3, ctx)
        for _ in range(ctx.scale.matrix_families):
            orders = [d for d in sorted(by_order) if rng.random() < 0.7] or [min(by_order)]
            yield spec, [rng.choice(by_order[d]) for d in orders]


def check_trace_matrix(rng, ctx):
    n = 0
    for spec, witnesses in _witness_families(rng, ctx):
        m = trace_matrix(witnesses)
        A = m.entries
        k = len(A)
        for j in range(1, k):
            d_j = m.witnesses[j - 1][1]
            if A[0][j] != Fraction(1, d_j):
                return False, f"{spec}: delta row entry A[0][{j}] = {A[0][j]}"
            if A[j][j] < Fraction(1, d_j):
                return False, f"{spec}: diagonal A[{j}][{j}] below 1/d"
            for i in range(j + 1, k):
                if A[i][j] != 0:
                    return False, f"{spec}: A[{i}][{j}] = {A[i][j]} below the diagonal"
        if A[0][0] != 1:
            return False, "A[0][0] != 1"
        diag = math.prod(A[i][i] for i in range(k))
        if m.determinant != diag or m.determinant != oracles.cofactor_determinant(A):
            return False, f"{spec}: determinant {m.determinant} != product {diag} / cofactor"
        n += 1
    return True, f"{n} witness families"


def _class_sample(rng, spec, rep, R, size):
    words = sorted(class_words(rep, R), key=lambda w: (len(w), w))
    words = [w for w in words if w]
    chosen = rng.sample(words, min(len(words), rng.randint(1, size)))
    terms = {w: Fraction(rng.randint(-20, 20), rng.randint(1, 10)) for w in chosen}
    return AlgebraElement(spec, terms, Mode.EXACT)


def inequality_cases(spec: GroupSpec):
    if spec.orders == (2, 2):
        return spec.gen("a"), 41
    if spec.orders == (3, 0):
        return spec.gen("x"), 9
    return spec.gen(spec.names[-1]), 12


def check_inequality(rng, ctx):
    n = 0
    for _, spec in _groups():
        rep, R = inequality_cases(spec)
        profile = conjugacy_shell_counts(rep, R)
        for _ in range(ctx.scale.inequality_samples):
            a = _class_sample(rng, spec, rep, R, 12)
            res = check_rd_poly_inequality(a, rep, profile)
            if not res.holds:
                return False, f"{spec}: lhs {res.lhs} > rhs {res.rhs}"
            n += 1
    return True, f"{n} random elements"


def check_path_equivalence(rng, ctx):
    spec = BUNDLED_SPECS["z3_star_z"]
    x = spec.gen("x")
    profile = conjugacy_shell_counts(x, 11)
    schedule = find_shell_sequence(profile, 0.5, 3)
    report = counterexample_partial_sums(profile, schedule, 1.0, len(schedule))
    for N in range(1, len(schedule) + 1):
        elem = materialize_counterexample(x, schedule, N, profile=profile)
        direct = sobolev_norm(elem, 1.0) ** 2
        if not math.isclose(direct, report.norm_partials[N - 1], rel_tol=1e-9):
            return False, f"N={N}: materialized {direct} vs profile {report.norm_partials[N - 1]}"
    return True, f"schedule {list(schedule.indices)}"


def check_trace_divergence(rng, ctx):
    for desc in ("2^l", "3^l"):
        profile = synthetic_profile(desc, 200)
        schedule = find_shell_sequence(profile, 4, 8)
        r = counterexample_partial_sums(profile, schedule, 3.0, len(schedule))
        if not r.trace_strictly_increasing:
            return False, f"{desc}: trace partials not strictly increasing"
        increments = r.trace_terms
        if min(increments) <= 1:
            return False, f"{desc}: trace increment <= 1"
        if any(t >= b for t, b in zip(r.norm_terms, r.norm_term_bounds)):
            return False, f"{desc}: norm term exceeds its bound"
    return True, "synthetic 2^l and 3^l"


CHECKS: list[tuple[str, Callable]] = [
    ("normal-form-uniqueness", check_normal_form),
    ("length-axioms", check_length_axioms),
    ("conjugacy-brute-force", check_conjugacy),
    ("order-conjugation-invariance", check_order_invariance),
    ("exact-idempotency", check_idempotency),
    ("delta-trace-property", check_trace_property),
    ("sobolev-monotonicity", check_sobolev_monotone),
    ("augmentation-homomorphism", check_augmentation),
    ("profile-determinism", check_profile_determinism),
    ("closed-form-agreement", check_closed_form),
    ("profile-class-invariance", check_class_invariance),
    ("schedule-reverification", check_schedules),
    ("trace-matrix-structure", check_trace_matrix),
    ("rd-poly-inequality", check_inequality),
    ("norm-path-equivalence", check_path_equivalence),
    ("trace-divergence", check_trace_divergence),
]


def run_suite(seed: int, scale: str = "default", workers: int = 1,
              inject_fault: str | None = None) -> list[Outcome]:
    ctx = Context(SCALES[scale], workers, inject_fault)
    outcomes = []
    for name, fn in CHECKS:
        rng = random.Random(f"{seed}:{name}")
        try:
            ok, detail = fn(rng, ctx)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        outcomes.append(Outcome(name, ok, detail))
    return outcomes


def transcript(outcomes: list[Outcome], seed: int, scale: str) -> str:
    lines = [f"seed={seed} scale={scale}"]
    for o in outcomes:
        lines.append(f"{'PASS' if o.ok else 'FAIL'} {o.name}: {o.detail}")
    failed = [o.name for o in outcomes if not o.ok]
    lines.append(f"summary: {len(outcomes) - len(failed)}/{len(outcomes)} passed"
                 + (f"; first failure: {failed[0]}" if failed else ""))
    return "\n".join(lines) + "\n"
