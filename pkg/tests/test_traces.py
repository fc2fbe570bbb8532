import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from torsiontraces import (
    BUNDLED_SPECS,
    INFINITE,
    AlgebraElement,
    Mode,
    OverallVerdict,
    build_idempotent,
    check_rd_poly_inequality,
    conjugacy_shell_counts,
    conjugacy_trace,
    convolve,
    counterexample_partial_sums,
    element_order,
    find_shell_sequence,
    materialize_counterexample,
    normal_form,
    profile_from_formula,
    separability_report,
    sobolev_norm,
    synthetic_profile,
    trace_matrix,
)
from torsiontraces.errors import (
    DuplicateOrders,
    InfiniteOrder,
    MixedSpecs,
    ProfileMismatch,
    ResourceLimit,
    ScheduleInvalid,
)
from torsiontraces.growth import GrowthKind, ShellSchedule, class_words
from torsiontraces.oracles import bfs_ball, cofactor_determinant, conjugacy_orbit
from torsiontraces.traces import BASEL_CONSTANT, MatrixVerdict, bareiss_determinant, rational_determinant

F = Fraction


# -- class traces ------------------------------------------------------------------

def test_conjugacy_trace_examples(z3z, dinf):
    x = z3z.gen("x")
    # brute force: x^2 is not in the orbit of x, so only t = 1 counts
    assert x ** 2 not in conjugacy_orbit(x, bfs_ball(z3z, 6))
    assert conjugacy_trace(x, build_idempotent(x)) == F(1, 3)
    assert conjugacy_trace(dinf.gen("a"), AlgebraElement.one(dinf)) == 0
    with pytest.raises(MixedSpecs):
        conjugacy_trace(x, AlgebraElement.one(dinf))


@pytest.mark.parametrize("name", ["z3_star_z", "z2_star_z3"])
@given(data=st.data())
def test_conjugacy_trace_is_class_function(name, data):
    spec = BUNDLED_SPECS[name]
    raw = st.lists(st.tuples(st.integers(0, 1), st.integers(-3, 3)), max_size=5)
    rep = normal_form(spec, data.draw(raw))
    u = normal_form(spec, data.draw(raw))
    pairs = [(normal_form(spec, data.draw(raw)), data.draw(st.fractions(-5, 5, max_denominator=7)))
             for _ in range(data.draw(st.integers(0, 6)))]
    a = AlgebraElement.from_terms(pairs, spec=spec)
    conj = convolve(convolve(AlgebraElement.of(u), a), AlgebraElement.of(~u))
    assert conjugacy_trace(rep, conj) == conjugacy_trace(rep, a)
    # and it really is a trace
    b = AlgebraElement.from_terms([(u, 1), (rep, F(2, 3))], spec=spec)
    assert conjugacy_trace(rep, convolve(a, b)) == conjugacy_trace(rep, convolve(b, a))


# -- trace matrix ---------------------------------------------------------------------

def test_trace_matrix_dinfinity(dinf):
    m = trace_matrix([dinf.gen("a")])
    assert m.entries == ((1, F(1, 2)), (0, F(1, 2)))
    assert m.determinant == F(1, 2)
    assert m.verdict is MatrixVerdict.SEPARABLE


def test_trace_matrix_z2_star_z3(z2z3):
    u, v = z2z3.gen("u"), z2z3.gen("v")
    # oracle facts fixed before building: v^2 is not conjugate to v; no power of v is conjugate to u
    orbit_v = conjugacy_orbit(v, bfs_ball(z2z3, 8))
    orbit_u = conjugacy_orbit(u, bfs_ball(z2z3, 8))
    assert v ** 2 not in orbit_v and v not in orbit_u and v ** 2 not in orbit_u and u not in orbit_v
    m = trace_matrix([v, u])  # sorted internally
    assert [d for _, d in m.witnesses] == [2, 3]
    assert m.entries == (
        (1, F(1, 2), F(1, 3)),
        (0, F(1, 2), 0),
        (0, 0, F(1, 3)),
    )
    assert m.determinant == F(1, 6) == cofactor_determinant(m.entries)
    assert m.verdict is MatrixVerdict.SEPARABLE


def test_trace_matrix_with_nonzero_off_diagonal(z234):
    w = z234.gen("w")
    v = z234.gen("v")
    w2 = w ** 2
    assert w2 in {w ** t for t in range(4)}
    assert w2 not in conjugacy_orbit(w, bfs_ball(z234, 5))
    m = trace_matrix([w, v, w2])
    assert m.entries == (
        (1, F(1, 2), F(1, 3), F(1, 4)),
        (0, F(1, 2), 0, F(1, 4)),  # w^2 is one of the four powers of w
        (0, 0, F(1, 3), 0),
        (0, 0, 0, F(1, 4)),
    )
    assert m.determinant == F(1, 24) == cofactor_determinant(m.entries)


def test_trace_matrix_errors(z3z, z234):
    with pytest.raises(InfiniteOrder):
        trace_matrix([z3z.gen("y")])
    with pytest.raises(DuplicateOrders, match="distinct"):
        trace_matrix([z234.gen("u"), z234.gen("w") ** 2])
    with pytest.raises(ValueError):
        trace_matrix([z3z.identity()])


def test_trace_matrix_no_witnesses(z3z):
    m = trace_matrix([], spec=z3z)
    assert m.entries == ((1,),)
    assert m.determinant == 1


@pytest.mark.parametrize("name", ["dinfinity", "z3_star_z", "z2_star_z3", "z2_star_z3_star_z4"])
def test_trace_matrix_structure_on_random_families(name):
    spec = BUNDLED_SPECS[name]
    by_order = {}
    for g in bfs_ball(spec, 4):
        d = element_order(g)
        if d != INFINITE and d >= 2:
            by_order.setdefault(d, []).append(g)
    rng = random.Random(11)
    for _ in range(30):
        orders = [d for d in sorted(by_order) if rng.random() < 0.8] or [min(by_order)]
        m = trace_matrix([rng.choice(by_order[d]) for d in orders])
        A, k = m.entries, len(m.entries)
        assert A[0][0] == 1
        for j in range(1, k):
            d_j = m.witnesses[j - 1][1]
            assert A[0][j] == F(1, d_j)
            assert A[j][j] >= F(1, d_j)
            assert all(A[i][j] == 0 for i in range(j + 1, k))
            assert A[j][0] == 0
        assert m.determinant == math.prod(A[i][i] for i in range(k)) == cofactor_determinant(A)


@given(st.lists(st.lists(st.integers(-6, 6), min_size=5, max_size=5), min_size=5, max_size=5),
       st.integers(1, 5))
def test_bareiss_matches_cofactor(rows, n):
    m = [r[:n] for r in rows[:n]]
    assert bareiss_determinant(m) == cofactor_determinant([[F(x) for x in r] for r in m])


@given(st.lists(st.lists(st.fractions(-3, 3, max_denominator=5), min_size=4, max_size=4), min_size=4, max_size=4))
def test_rational_determinant_matches_cofactor(rows):
    assert rational_determinant(rows) == cofactor_determinant(rows)


# -- the inequality chain -------------------------------------------------------------

def test_inequality_single_term(dinf):
    a = dinf.gen("a")
    profile = conjugacy_shell_counts(a, 3)
    res = check_rd_poly_inequality(AlgebraElement.of(a), a, profile)
    assert res.lhs == 1
    assert res.rhs == pytest.approx(BASEL_CONSTANT)
    assert res.rhs == pytest.approx(1.2825, abs=1e-4)
    assert res.holds


def test_inequality_zero(dinf):
    a = dinf.gen("a")
    res = check_rd_poly_inequality(AlgebraElement.zero(dinf), a, conjugacy_shell_counts(a, 3))
    assert res.lhs == res.rhs == 0 and res.holds


def test_inequality_errors(dinf, z3z):
    a = dinf.gen("a")
    profile = conjugacy_shell_counts(a, 3)
    far = dinf.parse_element("a b a b a")
    with pytest.raises(ProfileMismatch):
        check_rd_poly_inequality(AlgebraElement.of(far), a, profile)
    with pytest.raises(ProfileMismatch):
        check_rd_poly_inequality(AlgebraElement.of(dinf.gen("b")), a, profile)
    with pytest.raises(ProfileMismatch):
        check_rd_poly_inequality(AlgebraElement.of(a), a, conjugacy_shell_counts(dinf.gen("b"), 3))
    with pytest.raises(ValueError):
        check_rd_poly_inequality(AlgebraElement.one(dinf), dinf.identity(), conjugacy_shell_counts(a, 3))


CLASS_CASES = [("dinfinity", "a", 41), ("z3_star_z", "x", 9), ("z2_star_z3", "v", 12), ("z3_star_z", "x y", 8)]


@pytest.mark.parametrize("name, rep, R", CLASS_CASES)
@given(data=st.data())
def test_inequality_chain_holds(name, rep, R, data):
    spec = BUNDLED_SPECS[name]
    g = spec.parse_element(rep)
    words = sorted(class_words(g, R))
    chosen = data.draw(st.lists(st.sampled_from(words), min_size=1, max_size=12, unique=True))
    coeffs = data.draw(st.lists(st.fractions(-20, 20, max_denominator=10), min_size=len(chosen),
                                max_size=len(chosen)))
    a = AlgebraElement(spec, dict(zip(chosen, coeffs)), Mode.EXACT)
    res = check_rd_poly_inequality(a, g, conjugacy_shell_counts(g, R))
    assert res.holds
    tol = 1 + 1e-9
    assert res.lhs <= res.shell_sum * tol
    assert res.shell_sum <= res.power_mean * tol
    assert res.power_mean <= res.rhs * tol


# -- divergence evidence -------------------------------------------------------------------

def test_partial_sums_two_to_the_l():
    profile = synthetic_profile("2^l", 256)
    schedule = find_shell_sequence(profile, 4, 5)
    r = counterexample_partial_sums(profile, schedule, 3.0, 5)
    assert len(r.trace_partials) == 5
    assert r.trace_strictly_increasing
    for i, l in enumerate(schedule.indices, start=1):
        n = 2 ** l
        assert r.shell_counts[i - 1] == n
        assert r.trace_terms[i - 1] == pytest.approx(n ** 0.375, rel=1e-12)
        assert r.trace_terms[i - 1] >= 2 ** (schedule.indices[0] * 3 / 8) * (1 - 1e-12)
        assert r.norm_terms[i - 1] == pytest.approx(n ** -0.25 * (1 + l) ** 6, rel=1e-12)
        assert r.norm_terms[i - 1] < (1 + l) ** (6 - i)
    assert all(b >= a for a, b in zip(r.norm_partials, r.norm_partials[1:]))
    # the bounds (1+l_i)^(2s-i) eventually decrease
    assert r.norm_term_bounds[-1] < r.norm_term_bounds[0]


def test_partial_sums_single_term():
    profile = synthetic_profile("3^l", 100)
    schedule = find_shell_sequence(profile, 2, 4)
    r = counterexample_partial_sums(profile, schedule, 1.5, 1)
    l = schedule.indices[0]
    n = 3 ** l
    assert r.norm_partials == pytest.approx([n ** -0.25 * (1 + l) ** 3], rel=1e-12)
    assert r.trace_partials == pytest.approx([n ** 0.375], rel=1e-12)


def test_partial_sums_empty_schedule(dinf):
    profile = profile_from_formula(dinf, dinf.gen("a"), 50)
    schedule = find_shell_sequence(profile, 4, 5)
    r = counterexample_partial_sums(profile, schedule, 3.0, 5)
    assert r.norm_partials == r.trace_partials == ()
    assert r.trace_exceeds_at is None and not r.trace_exceeds


def test_partial_sums_rejects_foreign_schedule():
    schedule = find_shell_sequence(synthetic_profile("3^l", 100), 4, 3)
    with pytest.raises(ScheduleInvalid):
        counterexample_partial_sums(synthetic_profile("2^l", 100), schedule, 3.0, 3)


def test_tail_bound_dominates_later_terms():
    profile = synthetic_profile("2^l", 1500)
    full = find_shell_sequence(profile, 4, 14)
    assert len(full) == 14
    short = counterexample_partial_sums(profile, full, 3.0, 8)
    whole = counterexample_partial_sums(profile, full, 3.0, 14)
    assert math.isfinite(short.norm_tail_bound)
    assert math.fsum(whole.norm_terms[8:]) <= short.norm_tail_bound
    # before the exponents 2s - c i / 4 turn negative no bound is claimed
    assert counterexample_partial_sums(profile, full, 3.0, 5).norm_tail_bound == math.inf


def test_tail_bound_with_small_base():
    profile = synthetic_profile("2^l", 3000)
    full = find_shell_sequence(profile, 1.0, 30)
    short = counterexample_partial_sums(profile, full, 0.5, 20)
    whole = counterexample_partial_sums(profile, full, 0.5, len(full))
    assert math.fsum(whole.norm_terms[20:]) <= short.norm_tail_bound


def test_trace_threshold_reached():
    profile = synthetic_profile("2^l", 256)
    r = counterexample_partial_sums(profile, find_shell_sequence(profile, 4, 5), 3.0, 5, 1e6)
    k = r.trace_exceeds_at
    assert k is not None and r.trace_partials[k - 1] > 1e6 and (k == 1 or r.trace_partials[k - 2] <= 1e6)


# -- materialization -----------------------------------------------------------------

def test_materialize_zero(z3z):
    schedule = ShellSchedule((5,), 0.5)
    assert not materialize_counterexample(z3z.gen("x"), schedule, 0)


def test_materialize_singleton_shells(dinf):
    a = dinf.gen("a")
    schedule = ShellSchedule((1, 5), 0.1)  # D-infinity shells hold one element each
    x = materialize_counterexample(a, schedule, 2)
    assert x.mode is Mode.FLOAT
    assert sorted((g.length, c) for g, c in x.items()) == [(1, 1.0), (5, 1.0)]


def test_materialize_matches_profile_path(z3z):
    x = z3z.gen("x")
    profile = conjugacy_shell_counts(x, 13)
    schedule = find_shell_sequence(profile, 0.5, 4)
    assert len(schedule) >= 3
    for s in (0.0, 1.0, 2.5):
        report = counterexample_partial_sums(profile, schedule, s, len(schedule))
        for N in range(1, len(schedule) + 1):
            elem = materialize_counterexample(x, schedule, N, profile=profile)
            assert len(elem) == sum(profile.counts[l] for l in schedule.indices[:N])
            assert sobolev_norm(elem, s) ** 2 == pytest.approx(report.norm_partials[N - 1], rel=1e-9)


def test_materialize_cap(z3z):
    x = z3z.gen("x")
    schedule = find_shell_sequence(conjugacy_shell_counts(x, 13), 0.5, 3)
    with pytest.raises(ResourceLimit):
        materialize_counterexample(x, schedule, 3, cap=10)


# -- composed verdicts ----------------------------------------------------------------

def test_report_dinfinity(dinf):
    r = separability_report(dinf, [dinf.gen("a")], 60, 3.0, 4.0)
    assert r.verdict is OverallVerdict.SEPARABLE_BY_TRACES
    assert r.matrix.determinant == F(1, 2)
    (w,) = r.witnesses
    assert [p.growth.kind for p in w.powers] == [GrowthKind.POLYNOMIAL_BOUNDED]


def test_report_z3_star_z(z3z):
    x = z3z.gen("x")
    r = separability_report(z3z, [x], 300, 3.0, 4.0)
    assert r.verdict is OverallVerdict.TRACE_OBSTRUCTION_EVIDENCE
    assert r.matrix is None
    (w,) = r.witnesses
    assert [p.element for p in w.powers] == [x, x ** 2]
    for p in w.powers:
        assert p.growth.kind is GrowthKind.SUPERPOLYNOMIAL_EVIDENCE
        assert p.divergence.trace_strictly_increasing
        assert p.divergence.provenance.kind == "closed_form"


def test_report_no_witnesses(z3z):
    r = separability_report(z3z, [], 60, 3.0, 4.0)
    assert r.verdict is OverallVerdict.SEPARABLE_BY_TRACES
    assert r.matrix.entries == ((1,),)


def test_report_radius_too_small_is_inconclusive(z3z):
    # growth looks exponential but no shell reaches (1+l)^4 by l = 21
    r = separability_report(z3z, [z3z.gen("x")], 21, 3.0, 4.0)
    assert r.verdict is OverallVerdict.MIXED_OR_INCONCLUSIVE
    assert all(p.divergence is None for p in r.witnesses[0].powers)


def test_report_modular_group(z2z3):
    r = separability_report(z2z3, [z2z3.gen("u"), z2z3.gen("v")], 300, 3.0, 4.0)
    assert r.verdict is OverallVerdict.TRACE_OBSTRUCTION_EVIDENCE
    assert [len(w.powers) for w in r.witnesses] == [1, 2]
