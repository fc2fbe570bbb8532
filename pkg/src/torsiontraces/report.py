"""Structured (YAML) documents for trace matrices, growth verdicts and
divergence tables. Field names are stable; scripts may rely on them."""
from __future__ import annotations

import datetime as _dt
from fractions import Fraction

import yaml

from . import __version__
from .growth import ConjugacyProfile, GrowthVerdict, ShellSchedule
from .traces import DivergenceReport, SeparabilityReport, TraceMatrix


def frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def matrix_doc(m: TraceMatrix) -> dict:
    return {
        "witnesses": [{"element": str(g), "order": d} for g, d in m.witnesses],
        "rows": ["delta_trace"] + [f"class_trace[{g}]" for g, _ in m.witnesses],
        "columns": ["1"] + [f"p[{g}]" for g, _ in m.witnesses],
        "entries": [[frac(x) for x in row] for row in m.entries],
        "determinant": frac(m.determinant),
        "verdict": m.verdict.name,
    }


def growth_doc(v: GrowthVerdict) -> dict:
    return {
        "kind": v.kind.name,
        "fitted_degree": v.fitted_degree,
        "growth_rate": v.growth_rate,
        "fit_quality": v.fit_quality,
        "data_radius": v.data_radius,
        "residual_polynomial": v.residuals[0],
        "residual_exponential": v.residuals[1],
        "note": "heuristic label over finite data, not a proof",
    }


def schedule_doc(s: ShellSchedule) -> dict:
    return {
        "exponent_base": s.exponent_base,
        "indices": list(s.indices),
        "provenance": str(s.provenance) if s.provenance else None,
    }


def divergence_doc(r: DivergenceReport) -> dict:
    rows = []
    for i, l in enumerate(r.schedule.indices[:len(r.norm_terms)]):
        rows.append({
            "term": i + 1,
            "l": l,
            "n_l": str(r.shell_counts[i]),
            "norm_sq_term": r.norm_terms[i],
            "norm_sq_term_bound": r.norm_term_bounds[i],
            "norm_sq_partial": r.norm_partials[i],
            "trace_term": r.trace_terms[i],
            "trace_partial": r.trace_partials[i],
        })
    return {
        "provenance": str(r.provenance) if r.provenance else None,
        "s": r.s,
        "schedule": schedule_doc(r.schedule),
        "table": rows,
        "norm_sq_tail_bound": r.norm_tail_bound,
        "trace_threshold": r.trace_threshold,
        "trace_exceeds": r.trace_exceeds_at if r.trace_exceeds else "NOT_REACHED",
        "truncation": r.note,
    }


def profile_doc(p: ConjugacyProfile) -> dict:
    return {
        "class_rep": str(p.class_rep) if p.class_rep is not None else None,
        "provenance": str(p.provenance),
        "radius": p.radius,
        "nonzero_shells": {l: str(n) for l, n in enumerate(p.counts) if n},
    }


def separability_doc(r: SeparabilityReport) -> dict:
    witnesses = []
    for w in r.witnesses:
        powers = []
        for p in w.powers:
            powers.append({
                "power": p.power,
                "element": str(p.element),
                "profile_provenance": str(p.profile_provenance),
                "growth": growth_doc(p.growth),
                "divergence": divergence_doc(p.divergence) if p.divergence else None,
            })
        witnesses.append({"element": str(w.witness), "order": w.order, "powers": powers})
    return {
        "group": str(r.spec),
        "spec_hash": r.spec.spec_hash,
        "radius": r.radius,
        "s": r.s,
        "exponent_base": r.exponent_base,
        "witnesses": witnesses,
        "trace_matrix": matrix_doc(r.matrix) if r.matrix else None,
        "verdict": r.verdict.name,
    }


def render(kind: str, body: dict, timestamp: bool = True) -> str:
    doc = {"tool": "torsiontraces", "version": __version__, "report": kind}
    if timestamp:
        doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    doc[kind] = body
    return yaml.safe_dump(doc, sort_keys=False, width=100)
