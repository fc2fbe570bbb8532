"""On-disk cache of conjugacy profiles, one CSV per (group, class, method, radius)."""
from __future__ import annotations

import hashlib
import logging
import os
import re
from pathlib import Path

from .group import GroupElement
from .growth import CROSS_CHECK_RADIUS, ConjugacyProfile, conjugacy_shell_counts, read_profile, write_profile

log = logging.getLogger(__name__)

CACHE_ENV = "TORSIONTRACES_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "torsiontraces"


def _rep_hash(rep: GroupElement) -> str:
    return hashlib.sha256(rep.serialize().encode()).hexdigest()[:12]


def _stem(rep: GroupElement, kind: str) -> str:
    return f"{rep.spec.spec_hash}-{_rep_hash(rep)}-{kind}"


def cache_path(cache_dir: Path, profile: ConjugacyProfile) -> Path:
    return Path(cache_dir) / f"{_stem(profile.class_rep, profile.provenance.kind)}-r{profile.radius}.csv"


def store(cache_dir: Path, profile: ConjugacyProfile) -> Path:
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    path = cache_path(cache_dir, profile)
    write_profile(path, profile)
    return path


def _spot_lengths(profile: ConjugacyProfile, limit: int) -> list[int]:
    candidates = [l for l in range(min(profile.radius, limit) + 1) if profile.counts[l]]
    if not candidates:
        candidates = list(range(min(profile.radius, limit) + 1))
    picks = {candidates[0], candidates[len(candidates) // 2], candidates[-1]}
    return sorted(picks)


def spot_check(profile: ConjugacyProfile, limit: int = CROSS_CHECK_RADIUS) -> bool:
    """Recount three shells by enumeration."""
    lengths = _spot_lengths(profile, limit)
    fresh = conjugacy_shell_counts(profile.class_rep, lengths[-1]).counts
    return all(fresh[l] == profile.counts[l] for l in lengths)


def lookup(cache_dir: Path, rep: GroupElement, radius: int, kind: str) -> ConjugacyProfile | None:
    """A cached profile of ``rep`` covering ``radius``, truncated, or ``None``."""
    cache_dir = Path(cache_dir)
    if not cache_dir.is_dir():
        return None
    stem = _stem(rep, kind)
    pattern = re.compile(re.escape(stem) + r"-r(\d+)\.csv$")
    best = None
    for path in cache_dir.iterdir():
        m = pattern.match(path.name)
        if m and int(m.group(1)) >= radius and (best is None or int(m.group(1)) < best[0]):
            best = (int(m.group(1)), path)
    if best is None:
        return None
    try:
        profile = read_profile(best[1], rep.spec)
    except Exception as exc:  # a corrupt cache entry is a miss, not an error
        log.warning("ignoring unreadable cache entry %s: %s", best[1], exc)
        return None
    if profile.class_rep != rep or not spot_check(profile):
        log.warning("cache entry %s failed verification; recomputing", best[1])
        return None
    return profile.truncate(radius)
