"""Calibrated synthetic diary generator.

Real 19th-century diary transcriptions cannot ship with the package, so the
fixture generator produces a corpus with the same coarse statistics: a target
mean and standard deviation of distinct persons per day, a fixed person
count, a long-tailed popularity curve (most people appear on exactly one
day), plus a few strangers and bare surnames so the review queue is never
empty.  Everything is seed-deterministic, including the alias log bytes.

Calibration happens in integer space: Gaussian draws are clipped and
rounded, then repaired by greedy unit transfers until the realized mean and
population SD sit within 1% of target (the acceptance margin is 5%).
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass
from datetime import date as Date, timedelta
from pathlib import Path

from .config import FilterSpec, ProjectConfig, save_config
from .layout import LayoutParams
from .resolution import AliasLog, NewEntity

__all__ = ["FixtureSpec", "Fixture", "generate_fixture", "write_fixture", "DEMO_SPEC"]

_FIRST = (
    "Alexander", "Mabel", "Arthur", "Louisa", "Henry", "Clara", "Joseph",
    "Eliza", "Rustam", "Yusuf", "Mariam", "Antone", "Catherine", "Sami",
    "Nasir", "Farida", "George", "Helen", "Jirji", "Salima", "Edward",
    "Victoria", "Khalil", "Nura", "Thomas", "Agnes", "Daud", "Rahel",
    "Walter", "Emily", "Mansur", "Hanna", "Robert", "Sofia", "Ilyas",
    "Margaret", "Fadil", "Jane", "Bashir", "Lydia",
)
_LAST = (
    "Kemball", "Sarkis", "Tozer", "Marine", "Grenville", "Bahoshy",
    "Rassam", "Whitfield", "Asfar", "Holland", "Shammas", "Pearce",
    "Yaghchi", "Talbot", "Hannush", "Blunt", "Qasir", "Norton", "Dallal",
    "Finch", "Sayegh", "Murray", "Hakim", "Crowe", "Antun", "Lester",
    "Bustani", "Webb", "Malik", "Greaves",
)
# Stranger tokens stay out of the gazetteer pools above so rule-extracted
# mentions never collide with a seeded alias.
_STRANGERS = (
    "Zeboun Atiyeh", "Aboud Chiha", "Basil Mattar", "Petros Wakil",
    "Najib Srour", "Elias Tweny", "Fathalla Sayour", "Hanush Abade",
)
_TEMPLATES = (
    "Called on {names} after breakfast.",
    "{names} came to the house before noon.",
    "Dined with {names} in the evening.",
    "Rode to the bridge with {names}.",
    "Took coffee with {names} at the serai.",
    "{names} stopped by on the way to the bazaar.",
)
_QUIET = (
    "Rain all day; stayed in and wrote letters.",
    "Hot wind from the desert. No visitors.",
    "Worked on the accounts until dark.",
    "River high again; the mail boat is late.",
)


@dataclass(frozen=True)
class FixtureSpec:
    days: int = 240
    persons: int = 420
    mean_per_day: float = 7.5
    sd_per_day: float = 5.5
    seed: int = 20260815
    start: Date = Date(1891, 1, 1)
    volumes: int = 0  # 0 = one volume per ~80 days

    def volume_count(self) -> int:
        return self.volumes if self.volumes > 0 else max(1, self.days // 80)


DEMO_SPEC = FixtureSpec(days=60, persons=80, seed=20260815)


@dataclass(frozen=True)
class Fixture:
    spec: FixtureSpec
    display_names: tuple[str, ...]  # index = popularity rank
    rosters: tuple[tuple[int, ...], ...]  # per day, person indices
    volumes: dict[str, str]  # volume id -> file text

    def daily_counts(self) -> list[int]:
        return [len(r) for r in self.rosters]


def _calibrate_counts(rng: random.Random, spec: FixtureSpec) -> list[int]:
    """Integer per-day counts whose mean/pstdev land within 1% of target."""
    z = [rng.gauss(0.0, 1.0) for _ in range(spec.days)]
    mu, sigma = spec.mean_per_day, spec.sd_per_day

    def realize(m: float, s: float) -> list[int]:
        return [min(spec.persons, max(0, round(m + s * zi))) for zi in z]

    for _ in range(30):  # affine fixed point against clip+round distortion
        counts = realize(mu, sigma)
        m = statistics.fmean(counts)
        s = statistics.pstdev(counts)
        if s > 0:
            sigma *= spec.sd_per_day / s
        mu += spec.mean_per_day - m
    counts = realize(mu, sigma)

    # Greedy unit repairs: first pin the total, then steer the SD with
    # sum-preserving transfers between near-mean and extreme days.
    target_total = round(spec.mean_per_day * spec.days)
    order = list(range(spec.days))
    while sum(counts) != target_total:
        step = 1 if sum(counts) < target_total else -1
        rng.shuffle(order)
        for i in order:
            nxt = counts[i] + step
            if 0 <= nxt <= spec.persons:
                counts[i] = nxt
                break
    mean = statistics.fmean(counts)
    for _ in range(10 * spec.days):
        s = statistics.pstdev(counts)
        if abs(s - spec.sd_per_day) <= 0.01 * spec.sd_per_day:
            break
        if s < spec.sd_per_day:  # push mass outward
            donors = [i for i in range(spec.days) if counts[i] > mean and counts[i] < spec.persons]
            takers = [i for i in range(spec.days) if counts[i] < mean and counts[i] > 0]
            if not donors or not takers:
                break
            d, t = rng.choice(donors), rng.choice(takers)
            counts[d] += 1
            counts[t] -= 1
        else:  # pull mass inward
            donors = [i for i in range(spec.days) if counts[i] > mean]
            takers = [i for i in range(spec.days) if counts[i] < mean]
            if not donors or not takers:
                break
            d, t = rng.choice(donors), rng.choice(takers)
            counts[d] -= 1
            counts[t] += 1
    return counts


def _unique_names(rng: random.Random, n: int) -> list[str]:
    if n > len(_FIRST) * len(_LAST):
        raise ValueError(f"cannot produce {n} unique names")
    seen: set[str] = set()
    names: list[str] = []
    while len(names) < n:
        name = f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def _sample_roster(rng: random.Random, weights: list[float], k: int) -> tuple[int, ...]:
    # Efraimidis-Spirakis: top-k keys u^(1/w) is exact weighted sampling
    # without replacement, in one pass.
    keyed = [(rng.random() ** (1.0 / w), i) for i, w in enumerate(weights)]
    keyed.sort(reverse=True)
    return tuple(sorted(i for _, i in keyed[:k]))


def generate_fixture(spec: FixtureSpec = FixtureSpec()) -> Fixture:
    if spec.days < 1 or spec.persons < 1:
        raise ValueError("days and persons must be positive")
    if spec.persons > 0.5 * spec.mean_per_day * spec.days:
        raise ValueError("persons target too high for the per-day budget")
    rng = random.Random(spec.seed)
    counts = _calibrate_counts(rng, spec)
    names = _unique_names(rng, spec.persons)
    weights = [(r + 1) ** -1.5 for r in range(spec.persons)]

    rosters = [_sample_roster(rng, weights, k) for k in counts]
    usage: dict[int, list[int]] = {}
    for day, roster in enumerate(rosters):
        for p in roster:
            usage.setdefault(p, []).append(day)

    # Coverage repair: every person must appear at least once.  Swapping an
    # unused person in for a multi-day one keeps all daily counts intact.
    missing = [p for p in range(spec.persons) if p not in usage]
    day_order = list(range(spec.days))
    for p in missing:
        rng.shuffle(day_order)
        placed = False
        for day in day_order:
            roster = rosters[day]
            victims = [v for v in roster if len(usage[v]) >= 2]
            if not victims:
                continue
            v = rng.choice(victims)
            rosters[day] = tuple(sorted((set(roster) - {v}) | {p}))
            usage[v].remove(day)
            usage[p] = [day]
            placed = True
            break
        if not placed:
            raise ValueError("coverage repair failed; lower the persons target")

    volumes = _render_volumes(rng, spec, names, rosters)
    return Fixture(
        spec=spec,
        display_names=tuple(names),
        rosters=tuple(rosters),
        volumes=volumes,
    )


def _mention(rng: random.Random, name: str) -> str:
    if rng.random() < 0.3:
        return f"{rng.choice(('Mr.', 'Capt.', 'Haji', 'Dr.'))} {name}"
    return name


def _render_volumes(
    rng: random.Random,
    spec: FixtureSpec,
    names: list[str],
    rosters: list[tuple[int, ...]],
) -> dict[str, str]:
    n_vol = spec.volume_count()
    per_vol = math.ceil(spec.days / n_vol)
    shared_surnames = sorted(
        {n.split()[1] for n in names if sum(1 for m in names if m.endswith(" " + n.split()[1])) >= 2}
    )
    volumes: dict[str, str] = {}
    for vi in range(n_vol):
        lines: list[str] = []
        for day in range(vi * per_vol, min((vi + 1) * per_vol, spec.days)):
            d = spec.start + timedelta(days=day)
            lines.append(d.isoformat())
            roster = list(rosters[day])
            rng.shuffle(roster)
            if not roster:
                lines.append(rng.choice(_QUIET))
            while roster:
                chunk, roster = roster[:3], roster[3:]
                mentions = [_mention(rng, names[p]) for p in chunk]
                if len(mentions) == 1:
                    joined = mentions[0]
                else:
                    joined = ", ".join(mentions[:-1]) + " and " + mentions[-1]
                lines.append(rng.choice(_TEMPLATES).format(names=joined))
            # Review-queue fodder: strangers (unknown) and bare shared
            # surnames (ambiguous).  Neither resolves, so the calibrated
            # per-day person counts are untouched.
            if rng.random() < 0.10:
                lines.append(f"A letter came from Mr. {rng.choice(_STRANGERS)} of Aleppo.")
            if shared_surnames and rng.random() < 0.05:
                lines.append(f"Sent word to Capt. {rng.choice(shared_surnames)} about the horses.")
            lines.append("")
        volumes[f"volume-{vi + 1:02d}"] = "\n".join(lines)
    return volumes


def write_fixture(project_dir: str | Path, spec: FixtureSpec = FixtureSpec()) -> dict:
    """Generate and write a complete project directory.

    Layout: corpus/volume-NN.txt, aliases.log (one NewEntity per person,
    fixed timestamp so regeneration is byte-identical), project.yaml, and an
    empty exports/ directory.  Returns a summary of the realized statistics.
    """
    project = Path(project_dir)
    (project / "corpus").mkdir(parents=True, exist_ok=True)
    (project / "exports").mkdir(parents=True, exist_ok=True)
    fixture = generate_fixture(spec)

    for vol_id, text in sorted(fixture.volumes.items()):
        (project / "corpus" / f"{vol_id}.txt").write_text(text, encoding="utf-8")

    log_path = project / "aliases.log"
    if log_path.exists():
        log_path.unlink()
    log = AliasLog(log_path)
    log.append_many(
        (NewEntity(name) for name in fixture.display_names),
        actor="fixture-gen",
        rationale="synthetic fixture seed entity",
        ts="2026-01-01T00:00:00+00:00",
    )

    cfg = ProjectConfig(
        filter=FilterSpec("min_days", 2),
        louvain_seed=spec.seed,
        layout_seed=spec.seed,
        layout=LayoutParams(
            k_r=2.0, max_iterations=300, convergence_threshold=1e-3
        ),
    )
    save_config(cfg, project / "project.yaml")

    counts = fixture.daily_counts()
    return {
        "days": spec.days,
        "persons": spec.persons,
        "mean_per_day": statistics.fmean(counts),
        "sd_per_day": statistics.pstdev(counts),
        "volumes": len(fixture.volumes),
        "seed": spec.seed,
    }
