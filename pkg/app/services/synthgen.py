"""synthgen.py

Synthetic candidate pools with group-shifted score distributions.

Each item draws one value per attribute (optionally nudged towards or away
from values already drawn, via pair multipliers) and then a score from a
normal whose location is the base plus its values' offsets and whose
spread is the root-sum-square of its values' spreads. Draws at or below
zero are redrawn; scores are rounded to cents with a floor of 0.01.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from .errors import ConstraintError
from .dataset import load_dataset
from .model import Dataset, GroupProfile, PairMultiplier, ProfileAttribute, ProfileValue

logger = logging.getLogger(__name__)

MIN_SCORE = 0.01
_REDRAWS = 64


def _attr(name: str, *values: tuple[str, float, float, float]) -> ProfileAttribute:
    return ProfileAttribute(
        name=name,
        values=[ProfileValue(value=v, share=s, location=loc, spread=sp) for v, s, loc, sp in values],
    )


PRESETS: dict[str, GroupProfile] = {
    "meps-like": GroupProfile(
        base_location=50.0,
        attributes=[
            _attr(
                "race",
                ("White", 0.55, 0.0, 12.0),
                ("Black", 0.14, -3.0, 12.0),
                ("Hispanic", 0.14, -2.0, 12.0),
                ("Asian", 0.06, 1.0, 12.0),
                ("AmericanIndian", 0.02, -9.0, 12.0),
                ("PacificIslander", 0.02, -2.0, 12.0),
                ("Multiracial", 0.04, -1.0, 12.0),
                ("OtherRace", 0.03, 0.0, 12.0),
            ),
            _attr("age", ("Young", 0.3, -6.0, 3.0), ("Old", 0.7, 0.0, 3.0)),
        ],
        pairs=[PairMultiplier(first="AmericanIndian", second="Young", factor=2.0)],
    ),
    "cs-like": GroupProfile(
        base_location=40.0,
        attributes=[
            _attr("size", ("Large", 0.6, 0.0, 8.0), ("Small", 0.4, -6.0, 8.0)),
            _attr(
                "area",
                ("NorthEast", 0.25, 2.0, 4.0),
                ("WestCoast", 0.25, 2.0, 4.0),
                ("MidWest", 0.2, 0.0, 4.0),
                ("SouthCenter", 0.15, -5.0, 4.0),
                ("SouthAtlantic", 0.15, -4.0, 4.0),
            ),
        ],
    ),
    # one low-score minority at -2σ plus a large, mildly shifted Young group
    "minority": GroupProfile(
        base_location=60.0,
        attributes=[
            _attr("group", ("Majority", 0.95, 0.0, 10.0), ("Minority", 0.05, -20.0, 10.0)),
            _attr("age", ("Young", 0.4, -5.0, 1.0), ("Senior", 0.6, 0.0, 1.0)),
        ],
        pairs=[PairMultiplier(first="Minority", second="Young", factor=2.0)],
    ),
}


def preset(name: str) -> GroupProfile:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConstraintError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def load_profile(path: str | Path) -> GroupProfile:
    try:
        return GroupProfile.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
    except FileNotFoundError:
        raise ConstraintError(f"profile file not found: {path}") from None
    except (json.JSONDecodeError, ValidationError) as exc:
        raise ConstraintError(f"invalid profile {path}: {exc}") from exc


def _pair_table(profile: GroupProfile) -> dict[tuple[str, str], float]:
    table: dict[tuple[str, str], float] = {}
    for pair in profile.pairs:
        table[(pair.first, pair.second)] = pair.factor
        table[(pair.second, pair.first)] = pair.factor
    return table


def generate(profile: GroupProfile, n: int, seed: Optional[int] = None) -> Dataset:
    """Draw *n* items; identical (profile, n, seed) give identical pools."""
    if n < 1:
        raise ConstraintError(f"n={n} must be at least 1")
    rng = np.random.default_rng(profile.seed if seed is None else seed)
    pairs = _pair_table(profile)
    drawn: list[list[str]] = [[] for _ in range(n)]
    location = np.full(n, profile.base_location)
    variance = np.zeros(n)

    for attr in profile.attributes:
        names = [v.value for v in attr.values]
        shares = np.array([v.share for v in attr.values])
        weights = np.tile(shares, (n, 1))
        if pairs:
            for i in range(n):
                for prior in drawn[i]:
                    for col, name in enumerate(names):
                        weights[i, col] *= pairs.get((prior, name), 1.0)
        weights /= weights.sum(axis=1, keepdims=True)
        cdf = np.cumsum(weights, axis=1)
        u = rng.random(n)
        picks = np.minimum((u[:, None] > cdf).sum(axis=1), len(names) - 1)
        for i, col in enumerate(picks):
            drawn[i].append(names[col])
            location[i] += attr.values[col].location
            variance[i] += attr.values[col].spread ** 2

    spread = np.sqrt(variance) if profile.attributes else np.ones(n)
    scores = rng.normal(location, spread)
    for _ in range(_REDRAWS):
        low = scores <= 0
        if not low.any():
            break
        scores[low] = rng.normal(location[low], spread[low])
    scores = np.maximum(np.round(scores, 2), MIN_SCORE)

    width = len(str(n))
    rows = []
    for i in range(n):
        row = {"id": f"c{i + 1:0{width}d}", "score": f"{scores[i]:.2f}"}
        for attr, value in zip(profile.attributes, drawn[i]):
            row[attr.name] = value
        rows.append(row)
    dataset = load_dataset(rows, profile.to_schema())
    logger.debug("generated %d items (seed=%s)", n, profile.seed if seed is None else seed)
    return dataset
