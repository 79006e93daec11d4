"""Shared fixtures: the 12-candidate worked example and a random-instance factory."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from app.services import AttributeSchema, Dataset, explicit_bounds, load_dataset

SCHEMA = {
    "attributes": [
        {"name": "gender", "values": ["Male", "Female"]},
        {"name": "race", "values": ["White", "Black", "Asian"]},
    ]
}

CANDIDATES = [
    ("A", "99", "Male", "White"),
    ("B", "98", "Male", "White"),
    ("C", "96", "Female", "White"),
    ("D", "95", "Female", "White"),
    ("E", "91", "Male", "Black"),
    ("F", "91", "Male", "Black"),
    ("G", "90", "Female", "Black"),
    ("H", "89", "Female", "Black"),
    ("I", "87", "Male", "Asian"),
    ("J", "87", "Male", "Asian"),
    ("K", "86", "Female", "Asian"),
    ("L", "83", "Female", "Asian"),
]

EXAMPLE_BOUNDS = [
    ("Male", 4, 2),
    ("Female", 4, 2),
    ("White", 4, 1),
    ("Black", 4, 1),
    ("Asian", 4, 1),
]


def candidate_rows() -> list[dict]:
    return [{"id": i, "score": s, "gender": g, "race": r} for i, s, g, r in CANDIDATES]


@pytest.fixture
def schema() -> AttributeSchema:
    return AttributeSchema.model_validate(SCHEMA)


@pytest.fixture
def candidates(schema) -> Dataset:
    return load_dataset(candidate_rows(), schema)


@pytest.fixture
def example_constraints(candidates):
    return explicit_bounds(4, EXAMPLE_BOUNDS, candidates)


@pytest.fixture
def candidate_files(tmp_path) -> dict[str, Path]:
    """The worked example on disk: data.csv, schema.json and constraints.json."""
    data = tmp_path / "data.csv"
    lines = ["id,score,gender,race"] + [",".join(row) for row in CANDIDATES]
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps(SCHEMA), encoding="utf-8")
    constraints = tmp_path / "constraints.json"
    constraints.write_text(
        json.dumps(
            {
                "mode": "explicit",
                "k": 4,
                "bounds": [{"value": v, "position": p, "min": m} for v, p, m in EXAMPLE_BOUNDS],
            }
        ),
        encoding="utf-8",
    )
    return {"data": data, "schema": schema, "constraints": constraints, "out": tmp_path / "out"}


def random_instance(rng: np.random.Generator, n: int, k: int):
    """Two attributes (2 and 3 values), integer-ish scores with ties, random prefix bounds."""
    schema = AttributeSchema.model_validate(
        {
            "attributes": [
                {"name": "a", "values": ["a0", "a1"]},
                {"name": "b", "values": ["b0", "b1", "b2"]},
            ]
        }
    )
    rows = []
    for i in range(n):
        rows.append(
            {
                "id": f"c{i:02d}",
                "score": str(int(rng.integers(10, 40)) / 2),
                "a": f"a{int(rng.integers(0, 2))}",
                "b": f"b{int(rng.integers(0, 3))}",
            }
        )
    dataset = load_dataset(rows, schema)
    entries = []
    for value in schema.values:
        if rng.random() < 0.4:
            p = int(rng.integers(1, k + 1))
            entries.append((value, p, int(rng.integers(0, min(p, 2) + 1))))
    return dataset, explicit_bounds(k, entries, dataset)


@pytest.fixture
def make_instance():
    return random_instance
