"""dataset.py

Ingestion and derived views of the item pool.

* ``load_dataset`` turns raw tabular records into a :class:`Dataset`,
  rejecting anything the rest of the engine cannot reason about
  (duplicate ids, non-positive scores, unknown or missing labels).
* ``read_dataset`` is the file front door: CSV through pandas (every column
  read as text so decimal scores stay exact) plus the schema JSON.
* The remaining helpers are the group views the metrics, the program
  builder and the solver read through.
"""

from __future__ import annotations

import io
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import pandas as pd
from pydantic import ValidationError

from .errors import DatasetError
from .model import AttributeSchema, Dataset, DatasetStats, Item, Outcome, to_fraction

logger = logging.getLogger(__name__)

_RESERVED = ("id", "score")


# -----------------------------------------------------------------------------
# Loading
# -----------------------------------------------------------------------------

def load_schema(path: str | Path) -> AttributeSchema:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return AttributeSchema.model_validate(raw)
    except FileNotFoundError:
        raise DatasetError(f"schema file not found: {path}") from None
    except (json.JSONDecodeError, ValidationError) as exc:
        raise DatasetError(f"invalid schema {path}: {exc}") from exc


def load_dataset(rows: Iterable[Mapping[str, object]], schema: AttributeSchema) -> Dataset:
    """Validate *rows* against *schema* and build the dataset.

    Every row needs ``id``, ``score`` and one column per attribute; extra
    columns are ignored. Empty cells count as missing labels.
    """
    domains = schema.domains
    items: list[Item] = []
    seen: set[str] = set()

    for line, row in enumerate(rows, start=1):
        item_id = _cell(row, "id")
        if item_id is None:
            raise DatasetError(f"row {line}: missing id")
        if item_id in seen:
            raise DatasetError(f"duplicate id {item_id!r}")
        seen.add(item_id)

        raw_score = _cell(row, "score")
        if raw_score is None:
            raise DatasetError(f"item {item_id!r}: missing score")
        try:
            score = to_fraction(raw_score)
        except ValueError:
            raise DatasetError(f"item {item_id!r}: non-numeric score {raw_score!r}") from None
        if score <= 0:
            raise DatasetError(f"item {item_id!r}: non-positive score {raw_score}")

        labels = []
        for attr, values in domains.items():
            value = _cell(row, attr)
            if value is None:
                raise DatasetError(f"item {item_id!r}: missing value for attribute {attr!r}")
            if value not in values:
                raise DatasetError(f"item {item_id!r}: label {value!r} not in schema for {attr!r}")
            labels.append(value)

        items.append(Item(id=item_id, score=score, labels=frozenset(labels)))

    dataset = Dataset(attributes=schema, items=tuple(items))
    logger.debug("loaded %d items over %d attribute values", dataset.n, len(schema.values))
    return dataset


def _cell(row: Mapping[str, object], key: str) -> str | None:
    value = row.get(key)
    if value is None:
        return None
    if isinstance(value, float) and pd.isna(value):
        return None
    text = str(value).strip()
    return text or None


def read_dataset(csv_path: str | Path, schema_path: str | Path) -> Dataset:
    """Read ``id,score,<attr>...`` CSV plus schema JSON into a dataset."""
    schema = load_schema(schema_path)
    try:
        df = pd.read_csv(csv_path, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError:
        raise DatasetError(f"data file not found: {csv_path}") from None
    except pd.errors.EmptyDataError:
        raise DatasetError(f"data file is empty: {csv_path}") from None

    missing = {*_RESERVED, *schema.names} - set(df.columns)
    if missing:
        raise DatasetError(f"{csv_path}: missing columns {sorted(missing)}")
    return load_dataset(df.to_dict(orient="records"), schema)


def export_csv(dataset: Dataset) -> str:
    """Serialise *dataset* back to the CSV layout, rows in item order.

    Scores are written as exact decimal literals when they have a finite
    expansion (which loaded decimals always do), otherwise as ``a/b``.
    """
    names = dataset.attributes.names
    records = []
    for item_id in dataset.ranked_ids:
        record = {"id": item_id, "score": decimal_text(dataset.score(item_id))}
        for attr in names:
            record[attr] = dataset.label(item_id, attr)
        records.append(record)
    df = pd.DataFrame.from_records(records, columns=["id", "score", *names])
    buf = io.StringIO()
    df.to_csv(buf, index=False, lineterminator="\n")
    return buf.getvalue()


def decimal_text(value: Fraction) -> str:
    """Finite decimal rendering of *value*, or ``a/b`` if none exists."""
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return str(value)
    places = max(twos, fives)
    scaled = value * 10**places
    whole, frac = divmod(int(scaled), 10**places)
    if places == 0:
        return str(whole)
    return f"{whole}.{frac:0{places}d}"


# -----------------------------------------------------------------------------
# Derived views
# -----------------------------------------------------------------------------

def dataset_stats(dataset: Dataset) -> DatasetStats:
    if dataset.n == 0:
        raise DatasetError("dataset is empty")
    scores = [it.score for it in dataset.items]
    s_max, s_min = max(scores), min(scores)
    return DatasetStats(s_max=s_max, s_min=s_min, lam=s_max / s_min)


def better_or_equal_set(dataset: Dataset, value: str, item_id: str) -> list[str]:
    """I_{i,v}: members of group *value* scoring at least as much as *item_id*.

    Ties are included regardless of id order.
    """
    members = _members(dataset, value)
    if item_id not in members:
        raise DatasetError(f"item {item_id!r} is not in group {value!r}")
    threshold = dataset.score(item_id)
    return [h for h in members if dataset.score(h) >= threshold]


def group_mass(dataset: Dataset, value: str, item_id: str) -> Fraction:
    """Total score of :func:`better_or_equal_set` (the aggregated denominator)."""
    return sum((dataset.score(h) for h in better_or_equal_set(dataset, value, item_id)), Fraction(0))


def _members(dataset: Dataset, value: str) -> tuple[str, ...]:
    try:
        return dataset.members(value)
    except KeyError:
        raise DatasetError(f"unknown attribute value {value!r}") from None


def make_outcome(dataset: Dataset, ranking: Sequence[str]) -> Outcome:
    """Build the outcome of an ordered id list (position 1 first)."""
    ranking = tuple(ranking)
    if len(set(ranking)) != len(ranking):
        dupes = sorted({i for i in ranking if ranking.count(i) > 1})
        raise DatasetError(f"ranking repeats ids {dupes}")
    for item_id in ranking:
        try:
            dataset.item(item_id)
        except KeyError:
            raise DatasetError(f"ranking names unknown id {item_id!r}") from None

    chosen = set(ranking)
    accepted: dict[str, tuple[str, ...]] = {}
    rejected: dict[str, tuple[str, ...]] = {}
    lowest: dict[str, Fraction | None] = {}
    highest: dict[str, Fraction | None] = {}
    for v, members in dataset.groups.items():
        acc = tuple(h for h in members if h in chosen)
        rej = tuple(h for h in members if h not in chosen)
        accepted[v], rejected[v] = acc, rej
        # members are score-descending, so the ends are the extremes
        lowest[v] = dataset.score(acc[-1]) if acc else None
        highest[v] = dataset.score(rej[0]) if rej else None

    utility = sum((dataset.score(i) for i in ranking), Fraction(0))
    return Outcome(
        ranking=ranking,
        accepted=accepted,
        rejected=rejected,
        lowest_accepted=lowest,
        highest_rejected=highest,
        utility=utility,
    )


def top_k(dataset: Dataset, k: int) -> Outcome:
    """Unconstrained utility-maximising ranking of size *k*."""
    if not 0 <= k <= dataset.n:
        raise DatasetError(f"k={k} outside [0, n={dataset.n}]")
    return make_outcome(dataset, dataset.ranked_ids[:k])
