"""gen.py

``igf-balance gen`` – write a seeded synthetic pool.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from app.config import settings
from app.services import export_csv, generate, load_profile, preset
from app.services.synthgen import PRESETS
from app._commands._helpers import EXIT_OK, write_json, write_text

logger = logging.getLogger(__name__)

HELP = "generate a synthetic candidate pool"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=sorted(PRESETS))
    source.add_argument("--profile", help="group profile JSON")
    parser.add_argument("--n", type=int, required=True, help="number of items")
    parser.add_argument("--seed", type=int, default=None, help="default: IGF_SEED")
    parser.add_argument("--out", default=None, help="output directory (default: IGF_OUT_DIR)")


def run(args: argparse.Namespace) -> int:
    cfg = settings()
    profile = preset(args.preset) if args.preset else load_profile(args.profile)
    seed = cfg["IGF_SEED"] if args.seed is None else args.seed
    out = Path(args.out or cfg["IGF_OUT_DIR"])

    dataset = generate(profile, args.n, seed)
    write_text(out / "data.csv", export_csv(dataset))
    write_json(out / "schema.json", dataset.attributes.model_dump())
    write_json(out / "profile.json", profile.model_copy(update={"seed": seed}).model_dump())

    for value in dataset.attributes.values:
        print(f"{value:<20} {len(dataset.members(value)):>6}")
    print(f"wrote {dataset.n} items to {out}")
    return EXIT_OK
