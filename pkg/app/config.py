# config.py
from functools import lru_cache
from pathlib import Path
from dotenv import load_dotenv
import os

load_dotenv(Path(__file__).parent.parent / ".env")


def _optional(name: str, cast):
    raw = os.getenv(name, "").strip()
    return cast(raw) if raw else None


@lru_cache
def settings():
    return {
        "IGF_EPSILON": float(os.getenv("IGF_EPSILON", "0.001")),
        # seconds / nodes per integer-program solve; unset = no limit
        "IGF_TIME_LIMIT": _optional("IGF_TIME_LIMIT", float),
        "IGF_NODE_LIMIT": _optional("IGF_NODE_LIMIT", int),
        "IGF_WORKERS": int(os.getenv("IGF_WORKERS", "1")),
        "IGF_SEED": int(os.getenv("IGF_SEED", "0")),
        "IGF_OUT_DIR": os.getenv("IGF_OUT_DIR", "out"),
        "IGF_LOG_LEVEL": os.getenv("IGF_LOG_LEVEL", "WARNING").upper(),
        # k-subsets the brute-force oracle may enumerate
        "IGF_ORACLE_BUDGET": int(os.getenv("IGF_ORACLE_BUDGET", "250000")),
    }
