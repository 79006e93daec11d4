"""Registry of sub-commands so main.py can route dynamically."""
from types import ModuleType

from . import gen, leximin, report, solve, validate

registry: dict[str, ModuleType] = {
    "solve": solve,
    "leximin": leximin,
    "report": report,
    "gen": gen,
    "validate": validate,
}

__all__ = ["registry"]
