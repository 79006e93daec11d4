"""Package init: shares the tool's name and version."""
from __future__ import annotations

APP_NAME = "igf-balance"
VERSION = "0.1.0"
