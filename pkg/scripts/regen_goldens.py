#!/usr/bin/env python3
"""Regenerate the committed golden files under tests/golden/.

Run from the repository root after an intentional behaviour change:

    python3 scripts/regen_goldens.py

then review the diff before committing.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "tests"))

import golden_recipe  # noqa: E402


def main() -> int:
    out_dir = REPO_ROOT / "tests" / "golden"
    golden_recipe.build_goldens(out_dir)
    for name in golden_recipe.GOLDEN_FILES:
        path = out_dir / name
        print(f"wrote {path} ({path.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
