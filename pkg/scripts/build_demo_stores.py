#!/usr/bin/env python3
"""Write (or rewrite) the bundled demo stores under demo/.

Each store is saved in the canonical CSV layout, so rerunning this script
on an unchanged library leaves the directory byte-identical.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from alexdb import demos
from alexdb.storage import save


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=Path(__file__).resolve().parent.parent / "demo",
        type=Path,
        help="directory to write the stores into (default: repo demo/)",
    )
    args = parser.parse_args()
    for name, store in sorted(demos.demo_stores().items()):
        target = save(store, args.out / name)
        print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
