#!/usr/bin/env python3
"""Run every reference preset and export its CSV (plus .meta.json sidecar).

Usage: python scripts/make_figure_data.py [-o OUTDIR] [names...]
"""

import argparse
import sys
import time
from pathlib import Path

from dfisim.cli import run
from dfisim.presets import PRESET_NAMES, preset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", default=[],
                        help=f"presets to run (default: all of {', '.join(PRESET_NAMES)})")
    parser.add_argument("-o", "--output", default="out", help="output directory")
    args = parser.parse_args(argv)

    names = args.names or list(PRESET_NAMES)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    status = 0
    for name in names:
        t0 = time.perf_counter()
        code = run(preset(name), out_dir / f"{name}.csv")
        dt = time.perf_counter() - t0
        print(f"{name}: {'ok' if code == 0 else 'FAILED'} ({dt:.1f} s)")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
