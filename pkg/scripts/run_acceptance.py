#!/usr/bin/env python3
"""Reproduce the full acceptance run and save the transcript.

Thin wrapper over pytest so the gate can be rerun outside a test harness,
with the verbose transcript mirrored to a file for archiving.
"""

import argparse
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--all", action="store_true",
        help="run the whole test suite, not just the acceptance gates",
    )
    ap.add_argument(
        "--transcript", type=pathlib.Path, default=None,
        help="also write the pytest output to this file",
    )
    args = ap.parse_args(argv)

    target = "tests" if args.all else "tests/test_acceptance.py"
    cmd = [sys.executable, "-m", "pytest", target, "-v"]
    proc = subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True)
    out = proc.stdout + proc.stderr
    sys.stdout.write(out)
    if args.transcript is not None:
        args.transcript.write_text(out)
    return proc.returncode


if __name__ == "__main__":
    raise SystemExit(main())
