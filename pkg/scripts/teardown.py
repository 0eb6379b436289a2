#!/usr/bin/env python3
"""Teardown script for the MongeLab working directory"""

import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.core.config import settings  # noqa: E402


def teardown(remove_runs=False):
    """Remove logs, and run outputs when asked, for a fresh start"""

    logs_path = settings.get_log_dir()
    if logs_path.exists():
        shutil.rmtree(logs_path)
        print(f"Cleared {logs_path}")

    if remove_runs:
        runs_path = settings.get_output_dir()
        if runs_path.exists():
            shutil.rmtree(runs_path)
            print(f"Cleared {runs_path}")

    print("Teardown complete")


if __name__ == "__main__":
    teardown(remove_runs="--runs" in sys.argv)
