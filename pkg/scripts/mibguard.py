#!/usr/bin/env python3
"""
Script to run the mibguard command line from a source checkout
"""

import sys
from pathlib import Path

SCRIPTS_DIR = Path(__file__).parent
sys.path.append(str(SCRIPTS_DIR.parent))

# pylint: disable=wrong-import-position
from mibguard.cli import main

# pylint: enable=wrong-import-position


if __name__ == "__main__":
    main()
