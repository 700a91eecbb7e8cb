#!/usr/bin/env python3
"""Sweep the conditional displacement over kick size for the two preset
charge/separation scenarios and write superpose_sweep.csv.

Any extra arguments are passed through to the 'superpose' subcommand.
"""

import sys

from cotrap.cli import main

if __name__ == "__main__":
    argv = ["superpose", "--scenario", "q300", "--scenario", "q800",
            "--kick-nm", "1:100:50"] + sys.argv[1:]
    sys.exit(main(argv))
