#!/usr/bin/env python3
"""Rank the pair interactions at the working separation and write forces.csv.

Any extra arguments are passed through to the 'forces' subcommand.
"""

import sys

from cotrap.cli import main

if __name__ == "__main__":
    argv = ["forces", "--separation-um", "20"] + sys.argv[1:]
    sys.exit(main(argv))
