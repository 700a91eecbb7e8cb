#!/usr/bin/env python3
"""Chart the (a, q) stability region of the slow tone on a 50 x 50 grid and
write stability_scan.csv; the printed report covers the working point.

Any extra arguments are passed through to the 'stability' subcommand.
"""

import sys

from cotrap.cli import main

if __name__ == "__main__":
    argv = ["stability", "--particle", "np",
            "--scan", "a=-0.05:0.05", "q=0:1.2", "n=50"] + sys.argv[1:]
    sys.exit(main(argv))
