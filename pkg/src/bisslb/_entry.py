"""Console-script shim.

Applies the BISSLB_THREADS cap to the BLAS thread-count variables before
any numerical module loads, then defers to the CLI.
"""

import os
import sys


def main():
    threads = os.environ.get("BISSLB_THREADS", "").strip()
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    from .cli import main as cli_main

    sys.exit(cli_main())
