"""Console entry point.

CATMIX_THREADS caps numerical parallelism; the BLAS/FFT thread env vars must
be pinned before numpy is first imported, hence this shim.
"""

import os
import sys


def main() -> None:
    cap = os.environ.get("CATMIX_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                    "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)
    from .cli import main as cli_main
    sys.exit(cli_main())
