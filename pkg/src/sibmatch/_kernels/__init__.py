"""Permutation kernels with a compiled fast path.

At import time the Cython extension ``_speedups`` is preferred; if it is
missing (no compiler at install time) or ``SIBMATCH_PURE_PYTHON=1`` is
set, the pure-Python ``_pyimpl`` module is used.  ``BACKEND`` records
which one is active.  Both expose:

    decode_insertions(displacements) -> list[int]
    count_inversions(seq) -> int
"""

import os

if os.environ.get("SIBMATCH_PURE_PYTHON") == "1":
    from sibmatch._kernels._pyimpl import count_inversions, decode_insertions

    BACKEND = "python"
else:
    try:
        from sibmatch._kernels._speedups import (  # type: ignore[no-redef]
            count_inversions,
            decode_insertions,
        )

        BACKEND = "compiled"
    except ImportError:
        from sibmatch._kernels._pyimpl import (  # type: ignore[no-redef]
            count_inversions,
            decode_insertions,
        )

        BACKEND = "python"

__all__ = ["BACKEND", "count_inversions", "decode_insertions"]
