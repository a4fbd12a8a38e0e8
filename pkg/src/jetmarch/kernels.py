"""Kernel implementation selection.

The compiled extension is used when present; the interpreted pure-Python
twin (same source file) is the fallback.  Set ``JETMARCH_PURE_PYTHON=1``
to force the fallback, e.g. to compare the two in the benchmark.
"""

import os

from . import _kernels as pykernels

if os.environ.get("JETMARCH_PURE_PYTHON"):
    impl = pykernels
else:
    try:
        from . import _ckernels as impl  # type: ignore[no-redef]
    except ImportError:
        impl = pykernels


def available_impls():
    """(name, module) pairs of every importable kernel implementation."""
    out = [("pure", pykernels)]
    try:
        from . import _ckernels

        out.insert(0, ("compiled", _ckernels))
    except ImportError:
        pass
    return out
