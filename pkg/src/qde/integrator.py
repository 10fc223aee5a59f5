"""Backend selection for the RK4 kernel.

The compiled extension is used when it imports; setting QDE_PURE_PYTHON
to a non-empty value forces the numpy implementation.
"""

import os

from . import _rk4_py

python_rk4 = _rk4_py.rk4_evolve
compiled_rk4 = None

if not os.environ.get("QDE_PURE_PYTHON"):
    try:
        from ._rk4 import rk4_evolve as compiled_rk4
    except ImportError:
        compiled_rk4 = None

rk4_evolve = compiled_rk4 or python_rk4
BACKEND = "compiled" if compiled_rk4 is not None else "python"
