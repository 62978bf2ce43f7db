"""Dynamics kernel backend selection.

The hot inner loop of the simulator (mass matrix assembly, bias/gravity
vectors, RK4 stepping of the 3-link chain) is available in two
implementations with identical semantics:

- ``_core_c``: compiled Cython extension
- ``_core_py``: pure-numpy fallback

The compiled backend is used when importable; setting the environment
variable ``DECSIM_PURE_PYTHON=1`` forces the fallback. ``backend_name``
reports which one is active.
"""

import os

if os.environ.get("DECSIM_PURE_PYTHON"):
    from . import _core_py as core

    backend_name = "python"
else:
    try:
        from . import _core_c as core  # type: ignore[attr-defined]

        backend_name = "cython"
    except ImportError:  # extension not built
        from . import _core_py as core

        backend_name = "python"

__all__ = ["core", "backend_name"]
