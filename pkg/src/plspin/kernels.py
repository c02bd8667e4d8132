"""Kernel backend selection.

The compiled module ``plspin._kernels`` is used when importable; otherwise
the pure-Python module ``plspin._kernels_py`` is used.  Setting the
environment variable ``PLSPIN_PURE_PYTHON=1`` forces the fallback.
``BACKEND`` names the active implementation.
"""
import os

from . import _kernels_py

python_backend = _kernels_py

compiled_backend = None
if os.environ.get("PLSPIN_PURE_PYTHON") != "1":
    try:
        from . import _kernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

manin_split = _active.manin_split
r_apply = _active.r_apply
zeta_solve = _active.zeta_solve
zeta_solve_batch = _active.zeta_solve_batch
rs_bplus = _active.rs_bplus
rs_bplus_batch = _active.rs_bplus_batch
rs_log_table = _active.rs_log_table
rs_theta = _active.rs_theta
rs_momenta = _active.rs_momenta
rs_hamiltonians = _active.rs_hamiltonians
sutherland_potential = _active.sutherland_potential

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "manin_split",
    "r_apply",
    "zeta_solve",
    "zeta_solve_batch",
    "rs_bplus",
    "rs_bplus_batch",
    "rs_log_table",
    "rs_theta",
    "rs_momenta",
    "rs_hamiltonians",
    "sutherland_potential",
]
