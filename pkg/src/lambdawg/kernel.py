"""Select the method-of-steps kernel: compiled if importable, else pure Python.

Set ``LAMBDAWG_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernel_py

BACKEND = "python"
integrate_linear_dde = _kernel_py.integrate_linear_dde

if os.environ.get("LAMBDAWG_PURE_PYTHON") != "1":
    try:
        from . import _ckernel
    except ImportError:  # extension not built
        pass
    else:
        integrate_linear_dde = _ckernel.integrate_linear_dde
        BACKEND = "cython"

python_integrate_linear_dde = _kernel_py.integrate_linear_dde

evolve_modes_rk4 = _kernel_py.evolve_modes_rk4
if BACKEND == "cython":
    evolve_modes_rk4 = _ckernel.evolve_modes_rk4
python_evolve_modes_rk4 = _kernel_py.evolve_modes_rk4
