"""Kernel backend selection.

The compiled extension (`gradmcmc._kernels`, built from `_kernels.pyx`) is
preferred; the numpy fallback is used when it is absent or when the
environment variable GRADMCMC_PURE_PYTHON is set to a non-empty value.
"""
import os

if os.environ.get("GRADMCMC_PURE_PYTHON"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"
