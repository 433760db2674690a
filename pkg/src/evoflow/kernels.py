"""Kernel backend selection.

The compiled extension is used when it imports; ``EVOFLOW_PURE_PYTHON=1``
forces the numpy fallback. Both backends produce bit-identical output.
"""

import os

from evoflow import _pykernels

if os.environ.get("EVOFLOW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from evoflow import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

random_bits = _impl.random_bits
matmul = _impl.matmul
jacobi_eig = _impl.jacobi_eig
nd_rank = _impl.nd_rank

__all__ = ["BACKEND", "random_bits", "matmul", "jacobi_eig", "nd_rank"]
