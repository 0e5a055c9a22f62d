"""Tensor contraction with memoized einsum paths.

``np.einsum(..., optimize=True)`` re-derives the contraction order on
every call, which dominates the cost of the small kernels evaluated once
per stage.  Operand shapes are fixed for the lifetime of a run, so the
path is computed once per (subscripts, shapes) pair and reused.
"""

import numpy as np

_PATHS = {}


def contract(subscripts, *operands):
    """np.einsum with the greedy contraction path cached by shape."""
    key = (subscripts, tuple(op.shape for op in operands))
    path = _PATHS.get(key)
    if path is None:
        path = np.einsum_path(subscripts, *operands, optimize="greedy")[0]
        _PATHS[key] = path
    return np.einsum(subscripts, *operands, optimize=path)
