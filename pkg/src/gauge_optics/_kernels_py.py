"""Reference numpy implementations of the compiled kernels."""
from __future__ import annotations

import numpy as np


def apply_potential(f, g, e11, e12, e21, e22, weight=None):
    """In place: (f, g) <- weight * E @ (f, g) at every grid point."""
    a = f.copy()
    np.multiply(e11, a, out=f)
    f += e12 * g
    g *= e22
    g += e21 * a
    if weight is not None:
        f *= weight
        g *= weight


def ordered_product(factors):
    """F[n-1] @ ... @ F[1] @ F[0] for a stack of 2x2 matrices."""
    w = np.eye(2, dtype=np.complex128)
    for m in factors:
        w = m @ w
    return w
