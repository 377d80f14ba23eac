"""Wigner small-d matrix at pi/2 for arbitrary spin length.

The rotation kernel only ever needs d(pi/2): a rotation by alpha about an
equatorial axis factors into z-phases sandwiched between two pi/2 frame
changes (see dicke.rotate). Direct factorial sums overflow long before
N = 500, so the matrix is built column by column from a three-term
recursion seeded in log space.
"""

from functools import lru_cache

import numpy as np
from scipy.special import gammaln


@lru_cache(maxsize=32)
def pi_half_matrix(n_atoms: int) -> np.ndarray:
    """d^j_{m,m'}(pi/2) for j = n_atoms/2, rows m = j..-j, cols m' = j..-j.

    Returned array is cached and marked read-only; callers must not mutate.
    """
    j = 0.5 * n_atoms
    dim = n_atoms + 1
    m = j - np.arange(dim)
    delta = np.zeros((dim, dim))

    # seed column m' = j: binomial amplitudes of the rotated stretched state,
    # evaluated in log space so the entries survive j ~ 500
    k = np.arange(dim)
    logc = 0.5 * (gammaln(n_atoms + 1) - gammaln(k + 1) - gammaln(n_atoms - k + 1))
    delta[:, 0] = np.exp(logc - j * np.log(2.0))

    # recurse m' downward from the edge: stable because entries grow toward
    # the bulk; go only to m' = 0 (or 1/2) and mirror the rest
    ncols = dim // 2 + 1 if dim % 2 else dim // 2
    for col in range(1, ncols):
        mp = j - (col - 1)
        cminus = np.sqrt((j + mp) * (j - mp + 1))
        cplus = np.sqrt((j - mp) * (j + mp + 1))
        prev2 = delta[:, col - 2] if col >= 2 else np.zeros(dim)
        delta[:, col] = (-2.0 * m * delta[:, col - 1] - cplus * prev2) / cminus

    # mirror m' < 0 via d_{-m,-m'} = (-1)^{m-m'} d_{m,m'}
    for col in range(ncols, dim):
        mp = j - col
        src = dim - 1 - col
        signs = (-1.0) ** (np.abs(m - mp))
        delta[:, col] = signs * delta[::-1, src]

    delta.setflags(write=False)
    return delta
