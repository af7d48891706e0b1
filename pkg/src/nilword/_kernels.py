"""Compiled fiber-counting loops over contiguous ranges of the tuple index space."""

import numba
import numpy as np


@numba.njit(nogil=True, cache=True)
def count_range(mul, powt, gens, exps, k, order, start, stop, counts):
    """Add the fiber counts of tuples ``start <= t < stop`` into ``counts``.

    Tuple ``t`` is the base-``order`` expansion of ``t`` with the first
    coordinate most significant; the word is the syllable list
    ``(gens[s], exps[s])`` with exponents already reduced modulo exp(G).
    """
    digits = np.empty(max(k, 1), np.int64)
    r = start
    for i in range(k - 1, -1, -1):
        digits[i] = r % order
        r //= order
    nsyl = gens.shape[0]
    for _ in range(start, stop):
        acc = 0
        for s in range(nsyl):
            acc = mul[acc, powt[digits[gens[s]], exps[s]]]
        counts[acc] += 1
        # odometer step
        i = k - 1
        while i >= 0:
            digits[i] += 1
            if digits[i] < order:
                break
            digits[i] = 0
            i -= 1
