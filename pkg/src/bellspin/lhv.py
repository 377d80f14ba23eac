"""Classical bound of the symmetric Bell inequality by exact enumeration.

Every party i holds two precomputed outcomes (e_i, f_i) in {+1, -1}, one per
measurement setting; a shared hidden variable fixes the full table. The
inequality value is linear in the strategy's correlators, so the minimum
over all probabilistic (mixed) local models is attained at a deterministic
vertex of the polytope; enumerating deterministic strategies is sufficient.

The inequality is permutation symmetric, so a deterministic strategy only
matters through the counts (n_pp, n_pm, n_mp, n_mm) of parties holding each
of the four outcome pairs. That reduces 4^N assignments to the
(N+3 choose 3) count tuples walked by classical_min; brute_force_min keeps
the exponential path as an independent cross-check for small N. Everything
is integer arithmetic, so returned minima are exact.

The outer count index is embarrassingly parallel; the single-process
vectorized sweep below already handles N ~ 500 in seconds.
"""

from dataclasses import dataclass

import numpy as np

_BIG = np.int64(2**62)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Counts (n_pp, n_pm, n_mp, n_mm) of parties with outcomes (e, f)."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 4:
            raise ValueError("counts must have four entries")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        if sum(counts) < 1:
            raise ValueError("counts must sum to at least 1")
        object.__setattr__(self, "counts", counts)

    @property
    def n_atoms(self) -> int:
        return sum(self.counts)

    def to_json_dict(self) -> dict:
        n_pp, n_pm, n_mp, n_mm = self.counts
        return {"n_pp": n_pp, "n_pm": n_pm, "n_mp": n_mp, "n_mm": n_mm}


def strategy_value(s: DeterministicStrategy) -> int:
    """Inequality value 2E + (E^2-N)/2 + (EF-X) + (F^2-N)/2 + 2N, exactly.

    E = sum e_i, F = sum f_i, X = sum e_i f_i. The half-integer terms pair
    up to an even number (E and F have N's parity), so the result is an int.
    """
    n_pp, n_pm, n_mp, n_mm = s.counts
    n = n_pp + n_pm + n_mp + n_mm
    e = n_pp + n_pm - n_mp - n_mm
    f = n_pp - n_pm + n_mp - n_mm
    x = n_pp - n_pm - n_mp + n_mm
    doubled = 4 * e + (e * e - n) + 2 * (e * f - x) + (f * f - n) + 4 * n
    assert doubled % 2 == 0
    return doubled // 2


def classical_argmin(n_atoms: int):
    """(minimum value, attaining DeterministicStrategy) over all count tuples."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    n = n_atoms
    best_val = None
    best_counts = None
    for n_pp in range(n + 1):
        rem = n - n_pp
        idx = np.arange(rem + 1, dtype=np.int64)
        pm, mp = np.meshgrid(idx, idx, indexing="ij")
        mm = rem - pm - mp
        valid = mm >= 0
        e = n_pp + pm - mp - mm
        f = n_pp - pm + mp - mm
        x = n_pp - pm - mp + mm
        d = n_pp - mm
        # same value as strategy_value: (E+F)^2/2 collapses the two half terms
        val = 2 * e + 2 * d * d - x + n
        val = np.where(valid, val, _BIG)
        i = int(np.argmin(val))
        v = int(val.flat[i])
        if best_val is None or v < best_val:
            best_val = v
            r, c = divmod(i, rem + 1)
            best_counts = (n_pp, int(r), int(c), int(rem - r - c))
    return best_val, DeterministicStrategy(best_counts)


def classical_min(n_atoms: int) -> int:
    """Minimum inequality value over all local deterministic strategies."""
    return classical_argmin(n_atoms)[0]


def brute_force_min(n_atoms: int) -> int:
    """Same minimum by enumerating all 4^N assignments party by party.

    Independent of the count-tuple reduction; limited to N <= 10.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if n_atoms > 10:
        raise ValueError("brute_force_min is limited to n_atoms <= 10")
    n = n_atoms
    codes = np.arange(4**n, dtype=np.int64)
    e_tot = np.zeros(codes.shape, dtype=np.int64)
    f_tot = np.zeros(codes.shape, dtype=np.int64)
    x_tot = np.zeros(codes.shape, dtype=np.int64)
    for site in range(n):
        digit = (codes >> (2 * site)) & 3
        e = 1 - 2 * ((digit >> 1) & 1)
        f = 1 - 2 * (digit & 1)
        e_tot += e
        f_tot += f
        x_tot += e * f
    doubled = 4 * e_tot + (e_tot * e_tot - n) + 2 * (e_tot * f_tot - x_tot) + (f_tot * f_tot - n) + 4 * n
    assert int(doubled.min()) % 2 == 0
    return int(doubled.min()) // 2
