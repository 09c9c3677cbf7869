"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``LISTIDENT_PURE=1`` to
force the pure-Python fallback. Index arithmetic that overflows 64 bits in the
compiled path is retried in Python transparently.
"""
from __future__ import annotations

import os

from . import _kernels_py as py

INFINITE = py.INFINITE

compiled = None
if os.environ.get("LISTIDENT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

BACKEND = "cython" if compiled is not None else "python"


def backends():
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    out = {"python": py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out


def _k(k_max):
    return INFINITE if k_max is None else k_max


if compiled is not None:

    def rank_exclusion(positions, k_max):
        try:
            return compiled.rank_exclusion(positions, _k(k_max))
        except OverflowError:
            return py.rank_exclusion(positions, _k(k_max))

    def unrank_exclusion(index, k_max):
        try:
            return compiled.unrank_exclusion(index, _k(k_max))
        except OverflowError:
            return py.unrank_exclusion(index, _k(k_max))

    def min_hitting_subset(members, need_masks, cap):
        try:
            return compiled.min_hitting_subset(members, need_masks, cap)
        except OverflowError:
            return py.min_hitting_subset(members, need_masks, cap)

    extract_pair_bits = compiled.extract_pair_bits
    run_counts = compiled.run_counts

else:

    def rank_exclusion(positions, k_max):
        return py.rank_exclusion(positions, _k(k_max))

    def unrank_exclusion(index, k_max):
        return py.unrank_exclusion(index, _k(k_max))

    min_hitting_subset = py.min_hitting_subset
    extract_pair_bits = py.extract_pair_bits
    run_counts = py.run_counts
