"""Kernel backend selection.

The compiled extension is used whenever it imported successfully and the
input certifies as safe for its fixed-width arithmetic; anything else runs
on the pure-Python kernels.  ``PERMEX_BACKEND=pure|compiled|auto`` forces
the choice (``compiled`` raises if unusable).
"""

import os
from math import comb, factorial

from . import _pykernels
from .errors import CapacityError

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

I64_SAFE_BOUND = 1 << 62


def compiled_available() -> bool:
    return _ckernels is not None


def backend_mode() -> str:
    mode = os.environ.get("PERMEX_BACKEND", "auto").lower()
    if mode not in ("auto", "pure", "compiled"):
        raise ValueError(f"PERMEX_BACKEND must be auto|pure|compiled, got {mode!r}")
    return mode


def profile_value_bound(n: int, max_entry: int) -> int:
    """Exact upper bound on any subpermanent sum: max_m C(n,m)^2 m! max_entry^m."""
    best = 1
    for m in range(n + 1):
        v = comb(n, m) ** 2 * factorial(m) * max_entry**m
        if v > best:
            best = v
    return best


def _pick(bound: int):
    mode = backend_mode()
    if mode == "pure":
        return _pykernels
    if mode == "compiled":
        if _ckernels is None:
            raise CapacityError("PERMEX_BACKEND=compiled but the extension is not built")
        if bound >= I64_SAFE_BOUND:
            raise CapacityError("PERMEX_BACKEND=compiled but values exceed the int64 bound")
        return _ckernels
    if _ckernels is not None and bound < I64_SAFE_BOUND:
        return _ckernels
    return _pykernels


def profile_backend_name(n: int, max_entry: int) -> str:
    return _pick(profile_value_bound(n, max_entry)).BACKEND_NAME


def subperm_profile(rows, n: int, max_entry=None):
    """Profile of all subpermanent sums; dispatches on the value bound."""
    if max_entry is None:
        max_entry = max(max(row) for row in rows)
    return _pick(profile_value_bound(n, max_entry)).subperm_profile(rows, n)


def oracle_product_sums(n: int, r: int, first_lo: int = 0, first_hi=None):
    """Exact sums of perm_m * perm_m2 over a slice of permutation tuples."""
    return _pick(profile_value_bound(n, r)).oracle_product_sums(n, r, first_lo, first_hi)
