"""Pick the compiled kernels when available, the numpy ones otherwise.

Set ``SHAPEBG_PURE_PYTHON=1`` to force the fallback (useful for benchmarks and
for checking that both backends agree).
"""
import os

from . import _fallback

if os.environ.get("SHAPEBG_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

kde_sum = _impl.kde_sum
lscv_pair_sums = _impl.lscv_pair_sums
concave_touch_dp = _impl.concave_touch_dp

__all__ = ["BACKEND", "kde_sum", "lscv_pair_sums", "concave_touch_dp"]
