"""Select the compiled kernels when built, else the pure-Python fallback.

Set ``BANIPA_PURE=1`` to force the fallback.
"""
import os

from banipa import _fallback

if os.environ.get("BANIPA_PURE"):
    _impl = _fallback
else:
    try:
        from banipa import _core as _impl
    except ImportError:
        _impl = _fallback

COMPILED = _impl is not _fallback
char_runs = _impl.char_runs
classify_code = _impl.classify_code
edit_ops = _impl.edit_ops
