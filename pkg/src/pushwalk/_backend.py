"""Pick the kernel implementation at import time.

Set ``PUSHWALK_BACKEND=python`` to force the pure-Python fallback, or
``PUSHWALK_BACKEND=compiled`` to fail loudly when the extension is missing.
"""
import os

from . import _fallback

fallback = _fallback

_choice = os.environ.get("PUSHWALK_BACKEND", "auto").lower()

compiled = None
if _choice != "python":
    try:
        from . import _kernels as compiled
    except ImportError:
        if _choice == "compiled":
            raise
        compiled = None

kernels = compiled if compiled is not None else _fallback
NAME = kernels.NAME
