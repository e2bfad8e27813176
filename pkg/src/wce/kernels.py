"""Select the compiled kernels when available, else the pure-Python ones.

Set ``WCE_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by the test that checks both implementations agree).
"""
import os

COMPILED = False
if not os.environ.get("WCE_PURE_PYTHON"):
    try:
        from wce import _kernels as _impl

        COMPILED = True
    except ImportError:  # extension not built
        _impl = None
if not COMPILED:
    from wce import _kernels_py as _impl

normalize = _impl.normalize
mulmod = _impl.mulmod
mul = _impl.mul
add = _impl.add
sub = _impl.sub
scale = _impl.scale
dot = _impl.dot

__all__ = ["COMPILED", "normalize", "mulmod", "mul", "add", "sub", "scale", "dot"]
