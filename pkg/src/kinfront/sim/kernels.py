"""Stepping-kernel backend selection.

The compiled Cython kernel is preferred when the extension built; the
pure-numpy lane is the fallback. Both expose the same `strang_step`
signature. `BACKEND` names the lane selected at import time and
`get_backend(name)` returns a specific lane for benchmarking and
equivalence tests.
"""

from . import _kernels_py

try:
    from . import _kernels  # compiled extension

    _default = _kernels
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None
    _default = _kernels_py

BACKEND = _default.BACKEND
strang_step = _default.strang_step


def available_backends():
    names = ["python"]
    if _kernels is not None:
        names.insert(0, "cython")
    return names


def get_backend(name):
    """Return the kernel module for 'python' or 'cython' (None if unbuilt)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        return _kernels
    raise ValueError("unknown kernel backend %r" % (name,))
