"""Kernel backend selection.

The compiled extension (_native, Cython) is preferred when importable; the
pure-numpy twin (_reference) is the fallback.  Set CDPRSIM_KERNELS=python
or CDPRSIM_KERNELS=native to force a backend; forcing "native" raises if
the extension was not built.
"""

import os

from . import _reference

_requested = os.environ.get("CDPRSIM_KERNELS", "").strip().lower()

if _requested == "python":
    _impl = _reference
elif _requested == "native":
    from . import _native as _impl
elif _requested:
    raise ValueError(f"CDPRSIM_KERNELS must be 'native' or 'python', got {_requested!r}")
else:
    try:
        from . import _native as _impl
    except ImportError:
        _impl = _reference

BACKEND = _impl.BACKEND

rotation_xyz = _impl.rotation_xyz
euler_rate_matrix = _impl.euler_rate_matrix
cable_vectors = _impl.cable_vectors
cable_lengths = _impl.cable_lengths
lengths_and_jacobian = _impl.lengths_and_jacobian
net_torque = _impl.net_torque


def available_backends():
    """Map of importable backend name -> module (for tests and benchmarks)."""
    backends = {"python": _reference}
    try:
        from . import _native

        backends["native"] = _native
    except ImportError:
        pass
    return backends
