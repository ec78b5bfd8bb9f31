"""Hot-kernel backends: compiled core with a pure-numpy fallback.

The backend is selected once at import time: the compiled extension if it
built, else the numpy fallback. ``TELEPLAN_KERNEL=numpy`` or
``TELEPLAN_KERNEL=cython`` forces one (forcing cython raises if the
extension is missing).

When nothing is forced, the dispatchers route each kernel to whichever
implementation ``benchmarks/bench_kernels.py`` showed to be faster: the
128-wide MLP layers are BLAS matmuls, which OpenBLAS wins at every batch
size measured, so the MLP kernels default to the numpy path even when the
extension is available; the RSRP field kernel avoids the large broadcast
temporaries and goes to the compiled core. The compiled MLP remains a
BLAS-independent cross-check of the numerics (see tests/test_kernels.py).
"""

import os

from . import numpy_backend

try:
    from . import _core  # type: ignore[attr-defined]
except ImportError:
    _core = None

_requested = os.environ.get("TELEPLAN_KERNEL", "").strip().lower()
if _requested not in ("", "numpy", "cython"):
    raise ImportError(f"TELEPLAN_KERNEL must be 'numpy' or 'cython', got {_requested!r}")
if _requested == "cython" and _core is None:
    raise ImportError("TELEPLAN_KERNEL=cython but the compiled core is not built")

if _requested == "numpy" or _core is None:
    _backend = numpy_backend
else:
    _backend = _core

BACKEND_NAME = _backend.NAME
HAVE_COMPILED = _core is not None
_FORCED = _requested != ""

# Benchmark-derived routing (see module docstring): None means "never use
# the compiled path for the MLP"; a row count would mean "compiled below it".
MLP_COMPILED_MAX_ROWS = None


def available_backends():
    names = ["numpy"]
    if _core is not None:
        names.append("cython")
    return names


def get_backend(name):
    if name == "numpy":
        return numpy_backend
    if name == "cython":
        if _core is None:
            raise ImportError("compiled kernel core is not built")
        return _core
    raise ValueError(f"unknown kernel backend {name!r}")


def _mlp_impl(rows: int):
    if _FORCED or _backend is numpy_backend:
        return _backend
    if MLP_COMPILED_MAX_ROWS is not None and rows <= MLP_COMPILED_MAX_ROWS:
        return _core
    return numpy_backend


def mlp_forward(x, *params):
    return _mlp_impl(x.shape[0]).mlp_forward(x, *params)


def mlp_logits(x, *params):
    return _mlp_impl(x.shape[0]).mlp_logits(x, *params)


def mlp_backward(x, *args):
    return _mlp_impl(x.shape[0]).mlp_backward(x, *args)


def rsrp_field(cell_x, cell_y, *args):
    return _backend.rsrp_field(cell_x, cell_y, *args)
