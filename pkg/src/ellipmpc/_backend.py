"""Select the kernel implementation at import time.

The compiled extension is preferred. Setting ``ELLIPMPC_PURE_PYTHON=1`` forces
the pure-Python kernels, which is also what happens when the extension was
not built.
"""

import importlib
import os

_FORCE_PURE = os.environ.get("ELLIPMPC_PURE_PYTHON", "").strip() not in ("", "0")


def load(name):
    """Return the kernel module ``"cython"`` or ``"python"``."""
    if name == "cython":
        return importlib.import_module("ellipmpc._kernels")
    if name == "python":
        return importlib.import_module("ellipmpc._kernels_py")
    raise ValueError(f"unknown backend {name!r}")


def available():
    names = ["python"]
    try:
        load("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if _FORCE_PURE:
    kernels = load("python")
    BACKEND = "python"
else:
    try:
        kernels = load("cython")
        BACKEND = "cython"
    except ImportError:
        kernels = load("python")
        BACKEND = "python"
