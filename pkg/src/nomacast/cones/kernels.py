"""Select the cone-kernel backend at import time.

The compiled extension is used when it was built; otherwise (or when
``NOMACAST_PURE_PYTHON=1`` is set) the numpy fallback is loaded.  Both
expose ``min_eig``, ``soc_jnorms``, ``nt_scaling``, ``apply_w``, ``apply_w_mat``,
``jprod``, ``jdiv`` and ``max_step`` with identical semantics.
"""
import os

from . import _kernels_py

_FUNCS = ("min_eig", "soc_jnorms", "nt_scaling", "apply_w", "apply_w_mat", "jprod", "jdiv", "max_step")


def _load(name):
    if name == "cython":
        from . import _kernels as mod
    elif name == "python":
        mod = _kernels_py
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    return mod


def use_backend(name):
    """Switch the active backend (``"cython"`` or ``"python"``) in place."""
    global BACKEND
    mod = _load(name)
    g = globals()
    for f in _FUNCS:
        g[f] = getattr(mod, f)
    BACKEND = name


BACKEND = "python"
if os.environ.get("NOMACAST_PURE_PYTHON", "") == "1":
    use_backend("python")
else:
    try:
        use_backend("cython")
    except ImportError:
        use_backend("python")


def available_backends():
    names = ["python"]
    try:
        _load("cython")
    except ImportError:
        return names
    return ["cython"] + names
