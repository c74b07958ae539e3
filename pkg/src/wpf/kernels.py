"""Backend selection for the hot loops.

The compiled Cython module is used when importable; setting the environment
variable ``WPF_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

from wpf import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("WPF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from wpf import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def closure(arities, tables, size, seeds, target=-1, budget=-1):
    return _impl.closure(arities, tables, size, seeds, target, budget)


def permute_registers(amps, perm, shifts, widths):
    return _impl.permute_registers(amps, perm, shifts, widths)


def backends():
    """Return the available kernel implementations keyed by name."""
    out = {"python": _pykernels}
    try:
        from wpf import _kernels

        out["cython"] = _kernels
    except ImportError:  # pragma: no cover
        pass
    return out
