"""Hot-loop kernels with import-time backend selection.

The compiled Cython stepper is preferred; environments without a compiler
fall back to the NumPy implementation with identical semantics.
"""
from __future__ import annotations

try:
    from ._master_cy import rk4_steps  # type: ignore[attr-defined]
    backend = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from ._master_np import rk4_steps
    backend = "numpy"

from ._master_np import rk4_steps as rk4_steps_numpy

__all__ = ["rk4_steps", "rk4_steps_numpy", "backend"]
