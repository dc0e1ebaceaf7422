"""Hot scatter-accumulate kernels for message passing.

Two interchangeable backends: numba ``@njit`` loops (default when numba
imports cleanly) and pure-numpy ``np.add.at`` fallbacks. Set the
environment variable ``CLAKG_NUMBA=0`` to force the numpy path; set
``CLAKG_NUMBA=1`` to insist on numba (raising if it is unavailable).
``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    _HAS_NUMBA = False

_BACKEND: str | None = None


def _resolve_backend() -> str:
    flag = os.environ.get("CLAKG_NUMBA", "").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return "numpy"
    if flag in ("1", "true", "yes", "on"):
        if not _HAS_NUMBA:
            raise RuntimeError("CLAKG_NUMBA=1 but numba is not importable")
        return "numba"
    return "numba" if _HAS_NUMBA else "numpy"


def active_backend() -> str:
    """Backend currently in use: ``"numba"`` or ``"numpy"``."""
    global _BACKEND
    if _BACKEND is None:
        _BACKEND = _resolve_backend()
    return _BACKEND


def set_backend(name: str | None) -> None:
    """Override backend selection (``None`` re-reads the env flag)."""
    global _BACKEND
    if name not in (None, "numpy", "numba"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    _BACKEND = name


# --- numpy fallbacks --------------------------------------------------------

def _scatter_rows_numpy(out, idx, rows):
    np.add.at(out, idx, rows)


def _gather_scale_scatter_numpy(out, dst, src, coef, values):
    np.add.at(out, dst, coef[:, None] * values[src])


# --- numba kernels ----------------------------------------------------------

if _HAS_NUMBA:

    @njit(cache=True)
    def _scatter_rows_numba(out, idx, rows):  # pragma: no cover - jitted
        for k in range(idx.shape[0]):
            i = idx[k]
            for d in range(out.shape[1]):
                out[i, d] += rows[k, d]

    @njit(cache=True)
    def _gather_scale_scatter_numba(out, dst, src, coef, values):  # pragma: no cover - jitted
        for k in range(dst.shape[0]):
            i = dst[k]
            j = src[k]
            c = coef[k]
            for d in range(out.shape[1]):
                out[i, d] += c * values[j, d]


# --- public dispatchers -----------------------------------------------------

def scatter_rows(out: np.ndarray, idx: np.ndarray, rows: np.ndarray) -> None:
    """``out[idx[k]] += rows[k]`` with repeated indices accumulated."""
    if active_backend() == "numba":
        _scatter_rows_numba(out, idx, rows)
    else:
        _scatter_rows_numpy(out, idx, rows)


def gather_scale_scatter(
    out: np.ndarray,
    dst: np.ndarray,
    src: np.ndarray,
    coef: np.ndarray,
    values: np.ndarray,
) -> None:
    """``out[dst[k]] += coef[k] * values[src[k]]`` over all k."""
    if active_backend() == "numba":
        _gather_scale_scatter_numba(out, dst, src, coef, values)
    else:
        _gather_scale_scatter_numpy(out, dst, src, coef, values)
