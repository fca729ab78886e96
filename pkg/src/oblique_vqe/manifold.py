"""Geometry of the oblique manifold: n x p complex matrices with unit-norm columns."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateColumn
from .linalg import as_complex_matrix

MEMBERSHIP_TOL = 1e-12


def is_oblique(x, tol: float = MEMBERSHIP_TOL) -> bool:
    """Check that every column of ``x`` has unit 2-norm within ``tol``."""
    m = as_complex_matrix(x)
    norms = np.linalg.norm(m, axis=0)
    return bool(np.all(np.abs(norms - 1.0) <= tol))


def retract(x) -> np.ndarray:
    """Scale each column to unit norm (metric projection onto the manifold)."""
    m = as_complex_matrix(x)
    norms = np.linalg.norm(m, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateColumn("cannot retract a zero column")
    return m / norms


def tangent_project(x, g) -> np.ndarray:
    """Project ``g`` onto the tangent space at ``x``: remove radial column components."""
    xm = as_complex_matrix(x)
    gm = as_complex_matrix(g)
    if xm.shape != gm.shape:
        raise ValueError(f"shape mismatch {xm.shape} vs {gm.shape}")
    radial = np.real(np.sum(np.conj(xm) * gm, axis=0))
    return gm - xm * radial


def random_oblique(n: int, p: int, seed: int) -> np.ndarray:
    """Columns drawn uniformly on the complex unit sphere, deterministic per seed."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    return retract(z)


def orthogonality_error(x) -> float:
    """Frobenius norm of ``x* x - I``, the orthogonality defect of the columns."""
    m = as_complex_matrix(x)
    p = m.shape[1]
    gram = m.conj().T @ m
    return float(np.linalg.norm(gram - np.eye(p)))
