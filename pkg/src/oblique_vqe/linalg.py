"""Dense complex linear algebra kernel.

Hermitian eigendecomposition, SVD and generalized eigenproblems are thin,
validated wrappers around LAPACK (via numpy). The constructive pieces that
the rest of the package is built on live here too: the strict-majorization
test and the plane-rotation routine that pins the diagonal of a Hermitian
matrix to the all-ones vector (the constructive counterpart of the
Schur-Horn theorem).

Matrix file format (JSON): {"rows": n, "cols": p, "real": [[...]], "imag": [[...]]}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedMetric, InvalidInput, MajorizationError

# Relative threshold below which the Gram matrix of a generalized
# eigenproblem is rejected as numerically singular.
GEIG_CONDITION_THRESHOLD = 1e-10


def _check_finite(a, name="matrix"):
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise InvalidInput(f"{name} contains non-finite entries")


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2-D complex ndarray, rejecting non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise InvalidInput(f"expected a 2-D array, got ndim={m.ndim}")
    _check_finite(m)
    return m


@dataclass(frozen=True)
class HermitianOperator:
    """Validated dense Hermitian matrix; the operator whose low eigenpairs are sought."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, a, hermiticity_tol: float = 1e-8) -> "HermitianOperator":
        """Symmetrize and wrap ``a``; reject grossly non-Hermitian input."""
        m = as_complex_matrix(a)
        if m.shape[0] != m.shape[1]:
            raise InvalidInput(f"operator must be square, got {m.shape}")
        scale = np.linalg.norm(m)
        if scale > 0 and np.linalg.norm(m - m.conj().T) > hermiticity_tol * scale:
            raise InvalidInput("matrix is not Hermitian within tolerance")
        sym = 0.5 * (m + m.conj().T)
        sym.setflags(write=False)
        return cls(sym)

    @classmethod
    def from_file(cls, path) -> "HermitianOperator":
        return cls.from_matrix(load_matrix(path))

    def is_negative_definite(self, tol: float = 0.0) -> bool:
        """Verified, never assumed: checks the largest eigenvalue."""
        return bool(np.linalg.eigvalsh(self.matrix)[-1] < -tol)


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the matching unitary eigenvector matrix."""

    values: np.ndarray
    vectors: np.ndarray


def operator_matrix(a) -> np.ndarray:
    """Accept either a HermitianOperator or a bare array and return the array."""
    return a.matrix if isinstance(a, HermitianOperator) else as_complex_matrix(a)


def eigh(a) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Ties keep LAPACK's deterministic ordering; repeated calls on the same
    input give identical output.
    """
    m = a.matrix if isinstance(a, HermitianOperator) else as_complex_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise InvalidInput(f"eigh expects a square matrix, got {m.shape}")
    values, vectors = np.linalg.eigh(m)
    return EigenDecomposition(values=values, vectors=vectors)


def svd(x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced SVD ``x = u @ diag(s) @ vh`` with nonnegative descending ``s``."""
    m = as_complex_matrix(x)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return u, s, vh


def generalized_eigh(b, c) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``b r = c r diag(values)`` for Hermitian ``b`` and positive definite ``c``.

    Implemented by Cholesky whitening: with ``c = L L*`` the problem reduces
    to an ordinary Hermitian eigenproblem for ``L^-1 b L^-*``. Returns
    ascending values and eigenvectors normalized so that ``r* c r = I``.

    Raises IllConditionedMetric if ``c`` is indefinite or has
    ``lambda_min < 1e-10 * lambda_max``: a Rayleigh-Ritz step on
    near-collinear states carries no information.
    """
    bm = as_complex_matrix(b)
    cm = as_complex_matrix(c)
    if bm.shape != cm.shape or bm.shape[0] != bm.shape[1]:
        raise InvalidInput(f"incompatible shapes {bm.shape} and {cm.shape}")
    bm = 0.5 * (bm + bm.conj().T)
    cm = 0.5 * (cm + cm.conj().T)
    c_eigs = np.linalg.eigvalsh(cm)
    if c_eigs[0] <= 0 or c_eigs[0] < GEIG_CONDITION_THRESHOLD * c_eigs[-1]:
        raise IllConditionedMetric(
            f"metric eigenvalues in [{c_eigs[0]:.3e}, {c_eigs[-1]:.3e}] below threshold"
        )
    ell = np.linalg.cholesky(cm)
    # whiten: solve L Y = B, then L Z* = Y* so Z = L^-1 B L^-*
    y = np.linalg.solve(ell, bm)
    z = np.linalg.solve(ell, y.conj().T).conj().T
    z = 0.5 * (z + z.conj().T)
    values, w = np.linalg.eigh(z)
    r = np.linalg.solve(ell.conj().T, w)
    return values, r


def is_strictly_majorized_by_ones(s) -> bool:
    """True iff ``s`` is strictly majorized by the all-ones vector.

    Requires every sorted partial sum to sit strictly below its index count
    while the total matches the length (within 1e-10); the all-ones vector
    itself is excluded.
    """
    v = np.asarray(s, dtype=float)
    if v.ndim != 1:
        raise InvalidInput("expected a 1-D real vector")
    m = v.size
    if m == 0:
        return False
    if np.allclose(v, 1.0, rtol=0.0, atol=1e-12):
        return False
    if abs(v.sum() - m) > 1e-10:
        return False
    partial = np.cumsum(np.sort(v))
    return bool(np.all(partial[:-1] < np.arange(1, m)))


def _solve_pinning_rotation(a, b, z):
    """Angle pair for a plane rotation sending diagonal entry ``a`` to exactly 1.

    The rotated entry traces a*cos^2(t) + b*sin^2(t) + |z|*sin(2t); a value
    of 1 between a and b guarantees a crossing. Returns (cos t, sin t) with
    the smaller admissible rotation.
    """
    mean = 0.5 * (a + b)
    alpha = 0.5 * (a - b)
    beta = abs(z)
    amp = np.hypot(alpha, beta)
    kappa = np.clip((1.0 - mean) / amp, -1.0, 1.0)
    chi = np.arctan2(beta, alpha)
    w = np.arccos(kappa)
    candidates = [u for u in (chi - w, chi + w) if -1e-14 <= u <= np.pi + 1e-14]
    if not candidates:  # unreachable for 1 strictly between a and b; guard roundoff
        candidates = [chi - w, chi + w]
    u = min(candidates, key=abs)
    u = min(max(u, 0.0), np.pi)
    t = 0.5 * u
    return np.cos(t), np.sin(t)


def _pin_diagonal_to_ones(m) -> np.ndarray:
    """Unitary ``g`` with ``diag(g @ m @ g*) = 1`` for Hermitian ``m`` of trace p.

    Repeatedly rotates in the plane of the largest and smallest diagonal
    entries, pinning whichever is closer to 1 exactly; at most p-1 rotations.
    """
    m = np.array(m, dtype=complex)
    p = m.shape[0]
    g = np.eye(p, dtype=complex)
    for _ in range(p - 1):
        d = np.real(np.diag(m)).copy()
        hi = int(np.argmax(d))
        lo = int(np.argmin(d))
        if d[hi] - 1.0 <= 1e-13 and 1.0 - d[lo] <= 1e-13:
            break
        # pin the index nearer to 1; the solver is phrased for the first index
        if d[hi] - 1.0 <= 1.0 - d[lo]:
            i, j = hi, lo
        else:
            i, j = lo, hi
        z = m[i, j]
        c, sig = _solve_pinning_rotation(d[i], d[j], z)
        phase = np.exp(-1j * np.angle(m[j, i])) if abs(z) > 0 else 1.0
        s = sig * phase
        rot_i = c * m[i, :] + s * m[j, :]
        rot_j = -np.conj(s) * m[i, :] + c * m[j, :]
        m[i, :], m[j, :] = rot_i, rot_j
        col_i = c * m[:, i] + np.conj(s) * m[:, j]
        col_j = -s * m[:, i] + c * m[:, j]
        m[:, i], m[:, j] = col_i, col_j
        m[i, i] = 1.0  # pinned exactly by construction of the rotation
        gi = c * g[i, :] + s * g[j, :]
        gj = -np.conj(s) * g[i, :] + c * g[j, :]
        g[i, :], g[j, :] = gi, gj
    return g


def schur_horn_unit_diag(s) -> np.ndarray:
    """Unitary ``v`` with ``diag(v @ diag(s) @ v*) = 1`` for admissible ``s``.

    ``s`` must be nonnegative with sum p and either equal to the all-ones
    vector or strictly majorized by it (automatic for any other admissible
    profile). Built from at most p-1 exact plane rotations.
    """
    v = np.asarray(s, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInput("expected a nonempty 1-D real vector")
    p = v.size
    if np.any(v < -1e-12):
        raise MajorizationError("negative entries in singular value profile")
    if abs(v.sum() - p) > 1e-10:
        raise MajorizationError(f"profile sums to {v.sum():.12f}, expected {p}")
    if not (np.allclose(v, 1.0, rtol=0.0, atol=1e-12) or is_strictly_majorized_by_ones(v)):
        raise MajorizationError("profile is not majorized by the all-ones vector")
    v = np.clip(v, 0.0, None)
    v = v * (p / v.sum())  # land the trace exactly on p before pinning
    return _pin_diagonal_to_ones(np.diag(v).astype(complex))


def load_matrix(path) -> np.ndarray:
    """Read a dense complex matrix from the JSON file format."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot parse matrix file {path}: {exc}") from exc
    try:
        rows, cols = int(payload["rows"]), int(payload["cols"])
        real = np.asarray(payload["real"], dtype=float)
        imag = np.asarray(payload.get("imag", np.zeros_like(real)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed matrix file {path}: {exc}") from exc
    if real.shape != (rows, cols) or imag.shape != (rows, cols):
        raise InvalidInput(
            f"matrix file {path} declares {rows}x{cols} but payload is {real.shape}"
        )
    m = real + 1j * imag
    _check_finite(m, f"matrix file {path}")
    return m


def save_matrix(path, a) -> None:
    """Write a dense complex matrix in the JSON file format."""
    m = as_complex_matrix(a)
    payload = {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "real": m.real.tolist(),
        "imag": m.imag.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
