"""Constructors and verifiers for the stationary-point landscape.

Every stationary point of the smooth models decomposes into column blocks
sharing a Lagrange multiplier: each block is built from an orthonormal
basis, a closed-form singular value profile, and a right unitary factor
that places the block on the oblique manifold. This module assembles such
points from block specifications, certifies them against the first-order
equations, constructs the known escape directions at saddle points, and
classifies arbitrary points against the minimizer characterizations.

Eigenvector indices always refer to the ascending eigenvalue order of the
operator (index 0 is the algebraically smallest).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AlreadyMinimal,
    InconsistentSpec,
    InvalidInput,
    MajorizationError,
    MuTooSmall,
    SpanError,
)
from .linalg import (
    as_complex_matrix,
    eigh,
    operator_matrix,
    _pin_diagonal_to_ones,
    schur_horn_unit_diag,
)
from .models import Model

STATIONARITY_RTOL = 1e-8
CLASSIFY_TOL = 1e-6
_RANK_TOL = 1e-7


@dataclass(frozen=True)
class MixedColumn:
    """Unit combination of two eigenvectors, sqrt(w0) q_a + sqrt(w1) q_b.

    The only non-eigenvector basis column the constructive theory covers;
    it is admissible in a rank-deficient block exactly when its singular
    value comes out as sqrt(2).
    """

    indices: tuple[int, int]
    weights: tuple[float, float]

    def __post_init__(self):
        if len(self.indices) != 2 or len(self.weights) != 2:
            raise InconsistentSpec("mixed column takes two indices and two weights")
        w0, w1 = self.weights
        if w0 <= 0 or w1 <= 0 or abs(w0 + w1 - 1.0) > 1e-12:
            raise InconsistentSpec("mixed column weights must be positive and sum to 1")


@dataclass(frozen=True)
class Block:
    """One column block: size p_i, rank r_i, and a rank-sized column basis."""

    size: int
    rank: int
    eigenvector_indices: tuple[int, ...] = ()
    mixed_column: MixedColumn | None = None
    basis: np.ndarray | None = None

    def __post_init__(self):
        if self.rank < 1 or self.rank > self.size:
            raise InconsistentSpec(f"rank {self.rank} not in [1, {self.size}]")
        if self.basis is not None:
            if self.eigenvector_indices or self.mixed_column is not None:
                raise InconsistentSpec("give either an explicit basis or index lists")
        else:
            declared = len(self.eigenvector_indices) + (1 if self.mixed_column else 0)
            if declared != self.rank:
                raise InconsistentSpec(
                    f"block declares rank {self.rank} but {declared} basis columns"
                )


@dataclass(frozen=True)
class BlockSpec:
    model: Model
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if not self.blocks:
            raise InconsistentSpec("block specification is empty")
        if self.model not in (Model.QOMM, Model.QTPM):
            raise InconsistentSpec("block structure applies to the smooth models only")

    @property
    def total_columns(self) -> int:
        return sum(b.size for b in self.blocks)


@dataclass(frozen=True)
class StationaryCertificate:
    """A point, its diagonal multipliers, and the verified first-order residual."""

    x: np.ndarray
    d: np.ndarray
    residual: float


def _resolve_block_basis(block: Block, decomp) -> np.ndarray:
    """Materialize the n x r_i orthonormal basis of a block."""
    q = decomp.vectors
    n = q.shape[0]
    if block.basis is not None:
        u = as_complex_matrix(block.basis)
        if u.shape != (n, block.rank):
            raise InconsistentSpec(f"basis shape {u.shape} mismatches rank {block.rank}")
        if np.linalg.norm(u.conj().T @ u - np.eye(block.rank)) > 1e-10:
            raise InconsistentSpec("explicit block basis is not orthonormal")
        return u
    cols = []
    for idx in block.eigenvector_indices:
        if not 0 <= idx < n:
            raise InconsistentSpec(f"eigenvector index {idx} out of range")
        cols.append(q[:, idx])
    if block.mixed_column is not None:
        a, b = block.mixed_column.indices
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise InconsistentSpec("mixed column needs two distinct valid indices")
        w0, w1 = block.mixed_column.weights
        cols.append(np.sqrt(w0) * q[:, a] + np.sqrt(w1) * q[:, b])
    return np.column_stack(cols)


def _check_cross_block(bases, am, scale) -> None:
    for i in range(len(bases)):
        for j in range(i + 1, len(bases)):
            if np.linalg.norm(bases[i].conj().T @ bases[j]) > 1e-8:
                raise InconsistentSpec(f"blocks {i} and {j} are not orthogonal")
            if np.linalg.norm(bases[i].conj().T @ (am @ bases[j])) > 1e-8 * scale:
                raise InconsistentSpec(f"blocks {i} and {j} are not A-orthogonal")


def _check_distinct(ds, scale) -> None:
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            if abs(ds[i] - ds[j]) <= 1e-9 * scale:
                raise InconsistentSpec(
                    f"blocks {i} and {j} share the multiplier value {ds[i]:.6g}"
                )


def _assemble_block(u, sigma_sq, size) -> np.ndarray:
    """Build U diag(sigma) V* with V from the diagonal-pinning construction."""
    rank = u.shape[1]
    profile = np.concatenate([sigma_sq, np.zeros(size - rank)])
    vbar = schur_horn_unit_diag(profile)
    return u @ np.diag(np.sqrt(sigma_sq)) @ vbar[:, :rank].conj().T


def build_qomm_stationary(a, spec: BlockSpec) -> StationaryCertificate:
    """Assemble and certify a qOMM stationary point from a block specification.

    Full-rank blocks carry multiplier 0 and unit singular values; a
    rank-deficient block of size p_i and rank r_i gets
    sigma_ij^2 = 1 + (p_i - r_i) / (a_ij * sum_l 1/a_il) from the block's
    diagonal Rayleigh quotients a_ij, all strictly above 1. A mixed
    (non-eigenvector) column is rejected unless its value lands on 2.
    """
    am = operator_matrix(a)
    if spec.model is not Model.QOMM:
        raise InconsistentSpec("specification is not for qOMM")
    decomp = eigh(am)
    if decomp.values[-1] >= 0:
        raise InvalidInput("qOMM stationary construction requires negative definite input")
    scale = max(1.0, float(np.linalg.norm(am)))

    bases = [_resolve_block_basis(b, decomp) for b in spec.blocks]
    _check_cross_block(bases, am, scale)

    ds, columns, d_entries = [], [], []
    for block, u in zip(spec.blocks, bases):
        compressed = u.conj().T @ (am @ u)
        if np.linalg.norm(compressed - np.diag(np.diag(compressed))) > 1e-8 * scale:
            raise InconsistentSpec("block basis does not diagonalize the operator")
        a_tilde = np.real(np.diag(compressed))
        if np.any(a_tilde >= 0):
            raise InconsistentSpec("block Rayleigh quotients must be negative")
        if block.rank == block.size:
            d_i = 0.0
        else:
            d_i = 2.0 * (block.size - block.rank) / np.sum(1.0 / a_tilde)
        sigma_sq = 1.0 + d_i / (2.0 * a_tilde)
        if np.any(sigma_sq <= 0):
            raise InconsistentSpec("negative squared singular value in block")
        if block.mixed_column is not None:
            # the mixed column is always resolved last within the block
            if abs(sigma_sq[-1] - 2.0) > 1e-8:
                raise InconsistentSpec(
                    f"non-eigenvector column has sigma^2 = {sigma_sq[-1]:.8f}, needs 2"
                )
        ds.append(d_i)
        columns.append(_assemble_block(u, sigma_sq, block.size))
        d_entries.extend([d_i] * block.size)

    _check_distinct(ds, scale)
    x = np.column_stack([c for c in columns]) if len(columns) > 1 else columns[0]
    d = np.array(d_entries, dtype=float)
    residual = verify_qomm_stationary(am, x, d)
    if residual > STATIONARITY_RTOL * scale:
        raise InconsistentSpec(f"assembled point fails certification: residual {residual:.3e}")
    return StationaryCertificate(x=x, d=d, residual=residual)


def build_qtpm_stationary(a, mu: float, spec: BlockSpec) -> StationaryCertificate:
    """Assemble and certify a qTPM stationary point from a block specification.

    Blocks are built on eigenvector bases; the nonzero singular values are
    sigma_ij^2 = p_i/r_i - (lambda_ij - mean_block)/mu and the block
    multiplier is d_i = -(sum lambda_ij + mu p_i)/r_i.
    """
    am = operator_matrix(a)
    if spec.model is not Model.QTPM:
        raise InconsistentSpec("specification is not for qTPM")
    decomp = eigh(am)
    if decomp.values[-1] >= 0:
        raise InvalidInput("qTPM stationary construction requires negative definite input")
    if mu <= abs(decomp.values[0]):
        raise MuTooSmall(f"mu = {mu} must exceed |lambda_min| = {abs(decomp.values[0])}")
    scale = max(1.0, float(np.linalg.norm(am)) + mu)

    bases = []
    for block in spec.blocks:
        if block.mixed_column is not None:
            raise InconsistentSpec("qTPM blocks take eigenvector bases only")
        u = _resolve_block_basis(block, decomp)
        residual_cols = am @ u - u * np.real(np.sum(np.conj(u) * (am @ u), axis=0))
        if np.linalg.norm(residual_cols) > 1e-8 * scale:
            raise InconsistentSpec("qTPM block basis columns must be eigenvectors")
        bases.append(u)
    _check_cross_block(bases, am, scale)

    ds, columns, d_entries = [], [], []
    for block, u in zip(spec.blocks, bases):
        lam = np.real(np.sum(np.conj(u) * (am @ u), axis=0))
        d_i = -(lam.sum() + mu * block.size) / block.rank
        sigma_sq = block.size / block.rank - (lam - lam.mean()) / mu
        if np.any(sigma_sq <= 0):
            raise InconsistentSpec("qTPM block profile has nonpositive squared values")
        ds.append(d_i)
        columns.append(_assemble_block(u, sigma_sq, block.size))
        d_entries.extend([d_i] * block.size)

    _check_distinct(ds, scale)
    x = np.column_stack([c for c in columns]) if len(columns) > 1 else columns[0]
    d = np.array(d_entries, dtype=float)
    residual = verify_qtpm_stationary(am, x, d, mu)
    if residual > STATIONARITY_RTOL * scale:
        raise InconsistentSpec(f"assembled point fails certification: residual {residual:.3e}")
    return StationaryCertificate(x=x, d=d, residual=residual)


def _membership_violation(x) -> float:
    norms = np.linalg.norm(x, axis=0)
    return float(np.linalg.norm(norms - 1.0))


def _as_diag_vector(d, p) -> np.ndarray:
    dv = np.asarray(d)
    if dv.ndim == 2:
        dv = np.diag(dv)
    dv = np.real(dv).astype(float)
    if dv.shape != (p,):
        raise InvalidInput(f"multiplier diagonal must have length {p}")
    return dv


def verify_qomm_stationary(a, x, d) -> float:
    """First-order residual ||2AX - AX X*X - X X*AX + XD||_F plus membership defect."""
    am, xm = operator_matrix(a), as_complex_matrix(x)
    dv = _as_diag_vector(d, xm.shape[1])
    ax = am @ xm
    gram = xm.conj().T @ xm
    lhs = 2.0 * ax - ax @ gram - xm @ (xm.conj().T @ ax) + xm * dv
    return float(np.linalg.norm(lhs)) + _membership_violation(xm)


def verify_qtpm_stationary(a, x, d, mu: float) -> float:
    """First-order residual ||AX + mu X X*X + XD||_F plus membership defect."""
    am, xm = operator_matrix(a), as_complex_matrix(x)
    dv = _as_diag_vector(d, xm.shape[1])
    lhs = am @ xm + mu * xm @ (xm.conj().T @ xm) + xm * dv
    return float(np.linalg.norm(lhs)) + _membership_violation(xm)


def _lowest_eigenvectors(decomp, p) -> np.ndarray:
    return decomp.vectors[:, :p]


def _check_unitary(v, p) -> np.ndarray:
    vm = as_complex_matrix(v)
    if vm.shape != (p, p) or np.linalg.norm(vm.conj().T @ vm - np.eye(p)) > 1e-10:
        raise InvalidInput("right factor must be a p x p unitary matrix")
    return vm


def build_qomm_minimizer(a, p: int, v=None) -> np.ndarray:
    """Global minimizer Q_p V* from the lowest-p eigenvectors and unitary V."""
    am = operator_matrix(a)
    decomp = eigh(am)
    if decomp.values[-1] >= 0:
        raise InvalidInput("qOMM minimizer requires negative definite input")
    qp = _lowest_eigenvectors(decomp, p)
    if v is None:
        return qp
    return qp @ _check_unitary(v, p).conj().T


def qtpm_minimizer_profile(values, p: int, mu: float) -> np.ndarray:
    """Squared singular values 1 - (lambda_j - mean)/mu of the qTPM minimizer."""
    lam = np.asarray(values, dtype=float)[:p]
    return 1.0 - (lam - lam.mean()) / mu


def build_qtpm_minimizer(a, mu: float, p: int, v=None) -> np.ndarray:
    """Global minimizer Q_p (I - (Lambda_p - mean)/mu)^(1/2) V*.

    The supplied V is used only if it already places the point on the
    manifold; otherwise it is replaced by the diagonal-pinning unitary for
    the minimizer's singular value profile.
    """
    am = operator_matrix(a)
    decomp = eigh(am)
    if decomp.values[-1] >= 0:
        raise InvalidInput("qTPM minimizer requires negative definite input")
    if mu <= abs(decomp.values[0]):
        raise MuTooSmall(f"mu = {mu} must exceed |lambda_min| = {abs(decomp.values[0])}")
    s = qtpm_minimizer_profile(decomp.values, p, mu)
    core = decomp.vectors[:, :p] @ np.diag(np.sqrt(s))
    if v is not None:
        vm = _check_unitary(v, p)
        if np.max(np.abs(np.real(np.diag(vm @ np.diag(s) @ vm.conj().T)) - 1.0)) <= 1e-10:
            return core @ vm.conj().T
    return core @ schur_horn_unit_diag(s).conj().T


def oblique_perturb(x, sigma_tilde_sq) -> tuple[np.ndarray, float]:
    """Move a manifold point to prescribed squared singular values.

    Keeps the left singular vectors, replaces the singular values by
    ``sigma_tilde_sq`` (paired with the descending SVD order, total mass
    preserved), and rebuilds a right unitary factor near the original one
    by re-pinning the Gram diagonal. Returns the new point and its
    Frobenius distance from ``x``.
    """
    xm = as_complex_matrix(x)
    target = np.asarray(sigma_tilde_sq, dtype=float)
    p = xm.shape[1]
    if target.shape != (p,):
        raise InvalidInput(f"expected {p} squared singular values")
    if np.max(np.abs(np.linalg.norm(xm, axis=0) - 1.0)) > 1e-8:
        raise InvalidInput("point must lie on the oblique manifold")
    if np.any(target < -1e-12):
        raise MajorizationError("squared singular values must be nonnegative")
    u, s, vh = np.linalg.svd(xm, full_matrices=False)
    if abs(target.sum() - np.sum(s**2)) > 1e-10:
        raise MajorizationError(
            f"perturbed mass {target.sum():.12f} differs from {np.sum(s ** 2):.12f}"
        )
    x_tilde = _rebuild_with_profile(u, vh, target)
    return x_tilde, float(np.linalg.norm(x_tilde - xm))


def _rebuild_with_profile(u, vh, target):
    """Assemble U diag(sqrt(target)) V* G* with G re-pinning the Gram diagonal.

    The caller owns the pairing of ``target`` with the columns of ``u``;
    nothing is re-decomposed here, so the pairing survives degenerate
    singular values.
    """
    target = np.clip(np.asarray(target, dtype=float), 0.0, None)
    target = target * (target.size / target.sum())
    v = vh.conj().T
    gram_target = v @ np.diag(target) @ v.conj().T
    g = _pin_diagonal_to_ones(gram_target)
    # new right factor is G V, so X~ = U Sigma~ (G V)* = U Sigma~ V* G*
    return u @ np.diag(np.sqrt(target)) @ vh @ g.conj().T


def _eigen_aligned_svd(a_mat, x):
    """SVD of ``x`` with left vectors rotated to eigendirections where possible.

    Within every group of equal singular values the left factor is only
    determined up to a unitary mixing; rotating each group to diagonalize
    the compressed operator makes the per-column Rayleigh quotients exact
    eigenvalues of the invariant subspace without changing ``x``.
    """
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    u = u.copy()
    vh = vh.copy()
    start = 0
    p = s.size
    while start < p:
        stop = start
        while stop + 1 < p and abs(s[stop + 1] - s[start]) <= 1e-8 * max(1.0, s[start]):
            stop += 1
        if stop > start:
            group = slice(start, stop + 1)
            w = np.linalg.eigh(u[:, group].conj().T @ (a_mat @ u[:, group]))[1]
            u[:, group] = u[:, group] @ w
            vh[group, :] = w.conj().T @ vh[group, :]
        start = stop + 1
    lam = np.real(np.sum(np.conj(u) * (a_mat @ u), axis=0))
    return u, s, vh, lam


def _swap_escape(a_mat, x, u, s, vh, lam, epsilon, p):
    """Blend the worst retained eigendirection toward a missing low one."""
    decomp = eigh(a_mat)
    span = u[:, s > _RANK_TOL]
    proj = span @ span.conj().T
    target = None
    for t in range(p):
        q_t = decomp.vectors[:, t]
        leftover = q_t - proj @ q_t
        norm = np.linalg.norm(leftover)
        if norm > 1e-6:
            target = (leftover / norm, decomp.values[t])
            break
    if target is None:
        raise AlreadyMinimal("span already matches the lowest eigenvectors")
    q_t, lam_t = target
    donor = int(np.argmax(lam))
    if lam[donor] <= lam_t + 1e-12:
        raise AlreadyMinimal("no retained direction sits above the missing eigenvalue")
    u_new = np.sqrt(1.0 - epsilon**2) * u[:, donor] + epsilon * q_t
    return x + np.outer(u_new - u[:, donor], s[donor] * vh[donor, :])


def saddle_escape(model: Model, a, certificate: StationaryCertificate, mu=None, epsilon: float = 1e-3):
    """Strictly decrease the objective at a certified non-minimizing stationary point.

    qOMM points with any singular value off 1 take the blending perturbation
    (1-eps) sigma^2 + eps; qTPM points transfer eps of squared singular value
    from the column with the largest lambda + mu sigma^2 to the smallest.
    Full-rank points built on the wrong eigenvectors blend the offending
    direction toward a missing low eigenvector. Raises AlreadyMinimal when
    the point matches the minimizer characterization.
    """
    am = operator_matrix(a)
    x = certificate.x
    p = x.shape[1]
    if not 0 < epsilon < 0.5:
        raise InvalidInput("epsilon must lie in (0, 0.5)")
    u, s, vh, lam = _eigen_aligned_svd(am, x)

    if model is Model.QOMM:
        if np.max(np.abs(s**2 - 1.0)) > 1e-8:
            target = (1.0 - epsilon) * s**2 + epsilon
            return _rebuild_with_profile(u, vh, target)
        return _swap_escape(am, x, u, s, vh, lam, epsilon, p)

    if model is Model.QTPM:
        if mu is None or mu <= 0:
            raise InvalidInput("qTPM escape requires mu")
        tau = lam + mu * s**2
        donor_pool = np.where(s**2 > 2.0 * epsilon)[0]
        if donor_pool.size:
            donor = int(donor_pool[np.argmax(tau[donor_pool])])
            receiver = int(np.argmin(tau))
            spread = tau[donor] - tau[receiver]
            if spread > 1e-6 * (mu + float(np.linalg.norm(am))):
                # decrease is eps (tau_recv - tau_donor)/2 + mu eps^2 / 2, so
                # keep eps below spread/(2 mu) to stay strictly negative
                eps_eff = min(epsilon, spread / (4.0 * mu))
                target = s**2
                target[donor] -= eps_eff
                target[receiver] += eps_eff
                return _rebuild_with_profile(u, vh, target)
        return _swap_escape(am, x, u, s, vh, lam, epsilon, p)

    raise InvalidInput(f"saddle escape applies to the smooth models, got {model}")


def descent_direction_ql1m(x, x0) -> np.ndarray:
    """Unit vector orthogonal to the columns of ``x`` with negative overlap on ``x0``.

    Built from the residual of the orthogonal projection of ``x0`` onto the
    column span; the overlap is -||x0 - proj(x0)||, which drops below -1/2
    whenever all columns are unit length with pairwise overlaps at most
    1/(4p).
    """
    xm = as_complex_matrix(x)
    v0 = np.asarray(x0, dtype=complex).reshape(-1)
    if v0.shape[0] != xm.shape[0]:
        raise InvalidInput("x0 length must match the column dimension")
    proj = xm @ np.linalg.pinv(xm) @ v0
    residual = proj - v0
    norm = np.linalg.norm(residual)
    if norm <= 1e-10:
        raise SpanError("x0 lies in the span of the given columns")
    return residual / norm


def subspace_distance(x, basis) -> float:
    """Frobenius principal-angle distance between range(x) and range(basis)."""
    xm = as_complex_matrix(x)
    u, s, _ = np.linalg.svd(xm, full_matrices=False)
    qx = u[:, s > _RANK_TOL * max(1.0, s[0] if s.size else 1.0)]
    b = as_complex_matrix(basis)
    leftover = qx - b @ (b.conj().T @ qx)
    return float(np.linalg.norm(leftover))


def _fit_multipliers(x, grad_eq) -> np.ndarray:
    return -np.real(np.sum(np.conj(x) * grad_eq, axis=0))


def classify_point(model: Model, a, x, mu=None, mu1=None) -> str:
    """Label a manifold point as ``minimizer``, ``saddle`` or ``nonstationary``.

    The minimizer test matches the subspace against the lowest-p eigenspace
    (widened across degenerate crossings) and the singular value profile
    against the model's closed form, both at tolerance 1e-6. Smooth models
    that fail the form test but satisfy the first-order equations with
    fitted diagonal multipliers are saddles. The l1 models carry no smooth
    certificate, so off-form points are reported nonstationary.
    """
    am = operator_matrix(a)
    xm = as_complex_matrix(x)
    p = xm.shape[1]
    decomp = eigh(am)
    scale = max(1.0, float(np.linalg.norm(am)))

    u, s, vh = np.linalg.svd(xm, full_matrices=False)
    if model is Model.QTPM:
        if mu is None or mu <= 0:
            raise InvalidInput("classification under qTPM requires mu")
        predicted = np.sort(qtpm_minimizer_profile(decomp.values, p, mu))
        profile_ok = bool(np.max(np.abs(np.sort(s**2) - predicted)) <= CLASSIFY_TOL)
    else:
        profile_ok = bool(np.max(np.abs(s - 1.0)) <= CLASSIFY_TOL)

    if profile_ok:
        gap_tol = 1e-9 * scale
        k = int(np.searchsorted(decomp.values, decomp.values[p - 1] + gap_tol, side="right"))
        if subspace_distance(xm, decomp.vectors[:, :k]) <= CLASSIFY_TOL:
            return "minimizer"

    if model in (Model.QOMM, Model.QTPM):
        if model is Model.QOMM:
            ax = am @ xm
            gram = xm.conj().T @ xm
            grad_eq = 2.0 * ax - ax @ gram - xm @ (xm.conj().T @ ax)
            threshold = STATIONARITY_RTOL * scale * 10
        else:
            grad_eq = am @ xm + mu * xm @ (xm.conj().T @ xm)
            threshold = STATIONARITY_RTOL * (scale + mu) * 10
        d = _fit_multipliers(xm, grad_eq)
        residual = float(np.linalg.norm(grad_eq + xm * d)) + _membership_violation(xm)
        if residual <= threshold:
            return "saddle"
    return "nonstationary"


def random_block_spec(model: Model, n: int, p: int, seed: int, allow_minimizer: bool = False) -> BlockSpec:
    """Sample a valid block specification on an n-dimensional operator.

    Draws a random partition of the columns, random ranks, and disjoint
    eigenvector index sets. Blocks sharing a multiplier are disallowed, so
    a qOMM draw keeps at most one full-rank block; by default the result is
    also resampled until it cannot produce the minimizer form (built points
    are then saddles).
    """
    rng = np.random.default_rng(seed)
    for _ in range(500):
        k = int(rng.integers(1, min(3, p) + 1))
        cuts = np.sort(rng.choice(np.arange(1, p), size=k - 1, replace=False)) if k > 1 else []
        sizes = np.diff(np.concatenate([[0], cuts, [p]])).astype(int)
        ranks = [int(rng.integers(1, size + 1)) for size in sizes]
        if model is Model.QOMM and sum(1 for s, r in zip(sizes, ranks) if r == s) > 1:
            continue
        total_rank = sum(ranks)
        if total_rank > n:
            continue
        indices = rng.permutation(n)[:total_rank]
        blocks, at = [], 0
        for size, rank in zip(sizes, ranks):
            blocks.append(
                Block(size=int(size), rank=int(rank),
                      eigenvector_indices=tuple(int(i) for i in indices[at : at + rank]))
            )
            at += rank
        spec = BlockSpec(model=model, blocks=tuple(blocks))
        if not allow_minimizer:
            single_full = len(blocks) == 1 and blocks[0].rank == blocks[0].size
            if single_full and set(blocks[0].eigenvector_indices) == set(range(p)):
                continue
        return spec
    raise InvalidInput("failed to sample a block specification")
