"""The three orthogonality-embedding cost functions and their gradients.

All functions take dense complex ndarrays. Gradients follow the convention
that the directional derivative of the value along a perturbation ``delta``
equals ``Re tr(grad* delta)``; first-order stationarity certificates in the
landscape module use the equation forms with their own constants, so the
two never need to agree on scaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ImaginaryResidue, InvalidInput, InvalidWeights
from .linalg import as_complex_matrix


class Model(Enum):
    QOMM = "qomm"
    QTPM = "qtpm"
    QL1M = "ql1m"
    WEIGHTED_QL1M = "wql1m"


@dataclass(frozen=True)
class ModelConfig:
    """Which cost function to run and its penalty parameters."""

    model: Model
    mu: float | None = None
    mu1: float | None = None
    weights: np.ndarray | None = None
    smoothing_delta: float = 1e-8

    def __post_init__(self):
        if self.model is Model.QTPM:
            if self.mu is None or self.mu <= 0:
                raise InvalidInput("qTPM requires mu > 0")
        if self.model in (Model.QL1M, Model.WEIGHTED_QL1M):
            if self.mu1 is None or self.mu1 <= 0:
                raise InvalidInput("qL1M requires mu1 > 0")
        if self.model is Model.WEIGHTED_QL1M:
            if self.weights is None:
                raise InvalidWeights("weighted qL1M requires a weight vector")
            _check_weights(np.asarray(self.weights, dtype=float))
        if self.smoothing_delta < 0:
            raise InvalidInput("smoothing delta must be nonnegative")


def _check_weights(w: np.ndarray) -> np.ndarray:
    if w.ndim != 1 or w.size == 0:
        raise InvalidWeights("weights must be a nonempty vector")
    if np.any(w <= 0) or np.any(np.diff(w) >= 0):
        raise InvalidWeights("weights must be strictly decreasing and positive")
    return w


def _real_part(value: complex, context: str) -> float:
    re, im = float(np.real(value)), float(np.imag(value))
    if abs(im) > 1e-8 * abs(re) + 1e-10:
        raise ImaginaryResidue(f"{context}: imaginary residue {im:.3e} on value {re:.6e}")
    return re


def qomm_value(a, x) -> float:
    """tr((2I - X*X) X*AX)."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    gram = xm.conj().T @ xm
    quad = xm.conj().T @ (am @ xm)
    p = xm.shape[1]
    return _real_part(np.trace((2.0 * np.eye(p) - gram) @ quad), "qomm_value")


def qomm_grad(a, x) -> np.ndarray:
    """Euclidean gradient 2 (2AX - AX X*X - X X*AX)."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    ax = am @ xm
    gram = xm.conj().T @ xm
    return 2.0 * (2.0 * ax - ax @ gram - xm @ (xm.conj().T @ ax))


def qtpm_value(a, x, mu: float) -> float:
    """tr(X*AX)/2 + (mu/4) tr(X*X X*X)."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu, "mu")
    gram = xm.conj().T @ xm
    quad = xm.conj().T @ (am @ xm)
    return _real_part(0.5 * np.trace(quad) + 0.25 * mu * np.trace(gram @ gram), "qtpm_value")


def qtpm_grad(a, x, mu: float) -> np.ndarray:
    """Euclidean gradient AX + mu X X*X."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu, "mu")
    return am @ xm + mu * xm @ (xm.conj().T @ xm)


def qtpm_penalty_value(a, x, mu: float) -> float:
    """tr(X*AX)/2 + (mu/4) ||X*X - I||_F^2, the penalty form of qTPM.

    On the oblique manifold this equals ``qtpm_value - mu p / 4``; reference
    minima are quoted in this form.
    """
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu, "mu")
    p = xm.shape[1]
    gram = xm.conj().T @ xm
    quad = xm.conj().T @ (am @ xm)
    defect = np.linalg.norm(gram - np.eye(p)) ** 2
    return _real_part(0.5 * np.trace(quad), "qtpm_penalty_value") + 0.25 * mu * defect


def slrp_value(a, x, mu: float) -> float:
    """(mu/4) ||X X* - (I - A/mu)||_F^2, the shifted symmetric low-rank product form."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu, "mu")
    n = am.shape[0]
    target = np.eye(n) - am / mu
    return 0.25 * mu * float(np.linalg.norm(xm @ xm.conj().T - target) ** 2)


def _offdiag_abs_sum(gram: np.ndarray) -> float:
    iu = np.triu_indices(gram.shape[0], k=1)
    return float(np.sum(np.abs(gram[iu])))


def ql1m_value(a, x, mu1: float) -> float:
    """tr(X*AX) + mu1 * sum_{i<j} |(X*X)_ij|."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu1, "mu1")
    gram = xm.conj().T @ xm
    trace = _real_part(np.trace(xm.conj().T @ (am @ xm)), "ql1m_value")
    return trace + mu1 * _offdiag_abs_sum(gram)


def ql1m_smoothed_value(a, x, mu1: float, delta: float) -> float:
    """qL1M value with |z| replaced by sqrt(|z|^2 + delta^2) off the diagonal."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu1, "mu1")
    gram = xm.conj().T @ xm
    iu = np.triu_indices(gram.shape[0], k=1)
    smooth = float(np.sum(np.sqrt(np.abs(gram[iu]) ** 2 + delta**2)))
    trace = _real_part(np.trace(xm.conj().T @ (am @ xm)), "ql1m_smoothed_value")
    return trace + mu1 * smooth


def ql1m_subgrad(a, x, mu1: float, delta: float = 0.0) -> np.ndarray:
    """2AX + mu1 X Phi with Phi the (smoothed) phase matrix of the off-diagonal Gram.

    With ``delta > 0`` the magnitude is smoothed to sqrt(|z|^2 + delta^2);
    with ``delta = 0`` the subdifferential selection takes 0 at z = 0.
    """
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu1, "mu1")
    if delta < 0:
        raise InvalidInput("delta must be nonnegative")
    gram = xm.conj().T @ xm
    np.fill_diagonal(gram, 0.0)
    mags = np.abs(gram)
    if delta > 0:
        phi = gram / np.sqrt(mags**2 + delta**2)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            phi = np.where(mags > 0, gram / np.where(mags > 0, mags, 1.0), 0.0)
    return 2.0 * (am @ xm) + mu1 * (xm @ phi)


def weighted_ql1m_value(a, x, weights, mu1: float) -> float:
    """tr(X*AX W) + mu1 * sum_{i<j} |(X*X)_ij| with strictly decreasing W."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    _require_positive(mu1, "mu1")
    w = _check_weights(np.asarray(weights, dtype=float))
    if w.size != xm.shape[1]:
        raise InvalidWeights(f"need {xm.shape[1]} weights, got {w.size}")
    gram = xm.conj().T @ xm
    quad = xm.conj().T @ (am @ xm)
    trace = _real_part(np.trace(quad @ np.diag(w)), "weighted_ql1m_value")
    return trace + mu1 * _offdiag_abs_sum(gram)


def weighted_ql1m_subgrad(a, x, weights, mu1: float, delta: float = 0.0) -> np.ndarray:
    """2 AXW + mu1 X Phi, the weighted counterpart of ``ql1m_subgrad``."""
    am, xm = as_complex_matrix(a), as_complex_matrix(x)
    w = _check_weights(np.asarray(weights, dtype=float))
    penalty = ql1m_subgrad(np.zeros_like(am), xm, mu1, delta)
    return 2.0 * (am @ xm) * w + penalty


def gershgorin_upper_bound(a) -> float:
    """Upper bound on the spectrum from Gershgorin disks."""
    am = as_complex_matrix(a)
    radii = np.sum(np.abs(am), axis=1) - np.abs(np.diag(am))
    return float(np.max(np.real(np.diag(am)) + radii))


def shift_to_negative_definite(a) -> tuple[np.ndarray, float]:
    """Return (A - (g+1) I, g+1) with g the Gershgorin upper bound.

    No-op (shift 0) when the operator is already verified negative definite.
    Eigenvalues of the shifted operator recover the originals after adding
    the shift back.
    """
    am = as_complex_matrix(a)
    if np.linalg.eigvalsh(am)[-1] < 0:
        return am, 0.0
    shift = gershgorin_upper_bound(am) + 1.0
    return am - shift * np.eye(am.shape[0]), shift


def reference_minimum(config: ModelConfig, eigenvalues, p: int) -> float:
    """Global minimum value from the lowest-p spectrum.

    qOMM and qL1M attain tr(Lambda_p); qTPM is quoted in penalty form,
    tr(Lambda_p)/2 + tr(mean(Lambda_p)^2 I - Lambda_p^2)/(4 mu); the
    weighted l1 model attains the weight-ordered trace.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[:p]
    if config.model in (Model.QOMM, Model.QL1M):
        return float(lam.sum())
    if config.model is Model.QTPM:
        mean = lam.mean()
        return float(0.5 * lam.sum() + (p * mean**2 - np.sum(lam**2)) / (4.0 * config.mu))
    if config.model is Model.WEIGHTED_QL1M:
        w = np.asarray(config.weights, dtype=float)
        return float(np.dot(w, lam))
    raise InvalidInput(f"unknown model {config.model}")


def model_value(config: ModelConfig, a, x) -> float:
    """Dispatch to the configured cost function."""
    if config.model is Model.QOMM:
        return qomm_value(a, x)
    if config.model is Model.QTPM:
        return qtpm_value(a, x, config.mu)
    if config.model is Model.QL1M:
        return ql1m_value(a, x, config.mu1)
    if config.model is Model.WEIGHTED_QL1M:
        return weighted_ql1m_value(a, x, config.weights, config.mu1)
    raise InvalidInput(f"unknown model {config.model}")


def model_gradient(config: ModelConfig, a, x) -> np.ndarray:
    """Euclidean gradient of the configured cost (smoothed for the l1 models)."""
    if config.model is Model.QOMM:
        return qomm_grad(a, x)
    if config.model is Model.QTPM:
        return qtpm_grad(a, x, config.mu)
    if config.model is Model.QL1M:
        return ql1m_subgrad(a, x, config.mu1, config.smoothing_delta)
    if config.model is Model.WEIGHTED_QL1M:
        return weighted_ql1m_subgrad(a, x, config.weights, config.mu1, config.smoothing_delta)
    raise InvalidInput(f"unknown model {config.model}")


def _require_positive(value: float, name: str) -> None:
    if value is None or value <= 0:
        raise InvalidInput(f"{name} must be positive")
