"""Shannon, von Neumann and Segal entropies, in nats.

All three use the convention ``0 log 0 = 0``: probabilities or eigenvalues
at or below ``CLIP_EPS`` contribute nothing. This also absorbs eigensolver
noise around zero.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .algebra import TOL_HERM, TOL_PSD, TOL_TRACE, State
from .errors import InvalidArgument

CLIP_EPS = 1e-12


def _entropy_terms(values) -> float:
    # fsum keeps the classical path independent of numpy's pairwise summation
    return -math.fsum(float(x) * math.log(x) for x in values if x > CLIP_EPS)


def shannon(probs: Sequence[float]) -> float:
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise InvalidArgument("probability vector must be non-empty and finite")
    if np.any(p < -TOL_PSD) or abs(p.sum() - 1.0) > TOL_TRACE:
        raise InvalidArgument("not a probability vector")
    return max(_entropy_terms(p), 0.0)


def _spectral_entropy(eigs: np.ndarray) -> float:
    keep = eigs[eigs > CLIP_EPS]
    return float(-np.sum(keep * np.log(keep)))


def von_neumann(rho) -> float:
    """``-Tr(rho log rho)`` of a trace-one PSD matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgument("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > TOL_HERM:
        raise InvalidArgument("density matrix must be Hermitian")
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if eigs[0] < -TOL_PSD or abs(eigs.sum() - 1.0) > TOL_TRACE:
        raise InvalidArgument("density matrix must be PSD with unit trace")
    return max(_spectral_entropy(eigs), 0.0)


def segal(omega: State) -> float:
    """``-sum_i Tr(rho_i log rho_i)`` over the unnormalized blocks of ``omega``."""
    if not isinstance(omega, State):
        raise InvalidArgument("segal entropy is defined on States only")
    total = 0.0
    for rho in omega.block_ops:
        total += _spectral_entropy(np.linalg.eigvalsh(rho))
    return max(total, 0.0)
