"""Systems as direct sums of matrix blocks, and their block-diagonal states.

A system ``Mat_{n_1} ⊕ ... ⊕ Mat_{n_k}`` is fully described by its list of
block orders. A state stores one PSD matrix per block; the matrices are the
*unnormalized* products ``p_i * omega_i`` so that empty blocks are simply
zero matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainMismatch, InvalidArgument, InvalidState

TOL_PSD = 1e-10
TOL_TRACE = 1e-10
TOL_HERM = 1e-10
TOL_PURE = 1e-9
TOL_ORTHO = 1e-9
TOL_RECON = 1e-9


@dataclass(frozen=True)
class System:
    """Direct sum of full matrix algebras, one entry per block order."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if len(dims) == 0:
            raise InvalidArgument("a system needs at least one block")
        if any(n < 1 for n in dims):
            raise InvalidArgument(f"block orders must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def is_classical(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Starting row of each block inside the full embedding."""
        return tuple(int(x) for x in np.cumsum((0,) + self.block_dims[:-1]))

    def __repr__(self):
        return f"System({list(self.block_dims)})"


def _as_square(m, n: int, what: str) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    if arr.shape != (n, n):
        raise InvalidState(f"{what}: expected shape {(n, n)}, got {arr.shape}")
    return arr


class State:
    """Block-diagonal density operator on a :class:`System`.

    Construction validates eagerly: every block must be Hermitian and PSD
    within ``TOL_PSD`` and the block traces must sum to one within
    ``TOL_TRACE``. Stored blocks are Hermitian-symmetrized, read-only copies.
    """

    __slots__ = ("system", "block_ops")

    def __init__(self, system: System, block_ops: Sequence):
        if not isinstance(system, System):
            system = System(system)
        if len(block_ops) != system.num_blocks:
            raise InvalidState(
                f"{system} has {system.num_blocks} blocks, got {len(block_ops)} matrices"
            )
        blocks = []
        total = 0.0
        for i, (n, m) in enumerate(zip(system.block_dims, block_ops)):
            rho = _as_square(m, n, f"block {i}")
            if not np.all(np.isfinite(rho)):
                raise InvalidState(f"block {i} has non-finite entries")
            if np.max(np.abs(rho - rho.conj().T)) > TOL_HERM:
                raise InvalidState(f"block {i} is not Hermitian")
            rho = 0.5 * (rho + rho.conj().T)
            if np.linalg.eigvalsh(rho)[0] < -TOL_PSD:
                raise InvalidState(f"block {i} is not positive semidefinite")
            rho.setflags(write=False)
            blocks.append(rho)
            total += float(np.trace(rho).real)
        if abs(total - 1.0) > TOL_TRACE:
            raise InvalidState(f"block traces sum to {total!r}, not 1")
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "block_ops", tuple(blocks))

    def __setattr__(self, name, value):
        raise AttributeError("State is immutable")

    @property
    def block_traces(self) -> np.ndarray:
        return np.array([np.trace(b).real for b in self.block_ops])

    def __repr__(self):
        return f"State({self.system!r}, traces={self.block_traces.round(6).tolist()})"


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector living in one block of a system (0-based ``block_index``)."""

    system: System
    block_index: int
    vector: np.ndarray

    def __post_init__(self):
        if not 0 <= self.block_index < self.system.num_blocks:
            raise InvalidArgument(f"block index {self.block_index} out of range")
        n = self.system.block_dims[self.block_index]
        vec = np.array(self.vector, dtype=complex).reshape(-1)
        if vec.shape != (n,):
            raise InvalidArgument(f"vector must have length {n}, got {vec.shape[0]}")
        if abs(np.linalg.norm(vec) - 1.0) > TOL_PURE:
            raise InvalidArgument("pure state vector must have unit norm")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    def projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def to_state(self) -> State:
        return State(
            self.system,
            [
                self.projector() if i == self.block_index else np.zeros((n, n))
                for i, n in enumerate(self.system.block_dims)
            ],
        )


def make_classical_system(size: int) -> System:
    if size < 1:
        raise InvalidArgument("a classical system needs at least one point")
    return System((1,) * size)


def classical_state_from_probs(probs: Sequence[float]) -> State:
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.size == 0:
        raise InvalidState("empty probability vector")
    if np.any(p < 0):
        raise InvalidState("probabilities must be non-negative")
    return State(make_classical_system(p.size), [[[x]] for x in p])


def state_as_prob_vector(state: State) -> list[float]:
    if not state.system.is_classical:
        raise DomainMismatch(f"{state.system} is not a classical system")
    return [float(b[0, 0].real) for b in state.block_ops]


def classical_point_mass(system: System, index: int) -> PureState:
    """The pure state concentrated on point ``index`` (any system, 1-dim block)."""
    return PureState(system, index, [1.0])


def is_pure(state: State, tol: float = TOL_PURE) -> bool:
    traces = state.block_traces
    support = np.flatnonzero(traces > tol)
    if support.size != 1:
        return False
    rho = state.block_ops[support[0]]
    return float(np.vdot(rho, rho).real) >= 1.0 - tol


def direct_sum_systems(a: System, b: System) -> System:
    return System(a.block_dims + b.block_dims)


def direct_sum_states(lam: float, omega: State, xi: State) -> State:
    """Convex direct sum ``lam*omega ⊕ (1-lam)*xi`` on ``A ⊕ B``."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgument(f"mixing weight must lie in [0, 1], got {lam}")
    blocks = [lam * b for b in omega.block_ops] + [(1.0 - lam) * b for b in xi.block_ops]
    return State(direct_sum_systems(omega.system, xi.system), blocks)


def embed_state_full(state: State) -> np.ndarray:
    """Assemble the density matrix of order ``total_dim`` from the blocks."""
    n = state.system.total_dim
    out = np.zeros((n, n), dtype=complex)
    for off, b in zip(state.system.offsets, state.block_ops):
        k = b.shape[0]
        out[off : off + k, off : off + k] = b
    return out


def spectral_decompose(state: State) -> tuple[list[float], list[PureState]]:
    """Eigen-decompose block by block into orthogonal pure states.

    Returns ``total_dim`` weights (zeros kept) sorted descending; ties keep
    block order, then eigensolver order. Tiny negative eigenvalues from
    roundoff are clipped to zero.
    """
    entries = []
    for bi, rho in enumerate(state.block_ops):
        vals, vecs = np.linalg.eigh(rho)
        for j in range(vals.size):
            entries.append((max(float(vals[j]), 0.0), bi, j, vecs[:, j]))
    entries.sort(key=lambda e: (-e[0], e[1], e[2]))
    gammas = [e[0] for e in entries]
    psis = [PureState(state.system, e[1], e[3]) for e in entries]
    return gammas, psis


def states_close(a: State, b: State) -> float:
    """Max absolute entry difference between two states on the same system."""
    if a.system != b.system:
        raise DomainMismatch(f"{a.system} vs {b.system}")
    return max(float(np.max(np.abs(x - y))) for x, y in zip(a.block_ops, b.block_ops))


def trace_distance(a: State, b: State) -> float:
    """Half the trace norm of the difference of two states."""
    if a.system != b.system:
        raise DomainMismatch(f"{a.system} vs {b.system}")
    return 0.5 * sum(
        float(np.abs(np.linalg.eigvalsh(x - y)).sum()) for x, y in zip(a.block_ops, b.block_ops)
    )


def conjugate_blocks(state: State, unitaries: Sequence[np.ndarray]) -> State:
    """Apply ``U_i rho_i U_i^dagger`` in every block."""
    return State(state.system, [u @ b @ u.conj().T for u, b in zip(unitaries, state.block_ops)])
