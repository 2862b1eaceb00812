"""Random instance generators for verification campaigns.

Every generator takes a ``numpy.random.Generator`` and returns validated
objects, so checkers never see invalid input.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..algebra import PureState, State, System, make_classical_system
from ..channels import (
    Channel,
    channel_from_block_map,
    compose,
    direct_sum_channels,
    embedding_channel,
    from_stochastic_matrix,
    isometric_channel,
    kraus_block_map,
    measurement_channel,
)

PURE_TO_PURE_FAMILIES = ("classical", "isometric", "embedding", "permutation", "direct_sum")


def random_system(rng: np.random.Generator, max_blocks: int = 3, max_block_dim: int = 4) -> System:
    k = int(rng.integers(1, max_blocks + 1))
    return System(tuple(int(n) for n in rng.integers(1, max_block_dim + 1, size=k)))


def ginibre(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)


def haar_isometry(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """Haar-distributed ``m x n`` isometry (``m >= n``) via phase-corrected QR."""
    q, r = np.linalg.qr(ginibre(rng, m, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    return haar_isometry(rng, n, n)


def random_state(rng: np.random.Generator, a: System) -> State:
    """Per-block complex Wishart matrices, jointly normalized to trace one."""
    blocks = []
    for n in a.block_dims:
        g = ginibre(rng, n, n)
        blocks.append(g @ g.conj().T)
    total = sum(np.trace(b).real for b in blocks)
    return State(a, [b / total for b in blocks])


def random_pure_state(rng: np.random.Generator, a: System, block: int | None = None) -> PureState:
    if block is None:
        block = int(rng.integers(a.num_blocks))
    v = ginibre(rng, a.block_dims[block], 1)[:, 0]
    return PureState(a, block, v / np.linalg.norm(v))


def random_probs(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.dirichlet(np.ones(size))


def _stinespring_kraus(rng, n: int, m: int) -> list[np.ndarray]:
    env = max(2, -(-n // m))
    v = haar_isometry(rng, m * env, n).reshape(m, env, n)
    return [v[:, e, :] for e in range(env)]


def random_cptp(rng: np.random.Generator, a: System, b: System) -> Channel:
    """Random channel mixing per-block-pair Stinespring channels.

    Each input block ``i`` picks Dirichlet weights over the output blocks;
    the ``(j, i)`` component is that weight times a channel
    ``Mat_{n_i} -> Mat_{m_j}`` with a Haar Stinespring isometry. The
    environment has dimension 2, enlarged when ``n_i > 2 m_j``.
    """
    weights = [rng.dirichlet(np.ones(b.num_blocks)) for _ in a.block_dims]
    maps = [
        [kraus_block_map(_stinespring_kraus(rng, n, m)) for n in a.block_dims]
        for m in b.block_dims
    ]
    return channel_from_block_map(
        a, b, lambda i, x: [weights[i][j] * maps[j][i](x) for j in range(b.num_blocks)]
    )


def depolarizing_channel(dim: int, strength: float) -> Channel:
    """``rho -> (1 - s) rho + s Tr(rho) I/dim`` on ``Mat_dim``."""
    a = System((dim,))
    omega = np.eye(dim).reshape(-1)
    choi = (1 - strength) * np.outer(omega, omega) + strength * np.eye(dim * dim) / dim
    return Channel(a, a, [[choi]])


def deterministic_channel(func, x_size: int, y_size: int) -> Channel:
    s = np.zeros((y_size, x_size))
    s[list(func), range(x_size)] = 1.0
    return from_stochastic_matrix(s)


def block_permutation_channel(a: System, perm, unitaries) -> Channel:
    """Target block ``j`` receives source block ``perm[j]`` conjugated by ``unitaries[j]``."""
    target = System(tuple(a.block_dims[p] for p in perm))
    dest = {p: j for j, p in enumerate(perm)}
    return channel_from_block_map(
        a,
        target,
        lambda i, x: [
            unitaries[j] @ x @ unitaries[j].conj().T if j == dest[i] else None
            for j in range(target.num_blocks)
        ],
    )


class PureToPureDraw(NamedTuple):
    channel: Channel
    family: str
    left_inverse: Channel | None


def _classical_draw(rng, max_size):
    x, y = (int(v) for v in rng.integers(1, max_size + 1, size=2))
    func = rng.integers(0, y, size=x)
    f = deterministic_channel(func, x, y)
    inv = None
    if len(set(func.tolist())) == x:
        back = np.zeros(y, dtype=int)
        back[func] = np.arange(x)
        inv = deterministic_channel(back, y, x)
    return f, inv


def _isometric_draw(rng, max_blocks, max_block_dim):
    n = int(rng.integers(1, max_block_dim + 1))
    m = int(rng.integers(n, max_block_dim + 1))
    others = random_system(rng, max_blocks, max_block_dim).block_dims[: max_blocks - 1]
    pos = int(rng.integers(0, len(others) + 1))
    target = System(others[:pos] + (m,) + others[pos:])
    v = haar_isometry(rng, m, n)
    f = isometric_channel(v, target, pos)
    proj_out = np.eye(m) - v @ v.conj().T
    park = np.zeros((n, n), dtype=complex)
    park[0, 0] = 1.0

    def back(j, x):
        if j == pos:
            return [v.conj().T @ x @ v + np.trace(proj_out @ x) * park]
        return [np.trace(x) * park]

    return f, channel_from_block_map(target, System((n,)), back)


def _embedding_draw(rng, max_blocks, max_block_dim):
    a = random_system(rng, max_blocks, max_block_dim)
    basis = []
    for bi, n in enumerate(a.block_dims):
        u = haar_unitary(rng, n)
        basis.extend(PureState(a, bi, u[:, c]) for c in range(n))
    order = rng.permutation(len(basis))
    count = int(rng.integers(1, len(basis) + 1))
    chosen = [basis[k] for k in order[:count]]
    rest = [basis[k] for k in order[count:]]
    f = embedding_channel(chosen)
    # measure in the completed basis, then fold the unused outcomes onto point 0
    merge = np.zeros(len(basis), dtype=int)
    merge[:count] = np.arange(count)
    inv = compose(
        deterministic_channel(merge, len(basis), count), measurement_channel(chosen + rest)
    )
    return f, inv


def _permutation_draw(rng, max_blocks, max_block_dim):
    a = random_system(rng, max_blocks, max_block_dim)
    perm = rng.permutation(a.num_blocks)
    us = [haar_unitary(rng, a.block_dims[p]) for p in perm]
    f = block_permutation_channel(a, perm, us)
    inv_perm = np.argsort(perm)
    # target block j holds source block perm[j]; undo it
    inv_us = [us[inv_perm[i]].conj().T for i in range(a.num_blocks)]
    return f, block_permutation_channel(f.target, inv_perm, inv_us)


def random_pure_to_pure(
    rng: np.random.Generator,
    family: str | None = None,
    max_blocks: int = 3,
    max_block_dim: int = 4,
) -> PureToPureDraw:
    """Draw a pure-to-pure channel, with a left inverse when the family has one."""
    if family is None:
        family = PURE_TO_PURE_FAMILIES[int(rng.integers(len(PURE_TO_PURE_FAMILIES)))]
    if family == "classical":
        f, inv = _classical_draw(rng, max_blocks * max_block_dim // 2 or 1)
    elif family == "isometric":
        f, inv = _isometric_draw(rng, max_blocks, max_block_dim)
    elif family == "embedding":
        f, inv = _embedding_draw(rng, max_blocks, max_block_dim)
    elif family == "permutation":
        f, inv = _permutation_draw(rng, max_blocks, max_block_dim)
    elif family == "direct_sum":
        # keep sums small: each summand gets about half the block budget
        half = max(1, max_blocks // 2)
        leaves = PURE_TO_PURE_FAMILIES[:-1]
        d1 = random_pure_to_pure(rng, leaves[int(rng.integers(len(leaves)))], half, max_block_dim)
        d2 = random_pure_to_pure(rng, leaves[int(rng.integers(len(leaves)))], half, max_block_dim)
        f = direct_sum_channels(d1.channel, d2.channel)
        inv = None
        if d1.left_inverse is not None and d2.left_inverse is not None:
            inv = direct_sum_channels(d1.left_inverse, d2.left_inverse)
    else:
        raise ValueError(f"unknown pure-to-pure family {family!r}")
    return PureToPureDraw(f, family, inv)


def random_classical_system(rng: np.random.Generator, max_size: int) -> System:
    return make_classical_system(int(rng.integers(1, max_size + 1)))


