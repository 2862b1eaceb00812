"""Block-structured CPTP maps stored as grids of Choi matrices.

A channel ``A -> B`` with ``A = ⊕_i Mat_{n_i}`` and ``B = ⊕_j Mat_{m_j}``
is stored as a ``k_B x k_A`` grid; entry ``[j][i]`` is the Choi matrix of the
component map ``Mat_{n_i} -> Mat_{m_j}``, using

    Choi(Phi) = sum_{ab} E_ab ⊗ Phi(E_ab)

so the input factor comes first. Complete positivity is PSD-ness of every
component; trace preservation is, per input block ``i``,
``sum_j Tr_out Choi[j][i] = I``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    TOL_ORTHO,
    TOL_PSD,
    PureState,
    State,
    System,
    is_pure,
    make_classical_system,
)
from .errors import DomainMismatch, InvalidArgument, InvalidChannel

TOL_TP = 1e-10
TOL_ISOMETRY = 1e-9
TOL_PURE_TO_PURE = 1e-8
DEFAULT_PURITY_SAMPLES = 64


@dataclass(frozen=True)
class CPTPReport:
    cp_ok: bool
    tp_ok: bool
    max_violation: float

    @property
    def ok(self) -> bool:
        return self.cp_ok and self.tp_ok

    def to_dict(self) -> dict:
        return {"cp_ok": self.cp_ok, "tp_ok": self.tp_ok, "max_violation": self.max_violation}


class Channel:
    """Immutable CPTP map between two systems.

    Pass ``check=False`` only to build deliberately invalid maps for
    :func:`validate_cptp`; every other constructor validates.
    """

    __slots__ = ("source", "target", "choi")

    def __init__(self, source: System, target: System, choi: Sequence[Sequence], *, check: bool = True):
        if len(choi) != target.num_blocks or any(len(row) != source.num_blocks for row in choi):
            raise InvalidChannel(
                f"Choi grid must be {target.num_blocks} x {source.num_blocks}"
            )
        grid = []
        for j, m in enumerate(target.block_dims):
            row = []
            for i, n in enumerate(source.block_dims):
                c = np.array(choi[j][i], dtype=complex)
                if c.shape != (n * m, n * m):
                    raise InvalidChannel(
                        f"component [{j}][{i}] must have shape {(n * m, n * m)}, got {c.shape}"
                    )
                c.setflags(write=False)
                row.append(c)
            grid.append(tuple(row))
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "choi", tuple(grid))
        if check:
            report = validate_cptp(self)
            if not report.ok:
                raise InvalidChannel(f"not CPTP: {report}")

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    def component4(self, j: int, i: int) -> np.ndarray:
        """Component ``[j][i]`` reshaped to ``C[a, x, b, y] = Phi(E_ab)[x, y]``."""
        n, m = self.source.block_dims[i], self.target.block_dims[j]
        return self.choi[j][i].reshape(n, m, n, m)

    @property
    def is_classical(self) -> bool:
        return self.source.is_classical and self.target.is_classical

    def stochastic_matrix(self) -> np.ndarray:
        """Column-stochastic matrix of a classical channel."""
        if not self.is_classical:
            raise DomainMismatch("stochastic matrix only exists for classical channels")
        return np.array([[c[0, 0].real for c in row] for row in self.choi])

    def __repr__(self):
        return f"Channel({self.source!r} -> {self.target!r})"


def choi_of_map(fn: Callable[[np.ndarray], np.ndarray], n: int, m: int) -> np.ndarray:
    """Choi matrix of a linear map ``Mat_n -> Mat_m`` given as a callable."""
    c = np.zeros((n, m, n, m), dtype=complex)
    for a in range(n):
        for b in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1.0
            c[a, :, b, :] = fn(e)
    return c.reshape(n * m, n * m)


def channel_from_block_map(
    source: System,
    target: System,
    fn: Callable[[int, np.ndarray], Sequence[np.ndarray | None]],
) -> Channel:
    """Build a channel from ``fn(i, X) -> [Y_0, ..., Y_{k_B-1}]``.

    ``fn`` receives an operator ``X`` on source block ``i`` and returns the
    image in each target block (``None`` for zero). It must be linear in X.
    """
    grid = [[None] * source.num_blocks for _ in range(target.num_blocks)]
    for i, n in enumerate(source.block_dims):
        c = {j: np.zeros((n, m, n, m), dtype=complex) for j, m in enumerate(target.block_dims)}
        for a in range(n):
            for b in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[a, b] = 1.0
                for j, y in enumerate(fn(i, e)):
                    if y is not None:
                        c[j][a, :, b, :] = y
        for j, m in enumerate(target.block_dims):
            grid[j][i] = c[j].reshape(n * m, n * m)
    return Channel(source, target, grid)


def kraus_block_map(kraus: Sequence[np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    def fn(x):
        return sum(k @ x @ k.conj().T for k in kraus)

    return fn


def validate_cptp(f: Channel, tol: float = TOL_PSD) -> CPTPReport:
    worst_cp = 0.0
    worst_tp = 0.0
    # one batched eigvalsh per component order; per-call overhead dominates at these sizes
    by_order: dict[int, list[np.ndarray]] = {}
    for row in f.choi:
        for c in row:
            by_order.setdefault(c.shape[0], []).append(c)
    for cs in by_order.values():
        s = np.stack(cs)
        sh = s.conj().transpose(0, 2, 1)
        herm = float(np.max(np.abs(s - sh)))
        lo = float(np.min(np.linalg.eigvalsh(0.5 * (s + sh))[:, 0]))
        worst_cp = max(worst_cp, herm, -lo)
    for i, n in enumerate(f.source.block_dims):
        marg = sum(np.einsum("axbx->ab", f.component4(j, i)) for j in range(f.target.num_blocks))
        worst_tp = max(worst_tp, float(np.max(np.abs(marg - np.eye(n)))))
    return CPTPReport(
        cp_ok=worst_cp <= tol,
        tp_ok=worst_tp <= tol,
        max_violation=max(worst_cp, worst_tp),
    )


def _require_source(f: Channel, system: System):
    if f.source != system:
        raise DomainMismatch(f"channel expects {f.source}, got a state on {system}")


def apply_blocks(f: Channel, blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Push raw block matrices (batched on a leading axis or not) through ``f``."""
    out = []
    for j in range(f.target.num_blocks):
        acc = 0
        for i, rho in enumerate(blocks):
            acc = acc + np.einsum("...ab,axby->...xy", rho, f.component4(j, i))
        out.append(acc)
    return out


def apply(f: Channel, omega: State) -> State:
    _require_source(f, omega.system)
    return State(f.target, apply_blocks(f, omega.block_ops))


def compose(g: Channel, f: Channel) -> Channel:
    """The channel ``g ∘ f`` (apply ``f`` first)."""
    if f.target != g.source:
        raise DomainMismatch(f"cannot compose: {f.target} != {g.source}")
    grid = []
    for k, mk in enumerate(g.target.block_dims):
        row = []
        for i, ni in enumerate(f.source.block_dims):
            acc = np.zeros((ni, mk, ni, mk), dtype=complex)
            for j in range(f.target.num_blocks):
                acc += np.einsum("axby,xuyv->aubv", f.component4(j, i), g.component4(k, j))
            row.append(acc.reshape(ni * mk, ni * mk))
        grid.append(row)
    return Channel(f.source, g.target, grid)


def identity_channel(a: System) -> Channel:
    return channel_from_block_map(
        a, a, lambda i, x: [x if j == i else None for j in range(a.num_blocks)]
    )


def trace_channel(a: System) -> Channel:
    """The unique channel from ``a`` to the one-point system."""
    return channel_from_block_map(a, make_classical_system(1), lambda i, x: [np.trace(x).reshape(1, 1)])


def direct_sum_channels(f: Channel, g: Channel) -> Channel:
    src = System(f.source.block_dims + g.source.block_dims)
    tgt = System(f.target.block_dims + g.target.block_dims)
    ka, kb = f.source.num_blocks, f.target.num_blocks
    grid = []
    for j, m in enumerate(tgt.block_dims):
        row = []
        for i, n in enumerate(src.block_dims):
            if j < kb and i < ka:
                row.append(f.choi[j][i])
            elif j >= kb and i >= ka:
                row.append(g.choi[j - kb][i - ka])
            else:
                row.append(np.zeros((n * m, n * m)))
        grid.append(row)
    return Channel(src, tgt, grid)


def from_stochastic_matrix(s, x_size: int | None = None, y_size: int | None = None) -> Channel:
    """Classical channel ``C^X -> C^Y`` from a ``|Y| x |X|`` column-stochastic matrix."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2:
        raise InvalidArgument("stochastic matrix must be 2-dimensional")
    y_size = s.shape[0] if y_size is None else y_size
    x_size = s.shape[1] if x_size is None else x_size
    if s.shape != (y_size, x_size):
        raise InvalidArgument(f"expected shape {(y_size, x_size)}, got {s.shape}")
    if np.any(s < 0) or np.max(np.abs(s.sum(axis=0) - 1.0)) > TOL_TP:
        raise InvalidArgument("matrix is not column-stochastic")
    grid = [[[[s[y, x]]] for x in range(x_size)] for y in range(y_size)]
    return Channel(make_classical_system(x_size), make_classical_system(y_size), grid)


def _check_orthonormal(psis: Sequence[PureState], tol: float) -> System:
    if len(psis) == 0:
        raise InvalidArgument("need at least one pure state")
    system = psis[0].system
    for p in psis:
        if p.system != system:
            raise InvalidArgument("pure states live on different systems")
    for a in range(len(psis)):
        for b in range(a + 1, len(psis)):
            pa, pb = psis[a], psis[b]
            if pa.block_index == pb.block_index and abs(np.vdot(pa.vector, pb.vector)) > tol:
                raise InvalidArgument(f"pure states {a} and {b} are not orthogonal")
    return system


def embedding_channel(psis: Sequence[PureState], tol: float = TOL_ORTHO) -> Channel:
    """Classical-to-quantum channel sending point mass ``z`` to ``psis[z]``."""
    a = _check_orthonormal(psis, tol)
    z = make_classical_system(len(psis))
    return channel_from_block_map(
        z,
        a,
        lambda i, x: [
            x[0, 0] * psis[i].projector() if j == psis[i].block_index else None
            for j in range(a.num_blocks)
        ],
    )


def measurement_channel(psis: Sequence[PureState], tol: float = TOL_ORTHO) -> Channel:
    """Measure in a complete orthonormal family: ``omega -> [<psi_z|omega|psi_z>]_z``."""
    a = _check_orthonormal(psis, tol)
    if len(psis) != a.total_dim:
        raise InvalidArgument(f"family of {len(psis)} states is incomplete for {a}")
    z = make_classical_system(len(psis))

    def fn(i, x):
        return [
            np.vdot(p.vector, x @ p.vector).reshape(1, 1) if p.block_index == i else None
            for p in psis
        ]

    return channel_from_block_map(a, z, fn)


def isometric_channel(v, target: System | None = None, target_block: int = 0) -> Channel:
    """``rho -> V rho V^dagger`` from ``Mat_n`` into one block of ``target``."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2:
        raise InvalidArgument("isometry must be a matrix")
    m, n = v.shape
    if np.max(np.abs(v.conj().T @ v - np.eye(n))) > TOL_ISOMETRY:
        raise InvalidArgument("V is not an isometry (V^dagger V != I)")
    target = System((m,)) if target is None else target
    if not 0 <= target_block < target.num_blocks or target.block_dims[target_block] != m:
        raise InvalidArgument(f"block {target_block} of {target} cannot hold an order-{m} image")
    return channel_from_block_map(
        System((n,)),
        target,
        lambda i, x: [v @ x @ v.conj().T if j == target_block else None for j in range(target.num_blocks)],
    )


def channel_distance(f: Channel, g: Channel) -> float:
    """Max over components of the Frobenius distance between Choi matrices."""
    if f.source != g.source or f.target != g.target:
        raise DomainMismatch("channels have different source or target")
    return max(
        float(np.linalg.norm(a - b))
        for ra, rb in zip(f.choi, g.choi)
        for a, b in zip(ra, rb)
    )


def verify_left_inverse(g: Channel, f: Channel, tol: float = 1e-9) -> bool:
    """True iff ``g ∘ f`` is the identity channel on ``f.source``."""
    if f.target != g.source or g.target != f.source:
        raise DomainMismatch("g must map f.target back to f.source")
    gf = compose(g, f)
    ident = identity_channel(f.source)
    dev = max(
        float(np.max(np.abs(a - b)))
        for ra, rb in zip(gf.choi, ident.choi)
        for a, b in zip(ra, rb)
    )
    return dev <= tol


def max_choi_deviation(f: Channel, g: Channel) -> float:
    if f.source != g.source or f.target != g.target:
        raise DomainMismatch("channels have different source or target")
    return max(
        float(np.max(np.abs(a - b))) for ra, rb in zip(f.choi, g.choi) for a, b in zip(ra, rb)
    )


@dataclass(frozen=True, eq=False)
class PurityVerdict:
    """Outcome of a pure-to-pure test.

    ``exact`` means no sampling was needed (every source block has order 1).
    A negative verdict always carries a concrete ``witness`` input.
    """

    holds: bool
    exact: bool
    witness: PureState | None = None

    def __bool__(self):
        return self.holds

    @property
    def label(self) -> str:
        if not self.holds:
            return "false"
        return "true-exact" if self.exact else "true-sampled"


def _haar_vectors(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _images_pure(f: Channel, i: int, vecs: np.ndarray, tol: float) -> np.ndarray:
    """Boolean mask: is the image of each pure input ``vecs[s]`` in block ``i`` pure?"""
    rhos = np.einsum("sa,sb->sab", vecs, vecs.conj())
    traces = []
    purities = []
    for j in range(f.target.num_blocks):
        out = np.einsum("sab,axby->sxy", rhos, f.component4(j, i))
        traces.append(np.einsum("sxx->s", out).real)
        purities.append(np.einsum("sxy,sxy->s", out, out.conj()).real)
    traces = np.array(traces)
    purities = np.array(purities)
    support = traces > tol
    single = support.sum(axis=0) == 1
    top = np.argmax(traces, axis=0)
    best = purities[top, np.arange(vecs.shape[0])]
    return single & (best >= 1.0 - tol)


def is_pure_to_pure(
    f: Channel,
    num_samples: int = DEFAULT_PURITY_SAMPLES,
    tol: float = TOL_PURE_TO_PURE,
    rng_seed=0,
) -> PurityVerdict:
    """Test whether ``f`` maps pure states to pure states.

    Order-1 source blocks have a single pure state, so they are checked
    exactly. Larger blocks are probed with the standard basis plus
    ``num_samples`` Haar-random vectors.
    """
    rng = np.random.default_rng(rng_seed)
    exact = True
    for i, n in enumerate(f.source.block_dims):
        vecs = np.eye(n, dtype=complex)
        if n > 1:
            exact = False
            vecs = np.vstack([vecs, _haar_vectors(rng, n, num_samples)])
        ok = _images_pure(f, i, vecs, tol)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            return PurityVerdict(False, exact, PureState(f.source, i, vecs[bad]))
    return PurityVerdict(True, exact)


def image_is_pure(f: Channel, psi: PureState, tol: float = TOL_PURE_TO_PURE) -> bool:
    return is_pure(apply(f, psi.to_state()), tol)
