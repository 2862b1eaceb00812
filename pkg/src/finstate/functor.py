"""Morphisms of the state category, the entropy functor ``H_c`` and its checkers.

A morphism is a channel together with the state it starts from; its target
state is derived. ``H_c`` sends a morphism ``f_omega`` to
``c * (S(omega) - S(f(omega)))`` with ``S`` the Segal entropy.

Every ``check_*`` function returns a single-trial :class:`CheckReport`.
Campaigns fold many of them together with :meth:`CheckReport.merge`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .algebra import (
    State,
    System,
    classical_state_from_probs,
    direct_sum_states,
    make_classical_system,
    spectral_decompose,
    states_close,
    trace_distance,
)
from .channels import (
    Channel,
    apply,
    channel_distance,
    compose,
    direct_sum_channels,
    embedding_channel,
    identity_channel,
    is_pure_to_pure,
    max_choi_deviation,
    measurement_channel,
    trace_channel,
)
from .entropy import segal, shannon
from .errors import DomainMismatch, InvalidArgument, PreconditionViolated

TOL_MORPHISM = 1e-10


class Morphism:
    """``f_omega``: a channel applied at a fixed source state."""

    __slots__ = ("channel", "source_state", "target_state")

    def __init__(self, channel: Channel, source_state: State, target_state: State | None = None):
        if channel.source != source_state.system:
            raise InvalidArgument(
                f"channel source {channel.source} does not match state system {source_state.system}"
            )
        image = apply(channel, source_state)
        if target_state is not None and states_close(image, target_state) > TOL_MORPHISM:
            raise InvalidArgument("target state is not the image of the source state")
        object.__setattr__(self, "channel", channel)
        object.__setattr__(self, "source_state", source_state)
        object.__setattr__(self, "target_state", image)

    def __setattr__(self, name, value):
        raise AttributeError("Morphism is immutable")

    @property
    def source_system(self) -> System:
        return self.source_state.system

    @property
    def target_system(self) -> System:
        return self.channel.target

    def __repr__(self):
        return f"Morphism({self.channel!r} at {self.source_state!r})"


def identity_morphism(omega: State) -> Morphism:
    return Morphism(identity_channel(omega.system), omega)


def trace_morphism(omega: State) -> Morphism:
    return Morphism(trace_channel(omega.system), omega)


def compose_morphisms(g_m: Morphism, f_m: Morphism) -> Morphism:
    """``g_{f(omega)} ∘ f_omega = (g ∘ f)_omega``."""
    if f_m.target_system != g_m.source_system:
        raise DomainMismatch(f"{f_m.target_system} != {g_m.source_system}")
    if states_close(f_m.target_state, g_m.source_state) > TOL_MORPHISM:
        raise DomainMismatch("g does not start where f ends")
    composite = Morphism(compose(g_m.channel, f_m.channel), f_m.source_state)
    if states_close(composite.target_state, g_m.target_state) > TOL_MORPHISM:
        raise DomainMismatch("composite target disagrees with g's target")
    return composite


@dataclass(frozen=True)
class EntropyFunctor:
    """``H_c``: scale ``c >= 0`` times the drop in Segal entropy."""

    c: float = 1.0

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise InvalidArgument(f"scale must be a finite non-negative number, got {self.c}")

    def __call__(self, m: Morphism) -> float:
        return evaluate(self, m)


def evaluate(F: EntropyFunctor, m: Morphism) -> float:
    if not isinstance(m, Morphism):
        raise InvalidArgument("evaluate expects a Morphism")
    return F.c * (segal(m.source_state) - segal(m.target_state))


def s_of(F: EntropyFunctor, omega: State) -> float:
    """``S(omega) := H(Tr_omega)``, the value on the trace morphism."""
    return evaluate(F, trace_morphism(omega))


def _finite(x: float) -> float:
    return math.inf if math.isnan(x) else x


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one property over one or many trials.

    ``passed`` is always ``max_deviation <= tolerance``; a witness is kept
    exactly when the report fails. When merging, the witness of the worst
    trial survives (ties go to the lower trial index), so folding is
    associative and commutative.
    """

    property: str
    trials: int
    max_deviation: float
    tolerance: float
    witness: dict | None = None
    seed: int | None = None
    # candidate witness for the worst trial, kept even while passing
    _worst: dict | None = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return _finite(self.max_deviation) <= self.tolerance

    @classmethod
    def single(cls, prop: str, deviation: float, tolerance: float, instance: dict | None = None, seed=None):
        dev = _finite(float(deviation))
        inst = dict(instance or {})
        inst.setdefault("trial", 0)
        rep = cls(prop, 1, dev, tolerance, seed=seed, _worst=inst)
        return rep._settle()

    def _settle(self) -> "CheckReport":
        return replace(self, witness=None if self.passed else self._worst)

    def merge(self, other: "CheckReport") -> "CheckReport":
        if other.property != self.property:
            raise InvalidArgument("cannot merge reports of different properties")
        a, b = self, other
        key_a = (-a.max_deviation, (a._worst or {}).get("trial", 0))
        key_b = (-b.max_deviation, (b._worst or {}).get("trial", 0))
        worst = a if key_a <= key_b else b
        return replace(
            self,
            trials=a.trials + b.trials,
            max_deviation=max(a.max_deviation, b.max_deviation),
            tolerance=min(a.tolerance, b.tolerance),
            _worst=worst._worst,
        )._settle()

    def to_dict(self) -> dict:
        dev = self.max_deviation
        return {
            "property": self.property,
            "trials": self.trials,
            "max_deviation": dev if math.isfinite(dev) else None,
            "pass": self.passed,
            "witness": self.witness,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


def check_functoriality(F: EntropyFunctor, g_m: Morphism, f_m: Morphism, tol: float = 1e-9) -> CheckReport:
    composite = compose_morphisms(g_m, f_m)
    dev = abs(evaluate(F, composite) - evaluate(F, g_m) - evaluate(F, f_m))
    return CheckReport.single("functoriality", dev, tol)


def _require_pure_to_pure(f: Channel, num_samples: int, rng_seed) -> None:
    verdict = is_pure_to_pure(f, num_samples=num_samples, rng_seed=rng_seed)
    if not verdict:
        raise PreconditionViolated(
            f"{f!r} is not pure-to-pure; witness in block {verdict.witness.block_index}"
        )


def check_convex_linearity(
    F: EntropyFunctor,
    f: Channel,
    g: Channel,
    omega: State,
    xi: State,
    lam: float,
    tol: float = 1e-9,
    num_samples: int = 64,
    rng_seed=0,
) -> CheckReport:
    """``H((f⊕g) at lam*omega ⊕ (1-lam)*xi) = lam*H(f_omega) + (1-lam)*H(g_xi)``."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgument(f"mixing weight must lie in [0, 1], got {lam}")
    _require_pure_to_pure(f, num_samples, rng_seed)
    _require_pure_to_pure(g, num_samples, rng_seed)
    lhs = evaluate(F, Morphism(direct_sum_channels(f, g), direct_sum_states(lam, omega, xi)))
    rhs = lam * evaluate(F, Morphism(f, omega)) + (1.0 - lam) * evaluate(F, Morphism(g, xi))
    return CheckReport.single("convex_linearity", abs(lhs - rhs), tol)


def check_positivity(
    F: EntropyFunctor,
    f: Channel,
    omega: State,
    tol: float = 1e-9,
    left_inverse: Channel | None = None,
    num_samples: int = 64,
    rng_seed=0,
) -> CheckReport:
    """``H(f_omega) >= 0`` for pure-to-pure ``f``; ``= 0`` given a left inverse.

    The deviation is the amount of negativity, or ``|H|`` when a
    left-inverse witness is supplied. A left inverse that does not verify
    counts as a precondition failure, as does a failed pure-to-pure test.
    """
    _require_pure_to_pure(f, num_samples, rng_seed)
    value = evaluate(F, Morphism(f, omega))
    dev = max(0.0, -value)
    if left_inverse is not None:
        if max_choi_deviation(compose(left_inverse, f), identity_channel(f.source)) > 1e-9:
            raise PreconditionViolated("supplied left inverse does not invert f")
        dev = abs(value)
    return CheckReport.single("positivity", dev, tol, {"value": value})


ToleranceSchedule = Callable[[float], float]


def morphism_distance(m: Morphism, n: Morphism) -> float:
    """``max(channel_distance, trace distance of source states)``."""
    return max(channel_distance(m.channel, n.channel), trace_distance(m.source_state, n.source_state))


def check_continuity(
    F: EntropyFunctor,
    sequence: Sequence[Morphism],
    limit: Morphism,
    tol_schedule: ToleranceSchedule,
    tol: float = 1.0,
    convergence_tol: float = 1e-4,
) -> CheckReport:
    """``|H(m_n) - H(limit)| <= tol_schedule(d_n)`` along a convergent sequence.

    The reported deviation is the worst ratio ``|H(m_n) - H(limit)| /
    tol_schedule(d_n)``, so with the default ``tol = 1`` the report passes
    exactly when every term sits inside its schedule.
    """
    if len(sequence) == 0:
        raise InvalidArgument("empty morphism sequence")
    dists = [morphism_distance(m, limit) for m in sequence]
    if dists[-1] > convergence_tol or dists[-1] > dists[0] and len(dists) > 1:
        raise InvalidArgument(f"sequence does not converge (final distance {dists[-1]:.3g})")
    h_lim = evaluate(F, limit)
    worst = 0.0
    worst_n = 0
    for n, (m, d) in enumerate(zip(sequence, dists)):
        gap = abs(evaluate(F, m) - h_lim)
        bound = tol_schedule(d)
        ratio = gap / bound if bound > 0 else (0.0 if gap == 0 else math.inf)
        if ratio > worst:
            worst, worst_n = ratio, n
    return CheckReport.single(
        "continuity", worst, tol, {"index": worst_n, "distance": dists[worst_n]}
    )


def linear_schedule(lipschitz: float, slack: float = 1e-9) -> ToleranceSchedule:
    return lambda d: lipschitz * d + slack


def binary_entropy(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return -t * math.log(t) - (1.0 - t) * math.log(1.0 - t)


def fannes_audenaert_schedule(dim: int, c: float = 1.0, slack: float = 1e-9) -> ToleranceSchedule:
    """Sharp continuity modulus of entropy in trace distance ``t``.

    ``|S(a) - S(b)| <= t log(dim - 1) + h(t)`` for ``t <= 1 - 1/dim``; beyond
    that the trivial bound ``log dim`` is used. When spanning source and
    target, apply it to both and add.
    """

    def sched(t):
        t = min(t, 1.0)
        if t > 1.0 - 1.0 / dim:
            return c * math.log(dim) + slack
        return c * (t * math.log(max(dim - 1, 1)) + binary_entropy(t)) + slack

    return sched


class Factorization(NamedTuple):
    z: System
    gamma: State
    embed: Channel
    measure: Channel


def factorize_state(omega: State) -> Factorization:
    """Split ``omega`` through a classical system via its spectral decomposition.

    ``embed ∘ gamma = omega``, ``measure ∘ embed = id`` and ``gamma`` carries
    the eigenvalues of ``omega``.
    """
    gammas, psis = spectral_decompose(omega)
    z = make_classical_system(len(psis))
    gamma = classical_state_from_probs(gammas)
    return Factorization(z, gamma, embedding_channel(psis), measurement_channel(psis))


class FactorizationDeviations(NamedTuple):
    left_inverse: float
    reconstruction: float
    entropy: float
    h_embed: float

    def worst(self) -> float:
        return max(self)


def factorization_deviations(F: EntropyFunctor, omega: State) -> FactorizationDeviations:
    fz = factorize_state(omega)
    return FactorizationDeviations(
        left_inverse=max_choi_deviation(compose(fz.measure, fz.embed), identity_channel(fz.z)),
        reconstruction=float(
            max(np.linalg.norm(a - b) for a, b in zip(apply(fz.embed, fz.gamma).block_ops, omega.block_ops))
        ),
        entropy=abs(shannon([b[0, 0].real for b in fz.gamma.block_ops]) - segal(omega)),
        h_embed=abs(evaluate(F, Morphism(fz.embed, fz.gamma))),
    )


def check_bfl_restriction(
    F: EntropyFunctor, f: Channel, p: State, tol: float = 1e-9
) -> CheckReport:
    """Restriction to classical deterministic maps: ``H(f_p) = c(H(p) - H(f p))``.

    The right side is computed with a plain matrix-vector product on the
    stochastic matrix, independently of the Choi machinery.
    """
    if not (f.is_classical and p.system.is_classical):
        raise DomainMismatch("classical restriction needs classical source, target and state")
    s = f.stochastic_matrix()
    if not np.all(np.isclose(s, 0.0, atol=1e-12) | np.isclose(s, 1.0, atol=1e-12)):
        raise PreconditionViolated("channel is not deterministic (columns are not point masses)")
    probs = np.array([b[0, 0].real for b in p.block_ops])
    expected = F.c * (shannon(probs) - shannon(s @ probs))
    dev = abs(evaluate(F, Morphism(f, p)) - expected)
    return CheckReport.single("classical_restriction", dev, tol)
