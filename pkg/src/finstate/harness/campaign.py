"""Seeded verification campaigns over every property of the entropy functor.

Each trial draws from its own generator, seeded by
``SeedSequence([seed, crc32(property), trial])``. Trials are therefore
independent of execution order, and per-trial reports fold into one
:class:`CheckReport` per property with an order-insensitive merge.
"""

from __future__ import annotations

import datetime as _dt
import math
import time
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from ..algebra import (
    PureState,
    State,
    System,
    classical_state_from_probs,
    embed_state_full,
)
from ..channels import Channel, measurement_channel
from ..entropy import segal, shannon, von_neumann
from ..errors import FinStateError, InvalidArgument, PreconditionViolated
from ..functor import (
    CheckReport,
    EntropyFunctor,
    Morphism,
    check_bfl_restriction,
    check_continuity,
    check_convex_linearity,
    check_functoriality,
    check_positivity,
    evaluate,
    factorization_deviations,
    factorize_state,
    linear_schedule,
)
from . import generators as gen
from .jsonio import channel_to_json, state_to_json, write_json

DEFAULT_TOLERANCES = {
    "functoriality": 1e-9,
    "convex_linearity": 1e-9,
    "positivity": 1e-9,
    "left_invertible_zero": 1e-9,
    # measured as a ratio to the continuity schedule, not in nats
    "continuity": 1.0,
    "segal_vn": 1e-10,
    "segal_shannon": 1e-12,
    "classical_restriction": 1e-9,
    "negativity_witness": 1e-9,
    "factorization": 1e-9,
}


@dataclass
class CampaignConfig:
    seed: int = 42
    trials: int = 1000
    max_blocks: int = 3
    max_block_dim: int = 4
    tolerances: dict = field(default_factory=dict)
    output: str | None = "finstate-report.json"
    c: float = 1.0
    properties: list | None = None
    purity_samples: int = 64

    def __post_init__(self):
        if self.trials < 1 or self.max_blocks < 1 or self.max_block_dim < 1:
            raise InvalidArgument("trials, max_blocks and max_block_dim must be >= 1")
        if self.purity_samples < 0:
            raise InvalidArgument("purity_samples must be >= 0")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if self.properties is not None:
            unknown |= set(self.properties) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise InvalidArgument(f"unknown properties: {sorted(unknown)}")
        # zero is allowed so faults can be injected on purpose
        if any(not (t >= 0) for t in self.tolerances.values()):
            raise InvalidArgument("tolerances must be non-negative")
        EntropyFunctor(self.c)

    def tolerance(self, prop: str) -> float:
        return float(self.tolerances.get(prop, DEFAULT_TOLERANCES[prop]))

    def selected(self) -> list[str]:
        if self.properties is None:
            return list(DEFAULT_TOLERANCES)
        return [p for p in DEFAULT_TOLERANCES if p in self.properties]

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise InvalidArgument(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidArgument(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = {p: self.tolerance(p) for p in DEFAULT_TOLERANCES}
        return d


@dataclass
class CampaignReport:
    config: CampaignConfig
    reports: list
    duration_s: float
    timestamp: str
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "properties": [r.to_dict() for r in self.reports],
            "pass": self.passed,
            "units": "nats",
            "notes": self.notes,
            "duration_s": self.duration_s,
            "timestamp": self.timestamp,
        }


class _Ctx:
    def __init__(self, config: CampaignConfig):
        self.config = config
        self.F = EntropyFunctor(config.c)
        self.kb = config.max_blocks
        self.nd = config.max_block_dim

    def system(self, rng) -> System:
        return gen.random_system(rng, self.kb, self.nd)

    def classical_size(self, rng) -> int:
        return int(rng.integers(1, self.kb * self.nd + 1))


# A trial returns (deviation, witness builder, extras). The witness builder is
# only called for failing trials.
Trial = Callable[[np.random.Generator, _Ctx, int], tuple]


def _functoriality(rng, ctx, t):
    a, b, c = ctx.system(rng), ctx.system(rng), ctx.system(rng)
    f, g = gen.random_cptp(rng, a, b), gen.random_cptp(rng, b, c)
    omega = gen.random_state(rng, a)
    f_m = Morphism(f, omega)
    g_m = Morphism(g, f_m.target_state)
    rep = check_functoriality(ctx.F, g_m, f_m)
    return rep.max_deviation, lambda: {
        "f": channel_to_json(f),
        "g": channel_to_json(g),
        "omega": state_to_json(omega),
    }, None


def _mixing_weight(rng, t):
    if t % 10 == 0:
        return 0.0
    if t % 10 == 1:
        return 1.0
    return float(rng.uniform())


def _convex_linearity(rng, ctx, t):
    d1 = gen.random_pure_to_pure(rng, None, ctx.kb, ctx.nd)
    d2 = gen.random_pure_to_pure(rng, None, ctx.kb, ctx.nd)
    omega = gen.random_state(rng, d1.channel.source)
    xi = gen.random_state(rng, d2.channel.source)
    lam = _mixing_weight(rng, t)
    rep = check_convex_linearity(
        ctx.F, d1.channel, d2.channel, omega, xi, lam,
        num_samples=ctx.config.purity_samples, rng_seed=int(rng.integers(2**32)),
    )
    return rep.max_deviation, lambda: {
        "families": [d1.family, d2.family],
        "lambda": lam,
        "f": channel_to_json(d1.channel),
        "g": channel_to_json(d2.channel),
        "omega": state_to_json(omega),
        "xi": state_to_json(xi),
    }, None


def _positivity(rng, ctx, t):
    draw = gen.random_pure_to_pure(rng, None, ctx.kb, ctx.nd)
    omega = gen.random_state(rng, draw.channel.source)
    rep = check_positivity(
        ctx.F, draw.channel, omega, left_inverse=draw.left_inverse,
        num_samples=ctx.config.purity_samples, rng_seed=int(rng.integers(2**32)),
    )
    return rep.max_deviation, lambda: {
        "family": draw.family,
        "value": rep._worst["value"],
        "has_left_inverse": draw.left_inverse is not None,
        "f": channel_to_json(draw.channel),
        "omega": state_to_json(omega),
    }, None


def _left_invertible_zero(rng, ctx, t):
    omega = gen.random_state(rng, ctx.system(rng))
    fz = factorize_state(omega)
    rep = check_positivity(ctx.F, fz.embed, fz.gamma, left_inverse=fz.measure)
    return rep.max_deviation, lambda: {"omega": state_to_json(omega)}, None


def _factorization(rng, ctx, t):
    omega = gen.random_state(rng, ctx.system(rng))
    devs = factorization_deviations(ctx.F, omega)
    worst = max(devs.left_inverse, devs.reconstruction, devs.entropy)
    return worst, lambda: {"omega": state_to_json(omega), "deviations": devs._asdict()}, None


def continuity_family(rng, dim: int, c: float, steps: int = 20):
    """A depolarizing-family sequence converging to its limit, plus its Lipschitz constant.

    Returns ``(sequence, limit, lipschitz)``. Strength ``s_n -> s`` and the
    source state ``omega_n -> omega`` both move. The constant bounds
    ``|H(m_n) - H(limit)| / d_n`` using the gradient bound
    ``|dS| <= (1 + |log mu|) |d rho|_1`` on states with spectrum above ``mu``
    and ``|Phi(rho) - Psi(rho)|_1 <= dim * channel_distance(Phi, Psi)``.
    """
    a = System((dim,))
    omega = gen.random_state(rng, a)
    tau = gen.random_state(rng, a)
    s = float(rng.uniform(0.05, 1.0))
    delta = float(rng.uniform(-1.0, 1.0)) * min(s, 1.0 - s)
    strengths = [s + delta * 2.0**-n for n in range(1, steps + 1)]
    eps = [0.5 * 2.0**-n for n in range(1, steps + 1)]
    omegas = [State(a, [(1 - e) * omega.block_ops[0] + e * tau.block_ops[0]]) for e in eps]
    seq = [Morphism(gen.depolarizing_channel(dim, sn), wn) for sn, wn in zip(strengths, omegas)]
    limit = Morphism(gen.depolarizing_channel(dim, s), omega)

    mu_src = min(float(np.linalg.eigvalsh(w.block_ops[0])[0]) for w in omegas + [omega])
    mu_tgt = min(strengths + [s]) / dim
    grad = lambda mu: 1.0 + abs(math.log(mu))
    lipschitz = c * (2.0 * grad(mu_src) + grad(mu_tgt) * (dim + 2.0))
    return seq, limit, lipschitz


def _continuity(rng, ctx, t):
    dim = int(rng.integers(2, max(2, ctx.nd) + 1))
    seq, limit, lip = continuity_family(rng, dim, ctx.F.c)
    rep = check_continuity(ctx.F, seq, limit, linear_schedule(lip))
    return rep.max_deviation, lambda: {
        "dim": dim,
        "lipschitz": lip,
        "worst_index": rep._worst["index"],
        "limit_channel": channel_to_json(limit.channel),
        "limit_state": state_to_json(limit.source_state),
    }, {"lipschitz": lip}


def _segal_vn(rng, ctx, t):
    omega = gen.random_state(rng, ctx.system(rng))
    dev = abs(segal(omega) - von_neumann(embed_state_full(omega)))
    return dev, lambda: {"omega": state_to_json(omega)}, None


def _segal_shannon(rng, ctx, t):
    p = gen.random_probs(rng, ctx.classical_size(rng))
    omega = classical_state_from_probs(p)
    dev = abs(segal(omega) - shannon(p))
    return dev, lambda: {"probs": p.tolist()}, None


def _random_function_channel(rng, x, y):
    return gen.deterministic_channel(rng.integers(0, y, size=x), x, y)


def _classical_restriction(rng, ctx, t):
    x, y = ctx.classical_size(rng), ctx.classical_size(rng)
    f = _random_function_channel(rng, x, y)
    p = gen.random_probs(rng, x)
    if x > 1 and rng.uniform() < 0.3:
        p[int(rng.integers(x))] = 0.0
        p = p / p.sum()
    rep = check_bfl_restriction(ctx.F, f, classical_state_from_probs(p))
    return rep.max_deviation, lambda: {
        "stochastic": f.stochastic_matrix().tolist(),
        "probs": p.tolist(),
    }, None


_QUBIT = System((2,))
_DEPHASE = None


def dephasing_channel() -> Channel:
    """Measurement of a qubit in the computational basis."""
    global _DEPHASE
    if _DEPHASE is None:
        _DEPHASE = measurement_channel([PureState(_QUBIT, 0, [1, 0]), PureState(_QUBIT, 0, [0, 1])])
    return _DEPHASE


def negativity_instance(c: float, phase: float = 0.0) -> float:
    """``H_c`` of dephasing ``(|0> + e^{i phase}|1>)/sqrt 2``; equals ``-c log 2``."""
    psi = PureState(_QUBIT, 0, np.array([1.0, np.exp(1j * phase)]) / math.sqrt(2))
    return evaluate(EntropyFunctor(c), Morphism(dephasing_channel(), psi.to_state()))


def _negativity_witness(rng, ctx, t):
    phase = 0.0 if t == 0 else float(rng.uniform(0, 2 * math.pi))
    value = negativity_instance(ctx.F.c, phase)
    dev = abs(value + ctx.F.c * math.log(2))
    return dev, lambda: {"phase": phase, "value": value}, None


TRIALS: dict[str, Trial] = {
    "functoriality": _functoriality,
    "convex_linearity": _convex_linearity,
    "positivity": _positivity,
    "left_invertible_zero": _left_invertible_zero,
    "continuity": _continuity,
    "segal_vn": _segal_vn,
    "segal_shannon": _segal_shannon,
    "classical_restriction": _classical_restriction,
    "negativity_witness": _negativity_witness,
    "factorization": _factorization,
}


def trial_rng(seed: int, prop: str, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(prop.encode()), trial]))


def run_trial(prop: str, config: CampaignConfig, trial: int, ctx: _Ctx | None = None):
    ctx = ctx or _Ctx(config)
    tol = config.tolerance(prop)
    rng = trial_rng(config.seed, prop, trial)
    try:
        dev, build, extra = TRIALS[prop](rng, ctx, trial)
        dev = math.inf if math.isnan(dev) else float(dev)
        instance = {"trial": trial}
        if not dev <= tol:
            instance.update(build(), deviation=dev if math.isfinite(dev) else None)
    except (PreconditionViolated, FinStateError) as exc:
        # scoped checkers never pass silently on out-of-scope draws
        dev, extra = math.inf, None
        instance = {"trial": trial, "status": type(exc).__name__, "message": str(exc)}
    return CheckReport.single(prop, dev, tol, instance, seed=config.seed), extra


def run_property(prop: str, config: CampaignConfig, order: Iterable[int] | None = None):
    """Fold all trials of one property; ``order`` permutes execution for testing."""
    ctx = _Ctx(config)
    indices = range(config.trials) if order is None else order
    report = None
    extras = []
    for t in indices:
        rep, extra = run_trial(prop, config, t, ctx)
        report = rep if report is None else report.merge(rep)
        if extra:
            extras.append(extra)
    return report, extras


def run_campaign(config: CampaignConfig, write: bool = True) -> CampaignReport:
    start = time.perf_counter()
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    reports = []
    notes = {}
    for prop in config.selected():
        rep, extras = run_property(prop, config)
        reports.append(rep)
        if prop == "continuity" and extras:
            lips = [e["lipschitz"] for e in extras]
            notes["continuity"] = {
                "schedule": "L*d + 1e-9",
                "lipschitz_max": max(lips),
                "lipschitz_median": float(np.median(lips)),
            }
    result = CampaignReport(config, reports, time.perf_counter() - start, stamp, notes)
    if write and config.output:
        try:
            write_json(config.output, result.to_dict())
        except OSError as exc:
            raise CampaignIOError(f"cannot write report to {config.output}: {exc}") from exc
    return result


class CampaignIOError(FinStateError, OSError):
    pass
