import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finstate.algebra import (
    PureState,
    State,
    System,
    classical_state_from_probs,
    direct_sum_states,
    make_classical_system,
)
from finstate.channels import (
    direct_sum_channels,
    from_stochastic_matrix,
    identity_channel,
    isometric_channel,
    max_choi_deviation,
    measurement_channel,
    trace_channel,
    verify_left_inverse,
)
from finstate.entropy import segal, shannon
from finstate.errors import DomainMismatch, InvalidArgument, PreconditionViolated
from finstate.functor import (
    CheckReport,
    EntropyFunctor,
    Morphism,
    binary_entropy,
    check_bfl_restriction,
    check_continuity,
    check_convex_linearity,
    check_functoriality,
    check_positivity,
    compose_morphisms,
    evaluate,
    factorization_deviations,
    factorize_state,
    fannes_audenaert_schedule,
    identity_morphism,
    linear_schedule,
    morphism_distance,
    s_of,
    trace_morphism,
)
from finstate.harness.generators import (
    depolarizing_channel,
    haar_isometry,
    random_cptp,
    random_state,
)

from conftest import block_lists, seeds

LN2 = math.log(2)
H1 = EntropyFunctor(1.0)
QUBIT = System([2])
PLUS = PureState(QUBIT, 0, np.array([1, 1]) / np.sqrt(2))
DEPHASE = measurement_channel([PureState(QUBIT, 0, [1, 0]), PureState(QUBIT, 0, [0, 1])])
UNIFORM2 = classical_state_from_probs([0.5, 0.5])


def test_entropy_functor_rejects_negative_scale():
    with pytest.raises(InvalidArgument):
        EntropyFunctor(-1.0)


def test_morphism_target_is_validated(rng):
    omega = random_state(rng, QUBIT)
    with pytest.raises(InvalidArgument):
        Morphism(identity_channel(QUBIT), omega, target_state=random_state(rng, QUBIT))
    with pytest.raises(InvalidArgument):
        Morphism(identity_channel(System([3])), omega)
    with pytest.raises(InvalidArgument):
        evaluate(H1, identity_channel(QUBIT))


def test_evaluate_examples(rng):
    omega = random_state(rng, System([2, 3]))
    assert evaluate(EntropyFunctor(2.5), identity_morphism(omega)) == 0.0
    assert evaluate(EntropyFunctor(2.5), trace_morphism(omega)) == pytest.approx(2.5 * segal(omega), abs=1e-12)
    # dephasing a pure state: 0 - ln 2
    assert evaluate(H1, Morphism(DEPHASE, PLUS.to_state())) == pytest.approx(-LN2, abs=1e-12)


def test_s_of_examples(rng):
    assert s_of(H1, PLUS.to_state()) == pytest.approx(0, abs=1e-12)
    assert s_of(H1, UNIFORM2) == pytest.approx(LN2, abs=1e-15)
    assert s_of(EntropyFunctor(2.0), State(QUBIT, [np.eye(2) / 2])) == pytest.approx(2 * LN2, abs=1e-15)


@given(seeds, block_lists, st.floats(0, 10))
def test_s_of_is_scaled_segal(seed, dims, c):
    omega = random_state(np.random.default_rng(seed), System(dims))
    assert abs(s_of(EntropyFunctor(c), omega) - c * segal(omega)) <= 1e-10 * max(1, c)


def test_compose_morphisms_identity_and_trace(rng):
    a, b = System([2, 1]), System([3])
    omega = random_state(rng, a)
    f_m = Morphism(random_cptp(rng, a, b), omega)
    left = compose_morphisms(identity_morphism(f_m.target_state), f_m)
    right = compose_morphisms(f_m, identity_morphism(omega))
    for m in (left, right):
        assert max_choi_deviation(m.channel, f_m.channel) <= 1e-12
    traced = compose_morphisms(trace_morphism(f_m.target_state), f_m)
    assert max_choi_deviation(traced.channel, trace_channel(a)) <= 1e-10


def test_compose_morphisms_mismatch(rng):
    omega = random_state(rng, QUBIT)
    f_m = Morphism(identity_channel(QUBIT), omega)
    g_m = identity_morphism(random_state(rng, QUBIT))
    with pytest.raises(DomainMismatch):
        compose_morphisms(g_m, f_m)
    with pytest.raises(DomainMismatch):
        compose_morphisms(identity_morphism(UNIFORM2), f_m)


@given(seeds, block_lists, block_lists, block_lists)
def test_functoriality_random_pairs(seed, da, db, dc):
    rng = np.random.default_rng(seed)
    a, b, c = System(da), System(db), System(dc)
    f_m = Morphism(random_cptp(rng, a, b), random_state(rng, a))
    g_m = Morphism(random_cptp(rng, b, c), f_m.target_state)
    composite = compose_morphisms(g_m, f_m)
    assert composite.source_state is f_m.source_state
    rep = check_functoriality(H1, g_m, f_m)
    assert rep.passed and rep.max_deviation <= 1e-9


def test_functoriality_trace_instance(rng):
    a, b = System([2, 2]), System([3])
    omega = random_state(rng, a)
    f_m = Morphism(random_cptp(rng, a, b), omega)
    g_m = trace_morphism(f_m.target_state)
    assert check_functoriality(H1, g_m, f_m).passed
    lhs = evaluate(H1, g_m) + evaluate(H1, f_m)
    assert lhs == pytest.approx(evaluate(H1, trace_morphism(omega)), abs=1e-12)


@given(seeds, block_lists, block_lists)
def test_value_is_drop_of_state_entropy(seed, da, db):
    rng = np.random.default_rng(seed)
    omega = random_state(rng, System(da))
    m = Morphism(random_cptp(rng, System(da), System(db)), omega)
    assert abs(evaluate(H1, m) - (s_of(H1, omega) - s_of(H1, m.target_state))) <= 1e-10


@given(seeds, block_lists, block_lists, st.floats(0, 100))
def test_scale_equivariance_exact(seed, da, db, c):
    rng = np.random.default_rng(seed)
    m = Morphism(random_cptp(rng, System(da), System(db)), random_state(rng, System(da)))
    assert evaluate(EntropyFunctor(2 * c), m) == 2 * evaluate(EntropyFunctor(c), m)


def test_convex_linearity_worked_instance():
    tr = trace_channel(make_classical_system(2))
    rep = check_convex_linearity(H1, tr, tr, UNIFORM2, UNIFORM2, 0.3)
    assert rep.max_deviation <= 1e-12
    # oracle: c((ln 2 + S(0.3, 0.7)) - S(0.3, 0.7)) = ln 2 on the left, 0.3 ln 2 + 0.7 ln 2 on the right
    lhs = shannon([0.15, 0.15, 0.35, 0.35]) - shannon([0.3, 0.7])
    assert lhs == pytest.approx(LN2, abs=1e-12)


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_convex_linearity_endpoints(rng, lam):
    f = isometric_channel(haar_isometry(rng, 3, 2))
    g = trace_channel(System([3]))
    omega, xi = random_state(rng, f.source), random_state(rng, g.source)
    assert check_convex_linearity(H1, f, g, omega, xi, lam).passed
    single = evaluate(H1, Morphism(f, omega)) if lam == 1 else evaluate(H1, Morphism(g, xi))
    whole = evaluate(H1, Morphism(direct_sum_channels(f, g), direct_sum_states(lam, omega, xi)))
    assert whole == pytest.approx(single, abs=1e-12)


def test_convex_linearity_preconditions():
    tr = trace_channel(QUBIT)
    with pytest.raises(InvalidArgument):
        check_convex_linearity(H1, tr, tr, PLUS.to_state(), PLUS.to_state(), 1.5)
    with pytest.raises(PreconditionViolated):
        check_convex_linearity(H1, DEPHASE, tr, PLUS.to_state(), PLUS.to_state(), 0.5)


def test_positivity_examples(rng):
    f = isometric_channel(haar_isometry(rng, 4, 2))
    for _ in range(10):
        assert check_positivity(H1, f, random_state(rng, f.source)).passed

    omega = random_state(rng, System([2, 2]))
    fz = factorize_state(omega)
    rep = check_positivity(H1, fz.embed, fz.gamma, left_inverse=fz.measure)
    assert rep.passed and rep.max_deviation <= 1e-9

    merge = from_stochastic_matrix([[1, 1]])
    rep = check_positivity(H1, merge, UNIFORM2)
    assert rep.passed
    assert evaluate(H1, Morphism(merge, UNIFORM2)) == pytest.approx(LN2 - 0.0, abs=1e-15)


def test_positivity_scope_violation_is_not_a_pass():
    with pytest.raises(PreconditionViolated):
        check_positivity(H1, DEPHASE, PLUS.to_state())
    merge = from_stochastic_matrix([[1, 1]])
    with pytest.raises(PreconditionViolated):
        # merge has no left inverse, so a claimed one cannot verify
        check_positivity(H1, merge, UNIFORM2, left_inverse=from_stochastic_matrix([[1], [0]]))


def test_continuity_constant_sequence(rng):
    m = Morphism(random_cptp(rng, QUBIT, QUBIT), random_state(rng, QUBIT))
    rep = check_continuity(H1, [m] * 5, m, linear_schedule(1.0))
    assert rep.max_deviation == 0.0 and rep.passed


def test_continuity_classical_tail():
    tr = trace_channel(make_classical_system(2))
    limit = Morphism(tr, classical_state_from_probs([0.0, 1.0]))
    ns = np.unique(np.geomspace(2, 1e6, 30).astype(int))
    seq = [Morphism(tr, classical_state_from_probs([1 / n, 1 - 1 / n])) for n in ns]
    values = [evaluate(H1, m) for m in seq]
    assert all(b < a for a, b in zip(values, values[1:]))
    # oracle: S(1/n, 1 - 1/n) evaluated directly
    assert values[-1] == pytest.approx(binary_entropy(1e-6), rel=1e-9)
    assert values[-1] < 2e-5
    assert check_continuity(H1, seq, limit, fannes_audenaert_schedule(2)).passed
    # the classical tail has unbounded slope, so no fixed linear schedule fits it
    assert not check_continuity(H1, seq, limit, linear_schedule(3.0)).passed


def test_continuity_depolarizing_shrinks(rng):
    omega = random_state(rng, QUBIT)
    limit = Morphism(depolarizing_channel(2, 0.4), omega)
    seq = [Morphism(depolarizing_channel(2, 0.4 + 0.3 * 2.0**-k), omega) for k in range(1, 15)]
    gaps = [abs(evaluate(H1, m) - evaluate(H1, limit)) for m in seq]
    dists = [morphism_distance(m, limit) for m in seq]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert check_continuity(H1, seq, limit, linear_schedule(20.0)).passed


def test_continuity_rejects_divergent_sequence(rng):
    omega = random_state(rng, QUBIT)
    limit = Morphism(depolarizing_channel(2, 0.1), omega)
    seq = [Morphism(depolarizing_channel(2, 0.9), omega)] * 3
    with pytest.raises(InvalidArgument):
        check_continuity(H1, seq, limit, linear_schedule(1.0))


def test_factorize_examples(rng):
    fz = factorize_state(PLUS.to_state())
    assert fz.gamma.block_traces.tolist()[0] == pytest.approx(1.0)
    assert segal(PLUS.to_state()) == pytest.approx(0.0, abs=1e-12)

    fz = factorize_state(State(QUBIT, [np.eye(2) / 2]))
    np.testing.assert_allclose(fz.gamma.block_traces, [0.5, 0.5])
    assert shannon(fz.gamma.block_traces) == pytest.approx(LN2)

    omega = random_state(rng, System([3, 2]))
    fz = factorize_state(omega)
    assert fz.z == make_classical_system(5)
    assert verify_left_inverse(fz.measure, fz.embed, 1e-9)
    assert factorization_deviations(H1, omega).worst() <= 1e-9


@given(seeds, block_lists)
def test_factorization_guarantees(seed, dims):
    omega = random_state(np.random.default_rng(seed), System(dims))
    devs = factorization_deviations(H1, omega)
    assert devs.worst() <= 1e-9


def test_bfl_restriction_examples():
    rep = check_bfl_restriction(H1, identity_channel(System([1, 1, 1])), classical_state_from_probs([0.2, 0.3, 0.5]))
    assert rep.max_deviation <= 1e-15
    merge = from_stochastic_matrix([[1, 1]])
    assert check_bfl_restriction(H1, merge, UNIFORM2).passed
    assert evaluate(H1, Morphism(merge, UNIFORM2)) == pytest.approx(LN2, abs=1e-15)
    with pytest.raises(DomainMismatch):
        check_bfl_restriction(H1, trace_channel(QUBIT), PLUS.to_state())
    with pytest.raises(PreconditionViolated):
        check_bfl_restriction(H1, from_stochastic_matrix([[0.5, 0.5], [0.5, 0.5]]), UNIFORM2)


reports = st.builds(
    lambda dev, t, tol: CheckReport.single("p", dev, tol, {"trial": t}),
    st.one_of(st.floats(0, 1e-6), st.just(float("inf"))),
    st.integers(0, 50),
    st.sampled_from([1e-9, 1e-7]),
)


@given(st.lists(reports, min_size=1, max_size=8), st.randoms())
def test_report_merge_order_independent(items, random):
    def fold(xs):
        out = xs[0]
        for x in xs[1:]:
            out = out.merge(x)
        return out

    shuffled = list(items)
    random.shuffle(shuffled)
    a, b = fold(items), fold(shuffled)
    assert a.to_dict() == b.to_dict()
    assert a.trials == len(items)
    assert a.passed == (a.max_deviation <= a.tolerance)
    assert (a.witness is None) == a.passed


def test_report_witness_only_when_failing():
    assert CheckReport.single("p", 0.0, 0.0).witness is None
    failing = CheckReport.single("p", 1.0, 0.5, {"x": 1})
    assert failing.witness == {"x": 1, "trial": 0} and not failing.passed
    assert CheckReport.single("p", float("nan"), 1.0).passed is False
