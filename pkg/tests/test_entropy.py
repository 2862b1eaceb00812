import math

import numpy as np
import pytest
from hypothesis import given

from finstate.algebra import (
    State,
    System,
    classical_state_from_probs,
    conjugate_blocks,
    embed_state_full,
    is_pure,
    spectral_decompose,
)
from finstate.entropy import segal, shannon, von_neumann
from finstate.errors import InvalidArgument
from finstate.harness.generators import haar_unitary, random_probs, random_pure_state, random_state

from conftest import block_lists, seeds

LN2 = math.log(2)
# high-precision (mpmath, 40 digits) values
S_QUARTER = 0.5623351446188083502880303152244588576654
S_ONE_HALF_LN2 = 1.039720770839917964125848182187264852113


def test_shannon_examples():
    assert shannon([1, 0]) == 0.0
    assert shannon([0.5, 0.5]) == pytest.approx(LN2, abs=1e-15)
    assert shannon([0.25, 0.75]) == pytest.approx(S_QUARTER, abs=1e-15)


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [], [float("nan"), 1.0]])
def test_shannon_rejects(bad):
    with pytest.raises(InvalidArgument):
        shannon(bad)


def test_shannon_clips_zero_terms():
    assert shannon([0.5, 0.5, 0.0, 0.0]) == shannon([0.5, 0.5])
    q = 1 - 1e-13
    assert shannon([1e-13, q]) == pytest.approx(-q * math.log(q), rel=1e-12)


def test_von_neumann_examples(rng):
    psi = random_pure_state(rng, System([3])).projector()
    assert von_neumann(psi) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann(np.eye(2) / 2) == pytest.approx(LN2, abs=1e-15)
    u = haar_unitary(rng, 2)
    rho = u @ np.diag([0.25, 0.75]) @ u.conj().T
    assert von_neumann(rho) == pytest.approx(S_QUARTER, abs=1e-12)


@pytest.mark.parametrize("bad", [np.diag([1.5, -0.5]), np.eye(2), [[0.5, 0.5], [0.0, 0.5]], np.ones(3)])
def test_von_neumann_rejects(bad):
    with pytest.raises(InvalidArgument):
        von_neumann(bad)


def test_segal_examples(rng):
    p = [0.1, 0.2, 0.3, 0.4]
    assert segal(classical_state_from_probs(p)) == pytest.approx(shannon(p), abs=1e-15)
    mixed = State(System([1, 2]), [[[0.5]], np.eye(2) / 4])
    assert segal(mixed) == pytest.approx(S_ONE_HALF_LN2, abs=1e-15)
    assert segal(mixed) == pytest.approx(von_neumann(np.diag([0.5, 0.25, 0.25])), abs=1e-15)
    assert segal(random_pure_state(rng, System([2, 3])).to_state()) == pytest.approx(0, abs=1e-12)
    with pytest.raises(InvalidArgument):
        segal(np.eye(2) / 2)


def test_segal_with_exact_zero_blocks():
    s = State(System([2, 1, 3]), [np.diag([0.5, 0.0]), [[0.5]], np.zeros((3, 3))])
    assert segal(s) == pytest.approx(LN2, abs=1e-15)


@given(seeds, block_lists)
def test_segal_equals_von_neumann_of_embedding(seed, dims):
    omega = random_state(np.random.default_rng(seed), System(dims))
    assert abs(segal(omega) - von_neumann(embed_state_full(omega))) <= 1e-10


@given(seeds, block_lists)
def test_segal_decomposes_into_block_weights(seed, dims):
    # S = H(p) + sum p_i S(omega_i)
    omega = random_state(np.random.default_rng(seed), System(dims))
    p = omega.block_traces
    inner = sum(pi * von_neumann(b / pi) for pi, b in zip(p, omega.block_ops))
    assert segal(omega) == pytest.approx(shannon(p / p.sum()) + inner, abs=1e-10)


@given(seeds)
def test_segal_matches_shannon_on_classical(seed):
    rng = np.random.default_rng(seed)
    p = random_probs(rng, int(rng.integers(1, 13)))
    assert abs(segal(classical_state_from_probs(p)) - shannon(p)) <= 1e-12


@given(seeds, block_lists)
def test_segal_bounds(seed, dims):
    omega = random_state(np.random.default_rng(seed), System(dims))
    s = segal(omega)
    assert 0 <= s <= math.log(omega.system.total_dim) + 1e-10
    assert (s <= 1e-12) == is_pure(omega)


@given(seeds, block_lists)
def test_segal_vanishes_exactly_on_pure(seed, dims):
    psi = random_pure_state(np.random.default_rng(seed), System(dims)).to_state()
    assert segal(psi) <= 1e-12 and is_pure(psi)


@given(seeds, block_lists)
def test_segal_from_spectrum(seed, dims):
    omega = random_state(np.random.default_rng(seed), System(dims))
    gammas, _ = spectral_decompose(omega)
    direct = -sum(g * math.log(g) for g in gammas if g > 0)
    assert abs(segal(omega) - direct) <= 1e-9


@given(seeds, block_lists)
def test_segal_unitary_invariance(seed, dims):
    rng = np.random.default_rng(seed)
    omega = random_state(rng, System(dims))
    us = [haar_unitary(rng, n) for n in omega.system.block_dims]
    assert abs(segal(conjugate_blocks(omega, us)) - segal(omega)) <= 1e-9
