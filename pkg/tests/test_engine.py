from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cliffmip.dense import ResourceError
from cliffmip.engine import (choose_backend, exact_history_distribution, game_value, push_forward,
                             total_variation)
from cliffmip.games import load_bundle
from cliffmip.generators import protocol_for, random_strategy
from cliffmip.protocol import run_protocol
from cliffmip.rng import SplitMix64

import oracle


def random_instance(seed, **kw):
    rng = SplitMix64(seed)
    K, R = 1 + rng.randbelow(3), 1 + rng.randbelow(2)
    s = random_strategy(K, R, rng, max_gates=12, post=bool(rng.bit()), dense_state=bool(rng.bit()), **kw)
    return protocol_for(s, rng), s


@given(st.integers(0, 2**64 - 1))
def test_engine_matches_tensor_oracle(seed):
    p, s = random_instance(seed)
    d = exact_history_distribution(p, s)
    assert abs(sum(d.values()) - 1) < 1e-9
    assert total_variation(d, oracle.history_distribution(p, s)) < 1e-12


@settings(max_examples=20)
@given(st.integers(0, 2**64 - 1))
def test_backends_agree_on_stabilizer_states(seed):
    rng = SplitMix64(seed)
    s = random_strategy(2, 2, rng, max_gates=12, post=True)
    p = protocol_for(s, rng)
    assert choose_backend(s) == "stabilizer"
    assert total_variation(exact_history_distribution(p, s, "stabilizer"),
                           exact_history_distribution(p, s, "dense")) < 1e-12


def test_bundle_values_via_engine():
    for name in ("chsh", "ghz3", "two_round_toy"):
        b = load_bundle(name)
        for sid, s in b.strategies.items():
            v = game_value(b.protocol, exact_history_distribution(b.protocol, s))
            assert abs(v - b.expected[sid][0]) <= 1e-9, (name, sid)


def test_cap_is_enforced():
    b = load_bundle("chsh")
    s = b.strategies["quantum_optimal"]
    with pytest.raises(ResourceError, match="cap is 1"):
        exact_history_distribution(b.protocol, s, cap=1)


def test_sampling_matches_exact_distribution():
    b = load_bundle("two_round_toy")
    s = b.strategies["clifford_post"]
    exact = exact_history_distribution(b.protocol, s)
    n = 4000
    rng = SplitMix64(11)
    counts = Counter(run_protocol(b.protocol, s, rng.next_u64())[0] for _ in range(n))
    keys = sorted(exact, key=lambda h: h.key())
    assert set(counts) <= set(keys)
    obs = [counts.get(k, 0) for k in keys]
    exp = [exact[k] * n for k in keys]
    assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_same_seed_same_transcript():
    b = load_bundle("chsh")
    s = b.strategies["quantum_optimal"]
    assert [run_protocol(b.protocol, s, k) for k in range(30)] == [run_protocol(b.protocol, s, k) for k in range(30)]


def test_push_forward_marginal():
    b = load_bundle("chsh")
    d = exact_history_distribution(b.protocol, b.strategies["clifford_only"])
    first = push_forward(d, lambda h: h.answers(0)[0])
    assert first == pytest.approx({"0": 0.5, "1": 0.5})
