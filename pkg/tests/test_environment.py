"""Tests for drlhash.environment: episodes, rewards and the expert."""

# pylint: disable=missing-function-docstring
import numpy as np
from pytest import approx, fixture, mark, raises

from drlhash.environment import (
    HashingEnv,
    State,
    encode_state_vector,
    expert_action,
    flip_rewards,
    margin,
    reward_flip,
    reward_terminate,
)
from drlhash.bch import build_codebook
from drlhash.errors import ActionOutOfRange, DimensionMismatch, EpisodeAlreadyDone
from drlhash.hamming import BinaryCode, d_pos, flip_bit
from drlhash.models import EnvConfig


@fixture(name="env")
def env_fixture(book16):
    return HashingEnv(book16, EnvConfig(eta=1, sigma=5.0, max_steps=16), feature_dim=4)


def _state(text: str) -> State:
    return State(feature=np.zeros(0), code=BinaryCode.parse(text))


def _ones(*positions: int, width: int = 16) -> str:
    return "".join("1" if i in positions else "0" for i in range(width))


def test_reset_is_deterministic(env):
    f = np.arange(4.0)
    a = env.reset(f, item_id=7, run_seed=3)
    b = env.reset(f, item_id=7, run_seed=3)
    assert a.code == b.code
    assert a.history == () and a.step_index == 0 and not a.done
    assert env.reset(f, 7, 3, epoch=2).code == env.reset(f, 7, 3, epoch=2).code


def test_reset_streams_differ_by_item(env):
    f = np.zeros(4)
    codes = {str(env.reset(f, item, run_seed=0).code) for item in range(100)}
    assert len(codes) > 1


def test_reset_rejects_wrong_feature_length(env):
    with raises(DimensionMismatch):
        env.reset(np.zeros(5), 0, 0)


def test_fresh_history_is_zero(env):
    s = env.reset(np.zeros(4), 0, 0)
    matrix = s.history_matrix()
    assert matrix.shape == (10, 16)
    assert not matrix.any()


def test_flip_reward_zero_when_margin_unchanged(make_book):
    book = make_book(_ones(1, 2), _ones(0, 3, 4), _ones(0, 5, 6, 7, 8), _ones(9, 10, 11, 12, 13))
    s0 = _state("0" * 16)
    s1 = _state(_ones(0))
    assert reward_flip(s0, s1, (0, 1), book) == 0.0


def test_flip_reward_positive_example(make_book):
    # d_pos 5 -> 4 while d_neg stays at 7.
    book = make_book(_ones(0, 1, 2, 3, 4), _ones(0, 1, 2, 3, 4, 5, 6), _ones(8, 9, 10, 11, 12, 13, 14))
    s0 = _state("0" * 16)
    s1 = _state(_ones(0))
    assert reward_flip(s0, s1, (0,), book) == approx(1.0)


def test_flip_reward_matches_margin_difference(book16):
    rng = np.random.default_rng(0)
    for _ in range(20):
        code = BinaryCode.from_bits(rng.integers(0, 2, size=16))
        labels = (int(rng.integers(10)),)
        rewards = flip_rewards(code, labels, book16)
        for k in range(16):
            nxt = flip_bit(code, k)
            expected = margin(code, labels, book16) - margin(nxt, labels, book16)
            assert reward_flip(_state(str(code)), _state(str(nxt)), labels, book16) == approx(expected)
            assert rewards[k] == approx(expected)


def test_terminate_reward_examples(book16):
    config = EnvConfig(eta=2, sigma=5.0)
    target = book16.codewords[0]
    one_off = State(np.zeros(0), flip_bit(target, 0))
    three_off = State(np.zeros(0), flip_bit(flip_bit(one_off.code, 1), 2))
    two_off = State(np.zeros(0), flip_bit(one_off.code, 1))
    assert reward_terminate(one_off, config, (0,), book16) == 5.0
    assert reward_terminate(three_off, config, (0,), book16) == -5.0
    assert reward_terminate(two_off, config, (0,), book16) == 5.0


def test_terminate_keeps_code(env):
    s = env.reset(np.zeros(4), 0, 0)
    outcome = env.step(s, 16, (0,))
    assert outcome.next_state.code == s.code
    assert outcome.done and outcome.terminated
    assert outcome.reward in (5.0, -5.0)
    with raises(EpisodeAlreadyDone):
        env.step(outcome.next_state, 0, (0,))


def test_double_flip_returns_code_and_records_history(env):
    s = env.reset(np.zeros(4), 0, 0)
    s2 = env.transition(env.transition(s, 5), 5)
    assert s2.code == s.code
    assert s2.history == (5, 5)
    assert s2.step_index == 2


def test_history_keeps_last_ten_actions(env):
    s = env.reset(np.zeros(4), 0, 0)
    for action in range(11):
        s = env.transition(s, action)
    assert s.history == tuple(range(1, 11))


def test_action_range_and_step_cap(book16):
    env = HashingEnv(book16, EnvConfig(eta=1, max_steps=2), feature_dim=4)
    s = env.reset(np.zeros(4), 0, 0)
    with raises(ActionOutOfRange):
        env.transition(s, 17)
    first = env.step(s, 0, (0,))
    second = env.step(first.next_state, 1, (0,))
    assert not first.done
    assert second.done and not second.terminated


def test_expert_terminates_at_target(env, book16):
    s = State(np.zeros(4), book16.codewords[2])
    assert env.expert_action(s, (2,)) == 16


def test_expert_fixes_single_wrong_bit(env, book16):
    # A bit on which some other class disagrees with class 2.
    k = int(np.flatnonzero((book16.bit_matrix != book16.bit_matrix[2]).any(axis=0))[-1])
    s = State(np.zeros(4), flip_bit(book16.codewords[2], k))
    assert env.expert_action(s, (2,)) == k


def test_expert_ties_go_to_smallest_index(make_book):
    book = make_book("00000000", "11111111")
    assert expert_action(_state("11000000"), EnvConfig(eta=0), (0,), book) == 0


def test_expert_moves_toward_label_when_no_flip_pays(make_book):
    book = make_book("0000", "0011")
    s = _state("1000")
    assert max(flip_rewards(s.code, (0,), book)) == 0.0
    assert expert_action(s, EnvConfig(eta=0), (0,), book) == 0
    assert expert_action(s, EnvConfig(eta=1), (0,), book) == 4


def test_expert_rollout_reaches_threshold(book16):
    env = HashingEnv(book16, EnvConfig(eta=1, max_steps=200), feature_dim=4)
    for item in range(20):
        labels = (item % 10,)
        outcomes = env.expert_rollout(env.reset(np.zeros(4), item, 0), labels)
        assert outcomes[-1].terminated
        assert outcomes[-1].reward == 5.0
        assert d_pos(outcomes[-1].next_state.code, labels, book16) <= 1


def test_state_vector_layout():
    s = State(np.arange(32.0), BinaryCode.zeros(16))
    vec = encode_state_vector(s)
    assert vec.shape == (208,)
    assert not vec[-160:].any()

    s = State(np.zeros(32), flip_bit(BinaryCode.zeros(16), 3), history=(3,), step_index=1)
    history = encode_state_vector(s)[48:].reshape(10, 16)
    assert history.sum() == 1
    assert history[9, 3] == 1


def test_episode_rewards_telescope(env, book16):
    rng = np.random.default_rng(11)
    s = env.reset(np.zeros(4), 3, 0)
    labels = (3,)
    start = margin(s.code, labels, book16)
    total = 0.0
    for _ in range(15):
        outcome = env.step(s, int(rng.integers(16)), labels)
        total += outcome.reward
        s = outcome.next_state
    assert total == approx(start - margin(s.code, labels, book16), abs=1e-9)


def _random_labels(rng: np.random.Generator, num_classes: int):
    size = int(rng.integers(1, min(3, num_classes - 1) + 1))
    return tuple(sorted(int(c) for c in rng.choice(num_classes, size=size, replace=False)))


def test_flip_rewards_are_bounded(book16):
    rng = np.random.default_rng(21)
    for _ in range(200):
        code = BinaryCode.from_bits(rng.integers(0, 2, size=16))
        rewards = flip_rewards(code, _random_labels(rng, 10), book16)
        assert np.all(np.abs(rewards) <= 2.0)


def test_random_episodes_telescope_across_codebooks():
    rng = np.random.default_rng(22)
    books = [build_codebook(c, b, seed=s) for c, b, s in ((2, 7, 0), (4, 8, 3), (10, 16, 7), (21, 32, 1))]
    for episode in range(1000):
        book = books[episode % len(books)]
        env = HashingEnv(book, EnvConfig.for_codebook(book.radius, book.b), feature_dim=1)
        labels = _random_labels(rng, book.num_classes)
        s = env.reset(np.zeros(1), episode, 5)
        start = margin(s.code, labels, book)
        total = 0.0
        while not s.done:
            outcome = env.step(s, int(rng.integers(book.b + 1)), labels)
            if not outcome.terminated:
                assert abs(outcome.reward) <= 2.0
                total += outcome.reward
            s = outcome.next_state
        assert total == approx(start - margin(s.code, labels, book), abs=1e-9)


@mark.parametrize("book_name", ["book8", "book16"])
def test_expert_converges_within_start_distance(book_name, request):
    book = request.getfixturevalue(book_name)
    config = EnvConfig.for_codebook(book.radius, book.b, max_steps=book.b + 1)
    env = HashingEnv(book, config, feature_dim=1)
    rng = np.random.default_rng(23)
    for item in range(500):
        labels = (int(rng.integers(book.num_classes)),)
        start = env.reset(np.zeros(1), item, 9)
        outcomes = env.expert_rollout(start, labels)
        flips = [o for o in outcomes if not o.terminated]
        assert outcomes[-1].terminated
        assert len(flips) <= env.d_pos(start, labels) <= book.b
        assert env.d_pos(outcomes[-1].next_state, labels) <= config.eta
        assert outcomes[-1].reward == config.sigma
