"""Tests for drlhash.trainer: replay memory, targets, training and the oracle."""

# pylint: disable=missing-function-docstring
from collections import Counter
from pathlib import Path

import numpy as np
from pytest import approx, fixture, mark, raises

from drlhash.bch import build_codebook
from drlhash.dataset import encode_dataset, random_codes, synth_gaussian
from drlhash.environment import HashingEnv, State, encode_state_vector, expert_action
from drlhash.evaluation import mean_average_precision
from drlhash.hamming import BinaryCode, flip_bit
from drlhash.io import read_training_log
from drlhash.models import EnvConfig, TrainConfig, Transition
from drlhash.qnetwork import Layer, LayerSpec, QNetwork, default_architecture, init_network
from drlhash.trainer import (
    ReplayBuffer,
    code_index,
    discounted_return,
    epsilon_at,
    greedy_action,
    q_target,
    rollout_greedy,
    run_training,
    select_action,
    train_on_batch,
    value_iteration_policy,
)

TINY = TrainConfig(
    epochs=3,
    batch_size=8,
    buffer_capacity=200,
    target_sync_interval=5,
    hidden=(16,),
    dropout=0.1,
    learning_rate=0.01,
)


@fixture(name="tiny_data", scope="module")
def tiny_data_fixture():
    return synth_gaussian(4, 10, 6, 0.1, seed=0)


def _transition(action: int, reward: float = 0.0, done: bool = False) -> Transition:
    return Transition(np.zeros(2), action, reward, np.zeros(2), done)


def _constant_net(values) -> QNetwork:
    """Linear net that ignores its 2-wide input and returns ``values``."""
    values = np.asarray(values, dtype=float)
    spec = LayerSpec(2, len(values), "linear")
    return QNetwork([Layer(np.zeros((len(values), 2)), values.copy(), spec)])


def test_replay_buffer_evicts_oldest():
    buffer = ReplayBuffer(3)
    for action in range(5):
        buffer.push(_transition(action))
    assert len(buffer) == 3
    assert [t.action for t in buffer.contents()] == [2, 3, 4]

    picks = buffer.sample(3, np.random.default_rng(0))
    assert sorted(t.action for t in picks) == [2, 3, 4]
    with raises(ValueError):
        buffer.sample(4, np.random.default_rng(0))
    with raises(ValueError):
        ReplayBuffer(0)


def test_epsilon_schedule():
    config = TrainConfig()
    assert epsilon_at(0, config) == 1.0
    assert epsilon_at(7, config) == approx(0.55)
    assert epsilon_at(14, config) == approx(0.1)
    assert epsilon_at(15, config) == 0.1
    assert epsilon_at(24, config) == 0.1


def test_q_target_rules():
    target = _constant_net([2.0, 0.0, 1.0])
    assert q_target([_transition(0, 5.0, done=True)], target, 0.9)[0] == 5.0
    assert q_target([_transition(0, 1.0)], target, 0.0)[0] == 1.0
    assert q_target([_transition(0, 1.0)], target, 0.9)[0] == approx(2.8)
    with raises(ValueError):
        q_target([], target, 0.9)


def test_discounted_return_and_code_index():
    assert discounted_return([1.0, 1.0, 5.0], 0.5) == approx(1 + 0.5 + 1.25)
    assert code_index(BinaryCode.parse("100")) == 4
    assert code_index(BinaryCode.parse("011")) == 3


def test_select_action_modes():
    book = build_codebook(2, 7)
    env = HashingEnv(book, EnvConfig(eta=1, max_steps=7), feature_dim=2)
    net = init_network(default_architecture(env.state_dim, env.num_actions, (8,), 0.0), 0)
    rng = np.random.default_rng(0)
    state = env.reset(np.zeros(2), 0, 0)

    greedy = [select_action(net, state, 0.0, TrainConfig(), env, (0,), rng) for _ in range(5)]
    assert greedy == [greedy_action(net, encode_state_vector(state))] * 5

    at_target = State(np.zeros(2), book.codewords[0])
    expert_only = TrainConfig(expert_prob=1.0)
    assert select_action(net, at_target, 1.0, expert_only, env, (0,), rng) == 7

    uniform = TrainConfig(expert_prob=0.0)
    draws = 100_000
    counts = Counter(select_action(net, state, 1.0, uniform, env, (0,), rng) for _ in range(draws))
    assert set(counts) == set(range(8))
    for action in range(8):
        assert counts[action] / draws == approx(0.125, abs=0.01)


def test_train_on_batch_reduces_loss():
    net = init_network([LayerSpec(2, 8, "relu"), LayerSpec(8, 3, "linear")], seed=1)
    target = _constant_net([0.0, 0.0, 0.0])
    rng = np.random.default_rng(2)
    batch = [
        Transition(rng.normal(size=2), int(a), float(r), np.zeros(2), True)
        for a, r in zip(rng.integers(3, size=16), rng.normal(size=16))
    ]
    losses = [train_on_batch(net, target, batch, 0.9, 0.005, seed) for seed in range(200)]
    assert losses[-1] < losses[0]


def test_train_on_batch_steps_per_sample():
    for size in (1, 2, 8):
        online = _constant_net([0.0, 0.0])
        batch = [_transition(1, reward=1.0, done=True)] * size
        assert train_on_batch(online, _constant_net([0.0, 0.0]), batch, 0.9, 0.1, 0) == 1.0
        # Every sample pulls Q(s, 1) toward 1 with the full learning rate.
        assert online.layers[0].biases.tolist() == approx([0.0, 0.1 * size])


def test_zero_network_rollout_flips_bit_zero(book8):
    env = HashingEnv(book8, EnvConfig(eta=0, max_steps=3), feature_dim=2)
    net = init_network(default_architecture(env.state_dim, env.num_actions, (4,), 0.0), 0)
    for layer in net.layers:
        layer.weights[:] = 0.0
    start = env.reset(np.zeros(2), 5, 1)
    final, actions = rollout_greedy(net, env, np.zeros(2), 5, 1)
    assert actions == [0, 0, 0]
    assert str(final.code) == str(1 - start.code.bit(0)) + str(start.code)[1:]
    assert final.history == (0, 0, 0)


def test_run_training_is_deterministic(tiny_data, book8, tmp_path: Path):
    runs = []
    for name in ("a", "b"):
        model = tmp_path / f"{name}.model"
        log = tmp_path / f"{name}.log"
        result = run_training(tiny_data, book8, TINY, str(model), str(log), timed=False)
        runs.append((model.read_bytes(), log.read_bytes(), result))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1] == runs[1][1]

    result = runs[0][2]
    assert [s.epoch for s in result.epochs] == [1, 2, 3]
    assert result.epochs[0].epsilon == 1.0
    assert all(s.wall_seconds == 0.0 for s in result.epochs)
    assert result.updates > 0
    assert result.env_config == EnvConfig(eta=book8.default_eta, max_steps=8)
    rows = read_training_log(str(tmp_path / "a.log"))
    assert len(rows) == 3


def test_run_training_reports_progress(tiny_data, book8):
    seen = []
    run_training(tiny_data, book8, TINY, progress_callback=lambda done, total: seen.append((done, total)))
    assert seen == [(1, 3), (2, 3), (3, 3)]


def test_run_training_rejects_labels_outside_codebook(tiny_data):
    small = build_codebook(2, 8)
    with raises(ValueError):
        run_training(tiny_data, small, TINY)


def test_run_training_needs_train_items(tiny_data, book8):
    with raises(ValueError):
        run_training(tiny_data.subset("query"), book8, TINY)


def _toy_book(make_book):
    return make_book("000", "111", radius=1)


def test_value_iteration_prefers_flips_toward_label(make_book):
    book = _toy_book(make_book)
    config = EnvConfig(eta=0, sigma=5.0, max_steps=3)
    policy = value_iteration_policy(book, (0,), config, gamma=0.9)
    assert len(policy) == 8
    assert policy[0] == (3,)  # at the label codeword: terminate
    assert policy[code_index(BinaryCode.parse("111"))] == (0, 1, 2)
    assert policy[code_index(BinaryCode.parse("010"))] == (1,)


def test_expert_agrees_with_value_iteration_oracle(make_book):
    book = _toy_book(make_book)
    config = EnvConfig(eta=0, sigma=5.0, max_steps=3)
    policy = value_iteration_policy(book, (0,), config, gamma=0.9)
    for bits in np.ndindex(2, 2, 2):
        code = BinaryCode.from_bits(bits)
        action = expert_action(State(np.zeros(0), code), config, (0,), book)
        assert action in policy[code_index(code)]


def test_shorter_expert_path_earns_more(book16):
    env = HashingEnv(book16, EnvConfig(eta=0, sigma=5.0, max_steps=40), feature_dim=1)
    labels = (0,)
    start = State(np.zeros(1), book16.codewords[0])
    for k in (1, 5, 9):
        start = State(start.feature, flip_bit(start.code, k))

    def play(actions):
        state, rewards = start, []
        for action in actions:
            outcome = env.step(state, action, labels)
            rewards.append(outcome.reward)
            state = outcome.next_state
        return state, rewards

    direct = [o.action_taken for o in env.expert_rollout(start, labels)]
    assert direct[:-1] and sorted(direct[:-1]) == [1, 5, 9] and direct[-1] == 16
    for detour in ([0, 0], [3, 12, 12, 3]):
        end_short, short = play(direct)
        end_long, long_ = play(detour + direct)
        assert end_short.code == end_long.code == book16.codewords[0]
        for gamma in (0.5, 0.9, 0.99):
            assert discounted_return(short, gamma) >= discounted_return(long_, gamma)


@mark.slow
def test_trained_agent_matches_value_iteration_oracle(make_book):
    book = _toy_book(make_book)
    data = synth_gaussian(2, 100, 4, 0.1, seed=0)
    config = TrainConfig()
    result = run_training(data, book, config, timed=False)
    train = data.subset("train")
    agree = total = 0
    for label in (0, 1):
        policy = value_iteration_policy(book, (label,), result.env_config, config.gamma)
        feature = train.features[[l == (label,) for l in train.labels]].mean(axis=0)
        for bits in np.ndindex(2, 2, 2):
            code = BinaryCode.from_bits(bits)
            action = greedy_action(result.network, encode_state_vector(State(feature, code)))
            agree += action in policy[code_index(code)]
            total += 1
    assert agree / total >= 0.95


@mark.slow
def test_default_training_reaches_benchmark_map():
    data = synth_gaussian(10, 250, 32, 0.15, seed=1)
    book = build_codebook(10, 16, seed=7)
    query = data.subset("query")
    database = data.retrieval_database()
    scores = []
    for seed in (0, 1, 2):
        result = run_training(data, book, TrainConfig(seed=seed), timed=False)
        assert result.epochs[-1].mean_terminal_dpos < result.epochs[0].mean_terminal_dpos
        q_codes = encode_dataset(result.network, query, book, result.env_config, seed, threads=4)
        db_codes = encode_dataset(result.network, database, book, result.env_config, seed, threads=4)
        scores.append(
            mean_average_precision(q_codes, query.labels, db_codes, database.labels, 5000).map
        )
    floor = mean_average_precision(
        random_codes(len(query), 16, 0), query.labels, random_codes(len(database), 16, 1),
        database.labels, 5000,
    )
    assert floor.map == approx(0.1, abs=0.05)
    assert float(np.median(scores)) >= 0.85
