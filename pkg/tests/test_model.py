"""Policy/value model: prediction, training, gradients, persistence."""

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atgkit import model as M
from atgkit import search
from atgkit.search import Action, GenerationConfig, State


@pytest.fixture(scope="module")
def featurizer(db):
    return M.Featurizer(db)


@pytest.fixture(scope="module")
def mlp(featurizer):
    return M.MLPPolicy(featurizer, seed=0)


def _space(db, split_of, seed=0):
    split = split_of(3)
    library = list(split.axioms) + list(split.train_library)
    return search.sample_action_space(db, library, {}, GenerationConfig(),
                                      random.Random(seed))


def _random_state(db, space, rng):
    state = State()
    for _ in range(rng.randrange(0, 8)):
        order = rng.sample(space, len(space))
        for action in order:
            nxt = search.apply_action(db, state, action, {})
            if nxt is not None:
                state = nxt
                break
    return state


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_pi_normalized_and_value_bounded(db, split_of, mlp, seed):
    rng = random.Random(seed)
    space = _space(db, split_of, seed % 7)
    state = _random_state(db, space, rng)
    k = rng.randrange(1, len(space))
    actions = rng.sample(space, k)
    pi, values = mlp.predict(db, state, actions)
    assert abs(sum(pi) - 1.0) <= 1e-9
    assert all(0.0 <= v <= 1.0 for v in values)
    assert len(pi) == len(values) == k


def test_predict_requires_actions(db, mlp):
    with pytest.raises(ValueError):
        mlp.predict(db, State(), [])


def test_predict_deterministic(db, split_of, mlp):
    space = _space(db, split_of)
    a = mlp.predict(db, State(), space[:6])
    b = mlp.predict(db, State(), space[:6])
    assert a == b


def test_duplicate_actions_get_identical_probabilities(db, split_of, mlp):
    space = _space(db, split_of)
    pi, values = mlp.predict(db, State(), [space[0], space[0], space[1]])
    assert pi[0] == pytest.approx(pi[1])
    assert values[0] == pytest.approx(values[1])


def test_path_value_targets():
    assert M.path_value_targets(3, 1.0, 0.95) == pytest.approx(
        [0.857375, 0.9025, 0.95, 1.0])
    assert M.path_value_targets(3, 0.0, 0.95) == [0.0, 0.0, 0.0, 0.0]


def _synthetic_samples(db, split_of, featurizer, n=24, seed=3):
    rng = random.Random(seed)
    space = _space(db, split_of, seed)
    samples = []
    for i in range(n):
        state = _random_state(db, space, rng)
        actions = rng.sample(space, rng.randrange(2, 6))
        sfeat = featurizer.state_features(state)
        afeats = [featurizer.action_features(a) for a in actions]
        if i % 2 == 0:
            raw = [rng.random() for _ in actions]
            total = sum(raw)
            samples.append(M.TrainingSample(
                kind="policy", state=sfeat, actions=afeats,
                targets=np.array([x / total for x in raw])))
        else:
            samples.append(M.TrainingSample(
                kind="value", state=sfeat, actions=afeats[:1],
                targets=np.array(rng.random())))
    return samples


def test_train_improves_losses(db, split_of, featurizer):
    samples = _synthetic_samples(db, split_of, featurizer)
    model = M.MLPPolicy(featurizer, seed=1)
    result = M.train(model, samples, M.TrainerConfig(epochs=10))
    assert result.kl_curve[-1] < result.kl_curve[0]
    assert result.mse_curve[-1] < result.mse_curve[0]
    assert all(np.isfinite(k) for k in result.kl_curve)


def test_train_empty_samples_errors(featurizer):
    model = M.MLPPolicy(featurizer, seed=1)
    with pytest.raises(ValueError):
        M.train(model, [], M.TrainerConfig())


def test_train_deterministic(db, split_of, featurizer):
    samples = _synthetic_samples(db, split_of, featurizer)
    outs = []
    for _ in range(2):
        model = M.MLPPolicy(featurizer, seed=1)
        M.train(model, samples, M.TrainerConfig(epochs=3, seed=4))
        outs.append({k: v.copy() for k, v in model.params.items()})
    for k in outs[0]:
        assert np.array_equal(outs[0][k], outs[1][k])


def test_gradient_check(db, split_of, featurizer):
    samples = _synthetic_samples(db, split_of, featurizer, n=10)
    model = M.MLPPolicy(featurizer, seed=5)
    assert M.gradient_check(model, samples, probes=8) <= 1e-4


def test_trainer_config_validation():
    with pytest.raises(ValueError):
        M.TrainerConfig(epochs=0)
    with pytest.raises(ValueError):
        M.TrainerConfig(gamma=0.0)


def test_checkpoint_round_trip(db, split_of, featurizer, mlp):
    text = mlp.to_json()
    twin = M.MLPPolicy.from_json(featurizer, text)
    space = _space(db, split_of)
    assert twin.predict(db, State(), space[:5]) == \
        mlp.predict(db, State(), space[:5])
    assert twin.to_json() == text


def test_checkpoint_rejects_bad_version(featurizer, mlp):
    import json
    blob = json.loads(mlp.to_json())
    blob["version"] = 99
    with pytest.raises(ValueError):
        M.MLPPolicy.from_json(featurizer, json.dumps(blob))


def test_external_policy_subprocess(db, split_of, featurizer):
    import sys
    script = (
        "import json,sys\n"
        "for line in sys.stdin:\n"
        "    req=json.loads(line)\n"
        "    n=len(req['actions'])\n"
        "    print(json.dumps({'pi':[1.0]*n,'v':0.5}))\n"
        "    sys.stdout.flush()\n")
    ext = M.ExternalPolicy(featurizer, [sys.executable, "-c", script])
    try:
        space = _space(db, split_of)
        pi, values = ext.predict(db, State(), space[:4])
        assert pi == pytest.approx([0.25] * 4)
        assert values == [0.5] * 4
    finally:
        ext.close()


def test_collect_targets(db, split_of, featurizer):
    space = _space(db, split_of)
    state = State()
    steps = []
    for action in space:
        nxt = search.apply_action(db, state, action, {})
        if nxt is None:
            continue
        steps.append((state, [action], [1.0]))
        state = nxt
        if len(steps) == 3:
            break
    trace = [{"reward": 1.0, "steps": steps}]
    samples = M.collect(featurizer, trace, gamma=0.95)
    values = sorted(float(s.targets) for s in samples
                    if s.kind == "value")
    assert values == pytest.approx([0.857375, 0.9025, 0.95])
    policies = [s for s in samples if s.kind == "policy"]
    assert policies and all(abs(sum(s.targets) - 1) < 1e-9
                            for s in policies)
