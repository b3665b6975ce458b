"""Lightweight learned policy/value model and the self-play training loop.

The model is a two-layer perceptron (hidden width 128) over hand-crafted
state/action features.  A softmax head over per-action logits gives the
policy distribution pi(a|s); a sigmoid head gives a per-(state, action)
value v(s,a) in [0, 1].  Training minimizes KL(visit-count targets || pi)
for policy samples and squared error for value samples with an Adam
optimizer, early-stopping at the epoch of minimum policy KL.

An external model may be plugged in through a line-delimited JSON
subprocess protocol: one request ``{"state": [...], "actions": [[...]]}``
per line, one response ``{"pi": [...], "v": [...]}`` per line.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import graph
from .kernel import Assertion, Database, decompress_proof
from .search import (AXIOM_APPLY, HYPOTHESIS_REF, SYMBOL_PUSH, THEOREM_APPLY,
                     Action, State, apply_action)

KINDS = (SYMBOL_PUSH, HYPOTHESIS_REF, AXIOM_APPLY, THEOREM_APPLY)
HISTORY_TAIL = 2
TOP_EXPRS = 2
CHECKPOINT_VERSION = 1


class Featurizer:
    """Fixed-length numeric encodings of states and actions for a database.

    State features: scaled stack depth, token unigram counts of the top
    stack expressions, and one-hot action kinds of the history tail.
    Action features: kind one-hot, scaled arity, scaled reference depth.
    """

    def __init__(self, db: Database):
        self.db = db
        self.vocab = sorted(db.constants) + sorted(db.float_of_var)
        self.index = {tok: i for i, tok in enumerate(self.vocab)}
        self.depth = graph.depths(db)
        self.max_depth = max(self.depth.values(), default=1) or 1
        self.state_dim = (1 + TOP_EXPRS * len(self.vocab)
                          + HISTORY_TAIL * len(KINDS))
        self.action_dim = len(KINDS) + 2

    def state_features(self, state: State) -> np.ndarray:
        out = np.zeros(self.state_dim)
        out[0] = min(len(state.stack), 8) / 8.0
        base = 1
        for expr_at, node in enumerate(reversed(state.stack[-TOP_EXPRS:])):
            offset = base + expr_at * len(self.vocab)
            for tok in node.conclusion:
                i = self.index.get(tok)
                if i is not None:
                    out[offset + i] += 1.0
            total = max(1.0, len(node.conclusion))
            out[offset:offset + len(self.vocab)] /= total
        base += TOP_EXPRS * len(self.vocab)
        for slot, action in enumerate(reversed(state.history[-HISTORY_TAIL:])):
            out[base + slot * len(KINDS) + KINDS.index(action.kind)] = 1.0
        return out

    def action_features(self, action: Action,
                        pool: Optional[dict[str, Assertion]] = None
                        ) -> np.ndarray:
        out = np.zeros(self.action_dim)
        out[KINDS.index(action.kind)] = 1.0
        frame = None
        if action.kind in (AXIOM_APPLY, THEOREM_APPLY):
            frame = ((pool or {}).get(action.label)
                     or self.db.frame(action.label))
        if frame is not None:
            out[len(KINDS)] = min(frame.mand_count, 8) / 8.0
            depth = self.depth.get(action.label, self.max_depth + 1)
            out[len(KINDS) + 1] = min(depth, self.max_depth + 1) / (
                self.max_depth + 1)
        return out

    @property
    def input_dim(self) -> int:
        return self.state_dim + self.action_dim


@dataclass
class TrainingSample:
    """One supervised target harvested from search traces or library proofs.

    kind "policy": `targets` is a visit-count distribution over `actions`.
    kind "value": `targets` is a single discounted return in [0, 1].
    """
    kind: str  # "policy" | "value"
    state: np.ndarray
    actions: list[np.ndarray]
    targets: np.ndarray


@dataclass
class TrainerConfig:
    epochs: int = 10
    batch: int = 128
    lr: float = 3e-4
    gamma: float = 0.95
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs <= 0 or self.batch <= 0 or self.lr <= 0:
            raise ValueError("trainer config values must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")


class MLPPolicy:
    """Built-in two-layer perceptron policy/value model."""

    PARAM_NAMES = ("W1", "b1", "W2", "b2", "wp", "bp", "wv", "bv")

    def __init__(self, featurizer: Featurizer, hidden: int = 128,
                 seed: int = 0):
        self.featurizer = featurizer
        self.hidden = hidden
        rng = np.random.default_rng(seed)
        d = featurizer.input_dim
        scale = 1.0 / np.sqrt(d)
        self.params = {
            "W1": rng.normal(0.0, scale, (d, hidden)),
            "b1": np.zeros(hidden),
            "W2": rng.normal(0.0, 1.0 / np.sqrt(hidden), (hidden, hidden)),
            "b2": np.zeros(hidden),
            "wp": rng.normal(0.0, 0.01, hidden),
            "bp": np.zeros(()),
            "wv": rng.normal(0.0, 0.01, hidden),
            "bv": np.zeros(()),
        }

    # -- forward --------------------------------------------------------

    def _forward(self, x: np.ndarray) -> dict:
        p = self.params
        z1 = x @ p["W1"] + p["b1"]
        h1 = np.maximum(z1, 0.0)
        z2 = h1 @ p["W2"] + p["b2"]
        h2 = np.maximum(z2, 0.0)
        logit = h2 @ p["wp"] + p["bp"]
        raw_v = h2 @ p["wv"] + p["bv"]
        value = 1.0 / (1.0 + np.exp(-raw_v))
        return {"x": x, "z1": z1, "h1": h1, "z2": z2, "h2": h2,
                "logit": logit, "value": value}

    def logits_values(self, state_feat: np.ndarray,
                      action_feats: Sequence[np.ndarray]
                      ) -> tuple[np.ndarray, np.ndarray, dict]:
        x = np.stack([np.concatenate([state_feat, a]) for a in action_feats])
        if x.shape[1] != self.featurizer.input_dim:
            raise ValueError("feature length mismatch: model was built for a "
                             "different database")
        cache = self._forward(x)
        return cache["logit"], cache["value"], cache

    def predict(self, db: Database, state: State, actions: Sequence[Action],
                pool: Optional[dict[str, Assertion]] = None
                ) -> tuple[list[float], list[float]]:
        if not actions:
            raise ValueError("predict requires a non-empty action list")
        f = self.featurizer
        sfeat = f.state_features(state)
        afeats = [f.action_features(a, pool) for a in actions]
        logits, values, _ = self.logits_values(sfeat, afeats)
        return _softmax(logits).tolist(), values.tolist()

    # -- persistence ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "version": CHECKPOINT_VERSION,
            "hidden": self.hidden,
            "vocab": self.featurizer.vocab,
            "params": {k: np.asarray(v).tolist()
                       for k, v in self.params.items()},
        })

    @classmethod
    def from_json(cls, featurizer: Featurizer, text: str) -> "MLPPolicy":
        blob = json.loads(text)
        if blob.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version "
                             f"{blob.get('version')!r}")
        if blob["vocab"] != featurizer.vocab:
            raise ValueError("checkpoint vocabulary does not match database")
        model = cls(featurizer, hidden=blob["hidden"])
        for k in cls.PARAM_NAMES:
            model.params[k] = np.asarray(blob["params"][k]).reshape(
                np.shape(model.params[k]))
        return model

    def clone(self) -> "MLPPolicy":
        twin = MLPPolicy(self.featurizer, self.hidden)
        twin.params = {k: v.copy() for k, v in self.params.items()}
        return twin


class ExternalPolicy:
    """Policy served by a subprocess over line-delimited JSON."""

    def __init__(self, featurizer: Featurizer, command: Sequence[str]):
        self.featurizer = featurizer
        self.proc = subprocess.Popen(
            list(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)

    def predict(self, db: Database, state: State, actions: Sequence[Action],
                pool: Optional[dict[str, Assertion]] = None
                ) -> tuple[list[float], list[float]]:
        if not actions:
            raise ValueError("predict requires a non-empty action list")
        f = self.featurizer
        request = {
            "state": f.state_features(state).tolist(),
            "actions": [f.action_features(a, pool).tolist()
                        for a in actions],
        }
        assert self.proc.stdin and self.proc.stdout
        self.proc.stdin.write(json.dumps(request) + "\n")
        self.proc.stdin.flush()
        reply = json.loads(self.proc.stdout.readline())
        pi = [float(p) for p in reply["pi"]]
        total = sum(pi) or 1.0
        pi = [p / total for p in pi]
        v = reply["v"]
        values = ([float(x) for x in v] if isinstance(v, list)
                  else [float(v)] * len(actions))
        return pi, [min(1.0, max(0.0, x)) for x in values]

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)


# ---------------------------------------------------------------------------
# sample collection


def path_value_targets(length: int, reward: float,
                       gamma: float) -> list[float]:
    """Discounted targets root-to-leaf for a path with `length` transitions."""
    return [reward * gamma ** (length - i) for i in range(length + 1)]


def collect(featurizer: Featurizer, traces: Sequence[dict],
            library_proofs: Sequence[Sequence[Action]] = (),
            gamma: float = 0.95,
            pool: Optional[dict[str, Assertion]] = None
            ) -> list[TrainingSample]:
    """Turn search traces and library proofs into training samples.

    Each trace is ``{"steps": [(state, actions, visits), ...], "reward": r}``
    as recorded by the searcher.  Library proofs are action sequences that
    are replayed from the empty state as reward-1 paths: policy target is
    the taken action, value targets are the same gamma powers.
    """
    samples: list[TrainingSample] = []

    stop_action = np.zeros(featurizer.action_dim)

    def add_path(steps: list[tuple[State, list[Action], list[float]]],
                 terminal: Optional[State], reward: float) -> None:
        targets = path_value_targets(len(steps), reward, gamma)
        for (state, actions, visits), value in zip(steps, targets):
            sfeat = featurizer.state_features(state)
            afeats = [featurizer.action_features(a, pool) for a in actions]
            total = sum(visits)
            if total > 0:
                dist = np.asarray([v / total for v in visits])
                samples.append(TrainingSample("policy", sfeat, afeats, dist))
            taken = int(np.argmax(visits)) if visits else 0
            samples.append(TrainingSample(
                "value", sfeat, [afeats[taken]], np.asarray(value)))
        if terminal is not None:
            # leaf state: value equals the raw reward
            samples.append(TrainingSample(
                "value", featurizer.state_features(terminal),
                [stop_action], np.asarray(targets[-1])))

    for trace in traces:
        add_path(list(trace["steps"]), trace.get("terminal"),
                 float(trace["reward"]))
    db = featurizer.db
    for proof in library_proofs:
        state: Optional[State] = State()
        steps = []
        ok = True
        for action in proof:
            assert state is not None
            steps.append((state, [action], [1.0]))
            state = apply_action(db, state, action, pool or {})
            if state is None:
                ok = False
                break
        if ok and steps:
            add_path(steps, state, 1.0)
    return samples


def proof_actions(db: Database, label: str) -> Optional[list[Action]]:
    """Reconstruct the action sequence of a stored proof, if expressible."""
    actions: list[Action] = []
    frame = db.frame(label)
    essentials = dict(frame.essentials)
    for lab in decompress_proof(db, label):
        if db.is_hypothesis(lab):
            kind, stmt = db.hypotheses[lab]
            if kind == "$f":
                actions.append(Action(SYMBOL_PUSH, lab, tuple(stmt)))
            else:
                actions.append(Action(HYPOTHESIS_REF, lab, tuple(stmt)))
            continue
        ref = db.frame(lab)
        kind = AXIOM_APPLY if ref.kind == "$a" else THEOREM_APPLY
        actions.append(Action(kind, lab))
    return actions


# ---------------------------------------------------------------------------
# training


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


def _losses(model: MLPPolicy, samples: Sequence[TrainingSample]
            ) -> tuple[float, float]:
    """Mean policy KL and mean value MSE over a sample set."""
    kl_sum = kl_n = mse_sum = mse_n = 0.0
    for s in samples:
        logits, values, _ = model.logits_values(s.state, s.actions)
        if s.kind == "policy":
            pi = _softmax(logits)
            t = s.targets
            mask = t > 0
            kl_sum += float(np.sum(t[mask] * (np.log(t[mask])
                                              - np.log(pi[mask] + 1e-12))))
            kl_n += 1
        else:
            mse_sum += float((values[0] - float(s.targets)) ** 2)
            mse_n += 1
    return (kl_sum / kl_n if kl_n else 0.0,
            mse_sum / mse_n if mse_n else 0.0)


def _batch_gradients(model: MLPPolicy, batch: Sequence[TrainingSample]
                     ) -> tuple[dict[str, np.ndarray], float]:
    """Analytic gradients of (KL + MSE)/|batch| plus the batch loss."""
    p = model.params
    grads = {k: np.zeros_like(np.asarray(v)) for k, v in p.items()}
    loss = 0.0
    for s in batch:
        logits, values, cache = model.logits_values(s.state, s.actions)
        if s.kind == "policy":
            pi = _softmax(logits)
            t = s.targets
            mask = t > 0
            loss += float(np.sum(t[mask] * (np.log(t[mask])
                                            - np.log(pi[mask] + 1e-12))))
            d_logit = pi - t            # d KL / d logits
            d_value = np.zeros_like(values)
        else:
            target = float(s.targets)
            loss += float((values[0] - target) ** 2)
            d_logit = np.zeros_like(logits)
            d_value = np.zeros_like(values)
            # d MSE / d raw = 2 (v - t) * v (1 - v)
            d_value[0] = 2.0 * (values[0] - target)
        d_raw = d_value * values * (1.0 - values)
        h2, h1, x = cache["h2"], cache["h1"], cache["x"]
        grads["wp"] += h2.T @ d_logit
        grads["bp"] += d_logit.sum()
        grads["wv"] += h2.T @ d_raw
        grads["bv"] += d_raw.sum()
        d_h2 = np.outer(d_logit, p["wp"]) + np.outer(d_raw, p["wv"])
        d_z2 = d_h2 * (cache["z2"] > 0)
        grads["W2"] += h1.T @ d_z2
        grads["b2"] += d_z2.sum(axis=0)
        d_h1 = d_z2 @ p["W2"].T
        d_z1 = d_h1 * (cache["z1"] > 0)
        grads["W1"] += x.T @ d_z1
        grads["b1"] += d_z1.sum(axis=0)
    n = max(1, len(batch))
    for k in grads:
        grads[k] /= n
    return grads, loss / n


@dataclass
class TrainResult:
    model: MLPPolicy
    kl_curve: list[float]
    mse_curve: list[float]
    stopped_epoch: int

    def curves_csv(self) -> str:
        lines = ["epoch,kl,mse"]
        lines += [f"{i},{kl},{mse}" for i, (kl, mse)
                  in enumerate(zip(self.kl_curve, self.mse_curve))]
        return "\n".join(lines) + "\n"


def train(model: MLPPolicy, samples: Sequence[TrainingSample],
          config: Optional[TrainerConfig] = None) -> TrainResult:
    """Adam mini-batch training; early stop at minimum policy KL."""
    if not samples:
        raise ValueError("cannot train on an empty sample set")
    config = config or TrainerConfig()
    rng = np.random.default_rng(config.seed)
    m = {k: np.zeros_like(np.asarray(v)) for k, v in model.params.items()}
    v = {k: np.zeros_like(np.asarray(v)) for k, v in model.params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    kl0, mse0 = _losses(model, samples)
    kl_curve, mse_curve = [kl0], [mse0]
    best = (kl0, {k: np.asarray(w).copy() for k, w in model.params.items()}, 0)
    order = np.arange(len(samples))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        for lo in range(0, len(order), config.batch):
            batch = [samples[i] for i in order[lo:lo + config.batch]]
            grads, loss = _batch_gradients(model, batch)
            if not np.isfinite(loss):
                raise ValueError(
                    f"training diverged: non-finite loss at epoch {epoch}")
            step += 1
            for k, g in grads.items():
                m[k] = beta1 * m[k] + (1 - beta1) * g
                v[k] = beta2 * v[k] + (1 - beta2) * g * g
                mhat = m[k] / (1 - beta1 ** step)
                vhat = v[k] / (1 - beta2 ** step)
                model.params[k] = (np.asarray(model.params[k])
                                   - config.lr * mhat
                                   / (np.sqrt(vhat) + eps))
        kl, mse = _losses(model, samples)
        kl_curve.append(kl)
        mse_curve.append(mse)
        if kl <= best[0] + 1e-12:
            best = (kl, {k: w.copy() for k, w in model.params.items()},
                    epoch + 1)
    model.params = best[1]
    stop = best[2]
    return TrainResult(model=model, kl_curve=kl_curve[:stop + 1],
                       mse_curve=mse_curve[:stop + 1], stopped_epoch=stop)


@dataclass
class SelfPlayResult:
    model: MLPPolicy
    iterations: list[TrainResult]
    generated: list
    curve: list


def self_play(db: Database, split, gen_config, iterations: int = 3,
              trainer: Optional[TrainerConfig] = None,
              model: Optional[MLPPolicy] = None,
              library_proof_limit: int = 200) -> SelfPlayResult:
    """Alternate MCTS generation and model training for several iterations.

    Search traces from each iteration, plus the training-library proofs
    replayed as reward-1 paths, become the next iteration's training set.
    """
    from . import search  # deferred: search must not depend on numpy

    trainer = trainer or TrainerConfig(gamma=gen_config.gamma)
    featurizer = Featurizer(db)
    model = model or MLPPolicy(featurizer, seed=gen_config.seed)
    proofs = []
    for lab in list(split.train_library)[:library_proof_limit]:
        if db.frame(lab).kind != "$p":
            continue
        actions = proof_actions(db, lab)
        if actions is not None and len(actions) <= gen_config.max_steps:
            proofs.append(actions)
    results: list[TrainResult] = []
    generated: list = []
    curve: list = []
    for _ in range(iterations):
        trace: list = []
        generated, curve = search.run_episodes(
            db, split, "mcts_pvn", gen_config, policy=model, trace=trace)
        samples = collect(featurizer, trace, library_proofs=proofs,
                          gamma=trainer.gamma)
        results.append(train(model, samples, trainer))
    return SelfPlayResult(model=model, iterations=results,
                          generated=generated, curve=curve)


def gradient_check(model: MLPPolicy, samples: Sequence[TrainingSample],
                   probes: int = 40, h: float = 1e-5,
                   seed: int = 0) -> float:
    """Max relative error of analytic vs central-difference gradients."""
    grads, _ = _batch_gradients(model, samples)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in model.PARAM_NAMES:
        g = grads[name]
        flat = np.asarray(model.params[name]).reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        count = min(probes, flat.size)
        for idx in rng.choice(flat.size, size=count, replace=False):
            keep = flat[idx]
            flat[idx] = keep + h
            _, up = _batch_gradients(model, samples)
            flat[idx] = keep - h
            _, down = _batch_gradients(model, samples)
            flat[idx] = keep
            numeric = (up - down) / (2 * h)
            denom = max(abs(numeric), abs(gflat[idx]), 1e-8)
            worst = max(worst, abs(numeric - gflat[idx]) / denom)
    return worst
