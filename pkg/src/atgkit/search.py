"""Forward-deduction theorem generators.

A generator grows proofs bottom-up on the kernel's stack machine: actions
push wff symbols or hypothesis expressions, or apply an axiom/theorem to the
top of the stack.  A state whose stack holds a single provable conclusion is
a candidate theorem; it earns reward 1 if it is new (not alpha-equivalent to
anything known).  Three policies drive the search -- uniform random rollouts,
MCTS with PUCT selection, and MCTS guided by a trained policy/value model --
plus a BPE miner that compresses the training proof corpus into reusable
lemmas.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import exprs, metrics
from .forge import make_frame
from .graph import Split
from .kernel import (Assertion, Database, Expr, MMError, ProofNode,
                     _unify, apply_frame, apply_substitution,
                     decompress_proof, proof_rpn, replay_proof, syntax_rpn)
from .metrics import GeneratedTheorem, _replay_tree

SYMBOL_PUSH = "symbol-push"
HYPOTHESIS_REF = "hypothesis-ref"
AXIOM_APPLY = "axiom-apply"
THEOREM_APPLY = "theorem-apply"


@dataclass(frozen=True)
class Action:
    kind: str
    label: str
    expr: Optional[Expr] = None  # payload for pushes

    def sort_key(self) -> tuple:
        return (self.kind, self.label)


@dataclass(frozen=True)
class State:
    stack: tuple[ProofNode, ...] = ()
    history: tuple[Action, ...] = ()


@dataclass
class GenerationConfig:
    max_steps: int = 32
    generations_per_episode: int = 100
    episodes: int = 100
    simulations: int = 100
    c_puct: float = 0.3
    library_sample: int = 5
    hypothesis_sample: int = 5
    gamma: float = 0.95
    expand: str = "all"  # "all" | "best"
    seed: int = 0


class UniformPolicy:
    """Prior-free policy: uniform probabilities, neutral values."""

    def predict(self, db: Database, state: State,
                actions: Sequence[Action]) -> tuple[list[float], list[float]]:
        n = len(actions)
        return [1.0 / n] * n, [0.5] * n


# ---------------------------------------------------------------------------
# action application


def apply_action(db: Database, state: State, action: Action,
                 pool: dict[str, Assertion]) -> Optional[State]:
    """Successor state, or None if the action is invalid here."""
    if action.kind in (SYMBOL_PUSH, HYPOTHESIS_REF):
        node = ProofNode(action.label, action.expr, is_hyp=True)
        return State(state.stack + (node,), state.history + (action,))
    frame = pool.get(action.label) or db.frame(action.label)
    n = frame.mand_count
    if n > len(state.stack):
        return None
    operands = list(state.stack[len(state.stack) - n:]) if n else []
    try:
        node = apply_frame(db, frame, operands)
    except MMError:
        return None
    return State(state.stack[:len(state.stack) - n] + (node,),
                 state.history + (action,))


def is_terminal(db: Database, state: State) -> bool:
    """A single provable conclusion produced by at least one application."""
    return (len(state.stack) == 1
            and db.is_provable_expr(state.stack[0].conclusion)
            and any(a.kind in (AXIOM_APPLY, THEOREM_APPLY)
                    for a in state.history))


def is_composite(db: Database, root: ProofNode) -> bool:
    """True when the proof chains at least two provable applications.

    A single-application proof is merely an instance of the cited assertion
    -- substitutable wherever that assertion already applies -- so it is not
    counted as a new theorem.
    """
    apps = sum(1 for node in root.walk()
               if not node.is_hyp and db.is_provable_expr(node.conclusion))
    return apps >= 2


def state_theorem(db: Database, state: State, label: str
                  ) -> Optional[GeneratedTheorem]:
    """Materialize a terminal state as a theorem with its used hypotheses."""
    if not is_terminal(db, state):
        return None
    root = state.stack[0]
    essentials: list[tuple[str, Expr]] = []
    seen = set()
    for node in root.walk():
        if (node.is_hyp and db.is_provable_expr(node.conclusion)
                and node.label not in seen):
            seen.add(node.label)
            essentials.append((node.label, node.conclusion))
    frame = make_frame(db, label, root.conclusion, essentials)
    return GeneratedTheorem(frame=frame, proof=root)


def theorem_signature(db: Database, thm: GeneratedTheorem) -> tuple:
    return exprs.theorem_key(db, [e for _, e in thm.frame.essentials],
                              thm.frame.conclusion)


def _freeze(tree: exprs.Tree) -> exprs.Tree:
    """Mark a tree's variables as fixed so unification cannot bind them.

    A frozen variable is a childless node whose tag carries the name; it
    unifies only with itself or with an unbound variable.
    """
    if tree[0] == "v":
        return (("frozen", tree[1]),)
    return (tree[0], *(_freeze(c) for c in tree[1:]))


def _unfreeze(tree: exprs.Tree) -> exprs.Tree:
    tag = tree[0]
    if isinstance(tag, tuple) and tag[0] == "frozen":
        return ("v", tag[1])
    if tag == "v":
        return tree
    return (tag, *(_unfreeze(c) for c in tree[1:]))


def _body_tree(db: Database, expr: Expr) -> exprs.Tree:
    """Parse the body of a typed expression as a grammar tree."""
    for tc in sorted(db.float_typecodes):
        try:
            return exprs.to_tree(db, tc, expr[1:])
        except MMError:
            continue
    raise MMError(f"cannot parse {' '.join(expr)!r}")


def _body_typecode(db: Database, expr: Expr) -> str:
    for tc in sorted(db.float_typecodes):
        try:
            exprs.to_tree(db, tc, expr[1:])
            return tc
        except MMError:
            continue
    raise MMError(f"cannot type {' '.join(expr)!r}")


def generalize_theorem(db: Database, thm: GeneratedTheorem, label: str,
                       pool: dict[str, Assertion]) -> GeneratedTheorem:
    """Restate a generated theorem at its most general level.

    Replays the derivation symbolically: every hypothesis leaf and every
    frame instance receives fresh variables and a most general unifier is
    accumulated across the applications, as in condensed detachment.
    Returns the original theorem when the general form does not fit the
    database's variable supply or fails to replay.
    """
    try:
        return _generalize(db, thm, label, pool)
    except MMError:
        return thm


def _generalize(db: Database, thm: GeneratedTheorem, label: str,
                pool: dict[str, Assertion]) -> GeneratedTheorem:
    supply = itertools.count()
    types: dict[str, str] = {}

    def fresh(tc: str) -> str:
        name = f"_g{next(supply)}"
        types[name] = tc
        return name

    env: dict[str, exprs.Tree] = {}
    hyp_pat: dict[str, exprs.Tree] = {}
    hyp_tc: dict[str, str] = {}
    instances: dict[int, tuple[Assertion, dict[str, str]]] = {}

    def replay(node: ProofNode) -> exprs.Tree:
        nonlocal env
        if node.is_hyp:
            if node.label not in hyp_pat:
                tc = _body_typecode(db, node.conclusion)
                hyp_pat[node.label] = ("v", fresh(tc))
                hyp_tc[node.label] = node.conclusion[0]
            return hyp_pat[node.label]
        frame = pool.get(node.label) or db.frame(node.label)
        ren = {var: fresh(tc) for _, tc, var in frame.floats}
        instances[id(node)] = (frame, ren)
        for (_, pattern), child in zip(frame.essentials,
                                       node.children[len(frame.floats):]):
            target = replay(child)
            ptree = exprs.rename_tree(_body_tree(db, pattern), ren)
            bound = exprs.unify(ptree, target, env)
            if bound is None:
                raise MMError("generalization mismatch")
            env = bound
        concl = exprs.rename_tree(_body_tree(db, frame.conclusion), ren)
        return exprs.subst_tree(concl, env)

    root_tree = replay(thm.proof)

    def deep(tree: exprs.Tree) -> exprs.Tree:
        out = exprs.subst_tree(tree, env)
        while out != tree:
            tree, out = out, exprs.subst_tree(out, env)
        return out

    ordered = [(lab, deep(t)) for lab, t in hyp_pat.items()]
    concl_tree = deep(root_tree)
    used: list[str] = []
    for _, tree in ordered + [("", concl_tree)]:
        for var in exprs.tree_vars(tree):
            if var not in used:
                used.append(var)
    by_tc: dict[str, list[str]] = {}
    for var, (_, tc) in db.float_of_var.items():
        by_tc.setdefault(tc, []).append(var)
    mapping: dict[str, str] = {}
    taken: dict[str, int] = {}
    for var in used:
        tc = types[var]
        candidates = by_tc.get(tc, [])
        index = taken.get(tc, 0)
        if index >= len(candidates):
            raise MMError("not enough variables to generalize")
        mapping[var] = candidates[index]
        taken[tc] = index + 1
    relabel: dict[str, str] = {}
    essentials: list[tuple[str, Expr]] = []
    for lab, tree in ordered:
        name = f"{label}.{len(essentials) + 1}"
        relabel[lab] = name
        body = exprs.tree_tokens(db, exprs.rename_tree(tree, mapping))
        essentials.append((name, (hyp_tc[lab], *body)))
    conclusion = (thm.frame.conclusion[0],
                  *exprs.tree_tokens(db, exprs.rename_tree(concl_tree,
                                                           mapping)))
    general = dict(essentials)

    def rebuild(node: ProofNode) -> ProofNode:
        if node.is_hyp:
            return ProofNode(relabel[node.label], general[relabel[node.label]],
                             is_hyp=True)
        frame, ren = instances[id(node)]
        operands: list[ProofNode] = []
        for _, tc, var in frame.floats:
            tree = exprs.rename_tree(deep(("v", ren[var])), mapping)
            body = exprs.tree_tokens(db, tree)
            operands.append(replay_proof(db, syntax_rpn(db, tc, body))[0])
        for child in node.children[len(frame.floats):]:
            operands.append(rebuild(child))
        return apply_frame(db, frame, operands)

    proof = rebuild(thm.proof)
    if proof.conclusion != conclusion:
        raise MMError("generalized proof does not match its statement")
    frame = make_frame(db, label, conclusion, essentials)
    return GeneratedTheorem(frame=frame, proof=proof)


# ---------------------------------------------------------------------------
# action space


def sample_action_space(db: Database, library: Sequence[str],
                        pool: dict[str, Assertion],
                        config: GenerationConfig,
                        rng: random.Random) -> list[Action]:
    """Axioms, symbol pushes, sampled theorems, and sampled hypotheses."""
    actions: list[Action] = []
    for var, (flab, tc) in db.float_of_var.items():
        actions.append(Action(SYMBOL_PUSH, flab, (tc, var)))
    theorems: list[str] = []
    for kind, lab in db.statements:
        if kind == "$a":
            actions.append(Action(AXIOM_APPLY, lab))
    candidates = [lab for lab in library
                  if (pool.get(lab) or db.frame(lab)).kind == "$p"]
    k = min(config.library_sample, len(candidates))
    theorems = sorted(rng.sample(candidates, k)) if k else []
    actions.extend(Action(THEOREM_APPLY, lab) for lab in theorems)
    trees: list[ProofNode] = []
    lib_set = frozenset(library)
    for lab in theorems:
        frame = pool.get(lab) or db.frame(lab)
        if frame.kind != "$p" or not db.is_assertion(lab):
            continue
        try:
            # expand to the library so inlined derivations expose their
            # intermediate steps
            trees.append(metrics.expand_proof(db, lab, lib_set))
        except MMError:
            continue
    chosen: list[Expr] = []
    if trees and config.hypothesis_sample:
        # sample a derivation spine: one node's premises, then the premises
        # of each ancestor on the way up, so consecutive inference steps
        # stay together
        tree = rng.choice(trees)
        parent: dict[int, ProofNode] = {}
        nodes: list[ProofNode] = []
        for node in tree.walk():
            if db.is_provable_expr(node.conclusion):
                nodes.append(node)
            for child in node.children:
                parent[id(child)] = node
        at: Optional[ProofNode] = rng.choice(nodes)
        while at is not None and len(chosen) < config.hypothesis_sample:
            for expr in [c.conclusion for c in at.children
                         if db.is_provable_expr(c.conclusion)
                         ] + [at.conclusion]:
                if expr not in chosen:
                    chosen.append(expr)
                    if len(chosen) == config.hypothesis_sample:
                        break
            at = parent.get(id(at))
    for i, expr in enumerate(chosen):
        actions.append(Action(HYPOTHESIS_REF, f"hyp{i + 1}", expr))
    return actions


# ---------------------------------------------------------------------------
# MCTS with PUCT


@dataclass
class SearchNode:
    state: State
    actions: list[Action] = field(default_factory=list)
    P: dict[Action, float] = field(default_factory=dict)
    N: dict[Action, int] = field(default_factory=dict)
    W: dict[Action, float] = field(default_factory=dict)
    V0: dict[Action, float] = field(default_factory=dict)
    children: dict[Action, "SearchNode"] = field(default_factory=dict)

    def q(self, action: Action) -> float:
        n = self.N[action]
        return self.W[action] / n if n else self.V0[action]

    def total_visits(self) -> int:
        return sum(self.N.values())


def puct(node: SearchNode, action: Action, c: float) -> float:
    """v(s,a) + c*pi(s,a)*sqrt(sum_b N(s,b)) / (1 + N(s,a))."""
    total = node.total_visits()
    explore = c * node.P[action] * math.sqrt(total) / (1 + node.N[action])
    return node.q(action) + explore


def _select_action(node: SearchNode, c: float) -> Action:
    if node.total_visits() == 0:
        return max(node.actions,
                   key=lambda a: (node.P[a],
                                  tuple(-ord(ch) for ch in a.label)))
    return max(node.actions, key=lambda a: (puct(node, a, c), a.label))


class _Search:
    """One MCTS generation: grows a tree from the empty state."""

    def __init__(self, db: Database, policy, action_space: Sequence[Action],
                 pool: dict[str, Assertion], config: GenerationConfig,
                 known: set, rng: random.Random, use_rollout: bool,
                 trace: Optional[list] = None):
        self.db = db
        self.policy = policy
        self.space = list(action_space)
        self.pool = pool
        self.config = config
        self.known = known
        self.rng = rng
        self.use_rollout = use_rollout
        self.trace = trace
        self.best_state: Optional[State] = None  # first winning terminal

    def _expand(self, node: SearchNode) -> float:
        """Attach priors/values to a fresh node; return its value estimate."""
        valid = []
        for action in self.space:
            if apply_action(self.db, node.state, action, self.pool):
                valid.append(action)
        if not valid:
            return 0.0
        node.actions = valid
        pi, values = self.policy.predict(self.db, node.state, valid)
        for action, p, v in zip(valid, pi, values):
            node.P[action] = p
            node.N[action] = 0
            node.W[action] = 0.0
            node.V0[action] = v
        if self.use_rollout:
            return self._rollout(node.state)
        return sum(values) / len(values)

    def _satisfy(self, patterns: Sequence[exprs.Tree],
                 env: dict[str, exprs.Tree],
                 hyps: Sequence[tuple[Action, exprs.Tree]],
                 rng: random.Random):
        """Enumerate hypothesis assignments unifying all of `patterns`.

        Yields (env, picks) for every way of unifying each premise pattern
        with a sampled hypothesis expression.
        """

        def walk(i: int, env: dict[str, exprs.Tree], picks: tuple):
            if i == len(patterns):
                yield env, list(picks)
                return
            for action, tree in rng.sample(hyps, len(hyps)):
                bound = exprs.unify(patterns[i], tree, env)
                if bound is not None:
                    yield from walk(i + 1, bound, picks + (action,))

        yield from walk(0, env, ())

    def _plan(self, state: State, rng: random.Random) -> Optional[State]:
        """Forward-chaining playout: plan a two-application inference.

        Picks an outer inference, derives one of its premises with an inner
        application, and unifies the remaining premises with sampled
        hypothesis expressions; floating operands are built with syntax
        pushes.  Anything already on the stack must serve as the outer
        frame's leading operands.  Returns the terminal state the plan
        reaches, or None when nothing unifies.
        """
        db = self.db
        by_label: dict[str, Action] = {}
        hyps: list[tuple[Action, exprs.Tree]] = []
        inferences: list[tuple[Action, Assertion]] = []
        for action in self.space:
            if action.kind == HYPOTHESIS_REF:
                try:
                    hyps.append((action,
                                 _freeze(_body_tree(db, action.expr))))
                except MMError:
                    pass
                continue
            by_label[action.label] = action
            if action.kind in (AXIOM_APPLY, THEOREM_APPLY):
                frame = self.pool.get(action.label) or db.frame(action.label)
                if db.is_provable_expr(frame.conclusion):
                    inferences.append((action, frame))
        outers = [(a, f) for a, f in inferences if f.essentials]
        if not outers or not hyps:
            return None
        fit = self._fit_chain(state, outers, inferences, hyps, rng)
        if fit is None:
            return None
        outer_action, outer, inner_action, inner, env, picks, \
            inner_picks, var_tc = fit

        def deep(tree: exprs.Tree) -> exprs.Tree:
            out = exprs.subst_tree(tree, env)
            while out != tree:
                tree, out = out, exprs.subst_tree(out, env)
            return out

        # leftover free variables can be anything; pin them to plain
        # database variables so the operands are concrete
        def grounded(var: str) -> exprs.Tree:
            tree = _unfreeze(deep(("v", var)))
            free = {v for v in exprs.tree_vars(tree)
                    if v not in db.float_of_var}
            if not free:
                return tree
            fill: dict[str, exprs.Tree] = {}
            for v in sorted(free):
                pool = [x for x, (_, tc2) in db.float_of_var.items()
                        if tc2 == var_tc[v]]
                if not pool:
                    return tree
                choice = ("v", rng.choice(sorted(pool)))
                fill[v] = choice
                env[v] = choice
            return exprs.subst_tree(tree, fill)

        plan: list[Action] = []

        def emit_wff(tc: str, var: str) -> bool:
            body = exprs.tree_tokens(db, grounded(var))
            try:
                labels = syntax_rpn(db, tc, body)
            except MMError:
                return False
            for lab in labels:
                action = by_label.get(lab)
                if action is None:
                    return False
                plan.append(action)
            return True

        for (_, tc, var) in outer.floats[len(state.stack):]:
            if not emit_wff(tc, f"o.{var}"):
                return None
        for pick in picks:
            if pick is not None:
                plan.append(pick)
                continue
            for _, tc, var in inner.floats:
                if not emit_wff(tc, f"i.{var}"):
                    return None
            plan.extend(inner_picks)
            plan.append(inner_action)
        plan.append(outer_action)
        if len(state.history) + len(plan) > self.config.max_steps:
            return None
        for action in plan:
            nxt = apply_action(self.db, state, action, self.pool)
            if nxt is None:
                return None
            state = nxt
        return state if is_terminal(self.db, state) else None

    def _fit_chain(self, state: State, outers, inferences, hyps,
                   rng: random.Random):
        """Unify an outer inference, a derived premise, and an inner proof.

        Works entirely on grammar trees with the outer and inner frames
        renamed apart ("o." / "i." prefixes).  Returns the matched frames,
        the accumulated unifier, hypothesis picks (None marks the derived
        slot), and a typecode map for the renamed variables.
        """
        db = self.db
        for outer_action, outer in rng.sample(outers, len(outers)):
            if len(state.stack) > len(outer.floats):
                continue
            var_tc = {f"o.{var}": tc for _, tc, var in outer.floats}
            o_ren = {var: f"o.{var}" for _, tc, var in outer.floats}
            base: Optional[dict[str, exprs.Tree]] = {}
            for (_, tc, var), node in zip(outer.floats, state.stack):
                if node.conclusion[0] != tc:
                    base = None
                    break
                try:
                    tree = exprs.to_tree(db, tc, node.conclusion[1:])
                except MMError:
                    base = None
                    break
                base[f"o.{var}"] = _freeze(tree)
            if base is None:
                continue
            try:
                ess_trees = [exprs.rename_tree(_body_tree(db, pattern),
                                               o_ren)
                             for _, pattern in outer.essentials]
            except MMError:
                continue
            positions = rng.sample(range(len(ess_trees)), len(ess_trees))
            for derived_at in positions:
                rest = [t for i, t in enumerate(ess_trees)
                        if i != derived_at]
                for env, rest_picks in self._satisfy(rest, base, hyps, rng):
                    goal = ess_trees[derived_at]
                    for inner_action, inner in rng.sample(
                            inferences, len(inferences)):
                        i_ren = {var: f"i.{var}"
                                 for _, tc, var in inner.floats}
                        i_tc = {f"i.{var}": tc
                                for _, tc, var in inner.floats}
                        try:
                            concl = exprs.rename_tree(
                                _body_tree(db, inner.conclusion), i_ren)
                            inner_ess = [
                                exprs.rename_tree(_body_tree(db, pattern),
                                                  i_ren)
                                for _, pattern in inner.essentials]
                        except MMError:
                            continue
                        bound = exprs.unify(concl, goal, env)
                        if bound is None:
                            continue
                        for final, inner_picks in self._satisfy(
                                inner_ess, bound, hyps, rng):
                            picks: list[Optional[Action]] = list(rest_picks)
                            picks.insert(derived_at, None)
                            return (outer_action, outer, inner_action,
                                    inner, final, picks, inner_picks,
                                    {**var_tc, **i_tc})
        return None

    def _rollout(self, state: State) -> float:
        rng = self.rng
        if self.best_state is None and len(state.stack) <= 2:
            for _ in range(4):
                planned = self._plan(state, rng)
                if planned is not None:
                    reward = self._reward(planned)
                    if reward > 0:
                        return reward
        best = 0.0
        while len(state.history) < self.config.max_steps:
            if is_terminal(self.db, state):
                best = max(best, self._reward(state))
                if rng.random() < 0.5:
                    break
            choices = rng.sample(self.space, len(self.space))
            # prefer applications: pushes are always legal and would
            # otherwise dominate the playout
            if rng.random() < 0.7:
                choices.sort(key=lambda a: a.kind in (SYMBOL_PUSH,
                                                      HYPOTHESIS_REF))
            nxt = None
            for action in choices:
                nxt = apply_action(self.db, state, action, self.pool)
                if nxt is not None:
                    break
            if nxt is None:
                break
            state = nxt
        return max(best, self._reward(state))

    def _reward(self, state: State) -> float:
        thm = state_theorem(self.db, state, "candidate")
        if thm is None or not is_composite(self.db, thm.proof):
            return 0.0
        thm = generalize_theorem(self.db, thm, "candidate", self.pool)
        if theorem_signature(self.db, thm) in self.known:
            return 0.0
        if self.best_state is None:
            self.best_state = state
        return 1.0

    def run(self) -> Optional[State]:
        root = SearchNode(State())
        self._expand(root)
        node = root
        winner: Optional[State] = None
        steps: list[tuple[State, list[Action], list[int]]] = []

        def record(final: State, won: bool) -> Optional[State]:
            if self.trace is not None and steps:
                self.trace.append({"steps": steps, "terminal": final,
                                   "reward": 1.0 if won else 0.0})
            return final if won else None

        while len(node.state.history) < self.config.max_steps:
            if (is_terminal(self.db, node.state)
                    and self._reward(node.state) > 0):
                winner = node.state
                break
            if not node.actions:
                break
            for _ in range(self.config.simulations):
                self._simulate(node)
            if self.best_state is not None:
                # a simulation already reached a winning terminal
                steps.append((node.state, list(node.actions),
                              [node.N[a] for a in node.actions]))
                winner = self.best_state
                break
            action = max(node.actions,
                         key=lambda a: (node.N[a], node.P[a], a.label))
            steps.append((node.state, list(node.actions),
                          [node.N[a] for a in node.actions]))
            child = node.children.get(action)
            if child is None:
                nxt = apply_action(self.db, node.state, action, self.pool)
                if nxt is None:
                    break
                child = SearchNode(nxt)
                self._expand(child)
            node = child
        if (winner is None and is_terminal(self.db, node.state)
                and self._reward(node.state) > 0):
            winner = node.state
        if winner is None:
            # fall back to a winning terminal reached during simulation
            winner = self.best_state
        return record(winner if winner is not None else node.state,
                      winner is not None)

    def _simulate(self, root: SearchNode) -> None:
        path: list[tuple[SearchNode, Action]] = []
        node = root
        while True:
            if (is_terminal(self.db, node.state)
                    or len(node.state.history) >= self.config.max_steps
                    or not node.actions):
                value = self._reward(node.state)
                break
            action = _select_action(node, self.config.c_puct)
            child = node.children.get(action)
            path.append((node, action))
            if child is None:
                nxt = apply_action(self.db, node.state, action, self.pool)
                if nxt is None:
                    # stale validity; mark visited with zero value
                    value = 0.0
                    break
                child = SearchNode(nxt)
                node.children[action] = child
                value = self._expand(child)
                if is_terminal(self.db, child.state):
                    value = self._reward(child.state)
                break
            node = child
        discount = 1.0
        for parent, action in reversed(path):
            parent.N[action] += 1
            parent.W[action] += value * discount
            discount *= self.config.gamma


# ---------------------------------------------------------------------------
# generation drivers


def generate_once(db: Database, policy, action_space: Sequence[Action],
                  pool: dict[str, Assertion], config: GenerationConfig,
                  known: set, rng: random.Random, method: str,
                  label: str,
                  trace: Optional[list] = None) -> Optional[GeneratedTheorem]:
    """One generation attempt; returns a new theorem or None."""
    if method == "random":
        state: Optional[State] = State()
        state = _random_walk(db, action_space, pool, config, rng)
        if state is None or not is_terminal(db, state):
            return None
    else:
        search = _Search(db, policy, action_space, pool, config, known, rng,
                         use_rollout=(method in ("mcts", "mcts_pvn")),
                         trace=trace)
        state = search.run()
        if state is None:
            return None
    thm = state_theorem(db, state, label)
    if thm is None or not is_composite(db, thm.proof):
        return None
    thm = generalize_theorem(db, thm, label, pool)
    if theorem_signature(db, thm) in known:
        return None
    return thm


def _random_walk(db: Database, action_space: Sequence[Action],
                 pool: dict[str, Assertion], config: GenerationConfig,
                 rng: random.Random) -> Optional[State]:
    state = State()
    last_terminal: Optional[State] = None
    for _ in range(config.max_steps):
        if is_terminal(db, state):
            last_terminal = state
            if rng.random() < 0.5:
                return state
        order = rng.sample(list(action_space), len(action_space))
        nxt = None
        for action in order:
            nxt = apply_action(db, state, action, pool)
            if nxt is not None:
                break
        if nxt is None:
            break
        state = nxt
    if is_terminal(db, state):
        return state
    return last_terminal


@dataclass
class EpisodeRecord:
    episode: int
    attempted: int
    new_theorems: int
    library_size: int


def run_episodes(db: Database, split: Split, method: str,
                 config: GenerationConfig, policy=None,
                 collector=None,
                 trace: Optional[list] = None
                 ) -> tuple[list[GeneratedTheorem], list[EpisodeRecord]]:
    """Grow a generated library episode by episode.

    Per episode: sample one action space, run `generations_per_episode`
    generation attempts against a snapshot of the known theorems, then add
    the episode's new theorems to the library (`expand=all`) or only the one
    minimizing train proof distance (`expand=best`).  Stops early on an
    episode with no new theorem.
    """
    if method not in ("random", "mcts", "mcts_pvn"):
        raise ValueError(f"unknown method {method!r}")
    if method == "mcts_pvn" and policy is None:
        raise ValueError("mcts_pvn requires a policy/value model")
    policy = policy or UniformPolicy()
    rng = random.Random(config.seed)
    pool: dict[str, Assertion] = {}
    library: list[str] = list(split.axioms) + list(split.train_library)
    generated: list[GeneratedTheorem] = []
    known = set()
    for lab in library:
        frame = db.frame(lab)
        known.add(exprs.theorem_key(db, [e for _, e in frame.essentials],
                                    frame.conclusion))
    curve: list[EpisodeRecord] = []
    reduced: Optional[dict[str, ProofNode]] = None  # expand="best" cache
    threads = max(1, int(os.environ.get("ATG_THREADS", "1")))
    for episode in range(config.episodes):
        space = sample_action_space(db, library, pool, config, rng)
        seeds = [rng.randrange(2 ** 31)
                 for _ in range(config.generations_per_episode)]
        snapshot = frozenset(known)

        def attempt(i: int) -> Optional[GeneratedTheorem]:
            return generate_once(db, policy, space, pool, config,
                                 set(snapshot), random.Random(seeds[i]),
                                 method, f"g{episode}_{i}", trace=trace)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool_exec:
                results = list(pool_exec.map(
                    attempt, range(config.generations_per_episode)))
        else:
            results = [attempt(i)
                       for i in range(config.generations_per_episode)]
        fresh: list[GeneratedTheorem] = []
        for thm in results:
            if thm is None:
                continue
            sig = theorem_signature(db, thm)
            if sig in known:
                continue
            known.add(sig)
            thm.episode = episode
            fresh.append(thm)
        if collector is not None:
            collector(episode, results)
        if not fresh:
            curve.append(EpisodeRecord(episode,
                                       config.generations_per_episode, 0,
                                       len(generated)))
            break
        if config.expand == "best":
            if reduced is None:
                reduced = {lab: metrics.expand_proof(db, lab, set(library))
                           for lab in split.train_problems}

            def value(thm: GeneratedTheorem) -> int:
                saved = 0
                for lab, tree in reduced.items():
                    result = metrics.reduce_proof(db, lab, tree, [thm])
                    saved += result.original_length - result.reduced_length
                return saved
            scored = [(value(t), t) for t in fresh]
            gain, best = max(scored, key=lambda pair: pair[0])
            # only a theorem that strictly shortens the training problems
            # earns a place in the library
            if gain > 0:
                fresh = [best]
                reduced = {lab: metrics.reduce_proof(db, lab, tree,
                                                     [best]).tree
                           for lab, tree in reduced.items()}
            else:
                fresh = []
        for thm in fresh:
            generated.append(thm)
            pool[thm.label] = thm.frame
            library.append(thm.label)
        curve.append(EpisodeRecord(episode, config.generations_per_episode,
                                   len(fresh), len(generated)))
    return generated, curve


# ---------------------------------------------------------------------------
# BPE proof mining


def bpe_mine(db: Database, corpus_labels: Sequence[str],
             library: Optional[Iterable[str]] = None,
             max_theorems: int = 10_000) -> list[GeneratedTheorem]:
    """Mine reusable lemmas by byte-pair-encoding the proof corpus.

    Repeatedly merges the most frequent adjacent pair of proof tokens.  When
    the merged span contains an axiom or theorem application, it is trimmed
    to its last provable step and extended leftward until it replays
    standalone to a single provable conclusion; each such segment is
    materialized as a generated theorem whose hypothesis leaves become fresh
    essential hypotheses.

    With `library` given, corpus proofs are first expanded to reference only
    library members, exposing the repeated sub-derivations that citations of
    non-library statements would otherwise hide.
    """
    sequences: list[list[tuple[str, ...]]] = []
    for label in corpus_labels:
        if library is not None:
            labels = proof_rpn(metrics.expand_proof(db, label, library))
        else:
            labels = decompress_proof(db, label)
        sequences.append([(lab,) for lab in labels])
    mined: list[GeneratedTheorem] = []
    seen_keys: set = set()
    seen_segments: set = set()
    counter = 0
    while len(mined) < max_theorems:
        pairs: dict[tuple, int] = {}
        for seq in sequences:
            for x, y in zip(seq, seq[1:]):
                pairs[(x, y)] = pairs.get((x, y), 0) + 1
        if not pairs:
            break
        best_pair, freq = min(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
        if freq <= 1:
            break
        x, y = best_pair
        if any(db.is_assertion(lab)
               and db.is_provable_expr(db.frame(lab).conclusion)
               for lab in y):
            thm = _segment_theorem(db, sequences, best_pair,
                                   f"bpe{counter + 1}", seen_segments)
            if thm is not None:
                key = exprs.theorem_key(
                    db, [e for _, e in thm.frame.essentials],
                    thm.frame.conclusion)
                if key not in seen_keys:
                    seen_keys.add(key)
                    mined.append(thm)
                    counter += 1
        merged = x + y
        for seq in sequences:
            i = 0
            while i < len(seq) - 1:
                if seq[i] == x and seq[i + 1] == y:
                    seq[i:i + 2] = [merged]
                i += 1
    return mined


def _segment_theorem(db: Database, sequences: list[list[tuple[str, ...]]],
                     pair: tuple[tuple[str, ...], tuple[str, ...]],
                     label: str, seen_segments: set
                     ) -> Optional[GeneratedTheorem]:
    """Turn an occurrence of the merged pair into a standalone proof segment.

    Trailing tokens that only set up a later step (floats, syntax) are
    trimmed so the span ends on its last provable application; the span is
    then extended leftward until it replays to a single |- conclusion.
    """
    flat_pair = pair[0] + pair[1]
    last = max((i for i, lab in enumerate(flat_pair)
                if db.is_assertion(lab)
                and db.is_provable_expr(db.frame(lab).conclusion)),
               default=-1)
    if last < 0:
        return None
    span = flat_pair[:last + 1]
    for seq in sequences:
        flat = [tok for token in seq for tok in token]
        for start in range(len(flat) - len(span) + 1):
            if tuple(flat[start:start + len(span)]) != span:
                continue
            end = start + len(span)
            for begin in range(start, -1, -1):
                segment = tuple(flat[begin:end])
                root = _replay_segment(db, segment)
                if root is None:
                    continue
                if segment in seen_segments:
                    return None
                seen_segments.add(segment)
                return _theoremize(db, root, label)
    return None


def _replay_segment(db: Database,
                    segment: tuple[str, ...]) -> Optional[ProofNode]:
    stack: list[ProofNode] = []
    applied = False
    for lab in segment:
        if db.is_hypothesis(lab):
            kind, stmt = db.hypotheses[lab]
            stack.append(ProofNode(lab, tuple(stmt), is_hyp=True))
            continue
        if not db.is_assertion(lab):
            return None
        frame = db.frame(lab)
        n = frame.mand_count
        if n > len(stack):
            return None
        operands = stack[len(stack) - n:] if n else []
        del stack[len(stack) - n:]
        try:
            stack.append(apply_frame(db, frame, operands))
        except MMError:
            return None
        if db.is_provable_expr(frame.conclusion):
            applied = True
    if (len(stack) == 1 and applied
            and db.is_provable_expr(stack[0].conclusion)):
        return stack[0]
    return None


def _theoremize(db: Database, root: ProofNode,
                label: str) -> Optional[GeneratedTheorem]:
    essentials: list[tuple[str, Expr]] = []
    renames: dict[str, str] = {}
    for node in root.walk():
        if (node.is_hyp and db.is_provable_expr(node.conclusion)
                and node.label not in renames):
            fresh = f"{label}.{len(essentials) + 1}"
            renames[node.label] = fresh
            essentials.append((fresh, node.conclusion))

    def rebuild(node: ProofNode) -> ProofNode:
        if node.is_hyp:
            return ProofNode(renames.get(node.label, node.label),
                             node.conclusion, is_hyp=True)
        return ProofNode(node.label, node.conclusion,
                         tuple(rebuild(c) for c in node.children))

    frame = make_frame(db, label, root.conclusion, essentials)
    return GeneratedTheorem(frame=frame, proof=rebuild(root))
