"""Action application, PUCT, generation, generalization, and BPE mining."""

import random

import pytest

from atgkit import exprs, kernel, metrics, search
from atgkit.search import (AXIOM_APPLY, SYMBOL_PUSH, Action,
                           GenerationConfig, SearchNode, State)


def push(var):
    return Action(SYMBOL_PUSH, f"w{var}", ("wff", var))


def test_apply_action_push_and_apply(tiny_db):
    s0 = State()
    s1 = search.apply_action(tiny_db, s0, push("ph"), {})
    s2 = search.apply_action(tiny_db, s1, push("ps"), {})
    s3 = search.apply_action(tiny_db, s2, Action(AXIOM_APPLY, "ax-1"), {})
    assert [n.conclusion for n in s3.stack] == [
        ("|-", "(", "ph", "->", "(", "ps", "->", "ph", ")", ")")]


def test_apply_action_underflow_is_invalid(tiny_db):
    assert search.apply_action(tiny_db, State(),
                               Action(AXIOM_APPLY, "ax-mp"), {}) is None


def test_apply_action_does_not_mutate(tiny_db):
    s1 = search.apply_action(tiny_db, State(), push("ph"), {})
    before = s1.stack
    assert search.apply_action(tiny_db, s1,
                               Action(AXIOM_APPLY, "ax-mp"), {}) is None
    assert s1.stack == before


def apply_a1i(tiny_db, state):
    """Push a1i's operands (floats ph, ps, then |- ph) and apply it."""
    hyp = Action(search.HYPOTHESIS_REF, "h1", ("|-", "ph"))
    for action in (push("ph"), push("ps"), hyp,
                   Action(search.THEOREM_APPLY, "a1i")):
        state = search.apply_action(tiny_db, state, action, {})
        assert state is not None
    return state


def test_is_terminal(tiny_db):
    s1 = search.apply_action(tiny_db, State(), push("ph"), {})
    assert not search.is_terminal(tiny_db, s1)  # wff, not |-
    hyp = Action(search.HYPOTHESIS_REF, "h1", ("|-", "ph"))
    s2 = search.apply_action(tiny_db, State(), hyp, {})
    assert not search.is_terminal(tiny_db, s2)  # no application yet
    s4 = apply_a1i(tiny_db, State())
    assert search.is_terminal(tiny_db, s4)


def test_stack_machine_equivalence(db):
    """Replaying a stored proof as actions reaches the same conclusion."""
    from atgkit.model import proof_actions
    for label in ("a1i", "mp2", "pm2.21i"):
        actions = proof_actions(db, label)
        state = State()
        for action in actions:
            state = search.apply_action(db, state, action, {})
            assert state is not None
        assert search.is_terminal(db, state)
        assert state.stack[0].conclusion == db.frame(label).conclusion


def test_puct_arithmetic():
    node = SearchNode(state=State())
    a, b = Action(SYMBOL_PUSH, "a"), Action(SYMBOL_PUSH, "b")
    node.actions = [a, b]
    node.P = {a: 0.2, b: 0.8}
    node.N = {a: 3, b: 6}
    node.W = {a: 1.5, b: 0.0}
    node.V0 = {a: 0.5, b: 0.5}
    # v = W/N = 0.5; exploration = 0.3 * 0.2 * sqrt(9) / (1 + 3)
    assert search.puct(node, a, 0.3) == pytest.approx(0.545)
    assert search.puct(node, a, 0.0) == pytest.approx(0.5)


def test_sample_action_space_deterministic(db, split_of):
    split = split_of(3)
    library = list(split.axioms) + list(split.train_library)
    config = GenerationConfig(seed=5)
    a = search.sample_action_space(db, library, {}, config,
                                   random.Random(5))
    b = search.sample_action_space(db, library, {}, config,
                                   random.Random(5))
    assert a == b
    kinds = {action.kind for action in a}
    assert kinds == {SYMBOL_PUSH, search.HYPOTHESIS_REF, AXIOM_APPLY,
                     search.THEOREM_APPLY}
    axioms = [x for x in a if x.kind == AXIOM_APPLY]
    assert {x.label for x in axioms} >= {"ax-1", "ax-2", "ax-3", "ax-mp"}
    thms = [x for x in a if x.kind == search.THEOREM_APPLY]
    assert len(thms) == config.library_sample
    hyps = [x for x in a if x.kind == search.HYPOTHESIS_REF]
    assert 1 <= len(hyps) <= config.hypothesis_sample
    assert all(db.is_provable_expr(h.expr) for h in hyps)


def test_is_composite(tiny_db):
    from atgkit import forge
    hyp = forge.hyp_node("h1", "|- ph")
    one = forge.ap(tiny_db, "a1i", {"ph": "ph", "ps": "ps"}, hyp)
    assert not search.is_composite(tiny_db, one)  # single application
    two = forge.ap(tiny_db, "a1i", {"ph": "( ps -> ph )", "ps": "ch"}, one)
    assert search.is_composite(tiny_db, two)


def test_state_theorem_collects_used_hypotheses(tiny_db):
    s = apply_a1i(tiny_db, State())
    thm = search.state_theorem(tiny_db, s, "t")
    assert [lab for lab, _ in thm.frame.essentials] == ["h1"]
    assert thm.frame.conclusion == ("|-", "(", "ps", "->", "ph", ")")


def test_generalize_theorem(db):
    """A ground two-application proof generalizes to fresh variables."""
    from atgkit import forge
    hyp = forge.hyp_node("h1", "|- ( -. ph -> -. ph )")
    a3 = forge.ap(db, "ax-3", {"ph": "ph", "ps": "ph"})
    root = forge.ap(db, "ax-mp",
                    {"ph": "( -. ph -> -. ph )", "ps": "( ph -> ph )"},
                    hyp, a3)
    thm = metrics.GeneratedTheorem(
        frame=forge.make_frame(db, "cand", root.conclusion,
                               [("h1", hyp.conclusion)]),
        proof=root)
    gen = search.generalize_theorem(db, thm, "cand", {})
    # the generalized conclusion keeps two independent variables:
    # |- ( -. x -> -. y ) yields |- ( y -> x )
    assert len(exprs.tree_vars(exprs.to_tree(
        db, "wff", gen.frame.conclusion[1:]))) == 2
    # and the rebuilt proof still verifies against the new frame
    assert gen.proof.conclusion == gen.frame.conclusion
    emitted = kernel.emit_theorem(db, gen.frame, gen.proof)
    assert gen.frame.label in emitted


def test_generate_once_random_none_on_zero_budget(db, split_of):
    split = split_of(3)
    library = list(split.axioms) + list(split.train_library)
    config = GenerationConfig(simulations=0, max_steps=4, seed=0)
    space = search.sample_action_space(db, library, {}, config,
                                       random.Random(0))
    out = search.generate_once(db, search.UniformPolicy(), space, {},
                               config, set(), random.Random(0), "mcts", "g")
    assert out is None


def test_run_episodes_unknown_method(db, split_of):
    with pytest.raises(ValueError):
        search.run_episodes(db, split_of(3), "annealing",
                            GenerationConfig())


def test_run_episodes_deterministic(db, split_of):
    split = split_of(3)
    config = GenerationConfig(episodes=2, generations_per_episode=4,
                              simulations=5, max_steps=16, seed=9)
    a, curve_a = search.run_episodes(db, split, "random", config)
    b, curve_b = search.run_episodes(db, split, "random", config)
    assert curve_a == curve_b
    assert ([search.theorem_signature(db, t) for t in a]
            == [search.theorem_signature(db, t) for t in b])


def test_bpe_merges_most_frequent_pair(tiny_db):
    # corpus where the (wph, wph) pair dominates: mining runs and every
    # produced theorem re-verifies and is novel
    corpus = ["a1i", "id", "idi"]
    mined = search.bpe_mine(tiny_db, corpus)
    keys = [search.theorem_signature(tiny_db, t) for t in mined]
    assert len(keys) == len(set(keys))
    for thm in mined:
        assert thm.proof is not None
        assert thm.proof.conclusion == thm.frame.conclusion


def test_bpe_mined_theorems_verify(db, split_of):
    split = split_of(2)
    library = list(split.axioms) + list(split.train_library)
    mined = search.bpe_mine(db, split.train_problems[:10], library=library)
    assert mined
    for thm in mined:
        text = kernel.emit_theorem(db, thm.frame, thm.proof)
        assert thm.label in text


def test_bpe_deterministic(db, split_of):
    split = split_of(2)
    library = list(split.axioms) + list(split.train_library)
    corpus = split.train_problems[:10]
    a = search.bpe_mine(db, corpus, library=library)
    b = search.bpe_mine(db, corpus, library=library)
    assert ([search.theorem_signature(db, t) for t in a]
            == [search.theorem_signature(db, t) for t in b])
