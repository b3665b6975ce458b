"""Proof distance, reduction, APR, precision, and usage histogram."""

import pytest

from atgkit import forge, metrics
from atgkit.metrics import GeneratedTheorem

import microsys


AXIOMS = ["wn", "wi", "wb", "ax-1", "ax-2", "ax-3", "ax-mp",
          "bi1", "bi2", "bi3"]


def fig2_tree(db):
    """Seven-step proof of the contradiction-implies-anything pattern."""
    hyp1 = forge.hyp_node("hyp1", "|- ( ph -> ps )")
    hyp2 = forge.hyp_node("hyp2", "|- ( ph -> -. ps )")
    n65 = forge.ap(db, "pm2.65i", {"ph": "ph", "ps": "ps"}, hyp1, hyp2)
    a1 = forge.ap(db, "ax-1", {"ph": "-. ph", "ps": "-. ch"})
    m1 = forge.ap(db, "ax-mp", {"ph": "-. ph",
                                "ps": "( -. ch -> -. ph )"}, n65, a1)
    a3 = forge.ap(db, "ax-3", {"ph": "ch", "ps": "ph"})
    return forge.ap(db, "ax-mp", {"ph": "( -. ch -> -. ph )",
                                  "ps": "( ph -> ch )"}, m1, a3)


def test_fig2_reduction(db):
    """With the lemma available, 7 steps collapse to 4 and APR is exactly 2."""
    tree = fig2_tree(db)
    assert tree.conclusion == tuple("|- ( ph -> ch )".split())
    assert db.count_steps(tree) == 7
    lemma = GeneratedTheorem(frame=db.frame("pm2.21i"))
    result = metrics.reduce_proof(db, "pm2.21dd", tree, [lemma])
    assert (result.original_length, result.reduced_length) == (7, 4)
    assert [lab for lab, _ in result.applied] == ["pm2.21i"]
    apr = result.original_length - result.reduced_length - 1
    assert apr == 2


def test_reduce_empty_library_is_identity(db):
    tree = fig2_tree(db)
    result = metrics.reduce_proof(db, "pm2.21dd", tree, [])
    assert result.reduced_length == result.original_length == 7
    assert result.applied == []


def test_expand_proof_inlines_non_library_references(tiny_db):
    # idi cites id and a1i; with only axioms citable both are inlined
    tree = metrics.expand_proof(tiny_db, "idi", {"ax-1", "ax-2", "ax-mp"})
    labels = {n.label for n in tree.walk() if not n.is_hyp}
    assert "id" not in labels and "a1i" not in labels
    assert tree.conclusion == tiny_db.frame("idi").conclusion
    # with id citable, it stays
    tree2 = metrics.expand_proof(tiny_db, "idi",
                                 {"ax-1", "ax-2", "ax-mp", "id"})
    assert "id" in {n.label for n in tree2.walk()}
    assert tiny_db.count_steps(tree2) < tiny_db.count_steps(tree)


def test_proof_distance_is_mean():
    db, problems, _ = microsys.build_and_problems(
        rules=[((), "a"), (("a",), "b"), (("b",), "c"), (("c",), "d")],
        symbols="abcd", problems=["c", "d"])
    # stored shortest proofs have 3 and 4 steps
    assert metrics.proof_distance(db, db.axiom_labels(), problems) == 3.5


def test_proof_distance_empty_problems(db):
    with pytest.raises(ValueError):
        metrics.proof_distance(db, AXIOMS, [])


def test_apr_empty_generated(db, split_of):
    split = split_of(0)
    assert metrics.apr(db, AXIOMS, split.test_problems[:2], []) == 0.0


def test_apr_penalty_for_useless_theorem():
    db, problems, _ = microsys.build_and_problems(
        rules=[((), "a"), (("a",), "b"), (("b",), "c"), (("c",), "d")],
        symbols="abcde", problems=["c", "d"])
    lib = db.axiom_labels()
    useful = [microsys.make_lemma(db, "lem1", "c", ["a"])]
    # e is underivable: the lemma can never be applied
    junk = useful + [microsys.make_lemma(db, "lem2", "e", ["a"])]
    assert (metrics.apr(db, lib, problems, junk)
            == metrics.apr(db, lib, problems, useful) - 1)


def test_distance_monotone_in_generated():
    db, problems, _ = microsys.build_and_problems(
        rules=[((), "a"), (("a",), "b"), (("b",), "c"), (("c",), "d")],
        symbols="abcd", problems=["c", "d"])
    lib = db.axiom_labels()
    lem1 = microsys.make_lemma(db, "lem1", "c", ["a"])
    lem2 = microsys.make_lemma(db, "lem2", "d", ["b"])
    d0 = metrics.proof_distance(db, lib, problems)
    d1 = metrics.proof_distance(db, lib, problems, [lem1])
    d2 = metrics.proof_distance(db, lib, problems, [lem1, lem2])
    assert d0 >= d1 >= d2


def test_precision_bounds_and_alpha_matching(db):
    # a generated copy of a1i under renamed variables still counts
    frame = db.frame("a1i")
    gen = GeneratedTheorem(frame=forge.make_frame(
        db, "copy", "|- ( ch -> ps )", [("copy.1", "|- ps")]))
    assert metrics.precision(db, [gen], ["a1i"]) == 100.0
    assert metrics.precision(db, [gen], ["id"]) == 0.0
    assert metrics.precision(db, [], ["a1i"]) == 0.0
    assert frame.conclusion == tuple("|- ( ps -> ph )".split())


def test_usage_histogram_buckets():
    gen = [GeneratedTheorem(frame=None) for _ in range(3)]
    for thm, label in zip(gen, ("t1", "t2", "t3")):
        thm.frame = type("F", (), {"label": label})()
    reductions = []
    for i in range(3):
        reductions.append(metrics.ReductionResult(
            problem=f"p{i}", original_length=5, reduced_length=4,
            applied=[("t1", 0)] + ([("t2", 1)] if i == 0 else [])))
    hist = metrics.usage_histogram(gen, reductions)
    assert hist["3"] == 1        # t1 used in 3 problems
    assert hist["1-2"] == 1      # t2 used in 1 problem
    assert sum(hist.values()) == 2  # t3 never used: excluded


def test_report_shape(db, split_of):
    split = split_of(0)
    lib = list(split.axioms) + list(split.test_library)
    rep = metrics.report(db, "wb", "test", lib, split.test_problems[:3],
                         [], human=split.test_library)
    assert rep["len_LG"] == 0
    assert rep["APR"] == rep["D_before"] - rep["D_after"]
    assert set(rep["histogram"]) == set(metrics.BUCKETS)
