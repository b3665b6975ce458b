"""Reference graph, depths, and train/test splits."""

import pytest

from atgkit import graph


def test_proof_references(tiny_db):
    assert graph.proof_references(tiny_db, "a1i") == {"wi", "ax-1", "ax-mp"}
    assert graph.proof_references(tiny_db, "idi") == {"wi", "id", "a1i"}


def test_build_graph_axioms_are_roots(tiny_db):
    g = graph.build_graph(tiny_db)
    assert g["ax-1"] == set()
    assert "id" in g["idi"]


def test_depths(tiny_db):
    d = graph.depths(tiny_db)
    assert d["ax-1"] == 0
    assert d["a1i"] == 1
    assert d["id"] == 1
    assert d["idi"] == 2  # cites id and a1i, both at depth 1


def test_depths_monotone_along_references(db):
    d = graph.depths(db)
    for lab in db.provable_labels():
        refs = graph.proof_references(db, lab)
        assert d[lab] == 1 + max(d[r] for r in refs)


def test_make_split_shapes(split_of, db):
    split = split_of(0)
    cutoff, k_train, k_test = graph.PRESETS["wb"]
    prefix = {lab for _, lab in db.statements[:cutoff]}
    labels = (split.train_library + split.train_problems
              + split.test_library + split.test_problems)
    assert set(labels) <= prefix
    assert len(labels) == len(set(labels))  # halves are disjoint
    d = graph.depths(db)
    assert all(d[lab] <= k_train for lab in split.train_library)
    assert all(d[lab] > k_train for lab in split.train_problems)
    assert all(d[lab] <= k_test for lab in split.test_library)
    assert all(d[lab] > k_test for lab in split.test_problems)
    assert split.train_problems and split.test_problems


def test_make_split_deterministic(db):
    a = graph.make_split(db, "wb", seed=7)
    b = graph.make_split(db, "wb", seed=7)
    assert a.to_dict() == b.to_dict()
    c = graph.make_split(db, "wb", seed=8)
    assert a.to_dict() != c.to_dict()


def test_make_split_unknown_preset(db):
    with pytest.raises(ValueError):
        graph.make_split(db, "nonesuch")


def test_make_split_infeasible_depths(tiny_db):
    # the tiny database has only depth <= 2 statements: every wb-depth
    # threshold leaves the problem sets empty
    with pytest.raises(ValueError):
        graph.make_split(tiny_db, "wb")


def test_split_round_trip(split_of):
    split = split_of(0)
    assert graph.Split.from_dict(split.to_dict()).to_dict() == split.to_dict()


def test_split_stats(db, split_of):
    stats = graph.split_stats(db, split_of(0))
    assert stats["train_library"]["count"] == len(split_of(0).train_library)
    assert stats["train_problems"]["depth_min"] > graph.PRESETS["wb"][1]
