"""Theorem reference graph, depth computation, and train/test splits.

A database induces a DAG whose nodes are the $a/$p statements and whose edges
point from each theorem to the assertions referenced by its stored proof.
Depth is the longest reference path down to the axioms.  Splits carve a prefix
of the database into a train half and a test half, and each half into a
library (shallow statements, usable as proof steps) and a problem set (deep
statements, used as evaluation targets).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .kernel import Database, decompress_proof

#: preset name -> (statement cutoff, train depth k, test depth k)
PRESETS: dict[str, tuple[int, int, int]] = {
    "wb": (272, 10, 20),
    "wif": (1284, 33, 39),
    "minimp": (2048, 36, 40),
}


def proof_references(db: Database, label: str) -> set[str]:
    """Assertions referenced by the stored proof of a $p statement."""
    return {lab for lab in decompress_proof(db, label)
            if db.is_assertion(lab)}


def build_graph(db: Database) -> dict[str, set[str]]:
    """label -> referenced assertion labels, for every $a and $p statement."""
    graph: dict[str, set[str]] = {}
    for kind, label in db.statements:
        if kind == "$a":
            graph[label] = set()
        elif kind == "$p":
            graph[label] = proof_references(db, label)
    return graph


def depths(db: Database) -> dict[str, int]:
    """Longest reference path from each assertion down to the axioms.

    Statements appear in dependency order, so a single forward pass works.
    """
    out: dict[str, int] = {}
    for kind, label in db.statements:
        if kind == "$a":
            out[label] = 0
        elif kind == "$p":
            refs = proof_references(db, label)
            out[label] = 1 + max((out[r] for r in refs), default=0)
    return out


@dataclass
class Split:
    """A train/test benchmark over a database prefix."""

    preset: str
    cutoff: int
    k_train: int
    k_test: int
    axioms: list[str] = field(default_factory=list)
    train_library: list[str] = field(default_factory=list)
    train_problems: list[str] = field(default_factory=list)
    test_library: list[str] = field(default_factory=list)
    test_problems: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "cutoff": self.cutoff,
            "k_train": self.k_train,
            "k_test": self.k_test,
            "axioms": self.axioms,
            "train_library": self.train_library,
            "train_problems": self.train_problems,
            "test_library": self.test_library,
            "test_problems": self.test_problems,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Split":
        return cls(**data)

    @property
    def train_statements(self) -> list[str]:
        return self.train_library + self.train_problems

    @property
    def test_statements(self) -> list[str]:
        return self.test_library + self.test_problems


def make_split(db: Database, preset: str, seed: int = 0,
               train_frac: float = 0.6) -> Split:
    """Split the preset's database prefix into train/test benchmark halves.

    The axioms and essential hypotheses of the prefix are shared context.
    Provable statements are visited in seeded-random order and each is
    assigned to whichever half's accumulated proof-reference overlap with the
    other half grows least, subject to the balanced target sizes.  Within
    each half, statements at depth <= k form the library and deeper
    statements the problems.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; "
                         f"choose from {sorted(PRESETS)}")
    cutoff, k_train, k_test = PRESETS[preset]
    depth = depths(db)
    prefix = db.statements[:cutoff]
    axioms = [lab for kind, lab in prefix if kind == "$a"]
    provable = [lab for kind, lab in prefix if kind == "$p"]
    rng = random.Random(seed)
    shuffled = provable[:]
    rng.shuffle(shuffled)
    n_train = round(len(shuffled) * train_frac)
    axiom_set = set(axioms)
    refs = {lab: proof_references(db, lab) - axiom_set for lab in provable}

    halves: list[list[str]] = [[], []]
    targets = [n_train, len(provable) - n_train]
    half_refs: list[set[str]] = [set(), set()]
    for lab in shuffled:
        open_sides = [i for i in (0, 1) if len(halves[i]) < targets[i]]
        if len(open_sides) == 1:
            side = open_sides[0]
        else:
            # overlap increase = fresh references already held by the other
            # half, plus the statement itself if the other half references it
            costs = []
            for i in (0, 1):
                other = half_refs[1 - i]
                cost = len((refs[lab] - half_refs[i]) & other)
                cost += 1 if lab in other else 0
                costs.append(cost)
            if costs[0] != costs[1]:
                side = costs.index(min(costs))
            else:
                side = rng.randrange(2)
        halves[side].append(lab)
        half_refs[side].add(lab)
        half_refs[side] |= refs[lab]

    split = Split(preset=preset, cutoff=cutoff,
                  k_train=k_train, k_test=k_test, axioms=axioms)
    order = {lab: i for i, lab in enumerate(provable)}
    for half, k, library, problems in (
            (halves[0], k_train, split.train_library, split.train_problems),
            (halves[1], k_test, split.test_library, split.test_problems)):
        for lab in sorted(half, key=order.__getitem__):
            (library if depth[lab] <= k else problems).append(lab)
    if not split.train_problems or not split.test_problems:
        raise ValueError(f"{preset!r}: empty problem set at the configured "
                         f"depth thresholds")
    return split


def split_stats(db: Database, split: Split) -> dict:
    """Size, depth, and shape statistics for each part of a split."""
    depth = depths(db)
    stats: dict = {"preset": split.preset, "cutoff": split.cutoff}
    parts = {
        "axioms": split.axioms,
        "train_library": split.train_library,
        "train_problems": split.train_problems,
        "test_library": split.test_library,
        "test_problems": split.test_problems,
    }
    for name, labels in parts.items():
        if not labels:
            stats[name] = {"count": 0}
            continue
        ds = [depth[lab] for lab in labels]
        toks = [len(db.frame(lab).conclusion) for lab in labels]
        entry = {
            "count": len(labels),
            "depth_min": min(ds),
            "depth_avg": round(sum(ds) / len(ds), 2),
            "depth_max": max(ds),
            "tokens_avg": round(sum(toks) / len(toks), 2),
        }
        if name != "axioms":
            refs = [len(proof_references(db, lab)) for lab in labels]
            entry["references_avg"] = round(sum(refs) / len(refs), 2)
        stats[name] = entry
    return stats
