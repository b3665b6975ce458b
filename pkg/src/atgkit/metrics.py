"""Evaluation metrics for generated theorem libraries.

Given a library L (labels citable as single proof steps), a problem set P
(statements with stored proofs), and a generated library L_G, this module
computes:

* proof_distance D(L, P): mean provable-step length of the problems' proofs
  after expanding every reference outside L down to library members;
* reduce_proof: greedy rewriting of a proof tree using generated theorems;
* apr: average proof reduction D(L,P) - D(L u L_G, P) - |L_G|;
* precision: share of generated theorems alpha-matching a human library;
* usage_histogram: how many problems each generated theorem helped shorten.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import exprs
from .kernel import (Assertion, Database, Expr, MMError, ProofNode,
                     apply_frame, decompress_proof, match_assertion, apply_substitution)

# expanded proof trees of deep statements nest well past the default limit
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))


@dataclass
class GeneratedTheorem:
    """A candidate theorem: frame plus the proof it was found with."""

    frame: Assertion
    proof: Optional[ProofNode] = None
    episode: int = -1

    @property
    def label(self) -> str:
        return self.frame.label


@dataclass
class ReductionResult:
    """Outcome of rewriting one problem's proof with generated theorems."""

    problem: str
    original_length: int
    reduced_length: int
    applied: list[tuple[str, int]] = field(default_factory=list)
    tree: Optional[ProofNode] = None


# ---------------------------------------------------------------------------
# proof expansion


def expand_proof(db: Database, label: str, library: Iterable[str]
                 ) -> ProofNode:
    """Proof tree of `label` with references outside `library` inlined.

    Axioms and syntax steps are always citable; every other reference not in
    the library is recursively replaced by its stored proof, with the
    reference's operands substituted for the inlined proof's hypotheses.
    """
    lib = set(library)
    root = _replay_tree(db, label, {})
    return _expand(db, root, lib)


def _replay_tree(db: Database, label: str,
                 hyp_map: dict[str, ProofNode]) -> ProofNode:
    """Replay a stored proof, substituting mapped hypotheses."""
    stack: list[ProofNode] = []
    for lab in decompress_proof(db, label):
        if lab in hyp_map:
            stack.append(hyp_map[lab])
        elif db.is_hypothesis(lab):
            kind, stmt = db.hypotheses[lab]
            stack.append(ProofNode(lab, tuple(stmt), is_hyp=True))
        else:
            frame = db.frame(lab)
            n = frame.mand_count
            operands = stack[len(stack) - n:] if n else []
            del stack[len(stack) - n:]
            stack.append(apply_frame(db, frame, operands))
    if len(stack) != 1:
        raise MMError(f"{label!r}: {len(stack)} residual stack elements")
    return stack[0]


def _expand(db: Database, node: ProofNode, lib: set[str]) -> ProofNode:
    if node.is_hyp:
        return node
    children = tuple(_expand(db, c, lib) for c in node.children)
    frame = db.frame(node.label)
    if (frame.kind == "$a" or node.label in lib
            or not db.is_provable_expr(node.conclusion)):
        return ProofNode(node.label, node.conclusion, children)
    hyp_map: dict[str, ProofNode] = {}
    for (flab, _, _), child in zip(frame.floats, children):
        hyp_map[flab] = child
    for (elab, _), child in zip(frame.essentials,
                                children[len(frame.floats):]):
        hyp_map[elab] = child
    inlined = _replay_tree(db, node.label, hyp_map)
    if inlined.conclusion != node.conclusion:
        raise MMError(f"inlining {node.label!r} changed the conclusion")
    return _expand(db, inlined, lib)


# ---------------------------------------------------------------------------
# greedy proof reduction


def reduce_proof(db: Database, problem: str, tree: ProofNode,
                 generated: Sequence[GeneratedTheorem]) -> ReductionResult:
    """Greedily rewrite `tree` using generated theorems, to a fixpoint.

    Each pass finds the single rewrite with the largest provable-step saving:
    a node n and theorem T such that T's conclusion matches n's conclusion
    and every essential hypothesis instance is concluded by some descendant
    of n (or hypothesis leaf); the subtree between n and those descendants
    collapses into one application of T.  Ties prefer the shallowest, then
    leftmost node.
    """
    original = db.count_steps(tree)
    applied: list[tuple[str, int]] = []
    while generated:
        best = None  # (saving, node_depth, node_index, thm_rank, ...)
        for index, depth, node in _bfs(tree):
            if node.is_hyp or not db.is_provable_expr(node.conclusion):
                continue
            pool = _descendant_pool(db, node)
            if not pool:
                continue
            for rank, thm in enumerate(generated):
                subst = match_assertion(db, thm.frame, node.conclusion,
                                        pool.keys())
                if subst is None:
                    continue
                kids = [pool[apply_substitution(hyp, subst)]
                        for _, hyp in thm.frame.essentials]
                saving = (db.count_steps(node)
                          - 1 - sum(db.count_steps(k) for k in kids))
                cand = (-saving, depth, index, rank, node, thm, kids)
                if saving > 0 and (best is None or cand[:4] < best[:4]):
                    best = cand
        if best is None:
            break
        _, _, index, _, node, thm, kids = best
        replacement = ProofNode(thm.label, node.conclusion, tuple(kids))
        tree = _replace(tree, node, replacement)
        applied.append((thm.label, index))
    return ReductionResult(problem=problem, original_length=original,
                           reduced_length=db.count_steps(tree),
                           applied=applied, tree=tree)


def _bfs(tree: ProofNode) -> Iterable[tuple[int, int, ProofNode]]:
    """(preorder index, depth, node) in breadth-first order."""
    index = {id(n): i for i, n in enumerate(tree.walk())}
    queue: list[tuple[int, ProofNode]] = [(0, tree)]
    while queue:
        depth, node = queue.pop(0)
        yield index[id(node)], depth, node
        queue.extend((depth + 1, c) for c in node.children)


def _descendant_pool(db: Database, node: ProofNode
                     ) -> dict[Expr, ProofNode]:
    """Cheapest strict-descendant subtree concluding each |- expression."""
    pool: dict[Expr, ProofNode] = {}
    for child in node.children:
        for sub in child.walk():
            if not db.is_provable_expr(sub.conclusion):
                continue
            prev = pool.get(sub.conclusion)
            if prev is None or db.count_steps(sub) < db.count_steps(prev):
                pool[sub.conclusion] = sub
    return pool


def _replace(tree: ProofNode, target: ProofNode,
             replacement: ProofNode) -> ProofNode:
    if tree is target:
        return replacement
    children = tuple(_replace(c, target, replacement)
                     for c in tree.children)
    if all(a is b for a, b in zip(children, tree.children)):
        return tree
    return ProofNode(tree.label, tree.conclusion, children,
                     is_hyp=tree.is_hyp)


# ---------------------------------------------------------------------------
# aggregate metrics


def reduce_all(db: Database, library: Iterable[str], problems: Sequence[str],
               generated: Sequence[GeneratedTheorem] = ()
               ) -> list[ReductionResult]:
    lib = set(library)
    out = []
    for label in problems:
        tree = expand_proof(db, label, lib)
        out.append(reduce_proof(db, label, tree, generated))
    return out


def proof_distance(db: Database, library: Iterable[str],
                   problems: Sequence[str],
                   generated: Sequence[GeneratedTheorem] = ()) -> float:
    """Mean expanded (and, with L_G, reduced) proof length over problems."""
    if not problems:
        raise ValueError("empty problem set")
    results = reduce_all(db, library, problems, generated)
    return sum(r.reduced_length for r in results) / len(results)


def apr(db: Database, library: Iterable[str], problems: Sequence[str],
        generated: Sequence[GeneratedTheorem]) -> float:
    """Average proof reduction: D(L,P) - D(L u L_G, P) - |L_G|."""
    if not generated:
        return 0.0
    before = proof_distance(db, library, problems)
    after = proof_distance(db, library, problems, generated)
    return before - after - len(generated)


def precision(db: Database, generated: Sequence[GeneratedTheorem],
              human: Iterable[str]) -> float:
    """Percentage of generated theorems alpha-matching a human theorem.

    Matching means identical conclusion and hypothesis multiset up to a
    consistent renaming of variables.  An empty generated library yields 0.
    """
    gen = list(generated)
    if not gen:
        return 0.0
    human_keys = set()
    for label in human:
        frame = db.frame(label)
        human_keys.add(exprs.theorem_key(
            db, [e for _, e in frame.essentials], frame.conclusion))
    hits = 0
    for thm in gen:
        key = exprs.theorem_key(db, [e for _, e in thm.frame.essentials],
                                thm.frame.conclusion)
        if key in human_keys:
            hits += 1
    return 100.0 * hits / len(gen)


#: histogram buckets: numbers of problems a theorem helped solve
BUCKETS = ("1-2", "3", "4", "5", "6", "7", "8", ">=9")


def usage_histogram(generated: Sequence[GeneratedTheorem],
                    reductions: Sequence[ReductionResult]
                    ) -> dict[str, int]:
    """Distribution of how many problems each generated theorem was used in."""
    used_in: dict[str, int] = {}
    for result in reductions:
        for label in {lab for lab, _ in result.applied}:
            used_in[label] = used_in.get(label, 0) + 1
    hist = {b: 0 for b in BUCKETS}
    for thm in generated:
        n = used_in.get(thm.label, 0)
        if n == 0:
            continue
        if n <= 2:
            hist["1-2"] += 1
        elif n >= 9:
            hist[">=9"] += 1
        else:
            hist[str(n)] += 1
    return hist


def report(db: Database, dataset: str, split_name: str,
           library: Iterable[str], problems: Sequence[str],
           generated: Sequence[GeneratedTheorem],
           human: Iterable[str] = ()) -> dict:
    """Full metrics record for one generated library against one problem set."""
    lib = list(library)
    before = proof_distance(db, lib, problems)
    reductions = reduce_all(db, lib, problems, generated)
    after = sum(r.reduced_length for r in reductions) / len(reductions)
    human = list(human)
    return {
        "dataset": dataset,
        "split": split_name,
        "len_LG": len(generated),
        "D_before": round(before, 4),
        "D_after": round(after, 4),
        "APR": round(before - after - len(generated), 4),
        "precision_pct": round(precision(db, generated, human), 4)
        if human else None,
        "histogram": usage_histogram(generated, reductions),
    }
