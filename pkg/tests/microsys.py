"""Ground micro axiom systems with brute-force proof oracles.

A micro system is a variable-free Metamath database: axioms either assert a
fact (``|- x``) outright or derive one from essential premises.  Because
there is no substitution, shortest proofs and optimal rewrites can be found
exhaustively, giving independent oracles for proof_distance and
reduce_proof.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Optional, Sequence

from atgkit import forge, kernel
from atgkit.kernel import Database, ProofNode
from atgkit.metrics import GeneratedTheorem

SYMBOLS = list("abcdefgh")

#: a rule: (premise symbols, conclusion symbol); base facts have no premises
Rule = tuple[tuple[str, ...], str]


def render_source(symbols: Sequence[str], rules: Sequence[Rule]) -> str:
    lines = [f"$c |- {' '.join(symbols)} $."]
    for i, (premises, concl) in enumerate(rules):
        if not premises:
            lines.append(f"ax{i} $a |- {concl} $.")
        else:
            hyps = " ".join(f"ax{i}.{j} $e |- {p} $."
                            for j, p in enumerate(premises))
            lines.append(f"${{ {hyps} ax{i} $a |- {concl} $. $}}")
    return "\n".join(lines) + "\n"


def min_costs(rules: Sequence[Rule]) -> dict[str, tuple[int, int]]:
    """symbol -> (min proof steps, index of the rule achieving it)."""
    costs: dict[str, tuple[int, int]] = {}
    changed = True
    while changed:
        changed = False
        for i, (premises, concl) in enumerate(rules):
            if any(p not in costs for p in premises):
                continue
            cand = 1 + sum(costs[p][0] for p in premises)
            if concl not in costs or cand < costs[concl][0]:
                costs[concl] = (cand, i)
                changed = True
    return costs


def shortest_rpn(rules: Sequence[Rule], costs: dict[str, tuple[int, int]],
                 target: str) -> list[str]:
    _, i = costs[target]
    out: list[str] = []
    for p in rules[i][0]:
        out.extend(shortest_rpn(rules, costs, p))
    out.append(f"ax{i}")
    return out


def build_system(symbols: Sequence[str], rules: Sequence[Rule],
                 problems: Sequence[str]) -> Database:
    """Parse a micro system whose problems carry shortest stored proofs."""
    costs = min_costs(rules)
    source = render_source(symbols, rules)
    for sym in problems:
        rpn = " ".join(shortest_rpn(rules, costs, sym))
        source += f"p_{sym} $p |- {sym} $= {rpn} $.\n"
    return kernel.parse_database(source)


def build_and_problems(rules: Sequence[Rule], symbols: str,
                       problems: Sequence[str]
                       ) -> tuple[Database, list[str], Sequence[Rule]]:
    db = build_system(list(symbols), rules, problems)
    return db, [f"p_{s}" for s in problems], rules


def random_system(seed: int) -> Optional[tuple[Database, list[str], list[Rule]]]:
    """Seeded system with <= 4 axioms, or None when no problem is derivable."""
    rng = random.Random(seed)
    symbols = SYMBOLS[:rng.randint(4, 6)]
    n_base = rng.randint(1, 2)
    rules: list[Rule] = [((), s) for s in rng.sample(symbols, n_base)]
    for _ in range(4 - n_base):
        premises = tuple(rng.sample(symbols, rng.randint(1, 2)))
        concl = rng.choice([s for s in symbols if s not in premises])
        rules.append((premises, concl))
    costs = min_costs(rules)
    problems = sorted(s for s, (c, _) in costs.items() if 2 <= c <= 8)[:3]
    if not problems:
        return None
    return build_system(symbols, rules, problems), problems, rules


# ---------------------------------------------------------------------------
# oracle 1: exhaustive BFS over proof stacks


def bfs_shortest(db: Database, target: str, max_steps: int = 8,
                 max_stack: int = 5) -> Optional[int]:
    """Length of the shortest label sequence proving ``|- target``."""
    goal = (("|-", target),)
    frames = [db.frame(lab) for lab in db.axiom_labels()]
    start: tuple = ()
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        stack, depth = queue.popleft()
        if depth == max_steps:
            continue
        for frame in frames:
            k = len(frame.essentials)
            if k > len(stack):
                continue
            if any(stack[len(stack) - k + j] != tuple(expr)
                   for j, (_, expr) in enumerate(frame.essentials)):
                continue
            nxt = stack[:len(stack) - k] + (tuple(frame.conclusion),)
            if nxt == goal:
                return depth + 1
            if len(nxt) <= max_stack and nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, depth + 1))
    return None


# ---------------------------------------------------------------------------
# oracle 2: exhaustive rewrite-sequence enumeration


def make_lemma(db: Database, label: str, conclusion: str,
               premises: Sequence[str]) -> GeneratedTheorem:
    frame = forge.make_frame(
        db, label, ("|-", conclusion),
        [(f"{label}.{j}", ("|-", p)) for j, p in enumerate(premises)])
    return GeneratedTheorem(frame=frame)


def _serialize(node: ProofNode) -> tuple:
    return (node.label, tuple(_serialize(c) for c in node.children))


def _subtrees(node: ProofNode) -> list[ProofNode]:
    out = []
    for child in node.children:
        out.extend(sub for sub in child.walk())
    return out


def _count(node: ProofNode) -> int:
    return sum(1 for _ in node.walk())


def _replace(tree: ProofNode, target: ProofNode,
             replacement: ProofNode) -> ProofNode:
    if tree is target:
        return replacement
    children = tuple(_replace(c, target, replacement) for c in tree.children)
    if all(a is b for a, b in zip(children, tree.children)):
        return tree
    return ProofNode(tree.label, tree.conclusion, children,
                     is_hyp=tree.is_hyp)


def _assignments(options: Sequence[Sequence[ProofNode]]):
    if not options:
        yield ()
        return
    for head in options[0]:
        for rest in _assignments(options[1:]):
            yield (head,) + rest


def rewrite_optimum(tree: ProofNode,
                    lemmas: Sequence[GeneratedTheorem],
                    _memo: Optional[dict] = None) -> int:
    """Minimum step count over every sequence of step-saving rewrites."""
    memo = _memo if _memo is not None else {}
    key = _serialize(tree)
    if key in memo:
        return memo[key]
    best = _count(tree)
    memo[key] = best  # guard against revisiting while exploring
    for node in tree.walk():
        subs = _subtrees(node)
        for thm in lemmas:
            if tuple(thm.frame.conclusion) != tuple(node.conclusion):
                continue
            options = [[s for s in subs if tuple(s.conclusion) == tuple(e)]
                       for _, e in thm.frame.essentials]
            if any(not opt for opt in options):
                continue
            for kids in _assignments(options):
                saving = (_count(node) - 1 - sum(_count(k) for k in kids))
                if saving <= 0:
                    continue
                rewritten = _replace(tree, node,
                                     ProofNode(thm.label, node.conclusion,
                                               kids))
                best = min(best, rewrite_optimum(rewritten, lemmas, memo))
    memo[key] = best
    return best
