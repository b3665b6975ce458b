"""Expression helpers on top of the kernel grammar: tree forms, first-order
unification, and alpha-canonical keys for theorem deduplication."""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

from .kernel import Database, Expr, MMError

Tree = tuple  # ("v", var) | (production_label, child trees...)


def to_tree(db: Database, typecode: str, body: Sequence[str]) -> Tree:
    tree, end = _to_tree(db, typecode, tuple(body), 0)
    if tree is None or end != len(body):
        raise MMError(f"cannot parse {' '.join(body)!r} as {typecode}")
    return tree


def _to_tree(db: Database, typecode: str, body: tuple[str, ...],
             start: int) -> tuple[Optional[Tree], int]:
    if start >= len(body):
        return None, start
    fl = db.float_of_var.get(body[start])
    if fl is not None and fl[1] == typecode:
        return ("v", body[start]), start + 1
    for prod in db.syntax_productions(typecode):
        children: list[Tree] = []
        pos = start
        ok = True
        for sym in prod.conclusion[1:]:
            sub = db.float_of_var.get(sym)
            if sub is None:
                if pos < len(body) and body[pos] == sym:
                    pos += 1
                else:
                    ok = False
                    break
            else:
                child, pos2 = _to_tree(db, sub[1], body, pos)
                if child is None:
                    ok = False
                    break
                children.append(child)
                pos = pos2
        if ok:
            return (prod.label, *children), pos
    return None, start


def tree_tokens(db: Database, tree: Tree) -> list[str]:
    if tree[0] == "v":
        return [tree[1]]
    prod = db.frame(tree[0])
    out: list[str] = []
    child = iter(tree[1:])
    for sym in prod.conclusion[1:]:
        if db.float_of_var.get(sym) is None:
            out.append(sym)
        else:
            out.extend(tree_tokens(db, next(child)))
    return out


def tree_vars(tree: Tree) -> list[str]:
    """Variables in first-occurrence order."""
    if tree[0] == "v":
        return [tree[1]]
    seen: list[str] = []
    for child in tree[1:]:
        for v in tree_vars(child):
            if v not in seen:
                seen.append(v)
    return seen


def rename_tree(tree: Tree, mapping: dict[str, str]) -> Tree:
    if tree[0] == "v":
        return ("v", mapping.get(tree[1], tree[1]))
    return (tree[0], *(rename_tree(c, mapping) for c in tree[1:]))


def subst_tree(tree: Tree, env: dict[str, Tree]) -> Tree:
    if tree[0] == "v":
        return env.get(tree[1], tree)
    return (tree[0], *(subst_tree(c, env) for c in tree[1:]))


def unify(a: Tree, b: Tree, env: Optional[dict[str, Tree]] = None
          ) -> Optional[dict[str, Tree]]:
    """Most general unifier of two trees, variables shared between both."""
    env = dict(env) if env else {}

    def walk(t: Tree) -> Tree:
        while t[0] == "v" and t[1] in env:
            t = env[t[1]]
        return t

    def occurs(var: str, t: Tree) -> bool:
        t = walk(t)
        if t[0] == "v":
            return t[1] == var
        return any(occurs(var, c) for c in t[1:])

    def go(x: Tree, y: Tree) -> bool:
        x, y = walk(x), walk(y)
        if x == y:
            return True
        if x[0] == "v":
            if occurs(x[1], y):
                return False
            env[x[1]] = y
            return True
        if y[0] == "v":
            return go(y, x)
        if x[0] != y[0] or len(x) != len(y):
            return False
        return all(go(cx, cy) for cx, cy in zip(x[1:], y[1:]))

    if not go(a, b):
        return None
    # fully resolve bindings
    def resolve(t: Tree) -> Tree:
        t = walk(t)
        if t[0] == "v":
            return t
        return (t[0], *(resolve(c) for c in t[1:]))

    return {v: resolve(t) for v, t in env.items()}


# ---------------------------------------------------------------------------
# alpha-equivalence


def _serialize(db: Database, expr: Expr, mapping: dict[str, int]) -> tuple:
    out: list = [(0, expr[0])]
    for tok in expr[1:]:
        if tok in db.float_of_var:
            if tok not in mapping:
                mapping[tok] = len(mapping)
            out.append((1, mapping[tok]))
        else:
            out.append((0, tok))
    return tuple(out)


def theorem_key(db: Database, hypotheses: Sequence[Expr], conclusion: Expr,
                max_perm: int = 720) -> tuple:
    """Canonical key invariant under consistent variable renaming and
    hypothesis reordering.  Theorems are alpha-equivalent iff keys match."""
    hyps = list(hypotheses)
    best = None
    perms = itertools.permutations(range(len(hyps)))
    for count, order in enumerate(perms):
        if count >= max_perm:
            break
        mapping: dict[str, int] = {}
        key = (_serialize(db, conclusion, mapping),
               tuple(_serialize(db, hyps[i], mapping) for i in order))
        if best is None or key < best:
            best = key
    if best is None:  # no hypotheses
        mapping = {}
        best = (_serialize(db, conclusion, mapping), ())
    return best
