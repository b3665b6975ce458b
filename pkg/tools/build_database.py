#!/usr/bin/env python3
"""Build the bundled propositional Metamath database (data/prop.mm).

The database starts from the classical implication/negation axiom system plus
biconditional axioms, develops a hand-written core of standard lemmas, and
then grows to 2,048 provable statements by seeded random forward deduction.
Reference depths are shaped so that the wb/wif/minimp prefix cutoffs all have
populated libraries and problem sets at their depth thresholds.

Run from the repository root:
    python3 tools/build_database.py [--out src/atgkit/data/prop.mm]
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from atgkit import exprs, kernel
from atgkit.forge import ap, hyp_node, make_frame, register, tokens
from atgkit.kernel import Database, ProofNode, emit_theorem, proof_rpn

HEADER = """$( Propositional calculus database for the theorem-generation benchmark.
   Generated by tools/build_database.py; do not edit by hand. $)

$c |- wff ( ) -> -. <-> $.
$v ph ps ch th ta et ze si $.

wph $f wff ph $.
wps $f wff ps $.
wch $f wff ch $.
wth $f wff th $.
wta $f wff ta $.
wet $f wff et $.
wze $f wff ze $.
wsi $f wff si $.

wn $a wff -. ph $.
wi $a wff ( ph -> ps ) $.
wb $a wff ( ph <-> ps ) $.

ax-1 $a |- ( ph -> ( ps -> ph ) ) $.
ax-2 $a |- ( ( ph -> ( ps -> ch ) ) -> ( ( ph -> ps ) -> ( ph -> ch ) ) ) $.
ax-3 $a |- ( ( -. ph -> -. ps ) -> ( ps -> ph ) ) $.
${
  min $e |- ph $.
  maj $e |- ( ph -> ps ) $.
  ax-mp $a |- ps $.
$}
bi1 $a |- ( ( ph <-> ps ) -> ( ph -> ps ) ) $.
bi2 $a |- ( ( ph <-> ps ) -> ( ps -> ph ) ) $.
bi3 $a |- ( ( ph -> ps ) -> ( ( ps -> ph ) -> ( ph <-> ps ) ) ) $.
"""

BASE_VARS = ["ph", "ps", "ch", "th", "ta", "et", "ze", "si"]


class Builder:
    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)
        self.db = kernel.parse_database(HEADER)
        self.blocks: list[str] = []
        self.depth: dict[str, int] = {lab: 0 for lab in self.db.assertions}
        # provable-step cost of each statement when expanded so that only
        # depth<=20 statements are citable; drives the wb-zone shaping below
        self.cost20: dict[str, int] = {lab: 1 for lab in self.db.assertions}
        self.keys: set[tuple] = set()
        # rules: theorems/axioms with essential hypotheses
        self.rules: list[kernel.Assertion] = []
        # facts: assertions without essential hypotheses
        self.facts: list[kernel.Assertion] = []
        for lab in ("ax-1", "ax-2", "ax-3", "bi1", "bi2", "bi3"):
            self.facts.append(self.db.frame(lab))
        self.rules.append(self.db.frame("ax-mp"))
        self.core_rules: list[str] = ["ax-mp"]

    # -- bookkeeping ----------------------------------------------------

    def provable_count(self) -> int:
        return sum(1 for kind, _ in self.db.statements if kind == "$p")

    def statement_count(self) -> int:
        return len(self.db.statements)

    def _admit(self, frame: kernel.Assertion, proof: ProofNode) -> None:
        block = emit_theorem(self.db, frame, proof)
        self.blocks.append(block)
        labels = proof_rpn(proof)
        register(self.db, frame, labels)
        refs = {lab for lab in labels if lab in self.db.assertions
                and lab != frame.label}
        self.depth[frame.label] = 1 + max(self.depth[r] for r in refs)
        cost = 0
        for lab in labels:
            if lab in self.db.assertions and self.db.is_provable_expr(
                    self.db.frame(lab).conclusion):
                cost += self.cost20[lab] if self.depth[lab] > 20 else 1
            elif (lab in self.db.hypotheses
                  and self.db.hypotheses[lab][0] == "$e"):
                cost += 1
        self.cost20[frame.label] = \
            1 if self.depth[frame.label] <= 20 else cost
        key = exprs.theorem_key(self.db, [e for _, e in frame.essentials],
                                frame.conclusion)
        self.keys.add(key)
        if frame.essentials:
            self.rules.append(frame)
        else:
            self.facts.append(frame)

    def add(self, label: str, conclusion: str,
            hypotheses: list[tuple[str, str]],
            prove) -> None:
        """Admit a hand-written theorem; `prove` maps hyp nodes to a proof."""
        frame = make_frame(self.db, label, conclusion, hypotheses)
        hyps = [hyp_node(lab, expr) for lab, expr in frame.essentials]
        proof = prove(*hyps)
        if proof.conclusion != frame.conclusion:
            raise SystemExit(f"{label}: proof gives {proof.conclusion}")
        self._admit(frame, proof)
        self.core_rules.append(label)

    # -- random forward deduction -----------------------------------------

    def _ground_tree(self, vars_pool: list[str], budget: int = 2) -> exprs.Tree:
        r = self.rng.random()
        if budget <= 0 or r < 0.62:
            return ("v", self.rng.choice(vars_pool))
        if r < 0.80:
            return ("wn", self._ground_tree(vars_pool, budget - 1))
        op = "wb" if r > 0.95 else "wi"
        return (op, self._ground_tree(vars_pool, budget - 1),
                self._ground_tree(vars_pool, budget - 1))

    def _fact_pick(self, target_depth: int | None) -> kernel.Assertion:
        if target_depth is None:
            pool = [f for f in self.facts if self.depth[f.label] <= 9]
            return self.rng.choice(pool or self.facts)
        best = [f for f in self.facts
                if target_depth - 2 <= self.depth[f.label] <= target_depth]
        if not best:
            best = sorted(self.facts, key=lambda f: -self.depth[f.label])[:4]
        return self.rng.choice(best)

    def _hyp_trees(self, frame: kernel.Assertion) -> list[exprs.Tree]:
        return [exprs.to_tree(self.db, "wff", e[1:])
                for _, e in frame.essentials]

    def _concl_tree(self, frame: kernel.Assertion) -> exprs.Tree:
        return exprs.to_tree(self.db, "wff", frame.conclusion[1:])

    def _try_fact(self, target_depth: int | None) -> bool:
        """One attempt at deriving a hypothesis-free theorem."""
        rule = self.rng.choice([self.db.frame(lab) for lab in self.core_rules
                                if self.db.frame(lab).essentials])
        rule_vars = {var: ("v", f"r.{var}") for _, _, var in rule.floats}
        env: dict[str, exprs.Tree] = {}
        children_spec = []
        slots = list(range(len(rule.essentials)))
        targets: dict[int, int] = {}
        if target_depth is not None:
            targets[self.rng.choice(slots)] = target_depth - 1
        for slot, hyp_tree in enumerate(self._hyp_trees(rule)):
            fact = self._fact_pick(targets.get(slot))
            fact_vars = {var: ("v", f"f{slot}.{var}") for _, _, var in fact.floats}
            pattern = exprs.subst_tree(hyp_tree, rule_vars)
            concl = exprs.subst_tree(self._concl_tree(fact), fact_vars)
            env2 = exprs.unify(pattern, concl, env)
            if env2 is None:
                return False
            env = env2
            children_spec.append(("fact", fact, fact_vars))
        return self._finish(rule, rule_vars, env, children_spec, ())

    def _try_hyp_theorem(self, target_depth: int | None) -> bool:
        """One attempt at a theorem with fresh essential hypotheses."""
        label = self._next_label()
        nhyp = 1 if self.rng.random() < 0.6 else 2
        vars_pool = self.rng.sample(BASE_VARS, self.rng.randint(2, 4))
        hyp_exprs = []
        for i in range(nhyp):
            t = ("wi", self._ground_tree(vars_pool, 1),
                 self._ground_tree(vars_pool, 1)) \
                if self.rng.random() < 0.7 else self._ground_tree(vars_pool, 2)
            hyp_exprs.append(("|-", *exprs.tree_tokens(self.db, t)))
        rule = self.rng.choice([self.db.frame(lab) for lab in self.core_rules
                                if self.db.frame(lab).essentials])
        if len(rule.essentials) < nhyp:
            return False
        rule_vars = {var: ("v", f"r.{var}") for _, _, var in rule.floats}
        env: dict[str, exprs.Tree] = {}
        hyp_trees = self._hyp_trees(rule)
        slots = list(range(len(rule.essentials)))
        self.rng.shuffle(slots)
        hyp_slots = slots[:nhyp]
        children_spec: list = [None] * len(rule.essentials)
        for i, slot in enumerate(hyp_slots):
            pattern = exprs.subst_tree(hyp_trees[slot], rule_vars)
            target = exprs.to_tree(self.db, "wff", hyp_exprs[i][1:])
            env2 = exprs.unify(pattern, target, env)
            if env2 is None:
                return False
            env = env2
            children_spec[slot] = ("hyp", f"{label}.{i + 1}", hyp_exprs[i])
        for slot in slots[nhyp:]:
            fact = self._fact_pick(target_depth - 1 if target_depth else None)
            fact_vars = {var: ("v", f"f{slot}.{var}") for _, _, var in fact.floats}
            pattern = exprs.subst_tree(hyp_trees[slot], rule_vars)
            concl = exprs.subst_tree(self._concl_tree(fact), fact_vars)
            env2 = exprs.unify(pattern, concl, env)
            if env2 is None:
                return False
            env = env2
            children_spec[slot] = ("fact", fact, fact_vars)
        essentials = tuple((f"{label}.{i + 1}", hyp_exprs[i])
                           for i in range(nhyp))
        return self._finish(rule, rule_vars, env, children_spec, essentials,
                            label=label)

    def _finish(self, rule, rule_vars, env, children_spec, essentials,
                label: str | None = None) -> bool:
        vars_pool = self.rng.sample(BASE_VARS, self.rng.randint(2, 4))
        ground: dict[str, exprs.Tree] = {}

        def resolve(tree: exprs.Tree) -> exprs.Tree:
            tree = exprs.subst_tree(tree, env)
            changed = True
            while changed:
                nxt = exprs.subst_tree(tree, env)
                changed = nxt != tree
                tree = nxt
            for v in exprs.tree_vars(tree):
                if "." in v and v not in ground:
                    ground[v] = self._ground_tree(vars_pool, 1)
            return exprs.subst_tree(tree, ground)

        concl_tree = resolve(exprs.subst_tree(self._concl_tree(rule), rule_vars))
        concl = ("|-", *exprs.tree_tokens(self.db, concl_tree))
        if len(concl) > 44:
            return False
        hyp_list = [e for _, e in essentials]
        key = exprs.theorem_key(self.db, hyp_list, concl)
        if key in self.keys:
            return False
        # wb-zone shaping: deep statements must expand to a bounded,
        # substantial number of steps over the depth<=20 library
        if self.statement_count() <= 272:
            new_depth = 1 + max([self.depth[rule.label]]
                                + [self.depth[s[1].label]
                                   for s in children_spec if s[0] == "fact"])
            if new_depth > 20:
                est = 1 + len(essentials)
                for spec in children_spec:
                    if spec[0] == "hyp":
                        continue
                    lab = spec[1].label
                    est += self.cost20[lab] if self.depth[lab] > 20 else 1
                if est > 140:
                    return False
        # assemble the proof tree
        operands: list[ProofNode] = []
        for spec in children_spec:
            if spec[0] == "hyp":
                operands.append(hyp_node(spec[1], spec[2]))
            else:
                _, fact, fact_vars = spec
                sigma = {var: exprs.tree_tokens(self.db, resolve(scratch))
                         for var, scratch in fact_vars.items()}
                operands.append(ap(self.db, fact.label, sigma))
        sigma_rule = {var: exprs.tree_tokens(self.db, resolve(scratch))
                      for var, scratch in rule_vars.items()}
        label = label or self._next_label()
        try:
            proof = ap(self.db, rule.label, sigma_rule, *operands)
        except kernel.MMError:
            return False
        if proof.conclusion != concl:
            return False
        frame = make_frame(self.db, label, concl, essentials)
        self._admit(frame, proof)
        return True

    _counter = 0

    def _next_label(self) -> str:
        Builder._counter += 1
        return f"lem{Builder._counter}"

    # -- depth chain --------------------------------------------------------
    #
    # Random forward deduction rarely stacks references deeply, so the deep
    # tail of the reference graph is grown deliberately: a syl chain over one
    # implication, alternately double-negating either side.  Every link adds
    # exactly one level of depth while keeping conclusions short.

    deep_label: str | None = None
    deep_a: exprs.Tree = ()
    deep_b: exprs.Tree = ()
    reseeds = 0

    def frontier(self) -> int:
        return self.depth.get(self.deep_label, 0) if self.deep_label else 0

    @staticmethod
    def _move_schedule():
        while True:
            for i in range(5):
                yield from ["Rwrap" if i % 2 == 0 else "Runwrap"] * 4
                if i < 4:
                    yield "Lwrap"
            yield "reseed"

    def _deep_tokens(self, tree: exprs.Tree) -> list[str]:
        return exprs.tree_tokens(self.db, tree)

    def _deepen(self, move: str) -> None:
        db = self.db
        if self.deep_label is None:
            a = ("wi", ("v", "ps"), ("v", "ch"))
            b = ("wi", ("v", "th"), a)
            node = ap(db, "ax-1", {"ph": self._deep_tokens(a), "ps": "th"})
            self._register_deep(node, a, b)
            return
        a, b = self.deep_a, self.deep_b
        prev = ap(db, self.deep_label,
                  {var: var for _, _, var in db.frame(self.deep_label).floats})
        at, bt = self._deep_tokens(a), self._deep_tokens(b)
        if move == "Rwrap":
            nb = ("wn", ("wn", b))
            inst = ap(db, "notnot", {"ph": bt})
            node = ap(db, "syl",
                      {"ph": at, "ps": bt, "ch": self._deep_tokens(nb)},
                      prev, inst)
            a2, b2 = a, nb
        elif move == "Runwrap":
            if b[0] != "wn" or b[1][0] != "wn":
                return
            nb = b[1][1]
            inst = ap(db, "notnotr", {"ph": self._deep_tokens(nb)})
            node = ap(db, "syl",
                      {"ph": at, "ps": bt, "ch": self._deep_tokens(nb)},
                      prev, inst)
            a2, b2 = a, nb
        elif move == "Lwrap":
            na = ("wn", ("wn", a))
            inst = ap(db, "notnotr", {"ph": at})
            node = ap(db, "syl",
                      {"ph": self._deep_tokens(na), "ps": at, "ch": bt},
                      inst, prev)
            a2, b2 = na, b
        else:  # reseed: consequent becomes ( q -> B )
            q = BASE_VARS[self.reseeds % len(BASE_VARS)]
            self.reseeds += 1
            nb = ("wi", ("v", q), b)
            inst = ap(db, "ax-1", {"ph": bt, "ps": q})
            node = ap(db, "syl",
                      {"ph": at, "ps": bt, "ch": self._deep_tokens(nb)},
                      prev, inst)
            a2, b2 = a, nb
        concl = node.conclusion
        key = exprs.theorem_key(db, [], concl)
        if key in self.keys:
            return
        self._register_deep(node, a2, b2)

    def _register_deep(self, node: ProofNode, a: exprs.Tree,
                       b: exprs.Tree) -> None:
        label = self._next_label()
        frame = make_frame(self.db, label, node.conclusion)
        self._admit(frame, node)
        self.deep_label, self.deep_a, self.deep_b = label, a, b

    # -- depth schedule ----------------------------------------------------

    def envelope(self) -> int:
        s = self.statement_count()
        if s <= 272:
            return 4 + round(28 * min(1.0, s / 190))
        if s <= 1284:
            return 32 + round(16 * min(1.0, (s - 272) / 850))
        return 48 + round(4 * min(1.0, (s - 1284) / 500))

    def grow(self, total_provable: int) -> None:
        attempts = 0
        moves = self._move_schedule()
        while self.provable_count() < total_provable:
            attempts += 1
            if attempts > total_provable * 400:
                raise SystemExit("generation stalled")
            if self.frontier() < self.envelope():
                self._deepen(next(moves))
                continue
            r = self.rng.random()
            env = self.envelope()
            wb_zone = self.statement_count() <= 272
            high = 0.30 if wb_zone else 0.22
            if r < high:
                span = 4 if wb_zone else 5
                target = self.rng.randint(max(2, env - span), env)
            elif r < 0.55:
                mid_cap = min(env - 2, 20) if wb_zone else env - 2
                target = self.rng.randint(2, max(3, mid_cap))
            elif r < 0.80:
                target = self.rng.randint(1, 6)
            else:
                target = None  # free choice among shallow facts
            if self.rng.random() < 0.35:
                self._try_hyp_theorem(target)
            else:
                self._try_fact(target)

    def serialize(self) -> str:
        return HEADER + "\n" + "\n".join(self.blocks)


# ---------------------------------------------------------------------------
# hand-written core


def build_core(b: Builder) -> None:
    db = b.db

    def A(label, subst, *hyps):
        return ap(db, label, subst, *hyps)

    b.add("mp2", "|- ch",
          [("mp2.1", "|- ph"), ("mp2.2", "|- ps"),
           ("mp2.3", "|- ( ph -> ( ps -> ch ) )")],
          lambda h1, h2, h3: A("ax-mp", {"ph": "ps", "ps": "ch"}, h2,
                               A("ax-mp", {"ph": "ph", "ps": "( ps -> ch )"},
                                 h1, h3)))
    b.add("mp2b", "|- ch",
          [("mp2b.1", "|- ph"), ("mp2b.2", "|- ( ph -> ps )"),
           ("mp2b.3", "|- ( ps -> ch )")],
          lambda h1, h2, h3: A("ax-mp", {"ph": "ps", "ps": "ch"},
                               A("ax-mp", {"ph": "ph", "ps": "ps"}, h1, h2),
                               h3))
    b.add("a1i", "|- ( ps -> ph )", [("a1i.1", "|- ph")],
          lambda h: A("ax-mp", {"ph": "ph", "ps": "( ps -> ph )"}, h,
                      A("ax-1", {"ph": "ph", "ps": "ps"})))
    b.add("2a1i", "|- ( ps -> ( ch -> ph ) )", [("2a1i.1", "|- ph")],
          lambda h: A("a1i", {"ph": "( ch -> ph )", "ps": "ps"},
                      A("a1i", {"ph": "ph", "ps": "ch"}, h)))
    b.add("mp1i", "|- ( ch -> ps )",
          [("mp1i.1", "|- ph"), ("mp1i.2", "|- ( ph -> ps )")],
          lambda h1, h2: A("a1i", {"ph": "ps", "ps": "ch"},
                           A("ax-mp", {"ph": "ph", "ps": "ps"}, h1, h2)))
    b.add("a2i", "|- ( ( ph -> ps ) -> ( ph -> ch ) )",
          [("a2i.1", "|- ( ph -> ( ps -> ch ) )")],
          lambda h: A("ax-mp",
                      {"ph": "( ph -> ( ps -> ch ) )",
                       "ps": "( ( ph -> ps ) -> ( ph -> ch ) )"},
                      h, A("ax-2", {"ph": "ph", "ps": "ps", "ch": "ch"})))
    b.add("imim2i", "|- ( ( ch -> ph ) -> ( ch -> ps ) )",
          [("imim2i.1", "|- ( ph -> ps )")],
          lambda h: A("a2i", {"ph": "ch", "ps": "ph", "ch": "ps"},
                      A("a1i", {"ph": "( ph -> ps )", "ps": "ch"}, h)))
    b.add("mpd", "|- ( ph -> ch )",
          [("mpd.1", "|- ( ph -> ps )"),
           ("mpd.2", "|- ( ph -> ( ps -> ch ) )")],
          lambda h1, h2: A("ax-mp",
                           {"ph": "( ph -> ps )", "ps": "( ph -> ch )"}, h1,
                           A("a2i", {"ph": "ph", "ps": "ps", "ch": "ch"}, h2)))
    b.add("syl", "|- ( ph -> ch )",
          [("syl.1", "|- ( ph -> ps )"), ("syl.2", "|- ( ps -> ch )")],
          lambda h1, h2: A("mpd", {"ph": "ph", "ps": "ps", "ch": "ch"}, h1,
                           A("a1i", {"ph": "( ps -> ch )", "ps": "ph"}, h2)))
    b.add("id", "|- ( ph -> ph )", [],
          lambda: A("mpd", {"ph": "ph", "ps": "( ph -> ph )", "ch": "ph"},
                    A("ax-1", {"ph": "ph", "ps": "ph"}),
                    A("ax-1", {"ph": "ph", "ps": "( ph -> ph )"})))
    b.add("idd", "|- ( ph -> ( ps -> ps ) )", [],
          lambda: A("a1i", {"ph": "( ps -> ps )", "ps": "ph"},
                    A("id", {"ph": "ps"})))
    b.add("a1d", "|- ( ph -> ( ch -> ps ) )",
          [("a1d.1", "|- ( ph -> ps )")],
          lambda h: A("syl", {"ph": "ph", "ps": "ps", "ch": "( ch -> ps )"},
                      h, A("ax-1", {"ph": "ps", "ps": "ch"})))
    b.add("com12", "|- ( ps -> ( ph -> ch ) )",
          [("com12.1", "|- ( ph -> ( ps -> ch ) )")],
          lambda h: A("syl",
                      {"ph": "ps", "ps": "( ph -> ps )", "ch": "( ph -> ch )"},
                      A("ax-1", {"ph": "ps", "ps": "ph"}),
                      A("a2i", {"ph": "ph", "ps": "ps", "ch": "ch"}, h)))
    b.add("mpi", "|- ( ph -> ch )",
          [("mpi.1", "|- ps"), ("mpi.2", "|- ( ph -> ( ps -> ch ) )")],
          lambda h1, h2: A("mpd", {"ph": "ph", "ps": "ps", "ch": "ch"},
                           A("a1i", {"ph": "ps", "ps": "ph"}, h1), h2))
    b.add("pm2.21", "|- ( -. ph -> ( ph -> ps ) )", [],
          lambda: A("syl",
                    {"ph": "-. ph", "ps": "( -. ps -> -. ph )",
                     "ch": "( ph -> ps )"},
                    A("ax-1", {"ph": "-. ph", "ps": "-. ps"}),
                    A("ax-3", {"ph": "ps", "ps": "ph"})))
    b.add("pm2.24", "|- ( ph -> ( -. ph -> ps ) )", [],
          lambda: A("com12", {"ph": "-. ph", "ps": "ph", "ch": "ps"},
                    A("pm2.21", {"ph": "ph", "ps": "ps"})))
    b.add("pm2.21i", "|- ( ph -> ps )", [("pm2.21i.1", "|- -. ph")],
          lambda h: A("ax-mp",
                      {"ph": "( -. ps -> -. ph )", "ps": "( ph -> ps )"},
                      A("a1i", {"ph": "-. ph", "ps": "-. ps"}, h),
                      A("ax-3", {"ph": "ps", "ps": "ph"})))
    b.add("pm2.21d", "|- ( ph -> ( ps -> ch ) )",
          [("pm2.21d.1", "|- ( ph -> -. ps )")],
          lambda h: A("syl",
                      {"ph": "ph", "ps": "-. ps", "ch": "( ps -> ch )"},
                      h, A("pm2.21", {"ph": "ps", "ps": "ch"})))
    b.add("pm2.43i", "|- ( ph -> ps )",
          [("pm2.43i.1", "|- ( ph -> ( ph -> ps ) )")],
          lambda h: A("mpd", {"ph": "ph", "ps": "ph", "ch": "ps"},
                      A("id", {"ph": "ph"}), h))
    b.add("pm2.18", "|- ( ( -. ph -> ph ) -> ph )", [],
          lambda: A("pm2.43i", {"ph": "( -. ph -> ph )", "ps": "ph"},
                    A("syl",
                      {"ph": "( -. ph -> ph )",
                       "ps": "( -. ph -> -. ( -. ph -> ph ) )",
                       "ch": "( ( -. ph -> ph ) -> ph )"},
                      A("a2i",
                        {"ph": "-. ph", "ps": "ph",
                         "ch": "-. ( -. ph -> ph )"},
                        A("pm2.21", {"ph": "ph", "ps": "-. ( -. ph -> ph )"})),
                      A("ax-3", {"ph": "ph", "ps": "( -. ph -> ph )"}))))
    b.add("notnotr", "|- ( -. -. ph -> ph )", [],
          lambda: A("syl",
                    {"ph": "-. -. ph", "ps": "( -. ph -> ph )", "ch": "ph"},
                    A("pm2.21", {"ph": "-. ph", "ps": "ph"}),
                    A("pm2.18", {"ph": "ph"})))
    b.add("con2i", "|- ( ps -> -. ph )", [("con2i.1", "|- ( ph -> -. ps )")],
          lambda h: A("ax-mp",
                      {"ph": "( -. -. ph -> -. ps )", "ps": "( ps -> -. ph )"},
                      A("syl",
                        {"ph": "-. -. ph", "ps": "ph", "ch": "-. ps"},
                        A("notnotr", {"ph": "ph"}), h),
                      A("ax-3", {"ph": "-. ph", "ps": "ps"})))
    b.add("notnot", "|- ( ph -> -. -. ph )", [],
          lambda: A("con2i", {"ph": "-. ph", "ps": "ph"},
                    A("id", {"ph": "-. ph"})))
    b.add("pm2.65i", "|- -. ph",
          [("pm2.65i.1", "|- ( ph -> ps )"), ("pm2.65i.2", "|- ( ph -> -. ps )")],
          lambda h1, h2: A("ax-mp",
                           {"ph": "( -. -. ph -> -. ph )", "ps": "-. ph"},
                           A("syl",
                             {"ph": "-. -. ph", "ps": "ph", "ch": "-. ph"},
                             A("notnotr", {"ph": "ph"}),
                             A("syl", {"ph": "ph", "ps": "ps", "ch": "-. ph"},
                               h1,
                               A("con2i", {"ph": "ph", "ps": "ps"}, h2))),
                           A("pm2.18", {"ph": "-. ph"})))
    b.add("pm2.21dd", "|- ( ph -> ch )",
          [("pm2.21dd.1", "|- ( ph -> ps )"),
           ("pm2.21dd.2", "|- ( ph -> -. ps )")],
          lambda h1, h2: A("pm2.21i", {"ph": "ph", "ps": "ch"},
                           A("pm2.65i", {"ph": "ph", "ps": "ps"}, h1, h2)))
    b.add("biimpi", "|- ( ph -> ps )", [("biimpi.1", "|- ( ph <-> ps )")],
          lambda h: A("ax-mp",
                      {"ph": "( ph <-> ps )", "ps": "( ph -> ps )"}, h,
                      A("bi1", {"ph": "ph", "ps": "ps"})))
    b.add("biimpri", "|- ( ps -> ph )", [("biimpri.1", "|- ( ph <-> ps )")],
          lambda h: A("ax-mp",
                      {"ph": "( ph <-> ps )", "ps": "( ps -> ph )"}, h,
                      A("bi2", {"ph": "ph", "ps": "ps"})))
    b.add("impbii", "|- ( ph <-> ps )",
          [("impbii.1", "|- ( ph -> ps )"), ("impbii.2", "|- ( ps -> ph )")],
          lambda h1, h2: A("ax-mp",
                           {"ph": "( ps -> ph )", "ps": "( ph <-> ps )"}, h2,
                           A("ax-mp",
                             {"ph": "( ph -> ps )",
                              "ps": "( ( ps -> ph ) -> ( ph <-> ps ) )"},
                             h1, A("bi3", {"ph": "ph", "ps": "ps"}))))
    b.add("biid", "|- ( ph <-> ph )", [],
          lambda: A("impbii", {"ph": "ph", "ps": "ph"},
                    A("id", {"ph": "ph"}), A("id", {"ph": "ph"})))
    b.add("bicomi", "|- ( ps <-> ph )", [("bicomi.1", "|- ( ph <-> ps )")],
          lambda h: A("impbii", {"ph": "ps", "ps": "ph"},
                      A("biimpri", {"ph": "ph", "ps": "ps"}, h),
                      A("biimpi", {"ph": "ph", "ps": "ps"}, h)))
    b.add("bitri", "|- ( ph <-> ch )",
          [("bitri.1", "|- ( ph <-> ps )"), ("bitri.2", "|- ( ps <-> ch )")],
          lambda h1, h2: A("impbii", {"ph": "ph", "ps": "ch"},
                           A("syl", {"ph": "ph", "ps": "ps", "ch": "ch"},
                             A("biimpi", {"ph": "ph", "ps": "ps"}, h1),
                             A("biimpi", {"ph": "ps", "ps": "ch"}, h2)),
                           A("syl", {"ph": "ch", "ps": "ps", "ch": "ph"},
                             A("biimpri", {"ph": "ps", "ps": "ch"}, h2),
                             A("biimpri", {"ph": "ph", "ps": "ps"}, h1))))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="src/atgkit/data/prop.mm")
    parser.add_argument("--seed", type=int, default=20240601)
    parser.add_argument("--theorems", type=int, default=2048)
    args = parser.parse_args()

    t0 = time.time()
    builder = Builder(args.seed)
    build_core(builder)
    print(f"core: {builder.provable_count()} theorems, "
          f"depth(a1i)={builder.depth['a1i']}, depth(syl)={builder.depth['syl']}")
    builder.grow(args.theorems)
    text = builder.serialize()
    Path(args.out).write_text(text)
    print(f"wrote {args.out}: {builder.provable_count()} provable statements, "
          f"{builder.statement_count()} statements, {time.time() - t0:.1f}s")

    # full re-verification from the serialized text
    db = kernel.parse_database(text)
    bad = [r for r in kernel.verification_report(db) if not r["ok"]]
    if bad:
        raise SystemExit(f"verification failures: {bad[:3]}")
    depths = {}
    for kind, lab in db.statements:
        if kind in ("$a", "$p"):
            refs = {x for x in kernel.decompress_proof(db, lab)
                    if x in db.assertions} if kind == "$p" else set()
            depths[lab] = 1 + max((depths[r] for r in refs), default=-1) \
                if kind == "$p" else 0
    import collections
    hist = collections.Counter()
    for kind, lab in db.statements:
        if kind == "$p":
            hist[depths[lab] // 5] += 1
    print("verified all proofs; depth histogram (x5):",
          dict(sorted(hist.items())))


if __name__ == "__main__":
    main()
