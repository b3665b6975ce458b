"""Metamath kernel: parsing, proof decompression, stack-machine verification,
assertion matching, and theorem emission.

Supports the language subset used by propositional databases: $c, $v, $f, $e,
$d, $a, $p, ${ $} scoping and comments.  File inclusion ($[) is rejected.
Proofs may be stored in normal (label list) or compressed (letter stream)
format; verification always goes through the decompressed label sequence so a
single stack machine serves both.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

Expr = tuple[str, ...]  # typecode followed by the symbol body
Subst = dict[str, tuple[str, ...]]  # variable -> body (no typecode)


class MMError(Exception):
    """Any violation of Metamath syntax or proof rules."""


# ---------------------------------------------------------------------------
# tokenization


class _Toks:
    """Whitespace token stream with comment skipping and position tracking."""

    def __init__(self, source: str) -> None:
        self._lines = source.splitlines()
        self._row = 0
        self._buf: list[str] = []

    def _fill(self) -> bool:
        while not self._buf:
            if self._row >= len(self._lines):
                return False
            self._buf = self._lines[self._row].split()
            self._buf.reverse()
            self._row += 1
        return True

    def read(self) -> Optional[str]:
        if not self._fill():
            return None
        return self._buf.pop()

    def readc(self) -> Optional[str]:
        """Next token with comments skipped and inclusions rejected."""
        tok = self.read()
        while tok == "$(":
            tok = self.read()
            while tok is not None and tok != "$)":
                if "$(" in tok or "$)" in tok:
                    raise MMError(
                        f"line {self._row}: nested or malformed comment token {tok!r}")
                tok = self.read()
            if tok is None:
                raise MMError("unclosed comment at end of file")
            tok = self.read()
        if tok == "$[":
            raise MMError(f"line {self._row}: file inclusion ($[) is not supported")
        return tok

    @property
    def position(self) -> str:
        return f"line {self._row}"


# ---------------------------------------------------------------------------
# database structures


@dataclass
class Assertion:
    """A framed $a or $p statement."""

    label: str
    kind: str  # "$a" or "$p"
    floats: tuple[tuple[str, str, str], ...]  # (label, typecode, var), mandatory
    essentials: tuple[tuple[str, Expr], ...]  # (label, statement)
    conclusion: Expr
    dvs: frozenset[tuple[str, str]]  # mandatory disjoint pairs
    context_dvs: frozenset[tuple[str, str]]  # all active pairs at declaration
    index: int = 0
    proof: Optional[list[str]] = None  # raw proof tokens of a $p statement

    @property
    def mand_count(self) -> int:
        return len(self.floats) + len(self.essentials)

    def float_order(self) -> tuple[str, ...]:
        return tuple(var for _, _, var in self.floats)


@dataclass
class ProofNode:
    """Node of a verified proof tree; leaves are hypothesis references."""

    label: str
    conclusion: Expr
    children: tuple["ProofNode", ...] = ()
    is_hyp: bool = False

    def walk(self) -> Iterable["ProofNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


class _Scope:
    def __init__(self) -> None:
        self.variables: set[str] = set()
        self.floats: list[tuple[str, str, str]] = []  # (label, tc, var)
        self.essentials: list[tuple[str, Expr]] = []
        self.dvs: set[tuple[str, str]] = set()


class Database:
    """Parsed Metamath database, immutable after :func:`parse_database`."""

    def __init__(self) -> None:
        self.constants: set[str] = set()
        self.assertions: dict[str, Assertion] = {}
        self.hypotheses: dict[str, tuple[str, Expr]] = {}  # label -> ($f|$e, stmt)
        self.statements: list[tuple[str, str]] = []  # ($a|$e|$p, label) in order
        self.float_of_var: dict[str, tuple[str, str]] = {}  # var -> (label, tc)
        self.float_typecodes: set[str] = set()
        self._syntax: dict[str, list[Assertion]] = {}  # typecode -> productions

    # -- lookups ------------------------------------------------------------

    def frame(self, label: str) -> Assertion:
        try:
            return self.assertions[label]
        except KeyError:
            raise MMError(f"unknown assertion label {label!r}") from None

    def is_assertion(self, label: str) -> bool:
        return label in self.assertions

    def is_hypothesis(self, label: str) -> bool:
        return label in self.hypotheses

    def provable_labels(self) -> list[str]:
        return [lab for kind, lab in self.statements
                if kind == "$p"]

    def axiom_labels(self) -> list[str]:
        return [lab for kind, lab in self.statements if kind == "$a"]

    def is_provable_expr(self, expr: Expr) -> bool:
        return bool(expr) and expr[0] not in self.float_typecodes

    def syntax_productions(self, typecode: str) -> list[Assertion]:
        return self._syntax.get(typecode, [])

    def count_steps(self, root: ProofNode) -> int:
        """Provable-step count: nodes concluding outside the syntax typecodes."""
        return sum(1 for node in root.walk() if self.is_provable_expr(node.conclusion))


# ---------------------------------------------------------------------------
# parsing


def parse_database(source: str | io.TextIOBase) -> Database:
    """Parse a Metamath database from text, preserving declaration order."""
    if not isinstance(source, str):
        source = source.read()
    toks = _Toks(source)
    db = Database()
    scopes = [_Scope()]

    def active_vars() -> set[str]:
        return set().union(*(s.variables for s in scopes))

    def lookup_float(var: str) -> Optional[tuple[str, str, str]]:
        for scope in reversed(scopes):
            for fl in scope.floats:
                if fl[2] == var:
                    return fl
        return None

    def read_stmt(kind: str, end: str) -> list[str]:
        stmt = []
        tok = toks.readc()
        while tok is not None and tok != end:
            if tok.startswith("$"):
                raise MMError(f"{toks.position}: unexpected {tok!r} inside {kind}")
            if kind in ("$d", "$e", "$a", "$p") and tok not in db.constants \
                    and tok not in active_vars():
                raise MMError(f"{toks.position}: undeclared symbol {tok!r}")
            if kind in ("$e", "$a", "$p") and tok in active_vars() \
                    and lookup_float(tok) is None:
                raise MMError(
                    f"{toks.position}: variable {tok!r} has no active $f")
            stmt.append(tok)
            tok = toks.readc()
        if tok is None:
            raise MMError(f"unclosed {kind} statement at end of file")
        return stmt

    def check_label(label: str) -> None:
        if label in db.assertions or label in db.hypotheses:
            raise MMError(f"{toks.position}: duplicate label {label!r}")
        if not all(c.isalnum() or c in "-_." for c in label):
            raise MMError(f"{toks.position}: bad label {label!r}")

    def make_frame(label: str, kind: str, stmt: list[str],
                   proof: Optional[list[str]]) -> Assertion:
        essentials = [e for s in scopes for e in s.essentials]
        mand_vars = {t for _, expr in essentials for t in expr if t in active_vars()}
        mand_vars |= {t for t in stmt if t in active_vars()}
        floats = []
        seen = set(mand_vars)
        for scope in scopes:
            for fl in scope.floats:
                if fl[2] in seen:
                    floats.append(fl)
                    seen.remove(fl[2])
        all_dvs = frozenset().union(*(frozenset(s.dvs) for s in scopes))
        dvs = frozenset((x, y) for x, y in all_dvs
                        if x in mand_vars and y in mand_vars)
        return Assertion(
            label=label, kind=kind, floats=tuple(floats),
            essentials=tuple(essentials), conclusion=tuple(stmt),
            dvs=dvs, context_dvs=all_dvs, index=len(db.statements), proof=proof)

    label: Optional[str] = None
    depth = 0
    tok = toks.readc()
    while tok is not None:
        if tok == "$c":
            if depth:
                raise MMError(f"{toks.position}: $c only allowed at top level")
            for sym in read_stmt("$c", "$."):
                if sym in db.constants or sym in active_vars():
                    raise MMError(f"{toks.position}: symbol {sym!r} redeclared")
                db.constants.add(sym)
        elif tok == "$v":
            for sym in read_stmt("$v", "$."):
                if sym in db.constants or sym in active_vars():
                    raise MMError(f"{toks.position}: symbol {sym!r} redeclared")
                scopes[-1].variables.add(sym)
        elif tok == "$f":
            if label is None:
                raise MMError(f"{toks.position}: $f requires a label")
            check_label(label)
            stmt = read_stmt("$f", "$.")
            if len(stmt) != 2:
                raise MMError(f"{toks.position}: $f must be 'typecode var'")
            tc, var = stmt
            if tc not in db.constants:
                raise MMError(f"{toks.position}: undeclared typecode {tc!r}")
            if var not in active_vars():
                raise MMError(f"{toks.position}: undeclared variable {var!r}")
            if lookup_float(var) is not None:
                raise MMError(f"{toks.position}: variable {var!r} already floated")
            scopes[-1].floats.append((label, tc, var))
            db.hypotheses[label] = ("$f", (tc, var))
            db.float_of_var[var] = (label, tc)
            db.float_typecodes.add(tc)
            label = None
        elif tok == "$e":
            if label is None:
                raise MMError(f"{toks.position}: $e requires a label")
            check_label(label)
            stmt = tuple(read_stmt("$e", "$."))
            scopes[-1].essentials.append((label, stmt))
            db.hypotheses[label] = ("$e", stmt)
            db.statements.append(("$e", label))
            label = None
        elif tok == "$d":
            varlist = read_stmt("$d", "$.")
            if len(varlist) != len(set(varlist)):
                raise MMError(f"{toks.position}: repeated variable in $d")
            for x, y in itertools.combinations(sorted(varlist), 2):
                scopes[-1].dvs.add((x, y))
        elif tok == "$a":
            if label is None:
                raise MMError(f"{toks.position}: $a requires a label")
            check_label(label)
            stmt = read_stmt("$a", "$.")
            frame = make_frame(label, "$a", stmt, None)
            db.assertions[label] = frame
            db.statements.append(("$a", label))
            if stmt[0] in db.float_typecodes:
                db._syntax.setdefault(stmt[0], []).append(frame)
            label = None
        elif tok == "$p":
            if label is None:
                raise MMError(f"{toks.position}: $p requires a label")
            check_label(label)
            stmt = read_stmt("$p", "$=")
            proof = read_stmt("$=", "$.")
            if not proof:
                raise MMError(f"{toks.position}: empty proof for {label!r}")
            db.assertions[label] = make_frame(label, "$p", stmt, proof)
            db.statements.append(("$p", label))
            label = None
        elif tok == "${":
            scopes.append(_Scope())
            depth += 1
        elif tok == "$}":
            if depth == 0:
                raise MMError(f"{toks.position}: unmatched $}}")
            scopes.pop()
            depth -= 1
        elif tok.startswith("$"):
            raise MMError(f"{toks.position}: unknown directive {tok!r}")
        else:
            if label is not None:
                raise MMError(f"{toks.position}: two labels in a row ({tok!r})")
            label = tok
        tok = toks.readc()
    if depth:
        raise MMError("unclosed ${ block at end of file")
    return db


# ---------------------------------------------------------------------------
# compressed proofs


def _decode_letters(stream: str) -> list[int]:
    """Decode A-T/U-Y letters to integers; Z tags become -1."""
    out: list[int] = []
    acc = 0
    for ch in stream:
        if ch == "Z":
            if acc:
                raise MMError("Z tag inside a multi-letter number")
            out.append(-1)
        elif "A" <= ch <= "T":
            out.append(20 * acc + ord(ch) - 65)
            acc = 0
        elif "U" <= ch <= "Y":
            acc = 5 * acc + ord(ch) - 84
        else:
            raise MMError(f"bad character {ch!r} in compressed proof")
    if acc:
        raise MMError("dangling continuation letters at end of compressed proof")
    return out


def _encode_int(n: int) -> str:
    """Inverse of :func:`_decode_letters` for a single 0-based index."""
    head = ""
    m = n // 20
    while m > 0:
        r = m % 5
        if r == 0:
            r = 5
        head = chr(84 + r) + head
        m = (m - r) // 5
    return head + chr(65 + n % 20)


def mandatory_labels(frame: Assertion) -> list[str]:
    return [lab for lab, _, _ in frame.floats] + [lab for lab, _ in frame.essentials]


def decompress_proof(db: Database, label: str) -> list[str]:
    """Expand the stored proof of a $p statement to a plain label sequence."""
    frame = db.frame(label)
    if frame.proof is None:
        raise MMError(f"{label!r} has no proof")
    proof = frame.proof
    if proof[0] != "(":
        return list(proof)
    try:
        close = proof.index(")")
    except ValueError:
        raise MMError(f"{label!r}: unterminated reference list") from None
    refs = mandatory_labels(frame) + proof[1:close]
    for ref in proof[1:close]:
        if not (db.is_assertion(ref) or db.is_hypothesis(ref)):
            raise MMError(f"{label!r}: unknown referenced label {ref!r}")
    stream = "".join(proof[close + 1:])
    # Stack of label slices so Z-tagged steps can be re-emitted verbatim.
    out: list[str] = []
    stack: list[tuple[int, int]] = []  # (start, end) spans in `out`
    saved: list[tuple[int, int]] = []
    for num in _decode_letters(stream):
        if num == -1:
            if not stack:
                raise MMError(f"{label!r}: Z tag with empty proof stack")
            saved.append(stack[-1])
            continue
        if num < len(refs):
            ref = refs[num]
            start = len(out)
            if db.is_hypothesis(ref):
                out.append(ref)
            else:
                arity = db.frame(ref).mand_count
                if arity > len(stack):
                    raise MMError(f"{label!r}: stack underflow at {ref!r}")
                if arity:
                    start = stack[-arity][0]
                    del stack[-arity:]
                out.append(ref)
            stack.append((start, len(out)))
        elif num < len(refs) + len(saved):
            span = saved[num - len(refs)]
            start = len(out)
            out.extend(out[span[0]:span[1]])
            stack.append((start, len(out)))
        else:
            raise MMError(f"{label!r}: letter index {num} out of range")
    return out


def compress_proof(db: Database, frame: Assertion, labels: Sequence[str]) -> list[str]:
    """Encode a label sequence as compressed proof tokens for `frame`."""
    mand = mandatory_labels(frame)
    index = {lab: i for i, lab in enumerate(mand)}
    refs: list[str] = []
    for lab in labels:
        if lab not in index:
            index[lab] = len(mand) + len(refs)
            refs.append(lab)
    stream = "".join(_encode_int(index[lab]) for lab in labels)
    return ["(", *refs, ")", stream]


# ---------------------------------------------------------------------------
# the stack machine


def apply_substitution(expr: Expr, subst: Subst) -> Expr:
    out: list[str] = []
    for tok in expr:
        body = subst.get(tok)
        if body is None:
            out.append(tok)
        else:
            out.extend(body)
    return tuple(out)


def expr_vars(db: Database, expr: Expr) -> set[str]:
    return {t for t in expr if t in db.float_of_var}


def apply_frame(db: Database, frame: Assertion, operands: Sequence[ProofNode],
                context_dvs: frozenset[tuple[str, str]] = frozenset()) -> ProofNode:
    """Pop-substitute-push step of the stack machine, as a tree node.

    `operands` supplies the mandatory hypotheses in frame order.  Raises
    MMError on typecode, essential-hypothesis, or disjointness mismatch.
    """
    if len(operands) != frame.mand_count:
        raise MMError(f"{frame.label!r}: expected {frame.mand_count} operands, "
                      f"got {len(operands)}")
    subst: Subst = {}
    pos = 0
    for _, tc, var in frame.floats:
        entry = operands[pos].conclusion
        if not entry or entry[0] != tc:
            raise MMError(f"{frame.label!r}: operand {entry} does not match "
                          f"floating hypothesis ({tc} {var})")
        subst[var] = entry[1:]
        pos += 1
    for hyp_label, hyp in frame.essentials:
        expected = apply_substitution(hyp, subst)
        if operands[pos].conclusion != expected:
            raise MMError(
                f"{frame.label!r}: substitution mismatch on {hyp_label!r}: "
                f"have {operands[pos].conclusion}, need {expected}")
        pos += 1
    for x, y in frame.dvs:
        xs = expr_vars(db, subst.get(x, (x,)))
        ys = expr_vars(db, subst.get(y, (y,)))
        for x0, y0 in itertools.product(xs, ys):
            key = (min(x0, y0), max(x0, y0))
            if x0 == y0 or key not in context_dvs:
                raise MMError(f"{frame.label!r}: disjoint variable violation "
                              f"({x0}, {y0})")
    conclusion = apply_substitution(frame.conclusion, subst)
    return ProofNode(frame.label, conclusion, tuple(operands))


def replay_proof(db: Database, labels: Sequence[str],
                 context_dvs: frozenset[tuple[str, str]] = frozenset(),
                 extra_hyps: Optional[dict[str, Expr]] = None) -> list[ProofNode]:
    """Replay a label sequence through the stack machine.

    Returns the final stack as proof trees.  `extra_hyps` allows hypothesis
    labels that are not in the database (used by generators).
    """
    stack: list[ProofNode] = []
    for lab in labels:
        if db.is_hypothesis(lab):
            kind, stmt = db.hypotheses[lab]
            expr = stmt if kind == "$e" else tuple(stmt)
            stack.append(ProofNode(lab, tuple(expr), is_hyp=True))
        elif extra_hyps is not None and lab in extra_hyps:
            stack.append(ProofNode(lab, extra_hyps[lab], is_hyp=True))
        elif db.is_assertion(lab):
            frame = db.frame(lab)
            n = frame.mand_count
            if n > len(stack):
                raise MMError(f"stack underflow applying {lab!r}")
            operands = stack[len(stack) - n:] if n else []
            del stack[len(stack) - n:]
            stack.append(apply_frame(db, frame, operands, context_dvs))
        else:
            raise MMError(f"unknown proof label {lab!r}")
    return stack


def verify_proof(db: Database, label: str) -> ProofNode:
    """Verify a $p statement and return its proof tree."""
    frame = db.frame(label)
    if frame.kind != "$p":
        raise MMError(f"{label!r} is not a provable statement")
    labels = decompress_proof(db, label)
    allowed_ess = {lab for lab, _ in frame.essentials}
    for lab in labels:
        # $f hypotheses beyond the mandatory ones are dummy variables; any
        # active $e must belong to this frame
        if (db.is_hypothesis(lab) and db.hypotheses[lab][0] == "$e"
                and lab not in allowed_ess):
            raise MMError(f"{label!r}: hypothesis {lab!r} is not in scope")
        if db.is_assertion(lab) and db.frame(lab).index >= frame.index:
            raise MMError(f"{label!r}: forward reference to {lab!r}")
    stack = replay_proof(db, labels, frame.context_dvs)
    if not stack:
        raise MMError(f"{label!r}: empty stack at end of proof")
    if len(stack) > 1:
        raise MMError(f"{label!r}: {len(stack)} residual stack elements")
    if stack[0].conclusion != frame.conclusion:
        raise MMError(f"{label!r}: final stack {stack[0].conclusion} does not "
                      f"match assertion {frame.conclusion}")
    return stack[0]


# ---------------------------------------------------------------------------
# expression grammar (driven by the database's syntax axioms)


def parse_expression(db: Database, typecode: str, tokens: Sequence[str],
                     start: int = 0) -> Optional[int]:
    """Scan one `typecode` expression at `start`; return its end or None."""
    if start >= len(tokens):
        return None
    tok = tokens[start]
    fl = db.float_of_var.get(tok)
    if fl is not None and fl[1] == typecode:
        return start + 1
    for prod in db.syntax_productions(typecode):
        pos = start
        ok = True
        for sym in prod.conclusion[1:]:
            sub = db.float_of_var.get(sym)
            if sub is None:  # literal constant
                if pos < len(tokens) and tokens[pos] == sym:
                    pos += 1
                else:
                    ok = False
                    break
            else:
                end = parse_expression(db, sub[1], tokens, pos)
                if end is None:
                    ok = False
                    break
                pos = end
        if ok:
            return pos
    return None


def _unify(db: Database, pattern: Expr, target: Expr,
           pattern_vars: dict[str, str], subst: Subst) -> Optional[Subst]:
    """Match `pattern` (with typed pattern variables) against `target`."""
    subst = dict(subst)
    i = j = 0
    while i < len(pattern):
        tok = pattern[i]
        tc = pattern_vars.get(tok)
        if tc is None:
            if j >= len(target) or target[j] != tok:
                return None
            i += 1
            j += 1
            continue
        bound = subst.get(tok)
        if bound is not None:
            if tuple(target[j:j + len(bound)]) != bound:
                return None
            j += len(bound)
        else:
            end = parse_expression(db, tc, target, j)
            if end is None:
                return None
            subst[tok] = tuple(target[j:end])
            j = end
        i += 1
    return subst if j == len(target) else None


def match_assertion(db: Database, frame: Assertion, target: Expr,
                    hypothesis_pool: Iterable[Expr]) -> Optional[Subst]:
    """Find a substitution with frame.assertion -> target and every essential
    hypothesis instance present in the pool.  Returns None if there is none.
    """
    pattern_vars = {var: tc for _, tc, var in frame.floats}
    subst = _unify(db, frame.conclusion, target, pattern_vars, {})
    if subst is None:
        return None
    pool = sorted(set(hypothesis_pool))

    def satisfy(idx: int, sub: Subst) -> Optional[Subst]:
        if idx == len(frame.essentials):
            return sub
        _, hyp = frame.essentials[idx]
        for candidate in pool:
            nxt = _unify(db, hyp, candidate, pattern_vars, sub)
            if nxt is not None:
                result = satisfy(idx + 1, nxt)
                if result is not None:
                    return result
        return None

    return satisfy(0, subst)


# ---------------------------------------------------------------------------
# emission


def syntax_rpn(db: Database, typecode: str, body: Sequence[str]) -> list[str]:
    """Label sequence that builds `body` as a `typecode` expression."""
    labels: list[str] = []
    if _syntax_rpn(db, typecode, tuple(body), 0, labels) != len(body):
        raise MMError(f"cannot parse {' '.join(body)!r} as {typecode}")
    return labels


def _syntax_rpn(db: Database, typecode: str, body: tuple[str, ...],
                start: int, out: list[str]) -> Optional[int]:
    if start >= len(body):
        return None
    fl = db.float_of_var.get(body[start])
    if fl is not None and fl[1] == typecode:
        out.append(fl[0])
        return start + 1
    for prod in db.syntax_productions(typecode):
        mark = len(out)
        pos: Optional[int] = start
        for sym in prod.conclusion[1:]:
            sub = db.float_of_var.get(sym)
            if sub is None:
                if pos is not None and pos < len(body) and body[pos] == sym:
                    pos += 1
                else:
                    pos = None
                    break
            else:
                pos = _syntax_rpn(db, sub[1], body, pos, out)
                if pos is None:
                    break
        if pos is not None:
            out.append(prod.label)
            return pos
        del out[mark:]
    return None


def proof_rpn(node: ProofNode) -> list[str]:
    out: list[str] = []
    _rpn(node, out)
    return out


def _rpn(node: ProofNode, out: list[str]) -> None:
    for child in node.children:
        _rpn(child, out)
    out.append(node.label)


def _wrap(tokens: Sequence[str], indent: str, width: int = 78) -> str:
    lines: list[str] = []
    cur = ""
    for tok in tokens:
        cand = tok if not cur else f"{cur} {tok}"
        if cur and len(indent) + len(cand) > width:
            lines.append(indent + cur)
            cur = tok
        else:
            cur = cand
    if cur:
        lines.append(indent + cur)
    return "\n".join(lines)


def emit_theorem(db: Database, frame: Assertion, proof: ProofNode) -> str:
    """Render a verified theorem as a standard `${ ... $}` block.

    The proof is re-checked against `frame` before anything is emitted.
    """
    if proof.conclusion != frame.conclusion:
        raise MMError(f"{frame.label!r}: proof concludes {proof.conclusion}, "
                      f"not {frame.conclusion}")
    _check_tree(db, frame, proof)
    labels = proof_rpn(proof)
    tokens = compress_proof(db, frame, labels)
    stream = tokens.pop()
    tokens.extend(stream[i:i + 72] for i in range(0, len(stream), 72))
    lines = ["${"]
    for hyp_label, hyp in frame.essentials:
        lines.append(_wrap([hyp_label, "$e", *hyp, "$."], "  "))
    stmt = [frame.label, "$p", *frame.conclusion, "$=", *tokens, "$."]
    lines.append(_wrap(stmt, "  "))
    lines.append("$}")
    return "\n".join(lines) + "\n"


def _check_tree(db: Database, frame: Assertion, node: ProofNode) -> None:
    if node.is_hyp:
        local = dict(frame.essentials)
        if node.label in local:
            if node.conclusion != local[node.label]:
                raise MMError(f"hypothesis {node.label!r} concludes the wrong "
                              f"expression")
        elif db.is_hypothesis(node.label):
            kind, stmt = db.hypotheses[node.label]
            if tuple(stmt) != node.conclusion:
                raise MMError(f"hypothesis {node.label!r} mismatch")
        else:
            raise MMError(f"unknown hypothesis {node.label!r}")
        return
    for child in node.children:
        _check_tree(db, frame, child)
    rebuilt = apply_frame(db, db.frame(node.label), node.children,
                          frame.context_dvs)
    if rebuilt.conclusion != node.conclusion:
        raise MMError(f"node {node.label!r} concludes {node.conclusion}, "
                      f"stack machine gives {rebuilt.conclusion}")


def verification_report(db: Database, labels: Optional[Sequence[str]] = None) -> list[dict]:
    """JSON-ready verification summary: {label, ok, steps, error?} per $p."""
    out = []
    for label in (labels if labels is not None else db.provable_labels()):
        entry: dict = {"label": label, "ok": False, "steps": 0}
        try:
            root = verify_proof(db, label)
            entry["ok"] = True
            entry["steps"] = db.count_steps(root)
        except MMError as exc:
            entry["error"] = str(exc)
        out.append(entry)
    return out
