"""Forward proof construction: build verified proof trees by explicit frame
application, and register new statements on a live database.

This is how new theorems come to exist outside a .mm file: generators and the
bundled-database builder assemble ProofNode trees here and hand them to
kernel.emit_theorem for serialization.
"""

from __future__ import annotations

from typing import Sequence

from .kernel import (Assertion, Database, Expr, MMError, ProofNode,
                     apply_frame, replay_proof, syntax_rpn)


def tokens(spec: str | Sequence[str]) -> tuple[str, ...]:
    return tuple(spec.split()) if isinstance(spec, str) else tuple(spec)


def hyp_node(label: str, expr: str | Expr) -> ProofNode:
    return ProofNode(label, tokens(expr), is_hyp=True)


def syntax_node(db: Database, typecode: str, body: Sequence[str]) -> ProofNode:
    stack = replay_proof(db, syntax_rpn(db, typecode, list(body)))
    assert len(stack) == 1
    return stack[0]


def ap(db: Database, label: str, subst: dict[str, str | Sequence[str]],
       *essential_operands: ProofNode) -> ProofNode:
    """Apply an assertion with an explicit substitution.

    Floating operands are synthesized from `subst`; essential operands must be
    proof nodes whose conclusions already match the substituted hypotheses
    (apply_frame checks them).
    """
    frame = db.frame(label)
    operands: list[ProofNode] = []
    for _, tc, var in frame.floats:
        if var not in subst:
            raise MMError(f"{label!r}: no substitution for {var!r}")
        operands.append(syntax_node(db, tc, tokens(subst[var])))
    operands.extend(essential_operands)
    return apply_frame(db, frame, operands)


def make_frame(db: Database, label: str, conclusion: str | Expr,
               essentials: Sequence[tuple[str, str | Expr]] = (),
               kind: str = "$p") -> Assertion:
    """Frame for a new theorem; mandatory floats follow declaration order."""
    conclusion = tokens(conclusion)
    ess = tuple((lab, tokens(expr)) for lab, expr in essentials)
    used = {t for _, e in ess for t in e} | set(conclusion)
    floats = tuple((flab, tc, var)
                   for var, (flab, tc) in db.float_of_var.items()
                   if var in used)
    return Assertion(label=label, kind=kind, floats=floats, essentials=ess,
                     conclusion=conclusion, dvs=frozenset(),
                     context_dvs=frozenset(), index=len(db.statements))


def register(db: Database, frame: Assertion, proof_labels: Sequence[str] | None = None) -> None:
    """Append a framed statement to a live database, mirroring the parser."""
    if frame.label in db.assertions or frame.label in db.hypotheses:
        raise MMError(f"duplicate label {frame.label!r}")
    for lab, expr in frame.essentials:
        if lab in db.assertions or lab in db.hypotheses:
            raise MMError(f"duplicate label {lab!r}")
        db.hypotheses[lab] = ("$e", expr)
        db.statements.append(("$e", lab))
    frame.index = len(db.statements)
    if proof_labels is not None:
        frame.proof = list(proof_labels)
    db.assertions[frame.label] = frame
    db.statements.append((frame.kind, frame.label))
    if frame.kind == "$a" and frame.conclusion[0] in db.float_typecodes:
        db._syntax.setdefault(frame.conclusion[0], []).append(frame)
