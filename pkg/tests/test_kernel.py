"""Parser, stack machine, compressed proofs, and emission."""

import pytest

from atgkit import kernel
from atgkit.kernel import MMError

from conftest import TINY_MM


def test_parse_counts(tiny_db):
    assert tiny_db.provable_labels() == ["a1i", "id", "idi"]
    assert set(tiny_db.axiom_labels()) == {
        "wn", "wi", "ax-1", "ax-2", "ax-3", "ax-mp"}
    assert tiny_db.float_typecodes == {"wff"}


def test_frame_shapes(tiny_db):
    mp = tiny_db.frame("ax-mp")
    assert [var for _, _, var in mp.floats] == ["ph", "ps"]
    assert [lab for lab, _ in mp.essentials] == ["min", "maj"]
    assert mp.mand_count == 4
    a1i = tiny_db.frame("a1i")
    assert a1i.conclusion == ("|-", "(", "ps", "->", "ph", ")")
    with pytest.raises(MMError):
        tiny_db.frame("nonesuch")


def test_verify_all_tiny(tiny_db):
    for label in tiny_db.provable_labels():
        root = kernel.verify_proof(tiny_db, label)
        assert root.conclusion == tiny_db.frame(label).conclusion


def test_compressed_proof_z_tags(tiny_db):
    labels = kernel.decompress_proof(tiny_db, "id")
    # the Z-saved ( ph -> ph ) subtree reappears expanded
    assert labels.count("wi") == 12
    assert labels[-1] == "ax-mp"
    stack = kernel.replay_proof(tiny_db, labels)
    assert len(stack) == 1
    assert stack[0].conclusion == ("|-", "(", "ph", "->", "ph", ")")


def test_uncompressed_proof(tiny_db):
    assert kernel.decompress_proof(tiny_db, "idi") == [
        "wph", "wph", "wi", "wps", "wph", "id", "a1i"]


def test_compress_round_trip(tiny_db):
    frame = tiny_db.frame("id")
    labels = kernel.decompress_proof(tiny_db, "id")
    tokens = kernel.compress_proof(tiny_db, frame, labels)
    frame2 = kernel.Assertion(
        label="id2", kind="$p", floats=frame.floats,
        essentials=frame.essentials, conclusion=frame.conclusion,
        dvs=frame.dvs, context_dvs=frame.context_dvs, index=frame.index,
        proof=tokens)
    tiny_db.assertions["id2"] = frame2
    try:
        assert kernel.decompress_proof(tiny_db, "id2") == labels
    finally:
        del tiny_db.assertions["id2"]


def test_replay_underflow(tiny_db):
    with pytest.raises(MMError):
        kernel.replay_proof(tiny_db, ["ax-mp"])


def test_replay_mismatched_hypothesis(tiny_db):
    # min must conclude ph under the substitution; a stray wff does not
    with pytest.raises(MMError):
        kernel.replay_proof(
            tiny_db, ["wph", "wps", "wph", "wph", "wi", "ax-mp"])


def test_parse_errors():
    with pytest.raises(MMError):
        kernel.parse_database("$c |- $. $c |- $.")  # duplicate constant
    with pytest.raises(MMError):
        kernel.parse_database("$v x $. bad $a |- x $.")  # var has no $f
    with pytest.raises(MMError):
        kernel.parse_database("$c |- $. p1 $p |- $.")  # $p without proof


def test_parse_expression(tiny_db):
    tokens = ["(", "ph", "->", "(", "ps", "->", "ph", ")", ")"]
    assert kernel.parse_expression(tiny_db, "wff", tokens) == len(tokens)
    assert kernel.parse_expression(tiny_db, "wff", ["->", "ph"]) is None


def test_syntax_rpn_round_trip(tiny_db):
    body = ["(", "-.", "ph", "->", "ps", ")"]
    rpn = kernel.syntax_rpn(tiny_db, "wff", body)
    stack = kernel.replay_proof(tiny_db, rpn)
    assert len(stack) == 1
    assert stack[0].conclusion == ("wff", *body)


def test_match_assertion(tiny_db):
    frame = tiny_db.frame("a1i")
    target = ("|-", "(", "ch", "->", "(", "ph", "->", "ph", ")", ")")
    hyps = {("|-", "(", "ph", "->", "ph", ")")}
    subst = kernel.match_assertion(tiny_db, frame, target, hyps)
    assert subst is not None
    assert subst["ps"] == ("ch",)
    assert kernel.match_assertion(tiny_db, frame, target, set()) is None


def test_emit_theorem_round_trip(tiny_db):
    frame = tiny_db.frame("a1i")
    proof = kernel.verify_proof(tiny_db, "a1i")
    text = kernel.emit_theorem(tiny_db, frame, proof)
    augmented = TINY_MM + text.replace("a1i", "a1x")
    db2 = kernel.parse_database(augmented)
    root = kernel.verify_proof(db2, "a1x")
    assert root.conclusion == frame.conclusion


def test_emit_rejects_wrong_conclusion(tiny_db):
    frame = tiny_db.frame("a1i")
    proof = kernel.verify_proof(tiny_db, "id")
    with pytest.raises(MMError):
        kernel.emit_theorem(tiny_db, frame, proof)


def test_verification_report(tiny_db):
    report = kernel.verification_report(tiny_db)
    assert [e["label"] for e in report] == ["a1i", "id", "idi"]
    assert all(e["ok"] for e in report)
    assert report[1]["steps"] == 5  # id: four applications + ...
    # a broken proof is reported, not raised
    bad = kernel.verification_report(
        kernel.parse_database(
            TINY_MM.replace("ABADCABEF", "ABADCABEE")), ["a1i"])
    assert bad[0]["ok"] is False and "error" in bad[0]


def test_apply_frame_substitution(tiny_db):
    # |- ( ps -> ( ph -> ph ) ) via a1i with ph := ( ph -> ph )
    inner = kernel.verify_proof(tiny_db, "id")
    from atgkit import forge
    node = kernel.apply_frame(
        tiny_db, tiny_db.frame("a1i"),
        [forge.syntax_node(tiny_db, "wff", ["(", "ph", "->", "ph", ")"]),
         forge.syntax_node(tiny_db, "wff", ["ps"]),
         inner])
    assert node.conclusion == ("|-", "(", "ps", "->", "(", "ph", "->",
                               "ph", ")", ")")
