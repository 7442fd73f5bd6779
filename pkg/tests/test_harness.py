"""Harness-level guarantees: deterministic transcripts, sound bit accounting,
exact round counts, instrumented operation tables, and the functionality
matrix."""

import copy
import random

import pytest

from roamauth import harness, instrument
from roamauth.attacks import AttackOutcome
from roamauth.harness import (
    CostReport,
    Transcript,
    UnsupportedScenario,
    build_proposed_world,
    functionality_matrix,
    measure_costs,
    measure_features,
    run_session,
)


# ---------------------------------------------------------------------------
# determinism


@pytest.mark.parametrize("scheme,scenario", [
    ("proposed", "foreign-auth"),
    ("proposed", "home-auth"),
    ("proposed", "key-update"),
    ("proposed", "password-change"),
    ("proposed", "registration"),
    ("mun", "foreign-auth"),
    ("mun", "key-update"),
    ("mun", "registration"),
])
def test_identical_seed_gives_identical_transcript_bytes(toy_suite, scheme, scenario):
    r1 = run_session(toy_suite, scheme, scenario, random.Random(1234), update_rounds=2)
    r2 = run_session(toy_suite, scheme, scenario, random.Random(1234), update_rounds=2)
    assert r1.transcript.to_binary() == r2.transcript.to_binary()
    assert r1.transcript.to_jsonl() == r2.transcript.to_jsonl()
    r3 = run_session(toy_suite, scheme, scenario, random.Random(4321), update_rounds=2)
    if scenario != "registration":  # registration bytes vary only via rng
        assert r3.transcript.to_binary() != r1.transcript.to_binary()


# ---------------------------------------------------------------------------
# round counts


def test_round_counts_exact(toy_suite):
    assert run_session(toy_suite, "proposed", "foreign-auth", random.Random(1)).report.rounds == 4
    assert run_session(toy_suite, "mun", "foreign-auth", random.Random(1)).report.rounds == 5
    assert run_session(toy_suite, "proposed", "home-auth", random.Random(1)).report.rounds == 2
    upd = run_session(toy_suite, "proposed", "key-update", random.Random(1), update_rounds=3)
    for i in (1, 2, 3):
        assert upd.report.phase_rounds[f"update-{i}"] == 2
    mupd = run_session(toy_suite, "mun", "key-update", random.Random(1), update_rounds=2)
    for i in (1, 2):
        assert mupd.report.phase_rounds[f"update-{i}"] == 2


def test_mun_has_no_home_flow(toy_suite):
    with pytest.raises(UnsupportedScenario):
        run_session(toy_suite, "mun", "home-auth", random.Random(1))
    with pytest.raises(UnsupportedScenario):
        run_session(toy_suite, "mun", "password-change", random.Random(1))


# ---------------------------------------------------------------------------
# bit accounting


def test_nominal_bit_widths_per_message(toy_suite):
    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(2))
    by_kind = {m["kind"]: m["bits"] for m in res.report.message_bits}
    assert by_kind == {
        "login-request": 2528,
        "foreign-challenge": 3072,
        "home-answer": 2048,
        "login-accept": 1344,
    }
    assert res.report.mobile_bits == 2528 + 1344 == 3872
    assert res.report.paper_bits == 3808
    assert res.report.bits_delta == 64


def test_mun_bit_accounting(toy_suite):
    res = run_session(toy_suite, "mun", "foreign-auth", random.Random(2))
    by_kind = {m["kind"]: m["bits"] for m in res.report.message_bits}
    assert by_kind == {
        "mun-login": 448,
        "mun-forward": 448,
        "mun-home-reply": 320,
        "mun-foreign-reply": 1632,
        "mun-client-finish": 1184,
    }
    assert res.report.mobile_bits == 448 + 1632 + 1184 == 3264
    assert res.report.paper_bits == 4192


def test_accounting_rule_changes_totals_not_rounds(toy_suite):
    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(3))
    counters = {p: instrument.OpCounts() for p in ("MU", "FA", "HA")}
    wire_report = measure_costs(res.transcript, counters, rule="wire")
    assert wire_report.rounds == res.report.rounds == 4
    assert wire_report.mobile_bits != res.report.mobile_bits
    with pytest.raises(harness.HarnessError):
        measure_costs(res.transcript, counters, rule="imaginary")


def test_report_total_equals_sum_of_message_bits(toy_suite):
    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(4))
    mobile = [m for m in res.report.message_bits if "MU" in (m["sender"], m["receiver"])]
    assert res.report.mobile_bits == sum(m["bits"] for m in mobile)


def test_empty_transcript_zero_report(toy_suite):
    t = Transcript("proposed", "foreign-auth", "toy-751")
    rep = measure_costs(t, {})
    assert rep.rounds == 0
    assert rep.mobile_bits == 0
    assert rep.message_bits == []


# ---------------------------------------------------------------------------
# instrumented operation counts


EXPECTED_PROPOSED_OPS = {
    "MU": {"xor": 2, "hash": 6, "mul": 3, "mul_pre": 2},
    "FA": {"hash": 1, "mul": 3, "mul_pre": 1, "esym": 1, "dsym": 1,
           "gsign": 1, "vsign": 1, "kdf": 1, "vcert": 1},
    "HA": {"xor": 1, "hash": 4, "mul": 2, "esym": 1, "dsym": 1,
           "gsign": 1, "vsign": 1, "kdf": 1, "vcert": 1},
}


def test_proposed_op_counts_match_published_table(toy_suite):
    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(5))
    for party, expected in EXPECTED_PROPOSED_OPS.items():
        measured = {k: v for k, v in res.report.op_counts[party].items() if v}
        assert measured == expected, party
    # the paper's own eight columns, exactly
    paper = res.report.paper_ops
    for party in ("MU", "FA", "HA"):
        for col, val in paper[party].items():
            assert res.report.op_counts[party][col] == val, (party, col)


def test_mun_op_counts(toy_suite):
    res = run_session(toy_suite, "mun", "foreign-auth", random.Random(5))
    assert {k: v for k, v in res.report.op_counts["MU"].items() if v} == {
        "xor": 2, "hash": 4, "mul": 2, "mul_pre": 1, "mac": 1}
    assert {k: v for k, v in res.report.op_counts["FA"].items() if v} == {
        "xor": 2, "hash": 3, "mul": 2, "mul_pre": 1, "mac": 1}
    assert {k: v for k, v in res.report.op_counts["HA"].items() if v} == {
        "xor": 3, "hash": 3}


def test_instrumentation_complete_during_sessions(toy_suite):
    instrument.reset_unattributed()
    run_session(toy_suite, "proposed", "foreign-auth", random.Random(6))
    run_session(toy_suite, "mun", "foreign-auth", random.Random(6))
    assert instrument.unattributed_ops() == 0


# ---------------------------------------------------------------------------
# transcript serialization


def test_transcript_jsonl_roundtrip(toy_suite):
    t = run_session(toy_suite, "proposed", "foreign-auth", random.Random(7)).transcript
    again = Transcript.from_jsonl(t.to_jsonl())
    assert again == t


def test_transcript_binary_roundtrip(toy_suite):
    t = run_session(toy_suite, "mun", "key-update", random.Random(7), update_rounds=2).transcript
    again = Transcript.from_binary(t.to_binary())
    assert again == t


def test_transcript_messages_reparse(toy_suite):
    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(8))
    kinds = [res.transcript.message(toy_suite, i).KIND for i in range(4)]
    assert kinds == ["login-request", "foreign-challenge", "home-answer", "login-accept"]


def test_cost_report_json_roundtrip(toy_suite):
    rep = run_session(toy_suite, "proposed", "foreign-auth", random.Random(9)).report
    again = CostReport.from_json(rep.to_json())
    assert again == rep
    assert "3808" in rep.to_json()
    csv_text = rep.comm_csv()
    assert "3872" in csv_text and "3808" in csv_text and "64" in csv_text


# ---------------------------------------------------------------------------
# adversary hook


def test_adversary_hook_can_tamper(toy_suite):
    def flip_accept(sender, receiver, kind, raw):
        if kind == "login-accept":
            raw = raw[:-1] + bytes([raw[-1] ^ 1])
        return raw

    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(10),
                      adversary=flip_accept)
    assert not res.outcome["success"]
    assert "ConfirmMismatch" in res.outcome["abort"]


def test_tampering_a_point_field_aborts_cleanly(toy_suite):
    # Corrupting point bytes makes the message unparseable; the session must
    # abort with an outcome, not crash.
    def flip_point(sender, receiver, kind, raw):
        if kind == "login-request":
            body = bytearray(raw)
            body[8] ^= 0xFF  # inside the first (point) field payload
            return bytes(body)
        return raw

    res = run_session(toy_suite, "proposed", "foreign-auth", random.Random(11),
                      adversary=flip_point)
    assert not res.outcome["success"]
    assert "undeliverable" in res.outcome["abort"] or "Validation" in res.outcome["abort"]


# ---------------------------------------------------------------------------
# feature measurement and the functionality matrix


def _fake_outcomes(pattern: dict[str, dict[str, bool]]):
    return {
        name: {
            scheme: AttackOutcome(name, scheme, succeeded, {}, "synthetic")
            for scheme, succeeded in per.items()
        }
        for name, per in pattern.items()
    }


EXPECTED_ATTACK_PATTERN = {
    "mu-impersonation": {"proposed": False, "mun": True},
    "fa-impersonation": {"proposed": False, "mun": True},
    "ha-impersonation": {"proposed": False, "mun": True},
    "offline-guess": {"proposed": False, "mun": True},
    "insider": {"proposed": False, "mun": True},
    "traceability": {"proposed": False, "mun": True},
    "replay": {"proposed": False, "mun": True},
    "forward-secrecy": {"proposed": False, "mun": False},
}


def test_measure_features(toy_suite):
    feats = measure_features(toy_suite, random.Random(11))
    assert feats["no-verification-table"] == {"proposed": True, "mun": False}
    assert feats["local-verification"] == {"proposed": True, "mun": False}
    assert feats["password-change"] == {"proposed": True, "mun": False}
    assert feats["home-network-auth"] == {"proposed": True, "mun": False}


def test_functionality_matrix_values(toy_suite):
    feats = measure_features(toy_suite, random.Random(12))
    matrix = functionality_matrix(_fake_outcomes(EXPECTED_ATTACK_PATTERN), feats)
    by_key = {row["key"]: row for row in matrix.rows}
    assert len(matrix.rows) == 13
    for row in matrix.rows:
        assert row["measured"]["proposed"] == "Yes"
    assert by_key["forward-secrecy"]["measured"]["mun"] == "Yes"
    assert by_key["anonymity"]["measured"]["mun"] == "No"
    # the single expected measured-vs-published disagreement
    flagged = [r["key"] for r in matrix.rows if r["flag"]]
    assert flagged == ["no-verification-table"]
    assert by_key["no-verification-table"]["reported"]["mun"] == "Yes"
    assert by_key["no-verification-table"]["measured"]["mun"] == "No"


def test_matrix_flags_any_disagreement_instead_of_hiding_it(toy_suite):
    feats = measure_features(toy_suite, random.Random(13))
    pattern = copy.deepcopy(EXPECTED_ATTACK_PATTERN)
    pattern["replay"]["proposed"] = True  # pretend the replay broke the scheme
    matrix = functionality_matrix(_fake_outcomes(pattern), feats)
    by_key = {row["key"]: row for row in matrix.rows}
    assert by_key["resist-replay"]["measured"]["proposed"] == "No"
    assert by_key["resist-replay"]["flag"] is not None


def test_matrix_marks_quoted_columns(toy_suite):
    feats = measure_features(toy_suite, random.Random(14))
    matrix = functionality_matrix(_fake_outcomes(EXPECTED_ATTACK_PATTERN), feats)
    text = matrix.to_csv()
    assert "paper-reported, not measured" in text
    for label in ("Wu", "Chang", "Li-Lee"):
        assert any(label.lower() in c for c in text.splitlines()[0].lower().split(","))


# ---------------------------------------------------------------------------
# worlds


def test_world_build_is_deterministic(toy_suite):
    w1 = build_proposed_world(toy_suite, random.Random(15))
    w2 = build_proposed_world(toy_suite, random.Random(15))
    assert w1.ha == w2.ha
    assert w1.mu == w2.mu


def test_session_ephemerals_are_wiped(toy_suite):
    # run_session wipes user/foreign session scalars after completion
    from roamauth import proposed as prop

    world = build_proposed_world(toy_suite, random.Random(16))
    rng = random.Random(17)
    m1, mu_sess = prop.login_begin(toy_suite, world.mu, rng)
    m2, fa_sess = prop.fa_process_login(toy_suite, world.fa, m1, rng)
    m3 = prop.ha_process(toy_suite, world.ha, m2, rng)
    m4, _ = prop.fa_finish(toy_suite, world.fa, fa_sess, m3)
    prop.mu_finish(toy_suite, world.mu, mu_sess, m4)
    mu_sess.wipe()
    fa_sess.wipe()
    assert mu_sess.eph_priv is None
    assert fa_sess.eph_priv is None
