import pytest

from trustgate.datasynth import (
    corpus_to_sequences,
    generate_labeled_dataset,
    golden_request_dict,
)
from trustgate.embeddings import build_cooccurrence, derive_embeddings_from_cooccurrence
from trustgate.engine import (
    STATUS_ACCEPT,
    STATUS_DENY,
    STATUS_VERIFY,
    AccessRequest,
    DecisionEngine,
    GroupIds,
    ResourcePolicy,
    Thresholds,
    decide,
)
from trustgate.encoding import split_context_array, decode_component
from trustgate.scoring import AttributeTriple, MicroserviceChecks, ScoringError
from trustgate.validation import validate_decide_body
from trustgate.wire import canonical_json, decision_to_wire

SEED = 90210


@pytest.fixture(scope="module")
def engine():
    dataset = generate_labeled_dataset(SEED, 150, 0.4)
    model = build_cooccurrence(corpus_to_sequences(list(dataset.corpus)), window=20)
    store = derive_embeddings_from_cooccurrence(model)
    return DecisionEngine(store=store, model=model)


@pytest.fixture(scope="module")
def golden_request(engine):
    body = golden_request_dict(SEED)
    validated = validate_decide_body(
        body, engine.scoring_config, engine.thresholds, engine.resources
    )
    return validated.request


# --- decide -------------------------------------------------------------------

def test_decide_score_table():
    thresholds = Thresholds(ct=0.99, bt=0.7)
    rows = [
        ((0.0, 0.0), STATUS_DENY),
        ((0.99, 0.0), STATUS_DENY),
        ((0.99, 0.5), STATUS_VERIFY),
        ((0.99, 0.9), STATUS_ACCEPT),
        ((0.99, 0.83), STATUS_ACCEPT),
        ((0.99, 0.79), STATUS_ACCEPT),
    ]
    for (ct, bt), expected in rows:
        assert decide(ct, bt, thresholds) == expected


def test_decide_monotone():
    thresholds = Thresholds(ct=0.99, bt=0.7)
    rank = {STATUS_DENY: 0, STATUS_VERIFY: 1, STATUS_ACCEPT: 2}
    grid = [0.0, 0.01, 0.3, 0.69, 0.7, 0.9, 0.99, 1.0]
    for ct in grid:
        for bt in grid:
            base = rank[decide(ct, bt, thresholds)]
            for higher in grid:
                if higher >= ct:
                    assert rank[decide(higher, bt, thresholds)] >= base
                if higher >= bt:
                    assert rank[decide(ct, higher, thresholds)] >= base


def test_decide_input_validation():
    with pytest.raises(ScoringError):
        decide(1.5, 0.5, Thresholds())
    with pytest.raises(ScoringError):
        decide(0.5, 0.5, Thresholds(ct=0.0))


# --- evaluate_request ------------------------------------------------------------

def test_golden_request_accepts_with_high_bond(engine, golden_request):
    decision = engine.evaluate(golden_request)
    assert decision.status == STATUS_ACCEPT
    assert decision.scores.bond.bt >= 0.9
    assert decision.fields.f4_operations != "0"
    assert decision.compliance.verdict == "Pass"


def test_all_checks_false_denies_with_zero_ops(engine, golden_request):
    from dataclasses import replace

    request = replace(golden_request, checks=MicroserviceChecks(False, False, False, False))
    decision = engine.evaluate(request)
    assert decision.status == STATUS_DENY
    assert decision.ct == 0.0
    assert decision.fields.f4_operations == "0"
    assert decision.fields.f2_resources == "000000"
    assert any("critical trust is zero" in r for r in decision.reasons)


def test_ssn_without_consent_blocks_before_scoring(engine, golden_request):
    from dataclasses import replace

    user = tuple(
        a for a in golden_request.triple.user if a[0] != "User consent"
    ) + (("ssn", "123-45-6789"),)
    request = replace(
        golden_request, triple=replace(golden_request.triple, user=user)
    )
    decision = engine.evaluate(request)
    assert decision.status == STATUS_DENY
    assert decision.scores is None  # scoring skipped
    assert decision.ct is None
    assert any("SSN" in r for r in decision.reasons)
    assert decision.fields.f4_operations == "0"
    assert decision.fields.f2_resources == "000000"


def test_unscorable_request_verifies(engine):
    triple = AttributeTriple(
        user=(("id", "XKCD-1"), ("patient consent", "granted")),
        device=(("serial", "9::9"),),
        output=(("blob", "0xDEAD"),),
    )
    request = AccessRequest(
        triple=triple,
        checks=MicroserviceChecks(True, True, True, True),
        candidate_report="report text",
        patient_history=("report text",),
    )
    decision = engine.evaluate(request)
    assert decision.status == STATUS_VERIFY
    assert any("scoring error at align:" in r for r in decision.reasons)
    assert decision.scores.bond is None
    assert decision.ct is not None
    assert decision.fields.f4_operations == "0"


def test_verify_on_partial_checks_grants_nothing(engine, golden_request):
    from dataclasses import replace

    request = replace(golden_request, checks=MicroserviceChecks(True, False, True, True))
    decision = engine.evaluate(request)
    assert decision.status == STATUS_VERIFY  # ct 0.6 below 0.99
    assert any("below threshold" in r for r in decision.reasons)
    assert decision.fields.f4_operations == "0"
    assert decision.fields.f2_resources == "000000"


def test_context_array_structure(engine, golden_request):
    decision = engine.evaluate(golden_request)
    user_enc, device_enc, output_enc, ct_bucket = split_context_array(decision.context_array)
    user = decode_component(user_enc)
    device = decode_component(device_enc)
    output = decode_component(output_enc)
    assert (user.group, device.group, output.group) == (1, 2, 3)
    assert user.level == device.level == output.level == 2
    assert (user.access_type, device.access_type, output.access_type) == (1, 2, 3)
    assert user.consent == device.consent == output.consent == 1
    assert ct_bucket == round(decision.ct * 255)
    ratios = decision.scores.bond.ratios
    assert user.bond_bucket == round(ratios[0] * 255)
    assert output.bond_bucket == round(ratios[1] * 255)
    assert device.bond_bucket == round(ratios[2] * 255)


def test_accept_grants_requested_resources(engine, golden_request):
    resources = ResourcePolicy(compute_id=0xAB, storage_id=0xCD, expiry=1679944799, constraint_flags=7)
    decision = engine.evaluate(golden_request, resources=resources)
    assert decision.status == STATUS_ACCEPT
    assert decision.fields.f2_resources == "0AB0CD"
    assert decision.fields.f3_constraints == "6421EC5F00000007"
    assert decision.fields.f4_operations == "6"  # Read|Update


def test_evaluate_is_deterministic(engine, golden_request):
    first = engine.evaluate(golden_request)
    second = engine.evaluate(golden_request)
    payload_a = canonical_json(decision_to_wire(first, engine.thresholds.ct))
    payload_b = canonical_json(decision_to_wire(second, engine.thresholds.ct))
    assert payload_a == payload_b


def test_group_ids_encode_into_components(engine, golden_request):
    from dataclasses import replace

    request = replace(golden_request, group_ids=GroupIds(user=255, device=0, output=9))
    decision = engine.evaluate(request)
    user_enc, device_enc, output_enc, _ = split_context_array(decision.context_array)
    assert user_enc[:2] == "FF"
    assert device_enc[:2] == "00"
    assert output_enc[:2] == "09"
