import math

import pytest

from trustgate.scoring import BondTrustBreakdown, TrustScores
from trustgate.wire import bond_to_wire, canonical_json, render, scores_to_wire, sha256_hex


def test_sorted_keys_no_whitespace():
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_float_fixed_six_decimals():
    assert canonical_json(0.7165313105737893) == "0.716531"
    assert canonical_json(1.0) == "1.000000"
    assert canonical_json(2.5e-7) == "0.000000"
    assert canonical_json({"x": 1 / 3}) == '{"x":0.333333}'


def test_negative_zero_normalized():
    assert canonical_json(-0.0) == "0.000000"


def test_integers_stay_integers():
    assert canonical_json({"n": 3, "t": 1700000000}) == '{"n":3,"t":1700000000}'


def test_booleans_and_null():
    assert canonical_json({"a": True, "b": None, "c": False}) == '{"a":true,"b":null,"c":false}'


def test_non_ascii_escaped():
    assert canonical_json("café") == '"caf\\u00e9"'


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        canonical_json(math.inf)
    with pytest.raises(ValueError):
        canonical_json({"x": math.nan})


def test_non_string_keys_rejected():
    with pytest.raises(ValueError):
        canonical_json({1: "x"})


def test_digest_is_stable_and_order_independent():
    a = sha256_hex({"x": 1, "y": [1.5, 2]})
    b = sha256_hex({"y": [1.5, 2], "x": 1})
    assert a == b and len(a) == 64


def test_reparsed_canonical_text_is_a_fixed_point():
    import json

    original = {"scores": {"ct": 0.99, "bt": 1 / 3}, "seq": 2, "ok": True}
    text = canonical_json(original)
    assert canonical_json(json.loads(text)) == text


def test_scores_wire_shape():
    bond = BondTrustBreakdown(
        bt_a_components=(1.0, 2.0, 0.5),
        btn=(0.2, 0.5, 0.3),
        weight_sums=(2.0, 2.0, 1.0),
        ratios=(0.5, 1.0, 0.5),
        bt_a=2 / 3,
        bt_b=0.5,
        bt=(2 / 3 + 0.5) / 2,
        mode="normalized",
        warnings=("user-device: skipped 1+0 attributes with no in-vocabulary token",),
    )
    wire = scores_to_wire(TrustScores(ct=0.99, bond=bond), ct_threshold=0.99)
    assert wire["ct_status"] == "Allow"
    assert wire["bond"]["mode"] == "normalized"
    text = render(wire)
    assert text.endswith("\n")
    assert '"bt_a":0.666667' in text
    assert bond_to_wire(None) is None
