import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustgate.embeddings import EmbeddingStore, build_cooccurrence, derive_embeddings_from_cooccurrence
from trustgate.rng import Xoshiro256StarStar
from trustgate.scoring import (
    AlignedPair,
    AttributeTriple,
    MicroserviceChecks,
    ScoringConfig,
    ScoringError,
    ScoringFactors,
    align_attributes,
    bond_scores,
    bond_trust,
    bond_trust_component,
    bt_a_aggregate,
    bt_b_score,
    critical_trust,
    ct_status,
    ngram_precision,
    pair_weight,
    score_request,
    similarity_logical,
    softmax_normalize,
)

TABLE_FACTORS = ScoringFactors(0.3, 0.4, 0.2, 0.1)


def store_from(mapping):
    return EmbeddingStore({t: np.array(v, dtype=float) for t, v in mapping.items()})


# --- critical trust ----------------------------------------------------------

def test_critical_trust_all_checks_pass():
    ct = critical_trust(MicroserviceChecks(True, True, True, True), TABLE_FACTORS)
    # prints as 0.9999... in binary arithmetic; the exact value is 1 within 1e-4
    assert abs(ct - 1.0) <= 1e-4


def test_critical_trust_missing_authorization():
    ct = critical_trust(MicroserviceChecks(True, False, True, True), TABLE_FACTORS)
    assert ct == 0.6


def test_critical_trust_all_fail():
    assert critical_trust(MicroserviceChecks(False, False, False, False), TABLE_FACTORS) == 0.0


def test_critical_trust_factor_validation():
    with pytest.raises(ScoringError):
        critical_trust(MicroserviceChecks(True, True, True, True), ScoringFactors(0.5, 0.4, 0.2, 0.1))
    with pytest.raises(ScoringError):
        critical_trust(MicroserviceChecks(True, True, True, True), ScoringFactors(-0.1, 0.6, 0.3, 0.2))


def test_critical_trust_monotone_in_every_check():
    factor_sets = [TABLE_FACTORS, ScoringFactors(0.25, 0.25, 0.25, 0.25), ScoringFactors(0.7, 0.1, 0.1, 0.1)]
    for factors in factor_sets:
        for bits in itertools.product([False, True], repeat=4):
            base = critical_trust(MicroserviceChecks(*bits), factors)
            for i in range(4):
                if not bits[i]:
                    raised = list(bits)
                    raised[i] = True
                    assert critical_trust(MicroserviceChecks(*raised), factors) >= base


def test_ct_status_rows():
    assert ct_status(0.0, 0.99) == "Deny"
    assert ct_status(0.6, 0.99) == "Verify"
    assert ct_status(1.0, 0.99) == "Allow"
    assert ct_status(0.99, 0.99) == "Allow"  # boundary inclusive


def test_ct_status_range_check():
    with pytest.raises(ScoringError):
        ct_status(1.5, 0.99)


# --- similarity logical --------------------------------------------------------

def test_similarity_logical_cases():
    assert similarity_logical(1.0, 0.7) == 1
    assert similarity_logical(0.69, 0.7) == 0
    assert similarity_logical(0.7, 0.7) == 1  # boundary inclusive


# --- alignment -----------------------------------------------------------------

IDENTITY_STORE = store_from(
    {"cardiology": [1, 0, 0], "dermatology": [0, 1, 0], "monitor": [0, 0, 1]}
)


def test_align_identical_lists():
    attrs = [("speciality", "cardiology"), ("device", "monitor")]
    alignment = align_attributes(IDENTITY_STORE, attrs, attrs)
    assert len(alignment.pairs) == 2
    assert all(p.cosine == pytest.approx(1.0, abs=1e-12) for p in alignment.pairs)
    assert {(p.left[1], p.right[1]) for p in alignment.pairs} == {
        ("cardiology", "cardiology"),
        ("monitor", "monitor"),
    }


def test_align_orthogonal_single_pair():
    alignment = align_attributes(
        IDENTITY_STORE, [("s", "cardiology")], [("s", "dermatology")]
    )
    assert len(alignment.pairs) == 1
    assert alignment.pairs[0].cosine == 0.0


def test_align_skips_unembeddable_with_count():
    alignment = align_attributes(
        IDENTITY_STORE,
        [("s", "cardiology"), ("junk", "zzz qqq")],
        [("s", "cardiology")],
    )
    assert alignment.skipped_left == 1
    assert len(alignment.pairs) == 1


def test_align_empty_list_is_an_error():
    with pytest.raises(ScoringError):
        align_attributes(IDENTITY_STORE, [], [("s", "cardiology")])


def test_align_matches_greedy_oracle_5x5():
    rng = Xoshiro256StarStar(31)
    vocab = {f"w{i}": [rng.random() + 0.05 for _ in range(4)] for i in range(10)}
    store = store_from(vocab)
    left = [(f"l{i}", f"w{i}") for i in range(5)]
    right = [(f"r{i}", f"w{i + 5}") for i in range(5)]

    def cos(u, v):
        du = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v))
        return du / nu

    candidates = sorted(
        (
            (-cos(vocab[left[i][1]], vocab[right[j][1]]), i, j)
            for i in range(5)
            for j in range(5)
        )
    )
    used_l, used_r, expected = set(), set(), []
    for neg, i, j in candidates:
        if i in used_l or j in used_r:
            continue
        used_l.add(i)
        used_r.add(j)
        expected.append((left[i][1], right[j][1], -neg))

    alignment = align_attributes(store, left, right)
    got = [(p.left[1], p.right[1], p.cosine) for p in alignment.pairs]
    assert [(l, r) for l, r, _ in got] == [(l, r) for l, r, _ in expected]
    for (_, _, a), (_, _, b) in zip(got, expected):
        assert a == pytest.approx(b, abs=1e-12)


# --- pair weights and components ------------------------------------------------

def test_pair_weight_multi_token_mean():
    model = build_cooccurrence([["ecg", "monitor", "cardiology"]], window=2)
    # weight of ("ecg monitor", "cardiology") averages w(ecg,cardiology) and
    # w(monitor,cardiology) = (1/1 + 1/1) / 2
    assert pair_weight(model, "ecg monitor", "cardiology") == 1.0


def test_pair_weight_oov_token_is_zero():
    model = build_cooccurrence([["a", "b"]], window=1)
    assert pair_weight(model, "ghost", "b") == 0.0


def test_bond_trust_component_hand_summed():
    corpus = [
        ["u1", "v1"], ["u1", "pad"],                     # w(u1,v1) = 1/2
        ["u2", "v2"],                                     # w(u2,v2) = 1
        ["u3", "v3"], ["u3", "p"], ["u3", "q"], ["u3", "r"],  # w(u3,v3) = 1/4
    ]
    model = build_cooccurrence(corpus, window=1)
    pairs = [
        AlignedPair(("a", "u1"), ("b", "v1"), cosine=0.9),   # sim 1
        AlignedPair(("a", "u2"), ("b", "v2"), cosine=0.5),   # sim 0
        AlignedPair(("a", "u3"), ("b", "v3"), cosine=0.8),   # sim 1
    ]
    component = bond_trust_component(pairs, model, ScoringConfig(cosine_threshold=0.7))
    assert component.raw == pytest.approx(0.5 + 0.25, abs=1e-12)
    assert component.weight_sum == pytest.approx(1.75, abs=1e-12)


def test_bond_trust_component_bounds_and_errors():
    model = build_cooccurrence([["x", "y"]], window=1)
    pairs = [AlignedPair(("a", "x"), ("b", "y"), cosine=1.0)] * 3
    component = bond_trust_component(pairs, model, ScoringConfig())
    assert component.raw == pytest.approx(3.0)  # all weights 1, all sims 1 -> pair count
    zero = bond_trust_component(
        [AlignedPair(("a", "x"), ("b", "y"), cosine=0.0)], model, ScoringConfig()
    )
    assert zero.raw == 0.0
    with pytest.raises(ScoringError):
        bond_trust_component([], model, ScoringConfig())


def test_component_ratio_invariant_under_duplication():
    model = build_cooccurrence([["x", "y"], ["x", "pad"]], window=1)
    pairs = [
        AlignedPair(("a", "x"), ("b", "y"), cosine=0.9),
        AlignedPair(("a", "pad"), ("b", "x"), cosine=0.2),
    ]
    once = bond_trust_component(pairs, model, ScoringConfig())
    twice = bond_trust_component(pairs * 2, model, ScoringConfig())
    assert once.ratio == pytest.approx(twice.ratio, abs=1e-12)


# --- softmax and aggregation ------------------------------------------------------

def test_softmax_symmetry_and_zero():
    for c in (0.0, 1.5, -2.0):
        assert softmax_normalize((c, c, c)) == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-12)


def test_softmax_worked_example():
    exps = [math.exp(1.0), math.exp(2.0), math.exp(3.0)]
    expected = tuple(e / sum(exps) for e in exps)
    got = softmax_normalize((1.0, 2.0, 3.0))
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx((0.090031, 0.244728, 0.665241), abs=1e-6)


@given(st.tuples(*[st.floats(-50, 50)] * 3))
def test_softmax_sums_to_one(components):
    btn = softmax_normalize(components)
    assert sum(btn) == pytest.approx(1.0, abs=1e-9)


@given(st.tuples(*[st.floats(-15, 15)] * 3))
def test_softmax_open_interval_on_bounded_components(components):
    # components are weighted pair-match sums, bounded by attribute counts;
    # spreads beyond ~37 would saturate to exactly 1.0 in binary floats
    btn = softmax_normalize(components)
    assert all(0.0 < b < 1.0 for b in btn)


def test_bt_a_paper_literal_is_exactly_one():
    rng = Xoshiro256StarStar(1)
    for _ in range(200):
        raw = tuple(rng.random() * 5 for _ in range(3))
        btn = softmax_normalize(raw)
        assert bt_a_aggregate(btn, raw, (1.0, 1.0, 1.0), "paper-literal") == 1.0


def test_bt_a_normalized_cases():
    btn = softmax_normalize((0.0, 0.0, 0.0))
    assert bt_a_aggregate(btn, (0.0, 0.0, 0.0), (1.0, 1.0, 1.0), "normalized") == 0.0
    raw, ws = (1.5, 2.0, 0.5), (3.0, 2.0, 1.0)
    expected = (0.5 + 1.0 + 0.5) / 3
    assert bt_a_aggregate(softmax_normalize(raw), raw, ws, "normalized") == pytest.approx(expected, abs=1e-12)


def test_bt_a_normalized_zero_weight_sum_errors():
    with pytest.raises(ScoringError) as err:
        bt_a_aggregate((1 / 3,) * 3, (0.0, 0.0, 0.0), (1.0, 0.0, 1.0), "normalized")
    assert "weight sum" in str(err.value)


# --- report score -------------------------------------------------------------------

def oracle_bt_b(candidate_tokens, reference_token_lists, n):
    """Independent n-gram oracle: plain dict counting, no shared code."""
    if not reference_token_lists or len(candidate_tokens) < n or not candidate_tokens:
        return 0.0
    product = 1.0
    for order in range(1, n + 1):
        cand = {}
        for i in range(len(candidate_tokens) - order + 1):
            gram = tuple(candidate_tokens[i : i + order])
            cand[gram] = cand.get(gram, 0) + 1
        clipped = 0
        for gram, count in cand.items():
            best = 0
            for ref in reference_token_lists:
                seen = 0
                for i in range(len(ref) - order + 1):
                    if tuple(ref[i : i + order]) == gram:
                        seen += 1
                best = max(best, seen)
            clipped += min(count, best)
        total = sum(cand.values())
        if clipped == 0:
            return 0.0
        product *= clipped / total
    out_len = len(candidate_tokens)
    ref_len = min((len(r) for r in reference_token_lists), key=lambda rl: (abs(rl - out_len), rl))
    return min(1.0, math.exp(1.0 - ref_len / out_len)) * product ** (1.0 / n)


def test_bt_b_identity_is_one():
    text = "the quick brown fox jumps over the lazy dog"
    assert bt_b_score(text, [text], 4) == pytest.approx(1.0, abs=1e-12)


def test_bt_b_no_history_is_zero():
    assert bt_b_score("anything at all here", [], 4) == 0.0


def test_bt_b_worked_example_against_oracle():
    got = bt_b_score("the cat sat", ["the cat sat down"], 2)
    expected = math.exp(1.0 - 4.0 / 3.0) * math.sqrt((3 / 3) * (2 / 2))
    assert got == pytest.approx(expected, abs=1e-9)
    assert got == pytest.approx(math.exp(-1 / 3), abs=1e-9)
    assert got == pytest.approx(oracle_bt_b(["the", "cat", "sat"], [["the", "cat", "sat", "down"]], 2), abs=1e-12)


def test_bt_b_zero_when_any_precision_zero():
    # all unigrams match but no bigram does
    assert bt_b_score("alpha beta", ["alpha gamma beta"], 2) == 0.0


def test_bt_b_candidate_shorter_than_n():
    assert bt_b_score("two words", ["two words"], 4) == 0.0


def test_bt_b_empty_candidate():
    assert bt_b_score("", ["some history"], 2) == 0.0


def test_bt_b_closest_reference_length_ties_to_shorter():
    # candidate has 3 tokens; refs of length 2 and 4 are equally close -> use 2
    got = bt_b_score("a b c", ["a b", "a b c d"], 1)
    assert got == pytest.approx(min(1.0, math.exp(1 - 2 / 3)) * 1.0, abs=1e-12)


@given(
    st.lists(st.sampled_from("abcde"), min_size=1, max_size=12),
    st.lists(st.lists(st.sampled_from("abcde"), min_size=1, max_size=12), min_size=1, max_size=3),
)
@settings(deadline=None)
def test_bt_b_matches_oracle_and_bounded(cand, refs):
    candidate = " ".join(cand)
    references = [" ".join(r) for r in refs]
    got = bt_b_score(candidate, references, 2)
    assert 0.0 <= got <= 1.0
    assert got == pytest.approx(oracle_bt_b(cand, refs, 2), abs=1e-12)


def test_ngram_precision_single_order():
    assert ngram_precision("the cat sat", ["the cat sat down"], 1) == 1.0
    assert ngram_precision("the cat sat", ["the dog sat down"], 1) == pytest.approx(2 / 3)
    assert ngram_precision("a b", ["c d"], 3) == 0.0  # no trigrams on either side
    assert ngram_precision("a a a", ["a"], 1) == pytest.approx(1 / 3)  # clipping


# --- bond trust mean -----------------------------------------------------------------

def test_bond_trust_values():
    assert bond_trust(1.0, 1.0) == 1.0
    assert bond_trust(0.0, 0.0) == 0.0
    assert bond_trust(0.9, 0.5) == pytest.approx(0.7, abs=1e-15)


def test_bond_trust_symmetric_and_range_checked():
    assert bond_trust(0.25, 0.75) == bond_trust(0.75, 0.25)
    with pytest.raises(ScoringError):
        bond_trust(1.2, 0.0)


# --- full pipeline --------------------------------------------------------------------

def _pipeline_fixture():
    # within-record co-occurrence, one document per record
    corpus = [
        ["cardiology", "heart", "ecg", "monitor", "rhythm", "report"],
        ["cardiology", "heart", "telemetry", "unit", "rhythm", "report"],
        ["dermatology", "skin", "dermatoscope", "probe", "lesion", "report"],
        ["dermatology", "skin", "lamp", "probe", "lesion", "report"],
    ] * 3
    model = build_cooccurrence(corpus, window=8)
    store = derive_embeddings_from_cooccurrence(model)
    return store, model


def test_bond_scores_identical_triple_perfect_history():
    corpus = [["alpha", "beta", "alpha", "beta"]] * 2
    model = build_cooccurrence(corpus, window=3)
    store = derive_embeddings_from_cooccurrence(model)
    attrs = (("first", "alpha"), ("second", "beta"))
    triple = AttributeTriple(user=attrs, device=attrs, output=attrs)
    report = "alpha beta alpha beta procedure complete"
    bond = bond_scores(triple, [report], report, store, model, ScoringConfig())
    assert bond.bt_a == pytest.approx(1.0, abs=1e-12)
    assert bond.bt_b == pytest.approx(1.0, abs=1e-12)
    assert bond.bt == pytest.approx(1.0, abs=1e-12)


def test_bond_scores_disjoint_no_history_is_zero():
    # values co-occur pairwise (weights exist) but their vectors diverge
    corpus = [["alpha", "beta"], ["alpha", "gamma"], ["beta", "gamma"]]
    model = build_cooccurrence(corpus, window=1)
    store = derive_embeddings_from_cooccurrence(model)
    triple = AttributeTriple(
        user=(("n", "alpha"),), device=(("n", "beta"),), output=(("n", "gamma"),)
    )
    bond = bond_scores(triple, [], "alpha beta gamma report", store, model, ScoringConfig())
    assert bond.bt_a == 0.0
    assert bond.bt_b == 0.0
    assert bond.bt == 0.0


def test_bond_scores_paper_literal_mode_degenerates_to_one():
    store, model = _pipeline_fixture()
    triple = AttributeTriple(
        user=(("speciality", "cardiology"), ("focus", "heart")),
        device=(("model", "ecg monitor"), ("unit", "telemetry unit")),
        output=(("category", "rhythm report"),),
    )
    config = ScoringConfig(bt_a_mode="paper-literal")
    bond = bond_scores(triple, ["x"], "x", store, model, config)
    assert bond.bt_a == 1.0
    assert bond.mode == "paper-literal"


def test_bond_scores_warns_on_oov_attributes():
    store, model = _pipeline_fixture()
    triple = AttributeTriple(
        user=(("speciality", "cardiology"), ("id", "ZZ-9931")),
        device=(("model", "ecg monitor"),),
        output=(("category", "rhythm report"),),
    )
    bond = bond_scores(triple, ["x"], "x", store, model, ScoringConfig())
    assert any("no in-vocabulary token" in w for w in bond.warnings)


def test_bond_scores_error_carries_stage():
    store, model = _pipeline_fixture()
    triple = AttributeTriple(
        user=(("id", "QQQQ"),), device=(("model", "ecg monitor"),), output=(("c", "rhythm report"),)
    )
    with pytest.raises(ScoringError) as err:
        bond_scores(triple, [], "x", store, model, ScoringConfig())
    assert err.value.stage.startswith("align:user-")


def test_full_pipeline_matches_independent_recomputation():
    """Brute-force re-derivation of score_request from raw counts/vectors."""
    store, model = _pipeline_fixture()
    config = ScoringConfig()
    triple = AttributeTriple(
        user=(
            ("speciality", "cardiology"),
            ("focus", "heart rhythm"),
            ("team", "telemetry"),
        ),
        device=(
            ("model", "ecg monitor"),
            ("unit", "telemetry unit"),
            ("site", "skin probe"),
        ),
        output=(
            ("category", "rhythm report"),
            ("summary", "lesion report"),
        ),
    )
    history = ["cardiology rhythm report stored for monitor review after ecg capture"]
    candidate = "cardiology rhythm report stored for monitor review after ecg capture"
    checks = MicroserviceChecks(True, False, True, True)
    scores = score_request(
        triple, history, candidate, checks, TABLE_FACTORS, store, model, config
    )

    # -- independent recomputation, pure python ----------------------------
    def embed(value):
        vecs = [list(store.vector(t)) for t in value.split() if t in store]
        if not vecs:
            return None
        return [sum(col) / len(vecs) for col in zip(*vecs)]

    def cos(u, v):
        dot = sum(a * b for a, b in zip(u, v))
        return dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))

    def greedy(left, right):
        lv = [(i, a, embed(a[1])) for i, a in enumerate(left)]
        rv = [(j, b, embed(b[1])) for j, b in enumerate(right)]
        lv = [x for x in lv if x[2] is not None]
        rv = [x for x in rv if x[2] is not None]
        cands = sorted(
            ((-cos(le[2], re[2]), le[0], re[0], le[1], re[1]) for le in lv for re in rv)
        )
        used_l, used_r, pairs = set(), set(), []
        for negc, i, j, a, b in cands:
            if i in used_l or j in used_r:
                continue
            used_l.add(i)
            used_r.add(j)
            pairs.append((a, b, -negc))
        return pairs

    def weight(lval, rval):
        lt = [t for t in lval.split() if t in model.token_counts]
        rt = [t for t in rval.split() if t in model.token_counts]
        if not lt or not rt:
            return 0.0
        total = 0.0
        for a in lt:
            for b in rt:
                total += min(1.0, model.pair_counts.get((a, b), 0) / model.token_counts[a])
        return total / (len(lt) * len(rt))

    raws, sums = [], []
    for left, right in ((triple.user, triple.device), (triple.user, triple.output), (triple.device, triple.output)):
        raw = ws = 0.0
        for a, b, c in greedy(list(left), list(right)):
            w = weight(a[1], b[1])
            raw += w * (1 if c >= config.cosine_threshold else 0)
            ws += w
        raws.append(raw)
        sums.append(ws)

    exps = [math.exp(r - max(raws)) for r in raws]
    btn = [e / sum(exps) for e in exps]
    bt_a = sum(r / w for r, w in zip(raws, sums)) / 3
    bt_b = oracle_bt_b(candidate.split(), [h.split() for h in history], config.ngram_order)
    bt = (min(1.0, max(0.0, bt_a)) + bt_b) / 2

    assert scores.ct == pytest.approx(0.3 + 0.2 + 0.1, abs=1e-12)
    assert list(scores.bond.bt_a_components) == pytest.approx(raws, abs=1e-9)
    assert list(scores.bond.weight_sums) == pytest.approx(sums, abs=1e-9)
    assert list(scores.bond.btn) == pytest.approx(btn, abs=1e-9)
    assert scores.bond.bt_a == pytest.approx(bt_a, abs=1e-9)
    assert scores.bond.bt_b == pytest.approx(bt_b, abs=1e-9)
    assert scores.bond.bt == pytest.approx(bt, abs=1e-9)
