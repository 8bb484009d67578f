import json
import random

import pytest

import helpers
from sibmatch.model import (
    DUMMY_ID,
    InstanceError,
    Matching,
    MatchingError,
    dump_instance,
    dump_matching,
    family_assignment,
    instance_to_dict,
    is_feasible,
    is_individually_rational,
    load_instance,
    load_matching,
)

ROTATION_JSON = {
    "families": [
        {"id": "f1", "children": ["c1", "c2"], "preferences": [["d1", "d2"]]},
        {"id": "f2", "children": ["c3", "c4"], "preferences": [["d2", "d3"]]},
        {"id": "f3", "children": ["c5", "c6"], "preferences": [["d3", "d1"]]},
    ],
    "daycares": [
        {"id": "d0", "quota": None, "priority": []},
        {"id": "d1", "quota": 1, "priority": ["c1", "c6", "c3", "c2", "c5", "c4"]},
        {"id": "d2", "quota": 1, "priority": ["c1", "c6", "c3", "c2", "c5", "c4"]},
        {"id": "d3", "quota": 1, "priority": ["c1", "c6", "c3", "c2", "c5", "c4"]},
    ],
    "meta": {},
}


def test_load_rotation_market_counts():
    inst = load_instance(json.dumps(ROTATION_JSON))
    assert len(inst.families) == 3
    assert len(inst.daycares) == 4
    assert all(d.quota == 1 for d in inst.daycares if d.id != DUMMY_ID)
    assert inst.dummy.unlimited


def test_load_minimal_instance():
    inst = load_instance(
        {
            "families": [{"id": "f1", "children": ["c1"], "preferences": []}],
            "daycares": [
                {"id": "d0", "quota": None, "priority": []},
                {"id": "d1", "quota": 1, "priority": ["c1"]},
            ],
        }
    )
    assert inst.num_children == 1
    assert inst.singleton_families == ("f1",)
    assert inst.sibling_families == ()


def test_load_dangling_daycare_reference():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["families"][0]["preferences"] = [["d9", "d2"]]
    with pytest.raises(InstanceError, match=r"families\[f1\].preferences\[0\].*d9"):
        load_instance(bad)


def test_load_missing_dummy():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["daycares"] = bad["daycares"][1:]
    with pytest.raises(InstanceError, match="d0"):
        load_instance(bad)


def test_duplicate_ids_rejected():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["families"].append(bad["families"][0])
    with pytest.raises(InstanceError, match="duplicate"):
        load_instance(bad)

    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["daycares"].append(bad["daycares"][1])
    with pytest.raises(InstanceError, match="duplicate"):
        load_instance(bad)


def test_child_in_two_families_rejected():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["families"][1]["children"] = ["c1", "c4"]
    with pytest.raises(InstanceError, match="c1"):
        load_instance(bad)


def test_tuple_length_mismatch_rejected():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["families"][0]["preferences"] = [["d1"]]
    with pytest.raises(InstanceError, match="length"):
        load_instance(bad)


def test_duplicate_preference_tuple_rejected():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["families"][0]["preferences"] = [["d1", "d2"], ["d1", "d2"]]
    with pytest.raises(InstanceError, match="duplicate tuple"):
        load_instance(bad)


def test_unlimited_quota_only_for_dummy():
    bad = json.loads(json.dumps(ROTATION_JSON))
    bad["daycares"][1]["quota"] = None
    with pytest.raises(InstanceError, match="unlimited"):
        load_instance(bad)


def test_roundtrip_golden_and_random():
    instances = [
        helpers.seat_transfer_market(),
        helpers.rotation_market(),
        helpers.restart_success_market(),
    ]
    rng = random.Random(42)
    instances += [helpers.random_instance(rng) for _ in range(100)]
    for inst in instances:
        twin = load_instance(dump_instance(inst))
        assert twin.families == inst.families
        assert twin.daycares == inst.daycares
        assert twin.meta == inst.meta
        assert dump_instance(twin) == dump_instance(inst)


def test_matching_roundtrip(rotation_mkt):
    m = Matching(rotation_mkt, {"c1": "d1", "c2": "d2", "c3": "d0", "c4": "d0", "c5": "d0", "c6": "d0"})
    again = load_matching(dump_matching(m), rotation_mkt)
    assert again == m
    assert again.roster("d1") == frozenset({"c1"})


def test_matching_requires_totality(rotation_mkt):
    with pytest.raises(MatchingError, match="missing"):
        Matching(rotation_mkt, {"c1": "d1"})
    with pytest.raises(MatchingError, match="unknown child"):
        load_matching(json.dumps({"assignment": {"cX": "d1"}}), rotation_mkt)


def test_family_assignment_matched_families(restart_mkt):
    m = Matching(
        restart_mkt,
        {"c1": "d1", "c2": "d2", "c3": "d0", "c4": "d0", "c5": "d3", "c6": "d4"},
    )
    assert family_assignment(m, restart_mkt.families_by_id["f1"]) == ("d1", "d2")
    assert family_assignment(m, restart_mkt.families_by_id["f3"]) == ("d3", "d4")


def test_family_assignment_unmatched(rotation_mkt):
    m = Matching.all_unmatched(rotation_mkt)
    assert family_assignment(m, rotation_mkt.families_by_id["f1"]) == ("d0", "d0")


def test_family_assignment_second_family(rotation_mkt):
    mu2 = Matching(
        rotation_mkt,
        {"c1": "d0", "c2": "d0", "c3": "d2", "c4": "d3", "c5": "d0", "c6": "d0"},
    )
    assert family_assignment(mu2, rotation_mkt.families_by_id["f2"]) == ("d2", "d3")


def test_family_assignment_respects_sibling_order():
    rng = random.Random(7)
    for _ in range(50):
        inst = helpers.random_instance(rng)
        m = helpers.random_feasible_ir_matching(rng, inst)
        for fam in inst.families:
            tup = family_assignment(m, fam)
            assert tup == tuple(m[c] for c in fam.children)


def test_is_feasible_cases(rotation_mkt):
    mu1 = Matching(
        rotation_mkt,
        {"c1": "d1", "c2": "d2", "c3": "d0", "c4": "d0", "c5": "d0", "c6": "d0"},
    )
    assert is_feasible(rotation_mkt, mu1)
    crowded = Matching(
        rotation_mkt,
        {"c1": "d1", "c2": "d1", "c3": "d0", "c4": "d0", "c5": "d0", "c6": "d0"},
    )
    assert not is_feasible(rotation_mkt, crowded)
    assert is_feasible(rotation_mkt, Matching.all_unmatched(rotation_mkt))


def test_is_individually_rational_cases(rotation_mkt):
    mu3 = Matching(
        rotation_mkt,
        {"c1": "d0", "c2": "d0", "c3": "d0", "c4": "d0", "c5": "d3", "c6": "d1"},
    )
    assert is_individually_rational(rotation_mkt, mu3)
    unlisted = Matching(
        rotation_mkt,
        {"c1": "d2", "c2": "d1", "c3": "d0", "c4": "d0", "c5": "d0", "c6": "d0"},
    )
    assert not is_individually_rational(rotation_mkt, unlisted)


def test_unacceptable_child_breaks_ir():
    inst = helpers.make_instance(
        [("f1", ["c1"], [["d1"]])],
        [("d1", 1, [])],  # c1 not ranked: unacceptable
    )
    m = Matching(inst, {"c1": "d1"})
    assert not is_individually_rational(inst, m)


def test_all_unmatched_always_feasible_and_ir():
    rng = random.Random(11)
    for _ in range(50):
        inst = helpers.random_instance(rng)
        m = Matching.all_unmatched(inst)
        assert is_feasible(inst, m)
        assert is_individually_rational(inst, m)


def test_tuple_rank_ordering(seat_transfer_mkt):
    fam = seat_transfer_mkt.families_by_id["f1"]
    assert fam.tuple_rank(("d1", "d2")) == 0
    assert fam.tuple_rank(("d2", "d0")) == 1
    assert fam.tuple_rank(("d0", "d0")) == 2  # all-dummy after listed
    assert fam.tuple_rank(("d2", "d1")) == 3  # unlisted after all-dummy
    assert fam.prefers(("d1", "d2"), ("d2", "d0"))
    assert fam.prefers(("d0", "d0"), ("d2", "d1"))


def test_instance_to_dict_stable():
    inst = load_instance(json.dumps(ROTATION_JSON))
    assert instance_to_dict(inst)["families"][0]["id"] == "f1"
    assert dump_instance(inst) == dump_instance(load_instance(dump_instance(inst)))
