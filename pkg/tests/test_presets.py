from collections import Counter

import pytest

from src.errors import UnknownPreset
from src.generators import hijack_target
from src.presets import DDOS_VARIANTS, DEFAULT_SEED, describe, preset, preset_names
from src.scenario import AttackType, attack_windows, flow_matrix


def test_registry_lists_every_preset():
    names = preset_names()
    assert len(names) == 13
    assert {"fig2a-dos", "fig2c-bruteforce", "fig2d-heartbleed", "fig3-large-ddos",
            "fig4-large-ddos", "benign-baseline"} <= set(names)
    assert sum(n.startswith("fig2b-ddos-") for n in names) == len(DDOS_VARIANTS) == 7
    assert all(describe(n) for n in names)


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset("fig9-nope")


def test_seed_override():
    assert preset("fig2a-dos").seed == DEFAULT_SEED
    assert preset("fig2a-dos", 5).seed == 5


@pytest.mark.parametrize("name, pairs, victims", [("fig3-large-ddos", 14, 6), ("fig4-large-ddos", 26, 12)])
def test_large_ddos_flow_matrix(name, pairs, victims):
    m = flow_matrix(preset(name))
    assert len(m) == pairs
    assert len({v for _, v, _ in m}) == victims
    assert len({a for a, _, _ in m}) == pairs  # one victim per attacker pod


def test_large_ddos_attacker_placement():
    s = preset("fig3-large-ddos")
    nodes = Counter(s.pod(a).node for a, _, _ in flow_matrix(s))
    assert nodes == {"wn1": 6, "wn2": 6, "master": 2}


@pytest.mark.parametrize("variant", list(DDOS_VARIANTS))
def test_ddos_variants_shape(variant):
    s = preset(f"fig2b-ddos-{variant}")
    m = flow_matrix(s)
    assert len(m) == 6
    assert {t for _, _, t in m} == {DDOS_VARIANTS[variant]}
    assert len({v for _, v, _ in m}) == 2
    assert Counter(s.pod(a).node for a, _, _ in m) == {"master": 2, "wn1": 2, "wn2": 2}


def test_tcpseq_every_attack_has_a_session_to_hijack():
    s = preset("fig2b-ddos-tcpseq")
    hijacks = [w for w in attack_windows(s) if w.spec.attack_type is AttackType.TCP_SEQ_PREDICTION]
    assert len(hijacks) == 6
    sports = set()
    for w in hijacks:
        plan = hijack_target(s, w.index)
        assert plan is not None
        assert plan.server == w.spec.victim
        assert plan.sport == w.spec.params["hijack_sport"]
        sports.add(plan.sport)
    assert len(sports) == 6
    benign = flow_matrix(s, include_benign=True) - flow_matrix(s)
    assert {t for _, _, t in benign} == {AttackType.BENIGN}
