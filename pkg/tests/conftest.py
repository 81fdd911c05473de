"""Shared fixtures: a small music/sport ontology, the two-rule-VP grammar the
step-by-step parser examples use, and a pinned select model reproducing the
hand-set predictive tables."""

from __future__ import annotations

import pytest

from genparse import grammar as grammar_mod
from genparse import ontology
from genparse.sets import SlotSet

TINY_KB_TEXT = """\
# desk-scale fixture ontology
category sport
category athlete
category musician
category instrument
category reptile
category color
category insect
concept sport:tennis
concept sport:swimming
concept musician:chopin
concept instrument:piano
concept athlete:agassi
concept athlete:federer
concept musician:rachmaninoff
concept reptile:frog
concept color:green
concept insect:fly
relation athlete_plays_sport athlete sport
relation musician_plays_inst musician instrument
relation has_color reptile color
relation eats_insect reptile insect
belief athlete_plays_sport athlete:federer sport:tennis
belief musician_plays_inst musician:chopin instrument:piano
belief has_color reptile:frog color:green
refer Chopin musician:chopin
refer tennis sport:tennis
refer Andre Agassi athlete:agassi
"""

WALKTHROUGH_GRAMMAR = """\
nonterminal S features relation_index
nonterminal VP features relation_index arg2_index
nonterminal V features relation_index arg2_index
nonterminal N features arg1_index
rule S -> N:select_arg1 _ VP:delete_arg1
rule VP -> V:identity _ N:select_arg2
rule VP -> V:identity
rule N -> "tennis"
rule N -> "Andre Agassi"
rule N -> "Chopin"
rule V -> "swims"
rule V -> "plays"
"""


@pytest.fixture(scope="session")
def kb():
    return ontology._load_text(TINY_KB_TEXT.splitlines())


@pytest.fixture(scope="session")
def walkthrough_grammar():
    return grammar_mod.parse_grammar_file(WALKTHROUGH_GRAMMAR)


def _cid(kb, name):
    return kb.concept_by_name(name).id


def _rid(kb, name):
    return kb.relation_by_name(name).id


def concept_value(kb, name):
    """Feature value of a present concept argument."""
    return _cid(kb, name) + 1


def walkthrough_pinned_rows(kb):
    """Hand-set select tables for the step-by-step example.

    Rows per rule are (cell, log score) with one slot set per feature level,
    non-increasing in score, partitioning each nonterminal's tree.  Rows tied
    in score are ordered so the music reading resolves first.
    """
    aps = _rid(kb, "athlete_plays_sport")
    mpi = _rid(kb, "musician_plays_inst")
    tennis = concept_value(kb, "sport:tennis")
    swimming = concept_value(kb, "sport:swimming")
    piano = concept_value(kb, "instrument:piano")
    chopin = concept_value(kb, "musician:chopin")
    one = SlotSet.singleton
    wild = SlotSet.wildcard

    n_rows = {
        0: [([one(tennis)], -2.0),
            ([wild((tennis,))], -8.0)],
        1: [([one(concept_value(kb, "athlete:agassi"))], -2.0),
            ([wild((concept_value(kb, "athlete:agassi"),))], -8.0)],
        2: [([one(chopin)], -2.0),
            ([one(swimming)], -8.0),
            ([one(tennis)], -8.0),
            ([one(piano)], -8.0),
            ([wild((chopin, swimming, tennis, piano))], -8.0)],
    }
    v_rows = {
        0: [([one(aps), one(swimming)], -2.0),
            ([one(aps), wild((swimming,))], -8.0),
            ([one(mpi), wild()], -8.0)],
        1: [([one(mpi), wild((piano,))], -2.0),
            ([one(mpi), one(piano)], -2.0),
            ([one(aps), wild((tennis, swimming, piano))], -2.0),
            ([one(aps), one(tennis)], -2.0),
            ([one(aps), one(swimming)], -8.0),
            ([one(aps), one(piano)], -8.0)],
    }
    vp_rows = {
        0: [([wild(), wild()], -4.0)],
        1: [([one(mpi), wild((piano,))], -4.0),
            ([one(aps), wild((swimming, piano, tennis))], -4.0),
            ([one(aps), one(swimming)], -4.0),
            ([one(mpi), one(piano)], -5.0),
            ([one(aps), one(tennis)], -5.0),
            ([one(aps), one(piano)], -8.0)],
    }
    s_rows = {0: [([wild()], 0.0)]}
    return {"S": s_rows, "VP": vp_rows, "V": v_rows, "N": n_rows}


@pytest.fixture(scope="session")
def walkthrough_model(walkthrough_grammar, kb):
    return grammar_mod.pinned(walkthrough_grammar, kb,
                              walkthrough_pinned_rows(kb))
