import itertools

import numpy as np
import pytest

from genparse import semantics
from genparse.semantics import (ABSENT, Feature, SemanticsError, Statement,
                                Tense, TransformOp, apply_op, feature_path,
                                intersect, partition_cell, preimage,
                                statement_in)
from genparse.sets import SlotSet

ALL_OPS = list(TransformOp)


def rel_stmt(kb, rel, a1, a2, tense=Tense.NONE):
    def arg(v):
        if v is ABSENT or isinstance(v, int):
            return v
        return kb.concept_by_name(v).id
    return Statement(kb.relation_by_name(rel).id, arg(a1), arg(a2), tense)


def enumerate_defined(kb, tenses=(Tense.NONE,)):
    """All statements of every kind over the fixture ontology."""
    for c in range(kb.num_concepts):
        yield Statement.of_concept(c)
    for t in Tense:
        yield Statement.of_tense(t)
    args = [ABSENT] + list(range(kb.num_concepts))
    for r in range(kb.num_relations):
        for a1 in args:
            for a2 in args:
                for t in tenses:
                    yield Statement(r, a1, a2, t)


class TestApply:
    def test_select_arg1_returns_subject(self, kb):
        x = rel_stmt(kb, "has_color", "reptile:frog", "color:green")
        assert apply_op(TransformOp.SELECT_ARG1, x) == Statement.of_concept(
            kb.concept_by_name("reptile:frog").id)

    def test_identity_everywhere(self, kb):
        for x in itertools.islice(enumerate_defined(kb), 200):
            assert apply_op(TransformOp.IDENTITY, x) == x

    def test_delete_arg1_removes_subject_slot(self, kb):
        x = rel_stmt(kb, "athlete_plays_sport", "athlete:federer",
                     "sport:tennis")
        deleted = apply_op(TransformOp.DELETE_ARG1, x)
        assert deleted.arg1 == ABSENT
        assert deleted.arg2 == x.arg2 and deleted.relation == x.relation

    def test_undefined_op_raises(self, kb):
        gone = rel_stmt(kb, "athlete_plays_sport", "athlete:federer", ABSENT)
        with pytest.raises(SemanticsError):
            apply_op(TransformOp.SELECT_ARG2, gone)
        with pytest.raises(SemanticsError):
            apply_op(TransformOp.SELECT_ARG1, Statement.of_tense(Tense.PAST))

    def test_select_tense(self, kb):
        x = rel_stmt(kb, "athlete_plays_sport", "athlete:federer",
                     "sport:tennis", Tense.PAST)
        assert apply_op(TransformOp.SELECT_TENSE, x) == Statement.of_tense(
            Tense.PAST)


def op_defined(op, x) -> bool:
    try:
        apply_op(op, x)
        return True
    except SemanticsError:
        return False


class TestPreimage:
    def test_select_arg1_preimage_contains_statements_sharing_subject(self, kb):
        frog = Statement.of_concept(kb.concept_by_name("reptile:frog").id)
        pre = preimage(TransformOp.SELECT_ARG1, frog, kb)
        assert statement_in(
            rel_stmt(kb, "has_color", "reptile:frog", "color:green"), pre)
        assert statement_in(
            rel_stmt(kb, "eats_insect", "reptile:frog", "insect:fly"), pre)
        assert not statement_in(
            rel_stmt(kb, "has_color", "color:green", "reptile:frog"), pre)

    def test_identity_preimage_is_singleton(self, kb):
        x = rel_stmt(kb, "athlete_plays_sport", "athlete:federer",
                     "sport:tennis")
        pre = preimage(TransformOp.IDENTITY, x, kb)
        assert list(semantics.enumerate_statements(pre, kb)) == [x]

    def test_delete_arg1_preimage_matches_enumeration(self, kb):
        image = rel_stmt(kb, "athlete_plays_sport", ABSENT, "sport:tennis")
        pre = preimage(TransformOp.DELETE_ARG1, image, kb)
        expected = {
            rel_stmt(kb, "athlete_plays_sport", c, "sport:tennis")
            for c in range(kb.num_concepts)}
        got = {x for x in semantics.enumerate_statements(pre, kb)
               if x.tense == Tense.NONE}
        assert got == expected

    def test_round_trip_membership(self, kb):
        for x in enumerate_defined(kb):
            for op in ALL_OPS:
                if op_defined(op, x):
                    image = apply_op(op, x)
                    assert statement_in(x, preimage(op, image, kb)), (op, x)

    def test_preimage_exactness_by_enumeration(self, kb):
        """x' is in the preimage of x under f exactly when f(x') == x."""
        samples = [
            (TransformOp.SELECT_ARG2,
             Statement.of_concept(kb.concept_by_name("sport:tennis").id)),
            (TransformOp.DELETE_ARG2,
             rel_stmt(kb, "athlete_plays_sport", "athlete:federer", ABSENT)),
            (TransformOp.SELECT_TENSE, Statement.of_tense(Tense.FUTURE)),
        ]
        universe = list(enumerate_defined(kb, tenses=tuple(Tense)))
        for op, target in samples:
            pre = preimage(op, target, kb)
            for x in universe:
                maps_to = op_defined(op, x) and apply_op(op, x) == target
                assert statement_in(x, pre) == maps_to, (op, x)


def random_statement_set(rng, kb):
    def slot(domain_size, allow_absent):
        wild = bool(rng.integers(0, 2))
        pool = list(range(domain_size)) + ([ABSENT] if allow_absent else [])
        size = int(rng.integers(0, 4))
        ids = frozenset(int(pool[i]) for i in
                        rng.choice(len(pool), size=size, replace=False))
        return SlotSet(wild, ids)
    comp = semantics.RelationalSet(
        slot(kb.num_relations, False), slot(kb.num_concepts, True),
        slot(kb.num_concepts, True),
        frozenset(int(t) for t in rng.choice(4, size=rng.integers(1, 4),
                                             replace=False)))
    return semantics.make_set(
        comp, concepts=slot(kb.num_concepts, False),
        bare_tenses=(int(t) for t in rng.choice(4, size=rng.integers(0, 3),
                                                replace=False)))


class TestIntersect:
    def test_walkthrough_intersection(self, kb):
        chopin = Statement.of_concept(kb.concept_by_name("musician:chopin").id)
        pre = preimage(TransformOp.SELECT_ARG1, chopin, kb)
        merged = intersect(semantics.top_set(), pre)
        comp = merged.relational
        assert comp.rel.wild and not comp.rel.ids
        assert set(comp.arg1.members_given(range(kb.num_concepts))) == {
            kb.concept_by_name("musician:chopin").id}
        assert comp.arg2.wild

    def test_idempotent_commutative_associative(self, kb):
        rng = np.random.default_rng(7)
        universe = list(enumerate_defined(kb, tenses=tuple(Tense)))
        for _ in range(40):
            a, b, c = (random_statement_set(rng, kb) for _ in range(3))
            assert intersect(a, a) == a
            ab = intersect(a, b)
            assert ab == intersect(b, a)
            abc1 = intersect(ab, c)
            abc2 = intersect(a, intersect(b, c))
            for x in universe:
                expected = (statement_in(x, a) and statement_in(x, b)
                            and statement_in(x, c))
                assert statement_in(x, abc1) == expected
                assert statement_in(x, abc2) == expected

    def test_wildcard_exclusion_against_explicit(self, kb):
        c1, c2 = 0, 1
        a = semantics.make_set(concepts=SlotSet.wildcard((c1,)))
        b = semantics.make_set(concepts=SlotSet.explicit((c1, c2)))
        merged = intersect(a, b)
        assert list(semantics.enumerate_statements(merged, kb)) == [
            Statement.of_concept(c2)]


class TestFeatures:
    def test_relation_and_arg2_path(self, kb):
        # sport:tennis is concept 0, so its argument feature value is 1.
        x = rel_stmt(kb, "athlete_plays_sport", ABSENT, "sport:tennis")
        path = feature_path((Feature.RELATION_INDEX, Feature.ARG2_INDEX), x)
        assert path == (0, 1)

    def test_empty_feature_sequence(self, kb):
        x = rel_stmt(kb, "athlete_plays_sport", "athlete:federer",
                     "sport:tennis")
        assert feature_path((), x) == ()

    def test_equivalence_classes_share_paths(self, kb):
        features = (Feature.RELATION_INDEX, Feature.ARG2_INDEX)
        a = rel_stmt(kb, "athlete_plays_sport", "athlete:federer",
                     "sport:tennis")
        b = rel_stmt(kb, "athlete_plays_sport", "athlete:agassi",
                     "sport:tennis")
        assert feature_path(features, a) == feature_path(features, b)

    def test_absent_slot_maps_to_reserved_zero(self, kb):
        x = rel_stmt(kb, "athlete_plays_sport", ABSENT, "sport:tennis")
        assert semantics.feature_value(Feature.ARG1_INDEX, x) == 0

    def test_bare_concept_indexes_itself(self, kb):
        cid = kb.concept_by_name("musician:chopin").id
        assert semantics.feature_value(
            Feature.ARG1_INDEX, Statement.of_concept(cid)) == cid + 1

    def test_undefined_feature_raises(self, kb):
        with pytest.raises(SemanticsError):
            feature_path((Feature.RELATION_INDEX,),
                         Statement.of_concept(0))


class TestPartitionCells:
    def test_cell_content(self, kb):
        features = (Feature.RELATION_INDEX, Feature.ARG2_INDEX)
        tennis = kb.concept_by_name("sport:tennis").id
        cell = partition_cell(features, (0, tennis + 1), kb)
        inside = rel_stmt(kb, "athlete_plays_sport", "athlete:agassi",
                          "sport:tennis")
        outside = rel_stmt(kb, "athlete_plays_sport", "athlete:agassi",
                           "sport:swimming")
        assert statement_in(inside, cell)
        assert statement_in(
            rel_stmt(kb, "athlete_plays_sport", ABSENT, "sport:tennis"), cell)
        assert not statement_in(outside, cell)

    def test_root_only_tree_single_cell(self, kb):
        cell = partition_cell((), (), kb)
        for x in itertools.islice(enumerate_defined(kb), 100):
            assert statement_in(x, cell)

    def test_cells_partition_the_defined_statements(self, kb):
        features = (Feature.RELATION_INDEX, Feature.ARG2_INDEX)
        cells = {}
        for r in range(kb.num_relations):
            for v in range(kb.num_concepts + 1):
                cells[(r, v)] = partition_cell(features, (r, v), kb)
        for x in enumerate_defined(kb, tenses=tuple(Tense)):
            try:
                path = feature_path(features, x)
            except SemanticsError:
                continue
            holders = [p for p, cell in cells.items()
                       if statement_in(x, cell)]
            assert holders == [path]

    def test_invalid_path_value_raises(self, kb):
        with pytest.raises(SemanticsError):
            partition_cell((Feature.RELATION_INDEX,), (99,), kb)


class TestText:
    def test_round_trip_statements(self, kb):
        cases = [
            rel_stmt(kb, "athlete_plays_sport", "athlete:federer",
                     "sport:tennis"),
            rel_stmt(kb, "athlete_plays_sport", ABSENT, "sport:tennis"),
            rel_stmt(kb, "musician_plays_inst", "musician:chopin",
                     "instrument:piano", Tense.PAST),
            Statement.of_concept(kb.concept_by_name("reptile:frog").id),
        ]
        for x in cases:
            text = semantics.format_statement(x, kb)
            assert semantics.parse_statement(text, kb) == x

    def test_set_rendering_mentions_wildcards(self, kb):
        xs = semantics.relational_set(
            SlotSet.singleton(kb.relation_by_name("musician_plays_inst").id),
            SlotSet.singleton(kb.concept_by_name("musician:chopin").id),
            SlotSet.wildcard((ABSENT,)), (Tense.NONE,))
        text = semantics.format_statement_set(xs, kb)
        assert "musician_plays_inst" in text
        assert "*" in text

    def test_unknown_names_raise(self, kb):
        with pytest.raises(SemanticsError):
            semantics.parse_statement("no_such(概念, x)", kb)
