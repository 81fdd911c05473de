"""Desk-scale end-to-end fixtures: a 20-concept/3-relation ontology with a
word-aligned grammar, plus the verb-morphology pair of grammars."""

from __future__ import annotations

from genparse import grammar as grammar_mod
from genparse import ontology
from genparse.grammar import CorpusRecord, parse_tree_text
from genparse.semantics import Statement, Tense

ROUNDTRIP_KB = """\
category person
category food
category sport
category city
concept person:ada
concept person:grace
concept person:alan
concept person:mary
concept person:noor
concept person:ravi
concept food:rice
concept food:kale
concept food:bread
concept food:soup
concept food:figs
concept sport:tennis
concept sport:chess
concept sport:rugby
concept sport:golf
concept city:rome
concept city:oslo
concept city:kyoto
concept city:lima
concept city:cairo
relation eats person food
relation plays_game person sport
relation visits person city
belief eats person:ada food:rice
belief eats person:mary food:soup
belief plays_game person:grace sport:chess
belief plays_game person:ravi sport:golf
belief visits person:alan city:rome
belief visits person:noor city:kyoto
"""

NOUNS = {
    "person:ada": "Ada", "person:grace": "Grace", "person:alan": "Alan",
    "person:mary": "Mary", "person:noor": "Noor", "person:ravi": "Ravi",
    "food:rice": "rice", "food:kale": "kale", "food:bread": "bread",
    "food:soup": "soup", "food:figs": "figs",
    "sport:tennis": "tennis", "sport:chess": "chess", "sport:rugby": "rugby",
    "sport:golf": "golf",
    "city:rome": "Rome", "city:oslo": "Oslo", "city:kyoto": "Kyoto",
    "city:lima": "Lima", "city:cairo": "Cairo",
}

VERBS = {"eats": "eats", "plays_game": "plays", "visits": "visits"}


def roundtrip_kb():
    return ontology._load_text(ROUNDTRIP_KB.splitlines())


def roundtrip_grammar():
    noun_rules = "\n".join(f'rule N -> "{word}"'
                           for word in NOUNS.values())
    verb_rules = "\n".join(f'rule V -> "{word}"'
                           for word in VERBS.values())
    return grammar_mod.parse_grammar_file(f"""\
nonterminal S features relation_index
nonterminal VP features relation_index arg2_index
nonterminal V features relation_index
nonterminal N features arg1_index
rule S -> N:select_arg1 _ VP:delete_arg1
rule VP -> V:identity _ N:select_arg2
rule VP -> V:identity
{verb_rules}
{noun_rules}
""")


def _rule_index(grammar, nt, word):
    for rule in grammar.rules_of(nt):
        if rule.rhs and rule.rhs[0].terminal and rule.rhs[0].text == word:
            return rule.rule_id
    raise KeyError(word)


def seed_corpus(grammar, kb, repeats: int = 2):
    """Canonical word-aligned records for every type-correct statement."""
    records = []
    for relation in kb.relations:
        verb = VERBS[relation.name]
        for a1 in sorted(kb.category_members[relation.domain]):
            for a2 in sorted(kb.category_members[relation.range]):
                subject = NOUNS[kb.concepts[a1].name]
                obj = NOUNS[kb.concepts[a2].name]
                sentence = f"{subject} {verb} {obj}"
                tree_text = (
                    f'(S:0 (N:{_rule_index(grammar, "N", subject)} "{subject}")'
                    f' " " (VP:0 (V:{_rule_index(grammar, "V", verb)} "{verb}")'
                    f' " " (N:{_rule_index(grammar, "N", obj)} "{obj}")))')
                records.append(CorpusRecord(
                    sentence, Statement(relation.id, a1, a2, Tense.NONE),
                    parse_tree_text(tree_text, grammar, sentence)))
    return records * repeats


# ---------------------------------------------------------------------------
# Verb morphology fixtures


MORPH_KB = """\
category person
category food
category sport
category city
concept person:ada
concept person:grace
concept person:alan
concept food:rice
concept food:kale
concept food:soup
concept sport:tennis
concept sport:chess
concept sport:golf
concept city:rome
concept city:oslo
concept city:lima
relation eats person food
relation plays_game person sport
relation visits person city
relation tours person city
"""

MORPH_VERB_ROOTS = {"eats": "munch", "plays_game": "play",
                    "visits": "visit", "tours": "tour"}
# Half the verbs are trained in the present tense only; their past forms are
# held out.  The two held-out relations share argument typing, so only the
# verb itself can tell them apart.
PRESENT_ONLY_RELATIONS = ("visits", "tours")

MORPH_NOUNS = {
    "person:ada": "Ada", "person:grace": "Grace", "person:alan": "Alan",
    "food:rice": "rice", "food:kale": "kale", "food:soup": "soup",
    "sport:tennis": "tennis", "sport:chess": "chess", "sport:golf": "golf",
    "city:rome": "Rome", "city:oslo": "Oslo", "city:lima": "Lima",
}

AFFIXES = {Tense.PRESENT: "s", Tense.PAST: "ed"}


def morph_kb():
    return ontology._load_text(MORPH_KB.splitlines())


def morph_grammar():
    noun_rules = "\n".join(f'rule N -> "{w}"' for w in MORPH_NOUNS.values())
    root_rules = "\n".join(f'rule Vroot -> "{w}"'
                           for w in MORPH_VERB_ROOTS.values())
    return grammar_mod.parse_grammar_file(f"""\
tenses past present
nonterminal S features relation_index
nonterminal VP features relation_index arg2_index
nonterminal V features relation_index
nonterminal Vroot features relation_index
nonterminal Vaffix
nonterminal N features arg1_index
rule S -> N:select_arg1 _ VP:delete_arg1
rule VP -> V:identity _ N:select_arg2
rule V -> Vroot:identity Vaffix:select_tense
{root_rules}
{noun_rules}
affix Vaffix present 3sg "s"
affix Vaffix past 3sg "ed"
""")


def flat_verb_grammar():
    """Same coverage with whole inflected verbs as single terminals."""
    noun_rules = "\n".join(f'rule N -> "{w}"' for w in MORPH_NOUNS.values())
    verb_rules = "\n".join(
        f'rule V -> "{root}{affix}"'
        for root in MORPH_VERB_ROOTS.values()
        for affix in AFFIXES.values())
    return grammar_mod.parse_grammar_file(f"""\
tenses past present
nonterminal S features relation_index
nonterminal VP features relation_index arg2_index
nonterminal V features tense_index relation_index
nonterminal N features arg1_index
rule S -> N:select_arg1 _ VP:delete_arg1
rule VP -> V:identity _ N:select_arg2
{verb_rules}
{noun_rules}
""")


def _morph_statements(kb, tenses_for_relation):
    for relation in kb.relations:
        for tense in tenses_for_relation(relation.name):
            for a1 in sorted(kb.category_members[relation.domain]):
                for a2 in sorted(kb.category_members[relation.range]):
                    yield Statement(relation.id, a1, a2, tense)


def morph_sentence(kb, statement):
    relation = kb.relations[statement.relation]
    verb = MORPH_VERB_ROOTS[relation.name] + AFFIXES[Tense(statement.tense)]
    subject = MORPH_NOUNS[kb.concepts[statement.arg1].name]
    obj = MORPH_NOUNS[kb.concepts[statement.arg2].name]
    return f"{subject} {verb} {obj}", subject, verb, obj


def morph_training_records(grammar, kb, repeats: int = 2):
    """Present tense for every verb; past tense only for the verbs outside
    the held-out group."""
    def tenses(name):
        if name in PRESENT_ONLY_RELATIONS:
            return (Tense.PRESENT,)
        return (Tense.PRESENT, Tense.PAST)

    records = []
    for statement in _morph_statements(kb, tenses):
        sentence, subject, verb, obj = morph_sentence(kb, statement)
        root = MORPH_VERB_ROOTS[kb.relations[statement.relation].name]
        affix = AFFIXES[Tense(statement.tense)]
        affix_rule = 0 if statement.tense == Tense.PRESENT else 1
        tree_text = (
            f'(S:0 (N:{_rule_index(grammar, "N", subject)} "{subject}") " " '
            f'(VP:0 (V:0 (Vroot:{_rule_index(grammar, "Vroot", root)} '
            f'"{root}") (Vaffix:{affix_rule} "{affix}")) " " '
            f'(N:{_rule_index(grammar, "N", obj)} "{obj}")))')
        records.append(CorpusRecord(sentence, statement,
                                    parse_tree_text(tree_text, grammar,
                                                    sentence)))
    return records * repeats


def flat_training_records(grammar, kb, repeats: int = 2):
    """The same sentence/statement pairs rendered with whole-verb trees."""
    def tenses(name):
        if name in PRESENT_ONLY_RELATIONS:
            return (Tense.PRESENT,)
        return (Tense.PRESENT, Tense.PAST)

    records = []
    for statement in _morph_statements(kb, tenses):
        sentence, subject, verb, obj = morph_sentence(kb, statement)
        tree_text = (
            f'(S:0 (N:{_rule_index(grammar, "N", subject)} "{subject}") " " '
            f'(VP:0 (V:{_rule_index(grammar, "V", verb)} "{verb}") " " '
            f'(N:{_rule_index(grammar, "N", obj)} "{obj}")))')
        records.append(CorpusRecord(sentence, statement,
                                    parse_tree_text(tree_text, grammar,
                                                    sentence)))
    return records * repeats


def morph_test_records(kb):
    """Past-tense sentences for the verbs whose past forms were held out."""
    def tenses(name):
        if name in PRESENT_ONLY_RELATIONS:
            return (Tense.PAST,)
        return ()

    records = []
    for statement in _morph_statements(kb, tenses):
        sentence, _, _, _ = morph_sentence(kb, statement)
        records.append(CorpusRecord(sentence, statement, None))
    return records
