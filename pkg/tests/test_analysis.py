import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convograph.analysis import (
    Annotator,
    AsrGateConfig,
    AsrHypothesis,
    CasingLexicon,
    asr_gate,
    extract_focus,
    hypothesis_from_text,
    pos_tag,
    profanity_scan,
    spot_keywords,
    tokenize,
    truecase,
)
from convograph.entity import Entity
from convograph.errors import MalformedInputError


@pytest.fixture()
def lexicon():
    lex = CasingLexicon()
    lex.add("star", "Star", proper=True)
    lex.add("wars", "Wars", proper=True)
    lex.add("frozen", "Frozen", proper=True)
    lex.add("i", "I", proper=False)
    return lex


# -- tokenize ----------------------------------------------------------------


def test_tokenize_contraction_and_period():
    # hand tokenization per the stated rules: apostrophe stays inside the
    # word, the final period splits off
    assert tokenize("let's chat about movies.") == ["let's", "chat", "about", "movies", "."]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_preserves_case():
    assert tokenize("Star Wars") == ["Star", "Wars"]


def test_tokenize_punctuation_separate_tokens():
    assert tokenize("wait, really?!") == ["wait", ",", "really", "?", "!"]


def test_tokenize_hyphen_inside_word():
    assert tokenize("sci-fi rocks") == ["sci-fi", "rocks"]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.text(alphabet="abcdefg", min_size=1, max_size=6), min_size=1, max_size=6))
def test_tokenize_join_idempotent_for_clean_words(words):
    assert tokenize(" ".join(words)) == words


# -- truecase ----------------------------------------------------------------


def test_truecase_applies_lexicon(lexicon):
    assert truecase(["star", "wars"], lexicon) == ["Star", "Wars"]


def test_truecase_unknown_mid_sentence_unchanged(lexicon):
    assert truecase(["we", "watched", "zorgo"], lexicon)[2] == "zorgo"


def test_truecase_first_unknown_token_capitalized(lexicon):
    assert truecase(["zorgo", "rules"], lexicon)[0] == "Zorgo"


def test_truecase_load(tmp_path):
    path = tmp_path / "casing.tsv"
    path.write_text("star\tStar\t1\nwars\tWars\t1\n", encoding="utf-8")
    lex = CasingLexicon.load(path)
    assert lex.canonical("STAR") == "Star"
    assert lex.is_proper("wars")


# -- pos_tag -----------------------------------------------------------------


def test_pos_tag_proper_nouns_from_lexicon(lexicon):
    assert pos_tag(["Star", "Wars"], lexicon) == ["NNP", "NNP"]


def test_pos_tag_closed_class():
    assert pos_tag(["the"]) == ["DT"]


def test_pos_tag_punct():
    assert pos_tag(["."]) == ["PUNCT"]


def test_pos_tag_number_and_suffixes():
    assert pos_tag(["42"]) == ["CD"]
    assert pos_tag(["walking"]) == ["VB"]
    assert pos_tag(["wonderful"]) == ["JJ"]
    assert pos_tag(["quickly"]) == ["OTHER"]
    assert pos_tag(["banana"]) == ["NN"]


def test_pos_tag_one_tag_per_token(lexicon):
    tokens = tokenize("I watched Star Wars yesterday .")
    tags = pos_tag(tokens, lexicon)
    assert len(tags) == len(tokens)


# -- asr gate ----------------------------------------------------------------


def hyp(confidences, rank=0):
    return AsrHypothesis(tokens=tuple((f"w{i}", c) for i, c in enumerate(confidences)), rank=rank)


def test_asr_gate_mean_above_threshold_survives():
    # mean of [0.9, 0.8, 0.7] = 0.8 >= 0.7
    confident, surviving = asr_gate([hyp([0.9, 0.8, 0.7])], AsrGateConfig(0.7))
    assert confident and len(surviving) == 1


def test_asr_gate_low_mean_removed():
    confident, surviving = asr_gate([hyp([0.6, 0.6])], AsrGateConfig(0.7))
    assert not confident and surviving == []


def test_asr_gate_exactly_at_threshold_survives():
    confident, surviving = asr_gate([hyp([0.7, 0.7])], AsrGateConfig(0.7))
    assert confident and len(surviving) == 1


def test_asr_gate_zero_token_hypothesis_is_malformed():
    with pytest.raises(MalformedInputError):
        asr_gate([AsrHypothesis(tokens=(), rank=0)])


def test_asr_gate_requires_hypotheses():
    with pytest.raises(MalformedInputError):
        asr_gate([])


@settings(max_examples=80, deadline=None)
@given(
    sets=st.lists(
        st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=5), min_size=1, max_size=5
    ),
    lo=st.floats(0, 1),
    hi=st.floats(0, 1),
)
def test_asr_gate_monotone_in_threshold(sets, lo, hi):
    lo, hi = min(lo, hi), max(lo, hi)
    hyps = [hyp(c, rank=i) for i, c in enumerate(sets)]
    _, at_lo = asr_gate(hyps, AsrGateConfig(lo))
    _, at_hi = asr_gate(hyps, AsrGateConfig(hi))
    assert {h.rank for h in at_hi} <= {h.rank for h in at_lo}


# -- profanity ---------------------------------------------------------------


def test_profanity_token_hit():
    profane, matches = profanity_scan(["that", "is", "junkword"], {"junkword"})
    assert profane and matches == ["junkword"]


def test_profanity_substring_not_matched():
    profane, _ = profanity_scan(["class", "is", "fun"], {"ass"})
    assert not profane


def test_profanity_phrase_across_tokens():
    # phrase-window oracle: two-token phrase matches contiguous tokens only
    profane, matches = profanity_scan(["oh", "shut", "up", "now"], {"shut up"})
    assert profane and matches == ["shut up"]
    profane, _ = profanity_scan(["shut", "the", "door", "up", "there"], {"shut up"})
    assert not profane


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["Bad", "Word", "ok", "fine"]), max_size=6))
def test_profanity_case_insensitive(tokens):
    blacklist = {"bad word"}
    upper = [t.upper() for t in tokens]
    lower = [t.lower() for t in tokens]
    assert profanity_scan(upper, blacklist)[0] == profanity_scan(lower, blacklist)[0]


# -- focus extraction --------------------------------------------------------


def test_focus_nnp_run():
    # run-extraction oracle: tokens 2..3 are the only NNP run
    cased = ["I", "watched", "Star", "Wars", "yesterday"]
    tags = ["PRP", "VB", "NNP", "NNP", "NN"]
    assert extract_focus(cased, tags) == ["Star Wars"]


def test_focus_empty_when_nothing_marked():
    assert extract_focus(["plain", "words"], ["NN", "NN"]) == []


def test_focus_entity_span_deduplicated_with_nnp_run():
    cased = ["Star", "Wars", "rocks"]
    tags = ["NNP", "NNP", "NN"]
    ents = [Entity(surface="Star Wars", label="Star Wars")]
    assert extract_focus(cased, tags, ents) == ["Star Wars"]


def test_focus_orders_by_occurrence():
    cased = ["Frozen", "beats", "Star", "Wars"]
    tags = ["NNP", "VB", "NNP", "NNP"]
    assert extract_focus(cased, tags) == ["Frozen", "Star Wars"]


def test_focus_phrases_occur_verbatim():
    cased = ["I", "like", "Star", "Wars", "and", "Frozen"]
    tags = ["PRP", "VB", "NNP", "NNP", "IN", "NNP"]
    text = " ".join(cased).lower()
    for phrase in extract_focus(cased, tags):
        assert phrase.lower() in text


# -- keyword spotting --------------------------------------------------------


def test_spot_keywords_two_topics_in_order():
    hits = spot_keywords(
        ["tell", "me", "sports", "news"],
        {"sports": {"sports"}, "news": {"news"}},
    )
    assert hits == [("sports", "sports"), ("news", "news")]


def test_spot_keywords_none():
    assert spot_keywords(["nothing", "here"], {"sports": {"sports"}}) == []


def test_spot_keywords_same_keyword_two_topics():
    hits = spot_keywords(["game", "time"], {"sports": {"game"}, "videogames": {"game"}})
    assert set(hits) == {("sports", "game"), ("videogames", "game")}


def test_spot_keywords_phrase():
    hits = spot_keywords(["the", "world", "cup", "final"], {"sports": {"world cup"}})
    assert hits == [("sports", "world cup")]


# -- annotator ---------------------------------------------------------------


def test_annotator_pipeline(lexicon):
    ann = Annotator(
        casing=lexicon,
        blacklist={"junkword"},
        topic_keywords={"movies": {"movies"}},
        entity_recognizer=lambda cased: [Entity(surface="Star Wars", label="Star Wars")]
        if "Star" in cased
        else [],
    ).annotate([hypothesis_from_text("i watched star wars movies")])
    assert ann.truecased[0] == "I"
    assert "Star Wars" in ann.focus_phrases
    assert ("movies", "movies") in ann.topic_keywords
    assert ann.confident and not ann.profane
    assert ann.chosen_hypothesis == 0


def test_annotator_picks_best_ranked_survivor(lexicon):
    low = AsrHypothesis(tokens=(("mumble", 0.2),), rank=0)
    good = AsrHypothesis(tokens=(("star", 0.9), ("wars", 0.95)), rank=1)
    ann = Annotator(casing=lexicon).annotate([low, good])
    assert ann.confident
    assert ann.chosen_hypothesis == 1
    assert ann.truecased == ["Star", "Wars"]
