import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conspigraph.graph import Partition
from conspigraph.language import (
    UNDETERMINED,
    LanguageVerdict,
    channel_language,
    clean_text,
    community_language_distribution,
    default_detector,
    detect_language,
    load_profiles,
    trigrams,
    vote,
)
from conspigraph.synthetic import SENTENCES
from conftest import make_channel

HAND_WRITTEN = {
    "en": "The government announced new rules for the schools starting next month.",
    "de": "Die Regierung hat neue Regeln für die Schulen im nächsten Monat angekündigt.",
    "es": "El gobierno anunció nuevas reglas para las escuelas a partir del próximo mes.",
    "pt": "O governo anunciou novas regras para as escolas a partir do próximo mês.",
    "it": "Il governo ha annunciato nuove regole per le scuole a partire dal prossimo mese.",
    "fr": "Le gouvernement a annoncé de nouvelles règles pour les écoles à partir du mois prochain.",
    "nl": "De regering heeft nieuwe regels aangekondigd voor de scholen vanaf volgende maand.",
    "ru": "Правительство объявило новые правила для школ начиная со следующего месяца.",
    "pl": "Rząd ogłosił nowe zasady dla szkół, które zaczną obowiązywać od przyszłego miesiąca.",
    "sv": "Regeringen har meddelat nya regler för skolorna som börjar gälla nästa månad.",
}


def test_profiles_are_unit_vectors():
    profiles = load_profiles()
    assert sorted(p.language_code for p in profiles) == sorted(HAND_WRITTEN)
    for p in profiles:
        assert sum(w * w for w in p.trigram_weights.values()) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("code,text", sorted(HAND_WRITTEN.items()))
def test_hand_written_sentences(code, text):
    v = detect_language(text)
    assert v.language_code == code and v.confidence >= 0.10


def test_synthetic_sentence_banks():
    for code, bank in SENTENCES.items():
        for s in bank:
            assert detect_language(s).language_code == code, s


@pytest.mark.parametrize("text", ["", "ok", "https://bit.ly/abcdefghijklmnopqrstuvwxyz", "12345 67890 12345 67890 1234",
                                  "@someone #tag #tag2 @other_handle"])
def test_short_or_empty_is_undetermined(text):
    v = detect_language(text)
    assert v.language_code == UNDETERMINED and v.undetermined


def test_clean_text_strips_links_handles_numbers():
    assert clean_text("see https://x.com/a and www.y.org @bob #tag 2021 now").split() == ["see", "and", "now"]
    grams = trigrams("ab")
    assert grams and all(len(g) == 3 for g in grams)


def test_vote_rules():
    en, de = LanguageVerdict("en", 0.5), LanguageVerdict("de", 0.9)
    und = LanguageVerdict(UNDETERMINED, 0.0)
    assert vote([en, en, de, und, und, und]) == LanguageVerdict("en", 2 / 3)
    assert vote([en, de]).language_code == "de"           # tie broken by summed confidence
    assert vote([LanguageVerdict("fr", 0.5), LanguageVerdict("de", 0.5)]).language_code == "de"  # then by code
    assert vote([und]) == LanguageVerdict(UNDETERMINED, 0.0)
    assert vote([]) == LanguageVerdict(UNDETERMINED, 0.0)


def test_channel_language_uses_most_recent_sample():
    texts = [HAND_WRITTEN["de"]] * 6 + [HAND_WRITTEN["en"]] * 4 + ["ok"] * 3
    ch = make_channel(1, texts)
    assert channel_language(ch, sample_size=0).language_code == "de"
    # the four most recent classifiable messages are English; short ones are skipped
    assert channel_language(ch, sample_size=4) == LanguageVerdict("en", 1.0)


def test_synthetic_channel_languages(synthetic):
    det = default_detector()
    wrong = [c.channel_id for c in synthetic.corpus
             if channel_language(c, 500, det).language_code != synthetic.truth.channel_language[c.channel_id]]
    assert wrong == []


def test_community_distribution():
    part = Partition({1: 0, 2: 0, 3: 0, 4: 1}, 0.0)
    verdicts = {1: LanguageVerdict("en", 1), 2: LanguageVerdict("en", 1), 3: LanguageVerdict("de", 1)}
    dist = community_language_distribution(part, verdicts)
    assert dist[0] == [("en", pytest.approx(2 / 3)), ("de", pytest.approx(1 / 3))]
    assert dist[1] == [(UNDETERMINED, 1.0)]


@settings(max_examples=80, deadline=None)
@given(st.text(max_size=120))
def test_detection_properties(text):
    v = detect_language(text)
    assert 0.0 <= v.confidence <= 1.0 + 1e-9
    assert (v.language_code == UNDETERMINED) or v.confidence >= 0.10
    assert detect_language(text) == v
    if len(clean_text(text).strip()) < 20:
        assert v.language_code == UNDETERMINED
