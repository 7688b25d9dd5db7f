import threading

import pytest
from hypothesis import given, settings, strategies as st

from banipa.pipeline import (
    PRESETS, IpaDictionary, NumeralPolicy, PipelineConfig, RunReport, preset,
    transcribe_many, transcribe_text, transcribe_word,
)
from banipa.segmenter import TokenKind
from conftest import FakeModel


def test_presets_table():
    P = NumeralPolicy
    got = {k: (c.numeral_policy, c.drop_foreign, c.punctuation_passthrough, c.filter_unknown_chars) for k, c in PRESETS.items()}
    assert got == {
        "A": (P.PASSTHROUGH, False, False, False),
        "B": (P.PASSTHROUGH, True, True, False),
        "C": (P.SPELL_OUT, True, True, False),
        "D": (P.DROP, True, True, True),
    }


def test_preset_lookup():
    assert preset("b").drop_foreign and preset("B").punctuation_passthrough
    assert preset("D").numeral_policy is NumeralPolicy.DROP and preset("D").filter_unknown_chars
    with pytest.raises(ValueError):
        preset("E")


def test_memoization_single_call(fake_model):
    d = IpaDictionary()
    assert transcribe_word("আমি", d, fake_model) == "<আমি>"
    assert transcribe_word("আমি", d, fake_model) == "<আমি>"
    assert fake_model.invocations == 1
    assert (d.hits, d.misses) == (1, 1)


def test_seeded_entry_skips_model(fake_model):
    d = IpaDictionary({"আমি": "ami"})
    assert transcribe_word("আমি", d, fake_model) == "ami"
    assert fake_model.invocations == 0


def test_null_output_recorded_and_flagged():
    model = FakeModel(outputs={"কখ": ""})
    d, report = IpaDictionary(), RunReport()
    assert transcribe_word("কখ", d, model, report) == ""
    assert d.get("কখ") == ""
    assert report.null_output_words == ["কখ"]
    assert transcribe_word("কখ", d, model, report) == ""
    assert model.invocations == 1


def test_dictionary_write_once():
    d = IpaDictionary({"ক": "ka"})
    assert d.insert("ক", "other") == "ka"
    assert d.get("ক") == "ka"


def test_concurrent_lookups_share_dictionary():
    d = IpaDictionary({f"w{i}": str(i) for i in range(50)})
    model = FakeModel()
    out = []

    def work():
        out.append([transcribe_word(f"w{i}", d, model) for i in range(50)])

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(o == [str(i) for i in range(50)] for o in out)
    assert d.hits == 200 and model.invocations == 0


def test_known_words_preset_b(fake_model):
    d = IpaDictionary({"আমি": "ami", "ভাত": "bʱat̪", "খাই": "kʰai"})
    assert transcribe_text("আমি ভাত খাই।", preset("B"), d, fake_model) == "ami bʱat̪ kʰai।"
    assert fake_model.invocations == 0


def test_hand_trace_foreign_dropped(fake_model):
    # Foreign "" | WS | "X" | "।"  ->  " X।"  ->  "X।"
    assert transcribe_text("cat আমি।", preset("B"), IpaDictionary({"আমি": "X"}), fake_model) == "X।"


def test_hand_trace_numeral_dropped(fake_model):
    # Numeral "" | WS | "X"  ->  " X"  ->  "X"
    assert transcribe_text("১২ আমি", preset("D"), IpaDictionary({"আমি": "X"}), fake_model) == "X"


def test_preset_a_keeps_foreign_drops_punctuation(fake_model):
    d = IpaDictionary({"আমি": "X"})
    assert transcribe_text("cat আমি।", preset("A"), d, fake_model) == "cat X"


def test_spell_out_routes_through_dictionary(fake_model):
    d = IpaDictionary({"দুই": "d̪ui", "শত": "ʃɔt̪o"})
    assert transcribe_text("২০০", preset("C"), d, fake_model) == "d̪ui ʃɔt̪o"
    assert fake_model.invocations == 0


def test_passthrough_keeps_digits(fake_model):
    assert transcribe_text("১২", preset("B"), IpaDictionary(), fake_model) == "১২"


def test_other_symbols(fake_model):
    d = IpaDictionary({"ক": "k"})
    assert transcribe_text("ক ©", preset("B"), d, fake_model) == "k ©"
    assert transcribe_text("ক ©", preset("D"), d, fake_model) == "k"


def test_unknown_chars_filtered_before_model():
    model = FakeModel(known=frozenset("কখ"))
    d = IpaDictionary()
    assert transcribe_text("কৎখ", preset("D"), d, model) == "<কখ>"
    assert model.calls == ["কখ"]
    # fully unknown word becomes empty without touching the model
    assert transcribe_text("ৎৎ কখ", preset("D"), d, model) == "<কখ>"
    assert model.invocations == 1


def test_run_report_counts(fake_model):
    report = RunReport()
    d = IpaDictionary({"আমি": "ami"})
    transcribe_text("আমি cat, তুমি।", preset("B"), d, fake_model, report)
    assert report.token_counts[TokenKind.BANGLA_WORD] == 2
    assert report.token_counts[TokenKind.PUNCTUATION] == 2
    assert report.token_counts[TokenKind.FOREIGN] == 1
    assert (report.hits, report.misses, report.model_invocations) == (1, 1, 1)
    text = report.format()
    assert "dictionary_hits: 1" in text and "model_invocations: 1" in text
    assert "tokens_BanglaWord: 2" in text


vocab = ["আমি", "তুমি", "সে", "ভাত", "বই", "কলম"]
sentences = st.lists(
    st.lists(st.sampled_from(vocab + ["cat", "১২", "।", ","]), min_size=1, max_size=6).map(" ".join),
    min_size=1,
    max_size=8,
)


@given(sentences, st.sets(st.sampled_from(vocab)))
@settings(max_examples=40)
def test_memoization_soundness(texts, seeded):
    model = FakeModel()
    d = IpaDictionary({w: w.upper() for w in seeded})
    for t in texts:
        transcribe_text(t, preset("B"), d, model)
    used = {w for t in texts for w in t.split() if w in vocab}
    assert model.invocations == len(used - seeded)


@given(sentences)
@settings(max_examples=40)
def test_policy_locality(texts):
    d = IpaDictionary({w: f"ipa{i}" for i, w in enumerate(vocab)})
    outs = []
    for policy in NumeralPolicy:
        cfg = PipelineConfig(policy, True, True, False)
        words = []
        for t in texts:
            out = transcribe_text(t, cfg, d, FakeModel())
            words.append([w for w in out.split() if w.startswith("ipa")])
        outs.append(words)
    assert outs[0] == outs[1] == outs[2]


@given(sentences)
@settings(max_examples=40)
def test_punctuation_stability(texts):
    d = IpaDictionary({w: "x" for w in vocab})
    for t in texts:
        out = transcribe_text(t, preset("B"), d, FakeModel())
        assert [c for c in out if c in "।,"] == [c for c in t if c in "।,"]


def test_transcribe_many_matches_sequential():
    texts = ["আমি বই", "বই কলম cat", "১২ আমি।", "", "কলম"]
    for name in "ABCD":
        m1, m2 = FakeModel(known=frozenset("আমিবইকলম")), FakeModel(known=frozenset("আমিবইকলম"))
        d1, d2 = IpaDictionary(), IpaDictionary()
        r1, r2 = RunReport(), RunReport()
        seq = [transcribe_text(t, preset(name), d1, m1, r1) for t in texts]
        assert transcribe_many(texts, preset(name), d2, m2, r2) == seq
        assert m1.invocations == m2.invocations
        assert (d1.hits, d1.misses) == (d2.hits, d2.misses)
        assert d1.entries() == d2.entries()
        assert (r1.hits, r1.misses, r1.model_invocations) == (r2.hits, r2.misses, r2.model_invocations)


def test_model_context_predicts(random_context):
    d = IpaDictionary()
    out = transcribe_text("কা খি", preset("D"), d, random_context)
    assert random_context.invocations == 2
    assert out == " ".join(d.get(w) for w in ("কা", "খি") if d.get(w))
