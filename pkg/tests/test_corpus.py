import pytest
from hypothesis import given, strategies as st

from banipa.corpus import (
    CorpusError, MissingColumnError, Sample, SplitSpec, WordPair, compute_stats,
    extract_word_pairs, load_corpus, split_pairs,
)


def write(tmp_path, text, name="data.csv", encoding="utf-8"):
    p = tmp_path / name
    p.write_bytes(text.encode(encoding) if isinstance(text, str) else text)
    return p


def test_load_two_rows(tmp_path):
    p = write(tmp_path, 'text,ipa\nআমি যাই,ami ʤai\n"হ্যাঁ, ঠিক",ɦæ̃ ʈʰik\n')
    assert load_corpus(p) == [Sample("আমি যাই", "ami ʤai"), Sample("হ্যাঁ, ঠিক", "ɦæ̃ ʈʰik")]


def test_load_header_only(tmp_path):
    assert load_corpus(write(tmp_path, "text,ipa\n")) == []


def test_load_keeps_rows_verbatim(tmp_path):
    p = write(tmp_path, 'id,text\n1,"  আমি  "\n')
    assert load_corpus(p, has_ipa=False) == [Sample("  আমি  ", None)]


def test_load_quoted_quotes(tmp_path):
    p = write(tmp_path, 'text\n"সে বলল ""না"""\n')
    assert load_corpus(p, has_ipa=False)[0].text == 'সে বলল "না"'


def test_missing_ipa_field_names_row(tmp_path):
    p = write(tmp_path, "text,ipa\nক,ka\nখ\n")
    with pytest.raises(CorpusError, match="row 3"):
        load_corpus(p)


def test_missing_columns(tmp_path):
    with pytest.raises(MissingColumnError):
        load_corpus(write(tmp_path, "text\nক\n"), has_ipa=True)
    with pytest.raises(MissingColumnError):
        load_corpus(write(tmp_path, "ipa\nka\n"), has_ipa=False)


def test_auto_ipa_detection(tmp_path):
    assert load_corpus(write(tmp_path, "text\nক\n"), has_ipa=None) == [Sample("ক")]
    assert load_corpus(write(tmp_path, "text,ipa\nক,ka\n"), has_ipa=None) == [Sample("ক", "ka")]


def test_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="no such file"):
        load_corpus(tmp_path / "nope.csv")


def test_invalid_utf8_reports_line(tmp_path):
    p = write(tmp_path, b"text,ipa\n\xe0\xa6\x95,ka\n\xff\xfe,x\n")
    with pytest.raises(CorpusError, match="line 3"):
        load_corpus(p)


def test_empty_text_rejected(tmp_path):
    with pytest.raises(CorpusError, match="row 2"):
        load_corpus(write(tmp_path, "text,ipa\n  ,x\n"))


def test_extract_positional():
    pairs, skipped = extract_word_pairs([Sample("ক খ গ", "ka kʰa ga")])
    assert pairs == [("ক", "ka"), ("খ", "kʰa"), ("গ", "ga")] and skipped == 0


def test_extract_skips_mismatched_sample():
    pairs, skipped = extract_word_pairs([Sample("ক খ", "ka kʰa ga")])
    assert pairs == [] and skipped == 1


def test_extract_dedup_first_wins():
    pairs, _ = extract_word_pairs([Sample("ক খ", "ka kʰa"), Sample("গ ক", "ga kɔ")])
    assert pairs == [("ক", "ka"), ("খ", "kʰa"), ("গ", "ga")]


def test_extract_collapses_repeated_whitespace():
    pairs, _ = extract_word_pairs([Sample(" ক\t\tখ ", "ka   kʰa")])
    assert pairs == [("ক", "ka"), ("খ", "kʰa")]


def test_extract_requires_ipa():
    with pytest.raises(CorpusError):
        extract_word_pairs([Sample("ক")])


words = st.text(alphabet="কখগঘ", min_size=1, max_size=3)
sample_lists = st.lists(
    st.lists(st.tuples(words, words), min_size=1, max_size=5).map(
        lambda ws: Sample(" ".join(w for w, _ in ws), " ".join(p for _, p in ws))
    ),
    max_size=10,
)


@given(sample_lists)
def test_dedup_idempotent(samples):
    pairs, _ = extract_word_pairs(samples)
    again, skipped = extract_word_pairs([Sample(w, p) for w, p in pairs])
    assert again == pairs and skipped == 0


def test_split_sizes_90_5_5():
    pairs = [WordPair(str(i), str(i)) for i in range(100)]
    tr, va, te = split_pairs(pairs, SplitSpec(0.9, 0.05, 0.05, seed=1))
    assert (len(tr), len(va), len(te)) == (90, 5, 5)


def test_split_final_training_ratio():
    pairs = [WordPair(str(i), str(i)) for i in range(100)]
    tr, va, te = split_pairs(pairs, SplitSpec(0.99, 0.01, 0.0, seed=1))
    assert (len(tr), len(va), len(te)) == (99, 1, 0)


def test_split_deterministic():
    pairs = [WordPair(str(i), str(i)) for i in range(50)]
    spec = SplitSpec(0.8, 0.1, 0.1, seed=5)
    assert split_pairs(pairs, spec) == split_pairs(pairs, spec)
    assert split_pairs(pairs, spec) != split_pairs(pairs, SplitSpec(0.8, 0.1, 0.1, seed=6))


def test_split_floor_rounding():
    pairs = [WordPair(str(i), str(i)) for i in range(7)]
    tr, va, te = split_pairs(pairs, SplitSpec(0.5, 0.25, 0.25))
    assert (len(tr), len(va), len(te)) == (3, 1, 3)


@given(
    st.integers(0, 200),
    st.floats(0, 1),
    st.floats(0, 1),
    st.integers(0, 2**31),
)
def test_split_partition(n, a, b, seed):
    train_frac = a
    val_frac = (1 - a) * b
    spec = SplitSpec(train_frac, val_frac, 1 - train_frac - val_frac, seed)
    pairs = [WordPair(str(i), "x") for i in range(n)]
    tr, va, te = split_pairs(pairs, spec)
    assert len(tr) + len(va) + len(te) == n
    assert sorted(p.grapheme_word for p in tr + va + te) == sorted(p.grapheme_word for p in pairs)


@pytest.mark.parametrize("fracs", [(0.5, 0.5, 0.5), (1.2, -0.1, -0.1), (0.9, 0.05, 0.04)])
def test_split_spec_validation(fracs):
    with pytest.raises(ValueError):
        SplitSpec(*fracs)


def test_split_spec_from_ratio():
    spec = SplitSpec.from_ratio("90:5:5", seed=3)
    assert (spec.train_frac, spec.val_frac, spec.test_frac, spec.seed) == (0.9, 0.05, 0.05, 3)
    assert SplitSpec.from_ratio("99:1:0").test_frac == 0.0
    with pytest.raises(ValueError):
        SplitSpec.from_ratio("90:10")


def test_stats_single_sample():
    assert compute_stats([Sample("ab cd")]).word_count_histogram == {2: 1}


def test_stats_fields():
    s = compute_stats([Sample("কখ গ", "kakʰa ga"), Sample("কখ", "ka kʰa")])
    assert s.sample_count == 2
    assert s.unique_word_count == 2
    assert s.unique_text_chars == 3
    assert s.unique_ipa_chars == 4  # k a ʰ g
    assert (s.max_text_word_len, s.max_ipa_word_len) == (2, 5)
    assert s.word_count_histogram == {2: 1, 1: 1}
    assert (s.mismatched_samples, s.unique_pair_count) == (1, 2)


def test_stats_format_has_histogram_section():
    out = compute_stats([Sample("ab cd"), Sample("x")]).format().splitlines()
    assert "sample_count: 2" in out
    i = out.index("histogram")
    assert out[i + 1 :] == ["1\t1", "2\t1"]


@given(sample_lists)
def test_stats_histogram_mass(samples):
    s = compute_stats(samples)
    assert sum(s.word_count_histogram.values()) == s.sample_count


@given(sample_lists, sample_lists)
def test_stats_monotone(a, b):
    s1, s2 = compute_stats(a), compute_stats(a + b)
    assert s2.unique_word_count >= s1.unique_word_count
    assert s2.max_text_word_len >= s1.max_text_word_len
    assert s2.max_ipa_word_len >= s1.max_ipa_word_len
