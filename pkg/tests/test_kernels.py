import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from banipa import _fallback, _kernels

compiled = pytest.importorskip("banipa._core", reason="compiled kernels not built")

words = st.lists(st.integers(0, 4), max_size=12)
chars = st.text(
    alphabet=st.one_of(
        st.sampled_from(list("কখাি্০১৯।॥ \t\n,.!?—“”aZ09©")),
        st.characters(),
    )
)


@given(words, words)
def test_edit_ops_matches_fallback(ref, hyp):
    assert compiled.edit_ops(ref, hyp) == _fallback.edit_ops(ref, hyp)


@given(chars)
def test_char_runs_matches_fallback(text):
    assert compiled.char_runs(text) == _fallback.char_runs(text)


@given(chars)
def test_char_runs_matches_fallback_with_extra(text):
    extra = frozenset("©€")
    assert compiled.char_runs(text, extra) == _fallback.char_runs(text, extra)


def test_base_punctuation_sets_agree():
    for cp in range(0x3000):
        ch = chr(cp)
        assert compiled.classify_code(ch) == _fallback.classify_code(ch), hex(cp)


def test_edit_ops_empty():
    assert compiled.edit_ops([], []) == (0, 0, 0)
    assert compiled.edit_ops([1, 2], []) == (0, 2, 0)
    assert compiled.edit_ops([], [1, 2]) == (0, 0, 2)


def test_pure_mode_env_switch():
    out = subprocess.run(
        [sys.executable, "-c", "from banipa import _kernels; print(_kernels.COMPILED)"],
        env={**os.environ, "BANIPA_PURE": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "False"
    # this process picks the compiled core unless the suite itself runs pure
    assert _kernels.COMPILED == (not os.environ.get("BANIPA_PURE"))
