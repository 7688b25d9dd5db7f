import time

import numpy as np
import pytest

import synthetic_g2p
from banipa.model import ModelConfig, init_params
from banipa.pipeline import ModelContext
from banipa.trainer import TrainConfig, train
from banipa.vocab import build_vocab

TINY = dict(d_model=64, heads=4, d_ff=128)


@pytest.fixture(scope="session")
def synthetic_pairs():
    return synthetic_g2p.generate()


@pytest.fixture(scope="session")
def overfit_run(synthetic_pairs):
    """Tiny model trained to memorize 32 synthetic pairs."""
    pairs = synthetic_pairs[:32]
    src_vocab = build_vocab(p.grapheme_word for p in pairs)
    tgt_vocab = build_vocab(p.ipa_word for p in pairs)
    config = ModelConfig(src_vocab.size, tgt_vocab.size, **TINY)
    t0 = time.perf_counter()
    params, history = train(
        TrainConfig(epochs=300, batch_size=8, seed=0), config, pairs, [], src_vocab, tgt_vocab
    )
    elapsed = time.perf_counter() - t0
    return pairs, params, config, src_vocab, tgt_vocab, history, elapsed


@pytest.fixture
def random_context():
    """Untrained tiny model over a small Bangla alphabet."""
    src_vocab = build_vocab(["কখগঘচছজটডতদনপবমরলসহািীুেো"])
    tgt_vocab = build_vocab(["kgcjtdnpbmrlshaiueoɔ"])
    config = ModelConfig(src_vocab.size, tgt_vocab.size, d_model=16, heads=2, d_ff=32, max_len=12)
    return ModelContext(init_params(config, 3), config, src_vocab, tgt_vocab)


class FakeModel:
    """Deterministic word model: wraps the word, counts calls."""

    def __init__(self, outputs=None, known=None):
        self.outputs = outputs or {}
        self.invocations = 0
        self.calls = []
        self._known = known

    @property
    def known_chars(self):
        return self._known

    def predict(self, word):
        self.invocations += 1
        self.calls.append(word)
        return self.outputs.get(word, f"<{word}>"), False

    def predict_many(self, words, batch_size=64):
        return [self.predict(w) for w in words]


@pytest.fixture
def fake_model():
    return FakeModel()


# filled by test_acceptance, printed once at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
