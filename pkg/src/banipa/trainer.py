"""Teacher-forced training: masked loss/accuracy, RMSprop, and a gradient checker."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from banipa import model as M
from banipa.corpus import WordPair
from banipa.vocab import PAD, CharVocab, encode_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 0.001
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-7
    seed: int = 0
    max_len: int = 64

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.rmsprop_decay < 1.0:
            raise ValueError("rmsprop_decay must lie in [0, 1)")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float
    val_seq_accuracy: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.records]

    def to_tsv(self) -> str:
        cols = list(EpochRecord.__dataclass_fields__)
        lines = ["\t".join(cols)]
        for r in self.records:
            row = asdict(r)
            lines.append("\t".join(str(row[c]) if c == "epoch" else f"{row[c]:.6f}" for c in cols))
        return "\n".join(lines) + "\n"


def _log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def masked_ce_loss(logits, targets) -> float:
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets)
    if logits.shape[:-1] != targets.shape:
        raise ValueError(f"logits {logits.shape} do not match targets {targets.shape}")
    valid = targets != PAD
    n = valid.sum()
    if n == 0:
        raise ValueError("every target position is PAD")
    picked = np.take_along_axis(_log_softmax(logits), targets[..., None], axis=-1)[..., 0]
    return float(-(picked * valid).sum() / n)


def masked_accuracy(logits, targets) -> float:
    logits = np.asarray(logits)
    targets = np.asarray(targets)
    if logits.shape[:-1] != targets.shape:
        raise ValueError(f"logits {logits.shape} do not match targets {targets.shape}")
    valid = targets != PAD
    n = valid.sum()
    if n == 0:
        raise ValueError("every target position is PAD")
    return float(((logits.argmax(axis=-1) == targets) & valid).sum() / n)


def init_optimizer_state(params) -> dict:
    return {k: np.zeros_like(v) for k, v in params.items()}


def rmsprop_step(params, grads, state, config: TrainConfig):
    """In-place RMSprop update; returns ``(params, state)`` for convenience.

    Gradients are validated before any tensor is touched.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for {name}")
    rho, lr, eps = config.rmsprop_decay, config.learning_rate, config.rmsprop_epsilon
    for name, g in grads.items():
        acc = state[name]
        acc *= rho
        acc += (1.0 - rho) * g * g
        params[name] -= lr * g / (np.sqrt(acc) + eps)
    return params, state


def encode_pairs(pairs: Sequence[WordPair], src_vocab: CharVocab, tgt_vocab: CharVocab, max_len: int):
    src = encode_batch(src_vocab, [p.grapheme_word for p in pairs], max_len)
    tgt = encode_batch(tgt_vocab, [p.ipa_word for p in pairs], max_len)
    return src, tgt


def _teacher_forced(tgt):
    # decoder sees BOS..last char, predicts first char..EOS
    return tgt[:, :-1], tgt[:, 1:]


def evaluate(params, model_config, src, tgt, batch_size=256):
    """Token loss, token accuracy and whole-sequence accuracy under teacher forcing."""
    if len(src) == 0:
        return math.nan, math.nan, math.nan
    loss_sum = 0.0
    correct = total = seq_ok = 0
    for lo in range(0, len(src), batch_size):
        s = M.trim_batch(src[lo : lo + batch_size])
        t_in, t_out = _teacher_forced(M.trim_batch(tgt[lo : lo + batch_size]))
        logits = M.forward(params, model_config, s, t_in)
        valid = t_out != PAD
        n = int(valid.sum())
        loss_sum += masked_ce_loss(logits, t_out) * n
        hit = (logits.argmax(axis=-1) == t_out) | ~valid
        correct += int((hit & valid).sum())
        total += n
        seq_ok += int(hit.all(axis=1).sum())
    return loss_sum / total, correct / total, seq_ok / len(src)


def train(
    config: TrainConfig,
    model_config: M.ModelConfig,
    train_pairs: Sequence[WordPair],
    val_pairs: Sequence[WordPair],
    src_vocab: CharVocab,
    tgt_vocab: CharVocab,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
    dtype=np.float32,
):
    """Train from a seeded initialization; returns ``(params, history)``."""
    if not train_pairs:
        raise ValueError("empty training set")
    if model_config.max_len != config.max_len:
        raise ValueError("model and training max_len differ")
    rng = np.random.default_rng(config.seed)
    params = M.init_params(model_config, rng, dtype)
    state = init_optimizer_state(params)
    src, tgt = encode_pairs(train_pairs, src_vocab, tgt_vocab, config.max_len)
    vsrc, vtgt = encode_pairs(val_pairs, src_vocab, tgt_vocab, config.max_len)
    history = TrainHistory()
    n = len(src)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = total = 0
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            s = M.trim_batch(src[idx])
            t_in, t_out = _teacher_forced(M.trim_batch(tgt[idx]))
            loss, c, k, grads = M.loss_and_grads(params, model_config, s, t_in, t_out, rng)
            rmsprop_step(params, grads, state, config)
            loss_sum += loss * k
            correct += c
            total += k
        vl, va, vs = evaluate(params, model_config, vsrc, vtgt)
        rec = EpochRecord(epoch, loss_sum / total, correct / total, vl, va, vs)
        history.records.append(rec)
        log.info(
            "epoch %d loss %.4f acc %.4f val_loss %.4f val_acc %.4f",
            epoch, rec.train_loss, rec.train_accuracy, vl, va,
        )
        if on_epoch is not None:
            on_epoch(rec)
    return params, history


def _key_bias(name: str) -> bool:
    # softmax is shift-invariant per row, so the key bias gradient is identically zero
    return name.endswith(".bk")


def grad_check(
    model_config: M.ModelConfig,
    sample: tuple[np.ndarray, np.ndarray],
    epsilon: float = 1e-5,
    n_scalars: int = 200,
    seed: int = 0,
    corrupt: Optional[str] = None,
) -> float:
    """Largest relative error between analytic and central-difference gradients.

    ``sample`` is one encoded ``(source, target)`` pair. Scalars are drawn from
    every tensor in turn so each one is covered. ``corrupt`` names a tensor whose
    analytic gradient is doubled, to confirm the checker notices.
    """
    cfg = M.ModelConfig(**{**asdict(model_config), "dropout_rate": 0.0})
    rng = np.random.default_rng(seed)
    params = M.init_params(cfg, rng, np.float64)
    # non-trivial biases and norms so every path carries signal
    for k, v in params.items():
        if v.ndim == 1:
            v += rng.normal(0.0, 0.1, v.shape)
    src, tgt = (np.asarray(a)[None, :] for a in sample)
    src = M.trim_batch(src)
    t_in, t_out = _teacher_forced(M.trim_batch(tgt))

    _, _, _, grads = M.loss_and_grads(params, cfg, src, t_in, t_out)
    if corrupt is not None:
        grads[corrupt] = grads[corrupt] * 2.0

    names = [k for k in params if not _key_bias(k)]
    per_tensor = math.ceil(n_scalars / len(names))
    worst = 0.0
    for name in names:
        flat = params[name].reshape(-1)
        picks = rng.choice(flat.size, size=min(per_tensor, flat.size), replace=False)
        for i in picks:
            old = flat[i]
            flat[i] = old + epsilon
            lp = masked_ce_loss(M.forward(params, cfg, src, t_in), t_out)
            flat[i] = old - epsilon
            lm = masked_ce_loss(M.forward(params, cfg, src, t_in), t_out)
            flat[i] = old
            num = (lp - lm) / (2.0 * epsilon)
            ana = grads[name].reshape(-1)[i]
            err = abs(ana - num) / max(abs(ana), abs(num), 1e-12)
            worst = max(worst, err)
    return worst
