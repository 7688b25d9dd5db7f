"""Character-level encoder-decoder transformer in numpy, with hand-written backprop.

Parameters live in a flat ordered ``dict`` of named arrays. Layers use
post-norm residual blocks, sinusoidal positions and ReLU feed-forward.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from banipa.vocab import BOS, EOS, PAD

ModelParams = dict  # name -> np.ndarray

LN_EPS = 1e-6


@dataclass(frozen=True)
class ModelConfig:
    src_vocab_size: int
    tgt_vocab_size: int
    d_model: int = 512
    heads: int = 8
    d_ff: int = 2560
    enc_layers: int = 1
    dec_layers: int = 1
    max_len: int = 64
    dropout_rate: float = 0.1

    def __post_init__(self):
        if self.d_model <= 0 or self.heads <= 0 or self.d_model % self.heads:
            raise ValueError(
                f"d_model ({self.d_model}) must be a positive multiple of heads ({self.heads})"
            )
        if self.d_model % 2:
            raise ValueError("d_model must be even for sinusoidal positions")
        if self.max_len < 2:
            raise ValueError("max_len must be at least 2")
        if self.enc_layers < 0 or self.dec_layers < 0:
            raise ValueError("layer counts must be non-negative")
        if self.src_vocab_size < 4 or self.tgt_vocab_size < 4:
            raise ValueError("vocabularies must at least hold the four specials")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")


_ATTN = ("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo")


def _attn_shapes(prefix, d):
    out = {}
    for proj in "qkvo":
        out[f"{prefix}.w{proj}"] = (d, d)
        out[f"{prefix}.b{proj}"] = (d,)
    return out


def _ln_shapes(prefix, d):
    return {f"{prefix}.gamma": (d,), f"{prefix}.beta": (d,)}


def _ffn_shapes(prefix, d, ff):
    return {
        f"{prefix}.w1": (d, ff),
        f"{prefix}.b1": (ff,),
        f"{prefix}.w2": (ff, d),
        f"{prefix}.b2": (d,),
    }


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Ordered name -> shape table for every tensor of the model."""
    d, ff = config.d_model, config.d_ff
    shapes = {
        "src_embedding": (config.src_vocab_size, d),
        "tgt_embedding": (config.tgt_vocab_size, d),
    }
    for i in range(config.enc_layers):
        p = f"enc{i}"
        shapes.update(_attn_shapes(f"{p}.self_attn", d))
        shapes.update(_ln_shapes(f"{p}.ln1", d))
        shapes.update(_ffn_shapes(f"{p}.ffn", d, ff))
        shapes.update(_ln_shapes(f"{p}.ln2", d))
    for i in range(config.dec_layers):
        p = f"dec{i}"
        shapes.update(_attn_shapes(f"{p}.self_attn", d))
        shapes.update(_ln_shapes(f"{p}.ln1", d))
        shapes.update(_attn_shapes(f"{p}.cross_attn", d))
        shapes.update(_ln_shapes(f"{p}.ln2", d))
        shapes.update(_ffn_shapes(f"{p}.ffn", d, ff))
        shapes.update(_ln_shapes(f"{p}.ln3", d))
    shapes["out.w"] = (d, config.tgt_vocab_size)
    shapes["out.b"] = (config.tgt_vocab_size,)
    return shapes


def param_count(config: ModelConfig) -> int:
    """Closed-form scalar count; independent of ``param_shapes``."""
    d, ff = config.d_model, config.d_ff
    attn = 4 * (d * d + d)
    ffn = 2 * d * ff + ff + d
    ln = 2 * d
    enc = attn + ffn + 2 * ln
    dec = 2 * attn + ffn + 3 * ln
    emb = (config.src_vocab_size + config.tgt_vocab_size) * d
    out = d * config.tgt_vocab_size + config.tgt_vocab_size
    return emb + config.enc_layers * enc + config.dec_layers * dec + out


def init_params(config: ModelConfig, seed=0, dtype=np.float32) -> ModelParams:
    """Glorot-uniform matrices, zero biases, unit layer-norm scales."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(".gamma"):
            arr = np.ones(shape)
        elif len(shape) == 2:
            limit = math.sqrt(6.0 / (shape[0] + shape[1]))
            arr = rng.uniform(-limit, limit, size=shape)
        else:
            arr = np.zeros(shape)
        params[name] = arr.astype(dtype)
    return params


@functools.lru_cache(maxsize=16)
def _pe_table(max_len: int, d_model: int) -> np.ndarray:
    pos = np.arange(max_len)[:, None]
    i2 = np.arange(0, d_model, 2)[None, :]
    angle = pos / np.power(10000.0, i2 / d_model)
    pe = np.empty((max_len, d_model))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle)
    pe.setflags(write=False)
    return pe


def positional_encoding(max_len: int, d_model: int) -> np.ndarray:
    if d_model % 2:
        raise ValueError("d_model must be even")
    return _pe_table(max_len, d_model).copy()


class AttentionMaskError(ValueError):
    """Every key position of some query row is masked."""


def _masked_softmax(scores, mask):
    if mask is not None:
        if np.any(np.all(mask, axis=-1)):
            raise AttentionMaskError("attention row with all positions masked")
        scores = np.where(mask, -np.inf, scores)
    scores = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=-1, keepdims=True)


def scaled_dot_attention(Q, K, V, mask=None):
    """softmax(Q K^T / sqrt(d_k)) V, with ``mask`` True marking blocked positions."""
    Q, K, V = np.asarray(Q), np.asarray(K), np.asarray(V)
    if Q.shape[-1] != K.shape[-1] or K.shape[-2] != V.shape[-2]:
        raise ValueError(f"incompatible shapes Q{Q.shape} K{K.shape} V{V.shape}")
    scores = Q @ np.swapaxes(K, -1, -2) / math.sqrt(Q.shape[-1])
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != scores.shape[-mask.ndim :]:
            raise ValueError(f"mask shape {mask.shape} does not match scores {scores.shape}")
        mask = np.broadcast_to(mask, scores.shape)
    return _masked_softmax(scores, mask) @ V


# -- layers: each forward returns (out, cache); each backward fills ``grads``


def _dropout(x, rate, rng):
    if rng is None or rate == 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def _layer_norm(params, prefix, x):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + LN_EPS)
    xhat = xc * inv
    return xhat * params[prefix + ".gamma"] + params[prefix + ".beta"], (xhat, inv)


def _layer_norm_back(params, grads, prefix, dy, cache):
    xhat, inv = cache
    grads[prefix + ".gamma"] += (dy * xhat).sum(axis=(0, 1))
    grads[prefix + ".beta"] += dy.sum(axis=(0, 1))
    g = dy * params[prefix + ".gamma"]
    return inv * (
        g - g.mean(axis=-1, keepdims=True) - xhat * (g * xhat).mean(axis=-1, keepdims=True)
    )


def _ffn(params, prefix, x):
    pre = x @ params[prefix + ".w1"] + params[prefix + ".b1"]
    h = np.maximum(pre, 0)
    return h @ params[prefix + ".w2"] + params[prefix + ".b2"], (x, pre > 0, h)


def _ffn_back(params, grads, prefix, dy, cache):
    x, active, h = cache
    d_out = dy.shape[-1]
    grads[prefix + ".w2"] += h.reshape(-1, h.shape[-1]).T @ dy.reshape(-1, d_out)
    grads[prefix + ".b2"] += dy.sum(axis=(0, 1))
    dpre = (dy @ params[prefix + ".w2"].T) * active
    grads[prefix + ".w1"] += x.reshape(-1, x.shape[-1]).T @ dpre.reshape(-1, dpre.shape[-1])
    grads[prefix + ".b1"] += dpre.sum(axis=(0, 1))
    return dpre @ params[prefix + ".w1"].T


def _split(x, heads):
    b, n, d = x.shape
    return x.reshape(b, n, heads, d // heads).transpose(0, 2, 1, 3)


def _merge(x):
    b, h, n, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, n, h * dk)


def _mha(params, prefix, xq, xkv, mask, heads):
    p = prefix + "."
    q = _split(xq @ params[p + "wq"] + params[p + "bq"], heads)
    k = _split(xkv @ params[p + "wk"] + params[p + "bk"], heads)
    v = _split(xkv @ params[p + "wv"] + params[p + "bv"], heads)
    scale = 1.0 / math.sqrt(q.shape[-1])
    probs = _masked_softmax((q @ k.transpose(0, 1, 3, 2)) * scale, mask)
    merged = _merge(probs @ v)
    out = merged @ params[p + "wo"] + params[p + "bo"]
    return out, (xq, xkv, q, k, v, probs, merged, scale)


def _mha_back(params, grads, prefix, dout, cache, heads):
    xq, xkv, q, k, v, probs, merged, scale = cache
    p = prefix + "."
    d = dout.shape[-1]
    grads[p + "wo"] += merged.reshape(-1, d).T @ dout.reshape(-1, d)
    grads[p + "bo"] += dout.sum(axis=(0, 1))
    dctx = _split(dout @ params[p + "wo"].T, heads)
    dprobs = dctx @ v.transpose(0, 1, 3, 2)
    dv = probs.transpose(0, 1, 3, 2) @ dctx
    dscores = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True)) * scale
    dq = _merge(dscores @ k)
    dk = _merge(dscores.transpose(0, 1, 3, 2) @ q)
    dv = _merge(dv)
    xq2, xkv2 = xq.reshape(-1, d), xkv.reshape(-1, d)
    grads[p + "wq"] += xq2.T @ dq.reshape(-1, d)
    grads[p + "bq"] += dq.sum(axis=(0, 1))
    grads[p + "wk"] += xkv2.T @ dk.reshape(-1, d)
    grads[p + "bk"] += dk.sum(axis=(0, 1))
    grads[p + "wv"] += xkv2.T @ dv.reshape(-1, d)
    grads[p + "bv"] += dv.sum(axis=(0, 1))
    dxq = dq @ params[p + "wq"].T
    dxkv = dk @ params[p + "wk"].T + dv @ params[p + "wv"].T
    return dxq, dxkv


def _embed(params, name, ids, config):
    scale = math.sqrt(config.d_model)
    table = params[name]
    pe = _pe_table(config.max_len, config.d_model)[: ids.shape[1]]
    return table[ids] * scale + pe.astype(table.dtype)


def _embed_back(grads, name, ids, dx, config):
    np.add.at(grads[name], ids.reshape(-1), dx.reshape(-1, dx.shape[-1]) * math.sqrt(config.d_model))


def _check_ids(ids, vocab_size, max_len, what):
    ids = np.asarray(ids)
    if ids.ndim != 2:
        raise ValueError(f"{what} ids must be a 2-D batch, got shape {ids.shape}")
    if ids.shape[1] > max_len or ids.shape[1] == 0:
        raise ValueError(f"{what} length {ids.shape[1]} outside [1, {max_len}]")
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        raise ValueError(f"{what} ids outside vocabulary of size {vocab_size}")
    return ids


def _causal_mask(n):
    return np.triu(np.ones((n, n), dtype=bool), k=1)[None, None]


def _encode(params, config, src, rng, caches):
    x = _embed(params, "src_embedding", src, config)
    x, keep = _dropout(x, config.dropout_rate, rng)
    caches.append(keep)
    mask = (src == PAD)[:, None, None, :]
    for i in range(config.enc_layers):
        p = f"enc{i}"
        a, c_attn = _mha(params, p + ".self_attn", x, x, mask, config.heads)
        a, k1 = _dropout(a, config.dropout_rate, rng)
        h, c_ln1 = _layer_norm(params, p + ".ln1", x + a)
        f, c_ffn = _ffn(params, p + ".ffn", h)
        f, k2 = _dropout(f, config.dropout_rate, rng)
        x, c_ln2 = _layer_norm(params, p + ".ln2", h + f)
        caches.append((c_attn, k1, c_ln1, c_ffn, k2, c_ln2))
    return x, mask


def _decode(params, config, tgt, memory, mem_mask, rng, caches):
    y = _embed(params, "tgt_embedding", tgt, config)
    y, keep = _dropout(y, config.dropout_rate, rng)
    caches.append(keep)
    causal = _causal_mask(tgt.shape[1])
    for i in range(config.dec_layers):
        p = f"dec{i}"
        a, c_self = _mha(params, p + ".self_attn", y, y, causal, config.heads)
        a, k1 = _dropout(a, config.dropout_rate, rng)
        h1, c_ln1 = _layer_norm(params, p + ".ln1", y + a)
        c, c_cross = _mha(params, p + ".cross_attn", h1, memory, mem_mask, config.heads)
        c, k2 = _dropout(c, config.dropout_rate, rng)
        h2, c_ln2 = _layer_norm(params, p + ".ln2", h1 + c)
        f, c_ffn = _ffn(params, p + ".ffn", h2)
        f, k3 = _dropout(f, config.dropout_rate, rng)
        y, c_ln3 = _layer_norm(params, p + ".ln3", h2 + f)
        caches.append((c_self, k1, c_ln1, c_cross, k2, c_ln2, c_ffn, k3, c_ln3))
    return y @ params["out.w"] + params["out.b"], y


def _apply_keep(dx, keep):
    return dx if keep is None else dx * keep


def forward(params, config: ModelConfig, src_ids, tgt_ids, training=False, rng=None):
    """Logits ``[batch, tgt_len, tgt_vocab]`` for teacher-forced decoder inputs.

    Dropout is active only when ``training`` is set and ``rng`` is given.
    """
    logits, _ = _forward(params, config, src_ids, tgt_ids, rng if training else None)
    return logits


def _forward(params, config, src_ids, tgt_ids, rng):
    src = _check_ids(src_ids, config.src_vocab_size, config.max_len, "source")
    tgt = _check_ids(tgt_ids, config.tgt_vocab_size, config.max_len, "target")
    if src.shape[0] != tgt.shape[0]:
        raise ValueError(f"batch sizes differ: {src.shape[0]} vs {tgt.shape[0]}")
    enc_caches, dec_caches = [], []
    memory, mem_mask = _encode(params, config, src, rng, enc_caches)
    logits, top = _decode(params, config, tgt, memory, mem_mask, rng, dec_caches)
    return logits, (src, tgt, enc_caches, dec_caches, top)


def _backward(params, config, dlogits, fcache):
    src, tgt, enc_caches, dec_caches, top = fcache
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    d = config.d_model
    grads["out.w"] += top.reshape(-1, d).T @ dlogits.reshape(-1, dlogits.shape[-1])
    grads["out.b"] += dlogits.sum(axis=(0, 1))
    dy = dlogits @ params["out.w"].T
    dmemory = 0.0
    for i in reversed(range(config.dec_layers)):
        p = f"dec{i}"
        c_self, k1, c_ln1, c_cross, k2, c_ln2, c_ffn, k3, c_ln3 = dec_caches[i + 1]
        ds = _layer_norm_back(params, grads, p + ".ln3", dy, c_ln3)
        dh2 = ds + _ffn_back(params, grads, p + ".ffn", _apply_keep(ds, k3), c_ffn)
        ds = _layer_norm_back(params, grads, p + ".ln2", dh2, c_ln2)
        dq, dmem = _mha_back(params, grads, p + ".cross_attn", _apply_keep(ds, k2), c_cross, config.heads)
        dmemory = dmemory + dmem
        dh1 = ds + dq
        ds = _layer_norm_back(params, grads, p + ".ln1", dh1, c_ln1)
        dq, dkv = _mha_back(params, grads, p + ".self_attn", _apply_keep(ds, k1), c_self, config.heads)
        dy = ds + dq + dkv
    _embed_back(grads, "tgt_embedding", tgt, _apply_keep(dy, dec_caches[0]), config)

    dx = dmemory
    for i in reversed(range(config.enc_layers)):
        p = f"enc{i}"
        c_attn, k1, c_ln1, c_ffn, k2, c_ln2 = enc_caches[i + 1]
        ds = _layer_norm_back(params, grads, p + ".ln2", dx, c_ln2)
        dh = ds + _ffn_back(params, grads, p + ".ffn", _apply_keep(ds, k2), c_ffn)
        ds = _layer_norm_back(params, grads, p + ".ln1", dh, c_ln1)
        dq, dkv = _mha_back(params, grads, p + ".self_attn", _apply_keep(ds, k1), c_attn, config.heads)
        dx = ds + dq + dkv
    if not np.isscalar(dx):
        _embed_back(grads, "src_embedding", src, _apply_keep(dx, enc_caches[0]), config)
    return grads


def loss_and_grads(params, config, src_ids, tgt_in, tgt_out, rng=None):
    """Masked cross-entropy, correct/total token counts, and parameter gradients."""
    logits, fcache = _forward(params, config, src_ids, tgt_in, rng)
    tgt_out = np.asarray(tgt_out)
    valid = tgt_out != PAD
    n = int(valid.sum())
    if n == 0:
        raise ValueError("every target position is PAD")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    logp = shifted - logz
    picked = np.take_along_axis(logp, tgt_out[..., None], axis=-1)[..., 0]
    loss = float(-(picked * valid).sum() / n)
    correct = int(((logits.argmax(axis=-1) == tgt_out) & valid).sum())

    dlogits = np.exp(logp)
    np.put_along_axis(
        dlogits, tgt_out[..., None], np.take_along_axis(dlogits, tgt_out[..., None], axis=-1) - 1.0, axis=-1
    )
    dlogits *= (valid / n)[..., None].astype(dlogits.dtype)
    grads = _backward(params, config, dlogits, fcache)
    return loss, correct, n, grads


def trim_batch(ids: np.ndarray) -> np.ndarray:
    """Drop trailing all-PAD columns; exact because PAD keys are masked and PAD targets ignored."""
    nonpad = np.nonzero((ids != PAD).any(axis=0))[0]
    width = int(nonpad[-1]) + 1 if len(nonpad) else 1
    return ids[:, :width]


@dataclass
class DecodeResult:
    ids: np.ndarray
    truncated: bool


def greedy_decode_batch(params, config: ModelConfig, src_ids) -> list[DecodeResult]:
    """Argmax decoding from BOS until EOS or ``max_len - 1`` generated ids.

    Each result holds the generated ids (BOS excluded, EOS kept when emitted).
    """
    src = _check_ids(src_ids, config.src_vocab_size, config.max_len, "source")
    src = trim_batch(src)
    memory, mem_mask = _encode(params, config, src, None, [])
    b = src.shape[0]
    seq = np.full((b, 1), BOS, dtype=np.int64)
    done = np.zeros(b, dtype=bool)
    for _ in range(config.max_len - 1):
        logits, _ = _decode(params, config, seq, memory, mem_mask, None, [])
        nxt = logits[:, -1].argmax(axis=-1)
        nxt = np.where(done, PAD, nxt)
        seq = np.concatenate([seq, nxt[:, None]], axis=1)
        done |= nxt == EOS
        if done.all():
            break
    results = []
    for row, finished in zip(seq[:, 1:], done):
        if finished:
            stop = int(np.nonzero(row == EOS)[0][0]) + 1
            results.append(DecodeResult(row[:stop].copy(), False))
        else:
            results.append(DecodeResult(row.copy(), True))
    return results


def greedy_decode(params, config: ModelConfig, src_ids) -> DecodeResult:
    src = np.asarray(src_ids)
    if src.ndim != 1:
        raise ValueError("greedy_decode takes one encoded source; use greedy_decode_batch")
    return greedy_decode_batch(params, config, src[None, :])[0]
