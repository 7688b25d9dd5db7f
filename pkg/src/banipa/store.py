"""Checkpoint and dictionary files."""
from __future__ import annotations

import dataclasses
import os
from pathlib import Path

import numpy as np

from banipa.model import ModelConfig, param_shapes
from banipa.pipeline import IpaDictionary

MAGIC = b"banipa-ckpt v1"
FORMAT_VERSION = "1"


class CheckpointError(ValueError):
    pass


class DictionaryFileError(ValueError):
    pass


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def save_checkpoint(params, config: ModelConfig, path, seed: int = 0) -> None:
    shapes = param_shapes(config)
    if list(params) != list(shapes):
        raise CheckpointError("parameter names do not match the configuration")
    header = [f"format_version={FORMAT_VERSION}"]
    header += [f"{f.name}={getattr(config, f.name)}" for f in dataclasses.fields(config)]
    header.append(f"seed={seed}")
    chunks = [MAGIC + b"\n", "\n".join(header).encode("utf-8") + b"\n\n"]
    for name, shape in shapes.items():
        arr = np.asarray(params[name])
        if arr.shape != shape:
            raise CheckpointError(f"{name}: shape {arr.shape}, expected {shape}")
        raw = arr.astype("<f4", copy=False).tobytes()
        chunks.append(f"{name}\n{' '.join(map(str, shape))}\n{len(raw)}\n".encode("utf-8"))
        chunks.append(raw)
    _atomic_write(Path(path), b"".join(chunks))


def _config_from_header(fields: dict[str, str]) -> ModelConfig:
    kwargs = {}
    for f in dataclasses.fields(ModelConfig):
        if f.name not in fields:
            raise CheckpointError(f"header lacks {f.name}")
        conv = float if f.name == "dropout_rate" else int
        try:
            kwargs[f.name] = conv(fields[f.name])
        except ValueError:
            raise CheckpointError(f"bad header value {f.name}={fields[f.name]!r}") from None
    try:
        return ModelConfig(**kwargs)
    except ValueError as e:
        raise CheckpointError(f"invalid configuration in header: {e}") from None


def load_checkpoint(path):
    """Read a checkpoint; returns ``(params, config, header)``.

    Everything is validated before any array is handed back.
    """
    data = Path(path).read_bytes()
    pos = 0

    def line() -> str:
        nonlocal pos
        end = data.find(b"\n", pos)
        if end < 0:
            raise CheckpointError(f"{path}: truncated file")
        out = data[pos:end]
        pos = end + 1
        try:
            return out.decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError(f"{path}: corrupt header or tensor record") from None

    first = line()
    if first.encode() != MAGIC:
        raise CheckpointError(f"{path}: not a banipa checkpoint (got {first[:40]!r})")
    header: dict[str, str] = {}
    while True:
        entry = line()
        if entry == "":
            break
        key, sep, value = entry.partition("=")
        if not sep:
            raise CheckpointError(f"{path}: bad header line {entry!r}")
        header[key] = value
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {header.get('format_version')!r}"
        )
    config = _config_from_header(header)
    expected = param_shapes(config)

    params = {}
    while pos < len(data):
        name = line()
        shape_text = line()
        try:
            shape = tuple(int(x) for x in shape_text.split())
            nbytes = int(line())
        except ValueError:
            raise CheckpointError(f"{path}: bad shape or length for tensor {name!r}") from None
        if name in params:
            raise CheckpointError(f"{path}: duplicate tensor {name!r}")
        if name not in expected:
            raise CheckpointError(f"{path}: unexpected tensor {name!r}")
        if shape != expected[name]:
            raise CheckpointError(
                f"{path}: tensor {name!r} has shape {shape}, header config implies {expected[name]}"
            )
        if nbytes != int(np.prod(shape, dtype=np.int64)) * 4:
            raise CheckpointError(f"{path}: tensor {name!r} byte length {nbytes} disagrees with shape")
        if pos + nbytes > len(data):
            raise CheckpointError(f"{path}: truncated inside tensor {name!r}")
        params[name] = np.frombuffer(data, dtype="<f4", count=nbytes // 4, offset=pos).reshape(shape).astype(np.float32)
        pos += nbytes
    missing = [n for n in expected if n not in params]
    if missing:
        raise CheckpointError(f"{path}: truncated file, missing tensors starting at {missing[0]!r}")
    return {n: params[n] for n in expected}, config, header


def save_dictionary(dictionary: IpaDictionary, path) -> None:
    lines = []
    for word, ipa in sorted(dictionary.entries().items()):
        if "\t" in word or "\n" in word or "\t" in ipa or "\n" in ipa:
            raise DictionaryFileError(f"entry {word!r} contains a tab or newline")
        lines.append(f"{word}\t{ipa}\n")
    _atomic_write(Path(path), "".join(lines).encode("utf-8"))


def load_dictionary(path) -> IpaDictionary:
    text = Path(path).read_bytes().decode("utf-8")
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        if line.count("\t") != 1:
            raise DictionaryFileError(f"{path}: line {lineno}: expected exactly one tab")
        word, ipa = line.split("\t")
        if word in entries:
            raise DictionaryFileError(f"{path}: line {lineno}: duplicate word {word!r}")
        entries[word] = ipa
    return IpaDictionary(entries)
