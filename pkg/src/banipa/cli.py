"""Command-line entry point: train, transcribe, eval, segment, stats, dict."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from banipa import corpus, store
from banipa.evaluate import ablation_report, format_report
from banipa.model import ModelConfig
from banipa.pipeline import IpaDictionary, ModelContext, RunReport, preset, transcribe_many
from banipa.segmenter import format_tokens, segment
from banipa.trainer import TrainConfig, evaluate, encode_pairs, train
from banipa.vocab import build_vocab, load_vocab, save_vocab

log = logging.getLogger("banipa")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def vocab_paths(checkpoint) -> tuple[Path, Path]:
    checkpoint = Path(checkpoint)
    return (
        checkpoint.with_name(checkpoint.name + ".src.vocab"),
        checkpoint.with_name(checkpoint.name + ".tgt.vocab"),
    )


def load_model(checkpoint) -> ModelContext:
    params, config, _ = store.load_checkpoint(checkpoint)
    src_path, tgt_path = vocab_paths(checkpoint)
    return ModelContext(params, config, load_vocab(src_path), load_vocab(tgt_path))


def _load_dict(path) -> IpaDictionary:
    path = Path(path)
    return store.load_dictionary(path) if path.exists() else IpaDictionary()


def _read_lines(path) -> list[str]:
    raw = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    text = raw.decode("utf-8")
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


def _write_text(path, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_train(args) -> int:
    samples = corpus.load_corpus(args.data, has_ipa=True)
    pairs, skipped = corpus.extract_word_pairs(samples)
    log.info("%d word pairs, %d mismatched samples skipped", len(pairs), skipped)
    spec = corpus.SplitSpec.from_ratio(args.split, seed=args.seed)
    train_pairs, val_pairs, test_pairs = corpus.split_pairs(pairs, spec)
    src_vocab = build_vocab(p.grapheme_word for p in pairs)
    tgt_vocab = build_vocab(p.ipa_word for p in pairs)
    model_config = ModelConfig(
        src_vocab_size=src_vocab.size,
        tgt_vocab_size=tgt_vocab.size,
        d_model=args.d_model,
        heads=args.heads,
        d_ff=args.d_ff,
        max_len=args.max_len,
        dropout_rate=args.dropout,
    )
    train_config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
        max_len=args.max_len,
    )
    params, history = train(train_config, model_config, train_pairs, val_pairs, src_vocab, tgt_vocab)

    store.save_checkpoint(params, model_config, args.out_checkpoint, seed=args.seed)
    src_path, tgt_path = vocab_paths(args.out_checkpoint)
    save_vocab(src_vocab, src_path)
    save_vocab(tgt_vocab, tgt_path)
    store.save_dictionary(IpaDictionary(dict(train_pairs)), args.out_dict)
    history_path = args.history or f"{args.out_checkpoint}.history.tsv"
    Path(history_path).write_text(history.to_tsv(), encoding="utf-8")

    last = history[-1]
    print(f"train_loss: {last.train_loss:.6f}")
    print(f"train_accuracy: {last.train_accuracy:.6f}")
    print(f"val_loss: {last.val_loss:.6f}")
    print(f"val_accuracy: {last.val_accuracy:.6f}")
    print(f"val_seq_accuracy: {last.val_seq_accuracy:.6f}")
    if test_pairs:
        src, tgt = encode_pairs(test_pairs, src_vocab, tgt_vocab, args.max_len)
        tl, ta, ts = evaluate(params, model_config, src, tgt)
        print(f"test_loss: {tl:.6f}")
        print(f"test_accuracy: {ta:.6f}")
        print(f"test_seq_accuracy: {ts:.6f}")
    return EXIT_OK


def cmd_transcribe(args) -> int:
    config = preset(args.preset)
    model = load_model(args.checkpoint)
    dictionary = _load_dict(args.dict)
    lines = _read_lines(args.input)
    report = RunReport()
    out = transcribe_many(lines, config, dictionary, model, report)
    _write_text(args.output, "".join(line + "\n" for line in out))
    store.save_dictionary(dictionary, args.dict)
    sys.stderr.write(report.format())
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        samples = corpus.load_corpus(args.data, has_ipa=True)
    except corpus.MissingColumnError as e:
        raise UsageError(str(e)) from None
    names = [n.strip() for n in args.presets.split(",") if n.strip()]
    try:
        configs = [preset(n) for n in names]
    except ValueError as e:
        raise UsageError(str(e)) from None
    if not configs:
        raise UsageError("--presets names no preset")
    model = load_model(args.checkpoint)
    rows = ablation_report(configs, samples, _load_dict(args.dict), model)
    sys.stdout.write(format_report(rows))
    return EXIT_OK


def cmd_stats(args) -> int:
    samples = corpus.load_corpus(args.data, has_ipa=None)
    sys.stdout.write(corpus.compute_stats(samples).format())
    return EXIT_OK


def cmd_segment(args) -> int:
    sys.stdout.write(format_tokens(segment(args.text)))
    return EXIT_OK


def cmd_dict(args) -> int:
    if args.action == "export":
        dictionary = store.load_dictionary(args.dict)
        if args.file == "-":
            for word, ipa in sorted(dictionary.entries().items()):
                sys.stdout.write(f"{word}\t{ipa}\n")
        else:
            store.save_dictionary(dictionary, args.file)
        log.info("exported %d entries", len(dictionary))
        return EXIT_OK
    incoming = store.load_dictionary(args.file)
    dictionary = _load_dict(args.dict)
    added = conflicts = 0
    for word, ipa in sorted(incoming.entries().items()):
        existing = dictionary.get(word)
        if existing is None:
            dictionary.insert(word, ipa)
            added += 1
        elif existing != ipa:
            conflicts += 1
    store.save_dictionary(dictionary, args.dict)
    sys.stderr.write(f"imported: {added}\nconflicts_kept_existing: {conflicts}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="banipa", description="Bangla text to IPA transcription")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a text/ipa CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out-checkpoint", required=True)
    p.add_argument("--out-dict", required=True)
    p.add_argument("--history", help="epoch history TSV (default: <checkpoint>.history.tsv)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--split", default="90:5:5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-model", type=int, default=512)
    p.add_argument("--heads", type=int, default=8)
    p.add_argument("--d-ff", type=int, default=2560)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--max-len", type=int, default=64)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("transcribe", help="transcribe one sentence per line")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dict", required=True, help="dictionary file, created if missing and updated in place")
    p.add_argument("--preset", default="D", choices=["A", "B", "C", "D"])
    p.add_argument("--in", dest="input", default="-")
    p.add_argument("--out", dest="output", default="-")
    p.set_defaults(func=cmd_transcribe)

    p = sub.add_parser("eval", help="WER per preset on a labelled CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--presets", default="A,B,C,D")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("segment", help="print the token table for a string")
    p.add_argument("--text", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("stats", help="dataset statistics and word-count histogram")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dict", help="export or import a dictionary file")
    p.add_argument("action", choices=["export", "import"])
    p.add_argument("--dict", required=True)
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_dict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"banipa: error: {e}\n")
        return EXIT_USAGE
    except (ValueError, OSError, FloatingPointError) as e:
        sys.stderr.write(f"banipa: {e}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
