"""Command-line entry point: ``seslemma <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or alignment
error, 3 model error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import ses
from .corpus_io import read_conllu, replace_lemmas, format_conllu
from .errors import ConfigError, DataError, ModelError, SeslemmaError
from .evaluation import evaluate_run
from .schemes import LabelScheme, inventory_tsv, scheme_inventory, sentence_labels
from .stats import corpus_stats
from .tagger import (TrainConfig, jackknife_tags, lemma_sequences, lemmatize, load_model,
                     morph_sequences, predict, save_model, train)

log = logging.getLogger("seslemma")

BOOLEAN_KEYS = {"allow_copy", "both_copy_modes", "normalize"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _read_config(path) -> dict[str, str]:
    """Parse a ``key=value`` file; ``#`` starts a comment line."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _config_defaults(values: dict[str, str], parser: argparse.ArgumentParser) -> dict:
    known = {a.dest for a in parser._actions}
    defaults = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key in BOOLEAN_KEYS:
            lowered = value.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"config key {key!r} needs a boolean, got {value!r}")
            defaults[key] = lowered in ("true", "1", "yes")
        else:
            defaults[key] = value
    return defaults


def _existing(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    return path


def _read(path, args):
    return read_conllu(_existing(path), args.feats_format, normalize=args.normalize)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _emit(text: str, path) -> None:
    out = _open_out(path)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()


def _load(path, task: str | None = None):
    try:
        model = load_model(path)
    except OSError as exc:
        raise ModelError(f"{path}: cannot read model ({exc.strerror or exc})") from None
    if task is not None and model.task != task:
        raise ModelError(f"{path}: expected a {task} model, found a {model.task} model")
    return model


def _scheme(name) -> str:
    try:
        return LabelScheme.parse(name).value
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_encode(args) -> int:
    corpus = _read(args.input, args)
    scheme = _scheme(args.scheme)
    lines, skipped = [], 0
    for sentence in corpus.sentences:
        labels = sentence_labels(sentence, scheme, args.pos_source)
        rows = []
        for token, label in zip(sentence.tokens, labels):
            if not token.has_lemma:
                skipped += 1
                continue
            rows.append(f"{token.form}\t{label}\t{ses.encode(token.form, token.lemma, args.allow_copy)}\n")
        if rows:
            lines.append("".join(rows) + "\n")
    if skipped:
        log.warning("skipped %d tokens without a lemma", skipped)
    _emit("".join(lines), args.output)
    return 0


def cmd_classes(args) -> int:
    corpus = _read(args.input, args)
    classes, skipped = ses.collect_classes(corpus, args.allow_copy)
    if skipped:
        log.warning("skipped %d tokens without a lemma", skipped)
    _emit(ses.classes_tsv(classes), args.output)
    return 0


def cmd_inventory(args) -> int:
    corpus = _read(args.input, args)
    _, counts = scheme_inventory(corpus, _scheme(args.scheme), args.pos_source)
    _emit(inventory_tsv(counts), args.output)
    return 0


def _train_config(args, task: str, channel: str = "none", scheme=None) -> TrainConfig:
    for flag in ("train", "model"):
        if not getattr(args, flag):
            raise ConfigError(f"--{flag} is required")
    try:
        return TrainConfig(epochs=int(args.epochs), seed=int(args.seed), task=task,
                           scheme=scheme or _scheme(args.scheme), morph_channel=channel,
                           allow_copy=bool(getattr(args, "allow_copy", False)),
                           pos_source=args.pos_source)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _accuracy(pairs) -> float:
    pairs = list(pairs)
    return sum(g == p for g, p in pairs) / len(pairs) if pairs else 0.0


def cmd_train_morph(args) -> int:
    config = _train_config(args, "morph")
    train_corpus = _read(args.train, args)
    dev = _read(args.dev, args) if args.dev else None
    data = morph_sequences(train_corpus, config.scheme, config.pos_source)
    dev_data = morph_sequences(dev, config.scheme, config.pos_source) if dev else None

    def report(epoch, model):
        if dev_data:
            acc = _accuracy((g, p) for s in dev_data
                            for g, p in zip(s.labels, predict(model, s.forms)))
            print(f"epoch {epoch}\tdev_accuracy\t{acc:.4f}", flush=True)

    model = train(data, config, on_epoch=report)
    save_model(model, args.model)
    return 0


def cmd_train_lemma(args) -> int:
    channel, morph_model = args.channel, None
    if channel.startswith("model:"):
        morph_model = _load(channel.split(":", 1)[1], "morph")
        channel = "model"
    elif channel == "model":
        raise ConfigError("--channel model needs a morph model path: model:PATH")
    elif channel not in ("none", "gold"):
        raise ConfigError(f"unknown channel {args.channel!r}")
    if args.jackknife and channel != "model":
        raise ConfigError("--jackknife only applies to --channel model:PATH")
    scheme = morph_model.scheme if morph_model else None
    config = _train_config(args, "lemma", channel, scheme)
    if morph_model is not None:
        config = replace(config, pos_source=morph_model.config.pos_source)
    train_corpus = _read(args.train, args)
    dev = _read(args.dev, args) if args.dev else None

    def gold_morph(corpus):
        return [sentence_labels(s, config.scheme, config.pos_source) for s in corpus.sentences]

    train_morph = dev_morph = None
    if channel != "none":
        if args.jackknife:
            train_morph = jackknife_tags(train_corpus, int(args.jackknife), morph_model.config)
        else:
            train_morph = gold_morph(train_corpus)
        if dev is not None:
            dev_morph = (gold_morph(dev) if channel == "gold"
                         else [predict(morph_model, s.forms) for s in dev.sentences])
    data = lemma_sequences(train_corpus, config.allow_copy, train_morph)

    def report(epoch, model):
        if dev is None:
            return
        pairs = []
        for k, s in enumerate(dev.sentences):
            lemmas = lemmatize(model, s.forms, dev_morph[k] if dev_morph else None)
            pairs.extend((t.lemma, l) for t, l in zip(s.tokens, lemmas) if t.has_lemma)
        print(f"epoch {epoch}\tdev_word_accuracy\t{_accuracy(pairs):.4f}", flush=True)

    model = train(data, config, on_epoch=report)
    if morph_model is not None:
        model.morph_model = str(Path(args.channel.split(":", 1)[1]).resolve())
    save_model(model, args.model)
    return 0


def cmd_predict(args) -> int:
    model = _load(args.model, "lemma")
    morph_model = None
    if model.morph_channel == "model":
        path = args.morph_model or model.morph_model
        if not path:
            raise ModelError("lemma model reads a morph model channel; pass --morph-model")
        morph_model = _load(path, "morph")
        if morph_model.scheme != model.scheme:
            raise ModelError(f"morph model scheme {morph_model.scheme} does not match "
                             f"lemma model scheme {model.scheme}")
    elif args.morph_model:
        raise ModelError(f"lemma model uses the {model.morph_channel!r} channel, "
                         "not a morph model")
    corpus = _read(args.input, args)
    lemmas = []
    for sentence in corpus.sentences:
        if model.morph_channel == "gold":
            morph = sentence_labels(sentence, model.scheme, model.config.pos_source)
        elif morph_model is not None:
            morph = predict(morph_model, sentence.forms)
        else:
            morph = None
        lemmas.append(lemmatize(model, sentence.forms, morph))
    _emit(format_conllu(replace_lemmas(corpus, lemmas)), args.output)
    return 0


def cmd_eval(args) -> int:
    for path in (args.gold, args.pred, args.train_vocab, args.compare):
        if path is not None:
            _existing(path)
    report = evaluate_run(args.gold, args.pred, allow_copy=args.allow_copy,
                          train_vocab_path=args.train_vocab, compare_path=args.compare,
                          per_ses_limit=int(args.per_ses) if args.per_ses is not None else None,
                          mcnemar_method=args.mcnemar_method, feats_format=args.feats_format)
    _emit(report.to_json() if args.format == "json" else report.to_tsv(), args.output)
    return 0


def cmd_stats(args) -> int:
    corpus = _read(args.input, args)
    row = corpus_stats(corpus, args.allow_copy, args.both_copy_modes, args.pos_source)
    _emit(row.to_json() if args.format == "json" else row.to_tsv(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seslemma", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="key=value file supplying option defaults")
        p.add_argument("--feats-format", choices=("unimorph", "ud"), default="unimorph")
        p.add_argument("--normalize", action="store_true", help="NFC-normalize input text")
        p.add_argument("--pos-source", choices=("bundle", "column"), default="bundle",
                       help="POS from the leading feats tag or from column 4")
        return p

    p = command("encode", cmd_encode, "write form/label/SES training triples")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--scheme", default="UPOS")
    p.add_argument("--allow-copy", action="store_true")

    p = command("classes", cmd_classes, "list SES classes with counts")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--allow-copy", action="store_true")

    p = command("inventory", cmd_inventory, "list morphological labels with counts")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--scheme", default="UPOS")

    for name, func, helptext in (
            ("train-morph", cmd_train_morph, "train a morphological tagger"),
            ("train-lemma", cmd_train_lemma, "train a lemmatizer")):
        p = command(name, func, helptext)
        p.add_argument("--train", help="training CoNLL-U file (required)")
        p.add_argument("--dev")
        p.add_argument("--model", help="output model file (required)")
        p.add_argument("--scheme", default="UPOS")
        p.add_argument("--epochs", default="10")
        p.add_argument("--seed", default="42")
        if name == "train-lemma":
            p.add_argument("--channel", default="none",
                           help="morph channel: none, gold or model:PATH")
            p.add_argument("--jackknife", type=int, default=0,
                           help="train on K-fold predicted morph labels (model channel)")
            p.add_argument("--allow-copy", action="store_true")

    p = command("predict", cmd_predict, "lemmatize a CoNLL-U file")
    p.add_argument("--model", required=True)
    p.add_argument("--morph-model")
    p.add_argument("input")
    p.add_argument("output")

    p = command("eval", cmd_eval, "score predicted lemmas against gold")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--train-vocab")
    p.add_argument("--per-ses", help="keep only the N most frequent classes")
    p.add_argument("--compare", help="second prediction file for a McNemar test")
    p.add_argument("--mcnemar-method", choices=("exact", "chi2_corrected"))
    p.add_argument("--allow-copy", action="store_true")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("-o", "--output")

    p = command("stats", cmd_stats, "corpus size and label/SES inventory sizes")
    p.add_argument("input")
    p.add_argument("--allow-copy", action="store_true")
    p.add_argument("--both-copy-modes", action="store_true")
    p.add_argument("--format", choices=("json", "tsv"), default="tsv")
    p.add_argument("-o", "--output")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**_config_defaults(_read_config(args.config), subparser))
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING)
    try:
        args = parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        return args.func(args)
    except SeslemmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
