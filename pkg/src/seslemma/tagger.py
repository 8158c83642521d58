"""Averaged perceptron sequence tagger.

The same tagger serves two tasks: morphological tagging (labels are composed
morphological labels) and lemmatization (labels are rendered SES rules).  A
lemmatizer can read an extra per-token morphology channel, filled either with
gold labels or with the output of a morphological tagger.

Decoding is greedy left to right; the last predicted labels are features for
the next position, in training as well as at inference.
"""

from __future__ import annotations

import gzip
import json
import random
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

from . import ses
from .errors import ConfigError, FormatError, ModelError
from .schemes import LabelScheme, sentence_labels

FORMAT_NAME = "seslemma-tagger"
FORMAT_VERSION = 1

TASKS = ("morph", "lemma")
MORPH_CHANNELS = ("none", "gold", "model")
TEMPLATE_GROUPS = ("context", "affix", "shape", "history", "morph")

PAD = "<PAD>"
START = "<START>"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    seed: int = 42
    history: int = 2
    morph_channel: str = "none"
    templates: tuple[str, ...] = TEMPLATE_GROUPS
    task: str = "lemma"
    scheme: str = "UPOS"
    allow_copy: bool = False
    pos_source: str = "bundle"

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.history < 0:
            raise ConfigError("history must be non-negative")
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.morph_channel not in MORPH_CHANNELS:
            raise ConfigError(f"unknown morph channel {self.morph_channel!r}")
        if self.task == "morph" and self.morph_channel != "none":
            raise ConfigError("a morphological tagger cannot read a morph channel")
        unknown = set(self.templates) - set(TEMPLATE_GROUPS)
        if unknown:
            raise ConfigError(f"unknown feature templates {sorted(unknown)}")
        try:
            LabelScheme.parse(self.scheme)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "templates", tuple(self.templates))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["templates"] = list(self.templates)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TrainConfig:
        known = {f.name for f in fields(cls)}
        d = {k: v for k, v in d.items() if k in known}
        if "templates" in d:
            d["templates"] = tuple(d["templates"])
        return cls(**d)


class TaggedSequence(NamedTuple):
    forms: Sequence[str]
    labels: Sequence[str | None]
    morph: Sequence[str] | None = None


def shape(form: str) -> str:
    if any(c.isdigit() for c in form):
        return "digit"
    if not any(c.isalnum() for c in form):
        return "punct"
    if form == form.lower():
        return "lower"
    if form == form.upper():
        return "upper"
    if form[0] == form[0].upper() and form[1:] == form[1:].lower():
        return "title"
    return "mixed"


def extract_features(forms: Sequence[str], index: int, history: Sequence[str] = (),
                     morph: Sequence[str] | None = None,
                     templates: Sequence[str] = TEMPLATE_GROUPS,
                     history_size: int = 2) -> list[str]:
    """Feature keys for position ``index``.

    ``history`` holds the labels predicted so far for this sentence (only the
    last ``history_size`` are used).  Morph features are emitted only when
    ``morph`` is given and the ``morph`` template group is enabled.
    """
    n = len(forms)
    if not 0 <= index < n:
        raise IndexError(f"index {index} outside sentence of length {n}")

    def word(j):
        return forms[j].lower() if 0 <= j < n else PAD

    form = forms[index]
    low = form.lower()
    feats = ["bias"]
    if "context" in templates:
        feats += [f"w{o:+d}={word(index + o)}" if o else f"w0={low}" for o in (-2, -1, 0, 1, 2)]
    if "affix" in templates:
        feats += [f"suf{k}={low[-k:]}" for k in range(1, 5)]
        feats += [f"pre{k}={low[:k]}" for k in range(1, 4)]
    if "shape" in templates:
        feats.append(f"shape={shape(form)}")
    if "history" in templates:
        padded = [START] * history_size + list(history[-history_size:] if history_size else [])
        for k in range(1, history_size + 1):
            feats.append(f"p{k}=" + "|".join(padded[-k:]))
    if morph is not None and "morph" in templates:
        def tag(j):
            return morph[j] if 0 <= j < n else PAD
        feats += [f"m0={tag(index)}", f"m-1={tag(index - 1)}", f"m+1={tag(index + 1)}",
                  f"m0suf2={tag(index)}|{low[-2:]}"]
    return feats


@dataclass
class TaggerModel:
    config: TrainConfig
    labels: tuple[str, ...]
    weights: dict[str, dict[str, float]]
    averaged: bool = True
    morph_model: str | None = None
    training_errors: tuple[int, ...] = ()

    def __post_init__(self):
        self.labels = tuple(sorted(self.labels))

    @property
    def task(self) -> str:
        return self.config.task

    @property
    def morph_channel(self) -> str:
        return self.config.morph_channel

    @property
    def scheme(self) -> str:
        return self.config.scheme

    def features(self, forms, index, history, morph):
        return extract_features(forms, index, history, morph, self.config.templates,
                                self.config.history)

    def best_label(self, feats: Sequence[str]) -> str:
        return _argmax(self.weights, feats, self.labels)

    def predict(self, forms: Sequence[str], morph: Sequence[str] | None = None) -> list[str]:
        return predict(self, forms, morph)


def _argmax(weights, feats, labels) -> str:
    scores: dict[str, float] = {}
    for f in feats:
        row = weights.get(f)
        if row:
            for label, w in row.items():
                scores[label] = scores.get(label, 0.0) + w
    best, best_score = None, None
    for label, s in scores.items():
        if best_score is None or s > best_score or (s == best_score and label < best):
            best, best_score = label, s
    if len(scores) < len(labels) and (best_score is None or best_score <= 0):
        # some labels were never touched and score exactly zero
        zero = next(l for l in labels if l not in scores)
        if best_score is None or best_score < 0 or zero < best:
            best = zero
    return best


def _check_morph(model: TaggerModel, forms, morph):
    if model.morph_channel == "none":
        if morph is not None:
            raise ConfigError("model has no morph channel but morph labels were given")
        return
    if morph is None:
        raise ConfigError(f"model expects morph labels ({model.morph_channel} channel)")
    if len(morph) != len(forms):
        raise ConfigError("morph labels do not match sentence length")


def predict(model: TaggerModel, forms: Sequence[str], morph: Sequence[str] | None = None) -> list[str]:
    _check_morph(model, forms, morph)
    if not model.labels:
        raise ModelError("model has an empty label inventory")
    out: list[str] = []
    for i in range(len(forms)):
        out.append(model.best_label(model.features(forms, i, out, morph)))
    return out


def lemmatize(model: TaggerModel, forms: Sequence[str], morph: Sequence[str] | None = None) -> list[str]:
    """Predict rules with a lemma model and apply them leniently."""
    if model.task != "lemma":
        raise ModelError(f"expected a lemma model, got a {model.task} model")
    rules = predict(model, forms, morph)
    return [ses.apply_rule(r, f, "lenient") for r, f in zip(rules, forms)]


class _Averager:
    """Weights plus the bookkeeping needed to return their time average."""

    def __init__(self):
        self.weights: dict[str, dict[str, float]] = {}
        self.totals: dict[str, dict[str, float]] = {}
        self.stamps: dict[str, dict[str, int]] = {}
        self.steps = 0

    def _bump(self, feat: str, label: str, delta: float):
        w_row = self.weights.setdefault(feat, {})
        t_row = self.totals.setdefault(feat, {})
        s_row = self.stamps.setdefault(feat, {})
        w = w_row.get(label, 0.0)
        t_row[label] = t_row.get(label, 0.0) + (self.steps - s_row.get(label, 0)) * w
        s_row[label] = self.steps
        w_row[label] = w + delta

    def update(self, gold: str, guess: str, feats):
        """Apply one step.  Weights change only on a mistake."""
        if gold != guess:
            for f in feats:
                self._bump(f, gold, 1.0)
                self._bump(f, guess, -1.0)
        self.steps += 1

    def averaged(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        if not self.steps:
            return out
        for feat in sorted(self.weights):
            row = {}
            for label in sorted(self.weights[feat]):
                w = self.weights[feat][label]
                total = self.totals[feat][label] + (self.steps - self.stamps[feat][label]) * w
                avg = total / self.steps
                if avg:
                    row[label] = avg
            if row:
                out[feat] = row
        return out


def train(data: Sequence[TaggedSequence], config: TrainConfig = TrainConfig(),
          on_epoch: Callable[[int, TaggerModel], None] | None = None) -> TaggerModel:
    """Train an averaged perceptron on ``data``.

    Positions whose gold label is ``None`` are decoded but never update the
    weights.  Sentences are reshuffled every epoch by a generator seeded from
    ``config.seed``.  ``on_epoch`` receives the averaged model after each epoch.
    """
    data = list(data)
    if not data:
        raise ConfigError("no training data")
    labels = set()
    for seq in data:
        if len(seq.labels) != len(seq.forms):
            raise ConfigError("label count does not match sentence length")
        if config.morph_channel != "none":
            if seq.morph is None or len(seq.morph) != len(seq.forms):
                raise ConfigError("morph channel selected but morph labels missing")
        for label in seq.labels:
            if label is None:
                continue
            if not label:
                raise ConfigError("empty gold label")
            labels.add(label)
    if not labels:
        raise ConfigError("no gold labels in training data")
    inventory = tuple(sorted(labels))
    use_morph = config.morph_channel != "none"
    rng = random.Random(config.seed)
    avg = _Averager()
    order = list(range(len(data)))
    errors: list[int] = []
    for epoch in range(1, config.epochs + 1):
        rng.shuffle(order)
        errors.append(0)
        for idx in order:
            seq = data[idx]
            morph = seq.morph if use_morph else None
            history: list[str] = []
            for i, gold in enumerate(seq.labels):
                feats = extract_features(seq.forms, i, history, morph, config.templates,
                                         config.history)
                guess = _argmax(avg.weights, feats, inventory)
                if gold is not None:
                    errors[-1] += gold != guess
                    avg.update(gold, guess, feats)
                else:
                    avg.steps += 1
                history.append(guess)
        if on_epoch is not None:
            on_epoch(epoch, TaggerModel(config, inventory, avg.averaged(),
                                        training_errors=tuple(errors)))
    return TaggerModel(config, inventory, avg.averaged(), training_errors=tuple(errors))


def morph_sequences(corpus, scheme, pos_source: str = "bundle") -> list[TaggedSequence]:
    return [TaggedSequence(s.forms, sentence_labels(s, scheme, pos_source))
            for s in corpus.sentences]


def lemma_sequences(corpus, allow_copy: bool = False,
                    morph: Sequence[Sequence[str]] | None = None) -> list[TaggedSequence]:
    out = []
    for k, sentence in enumerate(corpus.sentences):
        labels = [ses.encode(t.form, t.lemma, allow_copy) if t.has_lemma else None
                  for t in sentence.tokens]
        out.append(TaggedSequence(sentence.forms, labels, None if morph is None else morph[k]))
    return out


def fold_bounds(n: int, k: int) -> list[tuple[int, int]]:
    """Contiguous split of ``n`` items into ``k`` folds, sizes differing by at most one."""
    size, extra = divmod(n, k)
    bounds, start = [], 0
    for f in range(k):
        end = start + size + (1 if f < extra else 0)
        bounds.append((start, end))
        start = end
    return bounds


def jackknife_tags(corpus, k: int, config: TrainConfig) -> list[list[str]]:
    """Tag every sentence with a morph model trained on the other ``k - 1`` folds."""
    if config.task != "morph":
        raise ConfigError("jackknifing needs a morph-task config")
    if k < 2:
        raise ConfigError("jackknifing needs at least 2 folds")
    if k > len(corpus.sentences):
        raise ConfigError(f"{k} folds but only {len(corpus.sentences)} sentences")
    seqs = morph_sequences(corpus, config.scheme, config.pos_source)
    tags: list[list[str]] = []
    for start, end in fold_bounds(len(seqs), k):
        model = train(seqs[:start] + seqs[end:], config)
        tags.extend(predict(model, s.forms) for s in seqs[start:end])
    return tags


def _model_payload(model: TaggerModel) -> dict:
    records = [[feat, label, w]
               for feat in sorted(model.weights)
               for label, w in sorted(model.weights[feat].items())]
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "averaged": model.averaged,
        "morph_model": model.morph_model,
        "labels": list(model.labels),
        "training_errors": list(model.training_errors),
        "weights": records,
    }


def save_model(model: TaggerModel, path) -> None:
    data = json.dumps(_model_payload(model), ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        # mtime=0 and no embedded name keep the file byte-reproducible
        with gzip.GzipFile(filename="", mode="wb", fileobj=fh, mtime=0) as gz:
            gz.write(data)


def load_model(path) -> TaggerModel:
    path = Path(path)
    raw = path.read_bytes()
    if not raw:
        raise FormatError(f"{path}: empty model file")
    try:
        if raw[:2] == b"\x1f\x8b":
            raw = gzip.decompress(raw)
        payload = json.loads(raw.decode("utf-8"))
    except (OSError, EOFError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable model file ({exc})") from None
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise FormatError(f"{path}: not a {FORMAT_NAME} file")
    if payload.get("version") != FORMAT_VERSION:
        raise ModelError(f"{path}: model format version {payload.get('version')!r}, "
                         f"expected {FORMAT_VERSION}")
    try:
        config = TrainConfig.from_dict(payload["config"])
        weights: dict[str, dict[str, float]] = {}
        for feat, label, w in payload["weights"]:
            weights.setdefault(feat, {})[label] = float(w)
        return TaggerModel(config, tuple(payload["labels"]), weights,
                           averaged=bool(payload.get("averaged", True)),
                           morph_model=payload.get("morph_model"),
                           training_errors=tuple(payload.get("training_errors", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed model file ({exc})") from None
