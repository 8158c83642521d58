"""Lemmatization metrics over aligned gold/predicted corpora."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path

from scipy import stats

from . import ses
from .corpus_io import Corpus, read_conllu, vocabulary
from .errors import AlignmentError, ConfigError, DataError

REPORT_SCHEMA_VERSION = 1
NA = "n/a"


def check_alignment(gold: Corpus, pred: Corpus, name: str = "prediction") -> None:
    if len(gold.sentences) != len(pred.sentences):
        n = min(len(gold.sentences), len(pred.sentences))
        raise AlignmentError(
            f"{name} has {len(pred.sentences)} sentences, gold has {len(gold.sentences)} "
            f"(first divergence at sentence {n + 1})", sentence=n + 1)
    for s, (gs, ps) in enumerate(zip(gold.sentences, pred.sentences), start=1):
        for t, (gt, pt) in enumerate(zip(gs.tokens, ps.tokens), start=1):
            if gt.form != pt.form:
                raise AlignmentError(
                    f"{name} diverges at sentence {s}, token {t}: "
                    f"form {pt.form!r} vs gold {gt.form!r}", sentence=s, token=t)
        if len(gs) != len(ps):
            t = min(len(gs), len(ps)) + 1
            raise AlignmentError(
                f"{name} diverges at sentence {s}, token {t}: "
                f"{len(ps)} tokens vs {len(gs)} in gold", sentence=s, token=t)


def _pairs(gold: Corpus, pred: Corpus):
    """Yield (sentence index, gold token, predicted lemma) over annotated gold tokens."""
    check_alignment(gold, pred)
    for k, (gs, ps) in enumerate(zip(gold.sentences, pred.sentences)):
        for gt, pt in zip(gs.tokens, ps.tokens):
            if gt.has_lemma:
                yield k, gt, pt.lemma


def _correct(gold: Corpus, pred: Corpus) -> list[bool]:
    return [gt.lemma == lemma for _, gt, lemma in _pairs(gold, pred)]


def word_accuracy(gold: Corpus, pred: Corpus) -> float | None:
    hits = _correct(gold, pred)
    return sum(hits) / len(hits) if hits else None


def sentence_accuracy(gold: Corpus, pred: Corpus) -> float | None:
    ok: dict[int, bool] = {}
    for k, gt, lemma in _pairs(gold, pred):
        ok[k] = ok.get(k, True) and gt.lemma == lemma
    return sum(ok.values()) / len(ok) if ok else None


@dataclass
class SesRow:
    rule: str
    count: int
    weight: float
    accuracy: float
    examples: list[tuple[str, str]]


def per_ses_report(gold: Corpus, pred: Corpus, allow_copy: bool = False,
                   max_examples: int = 3) -> list[SesRow]:
    """Accuracy per gold SES class, most frequent class first."""
    counts: dict[str, int] = defaultdict(int)
    hits: dict[str, int] = defaultdict(int)
    examples: dict[str, list] = defaultdict(list)
    total = 0
    for _, gt, lemma in _pairs(gold, pred):
        rule = ses.encode(gt.form, gt.lemma, allow_copy)
        counts[rule] += 1
        hits[rule] += gt.lemma == lemma
        if len(examples[rule]) < max_examples:
            examples[rule].append((gt.form, gt.lemma))
        total += 1
    rows = [SesRow(rule, c, 100.0 * c / total, hits[rule] / c, examples[rule])
            for rule, c in counts.items()]
    rows.sort(key=lambda r: (-r.count, r.rule))
    return rows


def vocab_split_accuracy(gold: Corpus, pred: Corpus, train_vocab: set[str]):
    """Return (iv_acc, oov_acc, iv_count, oov_count); an empty split has accuracy None."""
    n = {True: 0, False: 0}
    hit = {True: 0, False: 0}
    for _, gt, lemma in _pairs(gold, pred):
        iv = gt.form in train_vocab
        n[iv] += 1
        hit[iv] += gt.lemma == lemma
    iv_acc = hit[True] / n[True] if n[True] else None
    oov_acc = hit[False] / n[False] if n[False] else None
    return iv_acc, oov_acc, n[True], n[False]


@dataclass
class McNemarResult:
    b: int
    c: int
    statistic: float
    p_value: float
    method: str


MCNEMAR_METHODS = ("exact", "chi2_corrected")


def mcnemar_from_counts(b: int, c: int, method: str | None = None) -> McNemarResult:
    """McNemar test from the discordant counts.

    ``b`` counts tokens only system A gets right, ``c`` those only B gets
    right.  Without an explicit method the exact binomial test is used for
    fewer than 25 discordant pairs.
    """
    if b < 0 or c < 0:
        raise ValueError("discordant counts must be non-negative")
    n = b + c
    if method is None:
        method = "exact" if n < 25 else "chi2_corrected"
    if method not in MCNEMAR_METHODS:
        raise ConfigError(f"unknown McNemar method {method!r}")
    if n == 0:
        return McNemarResult(b, c, 0.0, 1.0, method)
    if method == "exact":
        p = stats.binomtest(min(b, c), n, 0.5).pvalue
        return McNemarResult(b, c, float(min(b, c)), float(min(1.0, p)), method)
    statistic = (abs(b - c) - 1) ** 2 / n
    return McNemarResult(b, c, statistic, float(stats.chi2.sf(statistic, 1)), method)


def mcnemar(gold: Corpus, pred_a: Corpus, pred_b: Corpus, method: str | None = None) -> McNemarResult:
    check_alignment(gold, pred_b, "second prediction")
    a_ok = _correct(gold, pred_a)
    b_ok = _correct(gold, pred_b)
    b = sum(1 for x, y in zip(a_ok, b_ok) if x and not y)
    c = sum(1 for x, y in zip(a_ok, b_ok) if y and not x)
    return mcnemar_from_counts(b, c, method)


@dataclass
class EvalReport:
    token_count: int
    sentence_count: int
    word_accuracy: float | None
    sentence_accuracy: float | None
    per_ses: list[SesRow]
    skipped_tokens: int = 0
    iv_oov: dict | None = None
    mcnemar: McNemarResult | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "token_count": self.token_count,
            "sentence_count": self.sentence_count,
            "skipped_tokens": self.skipped_tokens,
            "word_accuracy": self.word_accuracy,
            "sentence_accuracy": self.sentence_accuracy,
            "per_ses": [
                {"rule": r.rule, "count": r.count, "weight_percent": r.weight,
                 "accuracy": r.accuracy, "examples": [list(e) for e in r.examples]}
                for r in self.per_ses
            ],
            "iv_oov": self.iv_oov,
            "mcnemar": asdict(self.mcnemar) if self.mcnemar else None,
            "provenance": self.provenance,
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n"

    def to_tsv(self) -> str:
        out = [
            "metric\tvalue",
            f"tokens\t{self.token_count}",
            f"sentences\t{self.sentence_count}",
            f"word_accuracy\t{_pct(self.word_accuracy)}",
            f"sentence_accuracy\t{_pct(self.sentence_accuracy)}",
        ]
        if self.iv_oov is not None:
            io = self.iv_oov
            out += [f"iv_accuracy\t{_pct(io['iv_accuracy'])}",
                    f"oov_accuracy\t{_pct(io['oov_accuracy'])}",
                    f"iv_count\t{io['iv_count']}",
                    f"oov_count\t{io['oov_count']}"]
        if self.mcnemar is not None:
            m = self.mcnemar
            out += [f"mcnemar_b\t{m.b}", f"mcnemar_c\t{m.c}",
                    f"mcnemar_statistic\t{m.statistic:.6g}",
                    f"mcnemar_p\t{m.p_value:.6g}", f"mcnemar_method\t{m.method}"]
        out += ["", "SES\tW.acc\t%\tExamples"]
        for r in self.per_ses:
            ex = ", ".join(f"{f}→{l}" for f, l in r.examples)
            out.append(f"{r.rule}\t{100 * r.accuracy:.2f}\t{r.weight:.2f}\t{ex}")
        return "\n".join(out) + "\n"


def _pct(value: float | None) -> str:
    return NA if value is None else f"{100 * value:.2f}"


def _read(path, feats_format):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    return read_conllu(path, feats_format)


def evaluate_run(gold_path, pred_path, *, allow_copy: bool = False, train_vocab_path=None,
                 compare_path=None, per_ses_limit: int | None = None,
                 mcnemar_method: str | None = None, feats_format: str = "unimorph",
                 scheme: str | None = None) -> EvalReport:
    gold = _read(gold_path, feats_format)
    pred = _read(pred_path, feats_format)
    check_alignment(gold, pred)
    rows = per_ses_report(gold, pred, allow_copy)
    if per_ses_limit is not None:
        rows = rows[:per_ses_limit]
    evaluated = sum(1 for t in gold.tokens() if t.has_lemma)
    report = EvalReport(
        token_count=evaluated,
        sentence_count=len(gold.sentences),
        word_accuracy=word_accuracy(gold, pred),
        sentence_accuracy=sentence_accuracy(gold, pred),
        per_ses=rows,
        skipped_tokens=gold.token_count - evaluated,
        provenance={"gold": str(gold_path), "pred": str(pred_path),
                    "allow_copy": allow_copy, "scheme": scheme},
    )
    if train_vocab_path is not None:
        vocab = vocabulary(_read(train_vocab_path, feats_format))
        iv_acc, oov_acc, iv_n, oov_n = vocab_split_accuracy(gold, pred, vocab)
        report.iv_oov = {"iv_accuracy": iv_acc, "oov_accuracy": oov_acc,
                         "iv_count": iv_n, "oov_count": oov_n}
        report.provenance["train_vocab"] = str(train_vocab_path)
    if compare_path is not None:
        other = _read(compare_path, feats_format)
        report.mcnemar = mcnemar(gold, pred, other, mcnemar_method)
        report.provenance["compare"] = str(compare_path)
    return report
