"""Acceptance criteria, one test per criterion.

Criteria 3, 4 and 8 read the SIGMORPHON 2019 (task 2) UniMorph-converted
treebanks.  Point SESLEMMA_DATA at a directory holding them (searched
recursively); without it those tests are skipped.
"""

import itertools
import os
import random
import time
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from seslemma import ses
from seslemma.cli import main
from seslemma.corpus_io import parse_conllu, read_conllu, replace_lemmas
from seslemma.evaluation import (mcnemar_from_counts, per_ses_report, vocab_split_accuracy,
                                 word_accuracy)
from seslemma.schemes import LabelScheme, scheme_inventory, sentence_labels
from seslemma.stats import corpus_stats
from seslemma.tagger import TrainConfig, lemma_sequences, lemmatize, train

import synth
from oracles import all_scripts, chi2_1df_sf, make_corpus, replay, with_lemmas


def find_dataset(name):
    root = os.environ.get("SESLEMMA_DATA")
    if not root:
        pytest.skip("SESLEMMA_DATA not set; dataset-backed criterion not run")
    hits = sorted(Path(root).rglob(name))
    if not hits:
        pytest.skip(f"{name} not found under {root}")
    return hits[0]


# -- 1 ---------------------------------------------------------------------

_RANGES = [(0x41, 0x5A), (0x61, 0x7A), (0xC0, 0x17F), (0x391, 0x3C9), (0x410, 0x44F),
           (0x20, 0x7E), (0x4E00, 0x4E50), (0x10A0, 0x10FF)]


def _random_char(rng):
    if rng.random() < 0.1:  # anywhere outside the surrogate block
        while True:
            c = rng.randrange(0x20, 0x30000)
            if not 0xD800 <= c <= 0xDFFF:
                return chr(c)
    lo, hi = rng.choice(_RANGES)
    return chr(rng.randint(lo, hi))


def _random_pairs(n, seed):
    rng = random.Random(seed)
    for _ in range(n):
        form = "".join(_random_char(rng) for _ in range(rng.randint(1, 12)))
        if rng.random() < 0.5:
            lemma = "".join(_random_char(rng) for _ in range(rng.randint(1, 12)))
        else:  # related pair: shared stem, new ending, maybe recased
            lemma = form[:rng.randint(0, len(form))]
            lemma += "".join(_random_char(rng) for _ in range(rng.randint(0, 3)))
            if rng.random() < 0.3:
                lemma = lemma.upper()
            lemma = lemma[:12] or form
        yield form, lemma


def test_ac1_ses_roundtrip(fixture_corpora, synth_train):
    start = time.perf_counter()
    failures = []
    pairs = list(_random_pairs(100_000, seed=2019))
    for corpus in [*fixture_corpora, synth_train]:
        pairs += [(t.form, t.lemma) for t in corpus.tokens() if t.has_lemma]
    for allow_copy in (False, True):
        for form, lemma in pairs:
            rule = ses.encode(form, lemma, allow_copy)
            if ses.apply_rule(rule, form, "strict") != lemma:
                failures.append((form, lemma, allow_copy))
    elapsed = time.perf_counter() - start
    print(f"AC1: {len(pairs)} pairs x 2 copy settings, {len(failures)} failures, {elapsed:.1f}s")
    assert not failures[:5]
    assert elapsed < 30


# -- 2 ---------------------------------------------------------------------

def test_ac2_edit_script_minimality():
    start = time.perf_counter()
    words = ["".join(w) for n in range(5) for w in itertools.product("abc", repeat=n)]
    checked = 0
    for allow_copy in (False, True):
        for source, target in itertools.product(words, repeat=2):
            script = ses.min_edit_script(source, target, allow_copy)
            best = min(len(s) for s in all_scripts(source, target, allow_copy))
            assert len(script) == best, (source, target, allow_copy)
            assert replay(source, script) == target
            checked += 1
    elapsed = time.perf_counter() - start
    print(f"AC2: {checked} pairs checked in {elapsed:.1f}s")
    assert elapsed < 60


# -- 3 ---------------------------------------------------------------------

def _within(value, target, rel):
    return abs(value - target) <= rel * target


@pytest.mark.slow
def test_ac3_corpus_stats_english():
    corpus = read_conllu(find_dataset("en_ewt-um-train.conllu"))
    row = corpus_stats(corpus, both_copy_modes=True)
    print(f"AC3 en: {row.to_tsv()}")
    assert row.tokens == 204_857
    assert row.upos == 16
    assert row.ucgn == 43
    assert _within(row.uallo, 94, 0.05)
    assert _within(row.uall_unordered, 173, 0.05)
    assert _within(row.ses, 233, 0.05) or _within(row.ses_copy, 233, 0.05)


@pytest.mark.slow
def test_ac3_corpus_stats_turkish():
    corpus = read_conllu(find_dataset("tr_imst-um-train.conllu"))
    row = corpus_stats(corpus, both_copy_modes=True)
    print(f"AC3 tr: {row.to_tsv()}")
    assert row.tokens == 46_417
    assert row.upos == 15
    assert _within(row.ses, 211, 0.05) or _within(row.ses_copy, 211, 0.05)


# -- 4 ---------------------------------------------------------------------

# The ten most frequent English classes as this encoder writes them.
TOP10_EN = {
    "↓0;d¦": "do nothing",
    "↑0¦↓1;d¦": "first letter up, do nothing",
    "↓0;d¦-": "remove last char",
    "↓0;abe": "ignore form, use 'be'",
    "↓0;d¦--": "remove 2 last chars",
    "↓0;d¦---": "remove 3 last chars",
    "↑0;d¦": "all up, do nothing",
    "↓0;d--+b¦": "first 2 chars to 'b'",
    "↓0;d¦-+v+e": "last char to 've'",
    "↓0;d¦---+e": "3 last chars to 'e'",
}


@pytest.mark.slow
def test_ac4_class_weights():
    corpus = read_conllu(find_dataset("en_ewt-um-dev.conllu"))
    classes, _ = ses.collect_classes(corpus)
    total = sum(c.count for c in classes)
    identity = next(c for c in classes if c.rule == "↓0;d¦")
    weight = 100 * identity.count / total
    top = [c.rule for c in classes[:10]]
    print(f"AC4: identity weight {weight:.2f}%, top 10 {top}")
    assert abs(weight - 76.87) <= 1.0
    assert set(top) == set(TOP10_EN), set(top) ^ set(TOP10_EN)


# -- 5 ---------------------------------------------------------------------

def _monotone(corpus):
    counts = [scheme_inventory(corpus, s)[0] for s in
              (LabelScheme.UPOS, LabelScheme.UCGN, LabelScheme.UALLO, LabelScheme.UALL_UNORDERED)]
    return counts == sorted(counts), counts


def test_ac5_label_monotonicity(fixture_corpora, synth_train):
    corpora = [*fixture_corpora, synth_train]
    root = os.environ.get("SESLEMMA_DATA")
    if root:
        corpora += [read_conllu(p) for p in sorted(Path(root).rglob("*-um-*.conllu"))]
    for corpus in corpora:
        ok, counts = _monotone(corpus)
        print(f"AC5: {corpus.source}: {counts}")
        assert ok, (corpus.source, counts)


_TAGS = st.lists(st.sampled_from(["NOM", "ACC", "GEN", "MASC", "FEM", "NEUT", "SG", "PL",
                                  "PST", "PRS", "IND", "3", "DEF", "ANIM"]), max_size=5)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["N", "V", "ADJ", "PROPN"]), _TAGS),
                min_size=1, max_size=30))
def test_ac5_label_monotonicity_generated(tokens):
    lines = [f"{i}\tw{i}\tw{i}\t_\t_\t{';'.join([pos, *tags])}\t_\t_\t_\t_"
             for i, (pos, tags) in enumerate(tokens, 1)]
    ok, counts = _monotone(parse_conllu("\n".join(lines) + "\n\n"))
    assert ok, counts


# -- 6 ---------------------------------------------------------------------

_LEMMAS = {"cat": "cat", "cats": "cat", "is": "be", "Paris": "Paris", "running": "run",
           "la": "el", "was": "be", "NASA": "NASA", "los": "el", "dogs": "dog"}


@settings(max_examples=300, deadline=None)
@given(st.lists(st.lists(st.tuples(st.sampled_from(sorted(_LEMMAS)), st.booleans()),
                         min_size=1, max_size=8), min_size=1, max_size=10),
       st.sets(st.sampled_from(sorted(_LEMMAS))))
def test_ac6_metric_identities(sentences, vocab):
    gold_sents = [[(f, _LEMMAS[f]) for f, _ in s] for s in sentences]
    preds = [[_LEMMAS[f] if right else f.lower() + "x" for f, right in s] for s in sentences]
    gold, pred = make_corpus(gold_sents), with_lemmas(gold_sents, preds)
    acc = word_accuracy(gold, pred)
    n = gold.token_count
    rows = per_ses_report(gold, pred)
    assert abs(sum(r.count * r.accuracy for r in rows) / n - acc) <= 1e-12
    assert abs(sum(r.weight / 100 * r.accuracy for r in rows) - acc) <= 1e-12
    iv, oov, n_iv, n_oov = vocab_split_accuracy(gold, pred, vocab)
    weighted = ((iv or 0.0) * n_iv + (oov or 0.0) * n_oov) / n
    assert abs(weighted - acc) <= 1e-12


# -- 7 ---------------------------------------------------------------------

def test_ac7_mcnemar():
    r = mcnemar_from_counts(5, 15, "chi2_corrected")
    print(f"AC7: statistic {r.statistic}, p {r.p_value:.6f}")
    assert r.statistic == 4.05
    assert abs(r.p_value - 0.0441) <= 0.001
    assert abs(r.p_value - chi2_1df_sf(4.05)) <= 1e-12
    for b, c in itertools.product(range(20), repeat=2):
        for method in (None, "exact", "chi2_corrected"):
            x, y = mcnemar_from_counts(b, c, method), mcnemar_from_counts(c, b, method)
            assert (x.statistic, x.p_value, x.method) == (y.statistic, y.p_value, y.method), (b, c)


# -- 8 ---------------------------------------------------------------------

def _lemma_accuracy(model, dev, morph_fn):
    lemmas = [lemmatize(model, s.forms, morph_fn(s)) for s in dev.sentences]
    return word_accuracy(dev, replace_lemmas(dev, lemmas))


@pytest.mark.slow
def test_ac8_model_quality_floor():
    train_c = read_conllu(find_dataset("en_ewt-um-train.conllu"))
    dev = read_conllu(find_dataset("en_ewt-um-dev.conllu"))
    start = time.perf_counter()
    upos = lambda s: sentence_labels(s, LabelScheme.UPOS)
    gold_model = train(lemma_sequences(train_c, morph=[upos(s) for s in train_c.sentences]),
                       TrainConfig(morph_channel="gold", scheme="UPOS"))
    gold_secs = time.perf_counter() - start
    notag_model = train(lemma_sequences(train_c), TrainConfig())
    gold_acc = _lemma_accuracy(gold_model, dev, upos)
    notag_acc = _lemma_accuracy(notag_model, dev, lambda s: None)
    print(f"AC8: gold UPOS {gold_acc:.4f}, no-tag {notag_acc:.4f}, "
          f"gold training {gold_secs:.0f}s")
    assert gold_acc >= 0.95
    assert notag_acc >= 0.93
    assert gold_acc >= notag_acc
    assert gold_secs < 600


# -- 9 ---------------------------------------------------------------------

def test_ac9_determinism(tmp_path, capsys):
    train_p, dev_p = tmp_path / "train.conllu", tmp_path / "dev.conllu"
    train_p.write_text(synth.to_conllu(synth.sentences(150, seed=5)), encoding="utf-8")
    dev_p.write_text(synth.to_conllu(synth.sentences(50, seed=6)), encoding="utf-8")
    out = tmp_path / "out"
    out.mkdir()
    morph, lemma, pred = out / "morph.gz", out / "lemma.gz", out / "pred.conllu"
    snapshots = []
    for _ in range(2):  # same flags, same paths; every output is rewritten
        assert main(["train-morph", "--train", str(train_p), "--model", str(morph),
                     "--scheme", "UCGN", "--epochs", "3", "--seed", "3"]) == 0
        assert main(["train-lemma", "--train", str(train_p), "--model", str(lemma),
                     "--channel", f"model:{morph}", "--jackknife", "3", "--epochs", "3",
                     "--seed", "3"]) == 0
        assert main(["predict", "--model", str(lemma), str(dev_p), str(pred)]) == 0
        for fmt in ("json", "tsv"):
            assert main(["eval", str(dev_p), str(pred), "--train-vocab", str(train_p),
                         "--compare", str(dev_p), "--format", fmt,
                         "-o", str(out / f"report.{fmt}")]) == 0
        assert main(["stats", str(train_p), "--both-copy-modes",
                     "-o", str(out / "stats.tsv")]) == 0
        snapshots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    first, second = snapshots
    assert sorted(first) == ["lemma.gz", "morph.gz", "pred.conllu", "report.json",
                             "report.tsv", "stats.tsv"]
    for name in first:
        assert first[name] == second[name], name


# -- 10 --------------------------------------------------------------------

def test_ac10_casing_errors_surface():
    train_c = parse_conllu(synth.to_conllu(synth.sentences(400, seed=21, lowercase_proper=True)))
    test_c = parse_conllu(synth.to_conllu(synth.sentences(200, seed=22)))
    model = train(lemma_sequences(train_c), TrainConfig(epochs=5))
    pred = replace_lemmas(test_c, [lemmatize(model, s.forms) for s in test_c.sentences])
    rows = {r.rule: r for r in per_ses_report(test_c, pred)}
    for r in rows.values():
        print(f"AC10: {r.rule}\t{r.count}\t{r.accuracy:.3f}")
    casing = [r for rule, r in rows.items() if rule.startswith("↑")]
    assert casing and all(r.accuracy == 0.0 for r in casing)
    others = [r for rule, r in rows.items() if not rule.startswith("↑")]
    n = sum(r.count for r in others)
    assert sum(r.count * r.accuracy for r in others) / n > 0.9
