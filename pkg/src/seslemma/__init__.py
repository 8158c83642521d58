"""Contextual lemmatization as shortest-edit-script class tagging."""

from .corpus_io import Corpus, FeatureBundle, Sentence, Token, parse_conllu, read_conllu, vocabulary, write_conllu
from .evaluation import (EvalReport, McNemarResult, evaluate_run, mcnemar, per_ses_report,
                         sentence_accuracy, vocab_split_accuracy, word_accuracy)
from .schemes import LabelScheme, compose_label, scheme_inventory
from .ses import LemmaRule, apply_rule, collect_classes, encode, encode_rule, min_edit_script, parse_rule, render_rule
from .stats import StatsRow, corpus_stats
from .tagger import TaggerModel, TrainConfig, jackknife_tags, lemmatize, load_model, predict, save_model, train

__version__ = "0.1.0"
