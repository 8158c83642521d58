"""Corpus complexity statistics: tokens, label inventories, SES classes."""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import ses
from .corpus_io import Corpus
from .schemes import LabelScheme, scheme_inventory

STAT_SCHEMES = (LabelScheme.UPOS, LabelScheme.UCG, LabelScheme.UCN, LabelScheme.UCGN,
                LabelScheme.UALLO, LabelScheme.UALL_UNORDERED)

# column name -> field, in table order
COLUMNS = {
    "corpus": "corpus",
    "number of tokens": "tokens",
    "upos": "upos",
    "upos+case+gender": "ucg",
    "upos+case+number": "ucn",
    "upos+case+gender+number": "ucgn",
    "upos+allfeat. ord.": "uallo",
    "upos+allfeat. not.ord.": "uall_unordered",
    "SES (lemma class)": "ses",
    "SES with copy": "ses_copy",
    "skipped lemmas": "skipped_lemmas",
}


@dataclass
class StatsRow:
    corpus: str
    tokens: int
    upos: int
    ucg: int
    ucn: int
    ucgn: int
    uallo: int
    uall_unordered: int
    ses: int
    skipped_lemmas: int
    ses_copy: int | None = None

    def to_json(self) -> str:
        return json.dumps({name: getattr(self, attr) for name, attr in COLUMNS.items()},
                          ensure_ascii=False, indent=2) + "\n"

    def to_tsv(self, header: bool = True) -> str:
        names = [n for n, a in COLUMNS.items() if a != "ses_copy" or self.ses_copy is not None]
        values = [getattr(self, COLUMNS[n]) for n in names]
        line = "\t".join(str(v) for v in values) + "\n"
        return ("\t".join(names) + "\n" + line) if header else line


def corpus_stats(corpus: Corpus, allow_copy: bool = False, both_copy_modes: bool = False,
                 pos_source: str = "bundle", corpus_id: str | None = None) -> StatsRow:
    counts = [scheme_inventory(corpus, s, pos_source)[0] for s in STAT_SCHEMES]
    # with both modes, ``ses`` is the no-copy count and ``ses_copy`` the other
    classes, skipped = ses.collect_classes(corpus, allow_copy and not both_copy_modes)
    ses_copy = len(ses.collect_classes(corpus, True)[0]) if both_copy_modes else None
    return StatsRow(corpus_id if corpus_id is not None else corpus.source,
                    corpus.token_count, *counts, ses=len(classes), skipped_lemmas=skipped,
                    ses_copy=ses_copy)
