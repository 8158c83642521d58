"""Morphological label schemes of increasing granularity."""

from __future__ import annotations

from collections import Counter
from enum import Enum

from .corpus_io import Corpus, FeatureBundle, Token

NO_TAG = "no-tag"
EMPTY_LABEL = "_"


class LabelScheme(str, Enum):
    NOTAG = "NOTAG"
    UPOS = "UPOS"
    UCG = "UCG"
    UCN = "UCN"
    UCGN = "UCGN"
    UALLO = "UALLO"
    UALL_UNORDERED = "UALL_UNORDERED"

    @classmethod
    def parse(cls, name: str) -> LabelScheme:
        key = name.strip().upper().replace("-", "_")
        aliases = {"NO_TAG": "NOTAG", "UALL": "UALLO", "UALLU": "UALL_UNORDERED"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown label scheme {name!r}") from None


# scheme -> (case, gender, number, rest) switches
_PARTS = {
    LabelScheme.UPOS: (False, False, False, None),
    LabelScheme.UCG: (True, True, False, None),
    LabelScheme.UCN: (True, False, True, None),
    LabelScheme.UCGN: (True, True, True, None),
    LabelScheme.UALLO: (True, True, True, "sorted"),
    LabelScheme.UALL_UNORDERED: (True, True, True, "original"),
}

POS_SOURCES = ("bundle", "column")


def compose_label(bundle: FeatureBundle, scheme: LabelScheme | str) -> str:
    scheme = LabelScheme.parse(scheme) if isinstance(scheme, str) else scheme
    if scheme is LabelScheme.NOTAG:
        return NO_TAG
    use_case, use_gender, use_number, rest_order = _PARTS[scheme]
    parts = [bundle.pos]
    if use_case:
        parts.append(bundle.case)
    if use_gender:
        parts.append(bundle.gender)
    if use_number:
        parts.append(bundle.number)
    if rest_order == "sorted":
        parts.extend(sorted(bundle.rest))
    elif rest_order == "original":
        parts.extend(bundle.rest)
    label = "".join(p for p in parts if p)
    return label or EMPTY_LABEL


def token_label(token: Token, scheme: LabelScheme | str, pos_source: str = "bundle") -> str:
    bundle = token.feats
    if pos_source == "column":
        bundle = bundle.with_pos(token.upos)
    elif pos_source != "bundle":
        raise ValueError(f"unknown POS source {pos_source!r}")
    return compose_label(bundle, scheme)


def sentence_labels(sentence, scheme, pos_source: str = "bundle") -> list[str]:
    return [token_label(t, scheme, pos_source) for t in sentence.tokens]


def scheme_inventory(corpus: Corpus, scheme: LabelScheme | str,
                     pos_source: str = "bundle") -> tuple[int, Counter]:
    counts = Counter(token_label(t, scheme, pos_source) for t in corpus.tokens())
    return len(counts), counts


def inventory_tsv(counts: Counter) -> str:
    rows = sorted(counts.items(), key=lambda lc: (-lc[1], lc[0]))
    return "label\tcount\n" + "".join(f"{l}\t{c}\n" for l, c in rows)
