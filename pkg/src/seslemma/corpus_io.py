"""Reading and writing CoNLL-U treebanks with UniMorph or UD feature columns."""

from __future__ import annotations

import io
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, TextIO

from .errors import EncodingError, ParseError

FEATS_FORMATS = ("unimorph", "ud")

# UniMorph tags per dimension. Compound tags ("IN+ESS", "{SG/PL}") belong to a
# dimension when every component does.
CASE_TAGS = frozenset(
    """NOM ACC ERG ABS NOMS DAT BEN PRP GEN REL PRT INS COM VOC COMPV EQTV PRIV
    PROPR AVR FRML TRANS BYWAY INTER AT POST IN CIRC ANTE APUD ON ONHR ONVR SUB
    REM PROXM ESS ALL ABL APPRX TERM LOC""".split()
)
GENDER_TAGS = frozenset("MASC FEM NEUT".split())
NUMBER_TAGS = frozenset("SG PL DU TRI PAUC GRPL GPAUC INVN".split())
_GENDER_CLASS = re.compile(r"^(BANTU|NAKH)\d+$")

UD_DIMENSIONS = {"Case": "case", "Gender": "gender", "Number": "number"}


def _components(tag: str) -> list[str]:
    return [part for part in re.split(r"[+/{}]", tag) if part]


def tag_dimension(tag: str) -> str:
    """Return ``case``, ``gender``, ``number`` or ``rest`` for a UniMorph tag."""
    parts = _components(tag)
    if not parts:
        return "rest"
    if all(p in CASE_TAGS for p in parts):
        return "case"
    if all(p in GENDER_TAGS or _GENDER_CLASS.match(p) for p in parts):
        return "gender"
    if all(p in NUMBER_TAGS for p in parts):
        return "number"
    return "rest"


@dataclass(frozen=True)
class FeatureBundle:
    pos: str | None = None
    case: str | None = None
    gender: str | None = None
    number: str | None = None
    rest: tuple[str, ...] = ()
    original_order: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return self.pos is None and not self.original_order

    def with_pos(self, pos: str | None) -> FeatureBundle:
        """Swap the POS slot, e.g. for CoNLL-U column 4 instead of the leading tag."""
        if pos in (None, "_", ""):
            pos = None
        order = self.original_order[1:] if self.pos is not None else self.original_order
        return replace(self, pos=pos, original_order=((pos,) if pos else ()) + order)


def _partition(pos: str | None, tagged: Iterable[tuple[str, str]], order: tuple[str, ...]):
    slots: dict[str, str | None] = {"case": None, "gender": None, "number": None}
    rest = []
    for dim, tag in tagged:
        if dim in slots and slots[dim] is None:
            slots[dim] = tag
        else:
            rest.append(tag)
    return FeatureBundle(pos=pos, rest=tuple(rest), original_order=order, **slots)


def parse_unimorph_feats(text: str) -> FeatureBundle:
    if text in ("_", ""):
        return FeatureBundle()
    tags = tuple(t for t in text.split(";") if t)
    if not tags:
        return FeatureBundle()
    return _partition(tags[0], ((tag_dimension(t), t) for t in tags[1:]), tags)


def parse_ud_feats(text: str, upos: str) -> FeatureBundle:
    pos = None if upos in ("_", "") else upos
    pairs = [] if text in ("_", "") else [p for p in text.split("|") if p]
    tagged = []
    for pair in pairs:
        key, _, value = pair.partition("=")
        if key in UD_DIMENSIONS and value:
            tagged.append((UD_DIMENSIONS[key], value))
        else:
            tagged.append(("rest", pair))
    order = ((pos,) if pos else ()) + tuple(v for _, v in tagged)
    return _partition(pos, tagged, order)


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    feats: FeatureBundle = field(default_factory=FeatureBundle)
    raw_feats: str = "_"
    id: str = "1"
    upos: str = "_"
    xpos: str = "_"
    head: str = "_"
    deprel: str = "_"
    deps: str = "_"
    misc: str = "_"

    @property
    def has_lemma(self) -> bool:
        """False for the "_" placeholder; a literal underscore token keeps its lemma."""
        return not (self.lemma == "_" and self.form != "_")

    def columns(self) -> list[str]:
        return [self.id, self.form, self.lemma, self.upos, self.xpos,
                self.raw_feats, self.head, self.deprel, self.deps, self.misc]


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()
    source: str = ""
    language: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def tokens(self):
        for sentence in self.sentences:
            yield from sentence.tokens

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


def _guess_language(source: str) -> str:
    m = re.match(r"([a-z]{2,3})[_-]", Path(source).name)
    return m.group(1) if m else ""


def _lines(stream) -> Iterable[str]:
    if isinstance(stream, bytes):
        stream = _decode(stream, "<bytes>")
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def _decode(data: bytes, source: str) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{source}: not valid UTF-8 at byte {exc.start}") from exc


def parse_conllu(stream: str | bytes | Iterable[str] | TextIO, feats_format: str = "unimorph",
                 source: str = "", language: str | None = None,
                 normalize: bool = False) -> Corpus:
    """Parse CoNLL-U text into a :class:`Corpus`.

    Multiword-token ranges and empty nodes are skipped. With ``normalize`` set,
    every line is NFC-normalized before splitting.
    """
    if feats_format not in FEATS_FORMATS:
        raise ValueError(f"unknown feats format {feats_format!r}")
    sentences = []
    tokens: list[Token] = []
    comments: list[str] = []

    def flush():
        if tokens:
            sentences.append(Sentence(tuple(tokens), tuple(comments)))
        tokens.clear()
        comments.clear()

    for lineno, line in enumerate(_lines(stream), start=1):
        line = line.rstrip("\r\n")
        if normalize:
            line = unicodedata.normalize("NFC", line)
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"expected 10 tab-separated columns, found {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid or "." in tid:
            continue
        if not cols[1]:
            raise ParseError("empty form", lineno)
        if feats_format == "unimorph":
            bundle = parse_unimorph_feats(cols[5])
        else:
            bundle = parse_ud_feats(cols[5], cols[3])
        tokens.append(Token(form=cols[1], lemma=cols[2] or "_", feats=bundle, raw_feats=cols[5],
                            id=tid, upos=cols[3], xpos=cols[4], head=cols[6],
                            deprel=cols[7], deps=cols[8], misc=cols[9]))
    flush()
    if language is None:
        language = _guess_language(source)
    return Corpus(tuple(sentences), source=source, language=language)


def read_conllu(path, feats_format: str = "unimorph", language: str | None = None,
                normalize: bool = False) -> Corpus:
    path = Path(path)
    text = _decode(path.read_bytes(), str(path))
    return parse_conllu(text, feats_format, source=str(path), language=language,
                        normalize=normalize)


def write_conllu(corpus: Corpus, output: TextIO) -> None:
    for sentence in corpus.sentences:
        for comment in sentence.comments:
            output.write(comment + "\n")
        for token in sentence.tokens:
            output.write("\t".join(token.columns()) + "\n")
        output.write("\n")


def format_conllu(corpus: Corpus) -> str:
    buf = io.StringIO()
    write_conllu(corpus, buf)
    return buf.getvalue()


def vocabulary(corpus: Corpus) -> set[str]:
    return {token.form for token in corpus.tokens()}


def replace_lemmas(corpus: Corpus, lemmas: list[list[str]]) -> Corpus:
    """Return a copy of ``corpus`` with per-sentence lemma lists substituted."""
    if len(lemmas) != len(corpus.sentences):
        raise ValueError("lemma list does not match sentence count")
    sentences = []
    for sentence, sent_lemmas in zip(corpus.sentences, lemmas):
        if len(sent_lemmas) != len(sentence):
            raise ValueError("lemma list does not match token count")
        tokens = tuple(replace(t, lemma=l) for t, l in zip(sentence.tokens, sent_lemmas))
        sentences.append(replace(sentence, tokens=tokens))
    return replace(corpus, sentences=tuple(sentences))
