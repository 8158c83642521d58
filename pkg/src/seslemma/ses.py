"""Shortest-edit-script lemma rules.

A rule has two halves separated by ``;``.  The casing half records maximal
runs of upper/lower case in the lemma (``↑0¦↓1`` is "first letter upper, the
rest lower"); indices past the middle of the lemma are stored relative to its
end.  The body is either ``a<lemma>`` (ignore the form) or
``d<prefix script>¦<suffix script>`` where the scripts edit the parts of the
form before and after its longest common substring with the lemma.  Script
ops render as ``-`` (delete), ``+c`` (insert c) and ``→`` (copy).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .errors import RuleApplicationError, RuleParseError

UP = "↑"
DOWN = "↓"
SEP = "¦"
DELETE = "-"
INSERT = "+"
COPY = "→"


def _fold_char(c: str) -> str:
    # Simple one-to-one case mapping only; anything that would not survive
    # lower -> upper unchanged is treated as caseless.
    low = c.lower()
    if len(low) == 1 and low != c and low.upper() == c:
        return low
    return c


def _raise_char(c: str) -> str:
    up = c.upper()
    if len(up) == 1 and up != c and _fold_char(up) == c:
        return up
    return c


def fold_case(text: str) -> str:
    return "".join(_fold_char(c) for c in text)


def raise_case(text: str) -> str:
    return "".join(_raise_char(c) for c in text)


@dataclass(frozen=True)
class CasingScript:
    segments: tuple[tuple[str, int], ...]

    def render(self) -> str:
        return SEP.join(f"{d}{i}" for d, i in self.segments)


@dataclass(frozen=True)
class Absolute:
    lemma: str


@dataclass(frozen=True)
class Diff:
    prefix: tuple[str, ...]
    suffix: tuple[str, ...]


@dataclass(frozen=True)
class LemmaRule:
    casing: CasingScript
    body: Absolute | Diff

    def render(self) -> str:
        return render_rule(self)

    def __str__(self) -> str:
        return render_rule(self)


def render_script(ops) -> str:
    return "".join(ops)


def min_edit_script(source: str, target: str, allow_copy: bool = False) -> tuple[str, ...]:
    """Minimum-length op sequence turning ``source`` into ``target``.

    Ops are ``"-"``, ``"+c"`` and ``"→"``.  Cells are filled in increasing
    (source, target) prefix order; candidates are tried as copy, delete,
    insert and a later candidate replaces an earlier one of equal cost.
    """
    n, m = len(source), len(target)
    inf = n + m + 1
    cost = [[inf] * (m + 1) for _ in range(n + 1)]
    back: list[list[str | None]] = [[None] * (m + 1) for _ in range(n + 1)]
    cost[0][0] = 0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best, op = inf, None
            if allow_copy and i and j and source[i - 1] == target[j - 1]:
                best, op = cost[i - 1][j - 1] + 1, COPY
            if i and cost[i - 1][j] + 1 <= best:
                best, op = cost[i - 1][j] + 1, DELETE
            if j and cost[i][j - 1] + 1 <= best:
                best, op = cost[i][j - 1] + 1, INSERT + target[j - 1]
            cost[i][j], back[i][j] = best, op
    ops = []
    i, j = n, m
    while i or j:
        op = back[i][j]
        ops.append(op)
        if op == COPY:
            i, j = i - 1, j - 1
        elif op == DELETE:
            i -= 1
        else:
            j -= 1
    return tuple(reversed(ops))


def casing_script(lemma: str) -> CasingScript:
    if not lemma:
        raise ValueError("lemma must be non-empty")
    half = len(lemma) // 2
    segments = []
    previous = None
    for i, c in enumerate(lemma):
        case = UP if _fold_char(c) != c else DOWN
        if case != previous:
            segments.append((case, i if i <= half else i - len(lemma)))
        previous = case
    return CasingScript(tuple(segments))


def longest_common_substring(form: str, lemma: str) -> tuple[int, int, int]:
    """Return (length, form start, lemma start); first hit in lemma-major scan order."""
    best, best_form, best_lemma = 0, 0, 0
    for li in range(len(lemma)):
        for fi in range(len(form)):
            k = 0
            while fi + k < len(form) and li + k < len(lemma) and form[fi + k] == lemma[li + k]:
                k += 1
            if k > best:
                best, best_form, best_lemma = k, fi, li
    return best, best_form, best_lemma


def encode_rule(form: str, lemma: str, allow_copy: bool = False) -> LemmaRule:
    if not form or not lemma:
        raise ValueError("form and lemma must be non-empty")
    casing = casing_script(lemma)
    form, lemma = fold_case(form), fold_case(lemma)
    length, fi, li = longest_common_substring(form, lemma)
    if not length:
        return LemmaRule(casing, Absolute(lemma))
    prefix = min_edit_script(form[:fi], lemma[:li], allow_copy)
    suffix = min_edit_script(form[fi + length:], lemma[li + length:], allow_copy)
    return LemmaRule(casing, Diff(prefix, suffix))


def encode(form: str, lemma: str, allow_copy: bool = False) -> str:
    return render_rule(encode_rule(form, lemma, allow_copy))


def render_rule(rule: LemmaRule) -> str:
    body = rule.body
    if isinstance(body, Absolute):
        text = "a" + body.lemma
    else:
        text = "d" + render_script(body.prefix) + SEP + render_script(body.suffix)
    return rule.casing.render() + ";" + text


def _parse_casing(text: str) -> CasingScript:
    if not text:
        raise RuleParseError("empty casing script")
    segments = []
    for seg in text.split(SEP):
        if len(seg) < 2 or seg[0] not in (UP, DOWN):
            raise RuleParseError(f"bad casing segment {seg!r}")
        if not re.fullmatch(r"-?[0-9]+", seg[1:]):
            raise RuleParseError(f"bad casing index in {seg!r}")
        segments.append((seg[0], int(seg[1:])))
    return CasingScript(tuple(segments))


def _parse_ops(text: str, pos: int, compat: bool) -> tuple[tuple[str, ...], int]:
    """Read ops from ``text[pos:]`` up to a separator or the end."""
    ops = []
    while pos < len(text):
        c = text[pos]
        if c == SEP:
            break
        if c in (DELETE, COPY):
            ops.append(c)
            pos += 1
        elif c == INSERT:
            if pos + 1 >= len(text):
                if compat:
                    pos += 1
                    break
                raise RuleParseError("insert op without a character")
            ops.append(INSERT + text[pos + 1])
            pos += 2
        else:
            raise RuleParseError(f"stray character {c!r} in edit script")
    return tuple(ops), pos


def parse_rule(text: str, compat: bool = True) -> LemmaRule:
    """Parse a rendered rule.

    With ``compat`` a final ``+`` carrying no character is ignored, which
    accepts the ``d¦-+`` spelling some published tables use.
    """
    casing_text, sep, body = text.partition(";")
    if not sep:
        raise RuleParseError(f"missing ';' in rule {text!r}")
    casing = _parse_casing(casing_text)
    if body.startswith("a"):
        if len(body) < 2:
            raise RuleParseError("absolute rule without a lemma")
        return LemmaRule(casing, Absolute(body[1:]))
    if not body.startswith("d"):
        raise RuleParseError(f"unknown rule body {body[:1]!r} in {text!r}")
    prefix, pos = _parse_ops(body, 1, compat)
    if pos >= len(body) or body[pos] != SEP:
        raise RuleParseError(f"missing '{SEP}' in diff rule {text!r}")
    suffix, pos = _parse_ops(body, pos + 1, compat)
    if pos != len(body):
        raise RuleParseError(f"trailing text in rule {text!r}")
    return LemmaRule(casing, Diff(prefix, suffix))


def _consumed(ops) -> int:
    return sum(1 for op in ops if op in (DELETE, COPY))


def _replay(ops, form: str, offset: int) -> str:
    out = []
    for op in ops:
        if op == COPY:
            out.append(form[offset])
            offset += 1
        elif op == DELETE:
            offset += 1
        else:
            out.append(op[1:])
    return "".join(out)


def apply_casing(casing: CasingScript, text: str) -> str:
    for direction, index in casing.segments:
        if direction == DOWN and index == 0:
            continue
        head, tail = text[:index], text[index:]
        text = head + (raise_case(tail) if direction == UP else fold_case(tail))
    return text


def apply_rule(rule: LemmaRule | str, form: str, mode: str = "lenient") -> str:
    """Turn ``form`` into a lemma.

    ``mode="strict"`` raises when the scripts need more characters than the
    form has; ``"lenient"`` falls back to the lower-cased form instead.
    """
    if isinstance(rule, str):
        rule = parse_rule(rule)
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown mode {mode!r}")
    if not form:
        raise ValueError("form must be non-empty")
    body = rule.body
    if isinstance(body, Absolute):
        lemma = body.lemma
    else:
        lowered = fold_case(form)
        head, tail = _consumed(body.prefix), _consumed(body.suffix)
        if head + tail > len(lowered):
            if mode == "strict":
                raise RuleApplicationError(
                    f"rule {render_rule(rule)!r} consumes {head + tail} characters "
                    f"but form {form!r} has {len(lowered)}")
            lemma = lowered
        else:
            lemma = (_replay(body.prefix, lowered, 0)
                     + lowered[head:len(lowered) - tail]
                     + _replay(body.suffix, lowered, len(lowered) - tail))
    return apply_casing(rule.casing, lemma)


@dataclass
class LemmaClass:
    rule: str
    count: int
    examples: list[tuple[str, str]]


def collect_classes(corpus, allow_copy: bool = False, max_examples: int = 3):
    """Aggregate SES classes over a corpus.

    Returns ``(classes, skipped)`` where classes are sorted by descending
    count then rule text, and ``skipped`` counts tokens without a lemma.
    """
    counts: Counter[str] = Counter()
    examples: dict[str, list[tuple[str, str]]] = {}
    skipped = 0
    for token in corpus.tokens():
        if not token.has_lemma:
            skipped += 1
            continue
        rule = encode(token.form, token.lemma, allow_copy)
        counts[rule] += 1
        ex = examples.setdefault(rule, [])
        if len(ex) < max_examples:
            ex.append((token.form, token.lemma))
    classes = [LemmaClass(r, c, examples[r])
               for r, c in sorted(counts.items(), key=lambda rc: (-rc[1], rc[0]))]
    return classes, skipped


def classes_tsv(classes) -> str:
    total = sum(c.count for c in classes)
    lines = ["rule\tcount\tweight_percent\texamples"]
    for c in classes:
        weight = 100.0 * c.count / total if total else 0.0
        ex = " ".join(f"{f}→{l}" for f, l in c.examples)
        lines.append(f"{c.rule}\t{c.count}\t{weight:.2f}\t{ex}")
    return "\n".join(lines) + "\n"
