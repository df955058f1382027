"""Ethiopic (Amharic) text front-end: Fidel normalization, tokenization,
sentence segmentation.

Amharic writing mixes Ethiopic and Latin punctuation, and several Fidel
characters are homophones in the modern language (ሰ/ሠ, ሀ/ሐ/ኀ, አ/ዐ, ጸ/ፀ).
The normalizer folds each homophone family onto one canonical series so that
variant spellings of the same word get one surface form.  The folding map is
data-driven (a TSV shipped with the package) and order-preserving: the n-th
vowel order of a variant family maps to the n-th order of the canonical
family.

Tokenization splits on Unicode whitespace and the Ethiopic wordspace ፡
(U+1361, the historical word separator).  Sentence boundaries follow the
Ethiopic full stop ።, the question marks ? and ፧, the exclamation mark !, and
the informal convention of ending a sentence with two consecutive commas.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from importlib import resources

__all__ = [
    "NormalizationTable",
    "Token",
    "Sentence",
    "default_table",
    "normalize",
    "tokenize",
    "segment",
    "is_numeric",
]

# Word separators. U+1361 is the Ethiopic wordspace; everything else is
# covered by str.isspace().
WORDSPACE = "፡"

# Characters that become single-character punctuation tokens.
PUNCTUATION = frozenset("።፣፤፥፦፧" + ".,;?!")

# Sentence-final punctuation. The Latin period is deliberately absent: in
# Amharic text it mostly marks abbreviations and ordinals.
TERMINATORS = frozenset({"።", "?", "፧", "!"})

# Comma tokens whose doubling ends a sentence.
COMMAS = frozenset({"፣", ","})

_ETHIOPIC_DIGIT_LO = 0x1369
_ETHIOPIC_DIGIT_HI = 0x137C


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9" or _ETHIOPIC_DIGIT_LO <= ord(ch) <= _ETHIOPIC_DIGIT_HI


def is_numeric(token: str) -> bool:
    """True if every character is an ASCII digit or an Ethiopic numeral."""
    return bool(token) and all(_is_digit(ch) for ch in token)


@dataclass(frozen=True)
class NormalizationTable:
    """Character-to-character folding map for homophone Fidel variants.

    Every entry maps a variant character to its canonical counterpart.  The
    table is closed (no canonical character is itself a key), so applying it
    twice equals applying it once.
    """

    entries: dict[str, str]
    name: str = "custom"

    def __post_init__(self) -> None:
        self._validate()
        # str.translate wants codepoint keys
        object.__setattr__(
            self, "_trans", {ord(s): c for s, c in self.entries.items()}
        )

    def _validate(self) -> None:
        for src, dst in self.entries.items():
            if len(src) != 1 or len(dst) != 1:
                raise ValueError(f"table {self.name!r}: non-scalar entry {src!r} -> {dst!r}")
            if src == dst:
                raise ValueError(f"table {self.name!r}: identity entry {src!r}")
            if dst in self.entries:
                raise ValueError(
                    f"table {self.name!r}: canonical {dst!r} is also a key (not idempotent)"
                )
        self._check_families()

    def _check_families(self) -> None:
        # Ethiopic syllable families occupy 8-aligned codepoint blocks; the
        # seven vowel orders sit at offsets 0..6.  If one order of a family
        # is folded, every assigned order of that family must fold to the
        # same order of one canonical family.
        for src in self.entries:
            cp = ord(src)
            if not 0x1200 <= cp <= 0x137F:
                continue
            order = cp & 0x7
            if order == 7:
                continue  # labiovelar slot, optional
            src_base = cp & ~0x7
            dst_base = ord(self.entries[src]) & ~0x7
            for o in range(7):
                s = chr(src_base + o)
                if unicodedata.name(s, None) is None:
                    continue
                d = self.entries.get(s)
                if d is None or ord(d) != dst_base + o:
                    raise ValueError(
                        f"table {self.name!r}: family of {src!r} folds inconsistently at {s!r}"
                    )

    def lookup(self, ch: str) -> str | None:
        return self.entries.get(ch)

    @classmethod
    def from_pairs(cls, pairs, name: str = "custom") -> "NormalizationTable":
        return cls(entries=dict(pairs), name=name)

    @classmethod
    def load(cls, path, name: str | None = None) -> "NormalizationTable":
        """Read a table from a UTF-8 TSV of ``source<TAB>canonical`` pairs.

        Lines starting with ``#`` and blank lines are ignored.
        """
        entries: dict[str, str] = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected source<TAB>canonical")
                entries[parts[0]] = parts[1]
        return cls(entries=entries, name=name or str(path))


_DEFAULT_TABLE: NormalizationTable | None = None


def default_table() -> NormalizationTable:
    """The shipped folding table for the ሀ, ሰ, አ and ጸ homophone families."""
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        ref = resources.files("amsem.data").joinpath("normalization.tsv")
        with resources.as_file(ref) as path:
            _DEFAULT_TABLE = NormalizationTable.load(path, name="default")
    return _DEFAULT_TABLE


def normalize(text: str, table: NormalizationTable | None = None) -> str:
    """Fold homophone Fidel variants onto their canonical characters.

    Total and length-preserving: characters outside the table pass through,
    and every entry maps one scalar to one scalar.
    """
    if table is None:
        table = default_table()
    return text.translate(table._trans)


@dataclass(frozen=True)
class Token:
    """One token with its half-open byte span into the UTF-8 source text."""

    surface: str
    span: tuple[int, int]
    kind: str  # "word" | "punctuation" | "number"


@dataclass(frozen=True)
class Sentence:
    tokens: list[Token] = field(default_factory=list)
    terminator: Token | None = None


def tokenize(text: str) -> list[Token]:
    """Split text into word, number, and punctuation tokens.

    Separators are Unicode whitespace and the Ethiopic wordspace ፡; they
    produce no tokens.  Each punctuation character is its own token, maximal
    digit runs (ASCII or Ethiopic numerals) are number tokens, and everything
    else accumulates into word tokens.  Spans are byte offsets into the UTF-8
    encoding of ``text``.
    """
    tokens: list[Token] = []
    run: list[str] = []
    run_start = 0
    run_end = 0
    run_kind = ""
    pos = 0

    def flush() -> None:
        if run:
            tokens.append(Token("".join(run), (run_start, run_end), run_kind))
            run.clear()

    for ch in text:
        width = len(ch.encode("utf-8"))
        if ch.isspace() or ch == WORDSPACE:
            flush()
        elif ch in PUNCTUATION:
            flush()
            tokens.append(Token(ch, (pos, pos + width), "punctuation"))
        else:
            kind = "number" if _is_digit(ch) else "word"
            if run and run_kind == kind:
                run.append(ch)
                run_end = pos + width
            else:
                flush()
                run.append(ch)
                run_start, run_end, run_kind = pos, pos + width, kind
        pos += width
    flush()
    return tokens


def segment(tokens: list[Token]) -> list[Sentence]:
    """Group tokens into sentences.

    A sentence ends after ።, ?, ፧ or !, or after two consecutive identical
    comma tokens (two ፣ or two Latin commas), which Amharic writers use as a
    full stop.  For a comma pair the recorded terminator is the second comma.
    Trailing tokens with no terminator form a final sentence with
    ``terminator=None``.  No token is dropped, duplicated, or reordered.
    """
    sentences: list[Sentence] = []
    current: list[Token] = []
    for tok in tokens:
        current.append(tok)
        if tok.kind != "punctuation":
            continue
        if tok.surface in TERMINATORS:
            sentences.append(Sentence(current, tok))
            current = []
        elif (
            tok.surface in COMMAS
            and len(current) >= 2
            and current[-2].kind == "punctuation"
            and current[-2].surface == tok.surface
        ):
            sentences.append(Sentence(current, tok))
            current = []
    if current:
        sentences.append(Sentence(current, None))
    return sentences
