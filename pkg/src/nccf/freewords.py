"""Words in the free semigroup on d letters and finite initial segments.

A word is a tuple of 1-based letter indices; ``()`` is the empty word.
The surface syntax is ``"g1g2g1"`` with ``"1"`` (or ``"∅"``) for the
empty word.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Collection, Iterable, Iterator
from dataclasses import dataclass, field

from .errors import NotFactorClosed

Word = tuple[int, ...]

EMPTY: Word = ()

_EMPTY_TOKENS = {"1", "∅", ""}
_WORD_RE = re.compile(r"(?:g[1-9][0-9]*)+")
_LETTER_RE = re.compile(r"g([1-9][0-9]*)")


def parse_word(text: str, d: int | None = None) -> Word:
    """Parse ``"g1g2"`` style text into a word.

    ``"g0"``, stray characters and (when ``d`` is given) letters larger
    than ``d`` raise ``ValueError``.
    """
    s = text.strip()
    if s in _EMPTY_TOKENS:
        return EMPTY
    if not _WORD_RE.fullmatch(s):
        raise ValueError(f"malformed word {text!r}")
    w = tuple(int(k) for k in _LETTER_RE.findall(s))
    if d is not None and max(w) > d:
        raise ValueError(f"word {text!r} uses a letter beyond g{d}")
    return w


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return "".join(f"g{k}" for k in w)


def concat(u: Word, v: Word) -> Word:
    return tuple(u) + tuple(v)


def words_of_length(d: int, j: int) -> list[Word]:
    """All ``d**j`` words of length ``j`` in lexicographic order."""
    if d < 1 or j < 0:
        raise ValueError("need d >= 1 and j >= 0")
    return list(itertools.product(range(1, d + 1), repeat=j))


def iter_words(d: int, max_length: int) -> Iterator[Word]:
    """Words of length ``<= max_length`` in length-lex order."""
    for j in range(max_length + 1):
        yield from itertools.product(range(1, d + 1), repeat=j)


def length_lex_key(w: Word):
    return (len(w), w)


def factors(w: Word) -> Iterator[Word]:
    """Every prefix and every suffix of ``w`` (including ``∅`` and ``w``)."""
    for k in range(len(w) + 1):
        yield w[:k]
        yield w[k:]


@dataclass(frozen=True)
class InitialSegment:
    """A finite factor-closed word set.

    Build with :func:`validate_initial_segment` or :func:`ball_segment`;
    the constructor itself performs no checks.
    """

    d: int
    words: frozenset[Word]
    ordered: tuple[Word, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ordered", tuple(sorted(self.words, key=length_lex_key)))

    def __contains__(self, w) -> bool:
        return tuple(w) in self.words

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.ordered)

    @property
    def max_length(self) -> int:
        """Length of the longest word, ``-1`` for the empty segment."""
        return max((len(w) for w in self.words), default=-1)

    def is_ball(self) -> bool:
        """True iff this is ``{w : |w| <= max_length}``."""
        L = self.max_length
        return L >= 0 and len(self.words) == sum(self.d**j for j in range(L + 1))

    def to_strings(self) -> list[str]:
        return [format_word(w) for w in self.ordered]


def validate_initial_segment(d: int, words: Iterable) -> InitialSegment:
    """Check factor closure and return the validated segment.

    ``words`` may hold tuples or surface strings. Anything without a
    length (generators, iterators) is refused, since only finite
    segments are supported.
    """
    if d < 1:
        raise ValueError("alphabet size must be >= 1")
    if not isinstance(words, Collection):
        raise TypeError("initial segments must be finite collections")
    ws = set()
    for w in words:
        w = parse_word(w, d) if isinstance(w, str) else tuple(int(k) for k in w)
        if any(k < 1 or k > d for k in w):
            raise ValueError(f"letters of {format_word(w)} must lie in [1, {d}]")
        ws.add(w)
    for w in sorted(ws, key=length_lex_key):
        for f in factors(w):
            if f not in ws:
                raise NotFactorClosed(w, f)
    return InitialSegment(d, frozenset(ws))


def ball_segment(d: int, ell: int) -> InitialSegment:
    """``Λ(ℓ) = {w : |w| <= ℓ}``."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    return InitialSegment(d, frozenset(iter_words(d, ell)))


def is_lambda_member(seg: InitialSegment, w: Word) -> bool:
    return tuple(w) in seg.words


def minimal_non_members(seg: InitialSegment) -> list[Word]:
    """Words outside the segment all of whose proper factors lie inside.

    These generate the complementary ideal: every word outside the segment
    contains one of them as a factor. They all have length at most
    ``max_length + 1`` because their longest proper prefix is a member.
    """
    out = []
    for v in iter_words(seg.d, seg.max_length + 1):
        if v in seg.words:
            continue
        if not v or (v[1:] in seg.words and v[:-1] in seg.words):
            out.append(v)
    return out


def factor_closure(d: int, words: Iterable[Word]) -> InitialSegment:
    """Smallest initial segment containing the given words."""
    out = set()
    for w in words:
        w = tuple(w)
        out.update(w[i:j] for i in range(len(w) + 1) for j in range(i, len(w) + 1))
    return validate_initial_segment(d, out)


def random_segment(rng, d: int, max_length: int, count: int = 3) -> InitialSegment:
    """Factor closure of a few random words; always contains ∅."""
    ws = []
    for _ in range(count):
        L = int(rng.integers(0, max_length + 1))
        ws.append(tuple(int(k) for k in rng.integers(1, d + 1, size=L)))
    return factor_closure(d, ws)
