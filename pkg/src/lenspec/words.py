"""Reduced words, cyclic words and automorphisms of a finitely generated free group.

Letters are packed one byte per letter: generator ``i`` (0-based) is byte
``2*i`` and its inverse is ``2*i + 1``, so ``letter ^ 1`` inverts a letter and
plain byte order realizes the fixed total order a < a^-1 < b < b^-1 < ...
used everywhere for canonical forms.  Words are immutable and hashable, and a
census of millions of elements stores nothing beyond the raw byte strings.

The string form uses lower case for generators and upper case for inverses:
``parse_word("abA")`` is a * b * a^-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Word",
    "CyclicWord",
    "Alphabet",
    "Automorphism",
    "EPSILON",
    "parse_word",
    "format_word",
    "reduce_letters",
    "multiply",
    "inverse",
    "power",
    "conjugate",
    "commutator",
    "cyclic_reduce",
    "canonical",
    "least_rotation",
    "abelianize",
    "random_reduced_word",
]


class Word(bytes):
    """A freely reduced word; behaves as its packed byte string."""

    __slots__ = ()

    def __repr__(self):
        return f"Word({format_word(self)!r})"

    @property
    def length(self) -> int:
        return len(self)


EPSILON = Word()


def invert_letter(letter: int) -> int:
    return letter ^ 1


def letter_of_generator(gen: int, inverse: bool = False) -> int:
    return 2 * gen + (1 if inverse else 0)


def parse_word(text: str) -> Word:
    """Parse ``"abA"``-style notation; the result is freely reduced."""
    letters = []
    for ch in text:
        if ch in " \t":
            continue
        if "a" <= ch <= "z":
            letters.append(2 * (ord(ch) - ord("a")))
        elif "A" <= ch <= "Z":
            letters.append(2 * (ord(ch) - ord("A")) + 1)
        else:
            raise ValueError(f"bad letter {ch!r} in word {text!r}")
    return reduce_letters(letters)


def format_word(w: bytes) -> str:
    """Inverse of :func:`parse_word`; the empty word prints as ``"1"``."""
    if not w:
        return "1"
    out = []
    for b in w:
        gen, inv = divmod(b, 2)
        out.append(chr((ord("A") if inv else ord("a")) + gen))
    return "".join(out)


def reduce_letters(letters: Iterable[int]) -> Word:
    """Freely reduce a letter sequence (stack cancellation)."""
    stack = []
    for b in letters:
        if stack and stack[-1] == b ^ 1:
            stack.pop()
        else:
            stack.append(b)
    return Word(bytes(stack))


def _mul(u: bytes, v: bytes) -> bytes:
    # Both inputs reduced: cancellation happens only at the seam.
    i = len(u)
    j = 0
    n = len(v)
    while i > 0 and j < n and u[i - 1] ^ 1 == v[j]:
        i -= 1
        j += 1
    return u[:i] + v[j:]


def multiply(u: bytes, v: bytes) -> Word:
    """Group product of two reduced words."""
    return Word(_mul(u, v))


def inverse(w: bytes) -> Word:
    return Word(bytes(b ^ 1 for b in reversed(w)))


def power(w: bytes, n: int) -> Word:
    """``w**n`` for any integer n."""
    if n < 0:
        return power(inverse(w), -n)
    acc = b""
    base = bytes(w)
    while n:
        if n & 1:
            acc = _mul(acc, base)
        base = _mul(base, base)
        n >>= 1
    return Word(acc)


def conjugate(w: bytes, by: bytes) -> Word:
    """``by * w * by^-1``."""
    return Word(_mul(_mul(by, w), inverse(by)))


def commutator(u: bytes, v: bytes) -> Word:
    return Word(_mul(_mul(u, v), _mul(inverse(u), inverse(v))))


def cyclic_reduce(w: bytes) -> tuple["CyclicWord", Word]:
    """Split ``w = c * core * c^-1`` with ``core`` cyclically reduced.

    Returns ``(CyclicWord(core), c)``.  The core has minimal length in the
    conjugacy class of ``w``.
    """
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1] ^ 1:
        i += 1
        j -= 1
    return CyclicWord(w[i:j]), Word(w[:i])


def least_rotation(s: bytes) -> int:
    """Index of the lexicographically least rotation (Booth's algorithm)."""
    n = len(s)
    if n <= 1:
        return 0
    ss = s + s
    f = [-1] * len(ss)
    k = 0
    for j in range(1, len(ss)):
        sj = ss[j]
        i = f[j - k - 1]
        while i != -1 and sj != ss[k + i + 1]:
            if sj < ss[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != ss[k + i + 1]:
            if sj < ss[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n


class CyclicWord(bytes):
    """A conjugacy class, stored as the least rotation of its cyclic core.

    Construction canonicalizes, so equality of CyclicWords is equality of
    conjugacy classes of cyclically reduced words.
    """

    __slots__ = ()

    def __new__(cls, core: bytes = b""):
        if core and core[0] == core[-1] ^ 1:
            raise ValueError("core is not cyclically reduced")
        k = least_rotation(core)
        return super().__new__(cls, core[k:] + core[:k])

    def __repr__(self):
        return f"CyclicWord({format_word(self)!r})"

    @classmethod
    def of(cls, w: bytes) -> "CyclicWord":
        """Conjugacy class of an arbitrary reduced word."""
        core, _ = cyclic_reduce(w)
        return core

    def representative(self) -> Word:
        return Word(self)

    def rotations(self) -> Iterator[Word]:
        for k in range(max(1, len(self))):
            yield Word(self[k:] + self[:k])


def canonical(core: bytes) -> Word:
    """Least rotation of a cyclically reduced word; idempotent."""
    if core and core[0] == core[-1] ^ 1:
        raise ValueError("input is not cyclically reduced")
    k = least_rotation(core)
    return Word(core[k:] + core[:k])


def abelianize(w: bytes, rank: int) -> tuple[int, ...]:
    """Image in Z^rank: entry i counts a_i minus a_i^-1."""
    vec = [0] * rank
    for b in w:
        gen, inv = divmod(b, 2)
        vec[gen] += -1 if inv else 1
    return tuple(vec)


@dataclass(frozen=True)
class Alphabet:
    """Generator alphabet of the free group F_rank."""

    rank: int

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be at least 2 (non-elementary group)")
        if self.rank > 26:
            raise ValueError("letter serialization supports rank <= 26")

    @property
    def letters(self) -> tuple[int, ...]:
        """All 2*rank letters in canonical order."""
        return tuple(range(2 * self.rank))

    def generators(self) -> tuple[Word, ...]:
        return tuple(Word(bytes([2 * g])) for g in range(self.rank))

    def basis_words(self) -> tuple[Word, ...]:
        """Generators and inverses as one-letter words, canonical order."""
        return tuple(Word(bytes([b])) for b in self.letters)


class Automorphism:
    """Automorphism given by generator images, with a user-supplied inverse.

    The inverse images are validated (not computed): applying the map and
    then the inverse map to every generator must give that generator back.
    """

    def __init__(self, rank: int, images: Sequence[bytes], inverse_images: Sequence[bytes]):
        if len(images) != rank or len(inverse_images) != rank:
            raise ValueError("need one image per generator")
        self.rank = rank
        self._table = self._letter_table(rank, images)
        self._inverse_table = self._letter_table(rank, inverse_images)
        for g in range(rank):
            letter = Word(bytes([2 * g]))
            roundtrip = self._apply(self._inverse_table, self._apply(self._table, letter))
            if roundtrip != letter:
                raise ValueError(
                    f"inverse images do not invert the map on generator {format_word(letter)}"
                )

    @staticmethod
    def _letter_table(rank: int, images: Sequence[bytes]) -> list[bytes]:
        table: list[bytes] = [b""] * (2 * rank)
        for g, img in enumerate(images):
            w = img if isinstance(img, bytes) else bytes(img)
            table[2 * g] = bytes(w)
            table[2 * g + 1] = bytes(inverse(w))
        return table

    @staticmethod
    def _apply(table: list[bytes], w: bytes) -> Word:
        out = bytearray()
        for b in w:
            for c in table[b]:
                if out and out[-1] == c ^ 1:
                    out.pop()
                else:
                    out.append(c)
        return Word(bytes(out))

    def apply(self, w: bytes) -> Word:
        return self._apply(self._table, w)

    def apply_inverse(self, w: bytes) -> Word:
        return self._apply(self._inverse_table, w)

    def inverted(self) -> "Automorphism":
        inv = object.__new__(Automorphism)
        inv.rank = self.rank
        inv._table = self._inverse_table
        inv._inverse_table = self._table
        return inv

    @classmethod
    def from_strings(cls, rank: int, images: Sequence[str], inverse_images: Sequence[str]):
        return cls(
            rank,
            [parse_word(s) for s in images],
            [parse_word(s) for s in inverse_images],
        )


def apply_automorphism(phi: Automorphism, w: bytes) -> Word:
    """Substitute generator images and freely reduce."""
    return phi.apply(w)


def random_reduced_word(rng, length: int, rank: int) -> Word:
    """Uniform reduced word of exactly the given length (seeded generator)."""
    if length <= 0:
        return EPSILON
    letters = [int(rng.integers(0, 2 * rank))]
    for _ in range(length - 1):
        step = int(rng.integers(0, 2 * rank - 1))
        banned = letters[-1] ^ 1
        letters.append(step + 1 if step >= banned else step)
    return Word(bytes(letters))
