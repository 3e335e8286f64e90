"""Exact arithmetic for reduced words in a free group of rank k.

Letters are nonzero integers: ``i`` is the i-th generator (1-based) and
``-i`` its inverse.  Words are tuples of letters with no adjacent
cancelling pair.  Textual form follows the usual convention: generator i
prints as the i-th lowercase letter, its inverse as the uppercase letter,
so ``abC`` means a.b.c^-1 and ``1`` (or the empty string) is the identity.
"""

from __future__ import annotations

from typing import Iterable, Sequence

Word = tuple[int, ...]

EPSILON: Word = ()

_LOWER = "abcdefghijklmnopqrstuvwxyz"

MAX_NAMED_RANK = 26


class RankError(ValueError):
    """A letter or word does not fit the ambient rank."""


def check_letter(x: int, rank: int) -> None:
    if x == 0 or abs(x) > rank:
        raise RankError(f"letter {x} out of rank {rank}")


def reduce_word(raw: Iterable[int], rank: int | None = None) -> Word:
    """Cancel adjacent inverse pairs until none remain.

    Idempotent; the stack pass performs maximal cancellation in one sweep.
    """
    out: list[int] = []
    for x in raw:
        if x == 0:
            raise RankError("0 is not a letter")
        if rank is not None:
            check_letter(x, rank)
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def concat(u: Sequence[int], v: Sequence[int]) -> Word:
    """Product of two reduced words, cancelling at the junction only."""
    u = list(u)
    i = 0
    n = len(v)
    while u and i < n and u[-1] == -v[i]:
        u.pop()
        i += 1
    return tuple(u) + tuple(v[i:])


def concat_all(*ws: Sequence[int]) -> Word:
    out: Word = EPSILON
    for w in ws:
        out = concat(out, w)
    return out


def invert(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def common_prefix_len(u: Sequence[int], v: Sequence[int]) -> int:
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return n


def is_prefix(u: Sequence[int], v: Sequence[int]) -> bool:
    return len(u) <= len(v) and tuple(v[: len(u)]) == tuple(u)


def letter_name(x: int, rank: int) -> str:
    check_letter(x, rank)
    if rank > MAX_NAMED_RANK:
        return f"x{x}" if x > 0 else f"X{-x}"
    return _LOWER[x - 1] if x > 0 else _LOWER[-x - 1].upper()


def format_word(w: Sequence[int], rank: int) -> str:
    if not w:
        return "1"
    return "".join(letter_name(x, rank) for x in w)


def parse_letter(ch: str, rank: int) -> int:
    low = ch.lower()
    idx = _LOWER.find(low)
    if idx < 0 or idx >= rank:
        raise RankError(f"unknown generator {ch!r} at rank {rank}")
    return -(idx + 1) if ch.isupper() else idx + 1


def parse_word(text: str, rank: int) -> Word:
    """Parse ``abC`` style words; ``1`` or the empty string is the identity."""
    text = text.strip()
    if text in ("", "1"):
        return EPSILON
    if rank > MAX_NAMED_RANK:
        raise RankError("textual words are limited to rank 26")
    return reduce_word([parse_letter(ch, rank) for ch in text])


class InverseVerificationError(ValueError):
    """The candidate inverse images fail to invert the automorphism."""

    def __init__(self, generator: int, residue: Word, direction: str):
        self.generator = generator
        self.residue = residue
        self.direction = direction
        super().__init__(
            f"composition {direction} moves generator {generator}: residue {residue}"
        )


def _raw_apply(images: Sequence[Word], w: Sequence[int]) -> Word:
    out: Word = EPSILON
    for x in w:
        out = concat(out, images[x - 1] if x > 0 else invert(images[-x - 1]))
    return out


def verify_inverse(
    images: Sequence[Word], inverse_images: Sequence[Word], rank: int
) -> tuple[int, Word, str] | None:
    """Check both compositions fix every generator.

    Returns None on success, else (generator, reduced residue, direction)
    for the first failure; direction says which composition moved it.
    """
    for g in range(1, rank + 1):
        res = _raw_apply(images, inverse_images[g - 1])
        if res != (g,):
            return g, res, "images o inverse_images"
        res = _raw_apply(inverse_images, images[g - 1])
        if res != (g,):
            return g, res, "inverse_images o images"
    return None


class Automorphism:
    """An automorphism of F_k given by generator images, with a verified inverse.

    Inverse images are required input: inverting an automorphism
    algorithmically is out of scope, and every worked example supplies the
    inverse explicitly.  Construction fails unless both compositions fix
    all generators.
    """

    __slots__ = ("rank", "images", "inverse_images")

    def __init__(
        self,
        rank: int,
        images: Sequence[Sequence[int]],
        inverse_images: Sequence[Sequence[int]],
    ):
        if len(images) != rank or len(inverse_images) != rank:
            raise RankError("need one image per generator")
        self.rank = rank
        self.images: tuple[Word, ...] = tuple(
            reduce_word(im, rank) for im in images
        )
        self.inverse_images: tuple[Word, ...] = tuple(
            reduce_word(im, rank) for im in inverse_images
        )
        bad = verify_inverse(self.images, self.inverse_images, rank)
        if bad is not None:
            raise InverseVerificationError(*bad)

    @classmethod
    def from_strings(
        cls, images: Sequence[str], inverse_images: Sequence[str]
    ) -> "Automorphism":
        rank = len(images)
        return cls(
            rank,
            [parse_word(s, rank) for s in images],
            [parse_word(s, rank) for s in inverse_images],
        )

    @classmethod
    def identity(cls, rank: int) -> "Automorphism":
        gens = [(i,) for i in range(1, rank + 1)]
        return cls(rank, gens, gens)

    def apply(self, w: Sequence[int]) -> Word:
        for x in w:
            check_letter(x, self.rank)
        return _raw_apply(self.images, w)

    def apply_inverse(self, w: Sequence[int]) -> Word:
        for x in w:
            check_letter(x, self.rank)
        return _raw_apply(self.inverse_images, w)

    def image_of_letter(self, x: int) -> Word:
        check_letter(x, self.rank)
        return self.images[x - 1] if x > 0 else invert(self.images[-x - 1])

    def inverse(self) -> "Automorphism":
        return Automorphism(self.rank, self.inverse_images, self.images)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other: (self.compose(other)).apply(w) = self(other(w))."""
        if self.rank != other.rank:
            raise RankError("rank mismatch")
        images = [self.apply(other.images[i]) for i in range(self.rank)]
        inv = [other.apply_inverse(self.inverse_images[i]) for i in range(self.rank)]
        return Automorphism(self.rank, images, inv)

    def power(self, n: int) -> "Automorphism":
        if n < 0:
            return self.inverse().power(-n)
        out = Automorphism.identity(self.rank)
        for _ in range(n):
            out = self.compose(out)
        return out

    def is_identity(self) -> bool:
        return all(self.images[i] == (i + 1,) for i in range(self.rank))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Automorphism)
            and self.rank == other.rank
            and self.images == other.images
        )

    def __hash__(self) -> int:
        return hash((self.rank, self.images))

    def __repr__(self) -> str:
        ims = ", ".join(
            f"{letter_name(i + 1, self.rank)}->{format_word(w, self.rank)}"
            for i, w in enumerate(self.images)
        )
        return f"Automorphism({ims})"
