"""Canonical algebra of clopen subsets of the boundary of F_k.

A clopen set is a finite union of cylinders <w> (ends whose reduced
expansion begins with w).  The canonical form is a prefix antichain with
no complete sibling family: if for some reduced u every admissible
extension u.y is present, the family merges into <u>; the whole boundary
is the reserved value ALL.  Canonical form gives decidable equality and
deterministic serialization.

Maps on ends are stored as the images of the k positive one-letter
cylinders together with the automorphism used for equivariant extension;
negative-letter images come from <X> = X.(not <x>).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .words import (
    Automorphism,
    RankError,
    Word,
    concat,
    format_word,
    invert,
    is_prefix,
    parse_word,
)


def letters_of_rank(rank: int) -> list[int]:
    return [s * i for i in range(1, rank + 1) for s in (1, -1)]


def admissible_next(rank: int, w: Word) -> list[int]:
    """Letters that can extend the reduced word w by one."""
    if not w:
        return letters_of_rank(rank)
    return [y for y in letters_of_rank(rank) if y != -w[-1]]


def _canonicalize(rank: int, words: Iterable[Word]) -> tuple[Word, ...] | None:
    """Antichain + complete-sibling merge; None encodes ALL."""
    pool = set(words)
    if any(len(w) == 0 for w in pool):
        return None
    # absorb descendants into ancestors
    pool = {
        w
        for w in pool
        if not any(w[:i] in pool for i in range(len(w)))
    }
    changed = True
    while changed:
        changed = False
        by_parent: dict[Word, set[int]] = {}
        for w in pool:
            by_parent.setdefault(w[:-1], set()).add(w[-1])
        for parent, kids in by_parent.items():
            if len(kids) == len(admissible_next(rank, parent)):
                if not parent:
                    return None
                pool -= {parent + (y,) for y in kids}
                pool.add(parent)
                changed = True
                break
    return tuple(sorted(pool, key=lambda w: (len(w), w)))


class BoxSet:
    """Canonical clopen subset of the boundary of F_k."""

    __slots__ = ("rank", "cylinders", "is_all")

    def __init__(self, rank: int, words: Iterable[Word] = (), *, _all: bool = False):
        self.rank = rank
        if _all:
            self.is_all = True
            self.cylinders: tuple[Word, ...] = ()
            return
        canon = _canonicalize(rank, words)
        if canon is None:
            self.is_all = True
            self.cylinders = ()
        else:
            self.is_all = False
            self.cylinders = canon

    # -- constructors ---------------------------------------------------

    @classmethod
    def empty(cls, rank: int) -> "BoxSet":
        return cls(rank, ())

    @classmethod
    def all(cls, rank: int) -> "BoxSet":
        return cls(rank, (), _all=True)

    @classmethod
    def cylinder(cls, rank: int, w: Sequence[int]) -> "BoxSet":
        w = tuple(w)
        if not w:
            raise ValueError("cylinders require a nonempty word")
        return cls(rank, (w,))

    @classmethod
    def from_strings(cls, rank: int, words: Iterable[str]) -> "BoxSet":
        return cls(rank, (parse_word(s, rank) for s in words))

    # -- predicates ------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.is_all and not self.cylinders

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoxSet):
            return NotImplemented
        if self.rank != other.rank:
            raise RankError("rank mismatch")
        return self.is_all == other.is_all and self.cylinders == other.cylinders

    def __hash__(self) -> int:
        return hash((self.rank, self.is_all, self.cylinders))

    def contains_end_through(self, w: Word) -> bool:
        """Membership of every end extending the reduced word w, when decided.

        Only valid if w is at least as deep as every cylinder; used by the
        depth-d membership oracle in tests.
        """
        if self.is_all:
            return True
        return any(is_prefix(c, w) for c in self.cylinders)

    # -- boolean algebra ---------------------------------------------------

    def _check(self, other: "BoxSet") -> None:
        if self.rank != other.rank:
            raise RankError("rank mismatch")

    def union(self, other: "BoxSet") -> "BoxSet":
        self._check(other)
        if self.is_all or other.is_all:
            return BoxSet.all(self.rank)
        return BoxSet(self.rank, self.cylinders + other.cylinders)

    def intersect(self, other: "BoxSet") -> "BoxSet":
        self._check(other)
        if self.is_all:
            return other
        if other.is_all:
            return self
        out = []
        for u in self.cylinders:
            for v in other.cylinders:
                if is_prefix(u, v):
                    out.append(v)
                elif is_prefix(v, u):
                    out.append(u)
        return BoxSet(self.rank, out)

    def complement(self) -> "BoxSet":
        if self.is_all:
            return BoxSet.empty(self.rank)
        if self.is_empty():
            return BoxSet.all(self.rank)
        out = BoxSet.all(self.rank)
        for w in self.cylinders:
            out = out.intersect(self._cylinder_complement(w))
        return out

    def _cylinder_complement(self, w: Word) -> "BoxSet":
        words = []
        for i in range(len(w)):
            for y in admissible_next(self.rank, w[:i]):
                if y != w[i]:
                    words.append(w[:i] + (y,))
        return BoxSet(self.rank, words)

    def subtract(self, other: "BoxSet") -> "BoxSet":
        return self.intersect(other.complement())

    # -- group action ------------------------------------------------------

    def translate(self, g: Sequence[int]) -> "BoxSet":
        """Image of this set under the boundary action of the word g."""
        g = tuple(g)
        if self.is_all:
            return self
        out: list[Word] = []
        for w in self.cylinders:
            out.extend(_translate_cylinder(self.rank, g, w))
        return BoxSet(self.rank, out)

    # -- presentation --------------------------------------------------------

    def as_strings(self) -> list[str]:
        return [format_word(w, self.rank) for w in self.cylinders]

    def display(self) -> str:
        """Human form: sums of cylinders and base-minus-holes differences.

        Presentation only; the internal form stays the canonical antichain.
        """
        if self.is_all:
            return "ALL"
        if self.is_empty():
            return "(empty)"
        terms = _display_terms(self.rank, (), set(self.cylinders))
        parts = []
        for sign, w in terms:
            tok = f"<{format_word(w, self.rank)}>"
            if not parts:
                parts.append(tok if sign > 0 else f"ALL - {tok}")
            else:
                parts.append(f"{'+' if sign > 0 else '-'} {tok}")
        return " ".join(parts)

    def __repr__(self) -> str:
        if self.is_all:
            return "BoxSet(ALL)"
        return f"BoxSet({'+'.join(self.as_strings()) or 'empty'})"


def _translate_cylinder(rank: int, g: Word, w: Word) -> list[Word]:
    """g.<w> as a list of cylinder words.

    When the cancellation in g.w does not consume all of w the image is the
    single cylinder <[gw]>.  Otherwise g ends with the inverse of w and
    g.<w> = g0.(not <z>) with g0 the unconsumed head of g and z the inverse
    of w's last letter; the complement splits into one-letter cylinders and
    the translation recurses on strictly shorter g.
    """
    gw = concat(g, w)
    cancelled = (len(g) + len(w) - len(gw)) // 2
    if cancelled < len(w):
        return [gw]
    g0 = g[: len(g) - len(w)]
    z = -w[-1]
    out: list[Word] = []
    for y in letters_of_rank(rank):
        if y != z:
            out.extend(_translate_cylinder(rank, g0, (y,)))
    return out


def _display_terms(
    rank: int, u: Word, words: set[Word]
) -> list[tuple[int, Word]]:
    """Signed cylinder terms for the antichain ``words`` inside <u>.

    Chooses the shorter of the plain sum over sub-branches and the form
    <u> minus the complement within <u>, recursively.
    """
    if words == {u}:
        return [(1, u)]
    by_child: dict[Word, set[Word]] = {}
    for w in words:
        by_child.setdefault(w[: len(u) + 1], set()).add(w)
    positive: list[tuple[int, Word]] = []
    for child in sorted(by_child, key=lambda w: (len(w), w)):
        positive.extend(_display_terms(rank, child, by_child[child]))
    if not u:
        inner = BoxSet(rank, words)
        comp = inner.complement()
        if not comp.is_all and len(comp.cylinders) + 1 < len(positive):
            negated = _display_terms(rank, (), set(comp.cylinders))
            return [(1, ())] + [(-s, w) for s, w in negated]
        return positive
    comp_words = _complement_within(rank, u, words)
    if len(comp_words) + 1 < len(positive):
        negated = _display_terms(rank, u, comp_words) if comp_words else []
        return [(1, u)] + [(-s, w) for s, w in negated]
    return positive


def _complement_within(rank: int, u: Word, words: set[Word]) -> set[Word]:
    """Antichain of <u> minus the given antichain (all inside <u>)."""
    whole = BoxSet.cylinder(rank, u)
    part = BoxSet(rank, words)
    return set(whole.subtract(part).cylinders)


class PartitionViolation(ValueError):
    """The one-letter images of an ends map fail to partition the boundary."""

    def __init__(self, kind: str, witness: Word, rank: int):
        self.kind = kind
        self.witness = witness
        super().__init__(f"{kind}: witness <{format_word(witness, rank)}>")


class EndsMap:
    """Boundary homeomorphism stored by its positive one-letter images.

    ``aut`` is the automorphism giving the equivariance twist: the image of
    g.S is aut(g).image(S).  The image of <X> for negative X is derived as
    translate(aut(X), complement(image <x>)).
    """

    __slots__ = ("aut", "letter_images")

    def __init__(self, aut: Automorphism, letter_images: Sequence[BoxSet]):
        if len(letter_images) != aut.rank:
            raise RankError("need one image per positive letter")
        self.aut = aut
        self.letter_images: tuple[BoxSet, ...] = tuple(letter_images)

    @property
    def rank(self) -> int:
        return self.aut.rank

    @classmethod
    def identity(cls, rank: int) -> "EndsMap":
        return cls(
            Automorphism.identity(rank),
            [BoxSet.cylinder(rank, (i,)) for i in range(1, rank + 1)],
        )

    def image_of_letter(self, x: int) -> BoxSet:
        if x > 0:
            return self.letter_images[x - 1]
        inner = self.letter_images[-x - 1].complement()
        return inner.translate(self.aut.image_of_letter(x))

    def image_of_cylinder(self, w: Sequence[int]) -> BoxSet:
        """f(<w>) by peeling the first letter: f(<x.v>) = aut(x).f(<v>)."""
        w = tuple(w)
        if not w:
            raise ValueError("cylinders require a nonempty word")
        if len(w) == 1:
            return self.image_of_letter(w[0])
        return self.image_of_cylinder(w[1:]).translate(
            self.aut.image_of_letter(w[0])
        )

    def image_of_cylinder_last(self, w: Sequence[int]) -> BoxSet:
        """Same map, peeling the last letter: f(<u.y>) = aut(u).f(<y>)."""
        w = tuple(w)
        if not w:
            raise ValueError("cylinders require a nonempty word")
        return self.image_of_letter(w[-1]).translate(self.aut.apply(w[:-1]))

    def ends_image(self, S: BoxSet) -> BoxSet:
        if S.rank != self.rank:
            raise RankError("rank mismatch")
        if S.is_all:
            return BoxSet.all(self.rank)
        out = BoxSet.empty(self.rank)
        for w in S.cylinders:
            out = out.union(self.image_of_cylinder(w))
        return out

    def compose(self, other: "EndsMap") -> "EndsMap":
        """self after other, evaluated image-by-image."""
        if self.rank != other.rank:
            raise RankError("rank mismatch")
        return EndsMap(
            self.aut.compose(other.aut),
            [self.ends_image(img) for img in other.letter_images],
        )

    def power(self, n: int) -> "EndsMap":
        if n < 1:
            raise ValueError("power requires n >= 1")
        out = self
        for _ in range(n - 1):
            out = self.compose(out)
        return out

    def partition_check(self) -> PartitionViolation | None:
        """Verify the 2k one-letter images are disjoint and cover ALL."""
        images = [
            (x, self.image_of_letter(x)) for x in letters_of_rank(self.rank)
        ]
        for i, (_, A) in enumerate(images):
            for _, B in images[i + 1 :]:
                inter = A.intersect(B)
                if not inter.is_empty():
                    return PartitionViolation(
                        "overlap", inter.cylinders[0], self.rank
                    )
        total = BoxSet.empty(self.rank)
        for _, A in images:
            total = total.union(A)
        if not total.is_all:
            missing = total.complement()
            return PartitionViolation("missing", missing.cylinders[0], self.rank)
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EndsMap):
            return NotImplemented
        return self.aut == other.aut and self.letter_images == other.letter_images

    def __repr__(self) -> str:
        body = "; ".join(
            f"<{format_word((i + 1,), self.rank)}> -> {img.display()}"
            for i, img in enumerate(self.letter_images)
        )
        return f"EndsMap({body})"
