"""Compact integer-set algebra.

A :class:`SlotSet` is either an explicit finite set of ids, or the complement
of a finite exclusion set relative to a domain supplied at query time.  This
keeps membership, intersection, and union closed-form, so very large domains
(e.g. every concept in an ontology) are never enumerated unless a caller
explicitly asks for the members of a set over a small fixture domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator


@dataclass(frozen=True)
class SlotSet:
    """Explicit id set (``wild=False``) or domain minus exclusions (``wild=True``)."""

    wild: bool
    ids: frozenset[int]

    @staticmethod
    def explicit(ids: Iterable[int]) -> "SlotSet":
        return SlotSet(False, frozenset(ids))

    @staticmethod
    def singleton(value: int) -> "SlotSet":
        return SlotSet(False, frozenset((value,)))

    @staticmethod
    def wildcard(excluding: Iterable[int] = ()) -> "SlotSet":
        return SlotSet(True, frozenset(excluding))

    @staticmethod
    def empty() -> "SlotSet":
        return SlotSet(False, frozenset())

    def contains(self, value: int) -> bool:
        if self.wild:
            return value not in self.ids
        return value in self.ids

    def intersect(self, other: "SlotSet") -> "SlotSet":
        if self.wild and other.wild:
            return SlotSet(True, self.ids | other.ids)
        if self.wild:
            return SlotSet(False, other.ids - self.ids)
        if other.wild:
            return SlotSet(False, self.ids - other.ids)
        return SlotSet(False, self.ids & other.ids)

    def union(self, other: "SlotSet") -> "SlotSet":
        if self.wild and other.wild:
            return SlotSet(True, self.ids & other.ids)
        if self.wild:
            return SlotSet(True, self.ids - other.ids)
        if other.wild:
            return SlotSet(True, other.ids - self.ids)
        return SlotSet(False, self.ids | other.ids)

    def difference_explicit(self, removed: Iterable[int]) -> "SlotSet":
        """Remove an explicit collection of values from this set."""
        removed = frozenset(removed)
        if self.wild:
            return SlotSet(True, self.ids | removed)
        return SlotSet(False, self.ids - removed)

    def map_values(self, fn: Callable[[int], int]) -> "SlotSet":
        """Apply a bijection on the domain to both kinds of representation."""
        return SlotSet(self.wild, frozenset(fn(v) for v in self.ids))

    def size_given(self, domain_size: int) -> int:
        if self.wild:
            # Exclusions are assumed to lie inside the domain.
            return domain_size - len(self.ids)
        return len(self.ids)

    def is_empty_given(self, domain_size: int) -> bool:
        return self.size_given(domain_size) <= 0

    def members_given(self, domain: Iterable[int]) -> Iterator[int]:
        if self.wild:
            for value in domain:
                if value not in self.ids:
                    yield value
        else:
            for value in sorted(self.ids):
                yield value

    def as_singleton_given(self, domain: Iterable[int]) -> int | None:
        members = list(self.members_given(domain))
        if len(members) == 1:
            return members[0]
        return None

    def is_full_given(self, domain: Iterable[int]) -> bool:
        if self.wild and not self.ids:
            return True
        return all(self.contains(v) for v in domain)


FULL = SlotSet.wildcard()
EMPTY = SlotSet.empty()
