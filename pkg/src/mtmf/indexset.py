"""Index sets B, subsets of the naturals over which a Taylor measure sums.

Five closed variants cover every set needed here: finite sets, ranges
``0..N``, all naturals, the positive naturals and complements of finite
sets.  Values are immutable; intersections and unions stay inside the
family.
"""
from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class IndexSet:
    """Canonical index set.

    ``kind`` is one of ``"finite"``, ``"range"``, ``"all"``, ``"positive"``,
    ``"cofinite"``.  ``members`` holds the sorted finite members (finite) or
    the sorted excluded members (cofinite); ``upper`` is N for ``0..N``.
    """

    kind: str
    members: tuple[int, ...] = ()
    upper: int = -1

    # --- constructors ---------------------------------------------------
    @staticmethod
    def finite(values: Iterable[int]) -> "IndexSet":
        vals = sorted({_nat(v) for v in values})
        if vals and vals == list(range(vals[-1] + 1)):
            return IndexSet("range", (), vals[-1])
        return IndexSet("finite", tuple(vals))

    @staticmethod
    def range(n: int) -> "IndexSet":
        """``{0, 1, ..., n}``; ``n = -1`` gives the empty set."""
        if n < 0:
            return IndexSet("finite", ())
        return IndexSet("range", (), int(n))

    @staticmethod
    def all() -> "IndexSet":
        return IndexSet("all")

    @staticmethod
    def positive() -> "IndexSet":
        return IndexSet("positive")

    @staticmethod
    def cofinite(excluded: Iterable[int]) -> "IndexSet":
        ex = sorted({_nat(v) for v in excluded})
        if not ex:
            return IndexSet("all")
        if ex == [0]:
            return IndexSet("positive")
        return IndexSet("cofinite", tuple(ex))

    @staticmethod
    def empty() -> "IndexSet":
        return IndexSet("finite", ())

    # --- queries --------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.kind in ("finite", "range")

    @property
    def is_empty(self) -> bool:
        return self.kind == "finite" and not self.members

    def max(self) -> int:
        if not self.is_finite:
            raise ValueError("infinite index set has no maximum")
        if self.kind == "range":
            return self.upper
        if not self.members:
            raise ValueError("empty index set has no maximum")
        return self.members[-1]

    def __contains__(self, n: int) -> bool:
        return self.contains(n)

    def contains(self, n: int) -> bool:
        if n < 0 or int(n) != n:
            return False
        n = int(n)
        k = self.kind
        if k == "all":
            return True
        if k == "positive":
            return n >= 1
        if k == "range":
            return n <= self.upper
        i = bisect.bisect_left(self.members, n)
        found = i < len(self.members) and self.members[i] == n
        return found if k == "finite" else not found

    def __iter__(self) -> Iterator[int]:
        """Ascending members (infinite for infinite sets)."""
        k = self.kind
        if k == "finite":
            yield from self.members
            return
        if k == "range":
            yield from range(self.upper + 1)
            return
        n = 1 if k == "positive" else 0
        excluded = set(self.members) if k == "cofinite" else ()
        while True:
            if n not in excluded:
                yield n
            n += 1

    def enumerate_up_to(self, limit: int) -> list[int]:
        """All members ``<= limit`` in ascending order."""
        if limit < 0:
            return []
        k = self.kind
        if k == "finite":
            return list(self.members[: bisect.bisect_right(self.members, limit)])
        if k == "range":
            return list(range(min(limit, self.upper) + 1))
        if k == "all":
            return list(range(limit + 1))
        if k == "positive":
            return list(range(1, limit + 1))
        ex = set(self.members)
        return [n for n in range(limit + 1) if n not in ex]

    def first(self, count: int) -> list[int]:
        """The ``count`` smallest members (fewer if the set is smaller)."""
        out = []
        for n in self:
            if len(out) >= count:
                break
            out.append(n)
        return out

    # --- algebra --------------------------------------------------------
    def _finite_members(self) -> tuple[int, ...]:
        if self.kind == "range":
            return tuple(range(self.upper + 1))
        return self.members

    def _excluded(self) -> tuple[int, ...]:
        return {"all": (), "positive": (0,), "cofinite": self.members}[self.kind]

    def shift(self, k: int) -> "IndexSet":
        """``{n - k : n in B, n >= k}``, the index set of ``tau^k``."""
        if k < 0:
            raise ValueError("shift must be non-negative")
        kind = self.kind
        if k == 0 or kind == "all":
            return self
        if kind == "positive":
            return IndexSet.all()
        if kind == "range":
            return IndexSet.range(self.upper - k)
        moved = [m - k for m in self.members if m >= k]
        return IndexSet.finite(moved) if kind == "finite" else IndexSet.cofinite(moved)

    def intersect(self, other: "IndexSet") -> "IndexSet":
        if self.is_finite:
            return IndexSet.finite(n for n in self._finite_members() if n in other)
        if other.is_finite:
            return other.intersect(self)
        return IndexSet.cofinite(set(self._excluded()) | set(other._excluded()))

    def union(self, other: "IndexSet") -> "IndexSet":
        if self.is_finite and other.is_finite:
            return IndexSet.finite(set(self._finite_members()) | set(other._finite_members()))
        if self.is_finite:
            return other.union(self)
        if other.is_finite:
            keep = set(other._finite_members())
            return IndexSet.cofinite(n for n in self._excluded() if n not in keep)
        return IndexSet.cofinite(set(self._excluded()) & set(other._excluded()))

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return self.intersect(other)

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return self.union(other)

    # --- text -----------------------------------------------------------
    def to_text(self) -> str:
        k = self.kind
        if k == "all":
            return "N"
        if k == "positive":
            return "N+"
        if k == "range":
            return f"0..{self.upper}"
        inner = ",".join(str(v) for v in self.members)
        if k == "finite":
            return "{" + inner + "}"
        return "N\\{" + inner + "}"

    def __str__(self) -> str:
        return self.to_text()

    @staticmethod
    def parse(text: str) -> "IndexSet":
        """Read ``{1,4}``, ``0..N``, ``N``, ``N+`` or ``N\\{...}``."""
        s = text.strip().replace(" ", "")
        if s in ("N", "ℕ"):
            return IndexSet.all()
        if s in ("N+", "ℕ+", "ℕ⁺"):
            return IndexSet.positive()
        m = re.fullmatch(r"0\.\.(\d+)", s)
        if m:
            return IndexSet.range(int(m.group(1)))
        m = re.fullmatch(r"\{([\d,]*)\}", s)
        if m:
            return IndexSet.finite(_int_list(m.group(1), text))
        m = re.fullmatch(r"[Nℕ]\\\{([\d,]*)\}", s)
        if m:
            return IndexSet.cofinite(_int_list(m.group(1), text))
        raise ValueError(f"unrecognised index set {text!r}")


def _nat(v) -> int:
    if int(v) != v or v < 0:
        raise ValueError(f"index set members must be naturals, got {v!r}")
    return int(v)


def _int_list(body: str, text: str) -> list[int]:
    if not body:
        return []
    parts = body.split(",")
    if any(p == "" for p in parts):
        raise ValueError(f"malformed index list in {text!r}")
    return [int(p) for p in parts]
