"""Two-level label structure: label spaces, focal sets, and the fine-to-coarse map.

Labels are dense 0-based integer indices; names are cosmetic. Focal sets are
immutable bitmasks over one label space, so subset tests and projections are
single integer operations. Everything here is immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import FormatError, InvalidLabelError, ShapeError


@dataclass(frozen=True)
class LabelSpace:
    """One level of the hierarchy: ``level`` is "fine" or "coarse"."""

    level: str
    size: int
    names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.level not in ("fine", "coarse"):
            raise ShapeError(f"unknown level {self.level!r}")
        if self.size < 2:
            raise ShapeError(f"label space needs >= 2 labels, got {self.size}")
        if self.names is not None:
            if len(self.names) != self.size:
                raise ShapeError(
                    f"{len(self.names)} names for {self.size} labels"
                )
            if len(set(self.names)) != len(self.names):
                raise ShapeError("label names must be unique")

    def name_of(self, index: int) -> str:
        if self.names is not None:
            return self.names[index]
        return f"{self.level}{index}"


@dataclass(frozen=True)
class FocalSet:
    """A subset of one label space, stored as a bitmask of width ``size``.

    Carries disjunctive evidence: mass on a multi-label set means the
    evidence supports any of its members without distinguishing them.
    """

    mask: int
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ShapeError("focal set needs a positive space size")
        if self.mask < 0 or self.mask >> self.size:
            raise InvalidLabelError(
                f"mask {self.mask:#x} has bits outside [0, {self.size})"
            )

    @classmethod
    def from_indices(cls, indices: Iterable[int], size: int) -> "FocalSet":
        mask = 0
        for i in indices:
            if not 0 <= i < size:
                raise InvalidLabelError(f"label {i} outside [0, {size})")
            mask |= 1 << i
        return cls(mask, size)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.size) if self.mask >> i & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, label: int) -> bool:
        return 0 <= label < self.size and bool(self.mask >> label & 1)

    def issubset(self, other: "FocalSet") -> bool:
        return self.mask & ~other.mask == 0

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.size) - 1

    def label(self, space: LabelSpace) -> str:
        return "{" + ",".join(space.name_of(i) for i in self.members) + "}"


@dataclass(frozen=True)
class Hierarchy:
    """Fine and coarse spaces plus the total parent map ``parent[fine] = coarse``.

    The same map serves as the singleton-level lookup used at decode time.
    Construction only checks shapes; semantic invariants (parents in range,
    no childless coarse label) are reported by :func:`validate_hierarchy` so
    that broken inputs can be diagnosed rather than rejected opaquely.
    """

    fine: LabelSpace
    coarse: LabelSpace
    parent: tuple[int, ...]

    def __post_init__(self):
        if self.fine.level != "fine" or self.coarse.level != "coarse":
            raise ShapeError("hierarchy levels must be (fine, coarse)")
        if len(self.parent) != self.fine.size:
            raise ShapeError(
                f"parent map has {len(self.parent)} entries for "
                f"{self.fine.size} fine labels"
            )

    def parent_of(self, fine_label: int) -> int:
        """Coarse parent of a fine label (the decode-time singleton map)."""
        if not 0 <= fine_label < self.fine.size:
            raise InvalidLabelError(f"fine label {fine_label} out of range")
        p = self.parent[fine_label]
        if not 0 <= p < self.coarse.size:
            raise InvalidLabelError(f"fine {fine_label} parent out of range")
        return p


def project_set(a: FocalSet, h: Hierarchy) -> FocalSet:
    """Lift the parent map to sets: the image of every member of ``a``.

    The result is never larger than ``a`` and is empty only for empty input.
    """
    if a.size != h.fine.size:
        raise ShapeError(
            f"focal set over {a.size} labels projected through a "
            f"{h.fine.size}-fine hierarchy"
        )
    mask = 0
    for y in a.members:
        mask |= 1 << h.parent_of(y)
    return FocalSet(mask, h.coarse.size)


def validate_hierarchy(h: Hierarchy) -> list[str]:
    """Return human-readable invariant violations; empty list means valid."""
    violations = []
    children = [0] * h.coarse.size
    for y, p in enumerate(h.parent):
        if not 0 <= p < h.coarse.size:
            violations.append(f"fine {y} parent out of range")
        else:
            children[p] += 1
    for c, n in enumerate(children):
        if n == 0:
            violations.append(f"coarse {c} childless")
    return violations


def contiguous_hierarchy(n_fine: int, n_coarse: int) -> Hierarchy:
    """Evenly-sized contiguous blocks of fine labels under each coarse label."""
    if n_fine < n_coarse:
        raise ShapeError(f"need n_fine >= n_coarse, got {n_fine} < {n_coarse}")
    parent = tuple(y * n_coarse // n_fine for y in range(n_fine))
    return Hierarchy(
        LabelSpace("fine", n_fine), LabelSpace("coarse", n_coarse), parent
    )


# ---------------------------------------------------------------------------
# Hierarchy file: one record per fine label,
#   fine_index,coarse_index[,fine_name,coarse_name]
# comma-separated, '#' starts a comment, blank lines ignored.
# ---------------------------------------------------------------------------


def load_hierarchy(path) -> Hierarchy:
    records: dict[int, tuple[int, Optional[str], Optional[str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) not in (2, 4):
                raise FormatError(
                    f"{path}:{lineno}: expected 2 or 4 comma-separated fields"
                )
            try:
                fine_idx, coarse_idx = int(fields[0]), int(fields[1])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer label index")
            if fine_idx in records:
                raise FormatError(
                    f"{path}:{lineno}: duplicate fine index {fine_idx}"
                )
            fname, cname = (fields[2], fields[3]) if len(fields) == 4 else (None, None)
            records[fine_idx] = (coarse_idx, fname, cname)

    if not records:
        raise FormatError(f"{path}: no records")
    n_fine = len(records)
    if sorted(records) != list(range(n_fine)):
        raise FormatError(f"{path}: fine indices must be dense 0..{n_fine - 1}")

    named = [records[y][1] is not None for y in range(n_fine)]
    if any(named) and not all(named):
        raise FormatError(f"{path}: either all records carry names or none")

    parent = tuple(records[y][0] for y in range(n_fine))
    n_coarse = max(parent) + 1
    if n_coarse < 2:
        raise FormatError(f"{path}: coarse space needs >= 2 labels")

    fine_names = coarse_names = None
    if all(named):
        fine_names = tuple(records[y][1] for y in range(n_fine))
        by_coarse: dict[int, str] = {}
        for y in range(n_fine):
            c, cname = parent[y], records[y][2]
            if by_coarse.setdefault(c, cname) != cname:
                raise FormatError(
                    f"{path}: conflicting names for coarse {c}: "
                    f"{by_coarse[c]!r} vs {cname!r}"
                )
        coarse_names = tuple(by_coarse.get(c, f"coarse{c}") for c in range(n_coarse))

    return Hierarchy(
        LabelSpace("fine", n_fine, fine_names),
        LabelSpace("coarse", n_coarse, coarse_names),
        parent,
    )


def save_hierarchy(h: Hierarchy, path) -> None:
    lines = []
    for y in range(h.fine.size):
        c = h.parent[y]
        if h.fine.names is not None and h.coarse.names is not None:
            lines.append(f"{y},{c},{h.fine.names[y]},{h.coarse.names[c]}")
        else:
            lines.append(f"{y},{c}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
