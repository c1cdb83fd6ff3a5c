"""Focal-set families and the belief machinery built on them.

The network side of the calculus predicts a sigmoid *belief* per focal set.
Masses are recovered by the inclusion-exclusion transform restricted to the
family, any unassigned mass goes to the ignorance set (the whole space), and
the pignistic transform turns masses into an ordinary distribution for
decoding and metrics. Supervision is a per-set binary cross-entropy against
the indicator "true label is inside the set".

Masses may be negative before the regularizers have done their work; the
soft penalties (negativity and over-unity sums) are defined here, and the
pignistic projection clamps negatives so its output is always a valid
distribution.

Batch conventions: operations accept a single vector (one sample) or a
matrix with one row per sample. Penalties on a matrix return the batch mean
so every term of the training objective is a per-sample average. Reductions
use numpy's fixed-order summation, keeping results bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, FormatError, InvalidLabelError, ShapeError
from .hierarchy import FocalSet, LabelSpace

BCE_EPS = 1e-12  # probability clamp keeping log() finite on saturated logits


def canonical_order(sets: Iterable[FocalSet]) -> list[FocalSet]:
    """Deterministic family order: singletons ascending, then multi-label
    sets by (cardinality, lexicographic members)."""
    singles = sorted((s for s in sets if len(s) == 1), key=lambda s: s.mask)
    multis = sorted(
        (s for s in sets if len(s) > 1), key=lambda s: (len(s), s.members)
    )
    return singles + multis


@dataclass(frozen=True)
class FocalFamily:
    """An ordered budget of focal sets over one label space.

    ``subset_pairs`` holds every (i, j, sign) with sets[j] a subset of
    sets[i] and sign = (-1)^(|sets[i]| - |sets[j]|); it is precomputed once
    so the mass transform is a signed matrix-vector product in the training
    hot loop. ``contains_omega`` is true when some member equals the whole
    space, in which case the ignorance remainder stays at zero and that set
    keeps its own mass.

    Induced and file-loaded families always contain every singleton;
    hand-built families (diagnostics, small worked examples) may omit some,
    which :meth:`missing_singletons` reports.
    """

    space: LabelSpace
    sets: tuple[FocalSet, ...]
    subset_pairs: tuple[tuple[int, int, int], ...]
    contains_omega: bool

    @classmethod
    def build(cls, space: LabelSpace, sets: Sequence[FocalSet]) -> "FocalFamily":
        sets = tuple(sets)
        seen = set()
        for s in sets:
            if s.size != space.size:
                raise ShapeError(
                    f"set over {s.size} labels in a {space.size}-label family"
                )
            if s.is_empty:
                raise ShapeError("empty focal set in family")
            if s.mask in seen:
                raise ShapeError(f"duplicate focal set {s.members}")
            seen.add(s.mask)
        pairs = []
        for i, big in enumerate(sets):
            for j, small in enumerate(sets):
                if small.issubset(big):
                    sign = -1 if (len(big) - len(small)) % 2 else 1
                    pairs.append((i, j, sign))
        omega = any(s.is_full for s in sets)
        return cls(space, sets, tuple(pairs), omega)

    def __len__(self) -> int:
        return len(self.sets)

    def missing_singletons(self) -> list[int]:
        present = {s.mask for s in self.sets if len(s) == 1}
        return [y for y in range(self.space.size) if (1 << y) not in present]

    def index_of(self, s: FocalSet) -> int:
        for i, member in enumerate(self.sets):
            if member.mask == s.mask:
                return i
        raise KeyError(f"set {s.members} not in family")

    @property
    def cardinalities(self) -> np.ndarray:
        return self._cache("card", lambda: np.array([len(s) for s in self.sets], float))

    @property
    def mobius_matrix(self) -> np.ndarray:
        """M with M[i, j] = sign for sets[j] subset of sets[i], else 0."""

        def make():
            m = np.zeros((len(self.sets), len(self.sets)))
            for i, j, sign in self.subset_pairs:
                m[i, j] = sign
            return m

        return self._cache("mobius", make)

    @property
    def incidence(self) -> np.ndarray:
        """Label-by-set indicator: incidence[y, a] = 1 iff y in sets[a]."""

        def make():
            m = np.zeros((self.space.size, len(self.sets)))
            for a, s in enumerate(self.sets):
                for y in s.members:
                    m[y, a] = 1.0
            return m

        return self._cache("incidence", make)

    def _cache(self, key: str, make):
        store = self.__dict__.setdefault("_derived", {})
        if key not in store:
            store[key] = make()
        return store[key]


def sigmoid(logit):
    """Numerically stable logistic function."""
    x = np.asarray(logit, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("sigmoid argument must be finite")
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def belief_to_mass(beliefs, fam: FocalFamily):
    """Masses from beliefs by inclusion-exclusion restricted to the family:
    m(A) = sum over family subsets B of A of (-1)^(|A|-|B|) Bel(B).

    Output can contain negative entries; the penalties and the pignistic
    clamp are responsible for them downstream.
    """
    b = np.asarray(beliefs, dtype=float)
    if b.shape[-1] != len(fam):
        raise ShapeError(f"{b.shape[-1]} beliefs for {len(fam)} focal sets")
    return b @ fam.mobius_matrix.T


def omega_remainder(masses, fam: FocalFamily):
    """Mass left for the ignorance set: max(0, 1 - sum m). Zero when the
    family already contains the whole space (that member keeps its mass)."""
    m = np.asarray(masses, dtype=float)
    total = m.sum(axis=-1)
    if fam.contains_omega:
        return np.zeros_like(total) if m.ndim > 1 else 0.0
    rem = np.maximum(0.0, 1.0 - total)
    return rem if m.ndim > 1 else float(rem)


def mass_penalty(masses) -> float:
    """Negativity penalty sum(max(0, -m)); batch input returns the mean."""
    m = np.asarray(masses, dtype=float)
    per_sample = np.maximum(0.0, -m).sum(axis=-1)
    return float(per_sample if m.ndim == 1 else per_sample.mean())


def mass_penalty_grad(masses) -> np.ndarray:
    """-1 on strictly negative entries, 0 elsewhere (and at 0 itself)."""
    m = np.asarray(masses, dtype=float)
    g = np.where(m < 0.0, -1.0, 0.0)
    if m.ndim > 1:
        g /= m.shape[0]
    return g


def sum_penalty(masses) -> float:
    """Over-unity penalty max(0, sum m - 1); batch input returns the mean."""
    m = np.asarray(masses, dtype=float)
    per_sample = np.maximum(0.0, m.sum(axis=-1) - 1.0)
    return float(per_sample if m.ndim == 1 else per_sample.mean())


def sum_penalty_grad(masses) -> np.ndarray:
    """1 wherever the row sum strictly exceeds 1, else 0 (inactive at 1)."""
    m = np.asarray(masses, dtype=float)
    active = (m.sum(axis=-1, keepdims=True) - 1.0) > 0.0
    g = np.where(active, 1.0, 0.0) * np.ones_like(m)
    if m.ndim > 1:
        g /= m.shape[0]
    return g


def pignistic(masses, omega_mass, fam: FocalFamily):
    """Distribution over labels: each set's mass spread uniformly over its
    members, plus the ignorance mass spread over everything.

    Negative masses are clamped to zero first and the result renormalized,
    so the output is a distribution for any input; if nothing remains the
    output is uniform.
    """
    m = np.asarray(masses, dtype=float)
    if m.shape[-1] != len(fam):
        raise ShapeError(f"{m.shape[-1]} masses for {len(fam)} focal sets")
    single = m.ndim == 1
    m = np.atleast_2d(m)
    omega = np.atleast_1d(np.asarray(omega_mass, dtype=float))
    if omega.shape[0] != m.shape[0]:
        raise ShapeError("omega_mass not aligned with mass rows")

    n = fam.space.size
    clamped = np.maximum(m, 0.0)
    spread = fam.incidence / fam.cardinalities  # label x set
    scores = clamped @ spread.T + omega[:, None] / n
    total = scores.sum(axis=1, keepdims=True)
    out = np.where(total > 0.0, scores / np.where(total > 0.0, total, 1.0), 1.0 / n)
    return out[0] if single else out


@dataclass(frozen=True)
class BeliefState:
    """Belief, mass, ignorance remainder, and pignistic rows for one level."""

    beliefs: np.ndarray
    masses: np.ndarray
    omega_mass: np.ndarray
    pignistic: np.ndarray
    family: FocalFamily = field(repr=False)

    @classmethod
    def from_beliefs(cls, beliefs, fam: FocalFamily) -> "BeliefState":
        b = np.atleast_2d(np.asarray(beliefs, dtype=float))
        if np.any(b < 0) or np.any(b > 1):
            raise DomainError("beliefs must lie in [0,1]")
        m = belief_to_mass(b, fam)
        omega = np.asarray(omega_remainder(m, fam))
        return cls(b, m, omega, pignistic(m, omega, fam), fam)

    @classmethod
    def from_logits(cls, logits, fam: FocalFamily) -> "BeliefState":
        return cls.from_beliefs(sigmoid(np.atleast_2d(logits)), fam)


def bce_targets(true_labels, fam: FocalFamily) -> np.ndarray:
    """Indicator targets: target[i, a] = 1 iff sample i's label is in sets[a]."""
    y = np.asarray(true_labels)
    if y.ndim != 1:
        raise ShapeError("true_labels must be one-dimensional")
    if y.size and (y.min() < 0 or y.max() >= fam.space.size):
        raise InvalidLabelError("label outside family space")
    return fam.incidence[y]


def focal_bce(belief_logits, true_labels, fam: FocalFamily) -> float:
    """Mean over samples and sets of BCE(sigmoid(logit), label-in-set)."""
    z = np.atleast_2d(np.asarray(belief_logits, dtype=float))
    if z.shape[0] == 0:
        raise ShapeError("empty batch")
    if z.shape[1] != len(fam):
        raise ShapeError(f"{z.shape[1]} logits for {len(fam)} focal sets")
    t = bce_targets(true_labels, fam)
    if t.shape[0] != z.shape[0]:
        raise ShapeError("labels not aligned with logit rows")
    p = np.clip(sigmoid(z), BCE_EPS, 1.0 - BCE_EPS)
    return float(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).mean())


def focal_bce_grad(belief_logits, true_labels, fam: FocalFamily) -> np.ndarray:
    """d(focal_bce)/d(logit) = (sigmoid(logit) - target) / (N * |family|)."""
    z = np.atleast_2d(np.asarray(belief_logits, dtype=float))
    t = bce_targets(true_labels, fam)
    return (sigmoid(z) - t) / (z.shape[0] * len(fam))


# ---------------------------------------------------------------------------
# Focal-family file: header "level=<fine|coarse> size=<n>", then one focal
# set per line as sorted space-separated label indices.
# ---------------------------------------------------------------------------


def load_family(path, require_singletons: bool = True) -> FocalFamily:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = [
        (i + 1, ln.strip()) for i, ln in enumerate(lines)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not body:
        raise FormatError(f"{path}: empty family file")
    lineno, header = body[0]
    parts = dict(
        kv.split("=", 1) for kv in header.split() if "=" in kv
    )
    if set(parts) != {"level", "size"}:
        raise FormatError(f"{path}:{lineno}: header must be 'level=... size=...'")
    try:
        size = int(parts["size"])
    except ValueError:
        raise FormatError(f"{path}:{lineno}: non-integer size")
    space = LabelSpace(parts["level"], size)

    sets = []
    for lineno, line in body[1:]:
        try:
            indices = [int(tok) for tok in line.split()]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-integer label index")
        if indices != sorted(indices):
            raise FormatError(f"{path}:{lineno}: indices must be sorted")
        if len(set(indices)) != len(indices):
            raise FormatError(f"{path}:{lineno}: repeated index in set")
        try:
            sets.append(FocalSet.from_indices(indices, size))
        except InvalidLabelError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}")
    try:
        fam = FocalFamily.build(space, sets)
    except ShapeError as exc:
        raise FormatError(f"{path}: {exc}")
    if require_singletons:
        gaps = fam.missing_singletons()
        if gaps:
            raise FormatError(f"{path}: missing singletons {gaps}")
    return fam


def save_family(fam: FocalFamily, path) -> None:
    lines = [f"level={fam.space.level} size={fam.space.size}"]
    lines += [" ".join(str(i) for i in s.members) for s in fam.sets]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
