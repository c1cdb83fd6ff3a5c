"""Data-driven focal-set budgets from labeled embeddings.

Clusters of the embedding space propose candidate focal sets: every label
that accounts for at least ``min_label_frequency`` of a cluster's points
joins that cluster's set. Overlapping classes therefore yield multi-label
sets where the data is genuinely ambiguous. Singletons are always included;
near-ignorance sets above ``max_cardinality`` are discarded (singletons
already cover those regions). The coarse family is the projection of the
fine one with coarse singletons force-included.

Everything is deterministic given the seed: k-means++ seeding, Lloyd
iteration order, and the canonical family ordering are all fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .belief import FocalFamily, canonical_order
from .errors import ConfigError, FormatError, InvalidLabelError, ShapeError
from .hierarchy import FocalSet, Hierarchy, LabelSpace, project_set


@dataclass(frozen=True)
class BudgetConfig:
    k: int = 8
    max_cardinality: Optional[int] = None  # None -> ceil(space.size / 4), min 2
    min_label_frequency: float = 0.05
    seed: int = 42
    max_iterations: int = 100

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"need k >= 1 clusters, got {self.k}")
        if not 0.0 <= self.min_label_frequency <= 1.0:
            raise ConfigError("min_label_frequency must be in [0,1]")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")

    def cardinality_cap(self, space_size: int) -> int:
        cap = self.max_cardinality
        if cap is None:
            cap = max(2, math.ceil(space_size / 4))
        if cap < 2:
            raise ConfigError(f"max_cardinality must be >= 2, got {cap}")
        if cap >= space_size:
            raise ConfigError(
                f"max_cardinality {cap} must be below the space size {space_size}"
            )
        return cap


def kmeans(
    points, k: int, seed: int, max_iterations: int = 100, n_init: int = 10
) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; returns per-point assignments.

    Runs ``n_init`` deterministic restarts and keeps the lowest within-cluster
    sum of squares (first wins ties). Empty clusters are re-seeded to the
    point farthest from its own centroid, so exactly k clusters survive.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ShapeError("points must be a 2-D array")
    n = x.shape[0]
    if n < k:
        raise ConfigError(f"{n} points cannot form {k} clusters")

    rng = np.random.default_rng(seed)
    best_assign, best_inertia = None, np.inf
    for _ in range(max(1, n_init)):
        assign, inertia = _lloyd(x, k, rng, max_iterations)
        if inertia < best_inertia:
            best_assign, best_inertia = assign, inertia
    return best_assign


def _lloyd(x, k, rng, max_iterations):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:  # all remaining points coincide with a chosen center
            idx = int(rng.integers(n))
        centers[c] = x[idx]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))

    assignments = np.full(n, -1)
    for _ in range(max_iterations):
        dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = dist.argmin(axis=1)
        assigned_d = dist[np.arange(n), new_assign]
        for c in range(k):
            if not np.any(new_assign == c):  # re-seed to the farthest point
                farthest = int(assigned_d.argmax())
                new_assign[farthest] = c
                assigned_d[farthest] = -1.0
        for c in range(k):
            sel = new_assign == c
            if sel.any():
                centers[c] = x[sel].mean(axis=0)
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
    dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(dist[np.arange(n), assignments].sum())
    return assignments, inertia


def induce_family(
    assignments, labels, space: LabelSpace, cfg: BudgetConfig
) -> FocalFamily:
    """Focal family from cluster label profiles, plus all singletons."""
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    if assignments.shape != labels.shape:
        raise ShapeError("assignments and labels differ in length")
    if labels.size and (labels.min() < 0 or labels.max() >= space.size):
        raise InvalidLabelError("label outside the label space")

    cap = cfg.cardinality_cap(space.size)
    masks = {1 << y for y in range(space.size)}
    for c in np.unique(assignments):
        cluster_labels = labels[assignments == c]
        counts = np.bincount(cluster_labels, minlength=space.size)
        frac = counts / cluster_labels.size
        members = np.flatnonzero(
            (frac >= cfg.min_label_frequency) & (counts > 0)
        )
        if 2 <= members.size <= cap:
            mask = 0
            for y in members:
                mask |= 1 << int(y)
            masks.add(mask)
    sets = canonical_order([FocalSet(m, space.size) for m in masks])
    return FocalFamily.build(space, sets)


def project_family(of: FocalFamily, h: Hierarchy) -> FocalFamily:
    """Coarse family: projections of all fine sets, deduplicated, with every
    coarse singleton force-included, in the same canonical order."""
    if of.space.size != h.fine.size:
        raise ShapeError("fine family does not match hierarchy")
    masks = {project_set(s, h).mask for s in of.sets}
    masks.update(1 << c for c in range(h.coarse.size))
    space = LabelSpace("coarse", h.coarse.size, h.coarse.names)
    sets = canonical_order([FocalSet(m, h.coarse.size) for m in masks])
    return FocalFamily.build(space, sets)


# ---------------------------------------------------------------------------
# Embeddings file: header "n=<points> d=<dim>", then one row per point:
# label_index followed by d decimal coordinates, space-separated.
# ---------------------------------------------------------------------------


def load_embeddings(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (features, labels) from an embeddings file."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = [
        (i + 1, ln.strip()) for i, ln in enumerate(lines)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not body:
        raise FormatError(f"{path}: empty embeddings file")
    lineno, header = body[0]
    parts = dict(kv.split("=", 1) for kv in header.split() if "=" in kv)
    if set(parts) != {"n", "d"}:
        raise FormatError(f"{path}:{lineno}: header must be 'n=... d=...'")
    try:
        n, d = int(parts["n"]), int(parts["d"])
    except ValueError:
        raise FormatError(f"{path}:{lineno}: non-integer header value")
    if len(body) - 1 != n:
        raise FormatError(f"{path}: header says n={n}, found {len(body) - 1} rows")

    labels = np.empty(n, dtype=int)
    feats = np.empty((n, d))
    for row, (lineno, line) in enumerate(body[1:]):
        tokens = line.split()
        if len(tokens) != d + 1:
            raise FormatError(f"{path}:{lineno}: expected {d + 1} fields")
        try:
            labels[row] = int(tokens[0])
            feats[row] = [float(t) for t in tokens[1:]]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed number")
    return feats, labels


def save_embeddings(features, labels, path) -> None:
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ShapeError("features must be (n, d) with one label per row")
    lines = [f"n={x.shape[0]} d={x.shape[1]}"]
    for row in range(x.shape[0]):
        coords = " ".join(repr(float(v)) for v in x[row])
        lines.append(f"{int(y[row])} {coords}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
