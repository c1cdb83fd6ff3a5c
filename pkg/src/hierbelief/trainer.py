"""Desk-scale training of the two linear focal-set heads on fixed embeddings.

The heads are plain affine maps from the embedding to one belief logit per
focal set. The objective is the two focal BCE terms plus the weighted mass
penalties and the consistency term, with the three weights log-parametrized
and trained jointly. Gradients are composed analytically module by module
(the graph is shallow and fixed; the finite-difference suites police it), and
parameters follow Adam with the standard defaults (beta1 0.9, beta2 0.999,
eps 1e-8, per-parameter step counts).

The first ``warmup_epochs`` epochs optimize the BCE terms only and leave the
log-weights untouched. Validation loss is always the full objective at the
current weights so epochs are comparable across the phase switch; the
returned model is the best-validation snapshot. Everything is deterministic
given the seed: the validation split, the shuffles, and all reductions use
fixed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import belief
from .belief import FocalFamily
from .consistency import (
    ConsistencyConfig,
    ConsistencyTables,
    LossComponents,
    LossWeights,
    consistency_grads,
    consistency_loss,
    logweight_grads,
    total_loss,
)
from .errors import ConfigError, FormatError, ShapeError, TrainingDivergedError
from .hierarchy import Hierarchy, contiguous_hierarchy


@dataclass
class HeadModel:
    w_f: np.ndarray
    b_f: np.ndarray
    w_c: np.ndarray
    b_c: np.ndarray
    loss_weights: LossWeights

    @classmethod
    def init(cls, fam_f: FocalFamily, fam_c: FocalFamily, dim: int, seed: int) -> "HeadModel":
        rng = np.random.default_rng(seed)
        return cls(
            w_f=rng.normal(0.0, 0.01, size=(len(fam_f), dim)),
            b_f=np.zeros(len(fam_f)),
            w_c=rng.normal(0.0, 0.01, size=(len(fam_c), dim)),
            b_c=np.zeros(len(fam_c)),
            loss_weights=LossWeights(),
        )

    def copy(self) -> "HeadModel":
        return HeadModel(
            self.w_f.copy(), self.b_f.copy(), self.w_c.copy(), self.b_c.copy(),
            replace(self.loss_weights),
        )


def forward(model: HeadModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Belief logits of both heads for a batch of embeddings."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.w_f.shape[1]:
        raise ShapeError(
            f"embedding width {x.shape[1]} != head width {model.w_f.shape[1]}"
        )
    return x @ model.w_f.T + model.b_f, x @ model.w_c.T + model.b_c


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    warmup_epochs: int = 5
    batch_size: int = 64
    learning_rate: float = 0.05
    seed: int = 42
    early_stop_patience: int = 5
    val_fraction: float = 0.2
    disable_consistency: bool = False  # pin gamma to exactly 0 (ablation)

    def __post_init__(self):
        if self.epochs < 1 or self.warmup_epochs < 0:
            raise ConfigError("epochs must be >= 1 and warmup_epochs >= 0")
        if self.warmup_epochs > self.epochs:
            raise ConfigError(
                f"warmup_epochs {self.warmup_epochs} exceeds epochs {self.epochs}"
            )
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in [0,1)")


class _Adam:
    """First-order adaptive-moment updates, standard defaults, in place."""

    def __init__(self, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.state: dict[str, tuple[np.ndarray, np.ndarray, int]] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        for name, g in grads.items():
            p = params[name]
            m, v, t = self.state.get(name, (np.zeros_like(p), np.zeros_like(p), 0))
            t += 1
            m = self.beta1 * m + (1 - self.beta1) * g
            v = self.beta2 * v + (1 - self.beta2) * g * g
            self.state[name] = (m, v, t)
            mhat = m / (1 - self.beta1**t)
            vhat = v / (1 - self.beta2**t)
            p -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def batch_components(
    model: HeadModel, x, y_fine, y_coarse,
    fam_f: FocalFamily, fam_c: FocalFamily,
    tables: ConsistencyTables, cons_cfg: ConsistencyConfig,
) -> LossComponents:
    """All loss addends for one batch (no gradients)."""
    logits_f, logits_c = forward(model, x)
    m_f = belief.belief_to_mass(belief.sigmoid(logits_f), fam_f)
    m_c = belief.belief_to_mass(belief.sigmoid(logits_c), fam_c)
    return LossComponents(
        bce_f=belief.focal_bce(logits_f, y_fine, fam_f),
        bce_c=belief.focal_bce(logits_c, y_coarse, fam_c),
        r_mass_f=belief.mass_penalty(m_f),
        r_mass_c=belief.mass_penalty(m_c),
        r_sum_f=belief.sum_penalty(m_f),
        r_sum_c=belief.sum_penalty(m_c),
        l_cons=consistency_loss(m_f, m_c, tables, cons_cfg),
    )


def batch_gradients(
    model: HeadModel, x, y_fine, y_coarse,
    fam_f: FocalFamily, fam_c: FocalFamily,
    tables: ConsistencyTables, cons_cfg: ConsistencyConfig,
    warmup: bool,
) -> tuple[LossComponents, dict[str, np.ndarray]]:
    """Loss addends plus analytic gradients of the phase objective."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    logits_f, logits_c = forward(model, x)
    bel_f, bel_c = belief.sigmoid(logits_f), belief.sigmoid(logits_c)
    m_f = belief.belief_to_mass(bel_f, fam_f)
    m_c = belief.belief_to_mass(bel_c, fam_c)
    w = model.loss_weights

    components = LossComponents(
        bce_f=belief.focal_bce(logits_f, y_fine, fam_f),
        bce_c=belief.focal_bce(logits_c, y_coarse, fam_c),
        r_mass_f=belief.mass_penalty(m_f),
        r_mass_c=belief.mass_penalty(m_c),
        r_sum_f=belief.sum_penalty(m_f),
        r_sum_c=belief.sum_penalty(m_c),
        l_cons=consistency_loss(m_f, m_c, tables, cons_cfg),
    )

    g_logits_f = belief.focal_bce_grad(logits_f, y_fine, fam_f)
    g_logits_c = belief.focal_bce_grad(logits_c, y_coarse, fam_c)
    if not warmup:
        dm_f = w.alpha * belief.mass_penalty_grad(m_f)
        dm_f += w.beta * belief.sum_penalty_grad(m_f)
        dm_c = w.alpha * belief.mass_penalty_grad(m_c)
        dm_c += w.beta * belief.sum_penalty_grad(m_c)
        if w.gamma != 0.0:
            gc_f, gc_c = consistency_grads(m_f, m_c, tables, cons_cfg)
            dm_f += w.gamma * gc_f
            dm_c += w.gamma * gc_c
        # m = bel @ Mob.T, so dL/dbel = dL/dm @ Mob; then the sigmoid chain
        g_logits_f = g_logits_f + (dm_f @ fam_f.mobius_matrix) * bel_f * (1 - bel_f)
        g_logits_c = g_logits_c + (dm_c @ fam_c.mobius_matrix) * bel_c * (1 - bel_c)

    grads = {
        "w_f": g_logits_f.T @ x,
        "b_f": g_logits_f.sum(axis=0),
        "w_c": g_logits_c.T @ x,
        "b_c": g_logits_c.sum(axis=0),
    }
    if not warmup:
        grads["logw"] = np.array(logweight_grads(components, w))
    return components, grads


def train(
    model: HeadModel,
    x, y_fine,
    h: Hierarchy,
    fam_f: FocalFamily, fam_c: FocalFamily,
    tables: ConsistencyTables,
    cons_cfg: ConsistencyConfig,
    cfg: TrainConfig,
) -> tuple[HeadModel, list[dict]]:
    """Mini-batch training; returns the best-validation snapshot and the log.

    ``disable_consistency`` pins gamma to exactly zero (log-gamma is set to
    -inf and receives a zero gradient, so it stays there); the BCE terms and
    mass penalties are unaffected.
    """
    x = np.asarray(x, dtype=float)
    y_fine = np.asarray(y_fine)
    if x.ndim != 2 or x.shape[0] != y_fine.shape[0] or x.shape[0] == 0:
        raise ShapeError("embeddings and labels must align and be nonempty")
    y_coarse = np.array([h.parent_of(int(y)) for y in y_fine])

    if cfg.disable_consistency:
        model.loss_weights.log_gamma = -math.inf

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(x.shape[0])
    n_val = int(round(cfg.val_fraction * x.shape[0]))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if train_idx.size == 0:
        raise ConfigError("validation split leaves no training data")

    opt = _Adam(cfg.learning_rate)
    log: list[dict] = []
    best_val = math.inf
    best_model = model.copy()
    stall = 0

    for epoch in range(cfg.epochs):
        warmup = epoch < cfg.warmup_epochs
        perm = train_idx[rng.permutation(train_idx.size)]
        for b, start in enumerate(range(0, perm.size, cfg.batch_size)):
            sel = perm[start : start + cfg.batch_size]
            comps, grads = batch_gradients(
                model, x[sel], y_fine[sel], y_coarse[sel],
                fam_f, fam_c, tables, cons_cfg, warmup,
            )
            batch_total = total_loss(comps, model.loss_weights, warmup=warmup).total
            if not math.isfinite(batch_total):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} batch {b}"
                )
            params = {
                "w_f": model.w_f, "b_f": model.b_f,
                "w_c": model.w_c, "b_c": model.b_c,
            }
            if "logw" in grads:
                logw = np.array([
                    model.loss_weights.log_alpha,
                    model.loss_weights.log_beta,
                    model.loss_weights.log_gamma,
                ])
                params["logw"] = logw
                opt.step(params, grads)
                model.loss_weights.log_alpha = float(logw[0])
                model.loss_weights.log_beta = float(logw[1])
                model.loss_weights.log_gamma = float(logw[2])
            else:
                opt.step(params, grads)

        train_comps = batch_components(
            model, x[train_idx], y_fine[train_idx], y_coarse[train_idx],
            fam_f, fam_c, tables, cons_cfg,
        )
        breakdown = total_loss(train_comps, model.loss_weights, warmup=warmup)
        if val_idx.size:
            val_comps = batch_components(
                model, x[val_idx], y_fine[val_idx], y_coarse[val_idx],
                fam_f, fam_c, tables, cons_cfg,
            )
            val_total = total_loss(val_comps, model.loss_weights).total
        else:
            val_total = breakdown.total
        if val_total < best_val:
            best_val = val_total
            best_model = model.copy()
            stall = 0
        elif not warmup:
            stall += 1
        entry = {"epoch": epoch, "warmup": warmup}
        entry.update(breakdown.as_dict())
        entry["val_total"] = val_total
        entry["best_val"] = best_val
        log.append(entry)
        if not warmup and stall >= cfg.early_stop_patience:
            break

    return best_model, log


def generate_synthetic(
    n_per_class: int, n_fine: int, n_coarse: int, overlap: float,
    d: int, seed: int,
) -> tuple[np.ndarray, np.ndarray, Hierarchy]:
    """Gaussian-blob embeddings under a contiguous block hierarchy.

    Each coarse label gets a well-separated center; its children sit on
    short offsets around it. ``overlap`` scales two extra noise terms: one
    shared across siblings (drawn in the span of their offsets, which is
    what makes multi-label focal sets emerge in budgeting) and a smaller
    diffuse term that eventually bleeds across coarse groups.
    """
    if n_per_class < 1 or d < 1:
        raise ConfigError("n_per_class and d must be >= 1")
    if n_fine < n_coarse:
        raise ConfigError("need n_fine >= n_coarse")
    if overlap < 0:
        raise ConfigError("overlap must be >= 0")

    h = contiguous_hierarchy(n_fine, n_coarse)
    rng = np.random.default_rng(seed)

    coarse_centers = np.zeros((n_coarse, d))
    for p in range(n_coarse):
        coarse_centers[p, p % d] = 4.0 * (1 + p // d)

    children = [[y for y in range(n_fine) if h.parent[y] == p] for p in range(n_coarse)]

    # deterministic child offsets on coordinate axes: siblings stay 1.5*sqrt(2)
    # apart, so overlap=0 gives cleanly separable blobs
    offsets = np.zeros((n_fine, d))
    for p, kids in enumerate(children):
        for j, y in enumerate(kids):
            step = p + 1 + j
            sign = 1.0 if (step // d) % 2 == 0 else -1.0
            offsets[y, step % d] = 1.5 * sign
    rows, labels = [], []
    for y in range(n_fine):
        p = h.parent[y]
        sib = offsets[children[p]]  # (k_p, d) span of the shared noise
        center = coarse_centers[p] + offsets[y]
        private = 0.35 * rng.normal(size=(n_per_class, d))
        shared = overlap * (rng.normal(size=(n_per_class, len(children[p]))) @ sib)
        shared /= math.sqrt(len(children[p]))
        diffuse = 0.3 * overlap * rng.normal(size=(n_per_class, d))
        rows.append(center + private + shared + diffuse)
        labels.append(np.full(n_per_class, y))
    return np.concatenate(rows), np.concatenate(labels), h


# ---------------------------------------------------------------------------
# Model file: '# shape <name> <dims...>' headers, then 'name index value'
# rows with row-major flat indices.
# ---------------------------------------------------------------------------

_PARAM_NAMES = ("w_f", "b_f", "w_c", "b_c", "log_alpha", "log_beta", "log_gamma")


def save_model(model: HeadModel, path) -> None:
    arrays = {
        "w_f": model.w_f, "b_f": model.b_f, "w_c": model.w_c, "b_c": model.b_c,
        "log_alpha": np.array([model.loss_weights.log_alpha]),
        "log_beta": np.array([model.loss_weights.log_beta]),
        "log_gamma": np.array([model.loss_weights.log_gamma]),
    }
    lines = [
        "# shape {} {}".format(name, " ".join(str(s) for s in arrays[name].shape))
        for name in _PARAM_NAMES
    ]
    for name in _PARAM_NAMES:
        for i, v in enumerate(arrays[name].ravel()):
            lines.append(f"{name} {i} {repr(float(v))}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> HeadModel:
    shapes: dict[str, tuple[int, ...]] = {}
    values: dict[str, dict[int, float]] = {name: {} for name in _PARAM_NAMES}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                tokens = line[1:].split()
                if len(tokens) >= 2 and tokens[0] == "shape":
                    shapes[tokens[1]] = tuple(int(t) for t in tokens[2:])
                continue
            tokens = line.split()
            if len(tokens) != 3 or tokens[0] not in _PARAM_NAMES:
                raise FormatError(f"{path}:{lineno}: expected 'name index value'")
            try:
                values[tokens[0]][int(tokens[1])] = float(tokens[2])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: malformed number")

    arrays = {}
    for name in _PARAM_NAMES:
        if name not in shapes:
            raise FormatError(f"{path}: missing shape header for {name}")
        arr = np.zeros(int(np.prod(shapes[name])) if shapes[name] else 1)
        if len(values[name]) != arr.size:
            raise FormatError(
                f"{path}: {name} has {len(values[name])} entries, expected {arr.size}"
            )
        for i, v in values[name].items():
            if not 0 <= i < arr.size:
                raise FormatError(f"{path}: {name} index {i} out of range")
            arr[i] = v
        arrays[name] = arr.reshape(shapes[name])

    return HeadModel(
        w_f=arrays["w_f"], b_f=arrays["b_f"],
        w_c=arrays["w_c"], b_c=arrays["b_c"],
        loss_weights=LossWeights(
            log_alpha=float(arrays["log_alpha"][0]),
            log_beta=float(arrays["log_beta"][0]),
            log_gamma=float(arrays["log_gamma"][0]),
        ),
    )
