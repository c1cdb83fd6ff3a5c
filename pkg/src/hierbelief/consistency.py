"""The fine-to-coarse consistency objective and the full training loss.

A fine focal set A and a coarse focal set B interact only when the coarse
projection of A overlaps B (feasibility). The degree of overlap is the
partial-inclusion ratio |proj(A) & B| / max(1, |proj(A)|). Each pair is
scored by specificity weights, that ratio, and a t-norm conjunction of the
fine mass with the fuzzified coarse mass:

    s(A, B) = w_f(A) * w_c(B) * kappa(A, B) * T(m_f(A), mu(m_c(B)))

The per-sample consistency score is the feasibility-masked sum of s divided
by the feasibility-masked sum of kappa, giving proportionate agreement in
[0, 1]; the batch loss is the mean of (1 - score). The ignorance set (a
member equal to the whole space) can be excluded from both sums so that
honest "don't know" mass is not penalized.

All of the structure (feasibility, kappa, weights, exclusion flags, the
constant denominator) is precomputed once per family pair into
ConsistencyTables; the per-batch work is dense elementwise algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fuzzy
from .belief import FocalFamily
from .errors import ConfigError, ShapeError
from .fuzzy import MembershipFn
from .hierarchy import Hierarchy, project_set

# Incremented whenever a score is requested from tables with no feasible
# pairs; such samples contribute the maximum loss instead of passing silently.
degenerate_evaluations = 0


@dataclass(frozen=True)
class ConsistencyConfig:
    """Knobs of the consistency term.

    tau_f / tau_c are the specificity exponents: a set of cardinality k
    weighs (1/k)^tau. normalize_weights rescales each level's weights to
    mean 1 over the retained sets. exclude_omega drops whole-space sets
    from both sums.
    """

    tnorm: str = "product"
    membership: MembershipFn = field(default_factory=MembershipFn)
    tau_f: float = 0.5
    tau_c: float = 0.5
    normalize_weights: bool = True
    exclude_omega: bool = True

    def __post_init__(self):
        if self.tnorm not in fuzzy.TNORM_KINDS:
            raise ConfigError(f"unknown t-norm {self.tnorm!r}")
        if not (np.isfinite(self.tau_f) and np.isfinite(self.tau_c)):
            raise ConfigError("specificity exponents must be finite")
        if self.tau_f < 0 or self.tau_c < 0:
            raise ConfigError("specificity exponents must be >= 0")


@dataclass(frozen=True)
class ConsistencyTables:
    """Precomputed pair structure for one (fine family, coarse family) pair.

    feasibility and kappa are |O_f| x |O_c|; keep_f / keep_c mark sets that
    participate (false only for excluded whole-space sets). denominator is
    the constant sum of feasibility-masked kappa over retained pairs.
    """

    feasibility: np.ndarray
    kappa: np.ndarray
    w_f: np.ndarray
    w_c: np.ndarray
    keep_f: np.ndarray
    keep_c: np.ndarray
    denominator: float

    @property
    def pair_mask(self) -> np.ndarray:
        return self.feasibility * np.outer(self.keep_f, self.keep_c)

    @property
    def pair_weight(self) -> np.ndarray:
        """w_f(A) * w_c(B) * kappa(A,B) masked to retained feasible pairs."""
        return np.outer(self.w_f, self.w_c) * self.kappa * self.pair_mask


def build_tables(
    of: FocalFamily, oc: FocalFamily, h: Hierarchy, cfg: ConsistencyConfig
) -> ConsistencyTables:
    """Feasibility, partial inclusion, and specificity weights for a family pair."""
    if of.space.size != h.fine.size:
        raise ShapeError("fine family does not match hierarchy")
    if oc.space.size != h.coarse.size:
        raise ShapeError("coarse family does not match hierarchy")

    projections = [project_set(a, h) for a in of.sets]
    feas = np.zeros((len(of), len(oc)))
    kappa = np.zeros((len(of), len(oc)))
    for i, p in enumerate(projections):
        for j, b in enumerate(oc.sets):
            overlap = bin(p.mask & b.mask).count("1")
            feas[i, j] = 1.0 if overlap else 0.0
            kappa[i, j] = overlap / max(1, len(p))

    w_f = (1.0 / of.cardinalities) ** cfg.tau_f
    w_c = (1.0 / oc.cardinalities) ** cfg.tau_c

    if cfg.exclude_omega:
        keep_f = np.array([not s.is_full for s in of.sets], dtype=float)
        keep_c = np.array([not s.is_full for s in oc.sets], dtype=float)
    else:
        keep_f = np.ones(len(of))
        keep_c = np.ones(len(oc))

    if cfg.normalize_weights:
        for w, keep in ((w_f, keep_f), (w_c, keep_c)):
            retained = keep > 0
            if retained.any():
                w[retained] /= w[retained].mean()

    denominator = float((feas * kappa * np.outer(keep_f, keep_c)).sum())
    return ConsistencyTables(feas, kappa, w_f, w_c, keep_f, keep_c, denominator)


def pair_score(
    mf_a: float, mc_b: float, w_f: float, w_c: float, kappa: float,
    cfg: ConsistencyConfig,
) -> float:
    """Score of one fine-coarse pair; masses are clamped to [0,1] first."""
    mf_a = min(max(float(mf_a), 0.0), 1.0)
    mc_b = min(max(float(mc_b), 0.0), 1.0)
    mu = fuzzy.membership(cfg.membership, mc_b)
    return w_f * w_c * kappa * fuzzy.tnorm(cfg.tnorm, mf_a, mu)


def cons_score(mf, mc, tables: ConsistencyTables, cfg: ConsistencyConfig) -> float:
    """Proportionate agreement in [0,1]; 0 when no pair is feasible."""
    global degenerate_evaluations
    if tables.denominator == 0.0:
        degenerate_evaluations += 1
        return 0.0
    mf = np.clip(np.asarray(mf, dtype=float), 0.0, 1.0)
    mc = np.clip(np.asarray(mc, dtype=float), 0.0, 1.0)
    mu = fuzzy.membership(cfg.membership, mc)
    t = fuzzy.tnorm(cfg.tnorm, mf[:, None], mu[None, :])
    return float((tables.pair_weight * t).sum() / tables.denominator)


def consistency_loss(
    batch_mf, batch_mc, tables: ConsistencyTables, cfg: ConsistencyConfig
) -> float:
    """Mean over the batch of (1 - consistency score)."""
    mf = np.atleast_2d(np.asarray(batch_mf, dtype=float))
    mc = np.atleast_2d(np.asarray(batch_mc, dtype=float))
    if mf.shape[0] != mc.shape[0]:
        raise ShapeError("fine and coarse mass batches differ in length")
    scores = [cons_score(mf[i], mc[i], tables, cfg) for i in range(mf.shape[0])]
    return float(np.mean([1.0 - s for s in scores]))


def consistency_grads(
    batch_mf, batch_mc, tables: ConsistencyTables, cfg: ConsistencyConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of :func:`consistency_loss` wrt both mass batches.

    Straight-through convention: the gradient passes unchanged while a mass
    lies inside [0,1] (boundary included) and is zero once the clamp is
    active, matching the t-norm and membership subgradient choices.
    """
    mf = np.atleast_2d(np.asarray(batch_mf, dtype=float))
    mc = np.atleast_2d(np.asarray(batch_mc, dtype=float))
    n = mf.shape[0]
    gf = np.zeros_like(mf)
    gc = np.zeros_like(mc)
    if tables.denominator == 0.0:
        return gf, gc

    weight = tables.pair_weight
    scale = -1.0 / (n * tables.denominator)
    for i in range(n):
        inside_f = (mf[i] >= 0.0) & (mf[i] <= 1.0)
        inside_c = (mc[i] >= 0.0) & (mc[i] <= 1.0)
        cf = np.clip(mf[i], 0.0, 1.0)
        cc = np.clip(mc[i], 0.0, 1.0)
        mu = fuzzy.membership(cfg.membership, cc)
        dmu = fuzzy.membership_grad(cfg.membership, cc)
        dta, dtb = fuzzy.tnorm_grads(cfg.tnorm, cf[:, None], mu[None, :])
        gf[i] = scale * (weight * dta).sum(axis=1) * inside_f
        gc[i] = scale * (weight * dtb).sum(axis=0) * dmu * inside_c
    return gf, gc


@dataclass
class LossWeights:
    """Log-parametrized coefficients of the three auxiliary terms; the
    effective weights exp(log_*) stay positive however these are trained."""

    log_alpha: float = 0.0
    log_beta: float = 0.0
    log_gamma: float = 0.0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    @property
    def beta(self) -> float:
        return float(np.exp(self.log_beta))

    @property
    def gamma(self) -> float:
        return float(np.exp(self.log_gamma))


@dataclass(frozen=True)
class LossComponents:
    """Per-batch values of every addend, computed on the same batch."""

    bce_f: float
    bce_c: float
    r_mass_f: float
    r_mass_c: float
    r_sum_f: float
    r_sum_c: float
    l_cons: float


@dataclass(frozen=True)
class LossBreakdown:
    """Total plus the logged addends and effective weights for one batch."""

    total: float
    bce_f: float
    bce_c: float
    r_mass: float
    r_sum: float
    l_cons: float
    alpha: float
    beta: float
    gamma: float

    def as_dict(self) -> dict:
        return {
            "total": self.total, "bce_f": self.bce_f, "bce_c": self.bce_c,
            "r_mass": self.r_mass, "r_sum": self.r_sum, "l_cons": self.l_cons,
            "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
        }


def total_loss(
    components: LossComponents, weights: LossWeights, warmup: bool = False
) -> LossBreakdown:
    """Combine the addends; during warm-up only the two BCE terms count."""
    c = components
    bce = c.bce_f + c.bce_c
    r_mass = c.r_mass_f + c.r_mass_c
    r_sum = c.r_sum_f + c.r_sum_c
    if warmup:
        total = bce
    else:
        total = (
            bce
            + weights.alpha * r_mass
            + weights.beta * r_sum
            + weights.gamma * c.l_cons
        )
    return LossBreakdown(
        total, c.bce_f, c.bce_c, r_mass, r_sum, c.l_cons,
        weights.alpha, weights.beta, weights.gamma,
    )


def logweight_grads(
    components: LossComponents, weights: LossWeights
) -> tuple[float, float, float]:
    """d(total)/d(log weight) for the post-warm-up objective: since the
    weight enters as exp(log w) * term, each gradient is weight * term."""
    c = components
    return (
        weights.alpha * (c.r_mass_f + c.r_mass_c),
        weights.beta * (c.r_sum_f + c.r_sum_c),
        weights.gamma * c.l_cons,
    )
