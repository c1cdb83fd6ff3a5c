"""Built-in flower/tree walkthrough used as the numeric reference fixture.

A four-label fine space (rose, tulip, maple, trout) sits under three coarse
labels (flower, tree, fish). The fine family holds {rose} and {rose, tulip},
the coarse family {flower} and {flower, tree}; both fine sets project onto
{flower}, so every pair is feasible with full partial inclusion. With the
product t-norm, a unit-sigma gaussian membership, specificity exponents of 1
and unnormalized weights, the four pair scores and their plain average (all
kappa equal 1, so the denominator is 4) are fully determined by the masses
m_f = (0.6, 0.2) and m_c = (0.7, 0.1).

The expected values below are the worked products of the reference
memberships rounded to three decimals (0.956 and 0.667); computing the
memberships at full precision moves each score by less than 1e-5, which the
stated tolerances absorb. `check()` verifies the implementation end to end
and is wired into the CLI `explain` command's exit code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import FocalFamily, FocalSet
from .consistency import ConsistencyConfig, ConsistencyTables, build_tables, cons_score
from .fuzzy import MembershipFn, membership, tnorm
from .hierarchy import Hierarchy, LabelSpace

SCORE_TOL = 5e-5
MEMBERSHIP_TOL = 5e-4
CONS_TOL = 1e-4

EXPECTED_MEMBERSHIPS = (0.956, 0.667)
# worked products: (w_f * w_c * kappa * m_f * mu) with mu as displayed above
EXPECTED_SCORES = (
    1.0 * 1.0 * 1.0 * (0.6 * 0.956),
    1.0 * 0.5 * 1.0 * (0.6 * 0.667),
    0.5 * 1.0 * 1.0 * (0.2 * 0.956),
    0.5 * 0.5 * 1.0 * (0.2 * 0.667),
)
EXPECTED_CONS = 0.225675


def fixture_hierarchy() -> Hierarchy:
    return Hierarchy(
        LabelSpace("fine", 4, ("rose", "tulip", "maple", "trout")),
        LabelSpace("coarse", 3, ("flower", "tree", "fish")),
        (0, 0, 1, 2),
    )


def fixture_families(h: Hierarchy) -> tuple[FocalFamily, FocalFamily]:
    # Deliberately singleton-incomplete: only the four sets of the walkthrough.
    of = FocalFamily.build(
        h.fine,
        [FocalSet.from_indices([0], 4), FocalSet.from_indices([0, 1], 4)],
    )
    oc = FocalFamily.build(
        h.coarse,
        [FocalSet.from_indices([0], 3), FocalSet.from_indices([0, 1], 3)],
    )
    return of, oc


def fixture_config() -> ConsistencyConfig:
    return ConsistencyConfig(
        tnorm="product",
        membership=MembershipFn("gaussian", sigma=1.0),
        tau_f=1.0,
        tau_c=1.0,
        normalize_weights=False,
    )


FIXTURE_MF = np.array([0.6, 0.2])
FIXTURE_MC = np.array([0.7, 0.1])


@dataclass(frozen=True)
class Trace:
    """Every intermediate quantity of the walkthrough, for printing/tests."""

    hierarchy: Hierarchy
    of: FocalFamily
    oc: FocalFamily
    cfg: ConsistencyConfig
    tables: ConsistencyTables
    mf: np.ndarray
    mc: np.ndarray
    memberships: np.ndarray
    tnorm_values: np.ndarray
    scores: np.ndarray
    cons: float
    loss: float


def run() -> Trace:
    h = fixture_hierarchy()
    of, oc = fixture_families(h)
    cfg = fixture_config()
    tables = build_tables(of, oc, h, cfg)
    mu = membership(cfg.membership, FIXTURE_MC)
    t = tnorm(cfg.tnorm, FIXTURE_MF[:, None], mu[None, :])
    scores = np.outer(tables.w_f, tables.w_c) * tables.kappa * tables.feasibility * t
    cons = cons_score(FIXTURE_MF, FIXTURE_MC, tables, cfg)
    return Trace(
        h, of, oc, cfg, tables, FIXTURE_MF, FIXTURE_MC,
        mu, t, scores, cons, 1.0 - cons,
    )


def check(trace: Trace | None = None) -> list[str]:
    """Deviations from the reference values; empty list means the replay holds."""
    tr = trace if trace is not None else run()
    problems = []
    for got, want in zip(tr.memberships, EXPECTED_MEMBERSHIPS):
        if abs(got - want) > MEMBERSHIP_TOL:
            problems.append(f"membership {got:.6f} != {want} (tol {MEMBERSHIP_TOL})")
    flat = tr.scores.ravel()  # (A,B), (A,B'), (A',B), (A',B')
    for got, want in zip(flat, EXPECTED_SCORES):
        if abs(got - want) > SCORE_TOL:
            problems.append(f"pair score {got:.6f} != {want:.6f} (tol {SCORE_TOL})")
    if abs(tr.cons - EXPECTED_CONS) > CONS_TOL:
        problems.append(f"consistency {tr.cons:.6f} != {EXPECTED_CONS} (tol {CONS_TOL})")
    return problems
