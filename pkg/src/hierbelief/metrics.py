"""Evaluation suite over decoded predictions and pignistic rows.

Conventions (also emitted in the text report header):
  * ECE uses equal-width binning of the max probability; a confidence c
    falls in bin min(floor(c * bins), bins - 1). Empty bins contribute 0.
  * Entropy is reported in nats.
  * The set-valued prediction behind the coverage metrics is the focal set
    with the largest mass, or the ignorance set when the leftover ignorance
    mass strictly exceeds every set mass. "incl" counts ignorance as
    covering; "excl" restricts to samples not predicting ignorance (0 with
    a flag when there are none).
  * Macro precision/recall/F1 average over the classes present in the true
    labels; empty-denominator classes contribute 0.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .belief import FocalFamily
from .decoding import DecodedSample
from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    InvalidLabelError,
    ShapeError,
)
from .hierarchy import Hierarchy, LabelSpace

DISTRIBUTION_TOL = 1e-6


def _check_rows(probs) -> np.ndarray:
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    if p.size == 0:
        raise EmptyInputError("no probability rows")
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > DISTRIBUTION_TOL):
        raise DomainError("rows must be probability distributions")
    return p


def ece(probs, true_labels, bins: int = 15) -> float:
    """Expected calibration error of the max-probability prediction."""
    if bins < 1:
        raise ConfigError(f"need bins >= 1, got {bins}")
    p = _check_rows(probs)
    y = np.asarray(true_labels)
    if y.shape != (p.shape[0],):
        raise ShapeError("labels not aligned with probability rows")
    conf = p.max(axis=1)
    correct = p.argmax(axis=1) == y
    idx = np.minimum((conf * bins).astype(int), bins - 1)
    total = 0.0
    for b in range(bins):
        sel = idx == b
        if sel.any():
            gap = abs(correct[sel].mean() - conf[sel].mean())
            total += sel.sum() / p.shape[0] * gap
    return float(total)


def mean_entropy(probs) -> float:
    """Mean Shannon entropy of the rows, in nats, with 0 log 0 = 0."""
    p = _check_rows(probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    return float(terms.sum(axis=1).mean())


def logical_consistency(decoded: Sequence[DecodedSample], h: Hierarchy) -> float:
    """Fraction of samples whose coarse prediction is the fine one's parent."""
    if not decoded:
        raise EmptyInputError("no decoded samples")
    agree = [h.parent_of(d.fine_pred) == d.coarse_pred for d in decoded]
    return float(np.mean(agree))


def macro_prf(preds, truths, space: LabelSpace) -> tuple[float, float, float]:
    """Macro precision, recall, and F1 over classes present in ``truths``."""
    yp = np.asarray(preds)
    yt = np.asarray(truths)
    if yp.shape != yt.shape or yp.ndim != 1:
        raise ShapeError("predictions and truths must be equal-length vectors")
    if yp.size == 0:
        raise EmptyInputError("no predictions")
    both = np.concatenate([yp, yt])
    if both.min() < 0 or both.max() >= space.size:
        raise InvalidLabelError("label outside the label space")

    ps, rs, f1s = [], [], []
    for c in np.unique(yt):
        tp = int(np.sum((yp == c) & (yt == c)))
        fp = int(np.sum((yp == c) & (yt != c)))
        fn = int(np.sum((yp != c) & (yt == c)))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        ps.append(p)
        rs.append(r)
        f1s.append(f1)
    return float(np.mean(ps)), float(np.mean(rs)), float(np.mean(f1s))


@dataclass(frozen=True)
class CoverageStats:
    cov_excl: float
    cov_incl: float
    omega_rate: float
    mean_omega_mass: float
    excl_undefined: bool  # true when every sample predicted ignorance


def coverage_and_omega(
    mass_rows, omega_masses, true_labels, fam: FocalFamily
) -> CoverageStats:
    """Set-valued coverage and ignorance statistics; see module conventions."""
    m = np.atleast_2d(np.asarray(mass_rows, dtype=float))
    omega = np.asarray(omega_masses, dtype=float)
    y = np.asarray(true_labels)
    if m.shape[1] != len(fam):
        raise ShapeError(f"{m.shape[1]} mass columns for {len(fam)} focal sets")
    if omega.shape != (m.shape[0],) or y.shape != (m.shape[0],):
        raise ShapeError("omega masses / labels not aligned with mass rows")

    best = m.argmax(axis=1)
    best_mass = m[np.arange(m.shape[0]), best]
    predicts_omega = omega > best_mass
    contains = fam.incidence[y, best].astype(bool)  # truth in argmax set

    covered_incl = np.where(predicts_omega, True, contains)
    cov_incl = float(covered_incl.mean())
    omega_rate = float(predicts_omega.mean())
    non_omega = ~predicts_omega
    if non_omega.any():
        cov_excl = float(contains[non_omega].mean())
        undefined = False
    else:
        cov_excl = 0.0
        undefined = True
    return CoverageStats(cov_excl, cov_incl, omega_rate, float(omega.mean()), undefined)


@dataclass(frozen=True)
class MetricsReport:
    """Every evaluation quantity for one prediction set."""

    acc_f: float
    acc_c: float
    betp_acc_f: float
    betp_acc_c: float
    ece_f: float
    ece_c: float
    entropy_f: float
    entropy_c: float
    logical_consistency: float
    prf_f: tuple[float, float, float]
    prf_c: tuple[float, float, float]
    coverage_excl_f: float
    coverage_excl_c: float
    coverage_incl_f: float
    coverage_incl_c: float
    omega_rate_f: float
    omega_rate_c: float
    omega_mass_f: float
    omega_mass_c: float

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def build_report(
    decoded: Sequence[DecodedSample],
    betp_f, betp_c,
    masses_f, masses_c,
    omega_f, omega_c,
    true_fine, true_coarse,
    h: Hierarchy,
    fam_f: FocalFamily, fam_c: FocalFamily,
    bins: int = 15,
) -> MetricsReport:
    yf = np.asarray(true_fine)
    yc = np.asarray(true_coarse)
    fine_preds = np.array([d.fine_pred for d in decoded])
    coarse_preds = np.array([d.coarse_pred for d in decoded])
    coarse_base = np.array([d.coarse_base for d in decoded])

    cov_f = coverage_and_omega(masses_f, omega_f, yf, fam_f)
    cov_c = coverage_and_omega(masses_c, omega_c, yc, fam_c)

    return MetricsReport(
        acc_f=float((fine_preds == yf).mean()),
        acc_c=float((coarse_preds == yc).mean()),
        betp_acc_f=float((np.asarray(betp_f).argmax(axis=1) == yf).mean()),
        betp_acc_c=float((coarse_base == yc).mean()),
        ece_f=ece(betp_f, yf, bins),
        ece_c=ece(betp_c, yc, bins),
        entropy_f=mean_entropy(betp_f),
        entropy_c=mean_entropy(betp_c),
        logical_consistency=logical_consistency(decoded, h),
        prf_f=macro_prf(fine_preds, yf, h.fine),
        prf_c=macro_prf(coarse_preds, yc, h.coarse),
        coverage_excl_f=cov_f.cov_excl,
        coverage_excl_c=cov_c.cov_excl,
        coverage_incl_f=cov_f.cov_incl,
        coverage_incl_c=cov_c.cov_incl,
        omega_rate_f=cov_f.omega_rate,
        omega_rate_c=cov_c.omega_rate,
        omega_mass_f=cov_f.mean_omega_mass,
        omega_mass_c=cov_c.mean_omega_mass,
    )


REPORT_HEADER = (
    "# Conventions: ECE = equal-width max-prob binning (bin = min(floor(c*bins), bins-1));",
    "# entropy in nats; coverage counts truth membership in the argmax-mass focal set,",
    "# ignorance predicted when leftover mass exceeds every set mass (incl counts it as",
    "# covering, excl drops those samples); omega mass is the per-sample mean remainder;",
    "# macro PRF averages classes present in the true labels.",
)


def report_table(report: MetricsReport, bins: int = 15) -> str:
    """Aligned plain-text table, one metric group per row."""
    r = report
    rows = [
        ("Acc (f/c)", f"{r.acc_f:.4f} / {r.acc_c:.4f}"),
        ("BetP Acc (f/c)", f"{r.betp_acc_f:.4f} / {r.betp_acc_c:.4f}"),
        ("Log. Cons.", f"{r.logical_consistency:.4f}"),
        ("PRF fine (P/R/F1)", "/".join(f"{v:.4f}" for v in r.prf_f)),
        ("PRF coarse (P/R/F1)", "/".join(f"{v:.4f}" for v in r.prf_c)),
        ("ECE (f/c)", f"{r.ece_f:.4f} / {r.ece_c:.4f}"),
        ("Entropy (f/c)", f"{r.entropy_f:.4f} / {r.entropy_c:.4f}"),
        ("Coverage excl Omega (f/c)", f"{r.coverage_excl_f:.4f} / {r.coverage_excl_c:.4f}"),
        ("Coverage incl Omega (f/c)", f"{r.coverage_incl_f:.4f} / {r.coverage_incl_c:.4f}"),
        ("Omega rate (f/c)", f"{r.omega_rate_f:.4f} / {r.omega_rate_c:.4f}"),
        ("Omega mass (f/c)", f"{r.omega_mass_f:.6f} / {r.omega_mass_c:.6f}"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = list(REPORT_HEADER)
    lines.append(f"# ece bins: {bins}")
    lines += [f"{name.ljust(width)}  {value}" for name, value in rows]
    return "\n".join(lines) + "\n"
