"""Post-hoc constrained coarse prediction from pignistic rows.

The fine prediction is always the pignistic argmax. The coarse argmax is
overridden by the fine prediction's parent exactly when the fine side is
confident (max fine probability >= tau_f) while the coarse side gives that
parent insufficient probability (< tau_c). Applied per sample, evaluation
time only. Argmax ties break to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .hierarchy import Hierarchy

DISTRIBUTION_TOL = 1e-6


@dataclass(frozen=True)
class DecodeConfig:
    tau_f: float = 0.5
    tau_c: float = 0.5

    def __post_init__(self):
        for name, tau in (("tau_f", self.tau_f), ("tau_c", self.tau_c)):
            if not 0.0 < tau < 1.0:
                raise ConfigError(f"{name} must lie in (0,1), got {tau}")


@dataclass(frozen=True)
class DecodedSample:
    fine_pred: int
    fine_conf: float
    coarse_base: int
    coarse_pred: int
    overridden: bool


def _check_distribution(p, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError(f"{what} must be a nonempty vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > DISTRIBUTION_TOL:
        raise DomainError(f"{what} is not a probability distribution")
    return p


def decode(betp_f, betp_c, h: Hierarchy, cfg: DecodeConfig) -> DecodedSample:
    pf = _check_distribution(betp_f, "fine pignistic row")
    pc = _check_distribution(betp_c, "coarse pignistic row")

    fine_pred = int(pf.argmax())  # argmax takes the lowest index on ties
    q_f = float(pf[fine_pred])
    parent = h.parent_of(fine_pred)
    q_c = float(pc[parent])
    coarse_base = int(pc.argmax())

    overridden = q_f >= cfg.tau_f and q_c < cfg.tau_c
    coarse_pred = parent if overridden else coarse_base
    return DecodedSample(fine_pred, q_f, coarse_base, coarse_pred, overridden)


def decode_batch(betp_f_rows, betp_c_rows, h: Hierarchy, cfg: DecodeConfig) -> list[DecodedSample]:
    pf = np.asarray(betp_f_rows, dtype=float)
    pc = np.asarray(betp_c_rows, dtype=float)
    if pf.size == 0 and pc.size == 0:
        return []
    pf, pc = np.atleast_2d(pf), np.atleast_2d(pc)
    if pf.shape[0] != pc.shape[0]:
        raise DomainError("fine and coarse batches differ in length")
    return [decode(pf[i], pc[i], h, cfg) for i in range(pf.shape[0])]


THRESHOLD_GRID = (0.4, 0.5, 0.6)


def threshold_grid() -> list[DecodeConfig]:
    """The 3x3 sensitivity grid, tau_f outer ascending, tau_c inner ascending."""
    return [
        DecodeConfig(tf, tc) for tf in THRESHOLD_GRID for tc in THRESHOLD_GRID
    ]
