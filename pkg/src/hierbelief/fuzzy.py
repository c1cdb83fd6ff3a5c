"""Membership functions and continuous t-norms.

Memberships turn a coarse mass in [0,1] into a typicality degree; all three
families are nondecreasing with mu(1) = 1. T-norms are the differentiable
conjunction combining fine mass with fuzzified coarse mass. Both come with
exact derivatives so the consistency loss can be backpropagated by hand;
subgradient conventions at kinks are fixed (documented per function) so that
training is deterministic.

All operations accept scalars or numpy arrays and broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

TNORM_KINDS = ("product", "godel", "lukasiewicz")
MEMBERSHIP_FAMILIES = ("gaussian", "triangular", "trapezoidal")


@dataclass(frozen=True)
class MembershipFn:
    """Typicality curve on [0,1].

    gaussian:    exp(-(1-x)^2 / (2 sigma^2))
    triangular:  ramp from foot ``a`` to 1 at x=1
    trapezoidal: ramp from foot ``a`` to shoulder ``b``, plateau at 1 after
    """

    family: str = "gaussian"
    sigma: float = 1.0
    a: float = 0.0
    b: float = 0.5

    def __post_init__(self):
        if self.family not in MEMBERSHIP_FAMILIES:
            raise ConfigError(f"unknown membership family {self.family!r}")
        if self.family == "gaussian" and not self.sigma > 0:
            raise ConfigError(f"gaussian sigma must be > 0, got {self.sigma}")
        if self.family in ("triangular", "trapezoidal") and not 0 <= self.a < 1:
            raise ConfigError(f"foot a must be in [0,1), got {self.a}")
        if self.family == "trapezoidal" and not self.a < self.b <= 1:
            raise ConfigError(
                f"shoulder b must be in (a,1], got a={self.a} b={self.b}"
            )


def _check_unit(x, what: str):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise DomainError(f"{what} must lie in [0,1]")
    return x


def membership(fn: MembershipFn, x):
    """Typicality degree of ``x`` in [0,1] under ``fn``."""
    x = _check_unit(x, "membership argument")
    if fn.family == "gaussian":
        out = np.exp(-((1.0 - x) ** 2) / (2.0 * fn.sigma**2))
    elif fn.family == "triangular":
        out = np.clip((x - fn.a) / (1.0 - fn.a), 0.0, 1.0)
    else:
        out = np.clip((x - fn.a) / (fn.b - fn.a), 0.0, 1.0)
    return out if out.ndim else float(out)


def membership_grad(fn: MembershipFn, x):
    """d(membership)/dx; at ramp kinks the right-hand derivative is used."""
    x = _check_unit(x, "membership argument")
    if fn.family == "gaussian":
        out = np.exp(-((1.0 - x) ** 2) / (2.0 * fn.sigma**2)) * (1.0 - x) / fn.sigma**2
    elif fn.family == "triangular":
        # slope on [a, 1); 0 left of the foot and at the clamped peak
        out = np.where((x >= fn.a) & (x < 1.0), 1.0 / (1.0 - fn.a), 0.0)
    else:
        out = np.where((x >= fn.a) & (x < fn.b), 1.0 / (fn.b - fn.a), 0.0)
    return out if out.ndim else float(out)


def tnorm(kind: str, a, b):
    """Fuzzy conjunction T(a, b) for ``kind`` in product/godel/lukasiewicz."""
    if kind not in TNORM_KINDS:
        raise ConfigError(f"unknown t-norm {kind!r}")
    a = _check_unit(a, "t-norm argument")
    b = _check_unit(b, "t-norm argument")
    if kind == "product":
        out = a * b
    elif kind == "godel":
        out = np.minimum(a, b)
    else:
        out = np.maximum(0.0, a + b - 1.0)
    return out if out.ndim else float(out)


def tnorm_grads(kind: str, a, b):
    """(dT/da, dT/db) with fixed tie conventions.

    godel assigns the gradient to the first argument when a == b;
    lukasiewicz returns (1,1) on a+b-1 >= 0 and (0,0) below it.
    """
    if kind not in TNORM_KINDS:
        raise ConfigError(f"unknown t-norm {kind!r}")
    a = _check_unit(a, "t-norm argument")
    b = _check_unit(b, "t-norm argument")
    if kind == "product":
        ga, gb = b, a
    elif kind == "godel":
        take_a = a <= b
        ga = np.where(take_a, 1.0, 0.0)
        gb = np.where(take_a, 0.0, 1.0)
    else:
        active = a + b - 1.0 >= 0.0
        ga = np.where(active, 1.0, 0.0)
        gb = ga
    if np.ndim(ga) == 0 and np.ndim(gb) == 0:
        return float(ga), float(gb)
    ga, gb = np.broadcast_arrays(ga, gb)
    return np.array(ga, dtype=float), np.array(gb, dtype=float)
