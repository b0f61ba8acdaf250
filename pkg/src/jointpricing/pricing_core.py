"""Stand-alone and joint safety loadings under the mean-standard-deviation
risk measure, for a portfolio made of two business lines.

Notation used throughout:

* ``pi`` and ``sigma`` are the mean and standard deviation of the per-policy
  present value of a line.
* ``psi = zeta * gamma * sigma / pi`` is the stand-alone proportional loading.
* ``b = psi_b / psi_a >= 1`` (line B is the riskier line per unit of pure
  premium), ``lambda1 = 1 + b**2 - 2*b*rho`` and ``lambda2 = 1 - b*rho``.
* ``n`` is the proportion of policies written in line B and
  ``n_tilde = n*pi_b / ((1-n)*pi_a + n*pi_b)`` is its premium-weighted
  counterpart. The joint loading is
  ``psi(n) = psi_a * sqrt(lambda1*n_tilde**2 - 2*lambda2*n_tilde + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, NoRealRoots, ValidationError

# Relative slack used when comparing a caller-supplied loading against the
# closed-form bounds psi_min and psi_b.
_BOUND_RTOL = 1e-12


def _check_finite_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)):
        raise ValidationError(f"{name} must be a finite real number, got {value!r}")
    if value <= 0:
        raise ValidationError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class BusinessLine:
    """Per-policy liability summary of one business line."""

    label: str
    pi: float
    sigma: float

    def __post_init__(self):
        _check_finite_positive("pi", self.pi)
        _check_finite_positive("sigma", self.sigma)
        object.__setattr__(self, "pi", float(self.pi))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def cv(self) -> float:
        """Standard deviation per unit of pure premium."""
        return self.sigma / self.pi

    def scaled(self, factor: float) -> "BusinessLine":
        """Same line with the benefit level multiplied by ``factor``."""
        _check_finite_positive("factor", factor)
        return BusinessLine(self.label, self.pi * factor, self.sigma * factor)


@dataclass(frozen=True)
class RiskSpec:
    """Risk reduction factor ``zeta`` and MSD weight ``gamma``."""

    zeta: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.zeta) and 0.0 < self.zeta < 1.0):
            raise ValidationError(f"zeta must lie in (0, 1), got {self.zeta!r}")
        _check_finite_positive("gamma", self.gamma)

    @property
    def scale(self) -> float:
        return self.zeta * self.gamma


@dataclass(frozen=True)
class LinePair:
    """Two business lines and the correlation of their present values.

    The constructor reorders the lines so that ``line_b`` is the riskier one
    (``sigma/pi`` at least as large as for ``line_a``). ``swapped`` records
    whether that happened, so callers can map results back to their own
    labels.
    """

    line_a: BusinessLine
    line_b: BusinessLine
    rho: float
    swapped: bool = field(default=False, init=False)

    def __post_init__(self):
        rho = float(self.rho)
        if not math.isfinite(rho) or rho < -1.0 or rho >= 1.0:
            raise ValidationError(f"rho must lie in [-1, 1), got {self.rho!r}")
        object.__setattr__(self, "rho", rho)
        if self.line_a.cv > self.line_b.cv:
            a, b = self.line_a, self.line_b
            object.__setattr__(self, "line_a", b)
            object.__setattr__(self, "line_b", a)
            object.__setattr__(self, "swapped", True)

    @property
    def b(self) -> float:
        return (self.line_b.sigma * self.line_a.pi) / (self.line_a.sigma * self.line_b.pi)

    @property
    def b_rho(self) -> float:
        return self.b * self.rho

    @property
    def lambda1(self) -> float:
        b = self.b
        return 1.0 + b * b - 2.0 * b * self.rho

    @property
    def lambda2(self) -> float:
        return 1.0 - self.b * self.rho

    def scaled(self, factor_a: float = 1.0, factor_b: float = 1.0) -> "LinePair":
        """Pair with each line's benefit level rescaled (ordering kept)."""
        return LinePair(self.line_a.scaled(factor_a), self.line_b.scaled(factor_b), self.rho)


@dataclass(frozen=True)
class CompetitivenessReport:
    """Where the joint loading undercuts both stand-alone loadings.

    ``n_ct`` is ``None`` when no competitiveness region exists.
    """

    exists: bool
    n_min: float
    psi_min: float
    psi_a: float
    psi_b: float
    n_ct: Optional[float]

    @property
    def psi_max(self) -> float:
        return self.psi_b


def standalone_loading(line: BusinessLine, risk: RiskSpec) -> float:
    """Loading that reduces the MSD of one line's loss by the factor ``zeta``."""
    return risk.zeta * risk.gamma * line.sigma / line.pi


def loadings(pair: LinePair, risk: RiskSpec) -> tuple[float, float]:
    """Stand-alone loadings ``(psi_a, psi_b)`` of the ordered pair."""
    return standalone_loading(pair.line_a, risk), standalone_loading(pair.line_b, risk)


def premium_weight(pair: LinePair, n):
    """Map the policy proportion ``n`` of line B to its premium share."""
    n = np.asarray(n, dtype=float)
    pa, pb = pair.line_a.pi, pair.line_b.pi
    return n * pb / ((1.0 - n) * pa + n * pb)


def policy_proportion(pair: LinePair, n_tilde):
    """Inverse of :func:`premium_weight`."""
    n_tilde = np.asarray(n_tilde, dtype=float)
    pa, pb = pair.line_a.pi, pair.line_b.pi
    return n_tilde * pa / (n_tilde * pa + (1.0 - n_tilde) * pb)


def _loading_from_weight(psi_a, psi_b, rho, nt):
    # Same quadratic as psi_a**2 * (lambda1*nt**2 - 2*lambda2*nt + 1), written
    # as a portfolio variance so that nt=0 and nt=1 return psi_a, psi_b exactly.
    one_minus = 1.0 - nt
    q = (psi_a * one_minus) ** 2 + (psi_b * nt) ** 2 + 2.0 * rho * psi_a * psi_b * nt * one_minus
    return np.sqrt(np.maximum(q, 0.0))


def joint_loading(pair: LinePair, risk: RiskSpec, n):
    """Required common loading when a proportion ``n`` of policies is in line B.

    Args:
        pair: ordered line pair.
        risk: risk reduction factor and MSD weight.
        n: proportion of line-B policies, scalar or array, in ``[0, 1]``.

    Returns:
        The joint loading, as a float for scalar ``n`` or an array otherwise.

    Raises:
        DomainError: if any ``n`` lies outside ``[0, 1]``.
    """
    arr = np.asarray(n, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"portfolio proportion must lie in [0, 1], got {n!r}")
    psi_a, psi_b = loadings(pair, risk)
    out = _loading_from_weight(psi_a, psi_b, pair.rho, premium_weight(pair, arr))
    if out.ndim == 0:
        return float(out)
    return out


def competitiveness_region(pair: LinePair, risk: RiskSpec) -> CompetitivenessReport:
    """Minimum joint loading and whether it beats the safer stand-alone price.

    A region exists iff ``b*rho < 1``. At ``b*rho >= 1`` the minimum sits at
    ``n = 0`` with value ``psi_a``.
    """
    psi_a, psi_b = loadings(pair, risk)
    if pair.b_rho >= 1.0:
        return CompetitivenessReport(False, 0.0, psi_a, psi_a, psi_b, None)
    b, rho = pair.b, pair.rho
    lam1, lam2 = pair.lambda1, pair.lambda2
    pa, pb = pair.line_a.pi, pair.line_b.pi
    # lambda1 - lambda2 = b*(b - rho) and lambda1 - lambda2**2 = b**2*(1 - rho**2)
    n_min = lam2 * pa / (lam2 * pa + b * (b - rho) * pb)
    psi_min = psi_b * math.sqrt((1.0 - rho) * (1.0 + rho) / lam1)
    return CompetitivenessReport(True, n_min, psi_min, psi_a, psi_b, critical_threshold(pair))


def critical_threshold(pair: LinePair) -> float:
    """Proportion of line B beyond which line A subsidizes line B.

    Returns 1 when both lines are equally risky (``b == 1``).

    Raises:
        ValidationError: if ``b*rho >= 1`` (no competitiveness region).
    """
    if pair.b_rho >= 1.0:
        raise ValidationError(f"no critical threshold: b*rho = {pair.b_rho:.6g} >= 1")
    b = pair.b
    lam2 = pair.lambda2
    pa, pb = pair.line_a.pi, pair.line_b.pi
    # lambda1 - 2*lambda2 = b**2 - 1
    return 2.0 * lam2 * pa / (2.0 * lam2 * pa + (b - 1.0) * (b + 1.0) * pb)


def monitoring_interval(pair: LinePair, risk: RiskSpec, psi_star: float) -> tuple[float, float]:
    """Range of proportions ``[n_l, n_u]`` over which ``psi_star`` suffices.

    Inside the interval the required joint loading does not exceed the
    charged loading ``psi_star``. When ``psi_star > psi_a`` the lower root
    falls outside ``[0, 1]`` and ``n_l`` is clamped to 0; ``psi_star == psi_b``
    returns ``n_u = 1``.

    Raises:
        NoRealRoots: if ``psi_star`` is below the minimum joint loading.
        DomainError: if ``psi_star`` exceeds ``psi_b``.
    """
    report = competitiveness_region(pair, risk)
    psi_a, psi_b, psi_min = report.psi_a, report.psi_b, report.psi_min
    if not math.isfinite(psi_star):
        raise DomainError(f"psi_star must be finite, got {psi_star!r}")
    if psi_star < psi_min * (1.0 - _BOUND_RTOL):
        raise NoRealRoots(
            f"psi_star = {psi_star:.10g} is below the minimum joint loading {psi_min:.10g}"
        )
    if psi_star > psi_b * (1.0 + _BOUND_RTOL):
        raise DomainError(f"psi_star = {psi_star:.10g} exceeds psi_b = {psi_b:.10g}")

    if psi_star <= psi_min:
        return report.n_min, report.n_min

    b, rho = pair.b, pair.rho
    lam1, lam2 = pair.lambda1, pair.lambda2
    ratio2 = (psi_star / psi_a) ** 2
    # lambda2**2 - lambda1*(1 - r**2) = lambda1*r**2 - b**2*(1 - rho**2)
    disc = max(lam1 * ratio2 - b * b * (1.0 - rho) * (1.0 + rho), 0.0)
    half_width = math.sqrt(disc) / lam1
    centre = lam2 / lam1
    product = (1.0 - ratio2) / lam1
    # Take the root free of cancellation first, the other one from Vieta.
    if centre >= 0.0:
        upper = centre + half_width
        lower = product / upper if upper > 0.0 else centre - half_width
    else:
        lower = centre - half_width
        upper = product / lower if lower < 0.0 else centre + half_width
    if psi_star >= psi_b:
        upper = 1.0
    lower = min(max(lower, 0.0), 1.0)
    upper = min(max(upper, 0.0), 1.0)
    return float(policy_proportion(pair, lower)), float(policy_proportion(pair, upper))


def portfolio_risk_gap(
    sigma_a: float,
    sigma_b: float,
    rho: float,
    count_a: float,
    count_b: float,
    risk: RiskSpec,
) -> float:
    """Reduction in portfolio MSD risk from pooling two lines.

    ``(1 - zeta) * gamma * (N_a*sigma_a + N_b*sigma_b - sigma_ptf)``, with
    ``rho`` allowed anywhere in ``[-1, 1]``.
    """
    for name, v in (("sigma_a", sigma_a), ("sigma_b", sigma_b), ("count_a", count_a), ("count_b", count_b)):
        _check_finite_positive(name, v)
    if not (math.isfinite(rho) and -1.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [-1, 1], got {rho!r}")
    sa, sb = count_a * sigma_a, count_b * sigma_b
    total = sa + sb
    sigma_ptf = math.sqrt(max(sa * sa + sb * sb + 2.0 * rho * sa * sb, 0.0))
    # total - sigma_ptf, rewritten to stay exact at rho = 1 and never negative
    diff = 2.0 * sa * sb * (1.0 - rho) / (total + sigma_ptf)
    return (1.0 - risk.zeta) * risk.gamma * diff


def risk_reduction_gap(pair: LinePair, risk: RiskSpec, count_a: float, count_b: float) -> float:
    """Portfolio risk saved by pricing jointly, for the given policy counts.

    Counts refer to ``pair.line_a`` and ``pair.line_b`` after ordering. A
    one-line portfolio (a zero count) is rejected: price it with
    :func:`standalone_loading` instead.
    """
    return portfolio_risk_gap(
        pair.line_a.sigma, pair.line_b.sigma, pair.rho, count_a, count_b, risk
    )


# Reference 30-year annuity (age 60) and assurance (age 30), unit benefits.
REFERENCE_ANNUITY = BusinessLine("term annuity", 19.84, 0.1821759)
REFERENCE_ASSURANCE = BusinessLine("term assurance", 0.06091786, 0.004535378)
REFERENCE_RHO = -0.8282


def reference_pair(benefit_ratio: float = 1.0) -> LinePair:
    """Annuity/assurance pair with the death benefit scaled by ``benefit_ratio``."""
    return LinePair(REFERENCE_ANNUITY, REFERENCE_ASSURANCE.scaled(benefit_ratio), REFERENCE_RHO)
