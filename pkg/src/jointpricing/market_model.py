"""Demand-aware joint pricing: equilibrium loading and the pricing decision.

One insurer prices lines A and B jointly while ``k_A - 1`` and ``k_B - 1``
competitors charge the stand-alone premiums. The number of policies the
joint pricer attracts depends on its discount relative to the stand-alone
price, and the loading it needs depends on the resulting portfolio mix, so
the charged loading solves a fixed-point equation.

Market quantities labelled A and B always refer to ``pair.line_a`` and
``pair.line_b`` after the pair has put the safer line first.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import ComputationError, InfeasibleDemand, NoConvergence, ValidationError
from .pricing_core import (
    LinePair,
    RiskSpec,
    _loading_from_weight,
    competitiveness_region,
    critical_threshold,
    loadings,
    premium_weight,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
DAMPING = 0.5
MAX_ITER = 10_000
SCAN_POINTS = 1024
# w_d and w_ct are compared with this relative slack to decide the branch.
BRANCH_RTOL = 1e-9


class DemandModel(enum.Enum):
    LOGISTIC = "logistic"
    LINEARIZED = "linear"

    @classmethod
    def parse(cls, value) -> "DemandModel":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"logistic": cls.LOGISTIC, "linear": cls.LINEARIZED, "linearized": cls.LINEARIZED}
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError(f"unknown demand model {value!r} (use 'logistic' or 'linear')") from None


class Verdict(enum.Enum):
    JOINT = "JointFavored"
    SEPARATE = "SeparateFavored"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class MarketSpec:
    """Total demand, competitor count and reaction factor for each line."""

    demand_a: float
    demand_b: float
    insurers_a: int
    insurers_b: int
    reaction_a: float
    reaction_b: float

    def __post_init__(self):
        for name in ("demand_a", "demand_b", "reaction_a", "reaction_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")
        for name, total in (("insurers_a", self.demand_a), ("insurers_b", self.demand_b)):
            k = getattr(self, name)
            if int(k) != k or k < 2:
                raise ValidationError(f"{name} must be an integer >= 2, got {k!r}")
            if k >= total:
                raise ValidationError(f"{name} = {k} must be below the total demand {total:g}")
            object.__setattr__(self, name, int(k))

    @property
    def demand_share(self) -> float:
        """Proportion ``w_d`` of the market demand that is for line B."""
        return self.demand_b / (self.demand_a + self.demand_b)

    def with_demand_share(self, w_d: float, total: float) -> "MarketSpec":
        """Same competitors and reactions, total demand split ``(1-w_d, w_d)``."""
        if not 0.0 < w_d < 1.0:
            raise ValidationError(f"demand share must lie in (0, 1), got {w_d!r}")
        return replace(self, demand_a=(1.0 - w_d) * total, demand_b=w_d * total)

    def with_reactions(self, reaction_a: float, reaction_b: float) -> "MarketSpec":
        return replace(self, reaction_a=reaction_a, reaction_b=reaction_b)


@dataclass(frozen=True)
class EquilibriumResult:
    psi_star: float
    n_star: float
    count_a: float
    count_b: float
    discount_a: float
    discount_b: float
    converged: bool
    iterations: int
    residual: float = 0.0
    method: str = "fixed-point"
    multiple_roots: bool = False
    clamped: bool = False


@dataclass(frozen=True)
class PricingDecision:
    verdict: Verdict
    rule: str
    conditions_checked: list
    eta: Optional[float]
    w_ct: float
    branch: str
    d_ptf: Optional[float] = None
    equilibrium: Optional[EquilibriumResult] = field(default=None, repr=False)

    @property
    def decisive(self) -> bool:
        return self.verdict is not Verdict.INDETERMINATE


def _demand_raw(model, total, competitors, reaction, discount):
    discount = np.asarray(discount, dtype=float)
    k = competitors
    if model is DemandModel.LOGISTIC:
        # N_T * (1 - (k-1)/(k-1+exp(-q c))) == N_T / (1 + (k-1)*exp(q c))
        with np.errstate(over="ignore"):
            return total / (1.0 + (k - 1) * np.exp(reaction * discount))
    return (total / k) * (1.0 - (k - 1) / k * reaction * discount)


def demand(model, total: float, competitors: int, reaction: float, discount):
    """Policies attracted by the joint pricer at relative price change ``discount``.

    ``discount = P_joint / P_standalone - 1``. Both variants return
    ``total / competitors`` at zero discount; the linearized one is clamped
    at zero for large price increases, where its expansion no longer holds.
    """
    model = DemandModel.parse(model)
    if not (total > 0 and reaction > 0):
        raise ValidationError("total demand and reaction factor must be positive")
    if int(competitors) != competitors or competitors < 2:
        raise ValidationError(f"competitors must be an integer >= 2, got {competitors!r}")
    out = np.maximum(_demand_raw(model, total, competitors, reaction, discount), 0.0)
    return float(out) if out.ndim == 0 else out


class _Market:
    """Pre-computed constants of one (pair, risk, market, model) problem."""

    def __init__(self, pair, risk, market, model):
        self.pair = pair
        self.market = market
        self.model = DemandModel.parse(model)
        self.psi_a, self.psi_b = loadings(pair, risk)
        self.region = competitiveness_region(pair, risk)

    def discounts(self, psi):
        psi = np.asarray(psi, dtype=float)
        return (1.0 + psi) / (1.0 + self.psi_a) - 1.0, (1.0 + psi) / (1.0 + self.psi_b) - 1.0

    def raw_counts(self, psi):
        m = self.market
        c_a, c_b = self.discounts(psi)
        n_a = _demand_raw(self.model, m.demand_a, m.insurers_a, m.reaction_a, c_a)
        n_b = _demand_raw(self.model, m.demand_b, m.insurers_b, m.reaction_b, c_b)
        return n_a, n_b

    def counts(self, psi):
        n_a, n_b = self.raw_counts(psi)
        return np.maximum(n_a, 0.0), np.maximum(n_b, 0.0)

    def implied_loading(self, psi):
        """Loading required by the portfolio the joint pricer attracts at ``psi``."""
        n_a, n_b = self.counts(psi)
        total = n_a + n_b
        if np.any(total <= 0.0):
            raise InfeasibleDemand("the demand model attracts no policies on either line")
        n = n_b / total
        return _loading_from_weight(self.psi_a, self.psi_b, self.pair.rho, premium_weight(self.pair, n))

    def residual(self, psi):
        return np.asarray(psi, dtype=float) - self.implied_loading(psi)

    def standalone_totals(self):
        m = self.market
        pa, pb = self.pair.line_a.pi, self.pair.line_b.pi
        return (
            m.demand_a / m.insurers_a * pa * (1.0 + self.psi_a),
            m.demand_b / m.insurers_b * pb * (1.0 + self.psi_b),
        )

    def premium_difference_direct(self, psi):
        """Collected premiums, joint minus stand-alone, under the demand model."""
        n_a, n_b = self.counts(psi)
        pa, pb = self.pair.line_a.pi, self.pair.line_b.pi
        sa_a, sa_b = self.standalone_totals()
        return (n_a * (1.0 + psi) * pa - sa_a) + (n_b * (1.0 + psi) * pb - sa_b)


def _scan_roots(problem, lo, hi):
    """Sign-change brackets of the residual on an even grid over [lo, hi]."""
    grid = np.linspace(lo, hi, SCAN_POINTS)
    res = problem.residual(grid)
    sign = np.sign(res)
    exact = np.flatnonzero(sign == 0.0)
    crossing = np.flatnonzero(sign[:-1] * sign[1:] < 0.0)
    brackets = [(grid[i], grid[i]) for i in exact] + [(grid[i], grid[i + 1]) for i in crossing]
    return sorted(brackets)


def _bisect(problem, lo, hi):
    if lo == hi:
        return lo
    return optimize.brentq(lambda x: float(problem.residual(x)), lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_equilibrium(
    pair: LinePair,
    risk: RiskSpec,
    market: MarketSpec,
    model=DemandModel.LINEARIZED,
    *,
    damping: float = DAMPING,
    max_iter: int = MAX_ITER,
) -> EquilibriumResult:
    """Solve for the loading that is consistent with the demand it attracts.

    Damped fixed-point iteration from ``psi_a``; falls back to bracketing
    on ``[psi_min, psi_b]`` when the iteration stalls or oscillates. The
    residual is also scanned on a 1024-point grid: if it changes sign more
    than once, the smallest root is returned and ``multiple_roots`` is set.

    Raises:
        NoConvergence: neither the iteration nor the bracketing succeeded.
        InfeasibleDemand: the demand model yields no policies at all.
    """
    problem = _Market(pair, risk, market, model)
    lo, hi = problem.region.psi_min, problem.psi_b
    tol = lambda p: RESIDUAL_TOL * (1.0 + abs(p))  # noqa: E731

    psi = problem.psi_a
    last = math.inf
    worse = 0
    iterations = 0
    method = "fixed-point"
    converged = False
    for iterations in range(1, max_iter + 1):
        g = float(problem.implied_loading(psi))
        r = abs(psi - g)
        if r <= 1e-3 * tol(psi):
            converged = True
            break
        worse = worse + 1 if r >= last else 0
        if worse >= 50:
            break
        last = r
        psi = (1.0 - damping) * psi + damping * g

    brackets = _scan_roots(problem, lo, hi) if hi > lo else [(lo, lo)]
    multiple = len(brackets) > 1
    if multiple:
        logger.debug("fixed-point residual changes sign %d times; using the smallest root", len(brackets))
    if not converged or multiple:
        if not brackets:
            raise NoConvergence(
                "no sign change of the fixed-point residual on [psi_min, psi_b]",
                residual=float(problem.residual(psi)),
            )
        psi = _bisect(problem, *brackets[0])
        method = "bisection"

    final = float(problem.residual(psi))
    if abs(final) > tol(psi):
        raise NoConvergence(f"residual {final:.3g} above tolerance after {iterations} iterations", residual=final)

    n_a_raw, n_b_raw = problem.raw_counts(psi)
    n_a, n_b = max(float(n_a_raw), 0.0), max(float(n_b_raw), 0.0)
    c_a, c_b = problem.discounts(psi)
    return EquilibriumResult(
        psi_star=float(psi),
        n_star=n_b / (n_a + n_b),
        count_a=n_a,
        count_b=n_b,
        discount_a=float(c_a),
        discount_b=float(c_b),
        converged=True,
        iterations=iterations,
        residual=final,
        method=method,
        multiple_roots=multiple,
        clamped=bool(n_a_raw < 0.0 or n_b_raw < 0.0),
    )


def _theta(pair, risk, market):
    psi_a, psi_b = loadings(pair, risk)
    pa, pb = pair.line_a.pi, pair.line_b.pi
    ka, kb = market.insurers_a, market.insurers_b
    wa = market.demand_a / ka * pa
    wb = market.demand_b / kb * pb
    sa = market.reaction_a * (ka - 1) / ka
    sb = market.reaction_b * (kb - 1) / kb
    theta1 = sa * wa / (1.0 + psi_a) + sb * wb / (1.0 + psi_b)
    theta2 = (sa * wa + sb * wb) + (wa + wb)
    theta3 = wa * (1.0 + psi_a) + wb * (1.0 + psi_b)
    return theta1, theta2, theta3


def premium_difference_forms(pair, risk, market, psi_star: float) -> tuple[float, float]:
    """Both closed forms of the premium difference under linearized demand.

    Returns ``(quadratic_form, reaction_form)``: the quadratic in
    ``1 + psi_star`` with coefficients theta1..theta3, and the form that is
    linear in the reaction factors, weighted by the premium share ``n_bar``
    of line B at stand-alone volumes.
    """
    theta1, theta2, theta3 = _theta(pair, risk, market)
    x = 1.0 + psi_star
    quad = -theta1 * x * x + theta2 * x - theta3

    psi_a, psi_b = loadings(pair, risk)
    ka, kb = market.insurers_a, market.insurers_b
    wa = market.demand_a / ka * pair.line_a.pi
    wb = market.demand_b / kb * pair.line_b.pi
    n_bar = wb / (wa + wb)
    da, db = psi_a - psi_star, psi_b - psi_star
    ra = market.reaction_a * (ka - 1) / ka * x / (1.0 + psi_a)
    rb = market.reaction_b * (kb - 1) / kb * x / (1.0 + psi_b)
    per_unit = ra * (1.0 - n_bar) * da + rb * n_bar * db - ((1.0 - n_bar) * da + n_bar * db)
    return quad, per_unit * (wa + wb)


def premium_difference(pair, risk, market, psi_star: float) -> float:
    """Joint minus stand-alone collected premiums at the loading ``psi_star``.

    Uses linearized demand (the quadratic form); positive means joint
    pricing collects more.
    """
    return premium_difference_forms(pair, risk, market, psi_star)[0]


def eta(pair: LinePair, risk: RiskSpec, market: MarketSpec) -> float:
    """Weight of line B in the joint-pricing condition at the minimum loading."""
    report = competitiveness_region(pair, risk)
    if not report.exists:
        raise ValidationError(f"eta needs b*rho < 1, got {pair.b_rho:.6g}")
    ka, kb = market.insurers_a, market.insurers_b
    a_part = market.demand_a / ka * pair.line_a.pi * (report.psi_a - report.psi_min)
    b_part = market.demand_b / kb * pair.line_b.pi * (report.psi_b - report.psi_min)
    return b_part / (a_part + b_part)


def demand_critical_threshold(pair: LinePair, risk: RiskSpec, market: MarketSpec) -> float:
    """Demand share of line B at which the equilibrium loading equals ``psi_a``.

    Equals 1 when both lines are equally risky. Raises ``ValidationError``
    when ``b*rho >= 1``.
    """
    n_ct = critical_threshold(pair)
    psi_a, psi_b = loadings(pair, risk)
    kb = market.insurers_b
    boost = 1.0 + (kb - 1) / kb * (psi_b - psi_a) / (1.0 + psi_b) * market.reaction_b
    return n_ct / (n_ct + (1.0 - n_ct) * boost * market.insurers_a / kb)


def _branch(pair, risk, market):
    """``(branch, w_ct, eta)`` where branch is 'below', 'at' or 'above'."""
    if pair.b_rho >= 1.0:
        # psi(n) > psi_a for every n > 0: always past the threshold
        return "above", 0.0, None
    w_ct = demand_critical_threshold(pair, risk, market)
    e = eta(pair, risk, market)
    w = market.demand_share
    if math.isclose(w, w_ct, rel_tol=BRANCH_RTOL, abs_tol=0.0):
        return "at", w_ct, e
    return ("below" if w < w_ct else "above"), w_ct, e


def _attach_evidence(pair, risk, market, model):
    try:
        eq = solve_equilibrium(pair, risk, market, model)
    except ComputationError as exc:
        logger.warning("equilibrium not available as evidence: %s", exc)
        return None, None
    return eq, float(_Market(pair, risk, market, model).premium_difference_direct(eq.psi_star))


def _consistent(eq, branch, psi_a):
    """Whether the solved loading lies on the side of psi_a the branch assumes."""
    if eq is None:
        return True
    if branch == "below":
        return eq.psi_star <= psi_a
    if branch == "above":
        return eq.psi_star >= psi_a
    return True


def _verdict(joint, separate, conditions, eq, branch, psi_a):
    checks = list(conditions)
    if eq is not None and eq.multiple_roots:
        ok = _consistent(eq, branch, psi_a)
        checks.append(("equilibrium_on_branch_side", ok))
        if not ok:
            return Verdict.INDETERMINATE, checks
    if joint:
        return Verdict.JOINT, checks
    if separate:
        return Verdict.SEPARATE, checks
    return Verdict.INDETERMINATE, checks


def decide_by_demand_threshold(pair, risk, market, model=DemandModel.LINEARIZED) -> PricingDecision:
    """Sufficient conditions on reaction factors for joint or separate pricing.

    The verdict is decisive only when every condition for one side holds;
    otherwise it is ``Indeterminate``. The premium difference at the solved
    equilibrium is attached either way as evidence.
    """
    psi_a, psi_b = loadings(pair, risk)
    region = competitiveness_region(pair, risk)
    psi_min = region.psi_min
    branch, w_ct, e = _branch(pair, risk, market)
    ka, kb = market.insurers_a, market.insurers_b
    qa, qb = market.reaction_a, market.reaction_b
    fa, fb = ka / (ka - 1), kb / (kb - 1)

    t1 = qb > fb * (1.0 + psi_b) / (1.0 + psi_a)
    conditions = [("q_b > k_b/(k_b-1) (1+psi_b)/(1+psi_a)", t1)]
    if branch == "below":
        lhs = (1.0 - e) * qa / fa * (1.0 + psi_min) / (1.0 + psi_a) + e * qb / fb * (1.0 + psi_min) / (1.0 + psi_b)
        t2 = lhs > 1.0
        conditions.append(("(1-eta) q_a .. + eta q_b .. > 1", t2))
    elif branch == "above":
        t2 = qa < fa * (1.0 + psi_a) / (1.0 + psi_b)
        conditions.append(("q_a < k_a/(k_a-1) (1+psi_a)/(1+psi_b)", t2))
    else:
        t2 = True
    joint = t1 and t2

    s1 = qb < fb
    conditions.append(("q_b < k_b/(k_b-1)", s1))
    if branch == "below":
        s2 = qa < fa
        conditions.append(("q_a < k_a/(k_a-1)", s2))
    elif branch == "above":
        s2 = qa > fa
        conditions.append(("q_a > k_a/(k_a-1)", s2))
    else:
        s2 = True
    separate = s1 and s2

    eq, d = _attach_evidence(pair, risk, market, model)
    verdict, checks = _verdict(joint, separate, conditions, eq, branch, psi_a)
    return PricingDecision(verdict, "demand-threshold", checks, e, w_ct, branch, d, eq)


def decide_by_reaction_bands(pair, risk, market, model=DemandModel.LINEARIZED) -> PricingDecision:
    """Simplified reaction-factor rules that do not depend on competitor counts."""
    psi_a, psi_b = loadings(pair, risk)
    psi_min = competitiveness_region(pair, risk).psi_min
    branch, w_ct, e = _branch(pair, risk, market)
    qa, qb = market.reaction_a, market.reaction_b

    j1 = qb > 2.0 * (1.0 + psi_b) / (1.0 + psi_min)
    conditions = [("q_b > 2 (1+psi_b)/(1+psi_min)", j1)]
    if branch == "below":
        j2 = qa > 2.0 * (1.0 + psi_a) / (1.0 + psi_min)
        conditions.append(("q_a > 2 (1+psi_a)/(1+psi_min)", j2))
    elif branch == "above":
        j2 = qa < (1.0 + psi_a) / (1.0 + psi_b)
        conditions.append(("q_a < (1+psi_a)/(1+psi_b)", j2))
    else:
        j2 = True

    s1 = qb < 1.0
    conditions.append(("q_b < 1", s1))
    if branch == "below":
        s2 = qa < 1.0
        conditions.append(("q_a < 1", s2))
    elif branch == "above":
        s2 = qa > 2.0
        conditions.append(("q_a > 2", s2))
    else:
        s2 = True

    eq, d = _attach_evidence(pair, risk, market, model)
    verdict, checks = _verdict(j1 and j2, s1 and s2, conditions, eq, branch, psi_a)
    return PricingDecision(verdict, "reaction-bands", checks, e, w_ct, branch, d, eq)


def reaction_bands(pair: LinePair, risk: RiskSpec) -> dict:
    """Reaction-factor bands used by :func:`decide_by_reaction_bands`."""
    psi_a, psi_b = loadings(pair, risk)
    psi_min = competitiveness_region(pair, risk).psi_min
    return {
        "q_b_joint": 2.0 * (1.0 + psi_b) / (1.0 + psi_min),
        "q_a_joint_below": 2.0 * (1.0 + psi_a) / (1.0 + psi_min),
        "q_a_joint_above": (1.0 + psi_a) / (1.0 + psi_b),
    }


@dataclass(frozen=True)
class SweepPoint:
    w_d: float
    psi_star: float
    rel_d_ptf: float
    status: str = "ok"


def sweep_demand_share(
    pair: LinePair,
    risk: RiskSpec,
    market_template: MarketSpec,
    model,
    grid: Sequence[float],
    total_market: float,
) -> list[SweepPoint]:
    """Relative premium difference as the demand share of line B varies.

    For each ``w_d`` the market demand ``total_market`` is split
    ``(1-w_d, w_d)``, the equilibrium is solved and the premium difference
    is divided by the stand-alone collected premiums. Failures are reported
    per point through ``status`` with NaN values.
    """
    out = []
    for w in grid:
        w = float(w)
        try:
            market = market_template.with_demand_share(w, total_market)
            eq = solve_equilibrium(pair, risk, market, model)
            problem = _Market(pair, risk, market, model)
            d = float(problem.premium_difference_direct(eq.psi_star))
            rel = d / sum(problem.standalone_totals())
            status = "ok"
            if eq.multiple_roots:
                status = "ok-multiple-roots"
            elif eq.clamped:
                status = "ok-clamped"
            out.append(SweepPoint(w, eq.psi_star, rel, status))
        except ValidationError as exc:
            out.append(SweepPoint(w, math.nan, math.nan, f"invalid: {exc}"))
        except ComputationError as exc:
            out.append(SweepPoint(w, math.nan, math.nan, f"failed: {exc}"))
    return out


# Reaction-factor scenarios of the demand-share illustration: (q_a, q_b).
PRESET_REACTION_SCENARIOS = ((0.5, 0.5), (3.0, 3.0), (0.5, 3.0), (3.0, 0.5))


def default_share_grid(points: int = 19) -> np.ndarray:
    """Demand shares 0.05, 0.10, ..., 0.95 (or ``points`` evenly spaced)."""
    if points == 1:
        return np.array([0.05])
    return np.linspace(0.05, 0.95, points)
