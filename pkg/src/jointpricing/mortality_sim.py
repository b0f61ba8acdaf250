"""Two-population Li-Lee mortality model and Monte Carlo present values.

The log central death rate of population ``i`` at age ``x`` in year ``t`` is

    log m[i, x, t] = alpha[i, x] + beta[i, x] * kappa[i, t] + B[x] * K[t]

where ``B * K`` is shared by both populations and ``beta[i] * kappa[i]`` is
specific to population ``i``. Factors are estimated by rank-one SVD and
projected as a correlated random walk with drift on ``(kappa_a, kappa_b, K)``.

The two populations back two products: a term annuity (population A) and a
term assurance (population B). Their per-policy present values, simulated on
common scenarios, feed the joint-loading analysis.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import DataMismatch, DegenerateData, DegenerateFactor, MalformedRow, ValidationError
from .pricing_core import BusinessLine, LinePair

logger = logging.getLogger(__name__)

DEFAULT_DISCOUNT_FACTOR = 1.0 / 1.02
POPULATIONS = ("A", "B")
SCENARIO_BLOCK = 4096


# -- data --------------------------------------------------------------------


@dataclass(frozen=True)
class MortalityDataset:
    """Central death rates of one population on a full age-by-year grid."""

    population_id: str
    ages: np.ndarray
    years: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        ages = np.asarray(self.ages, dtype=int)
        years = np.asarray(self.years, dtype=int)
        rates = np.asarray(self.rates, dtype=float)
        if ages.ndim != 1 or years.ndim != 1 or len(ages) < 2 or len(years) < 3:
            raise ValidationError("need at least 2 ages and 3 years")
        for name, idx in (("ages", ages), ("years", years)):
            if np.any(np.diff(idx) != 1):
                raise ValidationError(f"{name} must be contiguous and strictly increasing")
        if rates.shape != (len(ages), len(years)):
            raise ValidationError(f"rates shape {rates.shape} != ({len(ages)}, {len(years)})")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0.0):
            raise ValidationError(f"population {self.population_id}: rates must be positive and finite")
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "rates", rates)

    def select_years(self, first: int, last: int) -> "MortalityDataset":
        cols = (self.years >= first) & (self.years <= last)
        return MortalityDataset(self.population_id, self.ages, self.years[cols], self.rates[:, cols])


def read_mortality_csv(path, population_id: Optional[str] = None) -> MortalityDataset:
    """Read an age-by-year table: header ``age,<year>,...``, one row per age."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedRow("empty mortality file", line=1)
    try:
        years = [int(y) for y in rows[0][1:]]
    except ValueError as exc:
        raise MalformedRow(f"header must list integer years ({exc})", line=1) from None
    ages, table = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(years) + 1:
            raise MalformedRow(f"expected {len(years) + 1} fields, got {len(row)}", line=lineno)
        try:
            ages.append(int(row[0]))
        except ValueError:
            raise MalformedRow(f"bad age {row[0]!r}", line=lineno, column="age") from None
        try:
            table.append([float(c) for c in row[1:]])
        except ValueError as exc:
            raise MalformedRow(str(exc), line=lineno) from None
    return MortalityDataset(population_id or path.stem, np.array(ages), np.array(years), np.array(table))


def write_mortality_csv(dataset: MortalityDataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["age", *[str(y) for y in dataset.years]])
        for age, row in zip(dataset.ages, dataset.rates):
            w.writerow([str(age), *[format(v, ".17g") for v in row]])


# -- model -------------------------------------------------------------------


@dataclass(frozen=True)
class LiLeeParams:
    """Fitted Li-Lee parameters for populations A (index 0) and B (index 1).

    ``drift`` and ``covariance`` describe the yearly increments of
    ``(kappa_a, kappa_b, kappa_common)``; ``drift_zeroed`` flags specific
    drifts that were set to zero by the fitting sanity check.
    """

    ages: np.ndarray
    years: np.ndarray
    alpha: np.ndarray  # (2, n_ages)
    beta: np.ndarray  # (2, n_ages)
    kappa: np.ndarray  # (2, n_years)
    beta_common: np.ndarray  # (n_ages,)
    kappa_common: np.ndarray  # (n_years,)
    drift: np.ndarray  # (3,)
    covariance: np.ndarray  # (3, 3)
    drift_zeroed: tuple = (False, False)
    population_ids: tuple = POPULATIONS

    def log_rates(self, population: int) -> np.ndarray:
        """Fitted log central death rates on the estimation grid."""
        i = population
        return (
            self.alpha[i][:, None]
            + np.outer(self.beta[i], self.kappa[i])
            + np.outer(self.beta_common, self.kappa_common)
        )

    def variance_shares(self, population: int) -> tuple[float, float]:
        """Shares of the centred log-rate variation carried by the common and specific terms."""
        common = np.outer(self.beta_common, self.kappa_common)
        specific = np.outer(self.beta[population], self.kappa[population])
        total = np.sum(common**2) + np.sum(specific**2)
        return float(np.sum(common**2) / total), float(np.sum(specific**2) / total)


def _rank_one(matrix: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Leading SVD term, normalised so that the age loadings sum to one."""
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    scale = max(1.0, float(np.abs(matrix).max()))
    if s[0] <= 1e-12 * scale * math.sqrt(matrix.size):
        raise DegenerateFactor(f"{what}: matrix is numerically rank zero")
    beta = u[:, 0]
    kappa = s[0] * vt[0]
    total = beta.sum()
    if abs(total) <= 1e-8 * np.abs(beta).sum():
        raise DegenerateFactor(f"{what}: age loadings sum to zero and cannot be normalised")
    return beta / total, kappa * total


def _drift_changes_sign(diffs: np.ndarray) -> bool:
    half = len(diffs) // 2
    first, second = diffs[:half].mean(), diffs[half:].mean()
    return np.sign(first) != np.sign(second)


def fit_li_lee(
    data_a: MortalityDataset,
    data_b: MortalityDataset,
    specific_drift: str = "auto",
) -> LiLeeParams:
    """Estimate Li-Lee parameters from two populations by SVD.

    The common factor is the rank-one fit of the average of the two centred
    log-rate matrices; each population's specific factor is the rank-one fit
    of what remains. Only the overlapping years are used.

    Args:
        data_a, data_b: central death rates on the same age range.
        specific_drift: ``"auto"`` keeps the drift of a specific kappa only if
            the mean increment has the same sign in both halves of the sample;
            ``"keep"`` always keeps it; ``"zero"`` always drops it.

    Raises:
        DataMismatch: age ranges differ or the years do not overlap.
        DegenerateFactor: a residual matrix is numerically rank zero.
    """
    if specific_drift not in ("auto", "keep", "zero"):
        raise ValidationError(f"specific_drift must be auto, keep or zero, got {specific_drift!r}")
    if not np.array_equal(data_a.ages, data_b.ages):
        raise DataMismatch(
            f"age ranges differ: {data_a.ages[0]}-{data_a.ages[-1]} vs {data_b.ages[0]}-{data_b.ages[-1]}"
        )
    first = max(data_a.years[0], data_b.years[0])
    last = min(data_a.years[-1], data_b.years[-1])
    if last - first < 2:
        raise DataMismatch(f"need at least 3 overlapping years, got {first}-{last}")
    data_a, data_b = data_a.select_years(first, last), data_b.select_years(first, last)

    logs = [np.log(d.rates) for d in (data_a, data_b)]
    alpha = np.array([lm.mean(axis=1) for lm in logs])
    centred = [lm - a[:, None] for lm, a in zip(logs, alpha)]

    beta_c, kappa_c = _rank_one(0.5 * (centred[0] + centred[1]), "common factor")
    betas, kappas = [], []
    for i, z in enumerate(centred):
        b, k = _rank_one(z - np.outer(beta_c, kappa_c), f"population {POPULATIONS[i]} specific factor")
        betas.append(b)
        kappas.append(k)
    kappas = np.array(kappas)
    betas = np.array(betas)

    # kappa sums to zero by construction; remove rounding residue into alpha.
    shift_c = kappa_c.mean()
    kappa_c = kappa_c - shift_c
    for i in range(2):
        shift = kappas[i].mean()
        kappas[i] -= shift
        alpha[i] += beta_c * shift_c + betas[i] * shift

    series = np.vstack([kappas, kappa_c])
    diffs = np.diff(series, axis=1)
    drift = diffs.mean(axis=1)
    cov = np.atleast_2d(np.cov(diffs, ddof=1))
    zeroed = [False, False]
    for i in range(2):
        if specific_drift == "zero" or (specific_drift == "auto" and _drift_changes_sign(diffs[i])):
            drift[i] = 0.0
            zeroed[i] = True
    return LiLeeParams(
        ages=data_a.ages.copy(),
        years=data_a.years.copy(),
        alpha=alpha,
        beta=betas,
        kappa=kappas,
        beta_common=beta_c,
        kappa_common=kappa_c,
        drift=drift,
        covariance=0.5 * (cov + cov.T),
        drift_zeroed=tuple(zeroed),
        population_ids=(data_a.population_id, data_b.population_id),
    )


# -- simulation --------------------------------------------------------------


def _population_index(population) -> int:
    if population in (0, 1):
        return int(population)
    key = str(population).upper()
    if key not in POPULATIONS:
        raise ValidationError(f"population must be 'A' or 'B', got {population!r}")
    return POPULATIONS.index(key)


@dataclass(frozen=True)
class ScenarioSet:
    """Projected ``(kappa_a, kappa_b, kappa_common)`` paths.

    ``kappa[s, h]`` holds scenario ``s`` in projection year ``h`` (0 is the
    first year after the estimation period).
    """

    params: LiLeeParams
    kappa: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    @property
    def n_sims(self) -> int:
        return self.kappa.shape[0]

    @property
    def horizon(self) -> int:
        return self.kappa.shape[1]

    @property
    def start_year(self) -> int:
        return int(self.params.years[-1]) + 1

    def survival(self, population, entry_age: int, term: int) -> np.ndarray:
        """One-year survival probabilities along a cohort diagonal.

        Returns an ``(n_sims, term)`` array whose column ``j`` is the
        probability that a life aged ``entry_age + j`` at the start of
        projection year ``j`` survives that year.
        """
        i = _population_index(population)
        p = self.params
        first = entry_age - int(p.ages[0])
        if first < 0 or entry_age + term - 1 > int(p.ages[-1]):
            raise ValidationError(
                f"ages {entry_age}-{entry_age + term - 1} outside fitted range {p.ages[0]}-{p.ages[-1]}"
            )
        if term > self.horizon:
            raise ValidationError(f"term {term} exceeds the projection horizon {self.horizon}")
        rows = np.arange(first, first + term)
        log_m = (
            p.alpha[i, rows]
            + p.beta[i, rows] * self.kappa[:, :term, i]
            + p.beta_common[rows] * self.kappa[:, :term, 2]
        )
        # constant force of mortality within each year of age
        return np.exp(-np.exp(log_m))


def _innovation_factor(covariance: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(covariance)
    if np.any(w < -1e-10 * max(1.0, np.abs(w).max())):
        raise ValidationError("covariance matrix is not positive semidefinite")
    return v * np.sqrt(np.clip(w, 0.0, None))


def simulate_scenarios(params: LiLeeParams, horizon: int, n_sims: int, seed: int) -> ScenarioSet:
    """Project the three period indices as a correlated Gaussian random walk.

    Each path starts from the last fitted values. The output is fully
    determined by ``seed``; scenario ``s`` depends only on ``seed`` and
    ``s // SCENARIO_BLOCK``, not on ``n_sims``.
    """
    if horizon < 1 or n_sims < 1:
        raise ValidationError("horizon and n_sims must be at least 1")
    factor = _innovation_factor(np.asarray(params.covariance, dtype=float))
    start = np.array([params.kappa[0, -1], params.kappa[1, -1], params.kappa_common[-1]])
    # one independent substream per block of scenarios, so blocks can be
    # generated in any order (or in parallel) with identical results
    blocks = -(-n_sims // SCENARIO_BLOCK)
    streams = np.random.SeedSequence(seed).spawn(blocks)
    shocks = np.empty((n_sims, horizon, 3))
    for i, ss in enumerate(streams):
        lo = i * SCENARIO_BLOCK
        hi = min(lo + SCENARIO_BLOCK, n_sims)
        shocks[lo:hi] = np.random.default_rng(ss).standard_normal((hi - lo, horizon, 3))
    steps = params.drift + shocks @ factor.T
    return ScenarioSet(params, start + np.cumsum(steps, axis=1), seed)


# -- products ----------------------------------------------------------------


class ProductKind(enum.Enum):
    TERM_ANNUITY = "annuity"
    TERM_ASSURANCE = "assurance"


@dataclass(frozen=True)
class ProductSpec:
    """Single-premium term product paying ``benefit`` at the end of a year.

    The annuity pays while the life survives; the assurance pays in the year
    of death.
    """

    kind: ProductKind
    entry_age: int
    term: int
    benefit: float = 1.0
    discount_factor: float = DEFAULT_DISCOUNT_FACTOR

    def __post_init__(self):
        if self.term < 1:
            raise ValidationError(f"term must be at least 1, got {self.term}")
        if not self.benefit > 0:
            raise ValidationError(f"benefit must be positive, got {self.benefit}")
        if not 0.0 < self.discount_factor <= 1.0:
            raise ValidationError(f"discount factor must lie in (0, 1], got {self.discount_factor}")


def present_value(survival, spec: ProductSpec):
    """Present value at issue given one-year survival probabilities.

    ``survival[..., j]`` is the probability of surviving policy year ``j+1``;
    the last axis must have length ``spec.term``. Leading axes (scenarios)
    broadcast.
    """
    p = np.asarray(survival, dtype=float)
    if p.shape[-1] != spec.term:
        raise ValidationError(f"survival has {p.shape[-1]} years, product term is {spec.term}")
    v = spec.discount_factor ** np.arange(1, spec.term + 1)
    alive_end = np.cumprod(p, axis=-1)  # k-year survival, k = 1..T
    if spec.kind is ProductKind.TERM_ANNUITY:
        value = alive_end @ v
    else:
        # (k-1)-year survival
        ones = np.ones(p.shape[:-1] + (1,))
        alive_start = np.concatenate([ones, alive_end[..., :-1]], axis=-1)
        value = (alive_start * (1.0 - p)) @ v
    value = spec.benefit * value
    return float(value) if np.ndim(value) == 0 else value


def product_values(scenarios: ScenarioSet, spec: ProductSpec, population) -> np.ndarray:
    """Present value of ``spec`` in every scenario, for the given population."""
    return present_value(scenarios.survival(population, spec.entry_age, spec.term), spec)


def export_scenarios_csv(path, values_a, values_b, products=("annuity", "assurance")) -> None:
    """Write ``scenario_id,product,present_value`` rows."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_id", "product", "present_value"])
        for name, values in zip(products, (values_a, values_b)):
            for i, x in enumerate(values):
                w.writerow([i, name, format(float(x), ".17g")])


# -- summaries and calibration ----------------------------------------------


@dataclass(frozen=True)
class SimulationSummary:
    pi_a: float
    sigma_a: float
    pi_b: float
    sigma_b: float
    rho: float
    sample_count: int
    seed: Optional[int] = None

    def to_pair(self, label_a: str = "A", label_b: str = "B") -> LinePair:
        return LinePair(
            BusinessLine(label_a, self.pi_a, self.sigma_a),
            BusinessLine(label_b, self.pi_b, self.sigma_b),
            self.rho,
        )


def _paired(values_a, values_b):
    a = np.asarray(values_a, dtype=float).ravel()
    b = np.asarray(values_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValidationError(f"samples must be paired: {a.size} vs {b.size} values")
    if a.size < 2:
        raise DegenerateData("need at least 2 paired samples")
    return a, b


def summarize(values_a, values_b, seed: Optional[int] = None) -> SimulationSummary:
    """Sample means, standard deviations (ddof=1) and Pearson correlation."""
    a, b = _paired(values_a, values_b)
    sa, sb = a.std(ddof=1), b.std(ddof=1)
    if sa == 0.0 or sb == 0.0:
        raise DegenerateData("a sample is constant: standard deviation is zero")
    rho = float(np.corrcoef(a, b)[0, 1])
    rho = min(max(rho, -1.0), 1.0)
    return SimulationSummary(float(a.mean()), float(sa), float(b.mean()), float(sb), rho, int(a.size), seed)


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise ValidationError(f"confidence level must lie in (0, 1), got {level}")


def empirical_var(sample, level: float) -> float:
    """Empirical quantile with linear interpolation between order statistics."""
    _check_level(level)
    return float(np.quantile(np.asarray(sample, dtype=float), level, method="linear"))


def _unit_portfolios(values_a, values_b, n_grid):
    """Portfolio value per unit of pure premium, one row per grid proportion of line B."""
    a, b = _paired(values_a, values_b)
    if n_grid < 2:
        raise ValidationError("n_grid must be at least 2")
    grid = np.linspace(0.0, 1.0, n_grid)
    pa, pb = a.mean(), b.mean()
    if pa <= 0 or pb <= 0:
        raise DegenerateData("pure premiums must be positive")
    w = grid[:, None]
    unit = ((1.0 - w) * a + w * b) / ((1.0 - w) * pa + w * pb)
    return grid, unit


def var_loading_curve(values_a, values_b, zeta: float, var_level: float = 0.95, n_grid: int = 21):
    """Joint loading from the value-at-risk risk-reduction constraint.

    For each proportion ``n`` of line B, the loading is
    ``zeta * (VaR[L] - 1)`` where ``L`` is the portfolio value per unit of
    pure premium. Returns a list of ``(n, loading)`` pairs.
    """
    if not 0.0 < zeta < 1.0:
        raise ValidationError(f"zeta must lie in (0, 1), got {zeta}")
    _check_level(var_level)
    grid, unit = _unit_portfolios(values_a, values_b, n_grid)
    q = np.quantile(unit, var_level, axis=1, method="linear")
    return [(float(n), float(zeta * (v - 1.0))) for n, v in zip(grid, q)]


def msd_loading_curve(values_a, values_b, zeta: float, gamma: float, n_grid: int = 21):
    """Joint MSD loading ``zeta * gamma * sd(L)`` on the same grid as :func:`var_loading_curve`."""
    grid, unit = _unit_portfolios(values_a, values_b, n_grid)
    sd = unit.std(axis=1, ddof=1)
    return [(float(n), float(zeta * gamma * s)) for n, s in zip(grid, sd)]


def calibrate_gamma(values_a, values_b, zeta: float, var_level: float = 0.95, n_grid: int = 21) -> float:
    """MSD weight that best matches the value-at-risk loading curve.

    Minimises the largest absolute gap between the MSD and VaR joint loadings
    over an even grid of proportions.
    """
    _check_level(var_level)
    grid, unit = _unit_portfolios(values_a, values_b, n_grid)
    sd = unit.std(axis=1, ddof=1)
    if np.any(sd <= 1e-14):
        raise DegenerateData("portfolio sample variance is numerically zero")
    excess = np.quantile(unit, var_level, axis=1, method="linear") - 1.0
    slope = zeta * sd
    target = zeta * excess
    if np.all(target <= 0.0):
        raise DegenerateData("value-at-risk loading is not positive anywhere on the grid")
    # max_i |slope_i*g - target_i| is convex in g; its minimum is where the
    # largest overshoot equals the largest undershoot.
    over = lambda g: np.max(slope * g - target)  # noqa: E731
    under = lambda g: np.max(target - slope * g)  # noqa: E731
    ratios = target / slope
    lo, hi = max(ratios.min(), 0.0), ratios.max()
    if hi <= lo:
        return float(hi)
    return float(optimize.brentq(lambda g: over(g) - under(g), lo, hi, xtol=1e-14))


# -- synthetic data ----------------------------------------------------------


def synthetic_params(
    ages: Sequence[int] = range(30, 91),
    years: Sequence[int] = range(1950, 2019),
    common_drift: float = -1.0,
    common_vol: float = 1.0,
    specific_vol: float = 0.15,
    seed: int = 0,
) -> LiLeeParams:
    """Li-Lee parameters that the SVD fit recovers exactly from noise-free data.

    Both populations share the age pattern of their specific factor and have
    opposite specific period indices, so the specific terms cancel in the
    pooled average and the common factor is identified exactly.
    """
    ages = np.arange(ages[0], ages[-1] + 1)
    years = np.arange(years[0], years[-1] + 1)
    rng = np.random.default_rng(seed)
    x = (ages - ages[0]) / max(1, ages[-1] - ages[0])
    alpha_a = np.log(8e-4) + 0.085 * (ages - ages[0])
    alpha = np.array([alpha_a, alpha_a + 0.15])

    beta_c = 1.5 - x
    beta_c /= beta_c.sum()
    beta_s = 0.5 + x
    beta_s /= beta_s.sum()

    t = len(years)
    kappa_c = np.cumsum(common_drift + common_vol * rng.standard_normal(t))
    kappa_c -= kappa_c.mean()
    kappa_s = np.cumsum(specific_vol * rng.standard_normal(t))
    kappa_s -= kappa_s.mean()
    kappas = np.array([kappa_s, -kappa_s])

    series = np.vstack([kappas, kappa_c])
    diffs = np.diff(series, axis=1)
    return LiLeeParams(
        ages=ages,
        years=years,
        alpha=alpha,
        beta=np.array([beta_s, beta_s]),
        kappa=kappas,
        beta_common=beta_c,
        kappa_common=kappa_c,
        drift=diffs.mean(axis=1),
        covariance=np.cov(diffs, ddof=1),
    )


def synthetic_datasets(params: LiLeeParams, noise: float = 0.0, seed: Optional[int] = None):
    """Central death rates generated from ``params``, optionally with log-normal noise."""
    rng = np.random.default_rng(seed)
    out = []
    for i, pid in enumerate(params.population_ids):
        log_m = params.log_rates(i)
        if noise > 0.0:
            log_m = log_m + noise * rng.standard_normal(log_m.shape)
        out.append(MortalityDataset(pid, params.ages, params.years, np.exp(log_m)))
    return tuple(out)
