"""Screening of aggregate-loss series for joint-pricing candidates.

Series are read from a long CSV (``period,line_id,line_name,loss``), detrended
by OLS, checked for level stationarity with the KPSS statistic, and compared
pairwise: a pair of lines can be priced jointly below the safer stand-alone
loading only if ``b * rho < 1``.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateData, DuplicatePeriod, MalformedRow, NonPositiveLoss, ValidationError
from .pricing_core import BusinessLine, LinePair, RiskSpec, _loading_from_weight, critical_threshold

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 8
KPSS_CRITICAL_5PCT = 0.463
RHO_SNAP = 1e-12
BULLET = "•"
LOSS_COLUMNS = ("period", "line_id", "line_name", "loss")
LINE_COLUMNS = ("line_id", "line_name", "pi", "sigma", "psi", "kpss_statistic", "kpss_bandwidth", "kpss_pass")
PAIR_COLUMNS = ("line_a", "line_b", "rho", "b", "b_rho", "region_exists")


@dataclass(frozen=True)
class LossSeries:
    line_id: str
    name: str
    periods: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) != len(self.periods):
            raise ValidationError(f"line {self.line_id}: periods and values differ in length")
        if len(values) < MIN_OBSERVATIONS:
            raise ValidationError(f"line {self.line_id}: need at least {MIN_OBSERVATIONS} observations, got {len(values)}")
        if np.any(~np.isfinite(values)) or np.any(values <= 0):
            raise ValidationError(f"line {self.line_id}: losses must be positive")
        object.__setattr__(self, "periods", tuple(self.periods))
        object.__setattr__(self, "values", values)


def _period_key(label: str):
    try:
        return (0, float(label), "")
    except ValueError:
        return (1, 0.0, label)


def read_losses(path) -> tuple[list[LossSeries], dict[str, str]]:
    """Parse a long-format loss file.

    Returns:
        The accepted series sorted by ``line_id``, and a mapping from each
        rejected ``line_id`` to the reason it was dropped. A line is rejected
        when it misses a period that other lines cover, or has too few
        observations.

    Raises:
        MalformedRow: a row cannot be parsed (line and column are reported).
        NonPositiveLoss: a loss is zero or negative.
        DuplicatePeriod: a ``(period, line_id)`` pair repeats.
    """
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        return [], {}
    header = [h.strip() for h in header]
    missing = [c for c in LOSS_COLUMNS if c not in header]
    if missing:
        raise MalformedRow(f"missing column(s): {', '.join(missing)}", line=1)
    idx = {c: header.index(c) for c in LOSS_COLUMNS}

    cells: dict[str, dict[str, float]] = {}
    names: dict[str, str] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        period, line_id = row[idx["period"]].strip(), row[idx["line_id"]].strip()
        if not period:
            raise MalformedRow("empty period", line=lineno, column="period")
        if not line_id:
            raise MalformedRow("empty line_id", line=lineno, column="line_id")
        try:
            loss = float(row[idx["loss"]])
        except ValueError:
            raise MalformedRow(f"loss {row[idx['loss']]!r} is not a number", line=lineno, column="loss") from None
        if not math.isfinite(loss):
            raise MalformedRow("loss is not finite", line=lineno, column="loss")
        if loss <= 0:
            raise NonPositiveLoss(f"loss {loss:g} for line {line_id} in {period} is not positive", line=lineno, column="loss")
        per_line = cells.setdefault(line_id, {})
        if period in per_line:
            raise DuplicatePeriod(f"period {period} repeated for line {line_id}", line=lineno, column="period")
        per_line[period] = loss
        names.setdefault(line_id, row[idx["line_name"]].strip())

    all_periods = sorted({p for per_line in cells.values() for p in per_line}, key=_period_key)
    accepted, rejected = [], {}
    for line_id in sorted(cells):
        per_line = cells[line_id]
        gaps = [p for p in all_periods if p not in per_line]
        if gaps:
            rejected[line_id] = f"missing {len(gaps)} of {len(all_periods)} periods (first: {gaps[0]})"
            continue
        if len(per_line) < MIN_OBSERVATIONS:
            rejected[line_id] = f"only {len(per_line)} observations"
            continue
        accepted.append(LossSeries(line_id, names[line_id], all_periods, [per_line[p] for p in all_periods]))
    return accepted, rejected


def ingest_losses(path) -> list[LossSeries]:
    """Like :func:`read_losses` but logs rejected lines instead of returning them."""
    series, rejected = read_losses(path)
    if not series and not rejected:
        logger.warning("%s: no loss records", path)
    for line_id, reason in rejected.items():
        logger.warning("line %s rejected: %s", line_id, reason)
    return series


def write_losses(series: Sequence[LossSeries], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOSS_COLUMNS)
        for s in series:
            for period, value in zip(s.periods, s.values):
                w.writerow([period, s.line_id, s.name, repr(float(value))])


# -- statistics --------------------------------------------------------------


@dataclass(frozen=True)
class Trend:
    slope: float
    intercept: float


def detrend(values) -> tuple[np.ndarray, Trend]:
    """Remove an OLS linear trend in the time index ``t = 1..T``.

    Accepts a :class:`LossSeries` or a plain sequence.
    """
    y = np.asarray(values.values if isinstance(values, LossSeries) else values, dtype=float)
    if y.ndim != 1 or len(y) < 2:
        raise ValidationError("need a one-dimensional series of at least 2 values")
    t = np.arange(1, len(y) + 1, dtype=float)
    tc = t - t.mean()
    slope = float(tc @ (y - y.mean()) / (tc @ tc))
    intercept = float(y.mean() - slope * t.mean())
    return y - (intercept + slope * t), Trend(slope, intercept)


def default_bandwidth(n_obs: int) -> int:
    return int(math.floor(4.0 * (n_obs / 100.0) ** 0.25))


@dataclass(frozen=True)
class KpssResult:
    statistic: float
    bandwidth: int
    passed: bool


def kpss_statistic(residuals, bandwidth: Optional[int] = None) -> KpssResult:
    """Level-stationarity KPSS statistic with a Bartlett long-run variance.

    ``passed`` is true when the statistic is below the 5% critical value
    0.463, i.e. stationarity is not rejected.

    Raises:
        ValidationError: fewer than 8 observations or a negative bandwidth.
        DegenerateData: the residuals have zero variance.
    """
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if n < MIN_OBSERVATIONS:
        raise ValidationError(f"need at least {MIN_OBSERVATIONS} observations, got {n}")
    lags = default_bandwidth(n) if bandwidth is None else int(bandwidth)
    if lags < 0 or lags >= n:
        raise ValidationError(f"bandwidth must lie in [0, {n - 1}], got {bandwidth}")
    e = e - e.mean()
    scale = max(1.0, float(np.abs(np.asarray(residuals, dtype=float)).max()))
    gamma0 = float(e @ e) / n
    if gamma0 <= (1e-14 * scale) ** 2:
        raise DegenerateData("residuals have zero variance")
    lrv = gamma0
    for j in range(1, lags + 1):
        lrv += 2.0 * (1.0 - j / (lags + 1.0)) * float(e[j:] @ e[:-j]) / n
    s = np.cumsum(e)
    stat = float(s @ s) / (n * n * lrv)
    return KpssResult(stat, lags, stat < KPSS_CRITICAL_5PCT)


# -- screening ---------------------------------------------------------------


@dataclass(frozen=True)
class LineStats:
    line_id: str
    name: str
    pi: float
    sigma: float
    psi: float
    kpss: KpssResult


@dataclass(frozen=True)
class PairStats:
    """One unordered pair, with ``line_a`` the less risky line (``b >= 1``)."""

    line_a: str
    line_b: str
    rho: float
    b: float

    @property
    def b_rho(self) -> float:
        return self.b * self.rho

    @property
    def region_exists(self) -> bool:
        return self.b_rho < 1.0


@dataclass(frozen=True)
class ScreenReport:
    lines: tuple  # LineStats, in input order
    pairs: tuple  # PairStats, one per unordered pair
    pi_source: str = "mean"

    def line(self, line_id: str) -> LineStats:
        for s in self.lines:
            if s.line_id == line_id:
                return s
        raise ValidationError(f"unknown line {line_id!r}")

    def pair(self, id1: str, id2: str) -> PairStats:
        for p in self.pairs:
            if {p.line_a, p.line_b} == {id1, id2}:
                return p
        raise ValidationError(f"no pair ({id1}, {id2})")

    @property
    def positive_count(self) -> int:
        return sum(p.region_exists for p in self.pairs)

    @property
    def positive_fraction(self) -> float:
        return self.positive_count / len(self.pairs) if self.pairs else float("nan")

    def ordered_lines(self) -> list[LineStats]:
        """Lines by decreasing ``psi`` (ties by ``line_id``)."""
        return sorted(self.lines, key=lambda s: (-s.psi, s.line_id))

    def line_pair(self, id1: str, id2: str) -> LinePair:
        """The pair as a :class:`LinePair` for the pricing functions."""
        p = self.pair(id1, id2)
        if p.rho >= 1.0:
            raise ValidationError(f"pair ({id1}, {id2}) is perfectly correlated")
        a, b = self.line(p.line_a), self.line(p.line_b)
        return LinePair(BusinessLine(a.line_id, a.pi, a.sigma), BusinessLine(b.line_id, b.pi, b.sigma), p.rho)


def pairwise_screen(series: Sequence[LossSeries], pi_source: str = "mean", bandwidth: Optional[int] = None) -> ScreenReport:
    """Per-line moments and the pairwise ``b * rho < 1`` screen.

    ``pi`` is the mean of the raw losses (``pi_source="mean"``) or the last
    fitted trend value (``"trend-end"``). ``sigma`` and the correlations use
    the detrended residuals.

    Raises:
        ValidationError: fewer than 2 series or different period coverage.
        DegenerateData: a series has zero residual variance.
    """
    if pi_source not in ("mean", "trend-end"):
        raise ValidationError(f"pi_source must be 'mean' or 'trend-end', got {pi_source!r}")
    if len(series) < 2:
        raise ValidationError("need at least 2 series")
    ids = [s.line_id for s in series]
    if len(set(ids)) != len(ids):
        raise ValidationError("line ids must be unique")
    periods = series[0].periods
    for s in series[1:]:
        if s.periods != periods:
            raise ValidationError(f"line {s.line_id} does not cover the same periods as line {series[0].line_id}")

    lines, resid = [], {}
    for s in series:
        r, trend = detrend(s)
        sigma = float(r.std(ddof=1))
        if sigma <= 1e-14 * float(np.abs(s.values).max()):
            raise DegenerateData(f"line {s.line_id}: detrended residuals have zero variance")
        if pi_source == "mean":
            pi = float(s.values.mean())
        else:
            pi = trend.intercept + trend.slope * len(s.values)
            if pi <= 0:
                raise DegenerateData(f"line {s.line_id}: trend ends at a non-positive level")
        resid[s.line_id] = r
        lines.append(LineStats(s.line_id, s.name, pi, sigma, sigma / pi, kpss_statistic(r, bandwidth)))

    stats = {s.line_id: s for s in lines}
    pairs = []
    for i, j in itertools.combinations(ids, 2):
        a, b = stats[i], stats[j]
        if (b.psi, b.line_id) < (a.psi, a.line_id):
            a, b = b, a
        rho = float(np.corrcoef(resid[a.line_id], resid[b.line_id])[0, 1])
        if abs(abs(rho) - 1.0) <= RHO_SNAP:
            rho = math.copysign(1.0, rho)
        pairs.append(PairStats(a.line_id, b.line_id, rho, b.psi / a.psi))
    return ScreenReport(tuple(lines), tuple(pairs), pi_source)


@dataclass(frozen=True)
class RegionCurve:
    """Loaded premium per unit of expected benefit, ``1 + psi(n)``."""

    line_a: str
    line_b: str
    n: np.ndarray
    loaded: np.ndarray
    level_a: float
    level_b: float
    n_ct: Optional[float]


def region_curve(report: ScreenReport, id_a: str, id_b: str, risk: RiskSpec, grid: int = 101) -> RegionCurve:
    """Joint-pricing curve of one screened pair over ``grid`` even proportions of line B.

    ``n_ct`` is reported only when ``b > 1`` and ``b * rho < 1``.
    """
    if grid < 2:
        raise ValidationError("grid must have at least 2 points")
    p = report.pair(id_a, id_b)
    a, b = report.line(p.line_a), report.line(p.line_b)
    psi_a, psi_b = risk.scale * a.psi, risk.scale * b.psi
    n = np.linspace(0.0, 1.0, grid)
    nt = n * b.pi / ((1.0 - n) * a.pi + n * b.pi)
    loaded = 1.0 + _loading_from_weight(psi_a, psi_b, p.rho, nt)
    n_ct = None
    if p.b > 1.0 and p.region_exists:
        n_ct = critical_threshold(report.line_pair(id_a, id_b))
    return RegionCurve(p.line_a, p.line_b, n, loaded, 1.0 + psi_a, 1.0 + psi_b, n_ct)


# -- rendering ---------------------------------------------------------------


def _matrix(report: ScreenReport) -> tuple[list[str], list[list[str]]]:
    order = [s.line_id for s in report.ordered_lines()]
    rows = []
    for i in order:
        row = []
        for j in order:
            row.append(BULLET if i == j else ("+" if report.pair(i, j).region_exists else "-"))
        rows.append(row)
    return order, rows


def render_report(report: ScreenReport, fmt: str = "text") -> str:
    """Render a screen as an aligned text table or a sectioned CSV.

    Lines appear by decreasing ``psi``. The matrix marks pairs with a region
    ``+`` and the rest ``-``; the diagonal holds a bullet.
    """
    ordered = report.ordered_lines()
    order, matrix = _matrix(report)
    rank = {lid: k for k, lid in enumerate(order)}
    pairs = sorted(report.pairs, key=lambda p: sorted((rank[p.line_a], rank[p.line_b])))
    summary = (len(report.pairs), report.positive_count, report.positive_fraction)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# lines"])
        w.writerow(LINE_COLUMNS)
        for s in ordered:
            w.writerow([s.line_id, s.name, *(format(x, ".17g") for x in (s.pi, s.sigma, s.psi, s.kpss.statistic)), s.kpss.bandwidth, str(s.kpss.passed).lower()])
        w.writerow(["# pairs"])
        w.writerow(PAIR_COLUMNS)
        for p in pairs:
            w.writerow([p.line_a, p.line_b, *(format(x, ".17g") for x in (p.rho, p.b, p.b_rho)), str(p.region_exists).lower()])
        w.writerow(["# matrix"])
        w.writerow(["", *order])
        for i, row in zip(order, matrix):
            w.writerow([i, *row])
        w.writerow(["# summary"])
        w.writerow(["pairs", "positive", "fraction"])
        w.writerow([summary[0], summary[1], format(summary[2], ".17g")])
        return buf.getvalue()
    if fmt != "text":
        raise ValidationError(f"format must be 'text' or 'csv', got {fmt!r}")

    out = []
    width = max(len(s.line_id) for s in ordered)
    out.append(f"{'line':<{width}}  {'pi':>14}  {'sigma':>14}  {'psi':>8}  {'kpss':>7}  stationary  name")
    for s in ordered:
        out.append(
            f"{s.line_id:<{width}}  {s.pi:>14.6g}  {s.sigma:>14.6g}  {s.psi:>8.4f}  {s.kpss.statistic:>7.3f}  "
            f"{'yes' if s.kpss.passed else 'no':<10}  {s.name}"
        )
    out.append("")
    cell = max(width, 1)
    out.append(" " * width + "  " + " ".join(f"{j:>{cell}}" for j in order))
    for i, row in zip(order, matrix):
        out.append(f"{i:<{width}}  " + " ".join(f"{c:>{cell}}" for c in row))
    out.append("")
    out.append(f"pairs with b*rho < 1: {summary[1]} of {summary[0]} ({100 * summary[2]:.2f}%)")
    if report.pairs:
        lo = min(report.pairs, key=lambda p: p.rho)
        hi = max(report.pairs, key=lambda p: p.rho)
        out.append(f"min rho {lo.rho:.2f} ({lo.line_a}, {lo.line_b}); max rho {hi.rho:.2f} ({hi.line_a}, {hi.line_b})")
    return "\n".join(out) + "\n"


def read_line_block(text: str) -> list[LineStats]:
    """Parse the per-line block of a CSV report back into :class:`LineStats`."""
    rows = list(csv.reader(io.StringIO(text)))
    try:
        start = rows.index(["# lines"]) + 1
    except ValueError:
        raise MalformedRow("no '# lines' section") from None
    if tuple(rows[start]) != LINE_COLUMNS:
        raise MalformedRow(f"unexpected line header {rows[start]}", line=start + 1)
    out = []
    for offset, row in enumerate(rows[start + 1:], start=start + 2):
        if not row or row[0].startswith("#"):
            break
        try:
            lid, name, pi, sigma, psi, stat, bw, passed = row
            out.append(LineStats(lid, name, float(pi), float(sigma), float(psi), KpssResult(float(stat), int(bw), passed == "true")))
        except ValueError as exc:
            raise MalformedRow(str(exc), line=offset) from None
    return out
