"""Acceptance criteria 1-11, one test each.

Every test prints a single ``PASS``/``FAIL`` line with its runtime; the lines
are repeated in the pytest terminal summary.
"""

import contextlib
import csv
import os
import time
import timeit
from pathlib import Path

import numpy as np
import pytest
from scipy import stats as sps

from jointpricing import (
    ProductKind,
    ProductSpec,
    RiskSpec,
    Verdict,
    calibrate_gamma,
    competitiveness_region,
    critical_threshold,
    decide_by_demand_threshold,
    decide_by_reaction_bands,
    fit_li_lee,
    ingest_losses,
    kpss_statistic,
    monitoring_interval,
    pairwise_screen,
    reference_pair,
    risk_reduction_gap,
    simulate_scenarios,
    summarize,
    sweep_demand_share,
)
from jointpricing import cli
from jointpricing import market_model as mm
from jointpricing import mortality_sim as ms
from jointpricing.pricing_core import portfolio_risk_gap

from oracles import as_pair, draw_market, draw_pairs, golden_min, golden_min_mp, psi_direct

RESULTS = []
SES_ENV = "JOINTPRICING_SES_EXTRACT"
DRAWS = 10_000


@contextlib.contextmanager
def criterion(number, title):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        line = f"{status} criterion {number:>2}: {title} ({time.perf_counter() - start:.2f} s)"
        RESULTS.append(line)
        print("\n" + line)


@pytest.fixture(scope="module")
def draws():
    return draw_pairs(np.random.default_rng(1234), DRAWS)


def psi_rows(rows, scale, n):
    return psi_direct(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4], scale, n)


def test_criterion_01_reaction_bands():
    with criterion(1, "reaction-band thresholds of the reference pair"):
        pair, risk = reference_pair(), RiskSpec(0.5, 1.686)
        bands = mm.reaction_bands(pair, risk)
        assert bands["q_b_joint"] == pytest.approx(2.12, abs=0.01)
        assert bands["q_a_joint_below"] == pytest.approx(2.01, abs=0.01)
        assert bands["q_a_joint_above"] == pytest.approx(0.95, abs=0.005)
        best = min(timeit.repeat(lambda: mm.reaction_bands(pair, risk), number=100, repeat=5)) / 100
        assert best < 1e-3


def test_criterion_02_minimum_against_golden_section(draws):
    with criterion(2, f"closed-form minimum vs golden section, {DRAWS} draws"):
        start = time.perf_counter()
        risk = RiskSpec(0.5, 2.0)
        reports = [competitiveness_region(as_pair(r), risk) for r in draws]
        n_min = np.array([r.n_min for r in reports])
        psi_min = np.array([r.psi_min for r in reports])
        n_gold, psi_gold = golden_min(lambda n: psi_rows(draws, risk.scale, n), np.zeros(DRAWS), np.ones(DRAWS))
        n_gold, psi_gold = n_gold.astype(float), psi_gold.astype(float)
        # very flat minima sit below long-double resolution in n; redo those at 40 digits
        for i in np.flatnonzero(np.abs(n_min - n_gold) > 1e-9):
            n_gold[i], psi_gold[i] = golden_min_mp(draws[i], risk.scale)
        assert all(r.exists for r in reports)
        assert np.max(np.abs(n_min - n_gold)) <= 1e-8
        assert np.max(np.abs(psi_min / psi_gold - 1)) <= 1e-10
        assert time.perf_counter() - start < 10


def test_criterion_03_critical_threshold(draws):
    with criterion(3, "loading at the critical threshold equals the safer line's"):
        rows = np.array([r for r in draws if as_pair(r).b > 1.0])
        n_ct = np.array([critical_threshold(as_pair(r)) for r in rows])
        psi_a = rows[:, 1] / rows[:, 0]
        at = psi_rows(rows, 1.0, n_ct).astype(float)
        assert np.max(np.abs(at / psi_a - 1)) <= 1e-10
        lo, hi = n_ct - 1e-4, n_ct + 1e-4
        left, right = lo >= 0.0, hi <= 1.0
        assert np.all(psi_rows(rows[left], 1.0, lo[left]) < psi_a[left])
        assert np.all(psi_rows(rows[right], 1.0, hi[right]) > psi_a[right])
        assert left.sum() > 0.9 * len(rows) and right.sum() > 0.5 * len(rows)


def test_criterion_04_monitoring_interval(draws):
    with criterion(4, "monitoring-interval endpoints hit the charged loading"):
        rng = np.random.default_rng(4)
        risk = RiskSpec(0.5, 2.0)
        worst = 0.0
        for row, u in zip(draws, rng.uniform(0.0, 1.0, DRAWS)):
            pair = as_pair(row)
            rep = competitiveness_region(pair, risk)
            psi_star = rep.psi_a - u * (rep.psi_a - rep.psi_min)  # (psi_min, psi_a]
            if psi_star <= rep.psi_min:
                continue
            n_l, n_u = monitoring_interval(pair, risk, psi_star)
            assert n_l <= rep.n_min <= n_u
            got = psi_rows(row[None, :], risk.scale, np.array([n_l, n_u])).astype(float)
            worst = max(worst, float(np.max(np.abs(got - psi_star))) / max(1.0, psi_star))
            lo, hi = monitoring_interval(pair, risk, rep.psi_min)
            assert lo == hi == rep.n_min
        assert worst <= 1e-10


def test_criterion_05_premium_difference_forms():
    with criterion(5, f"two premium-difference forms agree, {DRAWS} draws"):
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(DRAWS):
            pair, risk, market = draw_market(rng)
            rep = competitiveness_region(pair, risk)
            psi = rep.psi_min + rng.uniform() * (rep.psi_b - rep.psi_min)
            quad, lin = mm.premium_difference_forms(pair, risk, market, psi)
            # absolute floor: one rounding of the largest term in the expansion
            floor = 1e-14 * mm._theta(pair, risk, market)[2]
            gap = max(abs(quad - lin) - floor, 0.0) / max(abs(quad), abs(lin))
            worst = max(worst, gap)
        assert worst <= 1e-9


def test_criterion_06_decision_soundness():
    with criterion(6, f"decisive verdicts match the equilibrium premium difference, {DRAWS} draws"):
        start = time.perf_counter()
        rng = np.random.default_rng(6)
        decisive = contradictions = 0
        for _ in range(DRAWS):
            pair, risk, market = draw_market(rng)
            decisions = [rule(pair, risk, market) for rule in (decide_by_demand_threshold, decide_by_reaction_bands)]
            # both rules solve the same equilibrium; check it rather than trusting it
            eq = decisions[0].equilibrium
            assert eq.psi_star == decisions[1].equilibrium.psi_star
            assert abs(eq.residual) <= 1e-10 * (1 + eq.psi_star)
            d_ptf = mm.premium_difference(pair, risk, market, eq.psi_star)
            for d in decisions:
                if d.verdict is Verdict.INDETERMINATE:
                    continue
                decisive += 1
                if (d.verdict is Verdict.JOINT) != (d_ptf > 0):
                    contradictions += 1
        assert contradictions == 0
        assert decisive > DRAWS // 10
        assert time.perf_counter() - start < 60


def test_criterion_07_sweep_patterns():
    with criterion(7, "sign patterns of the four preset reaction scenarios"):
        pair, risk = reference_pair(10.0), RiskSpec(0.5, 1.686)
        grid = mm.default_share_grid()
        assert np.allclose(grid, np.arange(1, 20) / 20)
        base = mm.MarketSpec(5e5, 5e5, 10, 10, 1.0, 1.0)
        signs = {}
        for qa, qb in mm.PRESET_REACTION_SCENARIOS:
            market = base.with_reactions(qa, qb)
            pts = sweep_demand_share(pair, risk, market, "linear", grid, 1e6)
            signs[(qa, qb)] = np.sign([p.rel_d_ptf for p in pts])
        assert np.all(signs[(0.5, 0.5)] < 0)
        assert np.all(signs[(3.0, 3.0)] > 0)
        assert np.all(signs[(0.5, 3.0)] > 0)
        flip = signs[(3.0, 0.5)]
        w_ct = mm.demand_critical_threshold(pair, risk, base.with_reactions(3.0, 0.5))
        assert flip[0] > 0 and flip[-1] < 0 and np.count_nonzero(np.diff(flip)) == 1
        assert np.all(flip[grid > w_ct] < 0)
        assert grid[0] < w_ct < grid[-1]


def test_criterion_08_subadditivity():
    with criterion(8, f"risk-reduction gap is never negative, {DRAWS} draws"):
        rng = np.random.default_rng(8)
        rows = draw_pairs(rng, DRAWS, region_only=False)
        rows[:3, 4] = [-1 + 1e-9, 0.999999, -1 + 1e-9]
        rows[3::7, 4] = 0.999999
        rows[4::7, 4] = -1 + 1e-9
        counts = 10 ** rng.uniform(0, 6, (DRAWS, 2))
        gaps = []
        for row, (na, nb) in zip(rows, counts):
            risk = RiskSpec(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.5, 3.0)))
            gaps.append(risk_reduction_gap(as_pair(row), risk, na, nb))
        assert min(gaps) >= 0.0
        assert portfolio_risk_gap(0.3, 0.7, 1.0, 5.0, 9.0, RiskSpec(0.5, 1.686)) == 0.0


def test_criterion_09_mortality_pipeline():
    with criterion(9, "mortality fit, simulation and value-at-risk calibration"):
        start = time.perf_counter()
        # exact recovery
        gen = ms.synthetic_params(seed=11)
        fit = fit_li_lee(*ms.synthetic_datasets(gen))
        for name in ("alpha", "beta", "kappa", "beta_common", "kappa_common"):
            assert np.max(np.abs(getattr(fit, name) - getattr(gen, name))) <= 1e-8

        def pipeline(fixture, n_sims, seed):
            a, b = (ms.read_mortality_csv(cli.data_path(f), p) for f, p in zip(cli.DATA_FILES[fixture], "AB"))
            params = fit_li_lee(a, b)
            sc = simulate_scenarios(params, 30, n_sims, seed)
            va = ms.product_values(sc, ProductSpec(ProductKind.TERM_ANNUITY, 60, 30), "A")
            vb = ms.product_values(sc, ProductSpec(ProductKind.TERM_ASSURANCE, 30, 30), "B")
            return va, vb

        # determinism and sign of the correlation
        first = summarize(*pipeline("common", 20_000, 42), seed=42)
        second = summarize(*pipeline("common", 20_000, 42), seed=42)
        assert first == second
        assert first.rho < 0

        # near-Gaussian values from the low-volatility fixture, and exactly Gaussian samples
        z95 = float(sps.norm.ppf(0.95))
        gamma = calibrate_gamma(*pipeline("lowvol", 100_000, 1), 0.5, 0.95)
        assert gamma == pytest.approx(z95, rel=0.02)
        g = np.random.default_rng(9).multivariate_normal([20.0, 0.6], [[1.0, -0.04], [-0.04, 0.0025]], 100_000)
        assert calibrate_gamma(g[:, 0], g[:, 1], 0.5, 0.95) == pytest.approx(z95, rel=0.02)
        assert time.perf_counter() - start < 120


def test_criterion_10_kpss_size_and_power():
    with criterion(10, "KPSS rejection rates over 1000 seeds"):
        start = time.perf_counter()
        null = alt = 0
        for seed in range(1000):
            e = np.random.default_rng(seed).standard_normal(200)
            null += not kpss_statistic(e).passed
            alt += not kpss_statistic(np.cumsum(e)).passed
        assert null / 1000 <= 0.08
        assert alt / 1000 >= 0.95
        assert time.perf_counter() - start < 30


def _matrix_block(text):
    rows = list(csv.reader(text.split("# matrix\n")[1].split("# summary")[0].strip().splitlines()))
    return rows[0][1:], [r[1:] for r in rows[1:]]


def test_criterion_11_screening_matrix(tmp_path):
    with criterion(11, "screening matrix on the bundled 10-line data"):
        assert cli.main(["screen", "--fixture", "losses10", "--out", str(tmp_path), "--no-plots"]) == 0
        header, cells = _matrix_block((tmp_path / "screen_report.csv").read_text())
        assert len(header) == 10 and len(cells) == 10 and all(len(r) == 10 for r in cells)
        off = [cells[i][j] for i in range(10) for j in range(i + 1, 10)]
        assert len(off) == 45 and set(off) <= {"+", "-"}
        pair_rows = (tmp_path / "screen_report.csv").read_text().split("# pairs\n")[1].split("# matrix")[0]
        assert len(pair_rows.strip().splitlines()) == 1 + 45


@pytest.mark.skipif(not os.environ.get(SES_ENV), reason=f"set {SES_ENV} to a long-format loss extract")
def test_criterion_11_user_extract():
    with criterion(11, "screening of the user-supplied loss extract"):
        report = pairwise_screen(ingest_losses(Path(os.environ[SES_ENV])))
        assert len(report.pairs) == 45
        assert report.positive_count == 34
        assert report.positive_fraction == 34 / 45  # 75.56% rounded, 75.55% truncated
        lo = min(report.pairs, key=lambda p: p.rho)
        hi = max(report.pairs, key=lambda p: p.rho)
        assert round(lo.rho, 2) == -0.34 and round(hi.rho, 2) == 0.86
