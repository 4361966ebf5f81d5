import pytest

from cbre2.presets import (
    coupling_scenario,
    env_only_scenario,
    mixed_scenario,
    pareto_scenario,
)
from cbre2.verify import (
    EstimateReport,
    coupling_monotonicity_report,
    estimate_moments,
    martingale_test,
    richardson_bias,
    se_scaling_check,
    truncation_convergence_report,
    write_report_csv,
)


def test_estimate_moments_env_only_passes():
    sc = env_only_scenario()
    rep = estimate_moments(sc, 1, 20_000, sc.seed)
    assert rep.passed
    assert rep.notes == ""
    assert {r.statistic for r in rep.rows} == {"m_10", "m_01"}


def test_estimate_moments_mixed_degree2():
    sc = mixed_scenario(step=2e-3)
    rep = estimate_moments(sc, 2, 20_000, sc.seed)
    assert rep.passed
    assert len(rep.rows) == 5 * 5  # five monomials, five times


def test_estimate_moments_variance_unreliable_note():
    sc = pareto_scenario()
    rep = estimate_moments(sc, 2, 4_000, sc.seed)
    assert "variance-unreliable" in rep.notes
    # infinite-moment monomials are not reported as rows
    stats = {r.statistic for r in rep.rows}
    assert "m_20" in stats or "m_11" in stats


def test_martingale_report_passes():
    sc = mixed_scenario(step=2e-3)
    rep = martingale_test(sc, [0.25, 0.5, 0.75, 1.0], 20_000, sc.seed + 1)
    assert rep.passed
    assert len(rep.rows) == 8


def test_martingale_frozen_process_exact():
    from cbre2.branching import BranchingSpec
    from cbre2.env import LevyEnvSpec
    from cbre2.scenario import ScenarioConfig

    sc = ScenarioConfig(
        environment=LevyEnvSpec(),
        branching=BranchingSpec(),
        x0=(1.5, 2.5),
        horizon=1.0,
        step=0.1,
    )
    rep = martingale_test(sc, [0.5, 1.0], 200, 0)
    for r in rep.rows:
        assert r.se == 0.0 and r.ok


def test_coupling_report_zero_violations():
    sc = coupling_scenario()
    rep = coupling_monotonicity_report(sc, 2.0, 5.0, 2_000, sc.seed)
    assert rep.passed
    viol = [r for r in rep.rows if r.statistic == "ordering_violations"]
    assert sum(r.estimate for r in viol) == 0.0


def test_coupling_report_with_diffusion_uses_mean_gap():
    sc = mixed_scenario(step=5e-3)
    rep = coupling_monotonicity_report(sc, 2.0, 5.0, 4_000, sc.seed)
    stats = {r.statistic for r in rep.rows}
    assert stats == {"mean_gap_1", "mean_gap_2"}
    assert rep.passed


def test_coupling_k_order_validated():
    with pytest.raises(ValueError):
        coupling_monotonicity_report(coupling_scenario(), 5.0, 2.0, 10, 0)


def test_truncation_convergence_decreasing():
    sc = pareto_scenario()
    rep = truncation_convergence_report(sc, (2, 4, 8, 16), 4_000, sc.seed)
    assert rep.passed
    gaps = [r.estimate for r in rep.rows if r.statistic.startswith("l1_gap")]
    assert gaps == sorted(gaps, reverse=True)


def test_truncation_gap_zero_when_inactive():
    sc = coupling_scenario()  # atoms only, largest norm 3
    rep = truncation_convergence_report(sc, (4.0, 8.0), 500, sc.seed)
    gaps = [r.estimate for r in rep.rows if r.statistic.startswith("l1_gap")]
    assert gaps == [0.0, 0.0]


def test_reports_reproducible_and_csv_stable(tmp_path):
    sc = pareto_scenario()
    rep1 = truncation_convergence_report(sc, (2, 4), 1_000, sc.seed)
    rep2 = truncation_convergence_report(sc, (2, 4), 1_000, sc.seed)
    assert rep1.rows == rep2.rows
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_report_csv(p1, rep1)
    write_report_csv(p2, rep2)
    assert p1.read_bytes() == p2.read_bytes()


def test_se_scaling_with_path_budget():
    sc = env_only_scenario(step=0.01)
    se1, se4 = se_scaling_check(sc, 4_000, 5, factor=4)
    assert abs(se4 / se1 - 0.5) < 0.2 * 0.5


def test_richardson_bias_coefficient_is_small():
    """The splitting scheme's first-moment bias coefficient is well under 2."""
    sc = mixed_scenario(step=0.02)
    c = richardson_bias(sc, "X1", 30_000, 17)
    assert c < 2.0


def test_report_pass_flag_consistency():
    rep = EstimateReport("demo", se_multiple=3.0)
    rep.add(1.0, "s", 1.0, 0.05, 1.2)  # gap 0.2 > 3 * 0.05
    assert not rep.rows[-1].ok and not rep.passed
    rep2 = EstimateReport("demo2")
    rep2.add(1.0, "s", 1.05, 0.1, 1.2)
    assert rep2.rows[-1].ok
    assert rep2.rows[-1].z == pytest.approx(-1.5)
