from dataclasses import replace

import numpy as np
import pytest

from chainsq.chain import DisorderSpec, LinearChainParams, SqueezedBathSpec, eigenmode_analysis
from chainsq.errors import InvalidSpec
from chainsq.experiments import (
    Scenario,
    SweepSpec,
    compare_full_vs_effective,
    disorder_monte_carlo,
    golden_section_max,
    make_grid,
    optimize_detuning,
    optimize_xi,
    projection_spread,
    run_point,
    size_scan,
    sweep,
    with_parameter,
)

from reference import IDEAL_EN, IDEAL_PARAMS, cqed_scenario, ideal_scenario, om_scenario


def test_sweep_spec_validation():
    s = ideal_scenario()
    with pytest.raises(InvalidSpec):
        SweepSpec(s, "gamma", ())
    with pytest.raises(InvalidSpec):
        SweepSpec(s, "gamma", (0.1, 0.3, 0.2))
    with pytest.raises(InvalidSpec):
        SweepSpec(s, "colour", (0.1,))
    assert SweepSpec(s, "gamma", (0.3, 0.2)).grid == (0.3, 0.2)
    with pytest.raises(InvalidSpec):
        make_grid(1, 2, 3, "cubic")
    assert make_grid(1e-4, 1, 5, "log") == pytest.approx((1e-4, 1e-3, 1e-2, 1e-1, 1))


def test_scenario_validation():
    with pytest.raises(InvalidSpec):
        Scenario("ideal", IDEAL_PARAMS, 2)
    with pytest.raises(InvalidSpec):
        Scenario("optomechanical", IDEAL_PARAMS, 2)
    with pytest.raises(InvalidSpec):
        Scenario("trapped-ion", IDEAL_PARAMS, 2, bath=SqueezedBathSpec.pure(1, 1))
    with pytest.raises(InvalidSpec):
        with_parameter(ideal_scenario(), "kappa", 0.1)
    with pytest.raises(InvalidSpec):
        with_parameter(ideal_scenario(), "N", 2.5)


def test_gamma_to_zero_recovers_ideal_value():
    results = sweep(SweepSpec(ideal_scenario(), "gamma", (1e-9, 1e-3, 1e-1)))
    assert np.allclose(results[0].pair_EN, IDEAL_EN, atol=1e-6)
    assert np.all(results[1].pair_EN > results[2].pair_EN)
    assert all(r.ok and r.stable and r.unique for r in results)


def test_unstable_point_is_flagged_not_fatal():
    resonant = ideal_scenario(gamma=0.0, params=LinearChainParams(1.0, 0.0, 0.0))
    results = sweep(SweepSpec(resonant, "Delta", (-0.4, 0.0)))
    assert results[0].ok
    assert not results[1].ok and results[1].stable is False and results[1].pair_EN is None


def test_provenance_allows_standalone_rerun():
    s = ideal_scenario()
    spec = SweepSpec(s, "gamma", (1e-3, 1e-2))
    res = sweep(spec, seed=9)[1]
    assert res.provenance["spec_hash"] == with_parameter(s, "gamma", 1e-2).digest()
    assert res.provenance["seed"] == 9
    again = run_point(with_parameter(s, "gamma", 1e-2), "gamma", 1e-2, seed=9)
    assert np.array_equal(again.pair_EN, res.pair_EN)


def test_sweep_is_independent_of_threads():
    spec = SweepSpec(ideal_scenario(), "eta", tuple(np.linspace(0.2, 3, 7)))
    a = [r.pair_EN for r in sweep(spec, threads=1)]
    b = [r.pair_EN for r in sweep(spec, threads=3)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_optimize_detuning_single_pair_brute_force():
    params = LinearChainParams(1.0, 0.0, 0.0)
    opt = optimize_detuning(params, 1)
    grid = np.linspace(-2, 2, 4001)
    spreads = [projection_spread(params, 1, d) for d in grid]
    assert opt.spread <= min(spreads) + 1e-4
    # centre weights are Δ²/(2η²+Δ²) for the zero mode and η²/(2η²+Δ²) for the others
    assert abs(opt.Delta) == pytest.approx(1.0, abs=1e-3)
    assert np.allclose(np.abs(opt.analysis.projections), 1 / np.sqrt(3), atol=1e-3)


def test_optimize_detuning_refinement_improves_grid():
    params = replace(IDEAL_PARAMS, Delta=0.0)
    coarse = optimize_detuning(params, 4, coarse_points=41, refine_factor=1)
    fine = optimize_detuning(params, 4, coarse_points=41, refine_factor=10)
    assert fine.spread <= coarse.spread
    assert fine.Delta == pytest.approx(-0.421, abs=0.01)


def test_optimize_detuning_scales_with_coupling():
    # the projections depend on Δ/η and δ/η only, so the optimum shrinks with η
    ref = optimize_detuning(IDEAL_PARAMS, 4)
    weak = optimize_detuning(LinearChainParams(1e-3, 0.0, 1e-4), 4)
    assert weak.Delta == pytest.approx(1e-3 * ref.Delta, rel=1e-9)


def test_detuning_objective_ignores_eigenvector_signs():
    ana = eigenmode_analysis(IDEAL_PARAMS.expand(3))
    flipped = replace(ana, projections=-ana.projections)
    assert flipped.spread == ana.spread


def test_golden_section():
    x, fx = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 1e-6)
    assert x == pytest.approx(0.3, abs=1e-6) and fx == pytest.approx(0.0, abs=1e-12)


def test_disorder_zero_range_reproduces_reference():
    res = disorder_monte_carlo(ideal_scenario(), DisorderSpec(0.0, 0.0, 5, seed=1))
    assert np.allclose(res.realizations, res.reference, atol=1e-14)
    assert res.unstable_count == 0 and res.median_degradation() == pytest.approx(0.0, abs=1e-14)


def test_disorder_is_reproducible():
    spec = DisorderSpec(0.05, 0.05, 8, seed=3)
    a = disorder_monte_carlo(ideal_scenario(), spec)
    b = disorder_monte_carlo(ideal_scenario(), spec, threads=3)
    assert np.array_equal(a.realizations, b.realizations)
    assert a.fraction_all_entangled() == 1.0


def test_disorder_needs_ideal_model():
    with pytest.raises(InvalidSpec):
        disorder_monte_carlo(om_scenario(), DisorderSpec(0.01, 0.01, 2))


def test_size_scan_without_dissipation_is_flat():
    rows = size_scan(ideal_scenario(gamma=0.0), [1, 3, 5], coarse_points=101)
    for row in rows:
        assert len(row.pair_EN) == row.N
        assert np.allclose(row.pair_EN, IDEAL_EN, atol=1e-8)


def test_comparison_without_squeezing_drive_is_zero():
    spec = SweepSpec(om_scenario(E_minus=0.0), "gamma", (1e-6, 1e-5))
    cmp = compare_full_vs_effective(spec)
    for point in cmp.points:
        assert np.all(point.full.pair_EN == 0) and np.all(point.effective.pair_EN == 0)
    assert cmp.max_deviation == 0.0


def test_xi_optimum_beats_neighbours():
    s = cqed_scenario()
    opt = optimize_xi(s)
    assert 0.05 < opt.xi < 0.99
    for xi in (opt.xi - 0.05, opt.xi + 0.05):
        if 0.05 <= xi <= 0.99:
            r = run_point(with_parameter(s, "xi", xi), "xi", xi)
            assert np.mean(r.pair_EN) <= opt.mean_EN + 1e-9


def test_cqed_sweep_reports_ancilla_occupancy():
    res = sweep(SweepSpec(cqed_scenario(), "gamma", (1e-6,), optimize_xi=True))[0]
    assert res.ok and res.diagnostics["ancilla_occupancy"] <= 0.02
