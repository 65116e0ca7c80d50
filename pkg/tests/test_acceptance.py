"""
Acceptance suite. Each test prints one PASS/FAIL line and the lines are
collected again in the terminal summary.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import argrelextrema

from chainsq.chain import (
    ChainSpec,
    DisorderSpec,
    LinearChainParams,
    analytic_steady_state,
    build_generators,
    chain_report,
    eigenmode_analysis,
    squeezing_metrics,
    steady_state,
)
from chainsq.cli import main
from chainsq.config import RunConfig
from chainsq.experiments import (
    SweepSpec,
    compare_full_vs_effective,
    disorder_monte_carlo,
    evaluate,
    optimize_detuning,
    size_scan,
    sweep,
    with_parameter,
)
from chainsq.gaussian import is_stable
from chainsq.implementations import effective_bath_om, linearize_om
from chainsq.validation import fock_checks, max_abs_diff, random_unique_chain

from reference import HW_GAMMAS, IDEAL_BATH, IDEAL_EN, IDEAL_PARAMS, TEMPERATURES, cqed_scenario, ideal_scenario, om_scenario

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
DRAWS = 10
SIZES = range(1, 10)


@pytest.fixture(scope="module")
def random_chains():
    rng = np.random.default_rng(20240601)
    return [(N, random_unique_chain(rng, N, IDEAL_BATH).expand(N)) for N in SIZES for _ in range(DRAWS)]


def first_pair(scenario):
    pairs, *_ = evaluate(scenario, full_report=False)
    return pairs[0]


def test_analytic_oracle_equivalence(random_chains, acceptance_line):
    worst = max(max_abs_diff(steady_state(c, IDEAL_BATH), analytic_steady_state(c, IDEAL_BATH).covariance) for _, c in random_chains)
    passed = worst <= 1e-10
    acceptance_line(1, passed, f"max |σ_lyap - σ_analytic| = {worst:.2e} over {len(random_chains)} chains (tol 1e-10)")
    assert passed


def test_ideal_entanglement_value(random_chains, acceptance_line):
    worst = 0.0
    for _, chain in random_chains:
        pairs = chain_report(chain, IDEAL_BATH).opposite_pairs().values()
        worst = max(worst, max(abs(v - IDEAL_EN) for v in pairs))
    dB = squeezing_metrics(IDEAL_BATH)[1]
    # 3.3072 is the four-digit truncation of -log2(5 - 2√6) = 3.30728
    passed = worst <= 1e-6 and abs(dB - 9.96) <= 0.05 and abs(IDEAL_EN - 3.3072) <= 1e-4
    acceptance_line(2, passed, f"max |E_N + log2(5 - 2√6)| = {worst:.2e} (tol 1e-6), squeezing {dB:.3f} dB")
    assert passed


def test_off_pair_separability(random_chains, acceptance_line):
    worst = max(chain_report(c, IDEAL_BATH).max_other() for _, c in random_chains)
    dissipative = chain_report(IDEAL_PARAMS.expand(4, gamma=0.01), IDEAL_BATH).max_other()
    passed = max(worst, dissipative) <= 1e-9
    acceptance_line(3, passed, f"max off-pair E_N = {worst:.2e} (random chains), {dissipative:.2e} (gamma = 0.01)")
    assert passed


def test_reference_chain_trends(acceptance_line):
    base = ideal_scenario(gamma=0.01)
    gammas = np.logspace(-4, 0, 41)
    e_gamma = np.array([first_pair(with_parameter(base, "gamma", g)) for g in gammas])
    gamma_ok = bool(np.all(np.diff(e_gamma) <= 0))

    etas = np.logspace(np.log10(0.05), 1, 121)
    e_eta = np.array([first_pair(with_parameter(base, "eta", v)) for v in etas])
    k = int(np.argmax(e_eta))
    eta_ok = 0 < k < len(etas) - 1

    deltas = np.linspace(-2, 2, 801)
    e_delta = []
    for d in deltas:
        s = with_parameter(base, "Delta", d)
        e_delta.append(first_pair(s) if is_stable(build_generators(s.chain_spec(), s.bath)).stable else 0.0)
    maxima = argrelextrema(np.array(e_delta), np.greater)[0]
    delta_ok = len(maxima) >= 2

    passed = gamma_ok and eta_ok and delta_ok
    acceptance_line(
        4, passed,
        f"gamma non-increasing={gamma_ok}, eta argmax={etas[k]:.3g} interior={eta_ok}, Delta local maxima={len(maxima)}",
    )
    assert passed


def test_uniqueness_criterion(acceptance_line):
    resonant = ChainSpec(4, np.ones(4), np.zeros(4))
    ana = eigenmode_analysis(resonant)
    stab = is_stable(build_generators(resonant, IDEAL_BATH))
    resonant_ok = (not ana.unique) and ana.min_abs_projection <= 1e-10 and abs(stab.max_real) <= 1e-10
    ref = IDEAL_PARAMS.expand(4, gamma=0.01)
    ref_ok = eigenmode_analysis(ref).unique and is_stable(build_generators(ref, IDEAL_BATH)).stable
    passed = resonant_ok and ref_ok
    acceptance_line(
        5, passed,
        f"resonant min|p| = {ana.min_abs_projection:.1e}, max Re λ = {stab.max_real:.1e}; reference unique and stable = {ref_ok}",
    )
    assert passed


def test_detuning_optimization(acceptance_line):
    params = LinearChainParams(1.0, 0.0, 0.1)
    opt = optimize_detuning(params, 4)
    base = ideal_scenario(gamma=0.01, params=params)

    def mean_EN(d):
        s = with_parameter(base, "Delta", d)
        if not is_stable(build_generators(s.chain_spec(), s.bath)).stable:
            return 0.0
        pairs, *_ = evaluate(s, full_report=False)
        return float(np.mean(pairs))

    at_opt = mean_EN(opt.Delta)
    best = max(mean_EN(d) for d in np.linspace(-2, 2, 4001))
    passed = abs(opt.Delta + 0.4) <= 0.05 and at_opt >= 0.98 * best
    acceptance_line(6, passed, f"Delta* = {opt.Delta:.4f}, mean E_N {at_opt:.4f} vs grid max {best:.4f}")
    assert passed


def test_size_scan_monotone(acceptance_line):
    rows = size_scan(ideal_scenario(gamma=0.01, params=replace(IDEAL_PARAMS, Delta=0.0)), list(SIZES), search=(-2.0, 2.0))
    worst = 0.0
    for j in SIZES:
        series = [row.pair_EN[j - 1] for row in rows if row.N >= j]
        if len(series) > 1:
            worst = max(worst, float(np.max(np.diff(series))))
    passed = worst <= 1e-6
    acceptance_line(7, passed, f"largest increase with N = {worst:.2e} (tol 1e-6)")
    assert passed


def test_disorder_asymmetry(acceptance_line):
    base = ideal_scenario(gamma=0.01)
    coupling = disorder_monte_carlo(base, DisorderSpec(0.05, 0.0, 200, seed=0))
    detuning = disorder_monte_carlo(base, DisorderSpec(0.0, 0.05, 200, seed=0))
    a, b = coupling.median_degradation(), detuning.median_degradation()
    passed = a > b
    acceptance_line(8, passed, f"median degradation: coupling disorder {a:.4f} > detuning disorder {b:.4f}")
    assert passed


def test_optomechanical_consistency(acceptance_line):
    cfg = RunConfig.load(CONFIGS / "optomechanical.json")
    lin = linearize_om(cfg.scenario().implementation())
    Gp_err = abs(abs(lin.G_plus) / 8e-3 - 1)
    xi_err = abs(lin.xi / 0.85 - 1)
    couplings_ok = Gp_err <= 5e-3 and xi_err <= 5e-3

    bath = effective_bath_om(lin.G_plus, lin.G_minus, cfg.scenario().hardware["kappa"])
    purity = abs(abs(bath.m_bar) ** 2 - bath.n_bar * (bath.n_bar + 1))
    purity_ok = purity <= 1e-12

    g_minus_dev = compare_full_vs_effective(cfg.sweep_spec()).max_deviation
    gamma_dev = {}
    for T in TEMPERATURES:
        spec = SweepSpec(om_scenario(temperature=T), "gamma", HW_GAMMAS, optimize_xi=True)
        gamma_dev[T] = compare_full_vs_effective(spec).max_deviation
    deviation_ok = g_minus_dev <= 0.05 and all(d <= 0.05 for d in gamma_dev.values())

    passed = couplings_ok and purity_ok and deviation_ok
    gamma_txt = ", ".join(f"{1e3 * T:g} mK {d:.3g}" for T, d in gamma_dev.items())
    acceptance_line(
        9, passed,
        f"|G+| err {Gp_err:.1e}, xi err {xi_err:.1e}, purity {purity:.1e}; "
        f"max deviation |G-| sweep {g_minus_dev:.3g}, gamma sweep [{gamma_txt}] (tol 0.05)",
    )
    assert couplings_ok and purity_ok
    assert deviation_ok


def test_circuit_qed_validity(acceptance_line):
    worst, points = 0.0, 0
    for T in TEMPERATURES:
        for res in sweep(SweepSpec(cqed_scenario(temperature=T), "gamma", HW_GAMMAS, optimize_xi=True)):
            assert res.ok, res.error
            worst = max(worst, res.diagnostics["ancilla_occupancy"])
            points += 1
    passed = worst <= 0.02
    acceptance_line(10, passed, f"max ancilla occupancy {worst:.4f} over {points} points (tol 0.02)")
    assert passed


def test_fock_convention_lock(acceptance_line):
    checks = fock_checks()
    moments = [c for c in checks if c.name.startswith("fock")]
    en = [c for c in checks if "E_N" in c.name]
    m_err = max(c.error for c in moments)
    e_err = max(c.error for c in en)
    passed = m_err <= 1e-5 and e_err <= 1e-4
    acceptance_line(11, passed, f"max moment error {m_err:.1e} over {len(moments)} checks, E_N error {e_err:.1e}")
    assert passed


def test_determinism_across_threads(tmp_path, acceptance_line):
    ideal = str(CONFIGS / "ideal.json")
    same = {}
    for command, stem in (("sweep", "sweep.csv"), ("disorder", "disorder.csv")):
        blobs = []
        for threads in (1, 4):
            out = tmp_path / f"{command}-{threads}"
            assert main([command, "--config", ideal, "--seed", "123", "--threads", str(threads), "--out", str(out)]) == 0
            blobs.append((out / stem).read_bytes())
        same[command] = blobs[0] == blobs[1]
    passed = all(same.values())
    acceptance_line(12, passed, f"byte-identical across 1 and 4 threads: {same}")
    assert passed
