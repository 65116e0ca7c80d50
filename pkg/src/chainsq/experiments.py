"""
Parameter sweeps, detuning optimization, disorder statistics and
full-vs-effective comparisons.

Everything runs on a :class:`Scenario`, a flat description of either the
ideal chain + squeezed bath or one of the hardware schemes. Independent
points are farmed out to a thread pool and merged back by index, so results
do not depend on the number of workers.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from . import implementations as impl
from .chain import (
    ChainSpec,
    DisorderSpec,
    LinearChainParams,
    SqueezedBathSpec,
    build_generators,
    disordered_chain,
    eigenmode_analysis,
    EigenmodeAnalysis,
    pair_entanglement,
    site_labels,
)
from .errors import ChainsqError, InvalidSpec, NotStable, Unstable
from .gaussian import EntanglementReport, entanglement_report, is_stable, solve_lyapunov

KINDS = ("ideal", "optomechanical", "circuit-qed", "cavity-array")
SWEEP_PARAMETERS = ("gamma", "eta", "Delta", "N", "G_minus", "xi", "kappa", "T")
XI_BOUNDS = (0.05, 0.99)
XI_TOL = 1e-3


@dataclass(frozen=True)
class Scenario:
    """
    One model configuration.

    ``hardware`` holds the scheme-specific fields (g, kappa, E_plus, E_minus,
    epsilon, omega0, omega0_si, n_a, ...) for the non-ideal kinds. ``temperature``
    (Kelvin) overrides ``nT`` when set.
    """

    kind: str
    chain: LinearChainParams
    N: int
    gamma: float = 0.0
    nT: float = 0.0
    temperature: float | None = None
    bath: SqueezedBathSpec | None = None
    hardware: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown model kind {self.kind!r}")
        if self.kind == "ideal" and self.bath is None:
            raise InvalidSpec("the ideal model needs a bath")
        if self.kind != "ideal" and not self.hardware:
            raise InvalidSpec(f"{self.kind} needs hardware parameters")

    def chain_spec(self) -> ChainSpec:
        return self.chain.expand(self.N, self.gamma, self.nT)

    def implementation(self) -> impl.ImplementationSpec:
        hw = dict(self.hardware)
        chain = self.chain_spec()
        if self.kind == "optomechanical":
            return impl.OptomechanicalSpec(chain, temperature=self.temperature, **hw)
        if self.kind == "circuit-qed":
            return impl.CircuitQedSpec(chain, temperature=self.temperature, **hw)
        if self.kind == "cavity-array":
            return impl.CavityArraySpec(chain, **hw)
        raise InvalidSpec("the ideal model has no hardware implementation")

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(asdict(self))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def with_parameter(scenario: Scenario, name: str, value: float) -> Scenario:
    """Copy of ``scenario`` with one swept parameter replaced."""
    if name == "gamma":
        return replace(scenario, gamma=float(value))
    if name == "eta":
        return replace(scenario, chain=replace(scenario.chain, eta=float(value)))
    if name == "Delta":
        return replace(scenario, chain=replace(scenario.chain, Delta=float(value)))
    if name == "N":
        if int(value) != value:
            raise InvalidSpec(f"N must be an integer, got {value}")
        return replace(scenario, N=int(value))
    if name == "T":
        return replace(scenario, temperature=float(value))
    if scenario.kind == "ideal":
        raise InvalidSpec(f"parameter {name!r} needs a hardware model")
    if name == "kappa":
        return replace(scenario, hardware={**scenario.hardware, "kappa": float(value)})
    if name in ("G_minus", "xi"):
        spec = scenario.implementation()
        spec = impl.with_G_minus(spec, value) if name == "G_minus" else impl.with_xi(spec, value)
        return replace(scenario, hardware={**scenario.hardware, "E_minus": spec.E_minus})
    raise InvalidSpec(f"unknown sweep parameter {name!r}")


@dataclass(frozen=True)
class RunResult:
    parameter: str
    value: float
    pair_EN: NDArray[np.float64] | None
    report: EntanglementReport | None
    unique: bool | None
    stable: bool | None
    max_real: float | None
    diagnostics: dict[str, float]
    provenance: dict[str, Any]
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def evaluate(scenario: Scenario, model: str = "full", full_report: bool = True) -> tuple:
    """
    Steady state of ``scenario``.

    ``model`` picks the full ancilla model or the effective bath for hardware
    kinds; it is ignored for the ideal kind. Returns (pair_EN, report,
    unique, stability report, diagnostics).
    """
    diag: dict[str, float] = {}
    if scenario.kind == "ideal":
        chain, bath = scenario.chain_spec(), scenario.bath
        gen = build_generators(chain, bath)
    else:
        spec = scenario.implementation()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", impl.ValidityWarning)
            c = impl.couplings(spec)
        chain = spec.resolved_chain()
        diag.update(G_plus_abs=abs(c.G_plus), G_minus_abs=abs(c.G_minus), xi=abs(c.G_minus) / abs(c.G_plus))
        if c.linearization is not None:
            diag.update(c.linearization.validity)
        try:
            bath = impl.effective_bath(spec, c)
        except Unstable:
            if model == "effective":
                raise
        else:
            diag.update(Gamma=bath.Gamma, n_bar=bath.n_bar, m_bar_abs=abs(bath.m_bar))
        if model == "effective":
            gen = build_generators(chain, bath)
        elif model == "full":
            gen = impl.ancilla_generators(chain, c.G_plus, c.G_minus, spec.kappa, c.n_ancilla)
        else:
            raise InvalidSpec(f"model must be 'full' or 'effective', got {model!r}")
    unique = eigenmode_analysis(chain).unique
    stab = is_stable(gen)
    if not stab.stable:
        raise NotStable(stab.max_real)
    sigma = solve_lyapunov(gen)
    if sigma.modes > chain.n_sites:
        diag["ancilla_occupancy"] = impl.ancilla_occupancy(sigma)
        sigma = impl.chain_block(sigma)
    pairs = pair_entanglement(sigma, chain.N)
    report = entanglement_report(sigma, site_labels(chain.N)) if full_report else None
    return pairs, report, unique, stab, diag


def run_point(
    scenario: Scenario,
    parameter: str,
    value: float,
    model: str = "full",
    seed: int | None = None,
    full_report: bool = True,
) -> RunResult:
    prov = {"spec_hash": scenario.digest(), "seed": seed, "parameter": parameter, "value": value, "model": model}
    try:
        pairs, report, unique, stab, diag = evaluate(scenario, model, full_report)
    except NotStable as exc:
        return RunResult(parameter, value, None, None, None, False, exc.max_real, {}, prov, str(exc))
    except ChainsqError as exc:
        return RunResult(parameter, value, None, None, None, None, None, {}, prov, str(exc))
    return RunResult(parameter, value, pairs, report, unique, True, stab.max_real, diag, prov)


def resolve_threads(threads: int) -> int:
    return max(1, os.cpu_count() or 1) if threads == 0 else max(1, int(threads))


def parallel_map(func: Callable, items: Sequence, threads: int = 1) -> list:
    """Ordered map over ``items``; the result order never depends on scheduling."""
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    parameter: str
    grid: tuple[float, ...]
    model: str = "full"
    optimize_xi: bool = False
    optimize_delta: bool = False

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise InvalidSpec(f"unknown sweep parameter {self.parameter!r}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise InvalidSpec("sweep grid is empty")
        steps = np.diff(grid)
        if len(grid) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise InvalidSpec("sweep grid must be strictly monotone")
        object.__setattr__(self, "grid", grid)


def make_grid(start: float, stop: float, num: int, scale: str = "linear") -> tuple[float, ...]:
    if scale == "log":
        return tuple(np.logspace(math.log10(start), math.log10(stop), int(num)))
    if scale == "linear":
        return tuple(np.linspace(start, stop, int(num)))
    raise InvalidSpec(f"grid scale must be 'linear' or 'log', got {scale!r}")


def prepare_point(spec: SweepSpec, value: float) -> Scenario:
    s = with_parameter(spec.scenario, spec.parameter, value)
    if spec.optimize_delta:
        s = replace(s, chain=replace(s.chain, Delta=optimize_detuning(s.chain, s.N).Delta))
    if spec.optimize_xi:
        s = with_parameter(s, "xi", optimize_xi(s, spec.model).xi)
    return s


def sweep(spec: SweepSpec, seed: int | None = None, threads: int = 1) -> list[RunResult]:
    def one(value):
        try:
            s = prepare_point(spec, value)
        except ChainsqError as exc:
            prov = {"spec_hash": spec.scenario.digest(), "seed": seed, "parameter": spec.parameter, "value": value}
            return RunResult(spec.parameter, value, None, None, None, None, None, {}, prov, str(exc))
        return run_point(s, spec.parameter, value, spec.model, seed)

    return parallel_map(one, spec.grid, threads)


# detuning optimization


@dataclass(frozen=True)
class DetuningOptimum:
    Delta: float
    spread: float
    analysis: EigenmodeAnalysis


def projection_spread(params: LinearChainParams, N: int, Delta: float) -> float:
    return eigenmode_analysis(replace(params, Delta=Delta).expand(N)).spread


def _best_on_grid(params, N, grid) -> tuple[float, float]:
    spreads = np.array([projection_spread(params, N, d) for d in grid])
    best = spreads.min()
    # ties broken toward smaller |Δ|
    candidates = grid[spreads <= best + 1e-12]
    d = candidates[np.argmin(np.abs(candidates))]
    return float(d), float(best)


def optimize_detuning(
    params: LinearChainParams,
    N: int,
    search: tuple[float, float] | None = None,
    coarse_points: int = 401,
    refine_factor: int = 10,
) -> DetuningOptimum:
    """
    Δ minimizing the spread max|p_k| - min|p_k| of the central-site projections.

    A coarse grid over ``search`` (default ±2η) is followed by one refinement
    pass on a grid ``refine_factor`` times finer around the coarse optimum.
    """
    lo, hi = search if search is not None else (-2.0 * params.eta, 2.0 * params.eta)
    coarse = np.linspace(lo, hi, int(coarse_points))
    d0, _ = _best_on_grid(params, N, coarse)
    step = (hi - lo) / (coarse_points - 1)
    fine = np.linspace(max(lo, d0 - step), min(hi, d0 + step), 2 * refine_factor + 1)
    d, spread = _best_on_grid(params, N, fine)
    analysis = eigenmode_analysis(replace(params, Delta=d).expand(N))
    return DetuningOptimum(d, spread, analysis)


# ξ optimization for hardware models

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c, d = b - _INV_PHI * (b - a), a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class XiOptimum:
    xi: float
    mean_EN: float


def mean_pair_EN(scenario: Scenario, model: str = "full") -> float:
    try:
        pairs, *_ = evaluate(scenario, model, full_report=False)
    except (NotStable, ChainsqError):
        return -np.inf
    return float(np.mean(pairs))


def optimize_xi(
    scenario: Scenario, model: str = "full", bounds: tuple[float, float] = XI_BOUNDS, tol: float = XI_TOL
) -> XiOptimum:
    """Golden-section search for the |G₋|/|G₊| maximizing the mean opposite-pair E_N."""
    xi, val = golden_section_max(lambda x: mean_pair_EN(with_parameter(scenario, "xi", x), model), *bounds, tol)
    return XiOptimum(xi, val)


# disorder


@dataclass(frozen=True)
class DisorderResult:
    reference: NDArray[np.float64]
    realizations: NDArray[np.float64]
    stable: NDArray[np.bool_]
    spec: DisorderSpec

    @property
    def unstable_count(self) -> int:
        return int(np.count_nonzero(~self.stable))

    def _kept(self) -> NDArray[np.float64]:
        return self.realizations[self.stable]

    @property
    def median(self) -> NDArray[np.float64]:
        return np.median(self._kept(), axis=0)

    @property
    def minimum(self) -> NDArray[np.float64]:
        return np.min(self._kept(), axis=0)

    @property
    def maximum(self) -> NDArray[np.float64]:
        return np.max(self._kept(), axis=0)

    def degradation(self) -> NDArray[np.float64]:
        """Drop of the mean opposite-pair E_N relative to the symmetric chain, per kept realization."""
        return self.reference.mean() - self._kept().mean(axis=1)

    def median_degradation(self) -> float:
        return float(np.median(self.degradation()))

    def fraction_all_entangled(self) -> float:
        kept = self._kept()
        return float(np.mean(np.all(kept > 0, axis=1))) if len(kept) else 0.0


def disorder_monte_carlo(scenario: Scenario, spec: DisorderSpec, threads: int = 1) -> DisorderResult:
    if scenario.kind != "ideal":
        raise InvalidSpec("disorder statistics are defined on the ideal model")
    N = scenario.N
    reference, *_ = evaluate(scenario, full_report=False)

    def one(index: int):
        chain = disordered_chain(scenario.chain, N, spec, index, scenario.gamma, scenario.nT)
        gen = build_generators(chain, scenario.bath)
        if not is_stable(gen).stable:
            return None
        return pair_entanglement(solve_lyapunov(gen), N)

    out = parallel_map(one, list(range(spec.realizations)), threads)
    stable = np.array([r is not None for r in out], dtype=bool)
    values = np.array([r if r is not None else np.full(N, np.nan) for r in out]).reshape(len(out), N)
    return DisorderResult(reference, values, stable, spec)


# size scan


@dataclass(frozen=True)
class SizeScanRow:
    N: int
    Delta: float
    pair_EN: NDArray[np.float64]


def size_scan(
    scenario: Scenario,
    sizes: Sequence[int],
    threads: int = 1,
    search: tuple[float, float] | None = None,
    coarse_points: int = 401,
    model: str = "full",
) -> list[SizeScanRow]:
    """Per-pair E_N for each chain size, with Δ re-optimized for every N."""

    def one(N: int) -> SizeScanRow:
        opt = optimize_detuning(scenario.chain, N, search, coarse_points)
        s = replace(scenario, N=int(N), chain=replace(scenario.chain, Delta=opt.Delta))
        pairs, *_ = evaluate(s, model, full_report=False)
        return SizeScanRow(int(N), opt.Delta, pairs)

    return parallel_map(one, [int(n) for n in sizes], threads)


# full vs effective


@dataclass(frozen=True)
class ComparisonPoint:
    value: float
    xi: float | None
    full: RunResult
    effective: RunResult

    @property
    def deviation(self) -> float:
        """Largest per-pair |E_full - E_eff| / E_eff (0 where both vanish)."""
        if not (self.full.ok and self.effective.ok):
            return np.nan
        ef, ee = self.full.pair_EN, self.effective.pair_EN
        diff = np.abs(ef - ee)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(diff == 0, 0.0, diff / ee)
        return float(np.max(rel))


@dataclass(frozen=True)
class Comparison:
    points: list[ComparisonPoint]

    @property
    def max_deviation(self) -> float:
        devs = [p.deviation for p in self.points]
        return float(np.nanmax(devs)) if devs else np.nan


def compare_full_vs_effective(spec: SweepSpec, seed: int | None = None, threads: int = 1) -> Comparison:
    if spec.scenario.kind == "ideal":
        raise InvalidSpec("comparison needs a hardware model")

    def one(value):
        try:
            s = prepare_point(spec, value)
        except ChainsqError as exc:
            prov = {"spec_hash": spec.scenario.digest(), "seed": seed, "parameter": spec.parameter, "value": value}
            bad = RunResult(spec.parameter, value, None, None, None, None, None, {}, prov, str(exc))
            return ComparisonPoint(value, None, bad, bad)
        full = run_point(s, spec.parameter, value, "full", seed)
        eff = run_point(s, spec.parameter, value, "effective", seed)
        return ComparisonPoint(value, full.diagnostics.get("xi"), full, eff)

    return Comparison(parallel_map(one, spec.grid, threads))
