"""
Ideal chain model: 2N+1 nearest-neighbour oscillators, the central one
driven by a squeezed reservoir.

Chain sites are labelled j = -N..N and stored as covariance modes j + N.
All rates are amplitude decay rates in a caller-chosen frequency unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidSpec, OutOfValidityDomain, Unphysical
from .gaussian import (
    CovarianceMatrix,
    GaussianGenerators,
    LocalBath,
    covariance_from_moments,
    entanglement_report,
    EntanglementReport,
    log_negativity,
    quadratic_generators,
    reduced_covariance,
    solve_lyapunov,
)

UNIQUENESS_TOL = 1e-10
PURITY_TOL = 1e-12


def _per_site(value, n_sites: int, name: str) -> NDArray[np.float64]:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n_sites, float(arr))
    if arr.shape != (n_sites,):
        raise InvalidSpec(f"{name} needs {n_sites} entries, got shape {arr.shape}")
    return arr


def site_labels(N: int) -> list[int]:
    return list(range(-N, N + 1))


@dataclass(frozen=True)
class ChainSpec:
    """Symmetric-coupling / antisymmetric-detuning chain.

    ``eta[j-1]`` couples sites j-1 and j (and -j+1, -j); ``delta[j-1]`` is the
    detuning of site +j (site -j has the opposite sign). ``gamma`` and ``nT``
    are indexed by site j + N; scalars are broadcast.
    """

    N: int
    eta: Sequence[float]
    delta: Sequence[float]
    gamma: Sequence[float] | float = 0.0
    nT: Sequence[float] | float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise InvalidSpec(f"N must be a non-negative integer, got {self.N}")
        n_sites = 2 * self.N + 1
        eta = np.asarray(self.eta, dtype=float).reshape(-1)
        delta = np.asarray(self.delta, dtype=float).reshape(-1)
        if eta.shape != (self.N,) or delta.shape != (self.N,):
            raise InvalidSpec(f"eta and delta need N={self.N} entries")
        gamma = _per_site(self.gamma, n_sites, "gamma")
        nT = _per_site(self.nT, n_sites, "nT")
        for name, arr in (("eta", eta), ("delta", delta), ("gamma", gamma), ("nT", nT)):
            if not np.all(np.isfinite(arr)):
                raise InvalidSpec(f"{name} must be finite")
        if np.any(eta <= 0):
            raise InvalidSpec("couplings eta_j must be > 0")
        if np.any(gamma < 0) or np.any(nT < 0):
            raise InvalidSpec("gamma_j and nT_j must be >= 0")
        for name, arr in (("eta", eta), ("delta", delta), ("gamma", gamma), ("nT", nT)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_sites(self) -> int:
        return 2 * self.N + 1

    def site_detunings(self) -> NDArray[np.float64]:
        return np.concatenate([-self.delta[::-1], [0.0], self.delta])

    def bond_couplings(self) -> NDArray[np.float64]:
        """Couplings of bonds (-N,-N+1), ..., (N-1,N)."""
        return np.concatenate([self.eta[::-1], self.eta])

    def hopping(self) -> NDArray[np.float64]:
        return hopping_matrix(self.site_detunings(), self.bond_couplings())

    def with_dissipation(self, gamma, nT=None) -> ChainSpec:
        return ChainSpec(self.N, self.eta, self.delta, gamma, self.nT if nT is None else nT)


@dataclass(frozen=True)
class DisorderedChain:
    """General nearest-neighbour chain with arbitrary site detunings and bonds."""

    N: int
    detunings: NDArray[np.float64]
    couplings: NDArray[np.float64]
    gamma: NDArray[np.float64]
    nT: NDArray[np.float64]

    @property
    def n_sites(self) -> int:
        return 2 * self.N + 1

    def site_detunings(self) -> NDArray[np.float64]:
        return np.asarray(self.detunings)

    def bond_couplings(self) -> NDArray[np.float64]:
        return np.asarray(self.couplings)

    def hopping(self) -> NDArray[np.float64]:
        return hopping_matrix(self.detunings, self.couplings)


def hopping_matrix(detunings, couplings) -> NDArray[np.float64]:
    detunings = np.asarray(detunings, dtype=float)
    couplings = np.asarray(couplings, dtype=float)
    return np.diag(detunings) + np.diag(couplings, 1) + np.diag(couplings, -1)


@dataclass(frozen=True)
class LinearChainParams:
    """Uniform coupling with linearly varying detuning Δ_j = Δ + (j - origin)δ.

    With the default ``origin=1`` the first site pair sits at Δ, which is the
    parametrization in which Δ ≈ -0.4η is the eigenmode-balanced point for
    η = 1, δ = 0.1. ``origin=0`` gives Δ_j = Δ + jδ.
    """

    eta: float
    Delta: float
    delta: float
    origin: int = 1

    def detunings(self, N: int) -> NDArray[np.float64]:
        return self.Delta + self.delta * (np.arange(1, N + 1) - self.origin)

    def expand(self, N: int, gamma=0.0, nT=0.0) -> ChainSpec:
        return ChainSpec(N, np.full(N, self.eta), self.detunings(N), gamma, nT)


@dataclass(frozen=True)
class SqueezedBathSpec:
    Gamma: float
    n_bar: float
    m_bar: complex = 0.0

    def __post_init__(self):
        if not self.Gamma >= 0 or not self.n_bar >= 0:
            raise InvalidSpec("Gamma and n_bar must be >= 0")
        object.__setattr__(self, "m_bar", complex(self.m_bar))
        bound = np.sqrt(self.n_bar * (self.n_bar + 1))
        if abs(self.m_bar) > bound + PURITY_TOL * max(1.0, bound):
            raise Unphysical(f"|m_bar| = {abs(self.m_bar)} exceeds sqrt(n(n+1)) = {bound}")

    @classmethod
    def pure(cls, Gamma: float, n_bar: float, phase: float = 0.0) -> SqueezedBathSpec:
        return cls(Gamma, n_bar, np.sqrt(n_bar * (n_bar + 1)) * np.exp(1j * phase))

    @property
    def phase(self) -> float:
        return float(np.angle(self.m_bar))

    def local_bath(self) -> LocalBath:
        return LocalBath(self.Gamma, self.n_bar, self.m_bar)


@dataclass(frozen=True)
class BogoliubovParams:
    r: float
    phi: float
    n_tilde_r: float


def squeezing_metrics(bath: SqueezedBathSpec) -> tuple[float, float]:
    """Variance S of the most squeezed bath quadrature, and -10 log10 S in dB."""
    S = 2 * bath.n_bar + 1 - 2 * abs(bath.m_bar)
    return S, -10.0 * np.log10(S)


def bogoliubov_params(bath: SqueezedBathSpec) -> BogoliubovParams:
    m = abs(bath.m_bar)
    disc = (2 * bath.n_bar + 1) ** 2 - 4 * m**2
    if disc < -PURITY_TOL:
        raise Unphysical("bath violates |m| <= sqrt(n(n+1))")
    n_r = max(0.0, 0.5 * (np.sqrt(max(disc, 0.0)) - 1.0))
    if m == 0:
        return BogoliubovParams(0.0, 0.0, n_r)
    r = 0.5 * float(np.arctanh(min(2 * m / (2 * bath.n_bar + 1), 1.0 - 1e-16)))
    return BogoliubovParams(r, bath.phase, n_r)


def ideal_pair_EN(bath: SqueezedBathSpec) -> float:
    S, _ = squeezing_metrics(bath)
    return max(0.0, -float(np.log2(S)))


def build_generators(chain: ChainSpec | DisorderedChain, bath: SqueezedBathSpec) -> GaussianGenerators:
    """Drift/diffusion of the chain with the squeezed reservoir on site 0."""
    baths: list[list[LocalBath]] = [
        [LocalBath(float(g), float(n))] if g > 0 else []
        for g, n in zip(chain.gamma, chain.nT)
    ]
    if bath.Gamma > 0:
        baths[chain.N].append(bath.local_bath())
    return quadratic_generators(chain.hopping(), baths)


def complex_drift(chain: ChainSpec | DisorderedChain, bath: SqueezedBathSpec) -> NDArray[np.complex128]:
    """Coefficient matrix of d⟨b⟩/dt = M ⟨b⟩ for the chain."""
    v0 = np.zeros(chain.n_sites)
    v0[chain.N] = 1.0
    return -1j * chain.hopping() - bath.Gamma * np.outer(v0, v0) - np.diag(chain.gamma)


@dataclass(frozen=True)
class AnalyticSteadyState:
    """Dissipation-free steady state: factorized central mode and pairs."""

    C0: NDArray[np.float64]
    pair_blocks: dict[int, NDArray[np.float64]]
    covariance: CovarianceMatrix


def analytic_steady_state(chain: ChainSpec, bath: SqueezedBathSpec) -> AnalyticSteadyState:
    if np.any(np.asarray(chain.gamma) > 0):
        raise OutOfValidityDomain("analytic steady state requires gamma_j = 0 for all j")
    N = chain.N
    M = chain.n_sites
    occ = np.diag(np.full(M, bath.n_bar, dtype=complex))
    mu = np.zeros((M, M), dtype=complex)
    mu[N, N] = bath.m_bar
    for j in range(1, N + 1):
        mu[N + j, N - j] = mu[N - j, N + j] = (-1) ** j * bath.m_bar
    cov = covariance_from_moments(occ, mu)
    C0 = reduced_covariance(cov, [N]).data
    pairs = {j: reduced_covariance(cov, [N + j, N - j]).data for j in range(1, N + 1)}
    return AnalyticSteadyState(C0, pairs, cov)


@dataclass(frozen=True)
class EigenmodeAnalysis:
    """Normal modes of the undriven chain.

    ``frequencies`` are the eigenvalues λ_k of the real hopping matrix T
    (M|_{Γ=0} = -iT), ascending; ``projections`` are the signed overlaps of
    the eigenvectors with the central site.
    """

    frequencies: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]
    projections: NDArray[np.float64]
    unique: bool
    min_abs_projection: float

    @property
    def spread(self) -> float:
        p = np.abs(self.projections)
        return float(p.max() - p.min())


def eigenmode_analysis(chain: ChainSpec | DisorderedChain, degeneracy_tol: float = 1e-10) -> EigenmodeAnalysis:
    T = chain.hopping()
    freqs, vecs = np.linalg.eigh(T)
    v0 = np.zeros(chain.n_sites)
    v0[chain.N] = 1.0
    scale = max(1.0, float(np.max(np.abs(T))))
    # inside a degenerate eigenspace, rotate so only one vector overlaps v0
    start = 0
    while start < len(freqs):
        stop = start + 1
        while stop < len(freqs) and freqs[stop] - freqs[start] <= degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            coeff = block.T @ v0
            if np.linalg.norm(coeff) > 0:
                # Householder-free: QR of [coeff, I] puts coeff direction first
                q, _ = np.linalg.qr(np.column_stack([coeff, np.eye(stop - start)]))
                vecs[:, start:stop] = block @ q[:, : stop - start]
        start = stop
    proj = vecs.T @ v0
    min_abs = float(np.min(np.abs(proj)))
    return EigenmodeAnalysis(freqs, vecs, proj, min_abs > UNIQUENESS_TOL, min_abs)


@dataclass(frozen=True)
class DisorderSpec:
    range_eta: float = 0.0
    range_delta: float = 0.0
    realizations: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.range_eta < 0 or self.range_delta < 0:
            raise InvalidSpec("disorder ranges must be >= 0")
        if self.realizations < 0:
            raise InvalidSpec("realizations must be >= 0")


def disorder_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for realization ``index`` of master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def disordered_chain(
    base: LinearChainParams,
    N: int,
    spec: DisorderSpec,
    index: int,
    gamma=0.0,
    nT=0.0,
) -> DisorderedChain:
    """
    One realization of the randomly perturbed chain.

    Site ±j gets detuning ±Δ_j(1 + ζ_Δ,±j) with Δ_j from ``base.detunings``;
    the bond joining ±(j-1) and ±j gets η(1 + ζ_η,±j). The ζ are uniform on
    [-range, range].
    """
    rng = disorder_rng(spec.seed, index)
    # draw order: zeta_eta for +1..+N, -1..-N, then zeta_delta likewise
    u = rng.random(4 * N)
    zeta_eta = spec.range_eta * (2.0 * u[: 2 * N] - 1.0)
    zeta_delta = spec.range_delta * (2.0 * u[2 * N :] - 1.0)
    dj = base.detunings(N)
    det_plus = dj * (1.0 + zeta_delta[:N])
    det_minus = -dj * (1.0 + zeta_delta[N:])
    eta_plus = base.eta * (1.0 + zeta_eta[:N])
    eta_minus = base.eta * (1.0 + zeta_eta[N:])
    n_sites = 2 * N + 1
    detunings = np.concatenate([det_minus[::-1], [0.0], det_plus])
    couplings = np.concatenate([eta_minus[::-1], eta_plus])
    return DisorderedChain(
        N,
        detunings,
        couplings,
        _per_site(gamma, n_sites, "gamma"),
        _per_site(nT, n_sites, "nT"),
    )


def steady_state(chain: ChainSpec | DisorderedChain, bath: SqueezedBathSpec) -> CovarianceMatrix:
    return solve_lyapunov(build_generators(chain, bath))


def chain_report(chain: ChainSpec | DisorderedChain, bath: SqueezedBathSpec) -> EntanglementReport:
    """Steady state of the chain and its pairwise entanglement."""
    return entanglement_report(steady_state(chain, bath), site_labels(chain.N))


def pair_entanglement(sigma: CovarianceMatrix, N: int) -> NDArray[np.float64]:
    """E_N[j, -j] for j = 1..N (chain modes stored first)."""
    return np.array(
        [log_negativity(reduced_covariance(sigma, [N + j, N - j])) for j in range(1, N + 1)]
    )
