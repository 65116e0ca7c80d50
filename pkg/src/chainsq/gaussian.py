"""
Covariance-matrix algebra for linear bosonic open systems.

Quadratures are ordered (x1, p1, x2, p2, ...) with x = (b + b^†)/√2 and
p = -i(b - b^†)/√2, so the vacuum covariance is I/2. Second moments obey

    dσ/dt = A σ + σ Aᵀ + D

and the steady state is the solution of the continuous Lyapunov equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_continuous_lyapunov

from .errors import DimensionMismatch, InvalidState, NoConvergence, NotStable

STABILITY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-9
LYAPUNOV_RTOL = 1e-10


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal Ω with 2x2 blocks [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceMatrix:
    data: NDArray[np.float64]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % 2:
            raise DimensionMismatch(f"covariance must be 2M x 2M, got {data.shape}")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def modes(self) -> int:
        return self.data.shape[0] // 2

    @classmethod
    def vacuum(cls, n_modes: int) -> CovarianceMatrix:
        return cls(0.5 * np.eye(2 * n_modes))

    @classmethod
    def thermal(cls, occupancies: Sequence[float]) -> CovarianceMatrix:
        occ = np.asarray(occupancies, dtype=float)
        return cls(np.diag(np.repeat(occ + 0.5, 2)))

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.data))))
        return bool(np.max(np.abs(self.data - self.data.T)) <= rtol * scale)

    def uncertainty_min_eig(self) -> float:
        """Smallest eigenvalue of the Hermitian matrix σ + (i/2)Ω."""
        herm = self.data + 0.5j * symplectic_form(self.modes)
        return float(np.linalg.eigvalsh(herm)[0])

    def is_physical(self, tol: float = UNCERTAINTY_TOL) -> bool:
        return self.is_symmetric() and self.uncertainty_min_eig() >= -tol


@dataclass(frozen=True)
class GaussianGenerators:
    drift: NDArray[np.float64]
    diffusion: NDArray[np.float64]

    def __post_init__(self):
        drift = np.array(self.drift, dtype=float)
        diffusion = np.array(self.diffusion, dtype=float)
        if drift.ndim != 2 or drift.shape[0] != drift.shape[1]:
            raise DimensionMismatch(f"drift must be square, got {drift.shape}")
        if diffusion.shape != drift.shape:
            raise DimensionMismatch(
                f"drift {drift.shape} and diffusion {diffusion.shape} differ in shape"
            )
        if drift.shape[0] % 2:
            raise DimensionMismatch("generators must act on an even number of quadratures")
        scale = max(1.0, float(np.max(np.abs(diffusion), initial=0.0)))
        if np.max(np.abs(diffusion - diffusion.T), initial=0.0) > 1e-12 * scale:
            raise ValueError("diffusion matrix must be symmetric")
        if diffusion.size and np.linalg.eigvalsh(diffusion)[0] < -1e-12 * scale:
            raise ValueError("diffusion matrix must be positive semidefinite")
        drift.setflags(write=False)
        diffusion.setflags(write=False)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "diffusion", diffusion)

    @property
    def modes(self) -> int:
        return self.drift.shape[0] // 2

    def moment_derivative(self, sigma: ArrayLike) -> NDArray[np.float64]:
        s = np.asarray(sigma, dtype=float)
        return self.drift @ s + s @ self.drift.T + self.diffusion


@dataclass(frozen=True)
class StabilityReport:
    max_real: float
    stable: bool


@dataclass(frozen=True)
class LocalBath:
    """Single-mode Markovian bath with amplitude decay ``rate``.

    ``mu`` is the steady-state ⟨b b⟩ the bath imposes on an isolated mode;
    zero for a thermal bath.
    """

    rate: float
    n: float = 0.0
    mu: complex = 0.0

    def diffusion_block(self) -> NDArray[np.float64]:
        mu = complex(self.mu)
        return 2.0 * self.rate * np.array(
            [[self.n + 0.5 + mu.real, mu.imag], [mu.imag, self.n + 0.5 - mu.real]]
        )


def quadratic_generators(
    hopping: ArrayLike,
    baths: Sequence[Sequence[LocalBath]],
    pairing: ArrayLike | None = None,
) -> GaussianGenerators:
    """
    Drift and diffusion for H = b^† T b + ½(b^† P b^†ᵀ + h.c.) with local baths.

    Parameters
    ----------
    hopping:
        Hermitian matrix T (units of frequency, ħ = 1).
    baths:
        For each mode, the list of local baths acting on it (possibly empty).
    pairing:
        Complex symmetric matrix P, or None.
    """
    T = np.asarray(hopping, dtype=complex)
    M = T.shape[0]
    if T.shape != (M, M) or len(baths) != M:
        raise DimensionMismatch("hopping must be M x M with one bath list per mode")
    P = np.zeros((M, M), dtype=complex) if pairing is None else np.asarray(pairing, dtype=complex)
    if P.shape != (M, M):
        raise DimensionMismatch("pairing must be M x M")

    K = np.diag([sum(b.rate for b in mode_baths) for mode_baths in baths])
    # db/dt = X b + Y b^†
    X = -1j * T - K
    Y = -1j * P
    S, Dm = X + Y, X - Y
    A = np.zeros((2 * M, 2 * M))
    A[0::2, 0::2] = S.real
    A[0::2, 1::2] = -Dm.imag
    A[1::2, 0::2] = S.imag
    A[1::2, 1::2] = Dm.real

    D = np.zeros((2 * M, 2 * M))
    for k, mode_baths in enumerate(baths):
        for bath in mode_baths:
            D[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] += bath.diffusion_block()
    return GaussianGenerators(A, D)


def covariance_from_moments(N: ArrayLike, Mu: ArrayLike) -> CovarianceMatrix:
    """Covariance from normal moments N_kl = ⟨b_k^† b_l⟩ and Mu_kl = ⟨b_k b_l⟩."""
    N = np.asarray(N, dtype=complex)
    Mu = np.asarray(Mu, dtype=complex)
    M = N.shape[0]
    sigma = np.zeros((2 * M, 2 * M))
    eye = np.eye(M)
    sigma[0::2, 0::2] = Mu.real + N.real + 0.5 * eye
    sigma[1::2, 1::2] = -Mu.real + N.real + 0.5 * eye
    sigma[0::2, 1::2] = Mu.imag + N.imag
    sigma[1::2, 0::2] = Mu.imag - N.imag
    return CovarianceMatrix(sigma)


def moments_from_covariance(sigma: CovarianceMatrix) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Inverse of :func:`covariance_from_moments`: returns (N, Mu)."""
    s = sigma.data
    xx, pp = s[0::2, 0::2], s[1::2, 1::2]
    xp, px = s[0::2, 1::2], s[1::2, 0::2]
    eye = np.eye(sigma.modes)
    N = 0.5 * (xx + pp) - 0.5 * eye + 0.5j * (xp - px)
    Mu = 0.5 * (xx - pp) + 0.5j * (xp + px)
    return N, Mu


def is_stable(gen: GaussianGenerators) -> StabilityReport:
    max_real = float(np.max(np.linalg.eigvals(gen.drift).real))
    return StabilityReport(max_real=max_real, stable=max_real < -STABILITY_TOL)


def lyapunov_residual(gen: GaussianGenerators, sigma: CovarianceMatrix) -> float:
    return float(np.max(np.abs(gen.moment_derivative(sigma.data))))


def _solve_kronecker(A: NDArray, D: NDArray) -> NDArray:
    n = A.shape[0]
    eye = np.eye(n)
    L = np.kron(eye, A) + np.kron(A, eye)
    x = np.linalg.solve(L, -D.reshape(-1, order="F"))
    return x.reshape((n, n), order="F")


def solve_lyapunov(gen: GaussianGenerators, method: str = "schur") -> CovarianceMatrix:
    """
    Steady-state covariance: the unique σ with A σ + σ Aᵀ + D = 0.

    ``method`` is "schur" (Bartels-Stewart) or "kron" (vectorized linear solve).
    Raises NotStable unless every drift eigenvalue has real part below -1e-12.
    """
    report = is_stable(gen)
    if not report.stable:
        raise NotStable(report.max_real)
    A, D = gen.drift, gen.diffusion
    if method == "schur":
        sigma = solve_continuous_lyapunov(A, -D)
    elif method == "kron":
        sigma = _solve_kronecker(A, D)
    else:
        raise ValueError(f"unknown method {method!r}")
    sigma = 0.5 * (sigma + sigma.T)
    # one refinement step with the residual in extended precision; near-marginal
    # modes make the plain solve lose several digits
    A_ext, sig_ext = A.astype(np.longdouble), sigma.astype(np.longdouble)
    residual = (A_ext @ sig_ext + sig_ext @ A_ext.T + D.astype(np.longdouble)).astype(float)
    if method == "schur":
        correction = solve_continuous_lyapunov(A, -residual)
    else:
        correction = _solve_kronecker(A, residual)
    sigma = (sig_ext + 0.5 * (correction + correction.T).astype(np.longdouble)).astype(float)
    final = float(np.max(np.abs(A @ sigma + sigma @ A.T + D)))
    if final > LYAPUNOV_RTOL * max(1.0, float(np.max(np.abs(D)))):
        raise NoConvergence(f"Lyapunov residual {final:.2e} above tolerance")
    return CovarianceMatrix(sigma)


def reduced_covariance(sigma: CovarianceMatrix, modes: Sequence[int]) -> CovarianceMatrix:
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise IndexError(f"mode indices must be distinct: {modes}")
    for k in modes:
        if not 0 <= k < sigma.modes:
            raise IndexError(f"mode {k} out of range for {sigma.modes} modes")
    idx = np.array([[2 * k, 2 * k + 1] for k in modes], dtype=int).reshape(-1)
    return CovarianceMatrix(sigma.data[np.ix_(idx, idx)])


def symplectic_eigenvalues(sigma: CovarianceMatrix) -> NDArray[np.float64]:
    """Symplectic spectrum (one value per mode, ascending)."""
    ev = np.linalg.eigvals(1j * symplectic_form(sigma.modes) @ sigma.data)
    return np.sort(np.abs(ev))[::2]


def partial_transpose(sigma: CovarianceMatrix, modes: Sequence[int]) -> CovarianceMatrix:
    """Flip the sign of the momenta of ``modes``."""
    flip = np.ones(2 * sigma.modes)
    for k in modes:
        flip[2 * k + 1] = -1.0
    return CovarianceMatrix(sigma.data * np.outer(flip, flip))


def log_negativity(sigma2: CovarianceMatrix) -> float:
    """Logarithmic negativity (base 2) of a two-mode Gaussian state."""
    if sigma2.modes != 2:
        raise DimensionMismatch(f"log_negativity needs 2 modes, got {sigma2.modes}")
    if sigma2.uncertainty_min_eig() < -UNCERTAINTY_TOL:
        raise InvalidState("covariance violates the uncertainty relation")
    s = sigma2.data
    a, b, c = s[:2, :2], s[2:, 2:], s[:2, 2:]
    delta_pt = np.linalg.det(a) + np.linalg.det(b) - 2.0 * np.linalg.det(c)
    disc = max(delta_pt**2 - 4.0 * np.linalg.det(s), 0.0)
    nu_minus = np.sqrt(max((delta_pt - np.sqrt(disc)) / 2.0, 0.0))
    if nu_minus <= 0.0:
        raise InvalidState("degenerate partially transposed spectrum")
    return max(0.0, -float(np.log2(2.0 * nu_minus)))


@dataclass(frozen=True)
class EntanglementReport:
    """Pairwise log-negativity keyed by unordered label pairs."""

    values: dict[tuple[Hashable, Hashable], float]
    opposite: frozenset[tuple[Hashable, Hashable]] = field(default_factory=frozenset)

    def __getitem__(self, pair: tuple[Hashable, Hashable]) -> float:
        a, b = pair
        if (a, b) in self.values:
            return self.values[(a, b)]
        return self.values[(b, a)]

    def opposite_pairs(self) -> dict[tuple[Hashable, Hashable], float]:
        return {k: v for k, v in self.values.items() if k in self.opposite}

    def other_pairs(self) -> dict[tuple[Hashable, Hashable], float]:
        return {k: v for k, v in self.values.items() if k not in self.opposite}

    def max_other(self) -> float:
        return max(self.other_pairs().values(), default=0.0)


def entanglement_report(sigma: CovarianceMatrix, labels: Sequence[int]) -> EntanglementReport:
    """
    E_N for every unordered pair of modes.

    ``labels[k]`` is the chain index of covariance mode k; pairs (j, -j) with
    j != 0 are flagged as opposite-index pairs.
    """
    labels = list(labels)
    if len(labels) != sigma.modes:
        raise DimensionMismatch(f"{len(labels)} labels for {sigma.modes} modes")
    values: dict[tuple[int, int], float] = {}
    opposite = set()
    for k1, k2 in combinations(range(sigma.modes), 2):
        j1, j2 = labels[k1], labels[k2]
        values[(j1, j2)] = log_negativity(reduced_covariance(sigma, [k1, k2]))
        if j1 == -j2 and j1 != 0:
            opposite.add((j1, j2))
    return EntanglementReport(values, frozenset(opposite))
