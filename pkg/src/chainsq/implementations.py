"""
Hardware realizations of the squeezed reservoir.

Each scheme couples the central chain site to a lossy ancilla (an optical
cavity, a bosonized qubit or a mechanical resonator) through the two-tone
interaction a^†(G₊ b₀ + G₋ b₀^†) + h.c. The full model keeps the ancilla as
an extra mode appended after the chain; the effective model replaces it by a
squeezed bath obtained by adiabatic elimination.

Frequencies are in units of ``omega0``; temperatures are in Kelvin and need
``omega0_si`` (rad/s) to be converted into occupancies.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .chain import ChainSpec, SqueezedBathSpec
from .errors import InvalidSpec, NotStable, SingularW, Unstable
from .gaussian import (
    CovarianceMatrix,
    GaussianGenerators,
    LocalBath,
    is_stable,
    moments_from_covariance,
    quadratic_generators,
    reduced_covariance,
)

HBAR = 1.054571817e-34
K_B = 1.380649e-23

LINEARIZATION_WARN = 0.1
CQED_WARN = 0.2


class ValidityWarning(UserWarning):
    """A small-parameter approximation is being pushed past its comfort zone."""


def bose_occupancy(T: float, omega: float) -> float:
    """Thermal occupancy at temperature ``T`` (K) of a mode at angular frequency ``omega`` (rad/s)."""
    if T < 0 or omega <= 0:
        raise InvalidSpec("need T >= 0 and omega > 0")
    if T == 0:
        return 0.0
    return float(1.0 / np.expm1(HBAR * omega / (K_B * T)))


def _resolve_chain(chain: ChainSpec, temperature: float | None, omega0_si: float | None) -> ChainSpec:
    if temperature is None:
        return chain
    if omega0_si is None:
        raise InvalidSpec("a temperature needs omega0_si to fix the occupancy")
    return chain.with_dissipation(chain.gamma, bose_occupancy(temperature, omega0_si))


@dataclass(frozen=True)
class OptomechanicalSpec:
    """Mechanical chain whose central resonator couples to a two-tone driven cavity.

    ``wavelength`` is carried as metadata only.
    """

    chain: ChainSpec
    g: float
    kappa: float
    E_plus: complex
    E_minus: complex
    omega0: float = 1.0
    temperature: float | None = None
    omega0_si: float | None = None
    wavelength: float | None = None

    def __post_init__(self):
        if not (self.omega0 > 0 and self.kappa > 0 and self.g > 0):
            raise InvalidSpec("omega0, kappa and g must be > 0")

    def resolved_chain(self) -> ChainSpec:
        return _resolve_chain(self.chain, self.temperature, self.omega0_si)


@dataclass(frozen=True)
class CircuitQedSpec:
    """Resonator chain whose central element couples to a modulated qubit.

    The qubit is treated as a harmonic ancilla that relaxes at rate ``kappa``
    into a bath with ``n_ancilla`` quanta.
    """

    chain: ChainSpec
    g: float
    epsilon: float
    E_plus: float
    E_minus: float
    kappa: float
    omega0: float = 1.0
    temperature: float | None = None
    omega0_si: float | None = None
    n_ancilla: float = 0.0

    def __post_init__(self):
        if not (self.omega0 > 0 and self.kappa > 0):
            raise InvalidSpec("omega0 and kappa must be > 0")
        if self.epsilon + self.omega0 == 0 or self.epsilon - self.omega0 == 0:
            raise ZeroDivisionError("epsilon must differ from ±omega0")

    def resolved_chain(self) -> ChainSpec:
        return _resolve_chain(self.chain, self.temperature, self.omega0_si)


@dataclass(frozen=True)
class CavityArraySpec:
    """Optical cavity chain; the reservoir is a mechanical resonator of
    frequency ``omega0`` and damping ``kappa`` driven through the central cavity.
    """

    chain: ChainSpec
    g: float
    kappa: float
    E_plus: complex
    E_minus: complex
    n_a: float = 0.0
    omega0: float = 1.0

    def __post_init__(self):
        if not (self.omega0 > 0 and self.kappa > 0 and self.g > 0):
            raise InvalidSpec("omega0, kappa and g must be > 0")
        if self.n_a < 0:
            raise InvalidSpec("n_a must be >= 0")

    def resolved_chain(self) -> ChainSpec:
        return self.chain


@dataclass(frozen=True)
class LinearizationResult:
    alpha_plus: complex
    alpha_minus: complex
    G_plus: complex
    G_minus: complex
    beta0_plus: complex
    beta0_minus: complex
    validity: dict[str, float]

    @property
    def xi(self) -> float:
        return abs(self.G_minus) / abs(self.G_plus) if self.G_plus != 0 else np.inf


def mechanical_resolvent(chain: ChainSpec, shift: complex) -> complex:
    """v₀ᵀ (W + shift·I)⁻¹ v₀ with W = iT + diag(γ)."""
    W = 1j * chain.hopping() + np.diag(chain.gamma)
    v0 = np.zeros(chain.n_sites)
    v0[chain.N] = 1.0
    mat = W + shift * np.eye(chain.n_sites)
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularW(f"resolvent matrix is singular (cond = {cond:.2e})")
    return complex(v0 @ np.linalg.solve(mat, v0))


def _warn_large(metrics: dict[str, float], keys, limit: float) -> None:
    for key in keys:
        if metrics[key] > limit:
            warnings.warn(f"{key} = {metrics[key]:.3g} exceeds {limit}", ValidityWarning, stacklevel=3)


def linearize_om(spec: OptomechanicalSpec) -> LinearizationResult:
    w0, kappa, g = spec.omega0, spec.kappa, spec.g
    chain = spec.resolved_chain()
    a_p = -1j * spec.E_plus / (kappa + 1j * w0)
    a_m = -1j * spec.E_minus / (kappa - 1j * w0)
    beta_p = beta_m = 0j
    if a_p * a_m != 0:
        beta_p = -1j * g * a_p * np.conj(a_m) * mechanical_resolvent(chain, 3j * w0)
        beta_m = -1j * g * a_m * np.conj(a_p) * mechanical_resolvent(chain, -1j * w0)
    G_p, G_m = g * a_p, g * a_m
    metrics = {
        "kappa/omega0": kappa / w0,
        "g|E+|/omega0^2": g * abs(spec.E_plus) / w0**2,
        "g|E-|/omega0^2": g * abs(spec.E_minus) / w0**2,
        "|G+|/omega0": abs(G_p) / w0,
        "|G-|/omega0": abs(G_m) / w0,
        "g|beta0+|/omega0": g * abs(beta_p) / w0,
        "g|beta0-|/omega0": g * abs(beta_m) / w0,
        "eta/omega0": float(np.max(chain.eta, initial=0.0)) / w0,
    }
    _warn_large(metrics, ("kappa/omega0", "g|E+|/omega0^2", "g|E-|/omega0^2"), LINEARIZATION_WARN)
    return LinearizationResult(complex(a_p), complex(a_m), complex(G_p), complex(G_m), beta_p, beta_m, metrics)


def _effective_denominator(G_plus: complex, G_minus: complex) -> float:
    d = abs(G_plus) ** 2 - abs(G_minus) ** 2
    if not d > 0:
        raise Unstable(f"|G+| = {abs(G_plus):.4g} must exceed |G-| = {abs(G_minus):.4g}")
    return d


def effective_bath_om(G_plus: complex, G_minus: complex, kappa: float) -> SqueezedBathSpec:
    d = _effective_denominator(G_plus, G_minus)
    return SqueezedBathSpec(d / kappa, abs(G_minus) ** 2 / d, -np.conj(G_plus) * G_minus / d)


def effective_bath_cavity_array(G_plus: complex, G_minus: complex, kappa: float, n_a: float) -> SqueezedBathSpec:
    if n_a == 0:
        return effective_bath_om(G_plus, G_minus, kappa)
    d = _effective_denominator(G_plus, G_minus)
    f = 2 * n_a + 1
    return SqueezedBathSpec(d / kappa, n_a + f * abs(G_minus) ** 2 / d, -f * np.conj(G_plus) * G_minus / d)


def ancilla_generators(
    chain: ChainSpec, G_plus: complex, G_minus: complex, kappa: float, n_ancilla: float = 0.0
) -> GaussianGenerators:
    """Chain plus one ancilla (last mode) with H_int = a^†(G₊b₀ + G₋b₀^†) + h.c."""
    M = chain.n_sites + 1
    c = chain.N
    T = np.zeros((M, M), dtype=complex)
    T[:-1, :-1] = chain.hopping()
    T[-1, c] = G_plus
    T[c, -1] = np.conj(G_plus)
    P = np.zeros((M, M), dtype=complex)
    P[-1, c] = P[c, -1] = G_minus
    baths = [[LocalBath(float(g), float(n))] if g > 0 else [] for g, n in zip(chain.gamma, chain.nT)]
    baths.append([LocalBath(kappa, n_ancilla)])
    return quadratic_generators(T, baths, P)


def _checked(gen: GaussianGenerators) -> GaussianGenerators:
    report = is_stable(gen)
    if not report.stable:
        raise NotStable(report.max_real)
    return gen


def build_full_om_generators(spec: OptomechanicalSpec, lin: LinearizationResult) -> GaussianGenerators:
    return _checked(ancilla_generators(spec.resolved_chain(), lin.G_plus, lin.G_minus, spec.kappa))


def circuit_qed_couplings(spec: CircuitQedSpec) -> tuple[float, float]:
    dp, dm = spec.epsilon + spec.omega0, spec.epsilon - spec.omega0
    for name, E, den in (("E+", spec.E_plus, dp), ("E-", spec.E_minus, dm)):
        if abs(E / den) > CQED_WARN:
            warnings.warn(f"{name}/(eps±omega0) = {abs(E / den):.3g} exceeds {CQED_WARN}", ValidityWarning, stacklevel=2)
    return spec.g * spec.E_plus / dp, spec.g * spec.E_minus / dm


def build_full_cqed_generators(spec: CircuitQedSpec) -> GaussianGenerators:
    G_p, G_m = circuit_qed_couplings(spec)
    return _checked(ancilla_generators(spec.resolved_chain(), G_p, G_m, spec.kappa, spec.n_ancilla))


def cavity_array_couplings(spec: CavityArraySpec) -> tuple[complex, complex, complex, complex]:
    """(G₊, G₋, β₀⁺, β₀⁻) of the cavity-array scheme."""
    chain = spec.resolved_chain()
    b_p = -1j * spec.E_plus * mechanical_resolvent(chain, 1j * spec.omega0)
    b_m = -1j * spec.E_minus * mechanical_resolvent(chain, -1j * spec.omega0)
    return spec.g * np.conj(b_p), spec.g * b_m, b_p, b_m


def build_full_cavity_array_generators(spec: CavityArraySpec) -> GaussianGenerators:
    G_p, G_m, _, _ = cavity_array_couplings(spec)
    return _checked(ancilla_generators(spec.resolved_chain(), G_p, G_m, spec.kappa, spec.n_a))


def ancilla_occupancy(sigma: CovarianceMatrix) -> float:
    """⟨a^†a⟩ of the last mode."""
    N, _ = moments_from_covariance(reduced_covariance(sigma, [sigma.modes - 1]))
    return float(N[0, 0].real)


def chain_block(sigma: CovarianceMatrix) -> CovarianceMatrix:
    return reduced_covariance(sigma, list(range(sigma.modes - 1)))


# uniform access used by the experiment layer


ImplementationSpec = OptomechanicalSpec | CircuitQedSpec | CavityArraySpec


@dataclass(frozen=True)
class Couplings:
    G_plus: complex
    G_minus: complex
    n_ancilla: float
    linearization: LinearizationResult | None = None


def couplings(spec: ImplementationSpec) -> Couplings:
    if isinstance(spec, OptomechanicalSpec):
        lin = linearize_om(spec)
        return Couplings(lin.G_plus, lin.G_minus, 0.0, lin)
    if isinstance(spec, CircuitQedSpec):
        G_p, G_m = circuit_qed_couplings(spec)
        return Couplings(G_p, G_m, spec.n_ancilla)
    G_p, G_m, _, _ = cavity_array_couplings(spec)
    return Couplings(G_p, G_m, spec.n_a)


def effective_bath(spec: ImplementationSpec, c: Couplings | None = None) -> SqueezedBathSpec:
    c = couplings(spec) if c is None else c
    return effective_bath_cavity_array(c.G_plus, c.G_minus, spec.kappa, c.n_ancilla)


def full_generators(spec: ImplementationSpec, c: Couplings | None = None) -> GaussianGenerators:
    c = couplings(spec) if c is None else c
    return _checked(ancilla_generators(spec.resolved_chain(), c.G_plus, c.G_minus, spec.kappa, c.n_ancilla))


def _unit_couplings(spec: ImplementationSpec) -> Couplings:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        unit = couplings(replace(spec, E_minus=1.0))
    if unit.G_minus == 0:
        raise InvalidSpec("G- does not depend on E-")
    return unit


def with_G_minus(spec: ImplementationSpec, G_minus_abs: float) -> ImplementationSpec:
    """Rescale E₋ so that |G₋| equals the given value (G₋ is linear in E₋)."""
    unit = _unit_couplings(spec)
    return replace(spec, E_minus=float(G_minus_abs / abs(unit.G_minus)))


def with_xi(spec: ImplementationSpec, xi: float) -> ImplementationSpec:
    """Rescale E₋ so that |G₋| = xi·|G₊|."""
    unit = _unit_couplings(spec)
    return replace(spec, E_minus=float(xi * abs(unit.G_plus) / abs(unit.G_minus)))
