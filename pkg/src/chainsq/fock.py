"""
Brute-force truncated Fock-space master equation for one or two modes.

Independent of the covariance route: it builds the Liouvillian of the
quadratic Hamiltonian plus dissipators D[x, y]ρ = 2xρy - yxρ - ρyx and finds
its null vector. Used to pin the conventions of the Gaussian generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray
from scipy.sparse.linalg import LinearOperator, gmres, spsolve

from .errors import NoConvergence, TruncationInsufficient

MAX_DIM = 1600
TAIL_TOL = 1e-6
DIRECT_MAX_DIM = 128


def annihilation_ops(dims: Sequence[int]) -> list[sp.csr_matrix]:
    """Annihilation operators of each mode on the tensor-product space."""
    ops = []
    for k, d in enumerate(dims):
        a = sp.diags(np.sqrt(np.arange(1, d)), 1, format="csr")
        factors = [sp.identity(dk, format="csr") for dk in dims]
        factors[k] = a
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op)
    return ops


@dataclass(frozen=True)
class Dissipator:
    """rate * D[x, y]; x and y are operators on the truncated space."""

    rate: complex
    x: sp.spmatrix
    y: sp.spmatrix


def thermal_dissipators(b: sp.spmatrix, gamma: float, nT: float) -> list[Dissipator]:
    bd = b.getH()
    return [Dissipator(gamma * (nT + 1), b, bd), Dissipator(gamma * nT, bd, b)]


def squeezed_dissipators(
    b: sp.spmatrix, Gamma: float, n_bar: float, m_bar: complex, literal: bool = False
) -> list[Dissipator]:
    """
    Squeezed reservoir on mode ``b`` with steady ⟨b b⟩ = m_bar.

    ``literal=True`` pairs m_bar with D[b, b] instead, which drives an
    isolated mode to ⟨b b⟩ = conj(m_bar).
    """
    bd = b.getH()
    m = complex(m_bar)
    m_bb, m_dd = (m, m.conjugate()) if literal else (m.conjugate(), m)
    return [
        Dissipator(Gamma * (n_bar + 1), b, bd),
        Dissipator(Gamma * n_bar, bd, b),
        Dissipator(-Gamma * m_bb, b, b),
        Dissipator(-Gamma * m_dd, bd, bd),
    ]


def quadratic_hamiltonian(ops: Sequence[sp.spmatrix], hopping: ArrayLike, pairing: ArrayLike | None = None) -> sp.csr_matrix:
    """H = Σ T_kl b_k^† b_l + ½ Σ (P_kl b_k^† b_l^† + h.c.)."""
    T = np.asarray(hopping, dtype=complex)
    dim = ops[0].shape[0]
    H = sp.csr_matrix((dim, dim), dtype=complex)
    for k, bk in enumerate(ops):
        for l, bl in enumerate(ops):
            if T[k, l] != 0:
                H = H + T[k, l] * (bk.getH() @ bl)
    if pairing is not None:
        P = np.asarray(pairing, dtype=complex)
        for k, bk in enumerate(ops):
            for l, bl in enumerate(ops):
                if P[k, l] != 0:
                    term = 0.5 * P[k, l] * (bk.getH() @ bl.getH())
                    H = H + term + term.getH()
    return H.tocsr()


def liouvillian(H: sp.spmatrix, dissipators: Sequence[Dissipator]) -> sp.csr_matrix:
    """Superoperator acting on column-stacked vec(ρ)."""
    dim = H.shape[0]
    eye = sp.identity(dim, format="csr", dtype=complex)
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for d in dissipators:
        if d.rate == 0:
            continue
        yx = d.y @ d.x
        L = L + d.rate * (2 * sp.kron(d.y.T, d.x) - sp.kron(eye, yx) - sp.kron(yx.T, eye))
    return L.tocsr()


@dataclass(frozen=True)
class TruncatedState:
    dims: tuple[int, ...]
    rho: NDArray[np.complex128]
    residual: float

    def expect(self, op: sp.spmatrix) -> complex:
        return complex(np.trace(op @ self.rho))

    def reduced(self, mode: int) -> NDArray[np.complex128]:
        t = self.rho.reshape(self.dims + self.dims)
        n = len(self.dims)
        trace_axes = [k for k in range(n) if k != mode]
        for k in sorted(trace_axes, reverse=True):
            t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
        return t.reshape(self.dims[mode], self.dims[mode])

    def tail_population(self) -> float:
        return max(float(np.real(self.reduced(k)[-1, -1])) for k in range(len(self.dims)))

    def moments(self) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        """(N, Mu) with N_kl = ⟨b_k^† b_l⟩, Mu_kl = ⟨b_k b_l⟩."""
        ops = annihilation_ops(self.dims)
        M = len(ops)
        N = np.zeros((M, M), dtype=complex)
        Mu = np.zeros((M, M), dtype=complex)
        for k in range(M):
            for l in range(M):
                N[k, l] = self.expect(ops[k].getH() @ ops[l])
                Mu[k, l] = self.expect(ops[k] @ ops[l])
        return N, Mu


def _null_vector(L: sp.csr_matrix, dim: int) -> NDArray[np.complex128]:
    # replace one equation with the trace condition
    trace_row = sp.csr_matrix(
        (np.ones(dim), (np.zeros(dim, dtype=int), np.arange(dim) * (dim + 1))),
        shape=(1, dim * dim),
    )
    A = sp.vstack([trace_row, L[1:]]).tocsc()
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    return spsolve(A, rhs)


class _SylvesterPreconditioned:
    """Fixed-point map Φ(ρ) = -(Kρ + ρK^†)^{-1} J(ρ) of the master equation.

    The Liouvillian splits as L(ρ) = Kρ + ρK^† + J(ρ) with J the jump part;
    its steady state is the trace-one fixed point of Φ.
    """

    def __init__(self, H: sp.spmatrix, dissipators: Sequence[Dissipator]):
        K = -1j * H.toarray()
        for d in dissipators:
            K = K - d.rate * (d.y @ d.x).toarray()
        # K is diagonalizable; Kρ + ρK^† = C becomes elementwise in its eigenbasis
        lam, V = np.linalg.eig(K)
        self.V = V
        self.V_inv = np.linalg.inv(V)
        self.denom = lam[:, None] + lam.conj()[None, :]
        self.jumps = [(2 * d.rate, d.x.tocsr(), d.y.tocsr()) for d in dissipators if d.rate != 0]
        self.dim = H.shape[0]

    def jump(self, rho: NDArray) -> NDArray:
        out = np.zeros_like(rho)
        for rate, x, y in self.jumps:
            out += rate * (x @ (y.T @ rho.T).T)
        return out

    def phi(self, rho: NDArray) -> NDArray:
        C = self.V_inv @ self.jump(rho) @ self.V_inv.conj().T
        return self.V @ (-C / self.denom) @ self.V.conj().T


def _krylov_steady_state(H: sp.spmatrix, dissipators: Sequence[Dissipator], tol: float) -> NDArray:
    pre = _SylvesterPreconditioned(H, dissipators)
    dim = pre.dim
    eye = np.eye(dim, dtype=complex)

    # A(ρ) = ρ - Φ(ρ) + tr(ρ) I/dim is nonsingular when the steady state is
    # unique, and A(ρ_ss) = I/dim.
    def matvec(v):
        rho = v.reshape(dim, dim)
        return (rho - pre.phi(rho) + np.trace(rho) * eye / dim).reshape(-1)

    A = LinearOperator((dim * dim, dim * dim), matvec=matvec, dtype=complex)
    b = (eye / dim).reshape(-1)
    x, info = gmres(A, b, x0=b, rtol=tol, atol=0.0, restart=200, maxiter=50)
    if info != 0:
        raise NoConvergence(f"GMRES did not converge (info={info})")
    return x.reshape(dim, dim).reshape(-1, order="F")


def steady_state_fock(
    hopping: ArrayLike,
    dims: Sequence[int],
    baths: Sequence[Sequence[Dissipator]],
    pairing: ArrayLike | None = None,
    check_tail: bool = True,
    residual_tol: float = 1e-8,
) -> TruncatedState:
    """
    Steady state of the truncated master equation.

    ``baths`` is a flat list of dissipator lists built on the operators of
    :func:`annihilation_ops` for the same ``dims``.
    """
    dims = tuple(int(d) for d in dims)
    dim = int(np.prod(dims))
    if dim > MAX_DIM:
        raise ValueError(f"total dimension {dim} exceeds {MAX_DIM}")
    dissipators = [d for group in baths for d in group]
    if not any(d.rate != 0 for d in dissipators):
        raise ValueError("steady state needs at least one nonzero dissipation rate")
    ops = annihilation_ops(dims)
    H = quadratic_hamiltonian(ops, hopping, pairing)
    L = liouvillian(H, dissipators)
    if dim <= DIRECT_MAX_DIM:
        vec = _null_vector(L, dim)
    else:
        vec = _krylov_steady_state(H, dissipators, tol=1e-13)
    rho = vec.reshape((dim, dim), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(L @ rho.reshape(-1, order="F")))
    if residual > residual_tol:
        raise NoConvergence(f"Liouvillian residual {residual:.2e} above {residual_tol:.0e}")
    state = TruncatedState(dims, rho, residual)
    if check_tail and state.tail_population() > TAIL_TOL:
        raise TruncationInsufficient(
            f"highest Fock level holds {state.tail_population():.2e} > {TAIL_TOL:.0e}"
        )
    return state


def fock_log_negativity(rho: ArrayLike, dims: Sequence[int]) -> float:
    """log2 of the trace norm of the partial transpose on the second mode."""
    d1, d2 = dims
    r = np.asarray(rho).reshape(d1, d2, d1, d2)
    pt = r.transpose(0, 3, 2, 1).reshape(d1 * d2, d1 * d2)
    eig = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(np.log2(np.sum(np.abs(eig))))


def two_mode_squeezed_state(n_bar: float, cutoff: int) -> NDArray[np.complex128]:
    """Pure two-mode squeezed vacuum with ⟨b^† b⟩ = n_bar per mode, truncated."""
    lam = np.sqrt(n_bar / (n_bar + 1.0))
    c = np.sqrt(1.0 - lam**2) * lam ** np.arange(cutoff)
    psi = np.zeros((cutoff, cutoff), dtype=complex)
    psi[np.arange(cutoff), np.arange(cutoff)] = c
    psi = psi.reshape(-1)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def thermal_product_state(occupancies: Sequence[float], cutoff: int) -> NDArray[np.complex128]:
    rho = np.ones((1, 1))
    for n in occupancies:
        p = (n / (n + 1.0)) ** np.arange(cutoff) / (n + 1.0)
        rho = np.kron(rho, np.diag(p / p.sum()))
    return rho.astype(complex)
