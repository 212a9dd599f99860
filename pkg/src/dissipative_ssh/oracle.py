"""Brute-force many-body reference: dense Liouvillian, ED spectrum, propagation.

Fock basis: occupation bitstrings with site 1 as the most significant bit.
Jordan-Wigner strings run from site 1 to the site before the target,
``c_j = Z_1 ... Z_{j-1} sigma^-_j``. Density operators are vectorized
row-major, so ``vec(A rho B) = kron(A, B.T) vec(rho)``.

Only chains with at most three unit cells are supported (4096 x 4096
superoperator, about 270 MB complex).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm, null_space

from .model import Kind, OpenChainModel, Side, require_valid, site_hopping_matrix

MAX_CELLS = 3


class OracleCapError(ValueError):
    pass


@lru_cache(maxsize=8)
def fermion_operators(n_sites: int) -> tuple[np.ndarray, ...]:
    """Annihilation operators c_1..c_n as dense 2^n x 2^n real matrices."""
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|, basis (|0>, |1>)
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for j in range(n_sites):
        factors = [z] * j + [lower] + [eye] * (n_sites - j - 1)
        op = np.array([[1.0]])
        for f in factors:
            op = np.kron(op, f)
        ops.append(op)
    return tuple(ops)


def _check_cap(model: OpenChainModel):
    require_valid(model)
    if model.n_cells > MAX_CELLS:
        raise OracleCapError(f"oracle supports n_cells <= {MAX_CELLS}, got {model.n_cells}")


def many_body_hamiltonian(model: OpenChainModel) -> np.ndarray:
    _check_cap(model)
    c = fermion_operators(model.n_sites)
    t = site_hopping_matrix(model.t1, model.t2, model.n_cells)
    dim = 2**model.n_sites
    h = np.zeros((dim, dim))
    for a, b in zip(*np.nonzero(t)):
        h += t[a, b] * c[a].T @ c[b]
    return h


def jump_operators(model: OpenChainModel) -> list[np.ndarray]:
    _check_cap(model)
    c = fermion_operators(model.n_sites)
    out = []
    for d in model.dissipators:
        if d.strength == 0:
            continue
        site = 0 if d.side is Side.LEFT else model.n_sites - 1
        op = c[site] if d.kind is Kind.LOSS else c[site].T
        out.append(np.sqrt(d.strength) * op)
    return out


@dataclass(frozen=True)
class SuperoperatorMatrix:
    l_mat: np.ndarray
    dim: int
    n_sites: int


def full_liouvillian_matrix(model: OpenChainModel, jump_factor: float = 2.0) -> SuperoperatorMatrix:
    """Vectorized generator of drho/dt = -i[H, rho] + sum (2 L rho L^dag - {L^dag L, rho}).

    ``jump_factor`` replaces the 2 in front of the jump term; it exists only
    so that validation can demonstrate that a wrong factor is detected.
    """
    h = many_body_hamiltonian(model)
    dim = h.shape[0]
    eye = np.eye(dim)
    l_mat = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op in jump_operators(model):
        ldl = op.conj().T @ op
        l_mat = l_mat + jump_factor * np.kron(op, op.conj()) - np.kron(ldl, eye) - np.kron(eye, ldl.T)
    return SuperoperatorMatrix(l_mat, dim, model.n_sites)


def ed_spectrum(s: SuperoperatorMatrix) -> np.ndarray:
    try:
        return np.linalg.eigvals(s.l_mat)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"ED failed for {s.l_mat.shape} superoperator, "
            f"max|entry|={np.abs(s.l_mat).max():.3g}: {exc}"
        ) from exc


def fully_occupied_density_matrix(n_sites: int) -> np.ndarray:
    dim = 2**n_sites
    rho = np.zeros((dim, dim), dtype=complex)
    rho[-1, -1] = 1.0
    return rho


def ed_steady_state(s: SuperoperatorMatrix, tol: float = 1e-9) -> np.ndarray:
    """Unique null vector of the Liouvillian as a unit-trace density matrix."""
    ns = null_space(s.l_mat, rcond=tol)
    if ns.shape[1] != 1:
        raise RuntimeError(f"steady state not unique: null space dimension {ns.shape[1]}")
    rho = ns[:, 0].reshape(s.dim, s.dim)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def site_densities(rho: np.ndarray, n_sites: int) -> np.ndarray:
    c = fermion_operators(n_sites)
    return np.array([np.trace(op.T @ op @ rho).real for op in c])


def normalized_majoranas(n_sites: int) -> list[np.ndarray]:
    """wbar_{2j-1} = i (c - c^dag)/sqrt 2, wbar_{2j} = (c + c^dag)/sqrt 2."""
    out = []
    for c in fermion_operators(n_sites):
        out.append(1j * (c - c.T) / np.sqrt(2))
        out.append((c + c.T) / np.sqrt(2) + 0j)
    return out


def correlation_from_density_matrix(rho: np.ndarray, n_sites: int) -> np.ndarray:
    """Gamma_jk = i <wbar_j wbar_k> - (i/2) delta_jk."""
    w = normalized_majoranas(n_sites)
    n = len(w)
    gamma = np.empty((n, n))
    for j in range(n):
        for k in range(n):
            val = 1j * np.trace(w[j] @ w[k] @ rho)
            if j == k:
                val -= 0.5j
            gamma[j, k] = val.real
    return gamma


@dataclass(frozen=True)
class EDTrajectory:
    times: np.ndarray
    density: np.ndarray
    profiles: np.ndarray
    traces: np.ndarray
    hermiticity: np.ndarray
    min_eigenvalues: np.ndarray
    states: tuple[np.ndarray, ...]


def ed_evolve(rho0: np.ndarray, s: SuperoperatorMatrix, t_grid) -> EDTrajectory:
    """Propagate vec(rho) with exp(L dt) between consecutive grid times."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0) or (t_grid.size and t_grid[0] < 0):
        raise ValueError("t_grid must be ascending and non-negative")
    vec = np.asarray(rho0, dtype=complex).reshape(-1)
    t_prev = 0.0
    dens, prof, tr, herm, mins, states = [], [], [], [], [], []
    for t in t_grid:
        if t > t_prev:
            vec = expm(s.l_mat * (t - t_prev)) @ vec
            t_prev = t
        rho = vec.reshape(s.dim, s.dim)
        p = site_densities(rho, s.n_sites)
        prof.append(p)
        dens.append(p.mean())
        tr.append(np.trace(rho).real)
        herm.append(np.abs(rho - rho.conj().T).max())
        mins.append(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        states.append(rho.copy())
    return EDTrajectory(
        t_grid, np.array(dens), np.array(prof), np.array(tr), np.array(herm), np.array(mins), tuple(states)
    )
