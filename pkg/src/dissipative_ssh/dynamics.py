"""Gaussian-state dynamics in the normalized Majorana convention.

The correlation matrix Gamma_jk = i <wbar_j wbar_k> - (i/2) delta_jk obeys

    dGamma/dt = Xbar Gamma + Gamma Xbar^T + Ybar,
    Xbar = -2i Hbar - 2 Re(M),   Ybar = 2 Im(M),

with Hbar the normalized Hamiltonian kernel and M the bath matrix. Xbar is
real and equals ``-2 Pi X^T Pi`` for the shape matrix X, so its eigenvalues
are exactly i * E_j for the 4N rapidities E_j.

Propagation diagonalizes Xbar once. In its eigenbasis (Xbar = V D V^-1,
Gamma = V G V^T) every entry evolves independently:

    G_ij(t) = G_ij(0) e^{s_ij t} + C_ij (e^{s_ij t} - 1) / s_ij,   s_ij = d_i + d_j,

with C = V^-1 Ybar V^-T. This equals e^{Xbar t}(Gamma0 - Gamma_s)e^{Xbar^T t} + Gamma_s
whenever the steady state exists, and stays finite when some s_ij vanish
(dark modes), where the second factor tends to t.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .model import OpenChainModel, build_bath_matrix, build_majorana_hamiltonian

EIGEN_CONDITION_LIMIT = 1e12
STEADY_SUM_FLOOR = 1e-14


class SteadyStateError(RuntimeError):
    def __init__(self, message, min_rate_sum=None, condition=None):
        super().__init__(message)
        self.min_rate_sum = min_rate_sum
        self.condition = condition


class NearSingularWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class CorrelationMatrix:
    gamma: np.ndarray
    time: float = 0.0

    @property
    def n_sites(self) -> int:
        return self.gamma.shape[0] // 2


@dataclass(frozen=True)
class DynamicsMatrices:
    x_bar: np.ndarray
    y_bar: np.ndarray


def build_dynamics_matrices(model: OpenChainModel) -> DynamicsMatrices:
    h_bar = build_majorana_hamiltonian(model).normalized()
    m = build_bath_matrix(model).m
    x_bar = (-2j * h_bar).real - 2 * m.real
    return DynamicsMatrices(np.ascontiguousarray(x_bar), 2 * m.imag)


def initial_fully_occupied(n_cells: int) -> CorrelationMatrix:
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    return _diagonal_state(2 * n_cells, 0.5)


def vacuum_state(n_cells: int) -> CorrelationMatrix:
    return _diagonal_state(2 * n_cells, -0.5)


def _diagonal_state(n_sites, value) -> CorrelationMatrix:
    g = np.zeros((2 * n_sites, 2 * n_sites))
    idx = np.arange(n_sites)
    g[2 * idx, 2 * idx + 1] = value
    g[2 * idx + 1, 2 * idx] = -value
    return CorrelationMatrix(g, 0.0)


def site_density_profile(corr) -> np.ndarray:
    g = corr.gamma if isinstance(corr, CorrelationMatrix) else np.asarray(corr)
    idx = np.arange(g.shape[0] // 2)
    return 0.5 + g[2 * idx, 2 * idx + 1]


def cell_density_profile(corr) -> np.ndarray:
    """Mean site density of each unit cell."""
    return site_density_profile(corr).reshape(-1, 2).mean(axis=1)


def density(corr) -> float:
    return float(site_density_profile(corr).mean())


class _Eigenbasis:
    def __init__(self, x_bar: np.ndarray):
        self.d, self.v = np.linalg.eig(x_bar)
        self.condition = np.linalg.cond(self.v)
        self.v_inv = np.linalg.inv(self.v)
        self.s = self.d[:, None] + self.d[None, :]

    def to_eigen(self, a):
        return self.v_inv @ a @ self.v_inv.T

    def from_eigen(self, g):
        out = (self.v @ g @ self.v.T).real
        return 0.5 * (out - out.T)


def lyapunov_residual(mats: DynamicsMatrices, gamma: np.ndarray) -> float:
    x = mats.x_bar
    return float(np.abs(x @ gamma + gamma @ x.T + mats.y_bar).max())


def steady_state(model: OpenChainModel, tol: float = 1e-10) -> CorrelationMatrix:
    """Solve Xbar Gamma + Gamma Xbar^T + Ybar = 0.

    Raises :class:`SteadyStateError` when some pairwise eigenvalue sum of
    Xbar is below 1e-14 in magnitude (no dissipation, or an exponentially
    small gap below double precision). Emits :class:`NearSingularWarning`
    when the solve is accurate but poorly conditioned.
    """
    mats = build_dynamics_matrices(model)
    eb = _Eigenbasis(mats.x_bar)
    min_sum = float(np.abs(eb.s).min())
    if min_sum < STEADY_SUM_FLOOR:
        raise SteadyStateError(
            f"Lyapunov operator singular: min |d_i + d_j| = {min_sum:.3g} "
            f"(eigenbasis condition {eb.condition:.3g})",
            min_rate_sum=min_sum,
            condition=eb.condition,
        )
    gamma = None
    if eb.condition < EIGEN_CONDITION_LIMIT:
        g = -eb.to_eigen(mats.y_bar) / eb.s
        gamma = eb.from_eigen(g)
        if lyapunov_residual(mats, gamma) >= tol:
            gamma = None
    if gamma is None:
        gamma = solve_continuous_lyapunov(mats.x_bar, -mats.y_bar)
        gamma = 0.5 * (gamma - gamma.T)
    res = lyapunov_residual(mats, gamma)
    if res >= tol:
        raise SteadyStateError(
            f"Lyapunov residual {res:.3g} above tolerance {tol:g} "
            f"(min |d_i + d_j| = {min_sum:.3g}, condition {eb.condition:.3g})",
            min_rate_sum=min_sum,
            condition=eb.condition,
        )
    if min_sum < 1e-8:
        warnings.warn(
            f"steady state nearly singular: min |d_i + d_j| = {min_sum:.3g}",
            NearSingularWarning,
            stacklevel=2,
        )
    return CorrelationMatrix(gamma, np.inf)


def _phi(s, t):
    """(e^{s t} - 1) / s, continuous at s = 0."""
    st = s * t
    small = np.abs(st) < 1e-10
    safe = np.where(small, 1.0, s)
    return np.where(small, t * (1 + 0.5 * st), np.expm1(st) / safe)


def _van_loan_step(x, y, t):
    """(e^{x t}, int_0^t e^{x u} y e^{x^T u} du).

    The block exponential contains e^{-x h}, which grows for a stable x, so
    it is only evaluated on a short step h = t / 2^k and then squared up:
    P_2h = P_h P_h, D_2h = P_h D_h P_h^T + D_h.
    """
    n = x.shape[0]
    norm = np.abs(x).sum(axis=0).max()
    k = max(0, int(np.ceil(np.log2(max(norm * t, 1e-300) / 0.5)))) if norm > 0 else 0
    h = t / 2**k
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -x
    block[:n, n:] = y
    block[n:, n:] = x.T
    f = expm(block * h)
    prop = f[n:, n:].T
    drive = prop @ f[:n, n:]
    for _ in range(k):
        drive = prop @ drive @ prop.T + drive
        prop = prop @ prop
    return prop, drive


def evolve(gamma0, model: OpenChainModel, t_grid) -> list[CorrelationMatrix]:
    """Gamma(t) for every t in an ascending, non-negative grid."""
    g0 = gamma0.gamma if isinstance(gamma0, CorrelationMatrix) else np.asarray(gamma0, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and (t_grid[0] < 0 or np.any(np.diff(t_grid) < 0)):
        raise ValueError("t_grid must be ascending and non-negative")
    mats = build_dynamics_matrices(model)
    eb = _Eigenbasis(mats.x_bar)
    out = []
    if eb.condition <= EIGEN_CONDITION_LIMIT:
        b = eb.to_eigen(g0)
        c = eb.to_eigen(mats.y_bar)
        for t in t_grid:
            if t == 0:
                out.append(CorrelationMatrix(g0.copy(), 0.0))
                continue
            g = b * np.exp(eb.s * t) + c * _phi(eb.s, t)
            out.append(CorrelationMatrix(eb.from_eigen(g), float(t)))
        return out
    for t in t_grid:
        if t == 0:
            out.append(CorrelationMatrix(g0.copy(), 0.0))
            continue
        prop, drive = _van_loan_step(mats.x_bar, mats.y_bar, t)
        g = prop @ g0 @ prop.T + drive
        out.append(CorrelationMatrix(0.5 * (g - g.T), float(t)))
    return out


def log_time_grid(t_min: float = 1e-2, t_max: float = 1e3, n: int = 200, include_zero: bool = True) -> np.ndarray:
    grid = np.logspace(np.log10(t_min), np.log10(t_max), n)
    return np.concatenate([[0.0], grid]) if include_zero else grid


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    density: np.ndarray
    profiles: np.ndarray | None = None
    max_antisymmetry: float = 0.0


def density_trajectory(model: OpenChainModel, t_grid, gamma0=None, profiles: bool = False) -> Trajectory:
    if gamma0 is None:
        gamma0 = initial_fully_occupied(model.n_cells)
    states = evolve(gamma0, model, t_grid)
    prof = np.array([site_density_profile(s) for s in states])
    asym = max((float(np.abs(s.gamma + s.gamma.T).max()) for s in states), default=0.0)
    return Trajectory(np.asarray(t_grid, float), prof.mean(axis=1), prof if profiles else None, asym)


@dataclass(frozen=True)
class DualityReport:
    times: np.ndarray
    primary: Trajectory
    dual: Trajectory
    model: OpenChainModel
    dual_model: OpenChainModel

    @property
    def difference(self) -> np.ndarray:
        return np.abs(self.primary.density - self.dual.density)

    @property
    def late_max_difference(self) -> float:
        """Max |n - n_dual| over the second half of the grid."""
        half = self.times.size // 2
        return float(self.difference[half:].max())

    def max_difference_between(self, t_lo: float, t_hi: float) -> float:
        sel = (self.times >= t_lo) & (self.times <= t_hi)
        return float(self.difference[sel].max())


def dual_strength(gamma: float) -> float:
    # an absent bath stays absent
    return 0.0 if gamma == 0 else 1.0 / gamma


def duality_report(
    t1, t2, gamma_left, gamma_right, n_cells, t_grid, left_kind="loss", right_kind="loss", threads: int = 1
) -> DualityReport:
    """Compare n(t) at (gamma_l, gamma_r) with n(t) at (1/gamma_l, 1/gamma_r).

    A zero strength means no bath on that side and is kept as zero.
    """
    left = (left_kind, gamma_left) if gamma_left > 0 else None
    right = (right_kind, gamma_right) if gamma_right > 0 else None
    model = OpenChainModel.with_baths(t1, t2, n_cells, left=left, right=right)
    dual = model.with_strengths(dual_strength(gamma_left), dual_strength(gamma_right))
    t_grid = np.asarray(t_grid, dtype=float)
    with ThreadPoolExecutor(max_workers=max(1, min(threads, 2))) as pool:
        a, b = pool.map(lambda m: density_trajectory(m, t_grid), (model, dual))
    return DualityReport(t_grid, a, b, model, dual)
