"""Closed-form results for the SSH chain with imaginary boundary potentials.

Bulk solutions of P psi = E psi with the plane-wave ansatz z = e^{i theta}
have E = +-sqrt(t1^2 + t2^2 + 2 t1 t2 cos theta). The boundary conditions
quantize theta through

    p1 sin(N theta) - p2 sin((N+1) theta) + p3 sin((N-1) theta) = 0,
    p1 = i t2 (gl + gr) E - (t2^3 - t2 gl gr),  p2 = t1 t2^2,  p3 = t1 gl gr.

For a single dissipated boundary and N -> infinity, localized solutions
with theta = pi + i theta_I have x = e^{theta_I} in {1/t1, x_+, x_-}; only
x = 1/t1 gives E = 0 (the dark state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RESIDUAL_EPS = 1e-300


@dataclass(frozen=True)
class ThetaPoint:
    theta: complex
    branch: int

    def __post_init__(self):
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")


@dataclass(frozen=True)
class BoundStatePrediction:
    exists: bool
    x: float
    energy: complex
    kind: str
    theta: complex | None = None
    localized_side: str | None = None
    marginal: bool = False


def bulk_energy(theta: complex, t1: float, t2: float, branch: int = 1) -> complex:
    return branch * np.sqrt(complex(t1 * t1 + t2 * t2 + 2 * t1 * t2 * np.cos(complex(theta))))


def _terms(theta, energy, t1, t2, gl, gr, n):
    p1 = 1j * t2 * (gl + gr) * energy - (t2**3 - t2 * gl * gr)
    p2 = t1 * t2 * t2
    p3 = t1 * gl * gr
    return p1 * np.sin(n * theta), p2 * np.sin((n + 1) * theta), p3 * np.sin((n - 1) * theta)


def theta_residual(theta, t1, t2, gamma_left, gamma_right, n_cells, branch: int = 1, energy=None) -> complex:
    """Residual of the quantization condition, relative to its largest term.

    ``energy`` defaults to ``bulk_energy(theta, t1, t2, branch)``.
    """
    theta = complex(theta)
    if energy is None:
        energy = bulk_energy(theta, t1, t2, branch)
    a, b, c = _terms(theta, energy, t1, t2, gamma_left, gamma_right, n_cells)
    scale = max(abs(a), abs(b), abs(c), RESIDUAL_EPS)
    return (a - b + c) / scale


def _wrap(theta: complex) -> complex:
    re = math.fmod(theta.real, 2 * math.pi)
    if re < 0:
        re += 2 * math.pi
    return complex(re, theta.imag)


def energy_to_theta(energy, t1, t2, gamma_left=0.0, gamma_right=0.0, n_cells=None) -> ThetaPoint:
    """Invert the bulk dispersion.

    Candidates are theta, 2 pi - theta and their conjugates, each with the
    branch sign that reproduces ``energy``. When ``n_cells`` is given the
    candidate with the smallest quantization residual is returned; ties (and
    the case without ``n_cells``) prefer theta_I >= 0, then the smaller theta_R.
    """
    if not (t1 > 0 and t2 > 0):
        raise ValueError("energy_to_theta requires t1 > 0 and t2 > 0")
    energy = complex(energy)
    base = complex(np.arccos(complex((energy * energy - t1 * t1 - t2 * t2) / (2 * t1 * t2))))
    cands = []
    for th in (base, 2 * math.pi - base, base.conjugate(), 2 * math.pi - base.conjugate()):
        th = _wrap(th)
        e_plus = bulk_energy(th, t1, t2, 1)
        for branch, e in ((1, e_plus), (-1, -e_plus)):
            err = abs(e - energy)
            if err <= 1e-8 * max(1.0, abs(energy)):
                cands.append((th, branch, err))
    if not cands:  # round-off at branch cuts; fall back to the closest
        th = _wrap(base)
        e_plus = bulk_energy(th, t1, t2, 1)
        branch = 1 if abs(e_plus - energy) <= abs(e_plus + energy) else -1
        return ThetaPoint(th, branch)

    def key(c):
        th, branch, _ = c
        res = 0.0
        if n_cells is not None:
            res = abs(theta_residual(th, t1, t2, gamma_left, gamma_right, n_cells, energy=energy))
        return (round(res, 12), th.imag < 0, th.real)

    th, branch, _ = min(cands, key=key)
    return ThetaPoint(th, branch)


def _check_single_boundary(gamma_left, gamma_right):
    if gamma_left > 0 and gamma_right > 0:
        raise ValueError("prediction requires dissipation on a single boundary")


def dark_state_prediction(t1: float, t2: float, gamma: float, dissipated_side: str = "left") -> BoundStatePrediction:
    """Dark state of a chain dissipated on one boundary (t2 normalized to 1).

    Exists for 0 < t1/t2 <= 1 with x = t2/t1, E = 0, localized opposite the
    dissipator with amplitude shrinking by t1/t2 per cell into the bulk. It
    does not depend on ``gamma``. t1 = t2 is flagged marginal: the decay
    length diverges and the state is not normalizable-localized.
    """
    if dissipated_side not in ("left", "right"):
        raise ValueError("dissipated_side must be 'left' or 'right'")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    r = t1 / t2
    other = "right" if dissipated_side == "left" else "left"
    if not 0 < r <= 1:
        return BoundStatePrediction(False, math.nan, complex(math.nan, math.nan), "dark")
    x = 1.0 / r
    theta = complex(math.pi, math.log(x))
    return BoundStatePrediction(True, x, 0j, "dark", theta, other, marginal=(r == 1))


def dark_state_for_model(model) -> BoundStatePrediction:
    """:func:`dark_state_prediction` for an :class:`OpenChainModel`; rejects
    models dissipated on both ends."""
    _check_single_boundary(model.gamma_left, model.gamma_right)
    side = "left" if model.gamma_left > 0 else "right"
    return dark_state_prediction(model.t1, model.t2, max(model.gamma_left, model.gamma_right), side)


def bound_state_roots(t1: float, gamma: float) -> tuple[float, float] | None:
    """x_+ and x_- for t2 = 1, or ``None`` when they are not real."""
    disc = 1 + gamma**4 + gamma**2 * (2 - 4 * t1 * t1)
    if disc < 0:
        return None
    disc = math.sqrt(disc)
    return (1 + gamma**2 + disc) / (2 * t1), (1 + gamma**2 - disc) / (2 * t1)


def bound_energy_from_x(x: float, t1: float) -> complex:
    """E at theta = pi + i ln x, branch with Im E >= 0 (t2 = 1)."""
    cosh = 0.5 * (x + 1.0 / x)
    e = np.sqrt(complex(1 + t1 * t1 - 2 * t1 * cosh))
    return e if e.imag >= 0 else -e


def boundary_bound_state_prediction(t1: float, t2: float, gamma: float) -> list[BoundStatePrediction]:
    """Bound states at the dissipated boundary (t2 must be 1).

    Only normalizable solutions x > 1 are kept; in the nontrivial phase this
    keeps x_+ and drops x_-.
    """
    if not math.isclose(t2, 1.0):
        raise ValueError("boundary bound-state formula assumes t2 = 1")
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    out = []
    for x in bound_state_roots(t1, gamma) or ():
        if x > 1:
            theta = complex(math.pi, math.log(x))
            out.append(BoundStatePrediction(True, x, bound_energy_from_x(x, t1), "bound", theta))
    return out
