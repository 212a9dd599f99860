"""Boundary-dissipated SSH chain and its Majorana-basis matrices.

Two Majorana conventions are used in this package.

``standard``
    w[2j-1] = c_j + c_j^dag, w[2j] = i (c_j - c_j^dag), {w_i, w_k} = 2 delta.
    Used by the Hamiltonian kernel and by the shape matrix X in ``thirdq``.

``normalized``
    wbar[2j-1] = i (c_j - c_j^dag) / sqrt(2), wbar[2j] = (c_j + c_j^dag) / sqrt(2),
    {wbar_i, wbar_k} = delta. Used by the correlation-matrix dynamics.

They are related by ``wbar = Pi w / sqrt(2)`` where ``Pi`` swaps the two
Majoranas of every site. A quadratic kernel therefore maps as
``K_normalized = 2 Pi K_standard Pi`` and a bath matrix as
``M_standard = Pi M_normalized Pi / 2``.

The bath matrix is stored in the normalized convention because that is the
form in which the corner blocks read ``G(gamma) = gamma/2 [[1, -+i], [+-i, 1]]``.

Sites are numbered 1..2N (0..2N-1 internally). Site 1 is sublattice A of
cell 1 and carries the ``left`` dissipator; site 2N is sublattice B of cell N
and carries the ``right`` dissipator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Kind(str, Enum):
    LOSS = "loss"
    GAIN = "gain"


class ModelError(ValueError):
    """Raised when a builder receives an invalid model."""


@dataclass(frozen=True)
class DissipatorSpec:
    side: Side
    kind: Kind
    strength: float

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "strength", float(self.strength))


@dataclass(frozen=True)
class OpenChainModel:
    """SSH chain with ``n_cells`` unit cells and optional boundary baths.

    Construction never raises on physically invalid parameters so that
    :func:`validate_model` can report them; the matrix builders do raise.
    """

    t1: float
    t2: float = 1.0
    n_cells: int = 1
    dissipators: tuple[DissipatorSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "dissipators", tuple(self.dissipators))

    @classmethod
    def with_baths(cls, t1, t2=1.0, n_cells=1, *, left=None, right=None):
        """Convenience constructor; ``left``/``right`` are ``(kind, gamma)``
        pairs or ``None``."""
        diss = []
        for side, spec in ((Side.LEFT, left), (Side.RIGHT, right)):
            if spec is not None:
                kind, gamma = spec
                diss.append(DissipatorSpec(side, kind, gamma))
        return cls(float(t1), float(t2), int(n_cells), tuple(diss))

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    @property
    def n_majorana(self) -> int:
        return 4 * self.n_cells

    def dissipator(self, side) -> DissipatorSpec | None:
        side = Side(side)
        for d in self.dissipators:
            if d.side is side:
                return d
        return None

    @property
    def gamma_left(self) -> float:
        d = self.dissipator(Side.LEFT)
        return 0.0 if d is None else d.strength

    @property
    def gamma_right(self) -> float:
        d = self.dissipator(Side.RIGHT)
        return 0.0 if d is None else d.strength

    def with_cells(self, n_cells: int) -> OpenChainModel:
        return replace(self, n_cells=int(n_cells))

    def with_strengths(self, gamma_left: float, gamma_right: float) -> OpenChainModel:
        """Same kinds, new strengths. A side without a dissipator gets a loss
        dissipator if its new strength is nonzero."""
        new = []
        for side, g in ((Side.LEFT, gamma_left), (Side.RIGHT, gamma_right)):
            d = self.dissipator(side)
            if d is not None:
                new.append(replace(d, strength=float(g)))
            elif g != 0:
                new.append(DissipatorSpec(side, Kind.LOSS, g))
        return replace(self, dissipators=tuple(new))

    def mirrored(self) -> OpenChainModel:
        """Model under the site reflection x -> 2N + 1 - x.

        The hopping pattern t1, t2, ..., t1 is palindromic, so only the
        dissipators swap sides.
        """
        flip = {Side.LEFT: Side.RIGHT, Side.RIGHT: Side.LEFT}
        return replace(
            self,
            dissipators=tuple(replace(d, side=flip[d.side]) for d in self.dissipators),
        )

    def as_dict(self) -> dict:
        out = {"t1": self.t1, "t2": self.t2, "n_cells": self.n_cells}
        for side in Side:
            d = self.dissipator(side)
            out[f"{side.value}_kind"] = None if d is None else d.kind.value
            out[f"{side.value}_gamma"] = 0.0 if d is None else d.strength
        return out


@dataclass(frozen=True)
class Diagnostics:
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.messages


def validate_model(model: OpenChainModel) -> Diagnostics:
    msgs = []
    if not isinstance(model.n_cells, (int, np.integer)) or model.n_cells < 1:
        msgs.append("n_cells must be a positive integer")
    if not model.t2 > 0:
        msgs.append("t2 must be positive")
    if not model.t1 >= 0:
        msgs.append("t1 must be non-negative")
    seen = set()
    for d in model.dissipators:
        if d.side in seen:
            msgs.append(f"duplicate boundary: more than one dissipator on the {d.side.value} side")
        seen.add(d.side)
        if not d.strength >= 0:
            msgs.append(f"{d.side.value} dissipation strength must be non-negative")
    return Diagnostics(tuple(msgs))


def require_valid(model: OpenChainModel) -> None:
    diag = validate_model(model)
    if not diag.ok:
        raise ModelError("; ".join(diag.messages))


def site_hopping_matrix(t1: float, t2: float, n_cells: int) -> np.ndarray:
    """Real symmetric 2N x 2N single-particle matrix with bonds t1, t2, ..., t1."""
    n = 2 * n_cells
    off = np.where(np.arange(n - 1) % 2 == 0, t1, t2).astype(float)
    return np.diag(off, 1) + np.diag(off, -1)


def pair_swap(n_majorana: int) -> np.ndarray:
    """Permutation matrix exchanging the two Majoranas of every site."""
    perm = np.arange(n_majorana).reshape(-1, 2)[:, ::-1].ravel()
    return np.eye(n_majorana)[perm]


@dataclass(frozen=True)
class MajoranaHamiltonian:
    """Antisymmetric kernel ``h`` with H = sum_jk w_j h_jk w_k (standard convention)."""

    h: np.ndarray

    def site_matrix(self) -> np.ndarray:
        # H_{2a-1,2b} = -i t_ab / 4
        return (4j * self.h[0::2, 1::2]).real

    def normalized(self) -> np.ndarray:
        swap = pair_swap(self.h.shape[0])
        return 2 * swap @ self.h @ swap


def build_majorana_hamiltonian(model: OpenChainModel) -> MajoranaHamiltonian:
    require_valid(model)
    t = site_hopping_matrix(model.t1, model.t2, model.n_cells)
    h = np.zeros((model.n_majorana, model.n_majorana), dtype=complex)
    h[0::2, 1::2] = -0.25j * t
    h[1::2, 0::2] = 0.25j * t.T
    return MajoranaHamiltonian(h)


def bath_block(kind, gamma: float) -> np.ndarray:
    """Corner block G_{loss/gain}(gamma) in the normalized convention."""
    s = 1.0 if Kind(kind) is Kind.LOSS else -1.0
    return 0.5 * gamma * np.array([[1.0, -1j * s], [1j * s, 1.0]])


@dataclass(frozen=True)
class BathMatrix:
    """Hermitian bath matrix M = sum_mu l_mu l_mu^dag (normalized convention)."""

    m: np.ndarray

    @property
    def m_r(self) -> np.ndarray:
        return self.m.real

    @property
    def m_i(self) -> np.ndarray:
        return self.m.imag

    def standard(self) -> np.ndarray:
        swap = pair_swap(self.m.shape[0])
        return 0.5 * swap @ self.m @ swap


def build_bath_matrix(model: OpenChainModel) -> BathMatrix:
    require_valid(model)
    m = np.zeros((model.n_majorana, model.n_majorana), dtype=complex)
    for d in model.dissipators:
        i = 0 if d.side is Side.LEFT else model.n_majorana - 2
        m[i : i + 2, i : i + 2] += bath_block(d.kind, d.strength)
    return BathMatrix(m)
