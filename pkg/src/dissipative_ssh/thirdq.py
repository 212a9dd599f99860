"""Third-quantization spectra: rapidities, Liouvillian eigenvalues, gap, stripes.

The shape matrix X = -2i H + 2 Re(M) (standard Majorana convention) is
similar to ``-1/2 diag(i P(t1, t2), i P(-t1, -t2))`` where P is the 2N x 2N
SSH matrix with imaginary corner potentials i*gamma_l, i*gamma_r. The two
blocks are related by the sublattice gauge transform, so the rapidities are
the eigenvalues of P, each counted twice. Every Liouvillian eigenvalue is
``lambda = i * sum_j v_j E_j`` with v_j in {0, 1} over the 4N rapidities,
equivalently v in {0, 1, 2} with weight C(2, v) over the 2N distinct ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import OpenChainModel, build_bath_matrix, build_majorana_hamiltonian, require_valid

DEFAULT_BUDGET = 3**12
GAP_RELATIVE_ZERO = 1e-12


class SpectrumError(RuntimeError):
    pass


class EnumerationBudgetError(SpectrumError):
    def __init__(self, required: int, budget: int, suggested_max_terms: int | None):
        self.required = required
        self.budget = budget
        self.suggested_max_terms = suggested_max_terms
        hint = "" if suggested_max_terms is None else f"; use max_terms <= {suggested_max_terms}"
        super().__init__(f"enumeration needs {required} sums, budget is {budget}{hint}")


@dataclass(frozen=True)
class ShapeMatrix:
    x: np.ndarray


def build_shape_matrix(model: OpenChainModel) -> ShapeMatrix:
    h = build_majorana_hamiltonian(model).h
    m = build_bath_matrix(model).standard()
    x = -2j * h + 2 * m.real
    # -2iH is real for the standard kernel
    return ShapeMatrix(x.real.copy())


def rapidities_from_shape_matrix(model: OpenChainModel) -> np.ndarray:
    """All 4N rapidities from eig(X) via i E = -2 alpha (cross-check path)."""
    alpha = np.linalg.eigvals(build_shape_matrix(model).x)
    return 2j * alpha


@dataclass(frozen=True)
class ReducedMatrix:
    p: np.ndarray
    t1: float
    t2: float
    gamma_left: float
    gamma_right: float


def build_reduced_matrix(t1, t2, gamma_left, gamma_right, n_cells) -> ReducedMatrix:
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    n = 2 * n_cells
    off = np.where(np.arange(n - 1) % 2 == 0, t1, t2).astype(complex)
    p = np.diag(off, 1) + np.diag(off, -1)
    p[0, 0] += 1j * gamma_left
    p[-1, -1] += 1j * gamma_right
    return ReducedMatrix(p, t1, t2, gamma_left, gamma_right)


@dataclass(frozen=True)
class RapiditySpectrum:
    """Eigenvalues of P (``distinct``, 2N of them) and their doubled multiset.

    ``vectors[:, k]`` is the unit-norm eigenvector of ``distinct[k]`` with its
    largest component made real positive. ``bound`` is ``None`` until
    :func:`classify_bound_states` has run.
    """

    distinct: np.ndarray
    vectors: np.ndarray
    model: OpenChainModel
    bound: np.ndarray | None = None

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.distinct, self.distinct])

    @property
    def copy_index(self) -> np.ndarray:
        """0 for eigenvalues of P(t1, t2), 1 for the P(-t1, -t2) copy."""
        n = self.distinct.size
        return np.repeat([0, 1], n)

    @property
    def bound_flags(self) -> np.ndarray:
        if self.bound is None:
            raise SpectrumError("bound states not classified")
        return np.concatenate([self.bound, self.bound])

    @property
    def n_bound(self) -> int:
        """Bound eigenvalues of P (one copy)."""
        return int(np.count_nonzero(self.bound_flags[: self.distinct.size]))


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    v = vectors / np.linalg.norm(vectors, axis=0)
    idx = np.argmax(np.abs(v), axis=0)
    lead = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(lead) / lead)


def rapidity_spectrum(model: OpenChainModel, classify: bool = True, **classify_kw) -> RapiditySpectrum:
    require_valid(model)
    p = build_reduced_matrix(model.t1, model.t2, model.gamma_left, model.gamma_right, model.n_cells).p
    try:
        vals, vecs = np.linalg.eig(p)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(
            f"eigensolver failed at t1={model.t1}, t2={model.t2}, gamma_l={model.gamma_left}, "
            f"gamma_r={model.gamma_right}, N={model.n_cells}: {exc}"
        ) from exc
    order = np.lexsort((vals.real, vals.imag))
    spec = RapiditySpectrum(vals[order], _fix_phase(vecs[:, order]), model)
    return classify_bound_states(spec, **classify_kw) if classify else spec


def _clusters(values: np.ndarray, rel_tol: float) -> list[np.ndarray]:
    """Groups of nearly degenerate eigenvalues.

    Two values are joined when their distance is below ``rel_tol`` times the
    median nearest-neighbour spacing of the whole set.
    """
    n = values.size
    if n < 3:
        return [np.array([k]) for k in range(n)]
    dist = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(dist, np.inf)
    spacing = np.median(dist.min(axis=1))
    link = dist < rel_tol * spacing
    labels = -np.ones(n, dtype=int)
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = start
        while stack:
            k = stack.pop()
            for j in np.flatnonzero(link[k] & (labels < 0)):
                labels[j] = start
                stack.append(j)
    return [np.flatnonzero(labels == lab) for lab in np.unique(labels)]


def localization_measures(vectors: np.ndarray, edge_sites: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Inverse participation ratio and weight on the ``edge_sites`` sites at each end."""
    w = np.abs(vectors) ** 2
    w = w / w.sum(axis=0)
    ipr = (w**2).sum(axis=0)
    k = min(edge_sites, w.shape[0] // 2)
    edge = w[:k].sum(axis=0) + w[-k:].sum(axis=0)
    return ipr, edge


def classify_bound_states(
    spec: RapiditySpectrum,
    ipr_threshold: float | None = None,
    boundary_weight: float = 0.5,
    edge_sites: int = 4,
    cluster_tol: float = 0.25,
) -> RapiditySpectrum:
    """Flag boundary bound states of P.

    A rapidity is bound when its eigenvector has inverse participation ratio
    above ``ipr_threshold`` (default 4 / 2N) and more than ``boundary_weight``
    of its norm on the ``edge_sites`` sites nearest either end.

    Mirror-image bound states on opposite ends are nearly degenerate and the
    eigensolver returns arbitrary mixtures of them, which halves the IPR.
    Within each near-degenerate cluster (see ``_clusters``) the vectors are
    therefore first rotated into the combinations that diagonalize the
    left-half projector before the criteria are applied.
    """
    n = spec.distinct.size
    if ipr_threshold is None:
        ipr_threshold = 4.0 / n
    vecs = spec.vectors.copy()
    half = np.zeros(n)
    half[: n // 2] = 1.0
    for members in _clusters(spec.distinct, cluster_tol):
        if members.size < 2:
            continue
        q, _ = np.linalg.qr(spec.vectors[:, members])
        _, u = np.linalg.eigh(q.conj().T @ (half[:, None] * q))
        vecs[:, members] = q @ u
    ipr, edge = localization_measures(vecs, edge_sites)
    bound = (ipr > ipr_threshold) & (edge > boundary_weight)
    return replace(spec, bound=bound)


def pairing_distance(a, b) -> float:
    """Largest distance in an optimal one-to-one pairing of two multisets.

    Uses an optimal assignment for moderate sizes; for large inputs a
    lexicographic-sort pairing is used, which is an upper bound on the
    optimum (any pairing is).
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    if a.size <= 5000:
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max())
    ia = np.lexsort((a.imag, np.round(a.real, 8)))
    ib = np.lexsort((b.imag, np.round(b.real, 8)))
    return float(np.abs(a[ia] - b[ib]).max())


@dataclass(frozen=True)
class LiouvillianSpectrum:
    """Liouvillian eigenvalues grouped by occupation-count signature.

    Row k has eigenvalue ``values[k]`` with multiplicity ``multiplicity[k]``;
    ``signatures[k, j]`` in {0, 1, 2} counts how many copies of distinct
    rapidity j are included and ``stripe_index[k]`` how many of those are
    bound-state rapidities.
    """

    values: np.ndarray
    multiplicity: np.ndarray
    signatures: np.ndarray
    stripe_index: np.ndarray
    complete: bool

    def expanded(self) -> np.ndarray:
        return np.repeat(self.values, self.multiplicity)

    @property
    def size(self) -> int:
        return int(self.multiplicity.sum())


def _count_bounded_terms(n_distinct: int, max_terms: int | None) -> int:
    if max_terms is None or max_terms >= 2 * n_distinct:
        return 3**n_distinct
    poly = np.array([1], dtype=object)
    for _ in range(n_distinct):
        poly = np.convolve(poly, np.array([1, 1, 1], dtype=object))[: max_terms + 1]
    return int(sum(poly))


def liouvillian_spectrum(
    spec: RapiditySpectrum, max_terms: int | None = None, budget: int = DEFAULT_BUDGET
) -> LiouvillianSpectrum:
    """Enumerate lambda = i sum v_j E_j over count vectors with sum(v) <= max_terms."""
    e = spec.distinct
    n = e.size
    required = _count_bounded_terms(n, max_terms)
    if required > budget:
        cap = 0
        while cap < 2 * n and _count_bounded_terms(n, cap + 1) <= budget:
            cap += 1
        raise EnumerationBudgetError(required, budget, cap)
    bound = spec.bound if spec.bound is not None else np.zeros(n, dtype=bool)
    limit = 2 * n if max_terms is None else max_terms

    values = np.zeros(1, dtype=complex)
    mult = np.ones(1, dtype=np.int64)
    sig = np.zeros((1, n), dtype=np.int8)
    total = np.zeros(1, dtype=np.int64)
    for j in range(n):
        parts_v, parts_m, parts_s, parts_t = [], [], [], []
        for v, w in ((0, 1), (1, 2), (2, 1)):
            keep = total + v <= limit
            s = sig[keep].copy()
            s[:, j] = v
            parts_v.append(values[keep] + 1j * v * e[j])
            parts_m.append(mult[keep] * w)
            parts_s.append(s)
            parts_t.append(total[keep] + v)
        values = np.concatenate(parts_v)
        mult = np.concatenate(parts_m)
        sig = np.concatenate(parts_s)
        total = np.concatenate(parts_t)
    stripe = (sig[:, bound].astype(np.int64)).sum(axis=1)
    return LiouvillianSpectrum(values, mult, sig, stripe, complete=limit >= 2 * n)


def liouvillian_gap(spec: RapiditySpectrum, relative_zero: float = GAP_RELATIVE_ZERO) -> float:
    """Smallest nonzero decay rate, min Im(E_j) over Im(E_j) above the floor.

    The floor is ``relative_zero`` times the largest |Im E|; gaps below it
    are unresolvable in double precision and treated as zero.
    """
    im = spec.distinct.imag
    scale = np.abs(im).max()
    if scale == 0:
        return 0.0
    resolved = im[im > relative_zero * scale]
    return float(resolved.min()) if resolved.size else 0.0


def gap_from_spectrum(lspec: LiouvillianSpectrum, zero: float = 1e-12) -> float:
    """-max Re(lambda) over eigenvalues with Re(lambda) != 0 (absolute floor ``zero``)."""
    re = lspec.values.real
    nz = re[re < -zero]
    return float(-nz.max()) if nz.size else 0.0


@dataclass(frozen=True)
class Stripe:
    index: int
    count: int
    re_min: float
    re_max: float
    im_min: float
    im_max: float


def stripe_decompose(lspec: LiouvillianSpectrum) -> list[Stripe]:
    """Partition by number of included bound rapidities; stripe 0 is rightmost."""
    out = []
    for k in np.unique(lspec.stripe_index):
        sel = lspec.stripe_index == k
        vals = lspec.values[sel]
        out.append(
            Stripe(
                int(k),
                int(lspec.multiplicity[sel].sum()),
                float(vals.real.min()),
                float(vals.real.max()),
                float(vals.imag.min()),
                float(vals.imag.max()),
            )
        )
    return out


def stripe_values(lspec: LiouvillianSpectrum, index: int) -> np.ndarray:
    sel = lspec.stripe_index == index
    return np.repeat(lspec.values[sel], lspec.multiplicity[sel])
