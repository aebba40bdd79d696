"""Projectors, spectral measures and Murray-von Neumann comparison.

Equivalence and the preorder are decided inside the full matrix algebra
B(H), or blockwise inside a direct sum of full matrix blocks when ``blocks``
(a list of block sizes) is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    cluster_eigenvalues,
    dagger,
    eig_hermitian,
)
from .staralg import StarAlgebra


@dataclass(frozen=True)
class Projector:
    matrix: np.ndarray
    rank: int

    @classmethod
    def from_matrix(cls, p, tol: Tolerances = DEFAULT_TOL) -> "Projector":
        p = as_matrix(p, "projector")
        es = eig_hermitian(p, tol)
        if np.linalg.norm(p @ p - p, 2) > tol.eig * max(1.0, p.shape[0]):
            raise PreconditionError("matrix is not idempotent", invariant="idempotent")
        lam = es.eigenvalues
        off = np.minimum(np.abs(lam), np.abs(lam - 1.0))
        if off.max() > tol.cluster:
            raise PreconditionError(
                f"spectrum not contained in {{0, 1}} (worst {off.max():.3e})",
                invariant="projector spectrum",
            )
        return cls(matrix=p, rank=int(np.sum(lam > 0.5)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def range_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the range."""
        w, u = np.linalg.eigh(0.5 * (self.matrix + dagger(self.matrix)))
        return u[:, w > 0.5]


def _proj(p, tol: Tolerances) -> Projector:
    return p if isinstance(p, Projector) else Projector.from_matrix(p, tol)


@dataclass(frozen=True)
class PartialIsometry:
    """``U`` with ``initial = U^dagger U`` and ``final = U U^dagger``."""

    matrix: np.ndarray
    initial: Projector
    final: Projector

    @classmethod
    def from_matrix(cls, u, tol: Tolerances = DEFAULT_TOL) -> "PartialIsometry":
        u = as_matrix(u, "partial isometry")
        initial = Projector.from_matrix(dagger(u) @ u, tol)
        final = Projector.from_matrix(u @ dagger(u), tol)
        return cls(matrix=u, initial=initial, final=final)


@dataclass(frozen=True)
class PVM:
    values: np.ndarray
    projectors: List[Projector]

    def reconstruct(self) -> np.ndarray:
        return sum(v * p.matrix for v, p in zip(self.values, self.projectors))

    def projector_for(self, lo: float, hi: float) -> np.ndarray:
        """Sum of spectral projectors whose value lies in ``[lo, hi]``."""
        n = self.projectors[0].dim
        out = np.zeros((n, n), dtype=complex)
        for v, p in zip(self.values, self.projectors):
            if lo <= v <= hi:
                out = out + p.matrix
        return out


def spectral_pvm(x, tol: Tolerances = DEFAULT_TOL) -> PVM:
    es = eig_hermitian(x, tol)
    groups = cluster_eigenvalues(es.eigenvalues, tol)
    values, projs = [], []
    for g in groups:
        vecs = es.eigenvectors[:, g]
        values.append(float(np.mean(es.eigenvalues[g])))
        projs.append(Projector(matrix=vecs @ dagger(vecs), rank=len(g)))
    return PVM(values=np.array(values), projectors=projs)


def leq_positive(p, q, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``p <= q`` in the operator order: ``q - p`` positive semidefinite."""
    p, q = _proj(p, tol), _proj(q, tol)
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    return bool(eig_hermitian(q.matrix - p.matrix, tol).eigenvalues[0] >= -tol.eig)


def _block_slices(blocks: Sequence[int], n: int) -> List[slice]:
    if sum(blocks) != n or any(b < 1 for b in blocks):
        raise DimensionError(f"block sizes {list(blocks)} do not partition {n}")
    edges = np.cumsum([0] + list(blocks))
    return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def _block_parts(p: Projector, blocks, tol: Tolerances) -> List[Projector]:
    sl = _block_slices(blocks, p.dim)
    m = p.matrix.copy()
    for s in sl:
        m[s, s] = 0
    if np.abs(m).max() > tol.eig:
        raise PreconditionError(
            "projector is not block diagonal for the given blocks", invariant="block membership"
        )
    return [Projector.from_matrix(p.matrix[s, s], tol) for s in sl]


def _range_map(p: Projector, q: Projector) -> np.ndarray:
    return q.range_basis() @ dagger(p.range_basis())


def mvn_equivalent(
    p, q, tol: Tolerances = DEFAULT_TOL, blocks: Optional[Sequence[int]] = None
) -> Optional[PartialIsometry]:
    """Witness ``U`` with ``U^dagger U = p`` and ``U U^dagger = q``, or None."""
    p, q = _proj(p, tol), _proj(q, tol)
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if blocks is None:
        if p.rank != q.rank:
            return None
        u = _range_map(p, q)
    else:
        pp, qq = _block_parts(p, blocks, tol), _block_parts(q, blocks, tol)
        if any(a.rank != b.rank for a, b in zip(pp, qq)):
            return None
        u = np.zeros((p.dim, p.dim), dtype=complex)
        for s, a, b in zip(_block_slices(blocks, p.dim), pp, qq):
            u[s, s] = _range_map(a, b)
    return PartialIsometry(matrix=u, initial=p, final=q)


def _subprojector(q: Projector, rank: int) -> Projector:
    vecs = q.range_basis()[:, :rank]
    return Projector(matrix=vecs @ dagger(vecs), rank=rank)


def preceq_witness(
    p, q, tol: Tolerances = DEFAULT_TOL, blocks: Optional[Sequence[int]] = None
) -> Optional[Tuple[Projector, PartialIsometry]]:
    """``(E, U)`` with ``p ~ E <= q`` via ``U``, or None when ``p`` is not below ``q``."""
    p, q = _proj(p, tol), _proj(q, tol)
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if blocks is None:
        if p.rank > q.rank:
            return None
        e = _subprojector(q, p.rank)
    else:
        pp, qq = _block_parts(p, blocks, tol), _block_parts(q, blocks, tol)
        if any(a.rank > b.rank for a, b in zip(pp, qq)):
            return None
        m = np.zeros((p.dim, p.dim), dtype=complex)
        for s, a, b in zip(_block_slices(blocks, p.dim), pp, qq):
            m[s, s] = _subprojector(b, a.rank).matrix
        e = Projector(matrix=m, rank=p.rank)
    u = mvn_equivalent(p, e, tol, blocks)
    return e, u


def preceq(p, q, tol: Tolerances = DEFAULT_TOL, blocks: Optional[Sequence[int]] = None) -> bool:
    return preceq_witness(p, q, tol, blocks) is not None


def is_minimal(p, alg: StarAlgebra, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff ``p a p`` is a multiple of ``p`` for every ``a`` in ``alg``."""
    p = _proj(p, tol)
    if p.dim != alg.ambient_dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {alg.ambient_dim}")
    if not alg.contains(p.matrix, tol):
        raise PreconditionError("projector is not in the algebra", invariant="algebra membership")
    if p.rank == 0:
        return False
    pm = p.matrix
    pp = np.vdot(pm, pm).real
    for a in alg.basis:
        pap = pm @ a @ pm
        t = np.vdot(pm, pap) / pp
        if np.linalg.norm(pap - t * pm) > tol.eig * max(1.0, np.linalg.norm(a)):
            return False
    return True
