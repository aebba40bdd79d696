"""Finite-dimensional *-algebras of matrices.

An algebra is stored as an orthonormal basis (under the Hilbert-Schmidt inner
product) of its linear span. In finite dimension every operator topology
agrees, so closing under sums, products and adjoints is enough to get a von
Neumann algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import DEFAULT_TOL, Tolerances, as_matrix


def _vec(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Stack matrices as columns of an ``n^2 x k`` array."""
    if len(mats) == 0:
        return np.zeros((0, 0), dtype=complex)
    return np.stack([np.asarray(m, dtype=complex).reshape(-1) for m in mats], axis=1)


def _unvec(cols: np.ndarray, n: int) -> List[np.ndarray]:
    return [cols[:, k].reshape(n, n).copy() for k in range(cols.shape[1])]


def _extend_basis(q: np.ndarray, cand: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Orthonormal columns spanning ``span(q) + span(cand)``.

    Candidates are normalized, projected off ``q`` (twice, for stability) and
    the residual directions kept when their singular value exceeds
    ``tol.rank`` times the largest singular value of the normalized candidates.
    """
    if cand.shape[1] == 0:
        return q
    norms = np.linalg.norm(cand, axis=0)
    keep = norms > 0
    if not np.any(keep):
        return q
    cand = cand[:, keep] / norms[keep]
    scale = np.linalg.norm(cand, 2)
    r = cand
    if q.shape[1]:
        r = r - q @ (q.conj().T @ r)
        r = r - q @ (q.conj().T @ r)
    u, s, _ = np.linalg.svd(r, full_matrices=False)
    new = u[:, s > tol.rank * scale]
    if new.shape[1] == 0:
        return q
    if q.shape[1]:
        new = new - q @ (q.conj().T @ new)
        new, _ = np.linalg.qr(new)
        return np.hstack([q, new])
    return new


def _residuals(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Relative norm of the part of each column of ``x`` outside ``span(q)``."""
    norms = np.linalg.norm(x, axis=0)
    r = x - q @ (q.conj().T @ x) if q.shape[1] else x
    out = np.linalg.norm(r, axis=0)
    nz = norms > 0
    out[nz] = out[nz] / norms[nz]
    return out


def _pair_products(q: np.ndarray, n: int) -> np.ndarray:
    mats = q.T.reshape(-1, n, n)
    prods = np.einsum("aij,bjk->abik", mats, mats)
    return prods.reshape(-1, n * n).T


@dataclass(frozen=True)
class StarAlgebra:
    """Unital *-closed span of ``ambient_dim x ambient_dim`` matrices."""

    ambient_dim: int
    coords: np.ndarray = field(repr=False)  # n^2 x d, orthonormal columns

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def basis(self) -> List[np.ndarray]:
        return _unvec(self.coords, self.ambient_dim)

    @property
    def contains_identity(self) -> bool:
        eye = np.eye(self.ambient_dim, dtype=complex).reshape(-1, 1)
        return bool(_residuals(self.coords, eye)[0] < DEFAULT_TOL.rank)

    @classmethod
    def from_basis(cls, mats: Iterable, tol: Tolerances = DEFAULT_TOL, *, check: bool = True):
        """Orthonormalize ``mats`` and, unless ``check`` is off, validate closure."""
        mats = [as_matrix(m, "basis element") for m in mats]
        if not mats:
            raise DimensionError("an algebra needs at least one basis element")
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n):
                raise DimensionError(f"basis elements must all be {n}x{n}, got {m.shape}")
        q = _extend_basis(np.zeros((n * n, 0), dtype=complex), _vec(mats), tol)
        alg = cls(ambient_dim=n, coords=q)
        if check:
            alg.validate(tol)
        return alg

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> None:
        """Raise PreconditionError naming the first violated invariant."""
        q, n = self.coords, self.ambient_dim
        gram = q.conj().T @ q
        if np.linalg.norm(gram - np.eye(self.dim)) > tol.eig * max(1, self.dim) * 10:
            raise PreconditionError("basis is not HS-orthonormal", invariant="orthonormal basis")
        eye = np.eye(n, dtype=complex).reshape(-1, 1)
        if _residuals(q, eye)[0] >= tol.rank:
            raise PreconditionError("identity is not in the span", invariant="contains identity")
        adj = np.stack([m.conj().T.reshape(-1) for m in self.basis], axis=1)
        res = _residuals(q, adj)
        if res.max() >= tol.rank:
            raise PreconditionError(
                f"span not closed under adjoint (residual {res.max():.3e})",
                invariant="adjoint closure",
            )
        res = _residuals(q, _pair_products(q, n))
        if res.max() >= tol.rank:
            raise PreconditionError(
                f"span not closed under multiplication (residual {res.max():.3e})",
                invariant="product closure",
            )

    def contains(self, a, tol: Tolerances = DEFAULT_TOL) -> bool:
        a = as_matrix(a)
        if a.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionError(f"expected {self.ambient_dim}x{self.ambient_dim}, got {a.shape}")
        return bool(_residuals(self.coords, a.reshape(-1, 1))[0] < tol.rank)

    def project(self, a) -> np.ndarray:
        """Orthogonal (HS) projection of ``a`` onto the span."""
        a = as_matrix(a)
        v = a.reshape(-1)
        return (self.coords @ (self.coords.conj().T @ v)).reshape(a.shape)

    def is_subalgebra_of(self, other: "StarAlgebra", tol: Tolerances = DEFAULT_TOL) -> bool:
        if self.ambient_dim != other.ambient_dim:
            return False
        return bool(_residuals(other.coords, self.coords).max() < tol.rank)

    def same_span(self, other: "StarAlgebra", tol: Tolerances = DEFAULT_TOL) -> bool:
        return (
            self.dim == other.dim
            and self.is_subalgebra_of(other, tol)
            and other.is_subalgebra_of(self, tol)
        )

    def is_commutative(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        mats = self.coords.T.reshape(-1, self.ambient_dim, self.ambient_dim)
        ab = np.einsum("aij,bjk->abik", mats, mats)
        return bool(np.abs(ab - ab.transpose(1, 0, 2, 3)).max() < tol.rank)

    def to_json(self) -> dict:
        from .io import matrix_to_json

        return {"ambient_dim": self.ambient_dim, "basis": [matrix_to_json(b) for b in self.basis]}


def full_matrix_algebra(n: int) -> StarAlgebra:
    return StarAlgebra(ambient_dim=n, coords=np.eye(n * n, dtype=complex))


def scalar_algebra(n: int) -> StarAlgebra:
    return StarAlgebra(ambient_dim=n, coords=np.eye(n, dtype=complex).reshape(-1, 1) / np.sqrt(n))


def generate_algebra(generators: Sequence, tol: Tolerances = DEFAULT_TOL, n: int = None) -> StarAlgebra:
    """Smallest unital *-algebra containing ``generators``.

    ``n`` is only needed when no generators are given.
    """
    gens = [as_matrix(g, "generator") for g in generators]
    if gens:
        n = gens[0].shape[0]
        for g in gens:
            if g.shape != (n, n):
                raise DimensionError(f"generators must all be {n}x{n}, got {g.shape}")
    elif n is None:
        raise DimensionError("ambient dimension required when there are no generators")
    seed = [np.eye(n, dtype=complex)] + gens + [g.conj().T for g in gens]
    q = _extend_basis(np.zeros((n * n, 0), dtype=complex), _vec(seed), tol)
    while True:
        # pairwise products, adjoints are already in the span by construction
        grown = _extend_basis(q, _pair_products(q, n), tol)
        if grown.shape[1] == q.shape[1]:
            break
        q = grown
        adj = np.stack([m.conj().T.reshape(-1) for m in _unvec(q, n)], axis=1)
        q = _extend_basis(q, adj, tol)
    return StarAlgebra(ambient_dim=n, coords=q)


def _commutator_matrix(mats: np.ndarray, n: int) -> np.ndarray:
    """Stacked linear maps ``B -> A B - B A`` acting on row-major ``vec(B)``."""
    eye = np.eye(n, dtype=complex)
    blocks = [np.kron(a, eye) - np.kron(eye, a.T) for a in mats]
    return np.vstack(blocks)


def _null_space(k: np.ndarray, tol: Tolerances) -> np.ndarray:
    # inputs are built from orthonormal coordinates, so unit scale is the floor
    _, s, vh = np.linalg.svd(k, full_matrices=k.shape[0] < k.shape[1])
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol.rank * max(smax, 1.0)))
    return vh[rank:].conj().T


def commutant(alg: StarAlgebra, tol: Tolerances = DEFAULT_TOL) -> StarAlgebra:
    """All matrices commuting with every element of ``alg``."""
    n = alg.ambient_dim
    mats = alg.coords.T.reshape(-1, n, n)
    k = _commutator_matrix(mats, n)
    return StarAlgebra(ambient_dim=n, coords=_null_space(k, tol))


def center(alg: StarAlgebra, tol: Tolerances = DEFAULT_TOL) -> StarAlgebra:
    """``alg`` intersected with its commutant: the members commuting with all of ``alg``."""
    n = alg.ambient_dim
    mats = alg.coords.T.reshape(-1, n, n)
    k = _commutator_matrix(mats, n) @ alg.coords
    y = _null_space(k, tol)
    q, _ = np.linalg.qr(alg.coords @ y)
    return StarAlgebra(ambient_dim=n, coords=q)


@dataclass(frozen=True)
class CommutantReport:
    commutant: StarAlgebra
    bicommutant: StarAlgebra
    center: StarAlgebra
    dimension: int
    center_dim: int
    is_factor: bool
    is_von_neumann: bool

    def summary(self) -> dict:
        return {
            "dim": self.dimension,
            "commutant_dim": self.commutant.dim,
            "bicommutant_dim": self.bicommutant.dim,
            "center_dim": self.center_dim,
            "is_factor": self.is_factor,
            "is_von_neumann": self.is_von_neumann,
        }


def analyze(alg: StarAlgebra, tol: Tolerances = DEFAULT_TOL) -> CommutantReport:
    alg.validate(tol)
    comm = commutant(alg, tol)
    bicomm = commutant(comm, tol)
    cent = center(alg, tol)
    return CommutantReport(
        commutant=comm,
        bicommutant=bicomm,
        center=cent,
        dimension=alg.dim,
        center_dim=cent.dim,
        is_factor=cent.dim == 1,
        is_von_neumann=alg.same_span(bicomm, tol),
    )
