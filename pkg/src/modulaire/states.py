"""Density matrices, Born statistics and Schmidt analysis of bipartite vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    as_vector,
    eig_hermitian,
    kron,
    partial_trace,
    reshape_bipartite,
)
from .projlat import spectral_pvm


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix, "density matrix"))

    @classmethod
    def from_matrix(cls, rho, tol: Tolerances = DEFAULT_TOL) -> "DensityMatrix":
        rho = as_matrix(rho, "density matrix")
        if rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density matrix must be square, got {rho.shape}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > tol.eig:
            raise PreconditionError(
                f"density matrix trace = {tr.real:.12g}, expected 1 ± {tol.eig:g}",
                invariant="unit trace",
            )
        lam = eig_hermitian(rho, tol).eigenvalues
        if lam[0] < -tol.eig:
            raise PreconditionError(
                f"density matrix has eigenvalue {lam[0]:.3e} < 0", invariant="positivity"
            )
        return cls(matrix=rho)

    @classmethod
    def from_vector(cls, psi) -> "DensityMatrix":
        psi = as_vector(psi, "state")
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise PreconditionError("zero vector has no density matrix", invariant="nonzero vector")
        psi = psi / nrm
        return cls(matrix=np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        return eig_hermitian(self.matrix).eigenvalues


def _rho(rho, tol) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix.from_matrix(rho, tol)


def reduced_density(psi, dims: Tuple[int, int], keep: int = 0) -> DensityMatrix:
    """Reduced state of a (normalized) bipartite vector on subsystem ``keep``."""
    m = reshape_bipartite(psi, dims)
    nrm = np.linalg.norm(m)
    if nrm == 0:
        raise PreconditionError("zero vector", invariant="nonzero vector")
    m = m / nrm
    if keep == 0:
        return DensityMatrix(matrix=m @ m.conj().T)
    if keep == 1:
        return DensityMatrix(matrix=m.T @ m.conj())
    raise DimensionError(f"keep must be 0 or 1, got {keep}")


def expectation(rho, obs, tol: Tolerances = DEFAULT_TOL) -> complex:
    rho = _rho(rho, tol)
    obs = as_matrix(obs, "observable")
    if obs.shape != rho.matrix.shape:
        raise DimensionError(f"observable shape {obs.shape} does not match state {rho.matrix.shape}")
    return complex(np.trace(rho.matrix @ obs))


def born_probability(rho, obs, interval: Tuple[float, float], tol: Tolerances = DEFAULT_TOL) -> float:
    """Probability that measuring ``obs`` lands in the closed ``interval``."""
    rho = _rho(rho, tol)
    obs = as_matrix(obs, "observable")
    if obs.shape != rho.matrix.shape:
        raise DimensionError(f"observable shape {obs.shape} does not match state {rho.matrix.shape}")
    lo, hi = interval
    p = spectral_pvm(obs, tol).projector_for(lo, hi)
    return float(np.trace(p @ rho.matrix).real)


class Purity(str, enum.Enum):
    PURE = "pure"
    MIXED = "mixed"
    MAXIMALLY_MIXED = "maximally_mixed"


def purity_class(rho, tol: Tolerances = DEFAULT_TOL) -> Purity:
    rho = _rho(rho, tol)
    m = rho.matrix
    if np.linalg.norm(m @ m - m, 2) < tol.eig:
        return Purity.PURE
    if np.linalg.norm(m - np.eye(rho.dim) / rho.dim, 2) < tol.eig:
        return Purity.MAXIMALLY_MIXED
    return Purity.MIXED


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``psi = sum_k c_k left[:, k] (x) right[:, k]`` with ``c`` descending."""

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    schmidt_rank: int
    dims: Tuple[int, int]

    def vector(self) -> np.ndarray:
        t = (self.left_basis * self.coefficients) @ self.right_basis.T
        return t.reshape(-1)

    def tilde(self) -> np.ndarray:
        return (self.left_basis * self.coefficients) @ self.right_basis.T


def schmidt(psi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL) -> SchmidtDecomposition:
    m = reshape_bipartite(psi, dims)
    if np.linalg.norm(m) == 0:
        raise PreconditionError("Schmidt decomposition of the zero vector", invariant="nonzero vector")
    u, s, vh = np.linalg.svd(m)
    k = min(m.shape)
    return SchmidtDecomposition(
        coefficients=s,
        left_basis=u[:, :k],
        right_basis=vh[:k, :].T,
        schmidt_rank=int(np.sum(s > tol.rank * max(1.0, s[0]))),
        dims=(m.shape[0], m.shape[1]),
    )


def from_schmidt(coefficients, left, right) -> np.ndarray:
    """Assemble ``sum_k c_k left_k (x) right_k`` as a flat vector."""
    c = np.asarray(coefficients, dtype=complex)
    left = as_matrix(left, "left basis")
    right = as_matrix(right, "right basis")
    if left.shape[1] != c.size or right.shape[1] != c.size:
        raise DimensionError("Schmidt bases need one column per coefficient")
    return ((left * c) @ right.T).reshape(-1)


def is_entangled_pure(psi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL) -> bool:
    return schmidt(psi, dims, tol).schmidt_rank >= 2


def two_qubit_pure_example(c1: complex, c2: complex) -> np.ndarray:
    """``c1 |00> + c2 |11>``, the standard-basis entangled pair."""
    return np.array([c1, 0, 0, c2], dtype=complex)


def two_qubit_separable_example(p1: float, p2: float) -> np.ndarray:
    """``p1 |0><0| (x) |0><0| + p2 |1><1| (x) |1><1|``."""
    e0 = np.diag([1.0, 0.0]).astype(complex)
    e1 = np.diag([0.0, 1.0]).astype(complex)
    return p1 * kron(e0, e0) + p2 * kron(e1, e1)


def density_of(psi) -> np.ndarray:
    psi = as_vector(psi)
    return np.outer(psi, psi.conj())


__all__ = [
    "DensityMatrix",
    "Purity",
    "SchmidtDecomposition",
    "born_probability",
    "density_of",
    "expectation",
    "from_schmidt",
    "is_entangled_pure",
    "partial_trace",
    "purity_class",
    "reduced_density",
    "schmidt",
    "two_qubit_pure_example",
    "two_qubit_separable_example",
]
