"""Dense complex linear algebra primitives.

Matrices are plain ``numpy.ndarray`` objects of complex dtype. Bipartite
vectors use row-major (C order) indexing, so basis vector ``|i, j>`` of
``C^n (x) C^m`` sits at position ``i * m + j``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DimensionError, DomainError, PreconditionError


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every routine.

    ``eig`` bounds reconstruction/Hermiticity residuals, ``rank`` is the
    relative singular-value cutoff for span decisions and ``cluster`` merges
    nearly degenerate eigenvalues.
    """

    eig: float = 1e-10
    rank: float = 1e-9
    cluster: float = 1e-8

    def __post_init__(self):
        for name in ("eig", "rank", "cluster"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"tolerance {name} must be strictly positive, got {value}")

    @classmethod
    def from_env(cls, var: str = "MODULAIRE_TOL", **overrides) -> "Tolerances":
        raw = os.environ.get(var)
        if raw is not None and "eig" not in overrides:
            overrides["eig"] = float(raw)
        return cls(**overrides)

    def as_dict(self) -> dict:
        return {"eig": self.eig, "rank": self.rank, "cluster": self.cluster}


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class HermitianEigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} has non-finite entries", invariant="finite entries")
    return m


def as_vector(v, name: str = "vector") -> np.ndarray:
    x = np.asarray(v, dtype=complex)
    if x.ndim == 2 and 1 in x.shape:
        x = x.reshape(-1)
    if x.ndim != 1 or x.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} has non-finite entries", invariant="finite entries")
    return x


def _square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dagger(a), 2))


def is_hermitian(a, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return hermiticity_defect(a) <= tol.eig * max(1.0, np.linalg.norm(a, 2))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr[a^dagger b]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=complex)))


def operator_norm(a) -> float:
    """Largest singular value."""
    a = as_matrix(a)
    return float(np.linalg.norm(a, 2))


def eig_hermitian(a, tol: Tolerances = DEFAULT_TOL) -> HermitianEigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises PreconditionError (reporting ``||a - a^dagger||``) when ``a`` is
    not Hermitian within ``tol.eig`` relative to its norm.
    """
    a = as_matrix(a)
    _square(a, "matrix")
    defect = hermiticity_defect(a)
    if defect > tol.eig * max(1.0, np.linalg.norm(a, 2)):
        raise PreconditionError(
            f"matrix is not Hermitian: ||a - a^dagger|| = {defect:.3e}", invariant="hermitian"
        )
    # symmetrize so LAPACK sees exactly Hermitian input
    h = 0.5 * (a + dagger(a))
    w, u = np.linalg.eigh(h)
    return HermitianEigenSystem(eigenvalues=w, eigenvectors=u)


def cluster_eigenvalues(values: np.ndarray, tol: Tolerances = DEFAULT_TOL):
    """Group ascending eigenvalues whose consecutive gap is below ``tol.cluster``.

    Returns a list of index arrays, one per spectral point.
    """
    if len(values) == 0:
        return []
    groups = [[0]]
    for k in range(1, len(values)):
        if values[k] - values[k - 1] < tol.cluster:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [np.array(g) for g in groups]


def matrix_function(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    tol: Tolerances = DEFAULT_TOL,
    *,
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    zero_value: Optional[float] = None,
) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix by spectral calculus.

    ``domain`` returns a boolean mask of admissible eigenvalues; offending
    eigenvalues raise DomainError. When ``zero_value`` is given, eigenvalues
    within ``tol.eig`` of zero are mapped to it instead of calling ``f``
    (e.g. ``zero_value=0`` for the ``0 log 0 = 0`` convention).
    """
    es = eig_hermitian(a, tol)
    lam = es.eigenvalues.copy()
    out = np.empty_like(lam)
    near_zero = np.abs(lam) <= tol.eig
    if zero_value is not None:
        out[near_zero] = zero_value
        rest = ~near_zero
    else:
        rest = np.ones_like(lam, dtype=bool)
    if domain is not None:
        ok = domain(lam[rest])
        if not np.all(ok):
            bad = lam[rest][~ok]
            raise DomainError(
                f"function undefined at eigenvalues {bad.tolist()}", invariant="function domain"
            )
    with np.errstate(all="ignore"):
        vals = np.asarray(f(lam[rest]), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = lam[rest][~np.isfinite(vals)]
        raise DomainError(
            f"function undefined at eigenvalues {bad.tolist()}", invariant="function domain"
        )
    out[rest] = vals
    u = es.eigenvectors
    return (u * out) @ dagger(u)


def safe_log(a, tol: Tolerances = DEFAULT_TOL, *, zero_convention: bool = True) -> np.ndarray:
    """Matrix log of a positive semidefinite matrix.

    With ``zero_convention`` the null space maps to 0, which is what the
    ``0 log 0 = 0`` entropy sums need.
    """
    return matrix_function(
        a,
        np.log,
        tol,
        domain=lambda x: x > 0,
        zero_value=0.0 if zero_convention else None,
    )


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_dims(total: int, dims: Tuple[int, int]) -> Tuple[int, int]:
    if len(dims) != 2:
        raise DimensionError(f"expected two subsystem dimensions, got {dims}")
    d1, d2 = int(dims[0]), int(dims[1])
    if d1 < 1 or d2 < 1 or d1 * d2 != total:
        raise DimensionError(f"dimension {total} does not factor as {d1} x {d2}")
    return d1, d2


def partial_trace(rho, dims: Tuple[int, int], keep: int = 0) -> np.ndarray:
    """Reduced matrix on subsystem ``keep`` (0 or 1) of a bipartite operator."""
    rho = as_matrix(rho, "rho")
    _square(rho, "rho")
    d1, d2 = _check_dims(rho.shape[0], dims)
    t = rho.reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise DimensionError(f"keep must be 0 or 1, got {keep}")


def reshape_bipartite(psi, dims: Tuple[int, int]) -> np.ndarray:
    """Coefficient matrix ``M[i, j] = <i, j | psi>`` for arbitrary ``n x m``."""
    psi = as_vector(psi, "psi")
    d1, d2 = _check_dims(psi.size, dims)
    return psi.reshape(d1, d2)


def partial_transpose_to_matrix(psi, dims: Tuple[int, int]) -> np.ndarray:
    """Tilde picture: the ``n x n`` coefficient matrix of a bipartite vector.

    ``sum_k c_k |k, k>`` maps to ``diag(c)``; the map is an isometry from the
    Euclidean norm onto the Hilbert-Schmidt norm.
    """
    if len(dims) != 2 or dims[0] != dims[1]:
        raise DimensionError(f"tilde picture needs a square bipartition, got {tuple(dims)}")
    return reshape_bipartite(psi, dims)


def matrix_to_vector(m) -> np.ndarray:
    """Inverse of :func:`partial_transpose_to_matrix`."""
    return np.asarray(m, dtype=complex).reshape(-1)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z + dagger(z))


def random_matrix(n: int, rng: np.random.Generator, m: Optional[int] = None) -> np.ndarray:
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """``E_ij`` with zero-based indices."""
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e
