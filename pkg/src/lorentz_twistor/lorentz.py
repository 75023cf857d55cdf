"""Signature-aware linear algebra for Lorentzian vector spaces.

Timelike coordinates come first and carry the sign -1.  Vectors are plain
numpy arrays; the small dataclasses below attach a signature where it helps
to keep one around (frames, Lie algebra elements, null directions).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NULL_TOL = 1e-10


class SignatureError(ValueError):
    """Raised when vectors or matrices do not match the signature in use."""


@dataclass(frozen=True)
class Signature:
    epsilons: tuple[int, ...]

    def __post_init__(self):
        if any(e not in (-1, 1) for e in self.epsilons):
            raise SignatureError(f"signs must be +-1, got {self.epsilons}")

    @property
    def dims(self) -> int:
        return len(self.epsilons)

    @property
    def eta(self) -> np.ndarray:
        return np.diag(np.asarray(self.epsilons, dtype=float))

    @classmethod
    def lorentz(cls, n_time: int, n_space: int) -> "Signature":
        return cls((-1,) * n_time + (1,) * n_space)

    def inner(self, u, v) -> np.ndarray:
        """Pairing sum_i eps_i u_i v_i, broadcast over leading axes."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape[-1] != self.dims or v.shape[-1] != self.dims:
            raise SignatureError(
                f"expected {self.dims} components, got {u.shape[-1]} and {v.shape[-1]}"
            )
        return np.einsum("...i,i,...i->...", u, np.asarray(self.epsilons, float), v)

    def lower(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float) * np.asarray(self.epsilons, float)


R41 = Signature.lorentz(1, 3)
R51 = Signature.lorentz(1, 4)
R52 = Signature.lorentz(2, 3)


@dataclass
class MVec:
    components: np.ndarray
    signature: Signature

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        if self.components.shape != (self.signature.dims,):
            raise SignatureError("component count does not match signature")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


def _components(u) -> np.ndarray:
    return u.components if isinstance(u, MVec) else np.asarray(u, dtype=float)


def inner(u, v, sig: Signature | None = None) -> float:
    """Signature pairing of two vectors.

    When both arguments are :class:`MVec` their signatures must agree; plain
    arrays need ``sig``.
    """
    if isinstance(u, MVec) and isinstance(v, MVec):
        if u.signature != v.signature:
            raise SignatureError("signature mismatch")
        sig = u.signature
    elif sig is None:
        sig = u.signature if isinstance(u, MVec) else getattr(v, "signature", None)
        if sig is None:
            raise SignatureError("a signature is required for raw arrays")
    return float(sig.inner(_components(u), _components(v)))


def gram(vectors, sig: Signature) -> np.ndarray:
    """Matrix of pairwise inner products of the rows of ``vectors``."""
    V = np.asarray(vectors, dtype=float)
    return V @ sig.eta @ V.T


@dataclass
class Frame:
    """Ordered orthonormal frame; rows of ``vectors`` are e_1, ..., e_k."""

    vectors: np.ndarray
    signature: Signature
    frame_signs: tuple[int, ...] = (-1, 1, 1, 1)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)

    def gram_residual(self) -> float:
        G = gram(self.vectors, self.signature)
        return float(np.max(np.abs(G - np.diag(self.frame_signs))))

    def check(self, tol: float = NULL_TOL) -> None:
        if self.gram_residual() > tol:
            raise SignatureError("frame is not orthonormal for its signature")


def standard_frame(sig: Signature = R41) -> Frame:
    return Frame(np.eye(sig.dims), sig, tuple(sig.epsilons))


# -- Lie algebra of the signature's orthogonal group ------------------------

@dataclass
class LieElem:
    matrix: np.ndarray
    signature: Signature

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)

    def antisymmetry_residual(self) -> float:
        # <Xu, v> + <u, Xv> = 0 for all u, v  <=>  X^T eta + eta X = 0
        eta = self.signature.eta
        return float(np.max(np.abs(self.matrix.T @ eta + eta @ self.matrix)))

    def __add__(self, other: "LieElem") -> "LieElem":
        return LieElem(self.matrix + other.matrix, self.signature)

    def __sub__(self, other: "LieElem") -> "LieElem":
        return LieElem(self.matrix - other.matrix, self.signature)

    def __neg__(self) -> "LieElem":
        return LieElem(-self.matrix, self.signature)

    def __rmul__(self, scalar: float) -> "LieElem":
        return LieElem(scalar * self.matrix, self.signature)


def lie_basis(i: int, j: int, sig: Signature = R41) -> LieElem:
    """Basis element E_ij (1-based, i < j).

    Entry (i, j) is -eps_j and entry (j, i) is eps_i, so E_ij u_i = eps_i u_j
    and E_ij u_j = -eps_j u_i.
    """
    if not (1 <= i < j <= sig.dims):
        raise IndexError(f"need 1 <= i < j <= {sig.dims}, got ({i}, {j})")
    M = np.zeros((sig.dims, sig.dims))
    M[i - 1, j - 1] = -sig.epsilons[j - 1]
    M[j - 1, i - 1] = sig.epsilons[i - 1]
    return LieElem(M, sig)


def commutator(a: LieElem, b: LieElem) -> LieElem:
    return LieElem(a.matrix @ b.matrix - b.matrix @ a.matrix, a.signature)


def basis_coefficients(x: LieElem) -> dict[tuple[int, int], float]:
    """Expand ``x`` in the E_ij basis (exact read-off of the upper triangle)."""
    sig = x.signature
    out = {}
    for i in range(1, sig.dims + 1):
        for j in range(i + 1, sig.dims + 1):
            out[(i, j)] = -x.matrix[i - 1, j - 1] / sig.epsilons[j - 1]
    return out


def m_plus_basis() -> tuple[LieElem, LieElem]:
    """(E13 - E23, E14 - E24): tangent model of the fibre at R(u1 + u2)."""
    return (lie_basis(1, 3) - lie_basis(2, 3), lie_basis(1, 4) - lie_basis(2, 4))


def m_minus_basis() -> tuple[LieElem, LieElem]:
    """(E13 + E23, E14 + E24): tangent model of the fibre at R(u1 - u2)."""
    return (lie_basis(1, 3) + lie_basis(2, 3), lie_basis(1, 4) + lie_basis(2, 4))


class DomainError(ValueError):
    pass


def fibre_complex_structure(m_elem: LieElem, minus: bool = False, tol: float = 1e-10) -> LieElem:
    """Complex structure on the 2-dimensional fibre tangent model.

    Sends the first basis vector b1 to -b2 and b2 to b1, where (b1, b2) is
    :func:`m_plus_basis` (or :func:`m_minus_basis` with ``minus=True``).
    """
    b1, b2 = m_minus_basis() if minus else m_plus_basis()
    A = np.stack([b1.matrix.ravel(), b2.matrix.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(A, m_elem.matrix.ravel(), rcond=None)
    if np.max(np.abs(A @ coef - m_elem.matrix.ravel())) > tol:
        raise DomainError("element is not in the fibre tangent model")
    a, b = coef
    return LieElem(-a * b2.matrix + b * b1.matrix, m_elem.signature)


def fibre_j_coords(a, b, sign: int = 1):
    """Same structure in coordinates: (a, b) -> sign * (b, -a)."""
    return sign * np.asarray(b), -sign * np.asarray(a)


# -- null directions ---------------------------------------------------------

@dataclass
class NullDir:
    representative: np.ndarray
    signature: Signature = R41
    reference: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        self.representative = np.asarray(self.representative, dtype=float)
        scale = max(1.0, float(np.max(np.abs(self.representative))))
        if np.max(np.abs(self.representative)) == 0:
            raise SignatureError("null direction needs a nonzero representative")
        if abs(self.signature.inner(self.representative, self.representative)) > NULL_TOL * scale**2:
            raise SignatureError("representative is not null")

    def _ref(self) -> np.ndarray:
        if self.reference is not None:
            return np.asarray(self.reference, float)
        ref = np.zeros(self.signature.dims)
        ref[0] = 1.0
        return ref

    def normalized(self, reference=None) -> np.ndarray:
        """Representative scaled so that <k, T> = -1, i.e. k = T + S."""
        T = self._ref() if reference is None else np.asarray(reference, float)
        c = self.signature.inner(self.representative, T)
        if abs(c) < NULL_TOL:
            raise SignatureError("null direction is orthogonal to the reference vector")
        return -self.representative / c

    def __eq__(self, other) -> bool:
        if not isinstance(other, NullDir) or other.signature != self.signature:
            return NotImplemented
        return bool(np.allclose(self.normalized(), other.normalized(self._ref()), atol=NULL_TOL, rtol=0))


def null_split(frame: Frame) -> tuple[NullDir, NullDir]:
    """Positive and negative normal null directions R(e1 + e2), R(e1 - e2)."""
    e1, e2 = frame.vectors[0], frame.vectors[1]
    sig = frame.signature
    if sig.inner(e1, e1) >= 0 or sig.inner(e2, e2) <= 0:
        raise SignatureError("need e1 timelike and e2 spacelike")
    return NullDir(e1 + e2, sig), NullDir(e1 - e2, sig)


def fibre_ident(S, T, sig: Signature = R41, tol: float = 1e-10) -> NullDir:
    """Null direction R(T + S) for unit timelike T and unit S orthogonal to it."""
    S = np.asarray(S, float)
    T = np.asarray(T, float)
    if (abs(sig.inner(T, T) + 1) > tol or abs(sig.inner(S, S) - 1) > tol
            or abs(sig.inner(S, T)) > tol):
        raise ValueError("need <T,T> = -1, <S,S> = 1, <S,T> = 0")
    return NullDir(T + S, sig, reference=T)


def fibre_point(k: NullDir, T) -> np.ndarray:
    """Inverse of :func:`fibre_ident`: the unit vector S with R(T + S) = k."""
    T = np.asarray(T, float)
    return k.normalized(T) - T


def boost_rotation(rapidity: float, angle: float, sig: Signature = R41) -> np.ndarray:
    """exp(rapidity * E12) @ exp(angle * E34) as a matrix (columns act on u_i)."""
    return _expm(rapidity * lie_basis(1, 2, sig).matrix) @ _expm(angle * lie_basis(3, 4, sig).matrix)


def _expm(A: np.ndarray) -> np.ndarray:
    from scipy.linalg import expm

    return expm(A)


def random_lorentz(rng: np.random.Generator, max_rapidity: float = 1.0) -> np.ndarray:
    """Random proper orthochronous Lorentz matrix for R41 (columns are images of u_i)."""
    from scipy.spatial.transform import Rotation

    rot = np.eye(4)
    rot[1:, 1:] = Rotation.random(random_state=rng).as_matrix()
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    phi = rng.uniform(-max_rapidity, max_rapidity)
    boost = np.eye(4)
    boost[0, 0] = np.cosh(phi)
    boost[0, 1:] = boost[1:, 0] = np.sinh(phi) * direction
    boost[1:, 1:] += (np.cosh(phi) - 1.0) * np.outer(direction, direction)
    return boost @ rot


def signature_of(vectors: Sequence[np.ndarray], sig: Signature) -> np.ndarray:
    return np.linalg.eigvalsh(gram(np.asarray(vectors), sig))
