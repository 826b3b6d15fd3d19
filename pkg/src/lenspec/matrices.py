"""Small dense-matrix kernel: operator norms, spectral radii, representations.

Everything is sized for m x m matrices with m <= 4.  For m <= 2 the spectral
data comes from closed-form characteristic polynomials; larger matrices fall
back to iteration (normalized repeated squaring for the spectral radius,
power iteration on A^T A for the top singular value).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoConvergence, PreconditionViolated
from .words import Word, parse_word

__all__ = [
    "MatrixSet",
    "Representation",
    "spectral_radius",
    "operator_norm",
    "smallest_eigenvalue_modulus",
    "singular_values_2x2",
]


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise PreconditionViolated(f"expected a square matrix, got shape {m.shape}")
    return m


def spectral_radius(a, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Largest eigenvalue modulus.

    Closed form for 2x2 (roots of x^2 - tr x + det); otherwise normalized
    repeated squaring until the Gelfand estimate ||A^(2^k)||^(1/2^k)
    stabilizes.
    """
    m = _as_matrix(a)
    n = m.shape[0]
    if n == 1:
        return abs(float(m[0, 0]))
    if n == 2:
        tr = float(m[0, 0] + m[1, 1])
        det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
        disc = tr * tr - 4.0 * det
        if disc >= 0.0:
            s = math.sqrt(disc)
            return max(abs((tr + s) / 2.0), abs((tr - s) / 2.0))
        return math.sqrt(abs(det))  # complex pair, |root| = sqrt(det)
    return _gelfand(m, tol, max_iter)


def _gelfand(m: np.ndarray, tol: float, max_iter: int) -> float:
    b = m.copy()
    logscale = 0.0
    weight = 1.0  # 1 / 2^k
    prev = None
    for _ in range(max_iter):
        norm = float(np.sqrt((b * b).sum()))
        if norm == 0.0 or not math.isfinite(norm):
            return 0.0 if norm == 0.0 else math.inf
        estimate = weight * (logscale + math.log(norm))
        if prev is not None and abs(estimate - prev) <= tol * max(1.0, abs(estimate)):
            return math.exp(estimate)
        prev = estimate
        b = b / norm
        b = b @ b
        logscale = 2.0 * (logscale + math.log(norm))
        weight /= 2.0
    raise NoConvergence("spectral radius did not stabilize", best=math.exp(prev))


def operator_norm(a, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Largest singular value; closed form for m <= 2, else power iteration."""
    m = _as_matrix(a)
    n = m.shape[0]
    if n == 1:
        return abs(float(m[0, 0]))
    if n == 2:
        return singular_values_2x2(m)[0]
    g = m.T @ m
    v = np.ones(n) / math.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        w = g @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v_next = w / norm
        if abs(norm - lam) <= tol * max(1.0, norm):
            return math.sqrt(norm)
        lam = norm
        v = v_next
    raise NoConvergence("power iteration did not stabilize", best=math.sqrt(lam))


def singular_values_2x2(a) -> tuple[float, float]:
    """Both singular values of a 2x2 matrix, closed form."""
    m = _as_matrix(a)
    g = m.T @ m
    tr = float(g[0, 0] + g[1, 1])
    det = float(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])
    disc = max(0.0, tr * tr - 4.0 * det)
    s = math.sqrt(disc)
    hi = math.sqrt(max(0.0, (tr + s) / 2.0))
    lo = math.sqrt(max(0.0, (tr - s) / 2.0))
    return hi, lo


def smallest_eigenvalue_modulus(a) -> float:
    """|lambda_m| via the spectral radius of the inverse."""
    m = _as_matrix(a)
    det = float(np.linalg.det(m))
    if det == 0.0:
        return 0.0
    return 1.0 / spectral_radius(np.linalg.inv(m))


@dataclass(frozen=True)
class MatrixSet:
    """A finite set of square matrices of one dimension."""

    dimension: int
    matrices: tuple[np.ndarray, ...]

    def __init__(self, matrices: Sequence):
        mats = tuple(_as_matrix(m) for m in matrices)
        if not mats:
            raise PreconditionViolated("matrix set must be nonempty")
        dim = mats[0].shape[0]
        for m in mats:
            if m.shape[0] != dim:
                raise PreconditionViolated("matrices must share one dimension")
            if not m.any():
                raise PreconditionViolated("matrix set must not contain the zero matrix")
        object.__setattr__(self, "dimension", dim)
        object.__setattr__(self, "matrices", mats)

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)


class Representation:
    """Map from free-group letters to matrices, inverse pairs validated."""

    def __init__(self, rank: int, images: Sequence, inverse_images: Sequence | None = None,
                 normalized: bool = True, tol: float = 1e-10):
        self.rank = rank
        mats = [_as_matrix(m) for m in images]
        if len(mats) != rank:
            raise PreconditionViolated("need one matrix per generator")
        dim = mats[0].shape[0]
        if inverse_images is None:
            invs = [np.linalg.inv(m) for m in mats]
        else:
            invs = [_as_matrix(m) for m in inverse_images]
        self.dimension = dim
        self.normalized = normalized
        table: list[np.ndarray] = []
        eye = np.eye(dim)
        for g in range(rank):
            prod = mats[g] @ invs[g]
            if np.abs(prod - eye).max() > tol:
                raise PreconditionViolated(f"generator {g}: image times inverse image is not the identity")
            if normalized and abs(abs(np.linalg.det(mats[g])) - 1.0) > tol:
                raise PreconditionViolated(f"generator {g}: determinant modulus is not 1")
            table.append(mats[g])
            table.append(invs[g])
        self._table = table

    def letter_image(self, letter: int) -> np.ndarray:
        return self._table[letter]

    def apply(self, w: bytes) -> np.ndarray:
        out = np.eye(self.dimension)
        for b in w:
            out = out @ self._table[b]
        return out

    def generator_set(self, include_inverses: bool = True) -> MatrixSet:
        mats = self._table if include_inverses else self._table[::2]
        return MatrixSet(mats)

    @classmethod
    def schottky_2x2(cls, stretch: float = 4.0, angle_deg: float = 45.0) -> "Representation":
        """Ping-pong pair: a diagonal stretch and its rotated conjugate."""
        a = np.array([[stretch, 0.0], [0.0, 1.0 / stretch]])
        t = math.radians(angle_deg)
        r = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        b = r @ a @ r.T
        return cls(2, [a, b])


def parse_matrix(entries: Sequence[float], dimension: int) -> np.ndarray:
    flat = [float(x) for x in entries]
    if len(flat) != dimension * dimension:
        raise PreconditionViolated(
            f"expected {dimension * dimension} entries for a {dimension}x{dimension} matrix"
        )
    return np.array(flat, dtype=float).reshape(dimension, dimension)
